//! Dense kernels behind a small residual-specified contract.
//!
//! Everything here is a thin wrapper around LAPACK (OpenBLAS build). Matrices
//! are `nalgebra::DMatrix<f64>`, whose column-major storage is handed to the
//! Fortran routines directly. Callers must not rely on any particular
//! eigenvalue ordering.

use std::os::raw::{c_char, c_int};

use lapack_sys as ffi;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

// Linked for its side effect: provides the LAPACK/BLAS symbols.
use openblas_src as _;

fn ch(c: u8) -> *const c_char {
    // LAPACK only reads the first byte; a static keeps the pointer valid.
    static FLAGS: [u8; 256] = {
        let mut t = [0u8; 256];
        let mut i = 0;
        while i < 256 {
            t[i] = i as u8;
            i += 1;
        }
        t
    };
    &FLAGS[c as usize] as *const u8 as *const c_char
}

fn dim(n: usize) -> c_int {
    c_int::try_from(n).expect("matrix dimension exceeds LAPACK integer range")
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{what} has non-finite entries")))
    }
}

/// Thin singular value decomposition `M = U diag(S) Vt`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m x p` left singular vectors, `p = min(m, n)`.
    pub u: DMatrix<f64>,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `p x n` transposed right singular vectors.
    pub vt: DMatrix<f64>,
}

impl Svd {
    /// `U diag(S) Vt`, mostly useful for checking the factorization.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.vt
    }
}

/// Thin SVD via divide and conquer (`dgesdd`), falling back to `dgesvd`
/// when the former does not converge.
pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    check_finite(m, "svd input")?;
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    if p == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            vt: DMatrix::zeros(0, cols),
        });
    }
    match gesdd(m, true) {
        Ok(out) => Ok(out),
        Err(Error::Kernel { info, .. }) if info > 0 => gesvd(m),
        Err(e) => Err(e),
    }
}

/// Singular values only, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m, "svd input")?;
    if m.nrows().min(m.ncols()) == 0 {
        return Ok(Vec::new());
    }
    match gesdd(m, false) {
        Ok(out) => Ok(out.singular_values),
        Err(Error::Kernel { info, .. }) if info > 0 => Ok(gesvd(m)?.singular_values),
        Err(e) => Err(e),
    }
}

fn gesdd(m: &DMatrix<f64>, vectors: bool) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    let mut a = m.clone();
    let mut s = vec![0.0; p];
    let (mut u, mut vt) = if vectors {
        (DMatrix::zeros(rows, p), DMatrix::zeros(p, cols))
    } else {
        (DMatrix::zeros(1, 1), DMatrix::zeros(1, 1))
    };
    let jobz = if vectors { b'S' } else { b'N' };
    let ldu = if vectors { rows } else { 1 };
    let ldvt = if vectors { p } else { 1 };
    let mut iwork = vec![0 as c_int; 8 * p];
    let mut info: c_int = 0;
    let mut query = [0.0f64];
    unsafe {
        ffi::dgesdd_(
            ch(jobz),
            &dim(rows),
            &dim(cols),
            a.as_mut_ptr(),
            &dim(rows),
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &dim(ldu),
            vt.as_mut_ptr(),
            &dim(ldvt),
            query.as_mut_ptr(),
            &-1,
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    let lwork = query[0] as usize;
    let mut work = vec![0.0; lwork.max(1)];
    unsafe {
        ffi::dgesdd_(
            ch(jobz),
            &dim(rows),
            &dim(cols),
            a.as_mut_ptr(),
            &dim(rows),
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &dim(ldu),
            vt.as_mut_ptr(),
            &dim(ldvt),
            work.as_mut_ptr(),
            &dim(work.len()),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Kernel {
            routine: "dgesdd",
            info,
            detail: String::new(),
        });
    }
    if !vectors {
        u = DMatrix::zeros(rows, 0);
        vt = DMatrix::zeros(0, cols);
    }
    Ok(Svd {
        u,
        singular_values: s,
        vt,
    })
}

fn gesvd(m: &DMatrix<f64>) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    let mut a = m.clone();
    let mut s = vec![0.0; p];
    let mut u = DMatrix::zeros(rows, p);
    let mut vt = DMatrix::zeros(p, cols);
    let mut info: c_int = 0;
    let mut query = [0.0f64];
    unsafe {
        ffi::dgesvd_(
            ch(b'S'),
            ch(b'S'),
            &dim(rows),
            &dim(cols),
            a.as_mut_ptr(),
            &dim(rows),
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &dim(rows),
            vt.as_mut_ptr(),
            &dim(p),
            query.as_mut_ptr(),
            &-1,
            &mut info,
        );
    }
    let mut work = vec![0.0; (query[0] as usize).max(1)];
    unsafe {
        ffi::dgesvd_(
            ch(b'S'),
            ch(b'S'),
            &dim(rows),
            &dim(cols),
            a.as_mut_ptr(),
            &dim(rows),
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &dim(rows),
            vt.as_mut_ptr(),
            &dim(p),
            work.as_mut_ptr(),
            &dim(work.len()),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Kernel {
            routine: "dgesvd",
            info,
            detail: " (no convergence)".into(),
        });
    }
    Ok(Svd {
        u,
        singular_values: s,
        vt,
    })
}

/// A generalized eigenvalue of a pencil `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalue {
    Finite(Complex64),
    Infinite,
}

impl Eigenvalue {
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            Eigenvalue::Finite(z) => Some(*z),
            Eigenvalue::Infinite => None,
        }
    }
}

fn classify(alphar: f64, alphai: f64, beta: f64) -> Eigenvalue {
    let alpha = Complex64::new(alphar, alphai);
    if beta == 0.0 || beta.abs() <= f64::EPSILON * alpha.norm() {
        Eigenvalue::Infinite
    } else {
        let z = alpha / beta;
        if z.re.is_finite() && z.im.is_finite() {
            Eigenvalue::Finite(z)
        } else {
            Eigenvalue::Infinite
        }
    }
}

struct Ggev {
    alphar: Vec<f64>,
    alphai: Vec<f64>,
    beta: Vec<f64>,
    vr: Option<DMatrix<f64>>,
}

fn ggev(a: &DMatrix<f64>, b: &DMatrix<f64>, vectors: bool) -> Result<Ggev> {
    let n = a.nrows();
    if a.ncols() != n || b.shape() != (n, n) {
        return Err(Error::Argument(format!(
            "generalized eigenproblem needs square matrices of equal shape, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    check_finite(a, "pencil matrix A")?;
    check_finite(b, "pencil matrix B")?;
    let mut aa = a.clone();
    let mut bb = b.clone();
    let mut alphar = vec![0.0; n];
    let mut alphai = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut vl = [0.0f64];
    let mut vr = if vectors {
        DMatrix::zeros(n, n)
    } else {
        DMatrix::zeros(1, 1)
    };
    let jobvr = if vectors { b'V' } else { b'N' };
    let ldvr = if vectors { n.max(1) } else { 1 };
    let mut info: c_int = 0;
    let mut query = [0.0f64];
    if n == 0 {
        return Ok(Ggev {
            alphar,
            alphai,
            beta,
            vr: vectors.then(|| DMatrix::zeros(0, 0)),
        });
    }
    unsafe {
        ffi::dggev_(
            ch(b'N'),
            ch(jobvr),
            &dim(n),
            aa.as_mut_ptr(),
            &dim(n),
            bb.as_mut_ptr(),
            &dim(n),
            alphar.as_mut_ptr(),
            alphai.as_mut_ptr(),
            beta.as_mut_ptr(),
            vl.as_mut_ptr(),
            &1,
            vr.as_mut_ptr(),
            &dim(ldvr),
            query.as_mut_ptr(),
            &-1,
            &mut info,
        );
    }
    let mut work = vec![0.0; (query[0] as usize).max(8 * n)];
    unsafe {
        ffi::dggev_(
            ch(b'N'),
            ch(jobvr),
            &dim(n),
            aa.as_mut_ptr(),
            &dim(n),
            bb.as_mut_ptr(),
            &dim(n),
            alphar.as_mut_ptr(),
            alphai.as_mut_ptr(),
            beta.as_mut_ptr(),
            vl.as_mut_ptr(),
            &1,
            vr.as_mut_ptr(),
            &dim(ldvr),
            work.as_mut_ptr(),
            &dim(work.len()),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Kernel {
            routine: "dggev",
            info,
            detail: format!(
                " (pencil of order {n}, |A|_F = {:e}, |B|_F = {:e})",
                a.norm(),
                b.norm()
            ),
        });
    }
    Ok(Ggev {
        alphar,
        alphai,
        beta,
        vr: vectors.then_some(vr),
    })
}

/// Generalized eigenvalues of `(A, B)`, i.e. the roots of `det(A - λB)`.
pub fn generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<Eigenvalue>> {
    let g = ggev(a, b, false)?;
    Ok((0..a.nrows())
        .map(|i| classify(g.alphar[i], g.alphai[i], g.beta[i]))
        .collect())
}

/// Generalized eigenvalues together with right eigenvectors `(A - λB) v = 0`.
/// For infinite eigenvalues the vector satisfies `B v = 0`.
pub fn generalized_eig_vectors(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<Vec<(Eigenvalue, DVector<Complex64>)>> {
    let n = a.nrows();
    let g = ggev(a, b, true)?;
    let vr = g.vr.expect("vectors requested");
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        let ev = classify(g.alphar[j], g.alphai[j], g.beta[j]);
        if g.alphai[j] != 0.0 && j + 1 < n {
            // Complex pair stored as (re, im) in consecutive columns.
            let v: DVector<Complex64> =
                DVector::from_fn(n, |i, _| Complex64::new(vr[(i, j)], vr[(i, j + 1)]));
            let ev2 = classify(g.alphar[j + 1], g.alphai[j + 1], g.beta[j + 1]);
            out.push((ev, v.clone()));
            out.push((ev2, v.map(|z| z.conj())));
            j += 2;
        } else {
            let v = DVector::from_fn(n, |i, _| Complex64::new(vr[(i, j)], 0.0));
            out.push((ev, v));
            j += 1;
        }
    }
    Ok(out)
}

/// LU factorization with partial pivoting and a 1-norm condition estimate.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: DMatrix<f64>,
    pivots: Vec<c_int>,
    rcond: f64,
}

impl Lu {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Argument(format!(
                "LU needs a square matrix, got {:?}",
                a.shape()
            )));
        }
        check_finite(a, "system matrix")?;
        let mut factors = a.clone();
        let mut pivots = vec![0 as c_int; n];
        if n == 0 {
            return Ok(Lu {
                factors,
                pivots,
                rcond: 1.0,
            });
        }
        let mut info: c_int = 0;
        let anorm = unsafe {
            ffi::dlange_(
                ch(b'1'),
                &dim(n),
                &dim(n),
                a.as_ptr(),
                &dim(n),
                std::ptr::null_mut(),
            )
        };
        unsafe {
            ffi::dgetrf_(
                &dim(n),
                &dim(n),
                factors.as_mut_ptr(),
                &dim(n),
                pivots.as_mut_ptr(),
                &mut info,
            );
        }
        if info < 0 {
            return Err(Error::Kernel {
                routine: "dgetrf",
                info,
                detail: String::new(),
            });
        }
        if info > 0 {
            return Err(Error::Singular { rcond: 0.0 });
        }
        let mut rcond = 0.0;
        let mut work = vec![0.0; 4 * n];
        let mut iwork = vec![0 as c_int; n];
        unsafe {
            ffi::dgecon_(
                ch(b'1'),
                &dim(n),
                factors.as_ptr(),
                &dim(n),
                &anorm,
                &mut rcond,
                work.as_mut_ptr(),
                iwork.as_mut_ptr(),
                &mut info,
            );
        }
        Ok(Lu {
            factors,
            pivots,
            rcond,
        })
    }

    /// Reciprocal 1-norm condition number estimate.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.factors.nrows();
        let mut x = b.clone();
        if n == 0 {
            return x;
        }
        let mut info: c_int = 0;
        unsafe {
            ffi::dgetrs_(
                ch(b'N'),
                &dim(n),
                &1,
                self.factors.as_ptr(),
                &dim(n),
                self.pivots.as_ptr(),
                x.as_mut_ptr(),
                &dim(n),
                &mut info,
            );
        }
        x
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.factors.nrows();
        let mut x = b.clone();
        if n == 0 || b.ncols() == 0 {
            return x;
        }
        let mut info: c_int = 0;
        unsafe {
            ffi::dgetrs_(
                ch(b'N'),
                &dim(n),
                &dim(b.ncols()),
                self.factors.as_ptr(),
                &dim(n),
                self.pivots.as_ptr(),
                x.as_mut_ptr(),
                &dim(n),
                &mut info,
            );
        }
        x
    }
}

/// Solves `A x = b`. Fails when `A` is singular to working precision, in
/// which case the error carries the condition estimate.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::Argument(format!(
            "right-hand side has length {} for a {}x{} system",
            b.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    let lu = Lu::new(a)?;
    if lu.rcond() < f64::EPSILON {
        return Err(Error::Singular { rcond: lu.rcond() });
    }
    Ok(lu.solve(b))
}

/// Hessenberg-triangular form `Qᵀ A Z = H`, `Qᵀ E Z = T` of a square pencil,
/// with `H` upper Hessenberg and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct HessenbergTriangular {
    pub h: DMatrix<f64>,
    pub t: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub z: DMatrix<f64>,
}

pub fn hessenberg_triangular(a: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<HessenbergTriangular> {
    let n = a.nrows();
    if a.ncols() != n || e.shape() != (n, n) {
        return Err(Error::Argument(
            "pencil matrices must be square and equal".into(),
        ));
    }
    check_finite(a, "pencil matrix A")?;
    check_finite(e, "pencil matrix E")?;
    if n == 0 {
        return Ok(HessenbergTriangular {
            h: a.clone(),
            t: e.clone(),
            q: DMatrix::zeros(0, 0),
            z: DMatrix::zeros(0, 0),
        });
    }
    let nn = dim(n);
    let mut info: c_int = 0;

    // E = Q1 R
    let mut qr = e.clone();
    let mut tau = vec![0.0; n];
    let mut query = [0.0f64];
    unsafe {
        ffi::dgeqrf_(
            &nn,
            &nn,
            qr.as_mut_ptr(),
            &nn,
            tau.as_mut_ptr(),
            query.as_mut_ptr(),
            &-1,
            &mut info,
        );
    }
    let mut work = vec![0.0; (query[0] as usize).max(n)];
    unsafe {
        ffi::dgeqrf_(
            &nn,
            &nn,
            qr.as_mut_ptr(),
            &nn,
            tau.as_mut_ptr(),
            work.as_mut_ptr(),
            &dim(work.len()),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Kernel {
            routine: "dgeqrf",
            info,
            detail: String::new(),
        });
    }
    let mut t = qr.clone();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = 0.0;
        }
    }
    // H0 = Q1ᵀ A
    let mut h = a.clone();
    unsafe {
        ffi::dormqr_(
            ch(b'L'),
            ch(b'T'),
            &nn,
            &nn,
            &nn,
            qr.as_ptr(),
            &nn,
            tau.as_ptr(),
            h.as_mut_ptr(),
            &nn,
            query.as_mut_ptr(),
            &-1,
            &mut info,
        );
    }
    let mut work = vec![0.0; (query[0] as usize).max(n)];
    unsafe {
        ffi::dormqr_(
            ch(b'L'),
            ch(b'T'),
            &nn,
            &nn,
            &nn,
            qr.as_ptr(),
            &nn,
            tau.as_ptr(),
            h.as_mut_ptr(),
            &nn,
            work.as_mut_ptr(),
            &dim(work.len()),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Kernel {
            routine: "dormqr",
            info,
            detail: String::new(),
        });
    }
    // Explicit Q1 so dgghrd can accumulate Q = Q1 Q2.
    let mut q = DMatrix::<f64>::identity(n, n);
    unsafe {
        ffi::dormqr_(
            ch(b'L'),
            ch(b'N'),
            &nn,
            &nn,
            &nn,
            qr.as_ptr(),
            &nn,
            tau.as_ptr(),
            q.as_mut_ptr(),
            &nn,
            work.as_mut_ptr(),
            &dim(work.len()),
            &mut info,
        );
    }
    let mut z = DMatrix::<f64>::zeros(n, n);
    unsafe {
        ffi::dgghrd_(
            ch(b'V'),
            ch(b'I'),
            &nn,
            &1,
            &nn,
            h.as_mut_ptr(),
            &nn,
            t.as_mut_ptr(),
            &nn,
            q.as_mut_ptr(),
            &nn,
            z.as_mut_ptr(),
            &nn,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Kernel {
            routine: "dgghrd",
            info,
            detail: String::new(),
        });
    }
    Ok(HessenbergTriangular { h, t, q, z })
}

/// Solves `M x = b` for upper Hessenberg `M` (column-major, `n x n`) by
/// Gaussian elimination with adjacent-row pivoting. `m` and `b` are
/// overwritten. Returns `false` when a zero pivot is met.
pub fn solve_upper_hessenberg(m: &mut [f64], b: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for k in 0..n.saturating_sub(1) {
        let (r0, r1) = (k, k + 1);
        let a0 = m[r0 + k * n];
        let a1 = m[r1 + k * n];
        if a1.abs() > a0.abs() {
            for j in k..n {
                m.swap(r0 + j * n, r1 + j * n);
            }
            b.swap(r0, r1);
        }
        let piv = m[r0 + k * n];
        if piv == 0.0 {
            return false;
        }
        let f = m[r1 + k * n] / piv;
        if f != 0.0 {
            for j in (k + 1)..n {
                m[r1 + j * n] -= f * m[r0 + j * n];
            }
            b[r1] -= f * b[r0];
        }
        m[r1 + k * n] = 0.0;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= m[i + j * n] * b[j];
        }
        let d = m[i + i * n];
        if d == 0.0 {
            return false;
        }
        b[i] = s / d;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn svd_identity() {
        let s = singular_values(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn svd_rank_one_outer_product() {
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let v = DVector::from_vec(vec![-1.0, 0.5, 2.0]);
        let s = singular_values(&(&u * v.transpose())).unwrap();
        assert!((s[0] - u.norm() * v.norm()).abs() < 1e-13);
        assert!(s[1] < 1e-14 * s[0] && s[2] < 1e-14 * s[0]);
    }

    #[test]
    fn svd_reconstructs_random_8x5() {
        let m = random(8, 5, 7);
        let f = svd(&m).unwrap();
        assert!((f.reconstruct() - &m).norm() <= 1e-12 * m.norm());
        assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let utu = f.u.transpose() * &f.u;
        assert!((utu - DMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn svd_rejects_nan() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(svd(&m).is_err());
    }

    #[test]
    fn eig_diagonal_with_identity() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        let mut ev: Vec<f64> = generalized_eig(&a, &DMatrix::identity(2, 2))
            .unwrap()
            .iter()
            .map(|e| e.finite().unwrap().re)
            .collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_singular_b_has_infinite_eigenvalue() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let ev = generalized_eig(&DMatrix::identity(2, 2), &b).unwrap();
        let finite: Vec<_> = ev.iter().filter_map(|e| e.finite()).collect();
        assert_eq!(finite.len(), 1);
        assert!((finite[0].re - 1.0).abs() < 1e-14);
        assert_eq!(ev.iter().filter(|e| **e == Eigenvalue::Infinite).count(), 1);
    }

    #[test]
    fn eig_random_6x6_residuals() {
        let a = random(6, 6, 11);
        let b = random(6, 6, 12);
        let pairs = generalized_eig_vectors(&a, &b).unwrap();
        assert_eq!(pairs.len(), 6);
        let ac = a.map(|x| Complex64::new(x, 0.0));
        let bc = b.map(|x| Complex64::new(x, 0.0));
        for (ev, v) in pairs {
            let lam = ev.finite().unwrap();
            let r = (&ac - &bc * lam) * &v;
            let bound = 1e-8 * (a.norm() + lam.norm() * b.norm()) * v.norm();
            assert!(r.norm() <= bound, "residual {} > {}", r.norm(), bound);
        }
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        assert_eq!(solve(&DMatrix::identity(3, 3), &b).unwrap(), b);
        let d = DMatrix::identity(3, 3) * 2.0;
        assert!((solve(&d, &b).unwrap() - &b / 2.0).norm() < 1e-15);
    }

    #[test]
    fn solve_random_spd_residual() {
        let g = random(10, 10, 3);
        let a = &g * g.transpose() + DMatrix::identity(10, 10);
        let b = DVector::from_fn(10, |i, _| (i as f64).sin());
        let x = solve(&a, &b).unwrap();
        let r = &a * &x - &b;
        assert!(r.norm() <= 1e-10 * (a.norm() * x.norm() + b.norm()));
    }

    #[test]
    fn solve_singular_reports_condition() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        match solve(&a, &DVector::from_vec(vec![1.0, 1.0])) {
            Err(Error::Singular { rcond }) => assert!(rcond < f64::EPSILON),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn hessenberg_triangular_is_equivalent() {
        let a = random(7, 7, 21);
        let mut e = random(7, 7, 22);
        e.set_column(6, &DVector::zeros(7));
        let ht = hessenberg_triangular(&a, &e).unwrap();
        let qt = ht.q.transpose();
        assert!((&qt * &a * &ht.z - &ht.h).norm() < 1e-13 * a.norm());
        assert!((&qt * &e * &ht.z - &ht.t).norm() < 1e-13 * e.norm().max(1.0));
        for j in 0..7 {
            for i in (j + 2)..7 {
                assert!(ht.h[(i, j)].abs() < 1e-14);
            }
            for i in (j + 1)..7 {
                assert!(ht.t[(i, j)].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hessenberg_solver_matches_dense() {
        let mut m = random(9, 9, 5);
        for j in 0..9 {
            for i in (j + 2)..9 {
                m[(i, j)] = 0.0;
            }
        }
        let b = DVector::from_fn(9, |i, _| 1.0 + i as f64);
        let expect = solve(&m, &b).unwrap();
        let mut data = m.as_slice().to_vec();
        let mut x = b.as_slice().to_vec();
        assert!(solve_upper_hessenberg(&mut data, &mut x, 9));
        for i in 0..9 {
            assert!((x[i] - expect[i]).abs() < 1e-10 * expect.amax());
        }
    }
}
