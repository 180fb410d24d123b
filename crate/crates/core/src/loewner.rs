//! Loewner and shifted Loewner matrices, SVD truncation and the projected
//! descriptor realization.

use nalgebra::{DMatrix, DVector};

use crate::dataset::PartitionedData;
use crate::error::{Error, Result};
use crate::linalg;
pub use crate::model::RationalApproximant;

/// `𝕃` and `𝕃s` together with the data they were built from.
///
/// Rows follow the left points `μ`, columns the right points `λ` (extra
/// columns last).
#[derive(Debug, Clone)]
pub struct LoewnerPencil {
    pub l: DMatrix<f64>,
    pub ls: DMatrix<f64>,
    /// Left values `v`.
    pub v: DVector<f64>,
    /// Right values `w`.
    pub w: DVector<f64>,
    /// Right points `λ`.
    pub lambda: DVector<f64>,
    /// Left points `μ`.
    pub mu: DVector<f64>,
}

impl LoewnerPencil {
    pub fn shape(&self) -> (usize, usize) {
        self.l.shape()
    }

    /// `(‖M𝕃 − 𝕃Λ − (V·1ᵀ − 1·Wᵀ)‖, ‖M𝕃s − 𝕃sΛ − (MV·1ᵀ − 1·(ΛW)ᵀ)‖)`,
    /// each relative to the right-hand side (Frobenius norms).
    pub fn sylvester_residuals(&self) -> (f64, f64) {
        let (k, m) = self.shape();
        let lhs = |x: &DMatrix<f64>| {
            DMatrix::from_fn(k, m, |i, j| {
                self.mu[i] * x[(i, j)] - x[(i, j)] * self.lambda[j]
            })
        };
        let rhs1 = DMatrix::from_fn(k, m, |i, j| self.v[i] - self.w[j]);
        let rhs2 = DMatrix::from_fn(k, m, |i, j| {
            self.mu[i] * self.v[i] - self.lambda[j] * self.w[j]
        });
        (
            relative(&(lhs(&self.l) - &rhs1), &rhs1),
            relative(&(lhs(&self.ls) - &rhs2), &rhs2),
        )
    }

    /// `(‖𝕃s − 𝕃Λ − V·1ᵀ‖, ‖𝕃s − M𝕃 − 1·Wᵀ‖)` relative to `‖𝕃s‖`.
    pub fn direct_residuals(&self) -> (f64, f64) {
        let (k, m) = self.shape();
        let r1 = DMatrix::from_fn(k, m, |i, j| {
            self.ls[(i, j)] - self.l[(i, j)] * self.lambda[j] - self.v[i]
        });
        let r2 = DMatrix::from_fn(k, m, |i, j| {
            self.ls[(i, j)] - self.mu[i] * self.l[(i, j)] - self.w[j]
        });
        (relative(&r1, &self.ls), relative(&r2, &self.ls))
    }
}

fn relative(diff: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    let r = reference.norm();
    if r == 0.0 {
        diff.norm()
    } else {
        diff.norm() / r
    }
}

/// Builds `𝕃(i,j) = (v_i − w_j)/(μ_i − λ_j)` and
/// `𝕃s(i,j) = (μ_i v_i − λ_j w_j)/(μ_i − λ_j)`. With derivative data the
/// coincident diagonal takes `f'(λ)` and `(s f)'(λ)` instead.
pub fn build_pencil(pd: &PartitionedData) -> Result<LoewnerPencil> {
    let hermite = pd.hermite.as_deref();
    if let Some(h) = hermite {
        if h.len() != pd.right.len() || pd.left.len() != pd.right.len() {
            return Err(Error::Data(
                "derivative data needs one entry per node and identical left/right sets".into(),
            ));
        }
    }
    let cols: Vec<(f64, f64)> = pd.column_points().copied().collect();
    let (k, m) = (pd.left.len(), cols.len());
    let mut l = DMatrix::zeros(k, m);
    let mut ls = DMatrix::zeros(k, m);
    for (i, &(mu, v)) in pd.left.iter().enumerate() {
        for (j, &(lam, w)) in cols.iter().enumerate() {
            if mu == lam {
                match hermite {
                    Some(h) if i == j && j < pd.right.len() => {
                        l[(i, j)] = h[i].0;
                        ls[(i, j)] = h[i].1;
                        continue;
                    }
                    _ => {
                        return Err(Error::DivisionByZero {
                            x: mu,
                            row: i,
                            col: j,
                        })
                    }
                }
            }
            let den = mu - lam;
            l[(i, j)] = (v - w) / den;
            ls[(i, j)] = (mu * v - lam * w) / den;
        }
    }
    Ok(LoewnerPencil {
        l,
        ls,
        v: DVector::from_iterator(k, pd.left.iter().map(|p| p.1)),
        w: DVector::from_iterator(m, cols.iter().map(|p| p.1)),
        lambda: DVector::from_iterator(m, cols.iter().map(|p| p.0)),
        mu: DVector::from_iterator(k, pd.left.iter().map(|p| p.0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    /// Keep exactly this many singular triplets.
    Rank(usize),
    /// Keep every `σ_k` with `σ_k / σ_1 > δ`.
    Tolerance(f64),
}

#[derive(Debug, Clone)]
pub struct SvdTruncation {
    /// All singular values of `𝕃`, descending.
    pub singular_values: Vec<f64>,
    pub r: usize,
    /// Leading `r` left singular vectors.
    pub xr: DMatrix<f64>,
    /// Leading `r` right singular vectors.
    pub yr: DMatrix<f64>,
}

fn count_above(sv: &[f64], delta: f64) -> usize {
    match sv.first() {
        Some(&s1) if s1 > 0.0 => sv.iter().take_while(|&&s| s / s1 > delta).count(),
        _ => 0,
    }
}

pub fn svd_truncate(p: &LoewnerPencil, mode: TruncationMode) -> Result<SvdTruncation> {
    let (k, m) = p.shape();
    let max_rank = k.min(m);
    if let TruncationMode::Rank(r) = mode {
        if r > max_rank {
            return Err(Error::Argument(format!(
                "rank {r} exceeds the smaller Loewner dimension {max_rank}"
            )));
        }
    }
    let svd = linalg::svd(&p.l)?;
    let r = match mode {
        TruncationMode::Rank(r) => r,
        TruncationMode::Tolerance(delta) => count_above(&svd.singular_values, delta),
    };
    Ok(SvdTruncation {
        xr: svd.u.columns(0, r).into_owned(),
        yr: svd.vt.rows(0, r).transpose(),
        singular_values: svd.singular_values,
        r,
    })
}

/// Number of singular values of `𝕃` with `σ_k / σ_1 > δ`.
pub fn count_significant_svals(p: &LoewnerPencil, delta: f64) -> Result<usize> {
    Ok(count_above(&linalg::singular_values(&p.l)?, delta))
}

/// Projected model `Ê = −Xᵀ𝕃Y`, `Â = −Xᵀ𝕃sY`, `B̂ = XᵀV`, `Ĉ = WY`.
pub fn realize(p: &LoewnerPencil, t: &SvdTruncation) -> Result<RationalApproximant> {
    if t.r == 0 {
        return Err(Error::Argument("cannot realize a model of order 0".into()));
    }
    let (k, m) = p.shape();
    if t.xr.shape() != (k, t.r) || t.yr.shape() != (m, t.r) {
        return Err(Error::Argument(
            "truncation does not belong to this pencil".into(),
        ));
    }
    let xt = t.xr.transpose();
    let e = -(&xt * &p.l * &t.yr);
    let a = -(&xt * &p.ls * &t.yr);
    let b = &xt * &p.v;
    let c = t.yr.transpose() * &p.w;
    let model = RationalApproximant::new(e, a, b, c, 0.0, t.r - 1, t.r)?;
    model.check_regular()?;
    Ok(model)
}

/// Build, truncate and realize in one go.
pub fn loewner_fit(pd: &PartitionedData, mode: TruncationMode) -> Result<RationalApproximant> {
    let p = build_pencil(pd)?;
    let t = svd_truncate(&p, mode)?;
    realize(&p, &t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{
        add_origin, partition, partition_with, sample_abs, FnTarget, MeasurementSet,
        PartitionScheme,
    };
    use crate::sampling::{linspace_points, symmetric_extend, IntervalConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pd_from(left: &[(f64, f64)], right: &[(f64, f64)]) -> PartitionedData {
        PartitionedData {
            scheme: PartitionScheme::Split,
            right: right.to_vec(),
            left: left.to_vec(),
            hermite: None,
            extra: vec![],
        }
    }

    fn abs_data(a: f64, n: usize, scheme: PartitionScheme, origin: bool) -> PartitionedData {
        let pos = linspace_points(&IntervalConfig::new(a, 1.0, n).unwrap()).unwrap();
        let ds = sample_abs(&symmetric_extend(&pos).unwrap()).unwrap();
        let pd = partition(&ds, scheme).unwrap();
        if origin {
            add_origin(pd).unwrap()
        } else {
            pd
        }
    }

    fn abs_pencil(n: usize, scheme: PartitionScheme, origin: bool) -> LoewnerPencil {
        build_pencil(&abs_data(0.01, n, scheme, origin)).unwrap()
    }

    /// Samples of `f` split alternately into left/right.
    fn rational_data(f: impl Fn(f64) -> f64 + Sync, xs: &[f64]) -> PartitionedData {
        let ds = MeasurementSet::sample(xs, &FnTarget(f)).unwrap();
        partition(&ds, PartitionScheme::Alternating).unwrap()
    }

    #[test]
    fn one_by_one_example() {
        let p = build_pencil(&pd_from(&[(-1.0, 1.0)], &[(1.0, 1.0)])).unwrap();
        assert_eq!(p.l[(0, 0)], 0.0);
        assert_eq!(p.ls[(0, 0)], 1.0);
    }

    #[test]
    fn coincident_points_rejected() {
        let err = build_pencil(&pd_from(&[(-1.0, 1.0), (0.5, 0.5)], &[(0.5, 0.5)]));
        assert!(matches!(
            err,
            Err(Error::DivisionByZero { row: 1, col: 0, .. })
        ));
    }

    #[test]
    fn hermite_diagonal() {
        let ds = sample_abs(&[0.5, 0.75]).unwrap();
        let p = build_pencil(&partition(&ds, PartitionScheme::Same).unwrap()).unwrap();
        assert_eq!((p.l[(0, 0)], p.ls[(0, 0)]), (1.0, 1.0));
        assert_eq!((p.l[(1, 1)], p.ls[(1, 1)]), (1.0, 1.5));
    }

    #[test]
    fn identities_hold_for_every_scheme() {
        for scheme in PartitionScheme::ALL {
            for origin in [false, true] {
                let p = abs_pencil(40, scheme, origin);
                let (s1, s2) = p.sylvester_residuals();
                let (d1, d2) = p.direct_residuals();
                assert!(s1 <= 1e-12 && s2 <= 1e-12, "{scheme} {origin}: {s1} {s2}");
                assert!(d1 <= 1e-12 && d2 <= 1e-12, "{scheme} {origin}: {d1} {d2}");
            }
        }
    }

    #[test]
    fn constant_data_has_rank_one() {
        let xs: Vec<f64> = (0..20).map(|i| -1.0 + i as f64 * 0.1).collect();
        let p = build_pencil(&rational_data(|_| 3.0, &xs)).unwrap();
        // 𝕃 vanishes for constant data; 𝕃s is rank one.
        assert!(p.l.norm() == 0.0);
        let sv = linalg::singular_values(&p.ls).unwrap();
        assert!(sv[1] <= 1e-12 * sv[0]);
        assert_eq!(count_significant_svals(&p, 1e-12).unwrap(), 0);
    }

    #[test]
    fn singular_values_match_gram_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut xs: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        xs.sort_by(f64::total_cmp);
        let p = build_pencil(&rational_data(|x| (3.0 * x).sin() + x * x, &xs)).unwrap();
        assert_eq!(p.shape(), (16, 16));
        let t = svd_truncate(&p, TruncationMode::Rank(16)).unwrap();
        let gram = p.l.transpose() * &p.l;
        let mut eig: Vec<f64> = gram
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let s1 = t.singular_values[0];
        for (s, e) in t.singular_values.iter().zip(&eig) {
            // The Gram matrix squares the condition number, so only the
            // well-resolved part of the spectrum is comparable.
            if *s > 1e-4 * s1 {
                assert!((s - e).abs() <= 1e-8 * s, "{s} vs {e}");
            }
        }
    }

    #[test]
    fn truncation_modes() {
        let p = abs_pencil(30, PartitionScheme::Split, false);
        let t = svd_truncate(&p, TruncationMode::Rank(5)).unwrap();
        assert_eq!((t.r, t.xr.ncols(), t.yr.ncols()), (5, 5, 5));
        assert!(t.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let ortho = (t.xr.transpose() * &t.xr - DMatrix::identity(5, 5)).norm();
        let ortho2 = (t.yr.transpose() * &t.yr - DMatrix::identity(5, 5)).norm();
        assert!(ortho <= 1e-12 && ortho2 <= 1e-12);
        let tol = svd_truncate(&p, TruncationMode::Tolerance(1e-8)).unwrap();
        assert_eq!(tol.r, count_significant_svals(&p, 1e-8).unwrap());
        assert_eq!(count_significant_svals(&p, 1.0).unwrap(), 0);
        assert!(matches!(
            svd_truncate(&p, TruncationMode::Rank(31)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn order_zero_rejected() {
        let p = abs_pencil(10, PartitionScheme::Split, false);
        let t = svd_truncate(&p, TruncationMode::Rank(0)).unwrap();
        assert!(matches!(realize(&p, &t), Err(Error::Argument(_))));
    }

    #[test]
    fn exact_recovery_of_simple_rational() {
        let xs = [-0.9, -0.4, 0.1, 0.6, -0.7, 0.3, 0.8, 1.0];
        let f = |x: f64| 1.0 / (x + 2.0);
        let pd = rational_data(f, &xs);
        let p = build_pencil(&pd).unwrap();
        let t = svd_truncate(&p, TruncationMode::Rank(1)).unwrap();
        assert!(t.singular_values[1] <= 1e-12 * t.singular_values[0]);
        let m = realize(&p, &t).unwrap();
        for x in xs {
            assert!((m.evaluate(x).unwrap() - f(x)).abs() <= 1e-10);
        }
        // Full-rank truncation of the 4x4 pencil is numerically singular.
        let full = svd_truncate(&p, TruncationMode::Rank(4)).unwrap();
        assert!(realize(&p, &full).is_err());
    }

    #[test]
    fn exact_recovery_of_random_rationals() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for q in 1..=5 {
            let poles: Vec<f64> = (0..q)
                .map(|k| {
                    let mag = 1.05 + 0.15 * k as f64 + rng.gen_range(0.0..0.05);
                    if k % 2 == 0 {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect();
            let res: Vec<f64> = (0..q).map(|_| rng.gen_range(0.5..2.0)).collect();
            let f = |x: f64| {
                poles
                    .iter()
                    .zip(&res)
                    .map(|(p, r)| r / (x - p))
                    .sum::<f64>()
            };
            let xs: Vec<f64> = (0..24).map(|i| -1.0 + 2.0 * i as f64 / 23.0).collect();
            let pd = rational_data(f, &xs);
            let p = build_pencil(&pd).unwrap();
            assert_eq!(count_significant_svals(&p, 1e-12).unwrap(), q);
            let m = loewner_fit(&pd, TruncationMode::Rank(q)).unwrap();
            for &x in &xs {
                let want = f(x);
                assert!((m.evaluate(x).unwrap() - want).abs() <= 1e-9 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn full_order_model_interpolates() {
        // Generic data: the full-order model matches every sample.
        let xs = [-0.8, -0.5, -0.1, 0.2, 0.45, 0.9];
        let pd = rational_data(|x| (x + 0.3).exp(), &xs);
        let m = loewner_fit(&pd, TruncationMode::Rank(3)).unwrap();
        for &(x, y) in pd.right.iter().chain(&pd.left) {
            assert!((m.evaluate(x).unwrap() - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn projected_sylvester_residual() {
        let pd = abs_data(0.05, 20, PartitionScheme::Alternating, true);
        let p = build_pencil(&pd).unwrap();
        let t = svd_truncate(&p, TruncationMode::Rank(8)).unwrap();
        let m = realize(&p, &t).unwrap();
        // Xᵀ(M𝕃 − 𝕃Λ)Y = XᵀV·1ᵀY − Xᵀ1·WᵀY
        let xt = t.xr.transpose();
        let mm = DMatrix::from_diagonal(&p.mu);
        let lam = DMatrix::from_diagonal(&p.lambda);
        let lhs = -(&xt * (&mm * &p.l - &p.l * &lam) * &t.yr);
        let ones_r = DVector::from_element(p.shape().1, 1.0);
        let ones_l = DVector::from_element(p.shape().0, 1.0);
        let rhs = &m.b * (t.yr.transpose() * ones_r).transpose() - (&xt * ones_l) * m.c.transpose();
        assert!((&lhs + &rhs).norm() <= 1e-10 * rhs.norm());
    }

    #[test]
    fn same_scheme_with_generic_target() {
        let f = |x: f64| 1.0 / (x * x + 4.0);
        let xs = [-0.9, -0.3, 0.2, 0.7];
        let ds = MeasurementSet::sample(&xs, &FnTarget(f)).unwrap();
        let pd = partition_with(&ds, PartitionScheme::Same, &FnTarget(f)).unwrap();
        let p = build_pencil(&pd).unwrap();
        assert!(p.sylvester_residuals().0 <= 1e-12);
        let m = loewner_fit(&pd, TruncationMode::Rank(2)).unwrap();
        for x in xs {
            assert!((m.evaluate(x).unwrap() - f(x)).abs() <= 1e-8);
        }
    }
}
