//! Descriptor-form rational functions `R(x) = C (xE - A)^{-1} B + D`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Lu};

/// Relative solve residual above which an evaluation point is treated as a pole.
pub const POLE_RESIDUAL_TOL: f64 = 1e-6;
/// Largest admissible condition number of `E` for [`RationalApproximant::to_standard`].
pub const MAX_STANDARD_COND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalApproximant {
    pub e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Output row, stored as a column.
    pub c: DVector<f64>,
    pub d: f64,
    pub num_degree: usize,
    pub den_degree: usize,
}

impl RationalApproximant {
    pub fn new(
        e: DMatrix<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        d: f64,
        num_degree: usize,
        den_degree: usize,
    ) -> Result<Self> {
        let n = e.nrows();
        if e.ncols() != n || a.shape() != (n, n) || b.len() != n || c.len() != n {
            return Err(Error::Argument(format!(
                "inconsistent descriptor shapes: E {:?}, A {:?}, B {}, C {}",
                e.shape(),
                a.shape(),
                b.len(),
                c.len()
            )));
        }
        Ok(RationalApproximant {
            e,
            a,
            b,
            c,
            d,
            num_degree,
            den_degree,
        })
    }

    /// State dimension.
    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    pub fn pencil_at(&self, x: f64) -> DMatrix<f64> {
        &self.e * x - &self.a
    }

    /// `C (xE - A)^{-1} B + D` through a dense LU solve.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let m = self.pencil_at(x);
        let lu = match Lu::new(&m) {
            Ok(lu) => lu,
            Err(Error::Singular { .. }) => return Err(Error::PoleProximity { x }),
            Err(e) => return Err(e),
        };
        let y = lu.solve(&self.b);
        let bnorm = self.b.norm();
        let res = (&m * &y - &self.b).norm();
        if !y.iter().all(|v| v.is_finite()) || res > POLE_RESIDUAL_TOL * bnorm {
            return Err(Error::PoleProximity { x });
        }
        Ok(self.c.dot(&y) + self.d)
    }

    /// Checks that `det(sE - A)` is not identically zero by probing two
    /// pseudo-random real shifts.
    pub fn check_regular(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut best = 0.0f64;
        for _ in 0..2 {
            let s = rng.gen_range(1.1..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            match Lu::new(&self.pencil_at(s)) {
                Ok(lu) => best = best.max(lu.rcond()),
                Err(Error::Singular { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if best < f64::EPSILON {
            return Err(Error::DegenerateModel(format!(
                "pencil (A, E) of dimension {} is singular at probe shifts (rcond {best:e})",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Equivalent model with `E = I`.
    pub fn to_standard(&self) -> Result<RationalApproximant> {
        let n = self.dim();
        if n == 0 {
            return Ok(self.clone());
        }
        let sv = linalg::singular_values(&self.e)?;
        let ratio = sv[n - 1] / sv[0];
        if !(ratio * MAX_STANDARD_COND >= 1.0) {
            return Err(Error::Conversion(format!(
                "E is numerically singular (sigma_min/sigma_max = {ratio:e})"
            )));
        }
        let lu = Lu::new(&self.e).map_err(|e| Error::Conversion(e.to_string()))?;
        Ok(RationalApproximant {
            e: DMatrix::identity(n, n),
            a: lu.solve_matrix(&self.a),
            b: lu.solve(&self.b),
            c: self.c.clone(),
            d: self.d,
            num_degree: self.num_degree,
            den_degree: self.den_degree,
        })
    }

    /// Copy with `B` scaled by `s`.
    pub fn scaled_input(&self, s: f64) -> RationalApproximant {
        let mut m = self.clone();
        m.b *= s;
        m
    }

    /// Precomputes a Hessenberg-triangular reduction so that each evaluation
    /// costs `O(n^2)`.
    pub fn grid_evaluator(&self) -> Result<GridEvaluator> {
        let ht = linalg::hessenberg_triangular(&self.a, &self.e)?;
        let cz = ht.z.transpose() * &self.c;
        let qb = ht.q.transpose() * &self.b;
        Ok(GridEvaluator {
            h: ht.h,
            t: ht.t,
            cz,
            qb,
            bnorm: self.b.norm(),
            d: self.d,
        })
    }

    /// Evaluates on many points; pole hits come back as `None`.
    pub fn evaluate_grid(&self, xs: &[f64]) -> Result<Vec<Option<f64>>> {
        let g = self.grid_evaluator()?;
        Ok(xs.iter().map(|&x| g.eval(x)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelDocument>(s)?.try_into()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// Fast repeated evaluation of one model; see
/// [`RationalApproximant::grid_evaluator`].
#[derive(Debug, Clone)]
pub struct GridEvaluator {
    h: DMatrix<f64>,
    t: DMatrix<f64>,
    cz: DVector<f64>,
    qb: DVector<f64>,
    bnorm: f64,
    d: f64,
}

impl GridEvaluator {
    /// `None` when `x` is at or near a pole.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let n = self.qb.len();
        let mut m: Vec<f64> = self
            .t
            .iter()
            .zip(self.h.iter())
            .map(|(t, h)| x * t - h)
            .collect();
        let mut y: Vec<f64> = self.qb.iter().copied().collect();
        if !linalg::solve_upper_hessenberg(&mut m, &mut y, n) {
            return None;
        }
        if !y.iter().all(|v| v.is_finite()) {
            return None;
        }
        // Residual of the Hessenberg system; the orthogonal factors do not
        // change its norm.
        let mut res = 0.0;
        for i in 0..n {
            let mut s = -self.qb[i];
            for j in i.saturating_sub(1)..n {
                s += (x * self.t[(i, j)] - self.h[(i, j)]) * y[j];
            }
            res += s * s;
        }
        if res.sqrt() > POLE_RESIDUAL_TOL * self.bnorm {
            return None;
        }
        Some(self.cz.iter().zip(&y).map(|(c, v)| c * v).sum::<f64>() + self.d)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Order {
    num_degree: usize,
    den_degree: usize,
}

/// On-disk layout: row-major arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct ModelDocument {
    E: Vec<Vec<f64>>,
    A: Vec<Vec<f64>>,
    B: Vec<f64>,
    C: Vec<f64>,
    D: f64,
    order: Order,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    let n = r.len();
    if r.iter().any(|row| row.len() != n) {
        return Err(Error::Data(format!("{name} must be a square array")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| r[i][j]))
}

impl From<&RationalApproximant> for ModelDocument {
    fn from(m: &RationalApproximant) -> Self {
        ModelDocument {
            E: rows(&m.e),
            A: rows(&m.a),
            B: m.b.iter().copied().collect(),
            C: m.c.iter().copied().collect(),
            D: m.d,
            order: Order {
                num_degree: m.num_degree,
                den_degree: m.den_degree,
            },
        }
    }
}

impl TryFrom<ModelDocument> for RationalApproximant {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        RationalApproximant::new(
            from_rows(&doc.E, "E")?,
            from_rows(&doc.A, "A")?,
            DVector::from_vec(doc.B),
            DVector::from_vec(doc.C),
            doc.D,
            doc.order.num_degree,
            doc.order.den_degree,
        )
    }
}
