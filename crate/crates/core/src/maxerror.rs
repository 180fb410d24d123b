//! Maximum of `|R(x) − |x||` on `[-1, 1]`.
//!
//! Interior extrema on `(0, 1)` are the real zeros of `R'(x) − 1`, on
//! `(−1, 0)` those of `R'(x) + 1`. Both are eigenvalues of an augmented
//! pencil built from the realization, so no grid search is needed; a coarse
//! grid is still merged in as a safety net.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{GridEvaluator, RationalApproximant};

/// Relative bound on the imaginary part of an eigenvalue taken as real.
pub const IMAG_TOL: f64 = 1e-8;
/// Candidates closer than this to an interval end are dropped.
pub const INTERVAL_MARGIN: f64 = 1e-12;
/// Size of the backup grid on each half interval.
pub const BACKUP_GRID: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Max on `(−1, 0)`.
    pub eps_minus: f64,
    /// Max on `(0, 1)`.
    pub eps_plus: f64,
    pub eps_at_minus_one: f64,
    pub eps_at_zero: f64,
    pub eps_at_one: f64,
    pub eps_total: f64,
    pub argmax_minus: f64,
    pub argmax_plus: f64,
    pub argmax_total: f64,
    /// Real poles of the model found inside `[−1, 1]`.
    pub poles: Vec<f64>,
    /// False when a pole lies in `[−1, 1]` or an endpoint cannot be evaluated.
    pub valid: bool,
}

fn is_real(z: num_complex::Complex64) -> bool {
    z.im.abs() <= IMAG_TOL * (1.0 + z.re.abs())
}

/// Real finite eigenvalues of `(a, e)` inside `[lo, hi]`.
fn real_eigenvalues_in(a: &DMatrix<f64>, e: &DMatrix<f64>, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = linalg::generalized_eig(a, e)?
        .into_iter()
        .filter_map(|ev| ev.finite())
        .filter(|z| is_real(*z) && z.re >= lo && z.re <= hi)
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Stationary points of `R(x) − d_bar·x`: the real solutions of
/// `R'(x) = d_bar` in `(0, 1)` for `d_bar = 1` and in `(−1, 0)` for
/// `d_bar = −1`.
pub fn extrema_candidates(m: &RationalApproximant, d_bar: f64) -> Result<Vec<f64>> {
    let r = m.dim();
    if r == 0 {
        return Err(Error::Argument(
            "model of order 0 has no extrema pencil".into(),
        ));
    }
    if d_bar != 1.0 && d_bar != -1.0 {
        return Err(Error::Argument(format!(
            "d_bar must be +1 or -1, got {d_bar}"
        )));
    }
    let n = 2 * r + 1;
    let mut x = DMatrix::zeros(n, n);
    let mut e = DMatrix::zeros(n, n);
    x.view_mut((0, 0), (r, r)).copy_from(&m.a);
    x.view_mut((0, r), (r, r)).copy_from(&m.e);
    x.view_mut((r, r), (r, r)).copy_from(&m.a);
    x.view_mut((r, 2 * r), (r, 1)).copy_from(&m.b);
    x.view_mut((2 * r, 0), (1, r)).copy_from(&m.c.transpose());
    x[(2 * r, 2 * r)] = d_bar;
    e.view_mut((0, 0), (r, r)).copy_from(&m.e);
    e.view_mut((r, r), (r, r)).copy_from(&m.e);
    let (lo, hi) = if d_bar > 0.0 {
        (INTERVAL_MARGIN, 1.0 - INTERVAL_MARGIN)
    } else {
        (-1.0 + INTERVAL_MARGIN, -INTERVAL_MARGIN)
    };
    let mut c = real_eigenvalues_in(&x, &e, lo, hi)?;
    c.dedup();
    Ok(c)
}

/// Real poles of the model in `[−1, 1]`.
pub fn poles_in_interval(m: &RationalApproximant) -> Result<Vec<f64>> {
    real_eigenvalues_in(&m.a, &m.e, -1.0, 1.0)
}

/// Backup points on `(0, 1)`: uniform plus logarithmic towards the origin.
fn backup_grid(n: usize) -> Vec<f64> {
    let half = n / 2;
    let mut g: Vec<f64> = (1..=half).map(|i| i as f64 / (half + 1) as f64).collect();
    let (l0, l1) = (-12.0f64, 0.0f64);
    g.extend((0..n - half).map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - half) as f64)));
    g.retain(|&x| x > 0.0 && x < 1.0);
    g
}

struct Side {
    eps: f64,
    argmax: f64,
}

fn side(
    m: &RationalApproximant,
    g: &GridEvaluator,
    cands: &[f64],
    sign: f64,
    grid: &[f64],
) -> Side {
    let mut best = Side {
        eps: 0.0,
        argmax: f64::NAN,
    };
    let mut consider = |x: f64, r: Option<f64>| {
        let err = match r {
            Some(v) => (v - x.abs()).abs(),
            None => f64::INFINITY,
        };
        if err > best.eps || best.argmax.is_nan() {
            best = Side {
                eps: err,
                argmax: x,
            };
        }
    };
    for &x in cands {
        consider(x, m.evaluate(x).ok());
    }
    for &t in grid {
        let x = sign * t;
        if let Some(v) = g.eval(x) {
            consider(x, Some(v));
        }
    }
    best
}

/// Exact maximum error via the extrema pencils, merged with a backup grid.
pub fn max_error(m: &RationalApproximant) -> Result<ErrorReport> {
    let g = m.grid_evaluator()?;
    let poles = poles_in_interval(m)?;
    let at = |x: f64| m.evaluate(x).map(|v| (v - x.abs()).abs());
    let ends: Vec<Option<f64>> = [-1.0, 0.0, 1.0].iter().map(|&x| at(x).ok()).collect();
    let grid = backup_grid(BACKUP_GRID);
    let plus = side(m, &g, &extrema_candidates(m, 1.0)?, 1.0, &grid);
    let minus = side(m, &g, &extrema_candidates(m, -1.0)?, -1.0, &grid);
    let [em1, e0, e1] = [ends[0], ends[1], ends[2]].map(|v| v.unwrap_or(f64::INFINITY));
    let parts = [
        (minus.eps, minus.argmax),
        (plus.eps, plus.argmax),
        (em1, -1.0),
        (e0, 0.0),
        (e1, 1.0),
    ];
    let (eps_total, argmax_total) =
        parts
            .iter()
            .copied()
            .fold((f64::NEG_INFINITY, f64::NAN), |acc, p| {
                if p.0 > acc.0 {
                    p
                } else {
                    acc
                }
            });
    Ok(ErrorReport {
        eps_minus: minus.eps,
        eps_plus: plus.eps,
        eps_at_minus_one: em1,
        eps_at_zero: e0,
        eps_at_one: e1,
        eps_total,
        argmax_minus: minus.argmax,
        argmax_plus: plus.argmax,
        argmax_total,
        valid: poles.is_empty() && ends.iter().all(Option::is_some),
        poles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridError {
    pub max: f64,
    pub argmax: f64,
    /// Grid points skipped because they sit on or near a pole.
    pub skipped: usize,
}

/// `max |R(x) − |x||` over `points` uniform points on `[−1, 1]`, plus the
/// origin.
pub fn grid_max_error(m: &RationalApproximant, points: usize) -> Result<GridError> {
    if points < 2 {
        return Err(Error::Argument(format!(
            "grid needs at least 2 points, got {points}"
        )));
    }
    let g = m.grid_evaluator()?;
    let mut out = GridError {
        max: f64::NEG_INFINITY,
        argmax: f64::NAN,
        skipped: 0,
    };
    let xs = (0..points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
        .chain(std::iter::once(0.0));
    for x in xs {
        match g.eval(x) {
            Some(v) => {
                let err = (v - x.abs()).abs();
                // Ties go to the point closest to the origin.
                if err > out.max || (err == out.max && x.abs() < out.argmax.abs()) {
                    out.max = err;
                    out.argmax = x;
                }
            }
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

/// `R'(x)` by central differences, for checks.
pub fn derivative(m: &RationalApproximant, x: f64, h: f64) -> Result<f64> {
    Ok((m.evaluate(x + h)? - m.evaluate(x - h)?) / (2.0 * h))
}

/// Constant model `R ≡ c` of dimension 1.
pub fn constant_model(c: f64) -> RationalApproximant {
    RationalApproximant {
        e: DMatrix::zeros(1, 1),
        a: DMatrix::from_element(1, 1, 1.0),
        b: DVector::zeros(1),
        c: DVector::zeros(1),
        d: c,
        num_degree: 0,
        den_degree: 0,
    }
}
