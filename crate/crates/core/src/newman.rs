//! Newman's explicit rational approximation of `|x|`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::RationalApproximant;

/// `R(x) = x (p(x) − p(−x)) / (p(x) + p(−x))` with
/// `p(x) = ∏_{k=1}^{n−1} (x + α^k)` and `α = e^{−1/√n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewmanApproximant {
    n: usize,
    alpha: f64,
}

impl NewmanApproximant {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "Newman approximant needs n >= 2, got {n}"
            )));
        }
        Ok(NewmanApproximant {
            n,
            alpha: (-1.0 / (n as f64).sqrt()).exp(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α^k` for `k = 1..n−1`.
    pub fn nodes(&self) -> Vec<f64> {
        (1..self.n).map(|k| self.alpha.powi(k as i32)).collect()
    }

    /// `(ln p(x), ln(1 + f(x)))` for `x >= 0`.
    #[cfg(test)]
    fn log_parts(&self, x: f64) -> (f64, f64) {
        let log_p = self.nodes().iter().map(|a| (x + a).ln()).sum();
        (log_p, ratio(self, x).ln_1p())
    }
}

/// `f(t) = p(−t)/p(t)` for `t >= 0`, accumulated as log magnitude and sign.
fn ratio(na: &NewmanApproximant, t: f64) -> f64 {
    let mut log_f = 0.0;
    let mut sign = 1.0;
    for a in na.nodes() {
        let num = a - t;
        if num == 0.0 {
            return 0.0;
        }
        if num < 0.0 {
            sign = -sign;
        }
        log_f += num.abs().ln() - (a + t).ln();
    }
    sign * log_f.exp()
}

/// Evaluates Newman's approximant; `x < 0` uses evenness.
pub fn newman_eval(na: &NewmanApproximant, x: f64) -> f64 {
    let t = x.abs();
    let f = ratio(na, t);
    t * (1.0 - f) / (1.0 + f)
}

/// `(0, 0), (−α, α), …, (−α^{n−1}, α^{n−1})`.
pub fn newman_interpolation_pairs(na: &NewmanApproximant) -> Vec<(f64, f64)> {
    std::iter::once((0.0, 0.0))
        .chain(na.nodes().into_iter().map(|a| (-a, a)))
        .collect()
}

/// Descriptor realization of dimension `n + 1`.
///
/// The unknowns `w_0, …, w_{n−1}` satisfy `(α^k + x) w_k = (α^k − x) w_{k−1}`
/// and `w_0 + w_{n−1} = 1`, so `w_0 = 1/(1 + f)` and `w_{n−1} = f/(1 + f)`;
/// the last unknown is `s = x (w_0 − w_{n−1}) = R(x)`. The pencil's
/// determinant is proportional to `p(x) + p(−x)`, so no spurious poles
/// appear at the nodes `−α^k`.
pub fn newman_model(na: &NewmanApproximant) -> RationalApproximant {
    let n = na.n;
    let dim = n + 1;
    let s = n;
    let mut e = DMatrix::zeros(dim, dim);
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    for (k, ak) in (1..n).zip(na.nodes()) {
        let row = k - 1;
        e[(row, k)] = 1.0;
        e[(row, k - 1)] = 1.0;
        a[(row, k)] = -ak;
        a[(row, k - 1)] = ak;
    }
    a[(n - 1, 0)] = -1.0;
    a[(n - 1, n - 1)] = -1.0;
    b[n - 1] = 1.0;
    e[(s, 0)] = -1.0;
    e[(s, n - 1)] = 1.0;
    a[(s, s)] = -1.0;
    let mut c = DVector::zeros(dim);
    c[s] = 1.0;
    RationalApproximant {
        e,
        a,
        b,
        c,
        d: 0.0,
        num_degree: n - 1,
        den_degree: n - 1,
    }
}
