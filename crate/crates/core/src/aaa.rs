//! AAA: greedy support selection with least-squares barycentric weights.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::MeasurementSet;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::RationalApproximant;

/// Residuals below this end the iteration early.
const EXACT_FIT: f64 = 1e-15;

/// `R(x) = Σ α_k w_k/(x − ν_k) / Σ α_k/(x − ν_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycentricForm {
    pub support: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BarycentricForm {
    pub fn new(support: Vec<f64>, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != values.len() || support.len() != weights.len() {
            return Err(Error::Argument(format!(
                "barycentric form needs equal non-empty lengths, got {}/{}/{}",
                support.len(),
                values.len(),
                weights.len()
            )));
        }
        Ok(BarycentricForm {
            support,
            values,
            weights,
        })
    }

    /// `ℓ`, one less than the number of support points.
    pub fn order(&self) -> usize {
        self.support.len() - 1
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AaaStop {
    /// Stop once the form has this order (`r + 1` support points).
    Order(usize),
    /// Stop once `max |F − R| <= tol · max |F|`.
    Tolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AaaStep {
    /// Index of the chosen sample in the input set.
    pub index: usize,
    pub point: f64,
    /// `max |F − R|` over all samples after the step.
    pub max_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AaaTrace {
    pub steps: Vec<AaaStep>,
}

/// Barycentric evaluation. Support points return their stored value.
pub fn bary_eval(b: &BarycentricForm, x: f64) -> Result<f64> {
    if let Some(k) = b.support.iter().position(|&s| s == x) {
        return Ok(b.values[k]);
    }
    if b.support.len() == 1 {
        return Ok(b.values[0]);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for ((&s, &w), &a) in b.support.iter().zip(&b.values).zip(&b.weights) {
        let c = a / (x - s);
        num += c * w;
        den += c;
    }
    if den == 0.0 || !den.is_finite() || !num.is_finite() {
        return Err(Error::PoleProximity { x });
    }
    Ok(num / den)
}

/// Descriptor realization of dimension `ℓ + 2`:
/// `A = diag(ν, 1) − B·1ᵀ`, `B = [α; 1]`, `E = diag(1, …, 1, 0)`, `C = [w, 0]`.
pub fn aaa_realization(b: &BarycentricForm) -> RationalApproximant {
    let n = b.support.len() + 1;
    let mut bv = DVector::from_element(n, 1.0);
    bv.rows_mut(0, n - 1).copy_from_slice(&b.weights);
    let mut diag = DVector::from_element(n, 1.0);
    diag.rows_mut(0, n - 1).copy_from_slice(&b.support);
    let a = DMatrix::from_diagonal(&diag) - &bv * DVector::from_element(n, 1.0).transpose();
    let mut ed = DVector::from_element(n, 1.0);
    ed[n - 1] = 0.0;
    let mut c = DVector::zeros(n);
    c.rows_mut(0, n - 1).copy_from_slice(&b.values);
    let ell = b.order();
    RationalApproximant {
        e: DMatrix::from_diagonal(&ed),
        a,
        b: bv,
        c,
        d: 0.0,
        num_degree: ell,
        den_degree: ell,
    }
}

fn argmax_unselected(res: &[f64], selected: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &r) in res.iter().enumerate() {
        if !selected[i] && best.map_or(true, |b| r > res[b]) {
            best = Some(i);
        }
    }
    best
}

/// Least-squares weights for the given support (indices into `x`, `f`):
/// last right singular vector of the Loewner matrix over the other samples.
fn weights(x: &[f64], f: &[f64], support: &[usize], selected: &[bool]) -> Result<Vec<f64>> {
    let rows: Vec<usize> = (0..x.len()).filter(|&i| !selected[i]).collect();
    let m = support.len();
    if m == 1 {
        return Ok(vec![1.0]);
    }
    let l = DMatrix::from_fn(rows.len(), m, |i, k| {
        let (ri, sk) = (rows[i], support[k]);
        (f[ri] - f[sk]) / (x[ri] - x[sk])
    });
    let svd = linalg::svd(&l)?;
    if svd.vt.nrows() < m {
        return Err(Error::Argument(
            "too few samples left for the least-squares weights".into(),
        ));
    }
    let mut w: Vec<f64> = svd.vt.row(m - 1).iter().copied().collect();
    // Fix the sign so that the largest weight is positive.
    let big = w
        .iter()
        .copied()
        .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    if big < 0.0 {
        w.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(w)
}

fn form_at(x: &[f64], f: &[f64], support: &[usize], w: Vec<f64>) -> BarycentricForm {
    BarycentricForm {
        support: support.iter().map(|&i| x[i]).collect(),
        values: support.iter().map(|&i| f[i]).collect(),
        weights: w,
    }
}

/// Runs the greedy iteration; `each` sees every intermediate form.
fn run(
    ds: &MeasurementSet,
    stop: AaaStop,
    mut each: impl FnMut(&BarycentricForm),
) -> Result<(BarycentricForm, AaaTrace)> {
    let x = ds.points();
    let f = ds.values();
    let n = x.len();
    if n < 2 {
        return Err(Error::Argument(format!(
            "AAA needs at least 2 samples, got {n}"
        )));
    }
    let (max_order, tol) = match stop {
        AaaStop::Order(r) => {
            if 2 * r >= n {
                return Err(Error::Argument(format!(
                    "order {r} needs more than {} samples, got {n}",
                    2 * r
                )));
            }
            (r, 0.0)
        }
        AaaStop::Tolerance(t) => ((n - 1) / 2, t),
    };
    let fmax = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mean = f.iter().sum::<f64>() / n as f64;
    let mut res: Vec<f64> = f.iter().map(|v| (v - mean).abs()).collect();
    let mut selected = vec![false; n];
    let mut support = Vec::new();
    let mut trace = AaaTrace::default();
    loop {
        let j = argmax_unselected(&res, &selected).expect("unselected samples remain");
        selected[j] = true;
        support.push(j);
        let w = weights(&x, &f, &support, &selected)?;
        let form = form_at(&x, &f, &support, w);
        for i in 0..n {
            res[i] = if selected[i] {
                0.0
            } else {
                match bary_eval(&form, x[i]) {
                    Ok(r) => (f[i] - r).abs(),
                    Err(_) => f64::INFINITY,
                }
            };
        }
        let max_res = res.iter().fold(0.0f64, |a, &v| a.max(v));
        trace.steps.push(AaaStep {
            index: j,
            point: x[j],
            max_residual: max_res,
        });
        each(&form);
        let order = support.len() - 1;
        if order >= max_order || max_res <= EXACT_FIT || max_res <= tol * fmax {
            return Ok((form, trace));
        }
    }
}

/// Fits a barycentric rational to `ds`. Starting from the mean of the data,
/// each step adds the sample with the largest residual (first index on ties).
pub fn aaa_fit(ds: &MeasurementSet, stop: AaaStop) -> Result<(BarycentricForm, AaaTrace)> {
    run(ds, stop, |_| {})
}

/// Every intermediate form up to order `r_max`, indexed by order. The path
/// is shorter when the data are fitted exactly before `r_max`.
pub fn aaa_path(ds: &MeasurementSet, r_max: usize) -> Result<Vec<BarycentricForm>> {
    let mut out = Vec::new();
    run(ds, AaaStop::Order(r_max), |b| out.push(b.clone()))?;
    Ok(out)
}
