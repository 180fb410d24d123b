//! Interpolation point families on `[a, b] ⊂ (0, 1]` and their mirror
//! images on `[-b, -a]`.

pub mod elliptic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use elliptic::{complete_elliptic_k, jacobi_sn_cn};

/// Positive sampling interval `[a, b]` with `n` points per half-interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl IntervalConfig {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        let cfg = IntervalConfig { a, b, n };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let IntervalConfig { a, b, n } = *self;
        if !(a.is_finite() && b.is_finite()) || a <= 0.0 || a >= b || b > 1.0 {
            return Err(Error::Config(format!(
                "interval must satisfy 0 < a < b <= 1, got a = {a}, b = {b}"
            )));
        }
        if n == 0 {
            return Err(Error::Config(
                "need at least one point per half-interval".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointFamily {
    Linspace,
    Logspace,
    Chebyshev,
    Zolotarev,
    Newman,
}

impl PointFamily {
    pub const ALL: [PointFamily; 5] = [
        PointFamily::Linspace,
        PointFamily::Logspace,
        PointFamily::Chebyshev,
        PointFamily::Zolotarev,
        PointFamily::Newman,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PointFamily::Linspace => "linspace",
            PointFamily::Logspace => "logspace",
            PointFamily::Chebyshev => "chebyshev",
            PointFamily::Zolotarev => "zolotarev",
            PointFamily::Newman => "newman",
        }
    }

    /// Positive points of this family. Newman points depend on `n` only.
    pub fn generate(self, cfg: &IntervalConfig) -> Result<Vec<f64>> {
        match self {
            PointFamily::Linspace => linspace_points(cfg),
            PointFamily::Logspace => logspace_points(cfg),
            PointFamily::Chebyshev => chebyshev_points(cfg),
            PointFamily::Zolotarev => zolotarev_points(cfg),
            PointFamily::Newman => newman_points(cfg.n),
        }
    }
}

impl fmt::Display for PointFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PointFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PointFamily::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown point family '{s}'")))
    }
}

pub fn linspace_points(cfg: &IntervalConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let IntervalConfig { a, b, n } = *cfg;
    if n == 1 {
        return Ok(vec![a]);
    }
    let h = (b - a) / (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n).map(|k| a + k as f64 * h).collect();
    pts[n - 1] = b;
    Ok(pts)
}

pub fn logspace_points(cfg: &IntervalConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let IntervalConfig { a, b, n } = *cfg;
    if n == 1 {
        return Ok(vec![a]);
    }
    let (la, lb) = (a.log10(), b.log10());
    let step = (lb - la) / (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n).map(|k| 10f64.powf(la + k as f64 * step)).collect();
    pts[0] = a;
    pts[n - 1] = b;
    Ok(pts)
}

/// `½(a+b) + ½(a−b) cos((2k−1)π/(2n))`, `k = 1..n`; already increasing.
pub fn chebyshev_points(cfg: &IntervalConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(chebyshev_nodes(cfg.a, cfg.b, cfg.n))
}

pub(crate) fn chebyshev_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (a - b));
    (1..=n)
        .map(|k| {
            let theta = (2 * k - 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
            mid + half * theta.cos()
        })
        .collect()
}

/// Modulus data for the Zolotarev grid on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    /// `ℓ = a/b`
    pub ell: f64,
    /// `ℓ' = sqrt(1 - ℓ²)`
    pub ell_prime: f64,
    /// `K' = K(ℓ')`
    pub k_prime: f64,
}

impl EllipticModulus {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 {
            return Err(Error::Domain(format!(
                "Zolotarev points need a > 0 (got a = {a}); the modulus a/b degenerates"
            )));
        }
        if a >= b {
            return Err(Error::Config(format!("need a < b, got a = {a}, b = {b}")));
        }
        let ell = a / b;
        let ell_prime = ((1.0 - ell) * (1.0 + ell)).sqrt();
        let k_prime = elliptic::complete_elliptic_k_from_complement(ell);
        Ok(EllipticModulus {
            ell,
            ell_prime,
            k_prime,
        })
    }
}

/// Points where Zolotarev's best approximation of `sign` on `[a, b]`
/// equals one: `sqrt(a² sn²(iK'/n; ℓ') + b² cn²(iK'/n; ℓ'))`, `i = 1..n`.
///
/// The formula decreases in `i` (the `i = n` term is exactly `a`); the
/// result is returned sorted ascending.
pub fn zolotarev_points(cfg: &IntervalConfig) -> Result<Vec<f64>> {
    if cfg.a <= 0.0 {
        return Err(Error::Domain(format!(
            "Zolotarev points need a > 0 (got a = {})",
            cfg.a
        )));
    }
    cfg.validate()?;
    let IntervalConfig { a, b, n } = *cfg;
    let m = EllipticModulus::new(a, b)?;
    let mut pts: Vec<f64> = (1..=n)
        .map(|i| {
            let u = i as f64 * m.k_prime / n as f64;
            let (sn, cn) = elliptic::jacobi_sn_cn_with_complement(u, m.ell_prime, m.ell);
            (a * a * sn * sn + b * b * cn * cn).sqrt().clamp(a, b)
        })
        .collect();
    pts.sort_by(f64::total_cmp);
    Ok(pts)
}

/// `α^n, α^{n-1}, …, α` with `α = e^{-√n/n}`.
pub fn newman_points(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("Newman points need n >= 1".into()));
    }
    let s = (n as f64).sqrt();
    Ok((1..=n).rev().map(|j| (-(j as f64) / s).exp()).collect())
}

/// Sorted union of `points` and their negatives.
pub fn symmetric_extend(points: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = points.iter().find(|p| !(**p > 0.0)) {
        return Err(Error::Domain(format!(
            "symmetric extension needs strictly positive points, found {p}"
        )));
    }
    let mut out: Vec<f64> = points
        .iter()
        .map(|p| -p)
        .chain(points.iter().copied())
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}
