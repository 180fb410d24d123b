//! Classical estimates for the best rational approximation error of `|x|`
//! on `[-1, 1]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    /// `3 e^{−√n}`, valid for `n >= 4`.
    NewmanUpper,
    /// `½ e^{−9√n}`, valid for `n >= 4`.
    NewmanLower,
    /// `e^{−π√(n+1)}`, valid for `n >= 0`.
    BulanovLower,
    /// `8 e^{−π√n}`: the asymptotic error, not a bound.
    StahlEstimate,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [
        BoundKind::NewmanUpper,
        BoundKind::NewmanLower,
        BoundKind::BulanovLower,
        BoundKind::StahlEstimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::NewmanUpper => "NewmanUpper",
            BoundKind::NewmanLower => "NewmanLower",
            BoundKind::BulanovLower => "BulanovLower",
            BoundKind::StahlEstimate => "StahlEstimate",
        }
    }

    /// Smallest `n` the formula is stated for.
    pub fn min_n(self) -> usize {
        match self {
            BoundKind::NewmanUpper | BoundKind::NewmanLower => 4,
            BoundKind::BulanovLower => 0,
            BoundKind::StahlEstimate => 1,
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown bound '{s}'")))
    }
}

pub fn bound_value(kind: BoundKind, n: usize) -> Result<f64> {
    if n < kind.min_n() {
        return Err(Error::Domain(format!(
            "{kind} is stated for n >= {}, got {n}",
            kind.min_n()
        )));
    }
    let x = n as f64;
    Ok(match kind {
        BoundKind::NewmanUpper => 3.0 * (-x.sqrt()).exp(),
        BoundKind::NewmanLower => 0.5 * (-9.0 * x.sqrt()).exp(),
        BoundKind::BulanovLower => (-PI * (x + 1.0).sqrt()).exp(),
        BoundKind::StahlEstimate => 8.0 * (-PI * x.sqrt()).exp(),
    })
}

/// Bound value, or `NaN` outside the validity range.
pub fn bound_or_nan(kind: BoundKind, n: usize) -> f64 {
    bound_value(kind, n).unwrap_or(f64::NAN)
}
