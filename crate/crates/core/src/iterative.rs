//! Iterative Loewner refinement: the model order stays fixed while the data
//! set grows by the current worst-error points.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{partition, AbsValue, MeasurementSet, PartitionScheme, PartitionedData};
use crate::error::{Error, Result};
use crate::loewner::{loewner_fit, TruncationMode};
use crate::maxerror::{max_error, ErrorReport};
use crate::model::RationalApproximant;

/// Default step budget.
pub const DEFAULT_MAX_STEPS: usize = 22;
/// Shift applied to an added abscissa that is already in the data.
pub const DUPLICATE_SHIFT: f64 = 1e-12;
/// Consecutive non-improving steps before a stagnation warning.
pub const STAGNATION_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: usize,
    pub eps_total: f64,
    pub eps_at_0: f64,
    pub eps_minus: f64,
    pub eps_plus: f64,
    /// Abscissas added before this step's fit.
    pub added: Vec<f64>,
    /// Number of measurement pairs the fit used.
    pub data_points: usize,
    pub valid: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub warnings: Vec<String>,
    pub converged: bool,
}

fn csv_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

impl IterationTrace {
    /// Columns `step,eps_total,eps_at_0,eps_minus,eps_plus,added_x1,added_x2`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "step,eps_total,eps_at_0,eps_minus,eps_plus,added_x1,added_x2"
        )?;
        for r in &self.records {
            let x1 = r.added.first().copied().unwrap_or(f64::NAN);
            let x2 = r.added.get(1).copied().unwrap_or(f64::NAN);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.step,
                csv_num(r.eps_total),
                csv_num(r.eps_at_0),
                csv_num(r.eps_minus),
                csv_num(r.eps_plus),
                csv_num(x1),
                csv_num(x2)
            )?;
        }
        Ok(())
    }
}

struct Iteration {
    pd: PartitionedData,
    r: usize,
    trace: IterationTrace,
}

impl Iteration {
    /// Adds `(x, |x|)`, shifting `x` away from existing abscissas.
    fn add(&mut self, x: f64) -> Result<f64> {
        let mut x = x;
        while self.pd.contains_point(x) {
            let shifted = if x >= 0.0 {
                x + DUPLICATE_SHIFT
            } else {
                x - DUPLICATE_SHIFT
            };
            self.trace.warnings.push(format!(
                "point {x:e} already in the data; using {shifted:e}"
            ));
            x = shifted;
        }
        self.pd.insert(x, x.abs(), &AbsValue)?;
        Ok(x)
    }

    fn fit(&mut self, step: usize, added: Vec<f64>) -> Result<(RationalApproximant, ErrorReport)> {
        let model = loewner_fit(&self.pd, TruncationMode::Rank(self.r))?;
        let report = max_error(&model)?;
        if !report.valid {
            self.trace.warnings.push(format!(
                "step {step}: model has real poles in [-1, 1] at {:?}",
                report.poles
            ));
        }
        self.trace.records.push(IterationRecord {
            step,
            eps_total: report.eps_total,
            eps_at_0: report.eps_at_zero,
            eps_minus: report.eps_minus,
            eps_plus: report.eps_plus,
            added,
            data_points: self.pd.len(),
            valid: report.valid,
        });
        self.check_stagnation(step);
        Ok((model, report))
    }

    fn check_stagnation(&mut self, step: usize) {
        let recs = &self.trace.records;
        if recs.len() <= STAGNATION_STEPS {
            return;
        }
        let tail = &recs[recs.len() - STAGNATION_STEPS - 1..];
        if tail.windows(2).all(|w| w[1].eps_total >= w[0].eps_total) {
            self.trace.warnings.push(format!(
                "step {step}: error has not decreased for {STAGNATION_STEPS} consecutive steps"
            ));
        }
    }
}

/// Runs the refinement on `|x|` data that excludes `0` and `±1`.
///
/// Step 0 fits the data and locates the worst interior point `ρ`; step 1
/// adds `(0, 0)` and `(ρ, |ρ|)`; step 2 adds `(±1, 1)`; every further step
/// adds the worst points on `(−1, 0)` and `(0, 1)` of the previous model.
/// The loop ends once the error drops below `xi` or after step `max_steps`.
pub fn loewner_iterate(
    ds: &MeasurementSet,
    scheme: PartitionScheme,
    r: usize,
    xi: f64,
    max_steps: usize,
) -> Result<(RationalApproximant, IterationTrace)> {
    if !(xi > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {xi}"
        )));
    }
    if r == 0 {
        return Err(Error::Config("order must be positive".into()));
    }
    for x in [0.0, -1.0, 1.0] {
        if ds.contains_point(x) {
            return Err(Error::Data(format!(
                "initial data must not contain x = {x}"
            )));
        }
    }
    let mut it = Iteration {
        pd: partition(ds, scheme)?,
        r,
        trace: IterationTrace::default(),
    };

    let (mut model, mut report) = it.fit(0, vec![])?;
    if max_steps >= 1 {
        let rho = if report.eps_plus >= report.eps_minus {
            report.argmax_plus
        } else {
            report.argmax_minus
        };
        let zero = it.add(0.0)?;
        let rho = it.add(rho)?;
        (model, report) = it.fit(1, vec![zero, rho])?;
    }
    if max_steps >= 2 {
        let lo = it.add(-1.0)?;
        let hi = it.add(1.0)?;
        (model, report) = it.fit(2, vec![lo, hi])?;
    }
    let mut m = 2;
    while m < max_steps && !(report.eps_total < xi) {
        let lo = it.add(report.argmax_minus)?;
        let hi = it.add(report.argmax_plus)?;
        m += 1;
        (model, report) = it.fit(m, vec![lo, hi])?;
    }
    it.trace.converged = report.eps_total < xi;
    Ok((model, it.trace))
}
