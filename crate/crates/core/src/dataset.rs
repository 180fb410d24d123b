//! Measurement sets and their left/right partitions.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function that can be sampled, with the derivative data the Hermite
/// ("same") Loewner construction needs on its diagonal.
pub trait Target: Sync {
    fn value(&self, x: f64) -> f64;

    /// `(f'(x), d[x f(x)]/dx)` at `x`. Defaults to central differences with
    /// step `1e-6 * max(1, |x|)`.
    fn hermite(&self, x: f64) -> Result<(f64, f64)> {
        let h = 1e-6 * x.abs().max(1.0);
        let (fp, fm) = (self.value(x + h), self.value(x - h));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = ((x + h) * fp - (x - h) * fm) / (2.0 * h);
        Ok((d1, d2))
    }
}

/// `f(x) = |x|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbsValue;

impl Target for AbsValue {
    fn value(&self, x: f64) -> f64 {
        x.abs()
    }

    fn hermite(&self, x: f64) -> Result<(f64, f64)> {
        if x == 0.0 {
            return Err(Error::Domain("derivative of |x| is undefined at 0".into()));
        }
        Ok((x.signum(), 2.0 * x.abs()))
    }
}

/// Any closure, with numerical derivatives.
pub struct FnTarget<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Target for FnTarget<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Ordered `(tau, f)` pairs with distinct abscissas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pairs: Vec<(f64, f64)>,
}

impl MeasurementSet {
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if let Some((x, y)) = pairs.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Data(format!("non-finite sample ({x}, {y})")));
        }
        let mut xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Data(format!("duplicate sample point {}", w[0])));
        }
        Ok(MeasurementSet { pairs })
    }

    /// Samples `target` at `points`, keeping their order.
    pub fn sample(points: &[f64], target: &dyn Target) -> Result<Self> {
        Self::from_pairs(points.iter().map(|&x| (x, target.value(x))).collect())
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn points(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.pairs.iter().any(|p| p.0 == x)
    }

    /// Copy with pairs sorted by abscissa.
    pub fn sorted(&self) -> MeasurementSet {
        let mut pairs = self.pairs.clone();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        MeasurementSet { pairs }
    }

    /// Adds one pair; fails on a duplicate abscissa.
    pub fn push(&mut self, x: f64, y: f64) -> Result<()> {
        if self.contains_point(x) {
            return Err(Error::Data(format!("duplicate sample point {x}")));
        }
        self.pairs.push((x, y));
        Ok(())
    }

    /// Two numeric columns `tau,f`; a non-numeric first row is taken as a
    /// header. Row order is preserved.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Data(format!(
                    "row {}: expected 2 columns, found {}",
                    i + 1,
                    rec.len()
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => pairs.push((x, y)),
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Data(format!(
                        "row {}: cannot parse '{}', '{}' as numbers",
                        i + 1,
                        &rec[0],
                        &rec[1]
                    )))
                }
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }
}

/// Samples of `|x|` at `points`.
pub fn sample_abs(points: &[f64]) -> Result<MeasurementSet> {
    MeasurementSet::sample(points, &AbsValue)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionScheme {
    /// Negative abscissas left, positive right.
    Split,
    /// Sorted pairs alternate right, left, right, …
    Alternating,
    /// Both sides hold every pair; derivative data fills the diagonal.
    Same,
}

impl PartitionScheme {
    pub const ALL: [PartitionScheme; 3] = [
        PartitionScheme::Split,
        PartitionScheme::Alternating,
        PartitionScheme::Same,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartitionScheme::Split => "split",
            PartitionScheme::Alternating => "alternating",
            PartitionScheme::Same => "same",
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "split" => Ok(PartitionScheme::Split),
            "alternating" | "interlaced" | "alt" => Ok(PartitionScheme::Alternating),
            "same" => Ok(PartitionScheme::Same),
            _ => Err(Error::Config(format!("unknown partition scheme '{s}'"))),
        }
    }
}

/// Left/right data for the Loewner construction.
///
/// `extra` holds additional right pairs that only contribute columns (the
/// odd-count extension); the origin always lands there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedData {
    pub scheme: PartitionScheme,
    /// `(λ_i, w_i)`
    pub right: Vec<(f64, f64)>,
    /// `(μ_j, v_j)`
    pub left: Vec<(f64, f64)>,
    /// `(f'(λ_i), d[s f(s)]/ds at λ_i)`, one per right node; `Same` only.
    pub hermite: Option<Vec<(f64, f64)>>,
    pub extra: Vec<(f64, f64)>,
}

impl PartitionedData {
    /// Right points followed by extra points, i.e. the pencil's columns.
    pub fn column_points(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.right.iter().chain(self.extra.iter())
    }

    /// Every distinct pair held, in left, right, extra order.
    pub fn all_pairs(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.left.clone();
        if self.scheme != PartitionScheme::Same {
            out.extend_from_slice(&self.right);
        }
        out.extend_from_slice(&self.extra);
        out
    }

    pub fn len(&self) -> usize {
        self.all_pairs().len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty() && self.right.is_empty() && self.extra.is_empty()
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.left
            .iter()
            .chain(&self.right)
            .chain(&self.extra)
            .any(|p| p.0 == x)
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            PartitionScheme::Same => {
                let h = self
                    .hermite
                    .as_ref()
                    .ok_or_else(|| Error::Data("same partition without derivative data".into()))?;
                if self.left != self.right || h.len() != self.right.len() {
                    return Err(Error::Data(
                        "same partition needs identical left/right sets and one derivative pair per node"
                            .into(),
                    ));
                }
            }
            _ => {
                if let Some(p) = self
                    .left
                    .iter()
                    .find(|l| self.right.iter().any(|r| r.0 == l.0))
                {
                    return Err(Error::Data(format!(
                        "abscissa {} is both left and right",
                        p.0
                    )));
                }
            }
        }
        for e in &self.extra {
            if self.left.iter().chain(&self.right).any(|p| p.0 == e.0) {
                return Err(Error::Data(format!(
                    "extra point {} duplicates a node",
                    e.0
                )));
            }
        }
        Ok(())
    }

    /// Adds one measurement the way the scheme dictates: `Split` and
    /// `Alternating` append it as an extra right column; `Same` adds it to
    /// both sides with derivative data from `target`, except at the origin,
    /// which goes to the extra slot.
    pub fn insert(&mut self, x: f64, y: f64, target: &dyn Target) -> Result<()> {
        if self.contains_point(x) {
            return Err(Error::Data(format!("sample point {x} already present")));
        }
        match self.scheme {
            PartitionScheme::Same if x != 0.0 => {
                let d = target.hermite(x)?;
                self.left.push((x, y));
                self.right.push((x, y));
                self.hermite.get_or_insert_with(Vec::new).push(d);
            }
            _ => self.extra.push((x, y)),
        }
        Ok(())
    }
}

/// Partitions `|x|` data; see [`partition_with`].
pub fn partition(ds: &MeasurementSet, scheme: PartitionScheme) -> Result<PartitionedData> {
    partition_with(ds, scheme, &AbsValue)
}

/// Sorts `ds` and splits it into left/right sets. `target` supplies the
/// derivative data for [`PartitionScheme::Same`].
pub fn partition_with(
    ds: &MeasurementSet,
    scheme: PartitionScheme,
    target: &dyn Target,
) -> Result<PartitionedData> {
    let sorted = ds.sorted();
    let pairs = sorted.pairs();
    let (left, right, hermite) = match scheme {
        PartitionScheme::Split | PartitionScheme::Alternating if pairs.len() % 2 != 0 => {
            return Err(Error::Data(format!(
                "{scheme} partition needs an even number of pairs, got {}",
                pairs.len()
            )));
        }
        PartitionScheme::Split => {
            if pairs.iter().any(|p| p.0 == 0.0) {
                return Err(Error::Data(
                    "split partition cannot place the origin; add it with add_origin".into(),
                ));
            }
            let left: Vec<_> = pairs.iter().copied().filter(|p| p.0 < 0.0).collect();
            let right: Vec<_> = pairs.iter().copied().filter(|p| p.0 > 0.0).collect();
            (left, right, None)
        }
        PartitionScheme::Alternating => {
            let right: Vec<_> = pairs.iter().copied().step_by(2).collect();
            let left: Vec<_> = pairs.iter().copied().skip(1).step_by(2).collect();
            (left, right, None)
        }
        PartitionScheme::Same => {
            let hermite = pairs
                .iter()
                .map(|p| target.hermite(p.0))
                .collect::<Result<Vec<_>>>()?;
            (pairs.to_vec(), pairs.to_vec(), Some(hermite))
        }
    };
    Ok(PartitionedData {
        scheme,
        right,
        left,
        hermite,
        extra: Vec::new(),
    })
}

/// Appends the pair `(0, 0)` as an extra right column.
pub fn add_origin(mut pd: PartitionedData) -> Result<PartitionedData> {
    if pd.contains_point(0.0) {
        return Err(Error::Data("the origin is already part of the data".into()));
    }
    pd.extra.push((0.0, 0.0));
    Ok(pd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_set(x: &[f64]) -> MeasurementSet {
        sample_abs(x).unwrap()
    }

    #[test]
    fn sample_abs_examples() {
        assert_eq!(abs_set(&[-1.0, 1.0]).pairs(), &[(-1.0, 1.0), (1.0, 1.0)]);
        assert_eq!(abs_set(&[0.0]).pairs(), &[(0.0, 0.0)]);
        assert_eq!(abs_set(&[-0.5, 0.25]).pairs(), &[(-0.5, 0.5), (0.25, 0.25)]);
        assert!(matches!(sample_abs(&[0.5, -0.1, 0.5]), Err(Error::Data(_))));
    }

    #[test]
    fn split_example() {
        let pd = partition(&abs_set(&[1.0, -0.5, 0.5, -1.0]), PartitionScheme::Split).unwrap();
        assert_eq!(pd.left, vec![(-1.0, 1.0), (-0.5, 0.5)]);
        assert_eq!(pd.right, vec![(0.5, 0.5), (1.0, 1.0)]);
        assert!(pd.hermite.is_none());
    }

    #[test]
    fn alternating_example() {
        let pd = partition(
            &abs_set(&[-1.0, -0.5, 0.5, 1.0]),
            PartitionScheme::Alternating,
        )
        .unwrap();
        assert_eq!(pd.right, vec![(-1.0, 1.0), (0.5, 0.5)]);
        assert_eq!(pd.left, vec![(-0.5, 0.5), (1.0, 1.0)]);
    }

    #[test]
    fn same_example_derivatives() {
        let pd = partition(&abs_set(&[0.5, 1.0]), PartitionScheme::Same).unwrap();
        assert_eq!(pd.left, pd.right);
        assert_eq!(pd.hermite.unwrap(), vec![(1.0, 1.0), (1.0, 2.0)]);
    }

    #[test]
    fn same_rejects_origin() {
        let err = partition(&abs_set(&[0.0, 0.5]), PartitionScheme::Same);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn odd_counts_rejected_for_disjoint_schemes() {
        let ds = abs_set(&[-1.0, 0.5, 1.0]);
        assert!(partition(&ds, PartitionScheme::Split).is_err());
        assert!(partition(&ds, PartitionScheme::Alternating).is_err());
        assert!(partition(&ds, PartitionScheme::Same).is_ok());
    }

    #[test]
    fn numerical_derivatives_for_generic_targets() {
        let t = FnTarget(|x: f64| x * x * x);
        let (d1, d2) = t.hermite(0.7).unwrap();
        assert!((d1 - 3.0 * 0.49).abs() < 1e-8);
        assert!((d2 - 4.0 * 0.343).abs() < 1e-8);
    }

    #[test]
    fn origin_goes_to_extra_once() {
        let pd = partition(&abs_set(&[-1.0, -0.5, 0.5, 1.0]), PartitionScheme::Split).unwrap();
        let pd = add_origin(pd).unwrap();
        assert_eq!(pd.extra, vec![(0.0, 0.0)]);
        assert_eq!(pd.right.len(), 2);
        assert!(matches!(add_origin(pd), Err(Error::Data(_))));
    }

    #[test]
    fn insert_follows_scheme() {
        let mut same = partition(&abs_set(&[-0.5, 0.5]), PartitionScheme::Same).unwrap();
        same.insert(0.25, 0.25, &AbsValue).unwrap();
        same.insert(0.0, 0.0, &AbsValue).unwrap();
        assert_eq!(same.right.len(), 3);
        assert_eq!(same.extra, vec![(0.0, 0.0)]);
        same.validate().unwrap();
        assert!(same.insert(0.25, 0.25, &AbsValue).is_err());

        let mut split = partition(&abs_set(&[-0.5, 0.5]), PartitionScheme::Split).unwrap();
        split.insert(0.75, 0.75, &AbsValue).unwrap();
        assert_eq!(split.extra, vec![(0.75, 0.75)]);
        split.validate().unwrap();
    }

    #[test]
    fn csv_ingestion() {
        let text = "tau,f\n-1.0, 1.0\n0.5,0.5\n0.25,0.25\n";
        let ds = MeasurementSet::from_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.pairs(), &[(-1.0, 1.0), (0.5, 0.5), (0.25, 0.25)]);
        let ds = MeasurementSet::from_csv("1e-3,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(ds.len(), 2);
        assert!(MeasurementSet::from_csv("1,2\nx,4\n".as_bytes()).is_err());
        assert!(MeasurementSet::from_csv("1,2,3\n".as_bytes()).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn sorted_pairs(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        }

        proptest! {
            #[test]
            fn partition_is_a_bijection(
                pos in proptest::collection::btree_set(1u32..100_000, 1..40),
                scheme in 0usize..3,
                origin in any::<bool>(),
            ) {
                let p: Vec<f64> = pos.iter().map(|v| *v as f64 / 1e5).collect();
                let pts = crate::sampling::symmetric_extend(&p).unwrap();
                let ds = sample_abs(&pts).unwrap();
                let mut pd = partition(&ds, PartitionScheme::ALL[scheme]).unwrap();
                let mut expect = ds.pairs().to_vec();
                if origin {
                    pd = add_origin(pd).unwrap();
                    expect.push((0.0, 0.0));
                }
                pd.validate().unwrap();
                prop_assert_eq!(sorted_pairs(pd.all_pairs()), sorted_pairs(expect));
                if let Some(h) = &pd.hermite {
                    prop_assert_eq!(h.len(), pd.right.len());
                }
            }
        }
    }
}
