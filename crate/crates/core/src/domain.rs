//! Shared domain types: observed series, generalized-error matrices and the
//! subset/lag bookkeeping used by every statistic.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Observed multivariate series stored column by column. Counts are stored as
/// reals; integer-valued models check integrality themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPanel {
    columns: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl SeriesPanel {
    pub fn new(columns: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let d = columns.len();
        if d < 2 {
            return Err(invalid(format!("a panel needs at least 2 series, got {d}")));
        }
        if labels.len() != d {
            return Err(invalid(format!("{} labels for {d} series", labels.len())));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(invalid(format!("a panel needs at least 2 observations, got {n}")));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(invalid(format!(
                    "series {j} has {} observations, expected {n}",
                    col.len()
                )));
            }
            if let Some(t) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite value in series {j} at t={t}")));
            }
        }
        Ok(Self { columns, labels })
    }

    /// Builds a panel with labels `X1..Xd`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (1..=columns.len()).map(|j| format!("X{j}")).collect();
        Self::new(columns, labels)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// An n×d matrix of generalized errors, every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMatrix {
    columns: Vec<Vec<f64>>,
}

impl ErrorMatrix {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(invalid("error matrix without columns"));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(invalid(format!("error matrix needs n >= 2, got {n}")));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(invalid(format!("column {j} has length {}, expected {n}", col.len())));
            }
            if let Some(t) = col.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Data(format!(
                    "generalized error {} outside [0,1] at t={t}, series={j}",
                    col[t]
                )));
            }
        }
        Ok(Self { columns })
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Vec<f64>> {
        self.columns
    }
}

/// Generalized errors for a panel, replicated over `M` independent
/// randomizations of the probability integral transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedErrorPanel {
    replicates: Vec<ErrorMatrix>,
    source_seed: u64,
}

impl GeneralizedErrorPanel {
    pub fn new(replicates: Vec<ErrorMatrix>, source_seed: u64) -> Result<Self> {
        let first = replicates
            .first()
            .ok_or_else(|| invalid("a generalized error panel needs at least one replicate"))?;
        let (n, d) = (first.n(), first.d());
        if replicates.iter().any(|r| r.n() != n || r.d() != d) {
            return Err(invalid("replicates have inconsistent shapes"));
        }
        Ok(Self {
            replicates,
            source_seed,
        })
    }

    /// Wraps a single matrix (M = 1).
    pub fn single(errors: ErrorMatrix, source_seed: u64) -> Self {
        Self {
            replicates: vec![errors],
            source_seed,
        }
    }

    /// The first replicate.
    pub fn errors(&self) -> &ErrorMatrix {
        &self.replicates[0]
    }

    pub fn replicate(&self, k: usize) -> &ErrorMatrix {
        &self.replicates[k]
    }

    pub fn replicates(&self) -> &[ErrorMatrix] {
        &self.replicates
    }

    pub fn m(&self) -> usize {
        self.replicates.len()
    }

    pub fn n(&self) -> usize {
        self.replicates[0].n()
    }

    pub fn d(&self) -> usize {
        self.replicates[0].d()
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }
}

/// One subset `A` (sorted, 0-based) with its representative lags `D_A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetLags {
    pub subset: Vec<usize>,
    pub lags: Vec<Vec<i64>>,
}

/// The family `{(A, D_A)}` of subsets with `|A| >= 2` and their
/// representative multivariate lags.
///
/// Each lag vector has length `d`, is zero outside `A`, and is zero at
/// `min(A)`: a lag vector is only defined up to a common shift on `A`, and
/// anchoring the smallest index picks exactly one representative per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetLagFamily {
    d: usize,
    pair_max_lag: u32,
    triple_max_lag: u32,
    entries: Vec<SubsetLags>,
}

pub const MAX_DIMENSION: usize = 3;

/// Builds the subset/lag family used by the combined statistics.
///
/// Pairs `{a < b}` get `ℓ_b ∈ {-M2..M2}`; when `d = 3` and triples are on, the
/// triple gets `(ℓ_2, ℓ_3) ∈ {-M3..M3}²` with `ℓ_1 = 0`.
pub fn build_subset_lag_family(
    d: usize,
    pair_max_lag: u32,
    triple_max_lag: u32,
    include_triples: bool,
) -> Result<SubsetLagFamily> {
    if d < 2 {
        return Err(invalid(format!("need d >= 2, got {d}")));
    }
    if d > MAX_DIMENSION {
        return Err(Error::Unsupported(format!(
            "d = {d}: statistics for subsets of cardinality >= 4 are not available (d <= 3)"
        )));
    }
    let m2 = pair_max_lag as i64;
    let m3 = triple_max_lag as i64;
    let mut entries = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            let lags = (-m2..=m2)
                .map(|l| {
                    let mut v = vec![0i64; d];
                    v[b] = l;
                    v
                })
                .collect();
            entries.push(SubsetLags {
                subset: vec![a, b],
                lags,
            });
        }
    }
    if d == 3 && include_triples {
        let mut lags = Vec::with_capacity(((2 * m3 + 1) * (2 * m3 + 1)) as usize);
        for l2 in -m3..=m3 {
            for l3 in -m3..=m3 {
                lags.push(vec![0, l2, l3]);
            }
        }
        entries.push(SubsetLags {
            subset: vec![0, 1, 2],
            lags,
        });
    }
    Ok(SubsetLagFamily {
        d,
        pair_max_lag,
        triple_max_lag,
        entries,
    })
}

/// Representative of the `≡_A` class of `lag`: zero outside `A`, shifted so
/// that the smallest index of `A` sits at lag 0.
pub fn canonical_lag(subset: &[usize], lag: &[i64]) -> Vec<i64> {
    let anchor = subset.iter().copied().min().map(|a| lag[a]).unwrap_or(0);
    let mut out = vec![0i64; lag.len()];
    for &j in subset {
        out[j] = lag[j] - anchor;
    }
    out
}

/// `ℓ ≡_A ℓ'`: the difference `ℓ_j - ℓ'_j` is constant over `j ∈ A`.
pub fn lags_equivalent(subset: &[usize], a: &[i64], b: &[i64]) -> bool {
    let mut diffs = subset.iter().map(|&j| a[j] - b[j]);
    match diffs.next() {
        Some(first) => diffs.all(|x| x == first),
        None => true,
    }
}

impl SubsetLagFamily {
    /// Rebuilds a family from arbitrary entries: subsets are sorted, each lag
    /// is replaced by its canonical representative and duplicates (in the
    /// `≡_A` sense) are dropped, keeping first occurrences.
    pub fn from_entries(
        d: usize,
        pair_max_lag: u32,
        triple_max_lag: u32,
        entries: Vec<SubsetLags>,
    ) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&d) {
            return Err(invalid(format!("unsupported dimension {d}")));
        }
        let mut out: Vec<SubsetLags> = Vec::new();
        for entry in entries {
            let mut subset = entry.subset.clone();
            subset.sort_unstable();
            subset.dedup();
            if subset.len() < 2 || subset.iter().any(|&j| j >= d) {
                return Err(invalid(format!("invalid subset {:?} for d = {d}", entry.subset)));
            }
            let mut lags: Vec<Vec<i64>> = Vec::new();
            for lag in &entry.lags {
                if lag.len() != d {
                    return Err(invalid(format!("lag {lag:?} does not have length {d}")));
                }
                let canon = canonical_lag(&subset, lag);
                if !lags.contains(&canon) {
                    lags.push(canon);
                }
            }
            match out.iter_mut().find(|e| e.subset == subset) {
                Some(existing) => {
                    for l in lags {
                        if !existing.lags.contains(&l) {
                            existing.lags.push(l);
                        }
                    }
                }
                None => out.push(SubsetLags { subset, lags }),
            }
        }
        Ok(Self {
            d,
            pair_max_lag,
            triple_max_lag,
            entries: out,
        })
    }

    /// Same family rebuilt through [`SubsetLagFamily::from_entries`].
    pub fn canonicalize(&self) -> Result<Self> {
        Self::from_entries(
            self.d,
            self.pair_max_lag,
            self.triple_max_lag,
            self.entries.clone(),
        )
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pair_max_lag(&self) -> u32 {
        self.pair_max_lag
    }

    pub fn triple_max_lag(&self) -> u32 {
        self.triple_max_lag
    }

    pub fn entries(&self) -> &[SubsetLags] {
        &self.entries
    }

    /// `Σ_A |D_A|`.
    pub fn term_count(&self) -> usize {
        self.entries.iter().map(|e| e.lags.len()).sum()
    }

    /// `Σ_{|A| = 2} |D_A|`.
    pub fn pair_term_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.subset.len() == 2)
            .map(|e| e.lags.len())
            .sum()
    }

    pub fn has_triples(&self) -> bool {
        self.entries.iter().any(|e| e.subset.len() == 3)
    }

    /// All `(A, ℓ)` pairs in family order.
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &[i64])> {
        self.entries
            .iter()
            .flat_map(|e| e.lags.iter().map(move |l| (e.subset.as_slice(), l.as_slice())))
    }

    /// Finds the representative in `D_A` equivalent to `lag`, if any.
    pub fn representative(&self, subset: &[usize], lag: &[i64]) -> Option<&[i64]> {
        self.entries
            .iter()
            .find(|e| e.subset == subset)?
            .lags
            .iter()
            .find(|l| lags_equivalent(subset, l, lag))
            .map(|l| l.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_family_counts() {
        let fam = build_subset_lag_family(2, 5, 2, true).unwrap();
        assert_eq!(fam.entries().len(), 1);
        assert_eq!(fam.term_count(), 11);
        assert_eq!(fam.entries()[0].lags[0], vec![0, -5]);
    }

    #[test]
    fn contemporaneous_only() {
        let fam = build_subset_lag_family(2, 0, 0, true).unwrap();
        assert_eq!(fam.entries()[0].lags, vec![vec![0, 0]]);
    }

    #[test]
    fn trivariate_counts() {
        let fam = build_subset_lag_family(3, 5, 2, true).unwrap();
        assert_eq!(fam.term_count(), 58);
        assert_eq!(fam.pair_term_count(), 33);
        let pairs_only = build_subset_lag_family(3, 5, 2, false).unwrap();
        assert_eq!(pairs_only.term_count(), 33);
        // pair {2,3} is anchored at its smaller index
        let e = &fam.entries()[2];
        assert_eq!(e.subset, vec![1, 2]);
        assert!(e.lags.iter().all(|l| l[0] == 0 && l[1] == 0));
    }

    #[test]
    fn rejects_large_dimension() {
        assert!(matches!(
            build_subset_lag_family(4, 5, 2, true),
            Err(Error::Unsupported(_))
        ));
        assert!(build_subset_lag_family(1, 5, 2, true).is_err());
    }

    #[test]
    fn canonicalization_is_idempotent() {
        for (d, m2, m3) in [(2, 3, 0), (3, 5, 2), (3, 0, 1)] {
            let fam = build_subset_lag_family(d, m2, m3, true).unwrap();
            assert_eq!(fam.canonicalize().unwrap(), fam);
        }
    }

    #[test]
    fn every_bounded_lag_has_one_representative() {
        let fam = build_subset_lag_family(3, 2, 1, true).unwrap();
        for e in fam.entries() {
            let m = if e.subset.len() == 2 { 2 } else { 1 };
            for a in -m..=m {
                for b in -m..=m {
                    for c in -m..=m {
                        let lag = [a, b, c];
                        let canon = canonical_lag(&e.subset, &lag);
                        let bounded = e.subset.iter().all(|&j| canon[j].abs() <= m);
                        let hits = e
                            .lags
                            .iter()
                            .filter(|l| lags_equivalent(&e.subset, l, &lag))
                            .count();
                        assert_eq!(hits, usize::from(bounded), "{:?} {:?}", e.subset, lag);
                    }
                }
            }
        }
    }

    #[test]
    fn from_entries_dedups_equivalent_lags() {
        let fam = SubsetLagFamily::from_entries(
            3,
            1,
            1,
            vec![SubsetLags {
                subset: vec![2, 0],
                lags: vec![vec![1, 7, 2], vec![0, 0, 1], vec![3, 0, 3]],
            }],
        )
        .unwrap();
        assert_eq!(fam.entries()[0].subset, vec![0, 2]);
        assert_eq!(fam.entries()[0].lags, vec![vec![0, 0, 1], vec![0, 0, 0]]);
    }

    #[test]
    fn panel_validation() {
        assert!(SeriesPanel::from_columns(vec![vec![1.0, 2.0]]).is_err());
        assert!(SeriesPanel::from_columns(vec![vec![1.0, f64::NAN], vec![1.0, 2.0]]).is_err());
        assert!(SeriesPanel::from_columns(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        let p = SeriesPanel::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!((p.n(), p.d()), (2, 2));
        assert!(ErrorMatrix::new(vec![vec![0.1, 1.2]]).is_err());
    }
}
