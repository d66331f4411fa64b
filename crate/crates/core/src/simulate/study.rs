//! Monte-Carlo replication of levels, powers and null quantiles.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::copula::CopulaSpec;
use super::dgp::{generate_dgp, randomization_seed, Dgp, DgpSettings};
use crate::asymptotics::{combined_null_descriptor, combined_p_value};
use crate::distribution::Innovation;
use crate::domain::{build_subset_lag_family, SubsetLagFamily};
use crate::error::{invalid, Result};
use crate::pit::{randomized_pit, Averageable, RandomizationPlan};
use crate::report::{CombinedKind, StatisticSelection};
use crate::special::quantile_type7;
use crate::stats::{replicate_statistics, ReplicateStatistics};

fn default_randomizations() -> Vec<usize> {
    vec![1]
}
fn default_level() -> f64 {
    0.05
}
fn default_m2() -> u32 {
    5
}
fn default_m3() -> u32 {
    2
}
fn default_true() -> bool {
    true
}
fn default_burn_in() -> usize {
    500
}

/// What a study reports for each statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StudyMode {
    /// Rejection percentages at `level` using asymptotic p-values.
    Rejection,
    /// Empirical quantiles of the statistic values across replicates.
    Quantiles { probs: Vec<f64> },
}

impl Default for StudyMode {
    fn default() -> Self {
        StudyMode::Rejection
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McStudySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dgp: Dgp,
    pub copula: CopulaSpec,
    pub n: usize,
    pub replicates: usize,
    #[serde(default)]
    pub lag_shift: usize,
    /// Values of `M`; statistics are averaged over the first `M`
    /// randomizations of each replicate.
    #[serde(default = "default_randomizations")]
    pub randomizations: Vec<usize>,
    pub seed: u64,
    /// Combined statistics by name (`W`, `F`, `H`, `H_S`, `H_G`, `H_E`);
    /// all when empty.
    #[serde(default)]
    pub statistics: Vec<String>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_m2")]
    pub m2: u32,
    #[serde(default = "default_m3")]
    pub m3: u32,
    #[serde(default = "default_true")]
    pub include_triples: bool,
    #[serde(default = "default_true")]
    pub pair_variants: bool,
    #[serde(default)]
    pub innovation: Innovation,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub mode: StudyMode,
}

impl McStudySpec {
    pub fn new(dgp: Dgp, copula: CopulaSpec, n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            name: None,
            dgp,
            copula,
            n,
            replicates,
            lag_shift: 0,
            randomizations: default_randomizations(),
            seed,
            statistics: Vec::new(),
            level: default_level(),
            m2: default_m2(),
            m3: default_m3(),
            include_triples: true,
            pair_variants: true,
            innovation: Innovation::Gaussian,
            burn_in: default_burn_in(),
            mode: StudyMode::Rejection,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("replicates must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid(format!("level must lie in (0,1), got {}", self.level)));
        }
        if self.randomizations.is_empty() || self.randomizations.contains(&0) {
            return Err(invalid("randomizations must be a non-empty list of positive M"));
        }
        if let StudyMode::Quantiles { probs } = &self.mode {
            if probs.is_empty() || probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
                return Err(invalid("quantile probabilities must lie in (0,1)"));
            }
        }
        self.selection()?;
        Ok(())
    }

    pub fn selection(&self) -> Result<StatisticSelection> {
        let combined = if self.statistics.is_empty() {
            CombinedKind::ALL.into_iter().collect()
        } else {
            self.statistics
                .iter()
                .map(|s| CombinedKind::parse(s).ok_or_else(|| invalid(format!("unknown statistic '{s}'"))))
                .collect::<Result<_>>()?
        };
        Ok(StatisticSelection {
            combined,
            pair_variants: self.pair_variants,
        })
    }

    pub fn dimension(&self) -> Result<usize> {
        match (self.dgp.dimension(), self.copula.dimension) {
            (Some(d), _) => Ok(d),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(invalid("iid_uniform needs the copula dimension")),
        }
    }

    pub fn family(&self) -> Result<SubsetLagFamily> {
        build_subset_lag_family(self.dimension()?, self.m2, self.m3, self.include_triples)
    }

    fn settings(&self) -> DgpSettings {
        DgpSettings {
            dgp: self.dgp,
            copula: self.copula.clone(),
            n: self.n,
            lag_shift: self.lag_shift,
            innovation: self.innovation,
            burn_in: self.burn_in,
            seed: self.seed,
        }
    }
}

/// Combined statistics of one replicate for every requested `M`:
/// `values[m_index] = [(label, value, p_value)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub values: Vec<Vec<(String, f64, f64)>>,
}

/// Evaluates replicate `r`: data, randomized PIT with `max(M)`
/// randomizations, statistics per randomization, then averages over the
/// first `M` of them.
pub fn run_replicate(spec: &McStudySpec, family: &SubsetLagFamily, replicate: usize) -> Result<ReplicateOutcome> {
    let selection = spec.selection()?;
    let (panel, trace) = generate_dgp(&spec.settings(), replicate)?;
    let m_max = *spec.randomizations.iter().max().expect("non-empty");
    let plan = RandomizationPlan::new(m_max, randomization_seed(spec.seed, replicate))?;
    let errors = randomized_pit(&panel, &trace, &plan)?;
    let per_k: Vec<ReplicateStatistics> = errors
        .replicates()
        .par_iter()
        .map(|e| replicate_statistics(e, family, &selection))
        .collect::<Result<_>>()?;
    let full = combined_null_descriptor(family, spec.n, false);
    let pairs = combined_null_descriptor(family, spec.n, true);
    let values = spec
        .randomizations
        .iter()
        .map(|&m| {
            let avg = ReplicateStatistics::average(&per_k[..m]);
            avg.combined
                .iter()
                .map(|&(kind, pairs_only, value)| {
                    let (_, p) = combined_p_value(kind, value, if pairs_only { &pairs } else { &full })?;
                    let label = if pairs_only { format!("{}_2", kind.name()) } else { kind.name().to_string() };
                    Ok((label, value, p))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicateOutcome { values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEntry {
    pub prob: f64,
    pub value: f64,
}

/// Summary of one statistic at one `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub statistic: String,
    pub m: usize,
    pub replicates: usize,
    /// Percentage of replicates with p-value below the level.
    pub rejection_percent: f64,
    /// Binomial standard error of the percentage.
    pub standard_error: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantiles: Vec<QuantileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStudyResult {
    pub spec: McStudySpec,
    pub rows: Vec<StudyRow>,
    pub failed_replicates: usize,
    /// First few failure messages.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    pub quantile_estimator: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Statistic values per `(label, M)` across successful replicates.
    #[serde(skip)]
    pub values: BTreeMap<(String, usize), Vec<f64>>,
}

impl McStudyResult {
    pub fn row(&self, statistic: &str, m: usize) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.statistic == statistic && r.m == m)
    }
}

/// Runs every replicate (concurrently, on per-replicate random streams) and
/// aggregates in replicate order, so the result depends only on the spec.
pub fn run_study(spec: &McStudySpec) -> Result<McStudyResult> {
    spec.validate()?;
    let family = spec.family()?;
    let outcomes: Vec<Result<ReplicateOutcome>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| run_replicate(spec, &family, r))
        .collect();

    let mut failures = Vec::new();
    let mut failed = 0;
    let mut order: Vec<(String, usize)> = Vec::new();
    let mut values: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    let mut rejections: BTreeMap<(String, usize), usize> = BTreeMap::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                for (mi, row) in o.values.iter().enumerate() {
                    let m = spec.randomizations[mi];
                    for (label, value, p) in row {
                        let key = (label.clone(), m);
                        if !values.contains_key(&key) {
                            order.push(key.clone());
                        }
                        values.entry(key.clone()).or_default().push(*value);
                        *rejections.entry(key).or_default() += usize::from(*p < spec.level);
                    }
                }
            }
            Err(e) => {
                failed += 1;
                if failures.len() < 10 {
                    failures.push(format!("replicate {r}: {e}"));
                }
            }
        }
    }
    let rows = order
        .iter()
        .map(|key| {
            let v = &values[key];
            let count = v.len();
            let rate = rejections[key] as f64 / count as f64;
            let quantiles = match &spec.mode {
                StudyMode::Quantiles { probs } => probs
                    .iter()
                    .map(|&p| QuantileEntry {
                        prob: p,
                        value: quantile_type7(v, p),
                    })
                    .collect(),
                StudyMode::Rejection => Vec::new(),
            };
            StudyRow {
                statistic: key.0.clone(),
                m: key.1,
                replicates: count,
                rejection_percent: 100.0 * rate,
                standard_error: 100.0 * (rate * (1.0 - rate) / count as f64).sqrt(),
                quantiles,
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if spec.randomizations.iter().any(|&m| m > 1) && spec.mode == StudyMode::Rejection {
        warnings.push(
            "rejections for M > 1 use asymptotic p-values of single-randomization statistics and are approximate"
                .to_string(),
        );
    }
    if failed == spec.replicates {
        return Err(invalid(format!(
            "every replicate failed; first error: {}",
            failures.first().cloned().unwrap_or_default()
        )));
    }
    Ok(McStudyResult {
        spec: spec.clone(),
        rows,
        failed_replicates: failed,
        failures,
        quantile_estimator: "type7".to_string(),
        warnings,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::copula::CopulaFamily;

    fn small(dgp: Dgp, replicates: usize) -> McStudySpec {
        let mut s = McStudySpec::new(
            dgp,
            CopulaSpec {
                family: CopulaFamily::Independence,
                kendall_tau: None,
                dimension: Some(2),
            },
            60,
            replicates,
            17,
        );
        s.m2 = 1;
        s.burn_in = 50;
        s
    }

    #[test]
    fn reproducible() {
        let s = small(Dgp::Dgp2, 6);
        let a = run_study(&s).unwrap();
        let b = run_study(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values, b.values);
        assert_eq!(a.rows.len(), 6);
        assert_eq!(a.failed_replicates, 0);
    }

    #[test]
    fn single_replicate_is_degenerate() {
        let r = run_study(&small(Dgp::IidUniform, 1)).unwrap();
        for row in &r.rows {
            assert!(row.rejection_percent == 0.0 || row.rejection_percent == 100.0);
            assert_eq!(row.standard_error, 0.0);
        }
    }

    #[test]
    fn shared_randomizations_across_m() {
        let mut s = small(Dgp::Dgp2, 2);
        s.randomizations = vec![1, 3];
        s.mode = StudyMode::Quantiles { probs: vec![0.5] };
        let r = run_study(&s).unwrap();
        let mut single = s.clone();
        single.randomizations = vec![1];
        let r1 = run_study(&single).unwrap();
        assert_eq!(r.values[&("W".to_string(), 1)], r1.values[&("W".to_string(), 1)]);
        assert!(r.row("W", 3).is_some());
        assert!(!r.warnings.iter().any(|w| w.contains("approximate")));
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = small(Dgp::Dgp1, 1);
        s.level = 1.5;
        assert!(run_study(&s).is_err());
        let mut s = small(Dgp::Dgp1, 1);
        s.statistics = vec!["Q".into()];
        assert!(run_study(&s).is_err());
    }
}
