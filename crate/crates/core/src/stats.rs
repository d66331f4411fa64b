//! End-to-end evaluation of the statistics on a generalized-error panel,
//! with averaging over randomizations.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::asymptotics::{
    combined_null_descriptor, combined_p_value, combined_values, term_p_value, TermValues,
};
use crate::depmeasures::{CenteredColumns, ScoreFamily};
use crate::domain::{ErrorMatrix, GeneralizedErrorPanel, SubsetLagFamily};
use crate::error::{invalid, Result};
use crate::mobius::{cvm_statistic, CircularRankMatrix};
use crate::pit::{average_over_randomizations, Averageable};
use crate::report::{
    CombinedKind, CombinedStatistic, ReportMetadata, StatisticReport, StatisticSelection,
    TermKind, TermStatistic, REPORT_SCHEMA_VERSION,
};

/// Statistics of one randomization: per-term values per kind (aligned with
/// the family) and combined values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateStatistics {
    pub terms: BTreeMap<TermKind, Vec<f64>>,
    pub combined: Vec<(CombinedKind, bool, f64)>,
}

impl Averageable for ReplicateStatistics {
    fn average(items: &[Self]) -> Self {
        let m = items.len() as f64;
        let first = &items[0];
        let terms = first
            .terms
            .keys()
            .map(|k| {
                let cols: Vec<Vec<f64>> = items.iter().map(|it| it.terms[k].clone()).collect();
                (*k, Vec::<f64>::average(&cols))
            })
            .collect();
        let combined = first
            .combined
            .iter()
            .enumerate()
            .map(|(i, &(kind, pairs, _))| {
                (kind, pairs, items.iter().map(|it| it.combined[i].2).sum::<f64>() / m)
            })
            .collect();
        Self { terms, combined }
    }
}

impl ReplicateStatistics {
    pub fn combined_value(&self, kind: CombinedKind, pairs_only: bool) -> Option<f64> {
        self.combined
            .iter()
            .find(|c| c.0 == kind && c.1 == pairs_only)
            .map(|c| c.2)
    }
}

fn score_family(kind: TermKind) -> Option<ScoreFamily> {
    match kind {
        TermKind::Spearman => Some(ScoreFamily::Spearman),
        TermKind::Vdw => Some(ScoreFamily::Vdw),
        TermKind::Savage => Some(ScoreFamily::Savage),
        _ => None,
    }
}

/// Per-term values of the requested kinds for one error matrix.
pub fn term_values(
    errors: &ErrorMatrix,
    family: &SubsetLagFamily,
    kinds: &[TermKind],
) -> Result<BTreeMap<TermKind, Vec<f64>>> {
    if errors.d() != family.d() {
        return Err(invalid(format!(
            "panel has d = {}, family expects {}",
            errors.d(),
            family.d()
        )));
    }
    let terms: Vec<(&[usize], &[i64])> = family.terms().collect();
    let mut out = BTreeMap::new();
    for &kind in kinds {
        let values = match kind {
            TermKind::Cvm => {
                let ranks = CircularRankMatrix::from_errors(errors);
                terms
                    .par_iter()
                    .map(|(a, l)| cvm_statistic(&ranks, a, l))
                    .collect::<Result<Vec<f64>>>()?
            }
            TermKind::CrossCorrelation => CenteredColumns::from_errors(errors)?.family(family)?,
            other => {
                let f = score_family(other).expect("score kind");
                CenteredColumns::scores(errors, f)?.family(family)?
            }
        };
        out.insert(kind, values);
    }
    Ok(out)
}

/// All selected statistics for one randomization.
pub fn replicate_statistics(
    errors: &ErrorMatrix,
    family: &SubsetLagFamily,
    selection: &StatisticSelection,
) -> Result<ReplicateStatistics> {
    let kinds: Vec<TermKind> = selection.term_kinds().into_iter().collect();
    let terms = term_values(errors, family, &kinds)?;
    let n = errors.n();
    let mut tv = TermValues {
        values: terms,
        cvm_p_values: None,
    };
    if let Some(s) = tv.values.get(&TermKind::Cvm) {
        tv.cvm_p_values = Some(
            family
                .terms()
                .zip(s)
                .map(|((a, _), &v)| term_p_value(TermKind::Cvm, a.len(), v, n))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let combined = combined_values(&tv, family, n, selection)?;
    Ok(ReplicateStatistics {
        terms: tv.values,
        combined,
    })
}

/// Averages over the randomizations of `panel` (a single one when `M = 1`).
pub fn averaged_statistics(
    panel: &GeneralizedErrorPanel,
    family: &SubsetLagFamily,
    selection: &StatisticSelection,
) -> Result<ReplicateStatistics> {
    Ok(average_over_randomizations(
        |e: &ErrorMatrix| replicate_statistics(e, family, selection),
        panel,
    )?
    .value)
}

/// Report with per-term and combined statistics and p-values.
pub fn evaluate(
    panel: &GeneralizedErrorPanel,
    family: &SubsetLagFamily,
    selection: &StatisticSelection,
    labels: Option<Vec<String>>,
) -> Result<StatisticReport> {
    let stats = averaged_statistics(panel, family, selection)?;
    build_report(&stats, panel, family, labels)
}

/// Assembles a report from (possibly averaged) statistics.
pub fn build_report(
    stats: &ReplicateStatistics,
    panel: &GeneralizedErrorPanel,
    family: &SubsetLagFamily,
    labels: Option<Vec<String>>,
) -> Result<StatisticReport> {
    let n = panel.n();
    let m = panel.m();
    let mut per_term = Vec::new();
    for (&kind, values) in &stats.terms {
        for ((a, l), &v) in family.terms().zip(values) {
            per_term.push(TermStatistic {
                subset: a.to_vec(),
                lag: l.to_vec(),
                kind,
                value: v,
                p_value: term_p_value(kind, a.len(), v, n)?,
            });
        }
    }
    let full = combined_null_descriptor(family, n, false);
    let pairs = combined_null_descriptor(family, n, true);
    let combined = stats
        .combined
        .iter()
        .map(|&(kind, pairs_only, value)| {
            let (reference, p_value) =
                combined_p_value(kind, value, if pairs_only { &pairs } else { &full })?;
            Ok(CombinedStatistic {
                kind,
                pairs_only,
                value,
                reference,
                p_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    if m > 1 {
        warnings.push(format!(
            "statistics averaged over M = {m} randomizations are not distribution-free; \
             asymptotic p-values and critical values are approximate (use simulation quantiles)"
        ));
    }
    let uses_savage = stats.combined.iter().any(|c| c.0 == CombinedKind::HE);
    if uses_savage && family.d() == 3 && n < 500 {
        warnings.push(format!(
            "H_E converges slowly for d = 3; with n = {n} < 500 its level may be inflated"
        ));
    }
    let d = family.d();
    Ok(StatisticReport {
        schema_version: REPORT_SCHEMA_VERSION,
        metadata: ReportMetadata {
            n,
            d,
            pair_max_lag: family.pair_max_lag(),
            triple_max_lag: family.triple_max_lag(),
            include_triples: family.has_triples(),
            randomizations: m,
            seed: panel.source_seed(),
            distribution_free: m == 1,
            labels: labels.unwrap_or_else(|| (1..=d).map(|j| format!("X{j}")).collect()),
        },
        per_term,
        combined,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_subset_lag_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_panel(n: usize, d: usize, m: usize, seed: u64) -> GeneralizedErrorPanel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reps = (0..m)
            .map(|_| {
                ErrorMatrix::new((0..d).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect())
                    .unwrap()
            })
            .collect();
        GeneralizedErrorPanel::new(reps, seed).unwrap()
    }

    #[test]
    fn report_shape_and_ranges() {
        let panel = uniform_panel(80, 3, 1, 5);
        let fam = build_subset_lag_family(3, 2, 1, true).unwrap();
        let rep = evaluate(&panel, &fam, &StatisticSelection::default(), None).unwrap();
        assert_eq!(rep.per_term.len(), 5 * fam.term_count());
        assert_eq!(rep.combined.len(), 12);
        assert!(rep.per_term.iter().all(|t| (0.0..=1.0).contains(&t.p_value)));
        assert!(rep.combined.iter().all(|c| (0.0..=1.0).contains(&c.p_value)));
        assert!(rep.warnings.iter().any(|w| w.contains("H_E")));
        assert!(rep.combined_by_label("W_2").is_some());
    }

    #[test]
    fn single_replicate_average_is_identity() {
        let panel = uniform_panel(40, 2, 1, 8);
        let fam = build_subset_lag_family(2, 2, 0, true).unwrap();
        let sel = StatisticSelection::default();
        let a = averaged_statistics(&panel, &fam, &sel).unwrap();
        let b = replicate_statistics(panel.errors(), &fam, &sel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn averaging_flags_non_distribution_free() {
        let panel = uniform_panel(40, 2, 3, 9);
        let fam = build_subset_lag_family(2, 1, 0, true).unwrap();
        let sel = StatisticSelection::default();
        let rep = evaluate(&panel, &fam, &sel, None).unwrap();
        assert!(!rep.metadata.distribution_free);
        assert!(!rep.warnings.is_empty());
        let each: Vec<ReplicateStatistics> = (0..3)
            .map(|k| replicate_statistics(panel.replicate(k), &fam, &sel).unwrap())
            .collect();
        let f_mean = each.iter().map(|s| s.combined_value(CombinedKind::F, false).unwrap()).sum::<f64>() / 3.0;
        let avg = averaged_statistics(&panel, &fam, &sel).unwrap();
        assert!((avg.combined_value(CombinedKind::F, false).unwrap() - f_mean).abs() < 1e-12);
    }
}
