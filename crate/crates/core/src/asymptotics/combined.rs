//! Combined statistics `W`, `F`, `H`, `H_K` and their null references.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{bias_term, chi_square_sf, edgeworth_tail, xi_cumulants, xi_tail_probability};
use crate::domain::SubsetLagFamily;
use crate::error::{Error, Result};
use crate::report::{
    CombinedKind, CombinedStatistic, NullReference, StatisticSelection, TermKind,
};
use crate::special::normal_cdf;

/// Smallest per-term p-value entering `log p`.
pub const P_VALUE_FLOOR: f64 = 1e-300;

/// Per-term values aligned with `family.terms()`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermValues {
    pub values: BTreeMap<TermKind, Vec<f64>>,
    /// `P(ξ_{|A|} > S_{n,A,ℓ})` for each term.
    pub cvm_p_values: Option<Vec<f64>>,
}

/// Contribution of the subsets of one cardinality to `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBlock {
    pub cardinality: usize,
    /// `π^{2(|A|-2)}`.
    pub weight: f64,
    /// `B(n, |A|)`.
    pub centering: f64,
    /// Number of terms `Σ_{|A| = k} |D_A|`.
    pub terms: usize,
}

/// Null references of the combined statistics for a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedNullDescriptor {
    pub n: usize,
    pub pairs_only: bool,
    /// `Σ_A |D_A|` over the subsets included.
    pub term_count: usize,
    /// Degrees of freedom of `F`: `2 Σ_A |D_A|`.
    pub f_df: usize,
    /// Degrees of freedom of `H` and `H_K`: `Σ_A |D_A|`.
    pub h_df: usize,
    pub w_blocks: Vec<WeightBlock>,
    /// Cumulants `κ_1..κ_6` of the limit of `W`.
    pub w_cumulants: [f64; 6],
}

fn included(subset: &[usize], pairs_only: bool) -> bool {
    !pairs_only || subset.len() == 2
}

pub fn combined_null_descriptor(
    family: &SubsetLagFamily,
    n: usize,
    pairs_only: bool,
) -> CombinedNullDescriptor {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for e in family.entries() {
        if included(&e.subset, pairs_only) {
            *counts.entry(e.subset.len()).or_default() += e.lags.len();
        }
    }
    let mut w_cumulants = [0.0; 6];
    let mut w_blocks = Vec::new();
    for (&k, &terms) in &counts {
        let weight = PI.powi(2 * (k as i32 - 2));
        let kappa = xi_cumulants(k);
        for r in 0..6 {
            w_cumulants[r] += weight.powi(r as i32 + 1) * terms as f64 * kappa[r];
        }
        w_blocks.push(WeightBlock {
            cardinality: k,
            weight,
            centering: bias_term(n, k),
            terms,
        });
    }
    let term_count: usize = counts.values().sum();
    CombinedNullDescriptor {
        n,
        pairs_only,
        term_count,
        f_df: 2 * term_count,
        h_df: term_count,
        w_blocks,
        w_cumulants,
    }
}

/// Two-sided normal p-value of `√n·r` for correlation-type terms, or the
/// `ξ_{|A|}` tail for Cramér–von Mises terms.
pub fn term_p_value(kind: TermKind, subset_len: usize, value: f64, n: usize) -> Result<f64> {
    match kind {
        TermKind::Cvm => xi_tail_probability(subset_len, value.max(0.0)),
        _ => {
            let z = (n as f64).sqrt() * value.abs();
            Ok((2.0 * (1.0 - normal_cdf(z))).clamp(0.0, 1.0))
        }
    }
}

fn require<'a>(
    terms: &'a TermValues,
    kind: TermKind,
    family: &SubsetLagFamily,
) -> Result<&'a [f64]> {
    let have = terms.values.get(&kind).map(|v| v.as_slice()).unwrap_or(&[]);
    if have.len() < family.term_count() {
        let (a, l) = family
            .terms()
            .nth(have.len())
            .expect("index below term count");
        return Err(Error::MissingTerm {
            subset: a.to_vec(),
            lag: l.to_vec(),
        });
    }
    Ok(have)
}

/// Values of the selected combined statistics, in the order
/// `(kind, pairs_only)` of the selection (full family first, then pair
/// restrictions when the family contains triples).
pub fn combined_values(
    terms: &TermValues,
    family: &SubsetLagFamily,
    n: usize,
    selection: &StatisticSelection,
) -> Result<Vec<(CombinedKind, bool, f64)>> {
    let mut variants = vec![false];
    if selection.pair_variants && family.has_triples() {
        variants.push(true);
    }
    let mut out = Vec::new();
    for &pairs_only in &variants {
        let descriptor = combined_null_descriptor(family, n, pairs_only);
        for &kind in &selection.combined {
            let values = require(terms, kind.term_kind(), family)?;
            let mut total = 0.0;
            match kind {
                CombinedKind::W => {
                    for ((a, _), &s) in family.terms().zip(values) {
                        if included(a, pairs_only) {
                            let block = descriptor
                                .w_blocks
                                .iter()
                                .find(|b| b.cardinality == a.len())
                                .expect("block for every cardinality");
                            total += block.weight * (s - block.centering);
                        }
                    }
                }
                CombinedKind::F => {
                    let ps = match &terms.cvm_p_values {
                        Some(p) if p.len() >= family.term_count() => p.clone(),
                        _ => family
                            .terms()
                            .zip(values)
                            .map(|((a, _), &s)| term_p_value(TermKind::Cvm, a.len(), s, n))
                            .collect::<Result<Vec<f64>>>()?,
                    };
                    for ((a, _), &p) in family.terms().zip(&ps) {
                        if included(a, pairs_only) {
                            total += -2.0 * p.max(P_VALUE_FLOOR).ln();
                        }
                    }
                }
                _ => {
                    for ((a, _), &r) in family.terms().zip(values) {
                        if included(a, pairs_only) {
                            total += r * r;
                        }
                    }
                    total *= n as f64;
                }
            }
            out.push((kind, pairs_only, total));
        }
    }
    Ok(out)
}

/// Reference law and p-value of a combined statistic.
pub fn combined_p_value(
    kind: CombinedKind,
    value: f64,
    descriptor: &CombinedNullDescriptor,
) -> Result<(NullReference, f64)> {
    Ok(match kind {
        CombinedKind::W => {
            // W - Σ w|D_A|B(n,|A|) centering leaves the limit mean κ_1
            let k = descriptor.w_cumulants;
            (
                NullReference::Edgeworth { cumulants: k },
                edgeworth_tail(value, &k),
            )
        }
        CombinedKind::F => (
            NullReference::ChiSquare {
                df: descriptor.f_df,
            },
            chi_square_sf(descriptor.f_df, value)?,
        ),
        _ => (
            NullReference::ChiSquare {
                df: descriptor.h_df,
            },
            chi_square_sf(descriptor.h_df, value)?,
        ),
    })
}

/// Combined statistics with their references and p-values.
pub fn combined_statistics(
    terms: &TermValues,
    family: &SubsetLagFamily,
    n: usize,
    selection: &StatisticSelection,
) -> Result<Vec<CombinedStatistic>> {
    let values = combined_values(terms, family, n, selection)?;
    let full = combined_null_descriptor(family, n, false);
    let pairs = combined_null_descriptor(family, n, true);
    values
        .into_iter()
        .map(|(kind, pairs_only, value)| {
            let descriptor = if pairs_only { &pairs } else { &full };
            let (reference, p_value) = combined_p_value(kind, value, descriptor)?;
            Ok(CombinedStatistic {
                kind,
                pairs_only,
                value,
                reference,
                p_value,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_subset_lag_family;

    #[test]
    fn degrees_of_freedom() {
        let f2 = build_subset_lag_family(2, 5, 2, true).unwrap();
        let d2 = combined_null_descriptor(&f2, 300, false);
        assert_eq!((d2.h_df, d2.f_df), (11, 22));
        let f3 = build_subset_lag_family(3, 5, 2, true).unwrap();
        let d3 = combined_null_descriptor(&f3, 300, false);
        assert_eq!((d3.h_df, d3.f_df), (58, 116));
        let p3 = combined_null_descriptor(&f3, 300, true);
        assert_eq!((p3.h_df, p3.f_df), (33, 66));
    }

    #[test]
    fn unit_p_values_give_zero_f() {
        let fam = build_subset_lag_family(2, 5, 0, true).unwrap();
        let mut tv = TermValues::default();
        tv.values.insert(TermKind::Cvm, vec![0.0; 11]);
        tv.cvm_p_values = Some(vec![1.0; 11]);
        let out = combined_statistics(&tv, &fam, 100, &StatisticSelection::only(&[CombinedKind::F])).unwrap();
        assert_eq!(out[0].value, 0.0);
        assert_eq!(out[0].p_value, 1.0);
        assert_eq!(out[0].reference, NullReference::ChiSquare { df: 22 });
    }

    #[test]
    fn zero_p_value_is_clipped() {
        let fam = build_subset_lag_family(2, 0, 0, true).unwrap();
        let mut tv = TermValues::default();
        tv.values.insert(TermKind::Cvm, vec![5.0]);
        tv.cvm_p_values = Some(vec![0.0]);
        let out = combined_statistics(&tv, &fam, 100, &StatisticSelection::only(&[CombinedKind::F])).unwrap();
        assert!((out[0].value - 2.0 * 300.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn missing_term_is_reported() {
        let fam = build_subset_lag_family(2, 1, 0, true).unwrap();
        let mut tv = TermValues::default();
        tv.values.insert(TermKind::CrossCorrelation, vec![0.1]);
        let err = combined_statistics(&tv, &fam, 100, &StatisticSelection::only(&[CombinedKind::H])).unwrap_err();
        assert_eq!(
            err,
            Error::MissingTerm {
                subset: vec![0, 1],
                lag: vec![0, 0]
            }
        );
    }

    #[test]
    fn w_matches_definition() {
        let fam = build_subset_lag_family(3, 1, 1, true).unwrap();
        let values: Vec<f64> = (0..fam.term_count()).map(|i| 0.01 * i as f64).collect();
        let mut tv = TermValues::default();
        tv.values.insert(TermKind::Cvm, values.clone());
        let out = combined_values(&tv, &fam, 50, &StatisticSelection::only(&[CombinedKind::W])).unwrap();
        let mut expected = 0.0;
        let mut pairs = 0.0;
        for ((a, _), s) in fam.terms().zip(&values) {
            let w = PI.powi(2 * (a.len() as i32 - 2));
            expected += w * (s - bias_term(50, a.len()));
            if a.len() == 2 {
                pairs += s - bias_term(50, 2);
            }
        }
        assert_eq!(out.len(), 2);
        assert!((out[0].2 - expected).abs() < 1e-12);
        assert!(out[1].1 && (out[1].2 - pairs).abs() < 1e-12);
    }
}
