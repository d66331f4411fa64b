//! Report structures shared by the library and the CLI.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Statistic computed for every `(A, ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// Cramér–von Mises statistic `S_{n,A,ℓ}`.
    Cvm,
    /// Generalized cross-correlation `r̂_{A,ℓ}`.
    CrossCorrelation,
    Spearman,
    Vdw,
    Savage,
}

impl TermKind {
    pub const ALL: [TermKind; 5] = [
        TermKind::Cvm,
        TermKind::CrossCorrelation,
        TermKind::Spearman,
        TermKind::Vdw,
        TermKind::Savage,
    ];
}

/// Combined statistic aggregating all terms of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CombinedKind {
    W,
    F,
    H,
    #[serde(rename = "H_S")]
    HS,
    #[serde(rename = "H_G")]
    HG,
    #[serde(rename = "H_E")]
    HE,
}

impl CombinedKind {
    pub const ALL: [CombinedKind; 6] = [
        CombinedKind::W,
        CombinedKind::F,
        CombinedKind::H,
        CombinedKind::HS,
        CombinedKind::HG,
        CombinedKind::HE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CombinedKind::W => "W",
            CombinedKind::F => "F",
            CombinedKind::H => "H",
            CombinedKind::HS => "H_S",
            CombinedKind::HG => "H_G",
            CombinedKind::HE => "H_E",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.name().replace('_', "").eq_ignore_ascii_case(s))
    }

    /// Per-term statistic the combination is built from.
    pub fn term_kind(self) -> TermKind {
        match self {
            CombinedKind::W | CombinedKind::F => TermKind::Cvm,
            CombinedKind::H => TermKind::CrossCorrelation,
            CombinedKind::HS => TermKind::Spearman,
            CombinedKind::HG => TermKind::Vdw,
            CombinedKind::HE => TermKind::Savage,
        }
    }
}

/// Which combined statistics to compute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatisticSelection {
    pub combined: BTreeSet<CombinedKind>,
    /// Also report versions restricted to pairs `|A| = 2` when the family
    /// contains triples.
    pub pair_variants: bool,
}

impl Default for StatisticSelection {
    fn default() -> Self {
        Self {
            combined: CombinedKind::ALL.into_iter().collect(),
            pair_variants: true,
        }
    }
}

impl StatisticSelection {
    pub fn only(kinds: &[CombinedKind]) -> Self {
        Self {
            combined: kinds.iter().copied().collect(),
            pair_variants: true,
        }
    }

    /// Per-term statistics needed by the selection.
    pub fn term_kinds(&self) -> BTreeSet<TermKind> {
        self.combined.iter().map(|k| k.term_kind()).collect()
    }
}

/// Reference distribution used for a p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullReference {
    /// Limit law `ξ_{|A|}` of a single Cramér–von Mises term.
    Xi { cardinality: usize },
    /// Standard normal, two-sided, applied to `√n·value`.
    StandardNormal,
    ChiSquare { df: usize },
    /// Edgeworth expansion with the given cumulants `κ_1..κ_6`.
    Edgeworth { cumulants: [f64; 6] },
}

/// One `(A, ℓ)` entry of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermStatistic {
    /// 0-based sorted subset.
    pub subset: Vec<usize>,
    pub lag: Vec<i64>,
    pub kind: TermKind,
    pub value: f64,
    pub p_value: f64,
}

/// One combined statistic of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedStatistic {
    pub kind: CombinedKind,
    /// Restricted to subsets with `|A| = 2`.
    pub pairs_only: bool,
    pub value: f64,
    pub reference: NullReference,
    pub p_value: f64,
}

impl CombinedStatistic {
    /// `W`, `F`, ... or `W_2`, `F_2`, ... for pair-restricted versions.
    pub fn label(&self) -> String {
        if self.pairs_only {
            format!("{}_2", self.kind.name())
        } else {
            self.kind.name().to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n: usize,
    pub d: usize,
    pub pair_max_lag: u32,
    pub triple_max_lag: u32,
    pub include_triples: bool,
    /// Number of randomizations averaged.
    pub randomizations: usize,
    pub seed: u64,
    /// False when statistics are averaged over several randomizations and
    /// the reported p-values are only approximate.
    pub distribution_free: bool,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticReport {
    pub schema_version: u32,
    pub metadata: ReportMetadata,
    pub per_term: Vec<TermStatistic>,
    pub combined: Vec<CombinedStatistic>,
    pub warnings: Vec<String>,
}

impl StatisticReport {
    pub fn combined_by_label(&self, label: &str) -> Option<&CombinedStatistic> {
        self.combined.iter().find(|c| c.label() == label)
    }

    pub fn terms_of_kind(&self, kind: TermKind) -> impl Iterator<Item = &TermStatistic> {
        self.per_term.iter().filter(move |t| t.kind == kind)
    }

    /// Smallest combined p-value.
    pub fn min_combined_p_value(&self) -> Option<f64> {
        self.combined.iter().map(|c| c.p_value).reduce(f64::min)
    }
}
