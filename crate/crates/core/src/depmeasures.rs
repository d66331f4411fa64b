//! Generalized cross-correlations and copula-based dependence coefficients
//! (Spearman, van der Waerden, Savage) with tie-aware scores.

use serde::{Deserialize, Serialize};

use crate::domain::{ErrorMatrix, SubsetLagFamily};
use crate::error::{invalid, Error, Result};
use crate::special::{normal_pdf, normal_quantile};

/// Score-generating margin `K` of a dependence coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreFamily {
    /// `K` uniform: `ℒ(u) = u²/2`, `μ = 1/2`.
    Spearman,
    /// `K = Φ`: `ℒ = -φ∘Φ^{-1}`, `μ = 0`.
    Vdw,
    /// `K(x) = e^x` on `x <= 0`: `ℒ(u) = u log u - u`, `μ = -1`.
    Savage,
    /// `K^{-1}(u) = log(1 - u)`: `ℒ(u) = -(1-u) log(1-u) - u`, `μ = -1`.
    SavageClassical,
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

impl ScoreFamily {
    pub const ALL: [ScoreFamily; 4] = [
        ScoreFamily::Spearman,
        ScoreFamily::Vdw,
        ScoreFamily::Savage,
        ScoreFamily::SavageClassical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScoreFamily::Spearman => "spearman",
            ScoreFamily::Vdw => "vdw",
            ScoreFamily::Savage => "savage",
            ScoreFamily::SavageClassical => "savage_classical",
        }
    }

    /// `K^{-1}(u)`.
    pub fn quantile(self, u: f64) -> f64 {
        match self {
            ScoreFamily::Spearman => u,
            ScoreFamily::Vdw => normal_quantile(u),
            ScoreFamily::Savage => u.ln(),
            ScoreFamily::SavageClassical => (-u).ln_1p(),
        }
    }

    /// `ℒ(u) = ∫_0^u K^{-1}(v) dv`.
    pub fn integral(self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            ScoreFamily::Spearman => 0.5 * u * u,
            ScoreFamily::Vdw => {
                if u <= 0.0 || u >= 1.0 {
                    0.0
                } else {
                    -normal_pdf(normal_quantile(u))
                }
            }
            ScoreFamily::Savage => xlogx(u) - u,
            ScoreFamily::SavageClassical => -xlogx(1.0 - u) - u,
        }
    }

    /// Mean `μ = ℒ(1)` of `K`.
    pub fn mean(self) -> f64 {
        match self {
            ScoreFamily::Spearman => 0.5,
            ScoreFamily::Vdw => 0.0,
            ScoreFamily::Savage | ScoreFamily::SavageClassical => -1.0,
        }
    }

    /// Variance `σ²` of `K`.
    pub fn variance(self) -> f64 {
        match self {
            ScoreFamily::Spearman => 1.0 / 12.0,
            _ => 1.0,
        }
    }

    /// Score `𝒦_{F_n}(e)` for each observation of `column`, using the
    /// quotient `[ℒ(F_n(e)) - ℒ(F_n(e-))]/Δ_{F_n}(e)`. For an empirical cdf
    /// every observation is an atom, so the quotient applies throughout.
    pub fn scores(self, column: &[f64]) -> Vec<f64> {
        let n = column.len();
        let nf = n as f64;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
        let mut out = vec![0.0; n];
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && column[order[end]] == column[order[start]] {
                end += 1;
            }
            let lo = start as f64 / nf;
            let hi = end as f64 / nf;
            let score = (self.integral(hi) - self.integral(lo)) / (hi - lo);
            for &t in &order[start..end] {
                out[t] = score;
            }
            start = end;
        }
        out
    }
}

/// Centered columns with their root-mean-square scale.
#[derive(Debug, Clone)]
pub struct CenteredColumns {
    columns: Vec<Vec<f64>>,
    scales: Vec<f64>,
}

impl CenteredColumns {
    /// Centers each column at `centers[j]`.
    pub fn new(columns: Vec<Vec<f64>>, centers: &[f64]) -> Result<Self> {
        let mut out = Vec::with_capacity(columns.len());
        let mut scales = Vec::with_capacity(columns.len());
        for (j, (mut col, c)) in columns.into_iter().zip(centers).enumerate() {
            let n = col.len() as f64;
            for v in col.iter_mut() {
                *v -= c;
            }
            let s = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
            if !(s > 1e-300) {
                return Err(Error::Data(format!("column {j} has zero variance")));
            }
            out.push(col);
            scales.push(s);
        }
        Ok(Self {
            columns: out,
            scales,
        })
    }

    /// Generalized errors centered at their sample means.
    pub fn from_errors(errors: &ErrorMatrix) -> Result<Self> {
        let means: Vec<f64> = errors
            .columns()
            .iter()
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        Self::new(errors.columns().to_vec(), &means)
    }

    /// Scores of each column centered at `μ`.
    pub fn scores(errors: &ErrorMatrix, family: ScoreFamily) -> Result<Self> {
        let cols: Vec<Vec<f64>> = errors.columns().iter().map(|c| family.scores(c)).collect();
        let centers = vec![family.mean(); cols.len()];
        Self::new(cols, &centers)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// `n^{-1} Σ_t Π_{j∈A} c_{j,t+ℓ_j} / Π_{j∈A} s_j`.
    pub fn correlation(&self, subset: &[usize], lag: &[i64]) -> Result<f64> {
        let d = self.columns.len();
        if subset.len() < 2 || subset.iter().any(|&j| j >= d) || lag.len() != d {
            return Err(invalid(format!("invalid term {subset:?} / {lag:?} for d = {d}")));
        }
        let n = self.columns[0].len();
        let ni = n as i64;
        let offsets: Vec<usize> = subset.iter().map(|&j| lag[j].rem_euclid(ni) as usize).collect();
        let mut total = 0.0;
        for t in 0..n {
            let mut prod = 1.0;
            for (c, &j) in subset.iter().enumerate() {
                let mut idx = t + offsets[c];
                if idx >= n {
                    idx -= n;
                }
                prod *= self.columns[j][idx];
            }
            total += prod;
        }
        let scale: f64 = subset.iter().map(|&j| self.scales[j]).product();
        Ok(total / n as f64 / scale)
    }

    pub fn family(&self, family: &SubsetLagFamily) -> Result<Vec<f64>> {
        family.terms().map(|(a, l)| self.correlation(a, l)).collect()
    }
}

/// Cross-correlation `r̂_{A,ℓ}` and its normalized value `√n·r̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCorrelation {
    pub r: f64,
    pub z: f64,
}

/// `r̂_{A,ℓ} = n^{-1} Σ_t Π_{j∈A}(e_{j,t+ℓ_j} - ē_j) / Π_{j∈A} s_j`.
pub fn generalized_cross_correlation(
    errors: &ErrorMatrix,
    subset: &[usize],
    lag: &[i64],
) -> Result<CrossCorrelation> {
    let r = CenteredColumns::from_errors(errors)?.correlation(subset, lag)?;
    Ok(CrossCorrelation {
        r,
        z: (errors.n() as f64).sqrt() * r,
    })
}

/// `γ_{K,n,A,ℓ} / Π_{j∈A} s_{K,F_{nj}}` with scores from `family`.
pub fn dependence_coefficient(
    errors: &ErrorMatrix,
    subset: &[usize],
    lag: &[i64],
    family: ScoreFamily,
) -> Result<f64> {
    CenteredColumns::scores(errors, family)?.correlation(subset, lag)
}
