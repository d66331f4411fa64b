//! Univariate dynamic models exposing one-step conditional laws: the
//! AR(p)Z-Gaussian HMM (optionally zero-inflated), the AR(p)Z-Poisson HMM
//! and INGARCH(p, q).

mod gaussian_hmm;
pub mod hmm;
mod ingarch;
mod poisson_hmm;

pub use gaussian_hmm::{fit_gaussian_hmm, GaussianHmmFitOptions, GaussianHmmSpec};
pub use ingarch::{fit_ingarch, IngarchSpec};
pub use poisson_hmm::{fit_poisson_hmm, PoissonHmmSpec};

use serde::{Deserialize, Serialize};

use crate::distribution::{ConditionalDistribution, ConditionalDistributionTrace, ConditionalLaw};
use crate::domain::SeriesPanel;
use crate::error::{invalid, Error, Result};

/// Covariate rows `Z_t`, one per time point, first column ≡ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    rows: Vec<Vec<f64>>,
}

impl Covariates {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map(|r| r.len()).unwrap_or(0);
        if k == 0 {
            return Err(invalid("covariates need at least the intercept column"));
        }
        for (t, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(invalid(format!("covariate row {t} has {} columns, expected {k}", r.len())));
            }
            if r[0] != 1.0 {
                return Err(invalid(format!("first covariate column must be 1 (row {t})")));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("non-finite covariate at row {t}")));
            }
        }
        Ok(Self { rows })
    }

    /// Intercept only.
    pub fn intercept(n: usize) -> Self {
        Self { rows: vec![vec![1.0]; n] }
    }

    /// Intercept followed by the given columns.
    pub fn with_intercept(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map(|c| c.len()).unwrap_or(0);
        if columns.iter().any(|c| c.len() != n) {
            return Err(invalid("covariate columns differ in length"));
        }
        Self::new(
            (0..n)
                .map(|t| std::iter::once(1.0).chain(columns.iter().map(|c| c[t])).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.rows[t]
    }

    fn check(&self, n: usize, width: usize) -> Result<()> {
        if self.n() != n {
            return Err(invalid(format!(
                "covariates have {} rows but the series has {n} observations",
                self.n()
            )));
        }
        if self.width() != width {
            return Err(invalid(format!(
                "model expects {width} covariate columns, got {}",
                self.width()
            )));
        }
        Ok(())
    }
}

/// Diagnostics of a likelihood fit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Observed-data log-likelihood after each iteration (EM fits).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_likelihood_trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Streaming one-step-ahead laws: `law()` is the law of `X_t` given the
/// past, `observe(x_t)` moves to `t + 1`.
pub trait SequentialFilter {
    fn law(&self) -> Result<ConditionalLaw>;
    fn observe(&mut self, x: f64) -> Result<()>;
}

/// A fitted or user-supplied model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    GaussianHmm(GaussianHmmSpec),
    PoissonHmm(PoissonHmmSpec),
    Ingarch(IngarchSpec),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::GaussianHmm(s) => s.validate(),
            ModelSpec::PoissonHmm(s) => s.validate(),
            ModelSpec::Ingarch(s) => s.validate(),
        }
    }

    /// Number of covariate columns (including the intercept) the model uses.
    pub fn covariate_width(&self) -> usize {
        match self {
            ModelSpec::GaussianHmm(s) => s.covariate_width(),
            ModelSpec::PoissonHmm(s) => s.covariate_width(),
            ModelSpec::Ingarch(_) => 1,
        }
    }

    /// Filter started with pre-sample values `presample` for lagged
    /// observations.
    pub fn filter(&self, covariates: Covariates, presample: f64) -> Result<Box<dyn SequentialFilter + '_>> {
        self.validate()?;
        Ok(match self {
            ModelSpec::GaussianHmm(s) => Box::new(s.filter(covariates, presample)?),
            ModelSpec::PoissonHmm(s) => Box::new(s.filter(covariates, presample)?),
            ModelSpec::Ingarch(s) => Box::new(s.filter()),
        })
    }

    /// One-step conditional laws `G_t` along an observed series. Lagged
    /// values before the sample are set to the series mean.
    pub fn conditional_trace(&self, series: &[f64], covariates: Option<&Covariates>) -> Result<Vec<ConditionalLaw>> {
        if series.is_empty() {
            return Err(invalid("empty series"));
        }
        let cov = match covariates {
            Some(c) => {
                c.check(series.len(), self.covariate_width())?;
                c.clone()
            }
            None if self.covariate_width() == 1 => Covariates::intercept(series.len()),
            None => {
                return Err(invalid(format!(
                    "model expects {} covariate columns but none were given",
                    self.covariate_width()
                )))
            }
        };
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let mut filter = self.filter(cov, mean)?;
        let mut out = Vec::with_capacity(series.len());
        for (t, &x) in series.iter().enumerate() {
            let law = filter.law().map_err(|e| at(e, t))?;
            out.push(law);
            filter.observe(x).map_err(|e| at(e, t))?;
        }
        Ok(out)
    }

    /// Simulates `X_t = G_t^{-1}(u_t)` for driving uniforms `u`, returning
    /// the series and its conditional laws. Lagged values before the sample
    /// are `presample`.
    pub fn simulate(
        &self,
        uniforms: &[f64],
        covariates: Option<&Covariates>,
        presample: f64,
    ) -> Result<(Vec<f64>, Vec<ConditionalLaw>)> {
        let cov = match covariates {
            Some(c) => {
                c.check(uniforms.len(), self.covariate_width())?;
                c.clone()
            }
            None => Covariates::intercept(uniforms.len()),
        };
        if cov.width() != self.covariate_width() {
            return Err(invalid("simulation needs covariates matching the model"));
        }
        let mut filter = self.filter(cov, presample)?;
        let mut xs = Vec::with_capacity(uniforms.len());
        let mut laws = Vec::with_capacity(uniforms.len());
        for (t, &u) in uniforms.iter().enumerate() {
            let law = filter.law().map_err(|e| at(e, t))?;
            let x = law.quantile(u);
            filter.observe(x).map_err(|e| at(e, t))?;
            xs.push(x);
            laws.push(law);
        }
        Ok((xs, laws))
    }
}

fn at(e: Error, t: usize) -> Error {
    match e {
        Error::ModelEvaluation { .. } => e,
        other => Error::ModelEvaluation {
            t,
            series: 0,
            message: other.to_string(),
        },
    }
}

/// Conditional-law trace of a panel, one model per column.
pub fn conditional_trace(
    specs: &[ModelSpec],
    panel: &SeriesPanel,
    covariates: Option<&[Option<Covariates>]>,
) -> Result<ConditionalDistributionTrace> {
    if specs.len() != panel.d() {
        return Err(invalid(format!(
            "{} models given for {} series",
            specs.len(),
            panel.d()
        )));
    }
    let parts = specs
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let cov = covariates.and_then(|c| c.get(j)).and_then(|c| c.as_ref());
            spec.conditional_trace(panel.column(j), cov).map_err(|e| match e {
                Error::ModelEvaluation { t, message, .. } => Error::ModelEvaluation { t, series: j, message },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ConditionalDistributionTrace::from_series(parts)
}

/// Design row `(x_{t-1}, …, x_{t-p}, z_t)` with pre-sample values filled in.
pub(crate) fn design_row(history: &[f64], p: usize, presample: f64, z: &[f64]) -> Vec<f64> {
    let n = history.len();
    let mut row = Vec::with_capacity(p + z.len());
    for i in 1..=p {
        row.push(if n >= i { history[n - i] } else { presample });
    }
    row.extend_from_slice(z);
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariates_require_intercept() {
        assert!(Covariates::new(vec![vec![2.0, 1.0]]).is_err());
        let c = Covariates::with_intercept(&[vec![0.5, 0.7]]).unwrap();
        assert_eq!(c.row(1), &[1.0, 0.7]);
        assert_eq!(c.width(), 2);
    }

    #[test]
    fn design_uses_presample() {
        assert_eq!(design_row(&[3.0], 2, 9.0, &[1.0]), vec![3.0, 9.0, 1.0]);
        assert_eq!(design_row(&[1.0, 2.0, 3.0], 2, 9.0, &[1.0]), vec![3.0, 2.0, 1.0]);
    }
}
