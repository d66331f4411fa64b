//! AR(p)Z-Poisson hidden Markov model.

use serde::{Deserialize, Serialize};

use super::hmm::{propagate, run_em, stationary_distribution, validate_transition, ChainState};
use super::{design_row, Covariates, FitSummary, SequentialFilter};
use crate::distribution::ConditionalLaw;
use crate::error::{invalid, Error, Result};
use crate::special::poisson_pmf;

/// `X_t | F_{t-1}, τ_t = j ~ Poisson(μ_{t,j})` with
/// `μ_{t,j} = Σ_i φ_{i,j} X_{t-i} + θ_j'Z_t`, all terms non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonHmmSpec {
    #[serde(rename = "J")]
    pub j: usize,
    pub p: usize,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
}

impl PoissonHmmSpec {
    pub fn covariate_width(&self) -> usize {
        self.theta.first().map(|t| t.len()).unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.j;
        if j == 0 {
            return Err(invalid("J must be positive"));
        }
        if self.phi.len() != j || self.phi.iter().any(|r| r.len() != self.p) {
            return Err(invalid(format!("phi must be {j} rows of length p = {}", self.p)));
        }
        let k = self.covariate_width();
        if k == 0 || self.theta.len() != j || self.theta.iter().any(|r| r.len() != k) {
            return Err(invalid("theta must have J rows of equal, positive length"));
        }
        if self.phi.iter().chain(&self.theta).flatten().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("Poisson HMM coefficients must be finite and non-negative"));
        }
        validate_transition(&self.q, j)?;
        if let Some(init) = &self.initial {
            if init.len() != j || (init.iter().sum::<f64>() - 1.0).abs() > 1e-8 {
                return Err(invalid("initial regime law must be a probability vector of length J"));
            }
        }
        Ok(())
    }

    fn mean(&self, regime: usize, row: &[f64]) -> f64 {
        self.phi[regime]
            .iter()
            .chain(&self.theta[regime])
            .zip(row)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub(crate) fn filter(&self, covariates: Covariates, presample: f64) -> Result<PoissonHmmFilter<'_>> {
        if covariates.width() != self.covariate_width() {
            return Err(invalid("covariate width does not match the model"));
        }
        Ok(PoissonHmmFilter {
            spec: self,
            covariates,
            presample,
            history: Vec::new(),
            predictive: self.initial.clone().unwrap_or_else(|| stationary_distribution(&self.q)),
        })
    }
}

pub(crate) struct PoissonHmmFilter<'a> {
    spec: &'a PoissonHmmSpec,
    covariates: Covariates,
    presample: f64,
    history: Vec<f64>,
    predictive: Vec<f64>,
}

impl PoissonHmmFilter<'_> {
    fn means(&self) -> Result<Vec<f64>> {
        let t = self.history.len();
        if t >= self.covariates.n() {
            return Err(invalid(format!("no covariates for t = {t}")));
        }
        let row = design_row(&self.history, self.spec.p, self.presample, self.covariates.row(t));
        let means: Vec<f64> = (0..self.spec.j).map(|r| self.spec.mean(r, &row)).collect();
        if means.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::ModelEvaluation {
                t,
                series: 0,
                message: "Poisson mean is not positive".into(),
            });
        }
        Ok(means)
    }
}

impl SequentialFilter for PoissonHmmFilter<'_> {
    fn law(&self) -> Result<ConditionalLaw> {
        let components = self
            .means()?
            .into_iter()
            .map(|lambda| crate::distribution::Component::Poisson { lambda })
            .collect();
        ConditionalLaw::new(self.predictive.clone(), components)
    }

    fn observe(&mut self, x: f64) -> Result<()> {
        let means = self.means()?;
        let mut f: Vec<f64> = self
            .predictive
            .iter()
            .zip(&means)
            .map(|(w, m)| w * poisson_pmf(x, *m))
            .collect();
        let c: f64 = f.iter().sum();
        if !(c > 0.0) {
            return Err(Error::Data(format!("observation {x} has zero likelihood under every regime")));
        }
        f.iter_mut().for_each(|v| *v /= c);
        self.predictive = propagate(&f, &self.spec.q);
        self.history.push(x);
        Ok(())
    }
}

fn check_counts(series: &[f64]) -> Result<()> {
    if series.iter().any(|x| !(*x >= 0.0) || x.fract() != 0.0 || !x.is_finite()) {
        return Err(Error::Data("count models need non-negative integer observations".into()));
    }
    Ok(())
}

/// EM fit with multiplicative (ML-EM) updates of the non-negative
/// coefficients. Lagged values before the sample are the series mean.
/// Initial intercepts are spread around the sample mean.
pub fn fit_poisson_hmm(
    series: &[f64],
    covariates: Option<&Covariates>,
    regimes: usize,
    p: usize,
    tolerance: f64,
    max_iterations: usize,
) -> Result<PoissonHmmSpec> {
    let n = series.len();
    check_counts(series)?;
    if regimes == 0 {
        return Err(invalid("J must be positive"));
    }
    let cov = match covariates {
        Some(c) => {
            c.check(n, c.width())?;
            c.clone()
        }
        None => Covariates::intercept(n),
    };
    if (0..n).any(|t| cov.row(t).iter().any(|v| *v < 0.0)) {
        return Err(invalid("Poisson HMM covariates must be non-negative"));
    }
    let k = cov.width();
    if n <= regimes * (p + k + 1) {
        return Err(invalid(format!("n = {n} is too small for J = {regimes}, p = {p}")));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    if mean == 0.0 {
        return Err(Error::Data("all observations are zero".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|t| design_row(&series[..t], p, mean, cov.row(t))).collect();
    let ar_share = if p > 0 { 0.2 } else { 0.0 };
    let mut spec = PoissonHmmSpec {
        j: regimes,
        p,
        phi: vec![vec![ar_share / p.max(1) as f64; p]; regimes],
        theta: (0..regimes)
            .map(|r| {
                let scale = if regimes == 1 { 1.0 } else { 0.5 + r as f64 / (regimes - 1) as f64 };
                let mut th = vec![0.0; k];
                th[0] = mean * (1.0 - ar_share) * scale;
                // other covariates start small but positive so updates can move them
                for v in th.iter_mut().skip(1) {
                    *v = 1e-3;
                }
                th
            })
            .collect(),
        q: vec![vec![1.0 / regimes as f64; regimes]; regimes],
        initial: None,
        fit: None,
    };
    let mut chain = ChainState {
        initial: vec![1.0 / regimes as f64; regimes],
        q: spec.q.clone(),
    };
    let summary = run_em(
        &mut spec,
        &mut chain,
        tolerance,
        max_iterations,
        &vec![false; regimes],
        |s: &PoissonHmmSpec| {
            rows.iter()
                .zip(series)
                .map(|(a, &x)| {
                    (0..regimes)
                        .map(|r| {
                            let m = s.mean(r, a);
                            if m > 0.0 {
                                Ok(poisson_pmf(x, m))
                            } else {
                                Err(Error::SingularFit("a regime mean reached zero".into()))
                            }
                        })
                        .collect()
                })
                .collect()
        },
        |s, smoothed| {
            for r in 0..regimes {
                let mut coef: Vec<f64> = s.phi[r].iter().chain(&s.theta[r]).copied().collect();
                // a few multiplicative steps, each increasing the expected log-likelihood
                for _ in 0..5 {
                    let mut num = vec![0.0; coef.len()];
                    let mut den = vec![0.0; coef.len()];
                    for ((a, &x), g) in rows.iter().zip(series).zip(&smoothed.gamma) {
                        let w = g[r];
                        let mu: f64 = coef.iter().zip(a).map(|(c, v)| c * v).sum();
                        for i in 0..coef.len() {
                            num[i] += w * x * a[i] / mu;
                            den[i] += w * a[i];
                        }
                    }
                    for i in 0..coef.len() {
                        if den[i] > 0.0 {
                            coef[i] *= num[i] / den[i];
                        }
                    }
                }
                s.phi[r] = coef[..p].to_vec();
                s.theta[r] = coef[p..].to_vec();
            }
            Ok(())
        },
    )?;
    spec.q = chain.q;
    spec.initial = Some(chain.initial);
    spec.fit = Some(summary);
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::ConditionalDistribution;
    use crate::models::ModelSpec;

    #[test]
    fn single_regime_iid_mle_is_sample_mean() {
        let x: Vec<f64> = (0..100).map(|t| (t * 7 % 5) as f64).collect();
        let spec = fit_poisson_hmm(&x, None, 1, 0, 1e-12, 500).unwrap();
        assert!((spec.theta[0][0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn trace_has_integer_atoms() {
        let spec = PoissonHmmSpec {
            j: 2,
            p: 1,
            phi: vec![vec![0.1], vec![0.3]],
            theta: vec![vec![1.0], vec![3.0]],
            q: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            initial: None,
            fit: None,
        };
        let laws = ModelSpec::PoissonHmm(spec).conditional_trace(&[1.0, 0.0, 4.0], None).unwrap();
        for law in &laws {
            assert!(law.atom(0.0) > 0.0 && law.atom(2.0) > 0.0);
            assert_eq!(law.atom(0.5), 0.0);
        }
    }

    #[test]
    fn rejects_non_counts() {
        assert!(fit_poisson_hmm(&[0.5; 50], None, 1, 0, 1e-8, 10).is_err());
    }
}
