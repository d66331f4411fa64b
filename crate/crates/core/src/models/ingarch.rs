//! Poisson INGARCH(p, q):
//! `λ_t = ω + Σ_{i=1}^q α_i X_{t-i} + Σ_{i=1}^p β_i λ_{t-i}`,
//! `X_t | F_{t-1} ~ Poisson(λ_t)`.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use super::{FitSummary, SequentialFilter};
use crate::distribution::ConditionalLaw;
use crate::error::{invalid, Error, Result};

/// Largest admissible `Σα + Σβ`.
pub const STATIONARITY_BOUND: f64 = 1.0 - 1e-6;
/// Fits with `Σα + Σβ` above this are flagged as on the boundary.
const BOUNDARY_WARNING: f64 = 1.0 - 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngarchSpec {
    pub omega: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
}

impl IngarchSpec {
    pub fn new(omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let s = Self {
            omega,
            alpha,
            beta,
            fit: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn persistence(&self) -> f64 {
        self.alpha.iter().chain(&self.beta).sum()
    }

    /// `ω / (1 - Σα - Σβ)`.
    pub fn unconditional_mean(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(invalid("omega must be positive"));
        }
        if self.alpha.iter().chain(&self.beta).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("alpha and beta must be non-negative"));
        }
        if self.persistence() >= 1.0 {
            return Err(invalid(format!(
                "sum of alpha and beta is {}, must be below 1",
                self.persistence()
            )));
        }
        Ok(())
    }

    /// Intensities `λ_1..λ_n` along `series`, with pre-sample values of
    /// both `X` and `λ` at the unconditional mean.
    pub fn intensities(&self, series: &[f64]) -> Vec<f64> {
        let m = self.unconditional_mean();
        let mut lambda = Vec::with_capacity(series.len());
        for t in 0..series.len() {
            lambda.push(next_intensity(self, series, &lambda, t, m));
        }
        lambda
    }

    pub(crate) fn filter(&self) -> IngarchFilter<'_> {
        IngarchFilter {
            spec: self,
            history: Vec::new(),
            lambda: Vec::new(),
        }
    }
}

fn next_intensity(spec: &IngarchSpec, x: &[f64], lambda: &[f64], t: usize, presample: f64) -> f64 {
    let mut l = spec.omega;
    for (i, a) in spec.alpha.iter().enumerate() {
        l += a * if t > i { x[t - 1 - i] } else { presample };
    }
    for (i, b) in spec.beta.iter().enumerate() {
        l += b * if t > i { lambda[t - 1 - i] } else { presample };
    }
    l
}

pub(crate) struct IngarchFilter<'a> {
    spec: &'a IngarchSpec,
    history: Vec<f64>,
    lambda: Vec<f64>,
}

impl IngarchFilter<'_> {
    fn current(&self) -> f64 {
        next_intensity(
            self.spec,
            &self.history,
            &self.lambda,
            self.history.len(),
            self.spec.unconditional_mean(),
        )
    }
}

impl SequentialFilter for IngarchFilter<'_> {
    fn law(&self) -> Result<ConditionalLaw> {
        Ok(ConditionalLaw::poisson(self.current()))
    }

    fn observe(&mut self, x: f64) -> Result<()> {
        let l = self.current();
        self.lambda.push(l);
        self.history.push(x);
        Ok(())
    }
}

/// `Σ_t X_t ln λ_t - λ_t`.
fn quasi_log_likelihood(spec: &IngarchSpec, series: &[f64]) -> f64 {
    spec.intensities(series)
        .iter()
        .zip(series)
        .map(|(l, x)| if *x > 0.0 { x * l.ln() - l } else { -l })
        .sum()
}

/// Unconstrained parameters `(ln ω, c_1..c_{p+q})`; the coefficients are
/// `STATIONARITY_BOUND · e^{c_i} / (1 + Σ e^{c})`, so their sum stays below
/// the bound.
struct Objective<'a> {
    series: &'a [f64],
    q: usize,
}

impl Objective<'_> {
    fn spec(&self, v: &[f64]) -> IngarchSpec {
        let e: Vec<f64> = v[1..].iter().map(|c| c.clamp(-700.0, 700.0).exp()).collect();
        let total = 1.0 + e.iter().sum::<f64>();
        let coef: Vec<f64> = e.iter().map(|x| STATIONARITY_BOUND * x / total).collect();
        IngarchSpec {
            omega: v[0].clamp(-700.0, 700.0).exp(),
            alpha: coef[..self.q].to_vec(),
            beta: coef[self.q..].to_vec(),
            fit: None,
        }
    }

    fn encode(&self, omega: f64, alpha: &[f64], beta: &[f64]) -> Vec<f64> {
        let slack = STATIONARITY_BOUND - alpha.iter().chain(beta).sum::<f64>();
        std::iter::once(omega.ln())
            .chain(alpha.iter().chain(beta).map(|c| (c / slack).ln()))
            .collect()
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, v: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let ll = quasi_log_likelihood(&self.spec(v), self.series);
        Ok(if ll.is_finite() { -ll } else { f64::MAX })
    }
}

/// Poisson conditional maximum likelihood by Nelder–Mead on the
/// reparameterization above, from two starting points (moderate and high
/// persistence); the better optimum is kept.
pub fn fit_ingarch(series: &[f64], p: usize, q: usize) -> Result<IngarchSpec> {
    let n = series.len();
    if n <= 20 {
        return Err(invalid(format!("INGARCH fitting needs n > 20, got {n}")));
    }
    if series.iter().any(|x| !(*x >= 0.0) || x.fract() != 0.0 || !x.is_finite()) {
        return Err(Error::Data("INGARCH needs non-negative integer counts".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    if mean == 0.0 {
        return Err(Error::Data(
            "all observations are zero; the intensity is not identifiable".into(),
        ));
    }
    if p == 0 && q == 0 {
        let mut spec = IngarchSpec::new(mean, Vec::new(), Vec::new())?;
        spec.fit = Some(FitSummary {
            log_likelihood: quasi_log_likelihood(&spec, series),
            iterations: 0,
            converged: true,
            ..Default::default()
        });
        return Ok(spec);
    }
    let objective = Objective { series, q };
    let starts = [(0.1, 0.5), (0.05, 0.9)];
    let mut best: Option<(f64, Vec<f64>, u64)> = None;
    for (a_total, b_total) in starts {
        let (a_total, b_total) = match (q, p) {
            (0, _) => (0.0, b_total),
            (_, 0) => (a_total, 0.0),
            _ => (a_total, b_total),
        };
        let alpha = vec![a_total / q.max(1) as f64; q];
        let beta = vec![b_total / p.max(1) as f64; p];
        let omega = mean * (1.0 - a_total - b_total);
        let x0 = objective.encode(omega, &alpha, &beta);
        let mut simplex = vec![x0.clone()];
        for i in 0..x0.len() {
            let mut v = x0.clone();
            v[i] += 0.5;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-10)
            .map_err(|e| invalid(format!("optimizer setup: {e}")))?;
        let res = Executor::new(Objective { series, q }, solver)
            .configure(|s| s.max_iters(20_000))
            .run()
            .map_err(|e| Error::SingularFit(format!("optimizer failed: {e}")))?;
        let state = res.state();
        let cost = state.best_cost;
        let param = state.best_param.clone().expect("optimizer returns a parameter");
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, param, state.iter));
        }
    }
    let (cost, param, iters) = best.expect("at least one start");
    let mut spec = objective.spec(&param);
    let mut warnings = Vec::new();
    if spec.persistence() > BOUNDARY_WARNING {
        warnings.push(format!(
            "fit is on the stationarity boundary: sum of alpha and beta = {:.6}",
            spec.persistence()
        ));
    }
    spec.fit = Some(FitSummary {
        log_likelihood: -cost,
        iterations: iters as usize,
        converged: true,
        log_likelihood_trace: Vec::new(),
        warnings,
    });
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::ConditionalDistribution;

    #[test]
    fn unit_intensity_atoms() {
        let law = ConditionalLaw::poisson(1.0);
        let e = (-1.0f64).exp();
        assert!((law.atom(0.0) - e).abs() < 1e-15);
        assert!((law.cdf(0.0) - e).abs() < 1e-15);
        // INGARCH with ω = 1 and no dynamics has λ_t = 1
        let spec = IngarchSpec::new(1.0, vec![], vec![]).unwrap();
        let mut f = spec.filter();
        f.observe(3.0).unwrap();
        assert!((f.law().unwrap().atom(0.0) - e).abs() < 1e-15);
    }

    #[test]
    fn static_fit_is_sample_mean() {
        let x: Vec<f64> = (0..40).map(|t| (t % 4) as f64).collect();
        let s = fit_ingarch(&x, 0, 0).unwrap();
        assert!((s.omega - 1.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(fit_ingarch(&[0.0; 50], 1, 1).is_err());
        assert!(fit_ingarch(&[1.0; 20], 1, 1).is_err());
        assert!(fit_ingarch(&[1.5; 50], 1, 1).is_err());
    }

    #[test]
    fn presample_is_unconditional_mean() {
        let s = IngarchSpec::new(0.5, vec![0.2], vec![0.3]).unwrap();
        let l = s.intensities(&[4.0, 0.0]);
        assert!((l[0] - 1.0).abs() < 1e-15);
        assert!((l[1] - (0.5 + 0.2 * 4.0 + 0.3 * 1.0)).abs() < 1e-15);
    }
}
