//! AR(p)Z-Gaussian (or AR(p)Z-G) hidden Markov model, optionally with a
//! zero-inflated first regime.

use serde::{Deserialize, Serialize};

use super::hmm::{propagate, run_em, stationary_distribution, validate_transition, weighted_least_squares, ChainState};
use super::{design_row, Covariates, FitSummary, SequentialFilter};
use crate::distribution::{Component, ConditionalLaw, Innovation};
use crate::error::{invalid, Error, Result};

/// `X_t | F_{t-1}, τ_t = j  ~  μ_{t,j} + σ_j ε` with
/// `μ_{t,j} = Σ_i φ_{i,j} X_{t-i} + θ_j'Z_t`. When `zero_inflated`, regime 1
/// (index 0) is a point mass at 0 and its `φ`, `θ`, `σ` are unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianHmmSpec {
    #[serde(rename = "J")]
    pub j: usize,
    pub p: usize,
    /// `phi[j][i - 1] = φ_{i,j}`.
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(default)]
    pub zero_inflated: bool,
    #[serde(default)]
    pub innovation: Innovation,
    /// Regime law at `t = 1`; the stationary law of `Q` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
}

impl GaussianHmmSpec {
    /// Intercept-only spec with `p = 0`.
    pub fn intercept_only(means: &[f64], sigma: &[f64], q: Vec<Vec<f64>>) -> Self {
        Self {
            j: means.len(),
            p: 0,
            phi: vec![Vec::new(); means.len()],
            theta: means.iter().map(|m| vec![*m]).collect(),
            sigma: sigma.to_vec(),
            q,
            zero_inflated: false,
            innovation: Innovation::Gaussian,
            initial: None,
            fit: None,
        }
    }

    pub fn covariate_width(&self) -> usize {
        self.theta.first().map(|t| t.len()).unwrap_or(1)
    }

    fn is_point_mass(&self, j: usize) -> bool {
        self.zero_inflated && j == 0
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.j;
        if j == 0 {
            return Err(invalid("J must be positive"));
        }
        if self.zero_inflated && j < 2 {
            return Err(invalid("a zero-inflated model needs J >= 2"));
        }
        if self.phi.len() != j || self.phi.iter().any(|r| r.len() != self.p) {
            return Err(invalid(format!("phi must be {j} rows of length p = {}", self.p)));
        }
        let k = self.covariate_width();
        if k == 0 || self.theta.len() != j || self.theta.iter().any(|r| r.len() != k) {
            return Err(invalid("theta must have J rows of equal, positive length"));
        }
        if self.sigma.len() != j {
            return Err(invalid("sigma must have J entries"));
        }
        for r in 0..j {
            if !self.is_point_mass(r) && !(self.sigma[r] > 0.0 && self.sigma[r].is_finite()) {
                return Err(invalid(format!("sigma_{} must be positive", r + 1)));
            }
        }
        if self.phi.iter().chain(&self.theta).flatten().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite coefficient"));
        }
        validate_transition(&self.q, j)?;
        if let Some(init) = &self.initial {
            if init.len() != j || init.iter().any(|p| !(*p >= 0.0)) || (init.iter().sum::<f64>() - 1.0).abs() > 1e-8 {
                return Err(invalid("initial regime law must be a probability vector of length J"));
            }
        }
        Ok(())
    }

    /// Stationary regime probabilities of `Q`.
    pub fn stationary(&self) -> Vec<f64> {
        stationary_distribution(&self.q)
    }

    fn initial_law(&self) -> Vec<f64> {
        self.initial.clone().unwrap_or_else(|| self.stationary())
    }

    fn mean(&self, regime: usize, row: &[f64]) -> f64 {
        let (lags, z) = row.split_at(self.p);
        self.phi[regime].iter().zip(lags).map(|(a, b)| a * b).sum::<f64>()
            + self.theta[regime].iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Emission value with respect to Lebesgue measure plus a unit atom at 0
    /// (the atom is only used by zero-inflated models).
    fn emission(&self, regime: usize, x: f64, row: &[f64]) -> f64 {
        if self.zero_inflated {
            if regime == 0 {
                return if x == 0.0 { 1.0 } else { 0.0 };
            }
            if x == 0.0 {
                return 0.0;
            }
        }
        let s = self.sigma[regime];
        self.innovation.pdf((x - self.mean(regime, row)) / s) / s
    }

    fn component(&self, regime: usize, row: &[f64]) -> Component {
        if self.is_point_mass(regime) {
            Component::PointMass { at: 0.0 }
        } else {
            Component::LocationScale {
                location: self.mean(regime, row),
                scale: self.sigma[regime],
                innovation: self.innovation,
            }
        }
    }

    pub(crate) fn filter(&self, covariates: Covariates, presample: f64) -> Result<GaussianHmmFilter<'_>> {
        if covariates.width() != self.covariate_width() {
            return Err(invalid(format!(
                "model expects {} covariate columns, got {}",
                self.covariate_width(),
                covariates.width()
            )));
        }
        Ok(GaussianHmmFilter {
            spec: self,
            covariates,
            presample,
            history: Vec::new(),
            predictive: self.initial_law(),
        })
    }
}

pub(crate) struct GaussianHmmFilter<'a> {
    spec: &'a GaussianHmmSpec,
    covariates: Covariates,
    presample: f64,
    history: Vec<f64>,
    predictive: Vec<f64>,
}

impl GaussianHmmFilter<'_> {
    fn row(&self) -> Result<Vec<f64>> {
        let t = self.history.len();
        if t >= self.covariates.n() {
            return Err(invalid(format!("no covariates for t = {t}")));
        }
        Ok(design_row(&self.history, self.spec.p, self.presample, self.covariates.row(t)))
    }
}

impl SequentialFilter for GaussianHmmFilter<'_> {
    fn law(&self) -> Result<ConditionalLaw> {
        let row = self.row()?;
        let components = (0..self.spec.j).map(|r| self.spec.component(r, &row)).collect();
        ConditionalLaw::new(self.predictive.clone(), components)
    }

    fn observe(&mut self, x: f64) -> Result<()> {
        let row = self.row()?;
        let mut f: Vec<f64> = self
            .predictive
            .iter()
            .enumerate()
            .map(|(r, w)| w * self.spec.emission(r, x, &row))
            .collect();
        let c: f64 = f.iter().sum();
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Data(format!("observation {x} has zero likelihood under every regime")));
        }
        f.iter_mut().for_each(|v| *v /= c);
        self.predictive = propagate(&f, &self.spec.q);
        self.history.push(x);
        Ok(())
    }
}

/// EM settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHmmFitOptions {
    /// Relative log-likelihood change that stops the iterations.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Volatility floor as a fraction of the sample standard deviation.
    pub sigma_floor: f64,
}

impl Default for GaussianHmmFitOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 500,
            sigma_floor: 1e-6,
        }
    }
}

/// Fits the model by EM. Lagged values before the sample are set to the
/// series mean. Initial values: pooled least squares, regimes split by
/// quantiles of the absolute residuals, uniform `Q`.
pub fn fit_gaussian_hmm(
    series: &[f64],
    covariates: Option<&Covariates>,
    regimes: usize,
    p: usize,
    zero_inflated: bool,
    options: &GaussianHmmFitOptions,
) -> Result<GaussianHmmSpec> {
    let n = series.len();
    if regimes == 0 {
        return Err(invalid("J must be positive"));
    }
    if zero_inflated && regimes < 2 {
        return Err(invalid("a zero-inflated model needs J >= 2"));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("series contains non-finite values".into()));
    }
    let cov = match covariates {
        Some(c) => {
            c.check(n, c.width())?;
            c.clone()
        }
        None => Covariates::intercept(n),
    };
    let k = cov.width();
    if n <= regimes * (p + k + 1) {
        return Err(invalid(format!(
            "n = {n} is too small for J = {regimes}, p = {p} and {k} covariates"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let sd = (series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Data("series is constant".into()));
    }
    let floor = options.sigma_floor * sd;
    let rows: Vec<Vec<f64>> = (0..n).map(|t| design_row(&series[..t], p, mean, cov.row(t))).collect();

    // pooled least squares on the continuous observations
    let continuous: Vec<f64> = series
        .iter()
        .map(|&x| if zero_inflated && x == 0.0 { 0.0 } else { 1.0 })
        .collect();
    let beta = weighted_least_squares(&rows, series, &continuous)?;
    let resid: Vec<f64> = rows
        .iter()
        .zip(series)
        .map(|(a, x)| x - a.iter().zip(&beta).map(|(u, v)| u * v).sum::<f64>())
        .collect();
    let first = usize::from(zero_inflated);
    let bands = regimes - first;
    let mut abs: Vec<(f64, usize)> = resid
        .iter()
        .enumerate()
        .filter(|(t, _)| continuous[*t] > 0.0)
        .map(|(t, r)| (r.abs(), t))
        .collect();
    if abs.len() < bands * (p + k + 1) {
        return Err(invalid("too few non-zero observations for the requested regimes"));
    }
    abs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sigma = vec![0.0; regimes];
    for b in 0..bands {
        let lo = b * abs.len() / bands;
        let hi = (b + 1) * abs.len() / bands;
        let ss: f64 = abs[lo..hi].iter().map(|(_, t)| resid[*t].powi(2)).sum();
        sigma[first + b] = (ss / (hi - lo) as f64).sqrt().max(floor);
    }
    let (lag_beta, theta_beta) = beta.split_at(p);
    let mut spec = GaussianHmmSpec {
        j: regimes,
        p,
        phi: (0..regimes)
            .map(|r| if r < first { vec![0.0; p] } else { lag_beta.to_vec() })
            .collect(),
        theta: (0..regimes)
            .map(|r| if r < first { vec![0.0; k] } else { theta_beta.to_vec() })
            .collect(),
        sigma,
        q: vec![vec![1.0 / regimes as f64; regimes]; regimes],
        zero_inflated,
        innovation: Innovation::Gaussian,
        initial: None,
        fit: None,
    };
    let mut chain = ChainState {
        initial: vec![1.0 / regimes as f64; regimes],
        q: spec.q.clone(),
    };
    let exempt: Vec<bool> = (0..regimes).map(|r| zero_inflated && r == 0).collect();

    let summary = run_em(
        &mut spec,
        &mut chain,
        options.tolerance,
        options.max_iterations,
        &exempt,
        |s: &GaussianHmmSpec| {
            Ok(rows
                .iter()
                .zip(series)
                .map(|(a, &x)| (0..regimes).map(|r| s.emission(r, x, a)).collect())
                .collect())
        },
        |s, smoothed| {
            for r in first..regimes {
                let w: Vec<f64> = smoothed.gamma.iter().map(|g| g[r]).collect();
                let b = weighted_least_squares(&rows, series, &w)?;
                let mass: f64 = w.iter().sum();
                let ss: f64 = rows
                    .iter()
                    .zip(series)
                    .zip(&w)
                    .map(|((a, x), wt)| wt * (x - a.iter().zip(&b).map(|(u, v)| u * v).sum::<f64>()).powi(2))
                    .sum();
                s.phi[r] = b[..p].to_vec();
                s.theta[r] = b[p..].to_vec();
                s.sigma[r] = (ss / mass).sqrt().max(floor);
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
    fn single_regime_is_gaussian_mle() {
        let x: Vec<f64> = (0..200).map(|t| ((t * 37 % 101) as f64 - 50.0) / 17.0).collect();
        let spec = fit_gaussian_hmm(&x, None, 1, 0, false, &Default::default()).unwrap();
        let mean = x.iter().sum::<f64>() / 200.0;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 200.0;
        assert!((spec.theta[0][0] - mean).abs() < 1e-10);
        assert!((spec.sigma[0] - var.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn continuous_mixture_has_no_atoms() {
        let spec = GaussianHmmSpec::intercept_only(&[0.0, 1.0], &[1.0, 2.0], vec![vec![0.9, 0.1], vec![0.2, 0.8]]);
        let laws = ModelSpec::GaussianHmm(spec).conditional_trace(&[0.3, -1.0, 2.0], None).unwrap();
        for law in &laws {
            for y in [-1.0, 0.0, 0.3, 2.0] {
                assert_eq!(law.atom(y), 0.0);
            }
        }
    }

    #[test]
    fn zero_inflated_atom_dominates_filter_weight() {
        let mut spec = GaussianHmmSpec::intercept_only(&[0.0, 0.0, 0.5], &[0.0, 1.0, 2.0], vec![
            vec![0.2, 0.5, 0.3],
            vec![0.1, 0.8, 0.1],
            vec![0.3, 0.3, 0.4],
        ]);
        spec.zero_inflated = true;
        let laws = ModelSpec::GaussianHmm(spec).conditional_trace(&[0.0, 1.0, 0.0, -0.3], None).unwrap();
        for law in &laws {
            assert!(law.atom(0.0) >= law.weights()[0] - 1e-15);
            assert!(law.atom(0.0) > 0.0);
        }
        // after an observed zero the chain sits in regime 1 and moves by Q's first row
        assert!((laws[1].weights()[0] - 0.2).abs() < 1e-12);
    }
}
