//! Forward–backward recursions shared by the hidden Markov models.

use super::FitSummary;
use crate::error::{Error, Result};

/// Stationary distribution of a row-stochastic matrix by power iteration.
pub fn stationary_distribution(q: &[Vec<f64>]) -> Vec<f64> {
    let k = q.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..100_000 {
        let mut next = vec![0.0; k];
        for (i, row) in q.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                next[j] += pi[i] * p;
            }
        }
        let total: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= total;
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    pi
}

/// Checks that `q` is square, non-negative and row-stochastic within 1e-10.
pub fn validate_transition(q: &[Vec<f64>], regimes: usize) -> Result<()> {
    if q.len() != regimes || q.iter().any(|r| r.len() != regimes) {
        return Err(Error::InvalidInput(format!(
            "transition matrix must be {regimes}×{regimes}"
        )));
    }
    for (i, row) in q.iter().enumerate() {
        if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput(format!("row {i} of Q has invalid entries")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("row {i} of Q sums to {s}")));
        }
    }
    Ok(())
}

/// One step of the predictive recursion `π_{t+1|t} = π_{t|t} Q`.
pub fn propagate(filtered: &[f64], q: &[Vec<f64>]) -> Vec<f64> {
    let k = q.len();
    let mut out = vec![0.0; k];
    for (i, &w) in filtered.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for j in 0..k {
            out[j] += w * q[i][j];
        }
    }
    out
}

/// Output of the scaled forward pass.
pub struct ForwardPass {
    /// `P(τ_t = j | F_{t-1})`.
    pub predictive: Vec<Vec<f64>>,
    /// `P(τ_t = j | F_t)`.
    pub filtered: Vec<Vec<f64>>,
    /// `log p(x_t | F_{t-1})`.
    pub log_scales: Vec<f64>,
}

impl ForwardPass {
    pub fn log_likelihood(&self) -> f64 {
        self.log_scales.iter().sum()
    }
}

/// Forward filter for emission values `emission[t][j]` (densities w.r.t. a
/// common dominating measure).
pub fn forward(initial: &[f64], q: &[Vec<f64>], emission: &[Vec<f64>]) -> Result<ForwardPass> {
    let n = emission.len();
    let mut predictive = Vec::with_capacity(n);
    let mut filtered: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut log_scales = Vec::with_capacity(n);
    let mut pred = initial.to_vec();
    for (t, e) in emission.iter().enumerate() {
        let mut f: Vec<f64> = pred.iter().zip(e).map(|(p, v)| p * v).collect();
        let c: f64 = f.iter().sum();
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Data(format!(
                "observation at t={t} has zero or non-finite likelihood under every regime"
            )));
        }
        for v in f.iter_mut() {
            *v /= c;
        }
        log_scales.push(c.ln());
        predictive.push(pred);
        pred = propagate(&f, q);
        filtered.push(f);
    }
    Ok(ForwardPass {
        predictive,
        filtered,
        log_scales,
    })
}

/// Smoothed regime probabilities `γ_t(j)` and summed transition posteriors
/// `Σ_t ξ_t(i, j)`.
pub struct Smoothed {
    pub gamma: Vec<Vec<f64>>,
    pub transitions: Vec<Vec<f64>>,
}

pub fn backward(fwd: &ForwardPass, q: &[Vec<f64>], emission: &[Vec<f64>]) -> Smoothed {
    let n = emission.len();
    let k = q.len();
    let mut gamma = vec![vec![0.0; k]; n];
    let mut transitions = vec![vec![0.0; k]; k];
    // β_t scaled so that γ_t = filtered_t ⊙ β_t
    let mut beta = vec![1.0; k];
    gamma[n - 1] = fwd.filtered[n - 1].clone();
    for t in (0..n - 1).rev() {
        let c_next = fwd.log_scales[t + 1].exp();
        let w: Vec<f64> = (0..k).map(|j| emission[t + 1][j] * beta[j] / c_next).collect();
        for i in 0..k {
            let fi = fwd.filtered[t][i];
            if fi == 0.0 {
                continue;
            }
            for j in 0..k {
                transitions[i][j] += fi * q[i][j] * w[j];
            }
        }
        let new_beta: Vec<f64> = (0..k)
            .map(|i| (0..k).map(|j| q[i][j] * w[j]).sum())
            .collect();
        beta = new_beta;
        let mut g: Vec<f64> = (0..k).map(|i| fwd.filtered[t][i] * beta[i]).collect();
        let s: f64 = g.iter().sum();
        if s > 0.0 {
            for v in g.iter_mut() {
                *v /= s;
            }
        }
        gamma[t] = g;
    }
    Smoothed { gamma, transitions }
}

/// Relative log-likelihood change used as the EM stopping rule.
pub fn converged(prev: f64, next: f64, tol: f64) -> bool {
    ((next - prev) / prev.abs().max(1e-300)).abs() < tol
}

/// Transition matrix and initial law updated by EM.
pub(crate) struct ChainState {
    pub initial: Vec<f64>,
    pub q: Vec<Vec<f64>>,
}

/// Relative tolerance of the per-iteration monotonicity check.
pub(crate) const MONOTONE_TOLERANCE: f64 = 1e-9;

/// Baum–Welch iterations. `emission` evaluates `p(x_t | τ_t = j)` under
/// the current parameters and `m_step` updates them from the smoothed
/// probabilities. Regimes flagged in `exempt` may lose all posterior mass;
/// any other regime with mass below `1e-6` aborts with a singular fit.
pub(crate) fn run_em<P>(
    params: &mut P,
    chain: &mut ChainState,
    tolerance: f64,
    max_iterations: usize,
    exempt: &[bool],
    emission: impl Fn(&P) -> Result<Vec<Vec<f64>>>,
    mut m_step: impl FnMut(&mut P, &Smoothed) -> Result<()>,
) -> Result<FitSummary> {
    let k = chain.q.len();
    let mut trace: Vec<f64> = Vec::new();
    let mut warnings = Vec::new();
    let mut converged_flag = false;
    let mut iterations = 0;
    loop {
        let em = emission(params)?;
        let fwd = forward(&chain.initial, &chain.q, &em)?;
        let ll = fwd.log_likelihood();
        if !ll.is_finite() {
            return Err(Error::Data("non-finite log-likelihood".into()));
        }
        if let Some(&prev) = trace.last() {
            if ll < prev - MONOTONE_TOLERANCE * prev.abs().max(1.0) && warnings.is_empty() {
                warnings.push(format!(
                    "log-likelihood decreased at iteration {iterations}: {prev} -> {ll}"
                ));
            }
            if converged(prev, ll, tolerance) {
                trace.push(ll);
                converged_flag = true;
                break;
            }
        }
        trace.push(ll);
        if iterations == max_iterations {
            break;
        }
        let smoothed = backward(&fwd, &chain.q, &em);
        for j in 0..k {
            let mass: f64 = smoothed.gamma.iter().map(|g| g[j]).sum();
            if mass < 1e-6 && !exempt[j] {
                return Err(Error::SingularFit(format!(
                    "regime {} has posterior mass {mass:.3e}",
                    j + 1
                )));
            }
        }
        chain.initial = smoothed.gamma[0].clone();
        for i in 0..k {
            let row: f64 = smoothed.transitions[i].iter().sum();
            if row > 0.0 {
                chain.q[i] = smoothed.transitions[i].iter().map(|v| v / row).collect();
            }
        }
        m_step(params, &smoothed)?;
        iterations += 1;
    }
    if !converged_flag {
        warnings.push(format!("EM stopped after {max_iterations} iterations without converging"));
    }
    Ok(FitSummary {
        log_likelihood: *trace.last().expect("at least one evaluation"),
        iterations,
        converged: converged_flag,
        log_likelihood_trace: trace,
        warnings,
    })
}

/// Weighted least squares `argmin_β Σ w_t (y_t - a_t'β)²`.
pub(crate) fn weighted_least_squares(rows: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let m = rows[0].len();
    let mut xtx = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut xty = nalgebra::DVector::<f64>::zeros(m);
    for ((a, &yt), &wt) in rows.iter().zip(y).zip(w) {
        if wt == 0.0 {
            continue;
        }
        for i in 0..m {
            xty[i] += wt * a[i] * yt;
            for j in 0..m {
                xtx[(i, j)] += wt * a[i] * a[j];
            }
        }
    }
    let chol = xtx
        .cholesky()
        .ok_or_else(|| Error::SingularFit("weighted design matrix is not positive definite".into()))?;
    Ok(chol.solve(&xty).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_two_state() {
        let q = vec![vec![0.9, 0.1], vec![0.3, 0.7]];
        let pi = stationary_distribution(&q);
        assert!((pi[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn smoothing_sums_to_one() {
        let q = vec![vec![0.8, 0.2], vec![0.4, 0.6]];
        let em: Vec<Vec<f64>> = (0..20).map(|t| vec![1.0 + (t % 3) as f64, 2.0 - (t % 2) as f64]).collect();
        let f = forward(&[0.5, 0.5], &q, &em).unwrap();
        let s = backward(&f, &q, &em);
        for g in &s.gamma {
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let total: f64 = s.transitions.iter().flatten().sum();
        assert!((total - 19.0).abs() < 1e-10);
        // marginal of transitions matches γ
        for i in 0..2 {
            let row: f64 = s.transitions[i].iter().sum();
            let g: f64 = s.gamma[..19].iter().map(|g| g[i]).sum();
            assert!((row - g).abs() < 1e-10);
        }
    }

    #[test]
    fn wls_recovers_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|t| vec![1.0, t as f64]).collect();
        let y: Vec<f64> = (0..10).map(|t| 2.0 + 0.5 * t as f64).collect();
        let b = weighted_least_squares(&rows, &y, &[1.0; 10]).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-12 && (b[1] - 0.5).abs() < 1e-12);
        assert!(weighted_least_squares(&rows, &y, &[0.0; 10]).is_err());
    }
}
