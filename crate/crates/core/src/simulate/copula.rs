//! Copula samplers.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFamily {
    Independence,
    Gaussian,
    Frank,
    Clayton,
    /// `(u, 1 - |2u - 1|)`.
    Tentmap,
    /// `(U, V, W)` pairwise but not jointly independent.
    RomanoSiegel,
}

impl CopulaFamily {
    pub fn name(self) -> &'static str {
        match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Tentmap => "tentmap",
            CopulaFamily::RomanoSiegel => "romano_siegel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    /// Common Kendall's tau of every pair (gaussian, frank, clayton).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kendall_tau: Option<f64>,
    /// Number of coordinates; studies fill it in from the DGP when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

impl CopulaSpec {
    pub fn new(family: CopulaFamily, kendall_tau: Option<f64>, dimension: usize) -> Result<Self> {
        let s = Self {
            family,
            kendall_tau,
            dimension: Some(dimension),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn independence(dimension: usize) -> Self {
        Self {
            family: CopulaFamily::Independence,
            kendall_tau: None,
            dimension: Some(dimension),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        self.dimension.ok_or_else(|| invalid("copula dimension is not set"))
    }

    fn tau(&self) -> Result<f64> {
        let t = self
            .kendall_tau
            .ok_or_else(|| invalid(format!("{} copula needs kendall_tau", self.family.name())))?;
        if !(t > -1.0 && t < 1.0) {
            return Err(invalid(format!("kendall_tau must lie in (-1, 1), got {t}")));
        }
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim()?;
        if d < 2 {
            return Err(invalid("copula dimension must be at least 2"));
        }
        match self.family {
            CopulaFamily::Independence => {}
            CopulaFamily::Gaussian => {
                let rho = gaussian_correlation(self.tau()?);
                if rho <= -1.0 / (d as f64 - 1.0) {
                    return Err(invalid(format!(
                        "exchangeable correlation {rho} is not positive definite in dimension {d}"
                    )));
                }
            }
            CopulaFamily::Clayton => {
                if self.tau()? < 0.0 {
                    return Err(invalid("clayton needs kendall_tau >= 0"));
                }
            }
            CopulaFamily::Frank => {
                let t = self.tau()?;
                if d > 2 && t < 0.0 {
                    return Err(invalid("frank in dimension > 2 needs kendall_tau >= 0"));
                }
            }
            CopulaFamily::Tentmap => {
                if d != 2 {
                    return Err(invalid("tentmap copula is bivariate"));
                }
            }
            CopulaFamily::RomanoSiegel => {
                if d != 3 {
                    return Err(invalid("romano_siegel copula is trivariate"));
                }
            }
        }
        Ok(())
    }
}

/// `ρ = sin(πτ/2)`.
pub fn gaussian_correlation(tau: f64) -> f64 {
    (PI * tau / 2.0).sin()
}

/// `θ = 2τ/(1-τ)`.
pub fn clayton_theta(tau: f64) -> f64 {
    2.0 * tau / (1.0 - tau)
}

/// Debye function `D_1(θ) = θ^{-1} ∫_0^θ t/(e^t - 1) dt` for `θ > 0`.
fn debye1(theta: f64) -> f64 {
    let rule = GaussLegendre::new(64).expect("valid degree");
    rule.integrate(0.0, theta, |t| if t == 0.0 { 1.0 } else { t / t.exp_m1() }) / theta
}

/// Kendall's tau of the Frank copula, `1 + 4(D_1(θ) - 1)/θ`.
pub fn frank_tau(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let a = theta.abs();
    let t = 1.0 + 4.0 * (debye1(a) - 1.0) / a;
    t.copysign(theta)
}

/// Frank parameter with the given Kendall's tau, by bisection.
pub fn frank_theta(tau: f64) -> Result<f64> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(invalid(format!("kendall_tau must lie in (-1, 1), got {tau}")));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let target = tau.abs();
    let (mut lo, mut hi) = (0.0, 1.0);
    while frank_tau(hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(invalid("kendall_tau too close to 1 for the frank copula"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frank_tau(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).copysign(tau))
}

/// Logarithmic-series variate with `P(K = k) ∝ α^k / k`,
/// `α = 1 - e^{-θ}` (Kemp's algorithm).
fn log_series<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    let alpha = -(-theta).exp_m1();
    let v: f64 = rng.random();
    if v >= alpha {
        return 1.0;
    }
    let u: f64 = rng.random();
    let q = -(-theta * u).exp_m1();
    if v < q * q {
        (1.0 + v.ln() / q.ln()).floor()
    } else if v > q {
        1.0
    } else {
        2.0
    }
}

fn unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // open interval keeps inversions finite
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// `n` draws from the copula, returned as `dim` columns of length `n`.
pub fn sample_copula<R: Rng + ?Sized>(spec: &CopulaSpec, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let d = spec.dim()?;
    let mut cols = vec![Vec::with_capacity(n); d];
    match spec.family {
        CopulaFamily::Independence => {
            for _ in 0..n {
                for c in cols.iter_mut() {
                    c.push(unit(rng));
                }
            }
        }
        CopulaFamily::Gaussian => {
            let rho = gaussian_correlation(spec.tau()?);
            let corr = nalgebra::DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { rho });
            let l = corr
                .cholesky()
                .ok_or_else(|| invalid("correlation matrix is not positive definite"))?
                .l();
            for _ in 0..n {
                let z = nalgebra::DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
                let x = &l * z;
                for (c, v) in cols.iter_mut().zip(x.iter()) {
                    c.push(normal_cdf(*v));
                }
            }
        }
        CopulaFamily::Clayton => {
            let theta = clayton_theta(spec.tau()?);
            if theta == 0.0 {
                return sample_copula(&CopulaSpec::independence(d), n, rng);
            }
            if d == 2 {
                for _ in 0..n {
                    let (u, w) = (unit(rng), unit(rng));
                    // conditional inversion of ∂C/∂u
                    let v = ((w.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0).powf(-1.0 / theta);
                    cols[0].push(u);
                    cols[1].push(v);
                }
            } else {
                // Marshall–Olkin with a gamma frailty
                let frailty = Gamma::new(1.0 / theta, 1.0).map_err(|e| invalid(e.to_string()))?;
                for _ in 0..n {
                    let v: f64 = frailty.sample(rng);
                    for c in cols.iter_mut() {
                        let e: f64 = Exp1.sample(rng);
                        c.push((1.0 + e / v).powf(-1.0 / theta));
                    }
                }
            }
        }
        CopulaFamily::Frank => {
            let theta = frank_theta(spec.tau()?)?;
            if theta == 0.0 {
                return sample_copula(&CopulaSpec::independence(d), n, rng);
            }
            if d == 2 {
                for _ in 0..n {
                    let (u, w) = (unit(rng), unit(rng));
                    let v = -((w * (-theta).exp_m1()) / (w + (1.0 - w) * (-theta * u).exp())).ln_1p() / theta;
                    cols[0].push(u);
                    cols[1].push(v.clamp(0.0, 1.0));
                }
            } else {
                // Marshall–Olkin with a logarithmic-series frailty
                let a = -(-theta).exp_m1();
                for _ in 0..n {
                    let v = log_series(theta, rng);
                    for c in cols.iter_mut() {
                        let e: f64 = Exp1.sample(rng);
                        let u = -(-a * (-e / v).exp()).ln_1p() / theta;
                        c.push(u.clamp(0.0, 1.0));
                    }
                }
            }
        }
        CopulaFamily::Tentmap => {
            for _ in 0..n {
                let u = unit(rng);
                cols[0].push(u);
                cols[1].push(1.0 - (2.0 * u - 1.0).abs());
            }
        }
        CopulaFamily::RomanoSiegel => {
            for _ in 0..n {
                let (u, v, eta) = (unit(rng), unit(rng), unit(rng));
                let w = if (u - 0.5) * (v - 0.5) * (eta - 0.5) >= 0.0 { eta } else { 1.0 - eta };
                cols[0].push(u);
                cols[1].push(v);
                cols[2].push(w);
            }
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frank_tau_inverts() {
        for tau in [0.1282, 1.0 / 3.0, -0.2, 0.7] {
            let th = frank_theta(tau).unwrap();
            assert!((frank_tau(th) - tau).abs() < 1e-12);
        }
        // θ = 5.74 gives τ ≈ 0.5 (classical value)
        assert!((frank_tau(5.736_276) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn parameter_maps() {
        assert!((gaussian_correlation(1.0 / 3.0) - 0.5).abs() < 1e-15);
        assert!((clayton_theta(1.0 / 3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        assert!(CopulaSpec::new(CopulaFamily::Tentmap, None, 3).is_err());
        assert!(CopulaSpec::new(CopulaFamily::Gaussian, Some(1.0), 2).is_err());
        assert!(CopulaSpec::new(CopulaFamily::Clayton, None, 2).is_err());
        assert!(CopulaSpec::new(CopulaFamily::RomanoSiegel, None, 2).is_err());
    }
}
