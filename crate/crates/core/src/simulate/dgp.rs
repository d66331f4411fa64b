//! Data-generating processes: series built by inverting each model's
//! conditional cdf at copula uniforms.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::copula::{sample_copula, CopulaSpec};
use crate::distribution::{Component, ConditionalDistributionTrace, ConditionalLaw, Innovation};
use crate::domain::SeriesPanel;
use crate::error::{invalid, Result};
use crate::models::{GaussianHmmSpec, IngarchSpec, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dgp {
    /// Two regime-switching series (3 and 2 regimes).
    Dgp1,
    /// Poisson autoregression and Gaussian AR(1).
    Dgp2,
    /// Poisson autoregression and two Gaussian AR(1) series.
    Dgp3,
    /// The copula uniforms themselves.
    IidUniform,
}

impl Dgp {
    pub fn name(self) -> &'static str {
        match self {
            Dgp::Dgp1 => "dgp1",
            Dgp::Dgp2 => "dgp2",
            Dgp::Dgp3 => "dgp3",
            Dgp::IidUniform => "iid_uniform",
        }
    }

    /// Number of series, `None` when set by the copula.
    pub fn dimension(self) -> Option<usize> {
        match self {
            Dgp::Dgp1 | Dgp::Dgp2 => Some(2),
            Dgp::Dgp3 => Some(3),
            Dgp::IidUniform => None,
        }
    }

    fn recursive(self) -> bool {
        self != Dgp::IidUniform
    }
}

fn normalize_rows(q: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    q.into_iter()
        .map(|r| {
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

/// The three-regime model of the first DGP series. Its transition rows are
/// given to six decimals and are renormalized to sum to one.
pub fn dgp1_first_series(innovation: Innovation) -> GaussianHmmSpec {
    let mut s = GaussianHmmSpec::intercept_only(
        &[0.002158, 0.004192, 0.001306],
        &[0.026689, 0.016850, 0.008872],
        normalize_rows(vec![
            vec![0.969080, 0.030912, 0.000008],
            vec![0.000233, 0.169373, 0.830394],
            vec![0.025170, 0.859641, 0.115189],
        ]),
    );
    s.innovation = innovation;
    s
}

/// The two-regime model of the second DGP series.
pub fn dgp1_second_series(innovation: Innovation) -> GaussianHmmSpec {
    let mut s = GaussianHmmSpec::intercept_only(
        &[0.000759, 0.000908],
        &[0.029993, 0.014038],
        normalize_rows(vec![vec![0.974388, 0.025612], vec![0.006381, 0.993619]]),
    );
    s.innovation = innovation;
    s
}

/// `X_t ~ Poisson(1 + 0.1 X_{t-1})`.
pub fn poisson_autoregression() -> IngarchSpec {
    IngarchSpec::new(1.0, vec![0.1], vec![]).expect("valid parameters")
}

/// `X_t = 0.5 X_{t-1} + ε_t`, `ε_t ~ N(0, 1)`.
pub fn gaussian_ar1() -> GaussianHmmSpec {
    GaussianHmmSpec {
        j: 1,
        p: 1,
        phi: vec![vec![0.5]],
        theta: vec![vec![0.0]],
        sigma: vec![1.0],
        q: vec![vec![1.0]],
        zero_inflated: false,
        innovation: Innovation::Gaussian,
        initial: None,
        fit: None,
    }
}

/// Models of each series of a DGP (empty for `IidUniform`).
pub fn dgp_models(dgp: Dgp, innovation: Innovation) -> Vec<ModelSpec> {
    match dgp {
        Dgp::Dgp1 => vec![
            ModelSpec::GaussianHmm(dgp1_first_series(innovation)),
            ModelSpec::GaussianHmm(dgp1_second_series(innovation)),
        ],
        Dgp::Dgp2 => vec![
            ModelSpec::Ingarch(poisson_autoregression()),
            ModelSpec::GaussianHmm(gaussian_ar1()),
        ],
        Dgp::Dgp3 => vec![
            ModelSpec::Ingarch(poisson_autoregression()),
            ModelSpec::GaussianHmm(gaussian_ar1()),
            ModelSpec::GaussianHmm(gaussian_ar1()),
        ],
        Dgp::IidUniform => Vec::new(),
    }
}

/// Settings shared by every replicate of a DGP.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSettings {
    pub dgp: Dgp,
    pub copula: CopulaSpec,
    pub n: usize,
    /// Dependence is injected between `u_t` and the other coordinates at
    /// time `t + lag_shift`.
    pub lag_shift: usize,
    pub innovation: Innovation,
    pub burn_in: usize,
    pub seed: u64,
}

/// Random generator of the data of replicate `r`.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Seed of the randomization plan of replicate `r`, drawn from a stream
/// disjoint from the data streams.
pub fn randomization_seed(seed: u64, replicate: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 63) | replicate as u64);
    rng.next_u64()
}

/// Copula uniforms with the lag shift applied: column 0 at time `t` is
/// paired with the other columns at `t + ℓ`; the first `ℓ` entries of those
/// columns are independent uniforms.
pub fn driving_uniforms(copula: &CopulaSpec, len: usize, lag_shift: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    if lag_shift >= len {
        return Err(invalid("lag shift must be smaller than the series length"));
    }
    let joint = sample_copula(copula, len, rng)?;
    if lag_shift == 0 {
        return Ok(joint);
    }
    let d = joint.len();
    let lead = sample_copula(&CopulaSpec::independence(d), lag_shift, rng)?;
    let mut cols = Vec::with_capacity(d);
    cols.push(joint[0].clone());
    for j in 1..d {
        let mut c = lead[j].clone();
        c.extend_from_slice(&joint[j][..len - lag_shift]);
        cols.push(c);
    }
    Ok(cols)
}

/// Series of replicate `r` and their true conditional laws.
pub fn generate_dgp(settings: &DgpSettings, replicate: usize) -> Result<(SeriesPanel, ConditionalDistributionTrace)> {
    let mut copula = settings.copula.clone();
    match (settings.dgp.dimension(), copula.dimension) {
        (Some(d), None) => copula.dimension = Some(d),
        (Some(d), Some(c)) if c != d => {
            return Err(invalid(format!("{} needs a {d}-dimensional copula, got {c}", settings.dgp.name())))
        }
        (None, None) => return Err(invalid("iid_uniform needs the copula dimension")),
        _ => {}
    }
    if settings.n == 0 {
        return Err(invalid("n must be positive"));
    }
    let burn = if settings.dgp.recursive() { settings.burn_in } else { 0 };
    let len = settings.n + burn;
    let mut rng = replicate_rng(settings.seed, replicate);
    let uniforms = driving_uniforms(&copula, len, settings.lag_shift, &mut rng)?;
    let d = uniforms.len();
    let (columns, laws): (Vec<Vec<f64>>, Vec<Vec<ConditionalLaw>>) = if settings.dgp == Dgp::IidUniform {
        let law = ConditionalLaw::single(Component::LocationScale {
            location: 0.0,
            scale: 1.0,
            innovation: Innovation::Uniform,
        });
        uniforms.into_iter().map(|u| (u, vec![law.clone(); len])).unzip()
    } else {
        dgp_models(settings.dgp, settings.innovation)
            .iter()
            .zip(&uniforms)
            .map(|(m, u)| {
                let (x, g) = m.simulate(u, None, 0.0)?;
                Ok((x[burn..].to_vec(), g[burn..].to_vec()))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip()
    };
    let labels = (1..=d).map(|j| format!("X{j}")).collect();
    Ok((
        SeriesPanel::new(columns, labels)?,
        ConditionalDistributionTrace::from_series(laws)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::ConditionalDistribution;
    use crate::models::hmm::validate_transition;
    use crate::simulate::copula::CopulaFamily;

    fn settings(dgp: Dgp) -> DgpSettings {
        DgpSettings {
            dgp,
            copula: CopulaSpec {
                family: CopulaFamily::Independence,
                kendall_tau: None,
                dimension: None,
            },
            n: 50,
            lag_shift: 0,
            innovation: Innovation::Gaussian,
            burn_in: 500,
            seed: 3,
        }
    }

    #[test]
    fn table_rows_are_renormalized() {
        validate_transition(&dgp1_first_series(Innovation::Gaussian).q, 3).unwrap();
        validate_transition(&dgp1_second_series(Innovation::Gaussian).q, 2).unwrap();
    }

    #[test]
    fn dgp2_shapes_and_laws() {
        let (panel, trace) = generate_dgp(&settings(Dgp::Dgp2), 0).unwrap();
        assert_eq!((panel.n(), panel.d()), (50, 2));
        for t in 1..50 {
            let x = panel.column(0);
            assert_eq!(x[t].fract(), 0.0);
            // λ_t = 1 + 0.1 X_{t-1}
            let lambda = 1.0 + 0.1 * x[t - 1];
            assert!((trace.law(t, 0).atom(0.0) - (-lambda).exp()).abs() < 1e-12);
            // X2 is AR(1) with unit innovations
            let y = panel.column(1);
            assert!((trace.law(t, 1).cdf(0.5 * y[t - 1]) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_replicate() {
        let s = settings(Dgp::Dgp1);
        let a = generate_dgp(&s, 4).unwrap().0;
        let b = generate_dgp(&s, 4).unwrap().0;
        let c = generate_dgp(&s, 5).unwrap().0;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lag_shift_pairs_future_values() {
        let copula = CopulaSpec::new(CopulaFamily::Tentmap, None, 2).unwrap();
        let mut rng = replicate_rng(1, 0);
        let u = driving_uniforms(&copula, 20, 2, &mut rng).unwrap();
        for t in 0..18 {
            assert!((u[1][t + 2] - (1.0 - (2.0 * u[0][t] - 1.0).abs())).abs() < 1e-15);
        }
    }
}
