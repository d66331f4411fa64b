//! Randomized probability integral transform, the conditional-expectation
//! J-transform and averaging over independent randomizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{ConditionalDistribution, ConditionalDistributionTrace};
use crate::domain::{ErrorMatrix, GeneralizedErrorPanel, SeriesPanel};
use crate::error::{invalid, Error, Result};

/// Masses at or below this are treated as continuity points.
pub const ATOM_EPS: f64 = 1e-12;

/// Number and seeding of the randomizations `V^{(k)}_{jt}`.
///
/// Each `(k, j)` pair owns a ChaCha8 stream keyed by `seed`; within a stream
/// the variate for time `t` sits at a fixed word position, so any subset of
/// `(k, t, j)` can be regenerated independently and in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizationPlan {
    pub m: usize,
    pub seed: u64,
}

impl RandomizationPlan {
    pub fn new(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("the number of randomizations must be at least 1"));
        }
        Ok(Self { m, seed })
    }

    fn stream(&self, k: usize, j: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((k as u64) << 32) | j as u64);
        rng
    }

    /// `V^{(k)}_{jt}` for `t = 0..n`.
    pub fn variates(&self, k: usize, j: usize, n: usize) -> Vec<f64> {
        let mut rng = self.stream(k, j);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    /// A single variate `V^{(k)}_{jt}`; equal to `variates(k, j, n)[t]`.
    pub fn variate(&self, k: usize, j: usize, t: usize) -> f64 {
        let mut rng = self.stream(k, j);
        // one f64 consumes one u64, i.e. two 32-bit words
        rng.set_word_pos(2 * t as u128);
        rng.random::<f64>()
    }
}

/// `G(x-) + v·ΔG(x)`, or `G(x)` when `x` is not an atom.
pub fn pit_value<G: ConditionalDistribution + ?Sized>(g: &G, x: f64, v: f64) -> f64 {
    let atom = g.atom(x);
    let u = if atom > ATOM_EPS {
        g.cdf_left(x) + v * atom
    } else {
        g.cdf(x)
    };
    u.clamp(0.0, 1.0)
}

fn pit_column(
    values: &[f64],
    trace: &ConditionalDistributionTrace,
    j: usize,
    variates: &[f64],
) -> Result<Vec<f64>> {
    values
        .iter()
        .zip(variates)
        .enumerate()
        .map(|(t, (&x, &v))| {
            let g = trace.law(t, j);
            let (c, l, a) = (g.cdf(x), g.cdf_left(x), g.atom(x));
            if !c.is_finite() || !l.is_finite() || !a.is_finite() {
                return Err(Error::ModelEvaluation {
                    t,
                    series: j,
                    message: format!("non-finite cdf at x = {x}"),
                });
            }
            Ok(pit_value(g, x, v))
        })
        .collect()
}

/// Generalized errors `U^{(k)}_{jt}` for every randomization `k`.
pub fn randomized_pit(
    series: &SeriesPanel,
    trace: &ConditionalDistributionTrace,
    plan: &RandomizationPlan,
) -> Result<GeneralizedErrorPanel> {
    if plan.m == 0 {
        return Err(invalid("the number of randomizations must be at least 1"));
    }
    let (n, d) = (series.n(), series.d());
    if trace.n() != n || trace.d() != d {
        return Err(invalid(format!(
            "trace covers {}×{} entries, series is {n}×{d}",
            trace.n(),
            trace.d()
        )));
    }
    let replicates = (0..plan.m)
        .into_par_iter()
        .map(|k| {
            let columns = (0..d)
                .map(|j| pit_column(series.column(j), trace, j, &plan.variates(k, j, n)))
                .collect::<Result<Vec<_>>>()?;
            ErrorMatrix::new(columns)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralizedErrorPanel::new(replicates, plan.seed)
}

fn clamp_unit(s: f64) -> f64 {
    s.clamp(0.0, 1.0)
}

/// `E[1{U <= u} | X = x]`: `D((u - G(x-))/ΔG(x))` at atoms, `1{G(x) <= u}`
/// otherwise.
pub fn j_transform<G: ConditionalDistribution + ?Sized>(g: &G, x: f64, u: f64) -> f64 {
    let atom = g.atom(x);
    if atom > ATOM_EPS {
        clamp_unit((u - g.cdf_left(x)) / atom)
    } else {
        f64::from(u8::from(g.cdf(x) <= u))
    }
}

/// `χ_0(u, v)`: non-zero only when `u` and `v` fall in the same atom `x`,
/// where it equals `(u∧v - G(x-))(G(x) - u∨v)/ΔG(x)`.
pub fn chi0<G: ConditionalDistribution + ?Sized>(g: &G, u: f64, v: f64) -> f64 {
    let x = g.quantile(u);
    if g.quantile(v) != x {
        return 0.0;
    }
    let atom = g.atom(x);
    if atom <= ATOM_EPS {
        return 0.0;
    }
    let (lo, hi) = (u.min(v), u.max(v));
    ((lo - g.cdf_left(x)) * (g.cdf(x) - hi) / atom).max(0.0)
}

/// Values that can be averaged elementwise across randomizations.
pub trait Averageable: Sized {
    fn average(items: &[Self]) -> Self;
}

impl Averageable for f64 {
    fn average(items: &[Self]) -> Self {
        items.iter().sum::<f64>() / items.len() as f64
    }
}

impl Averageable for Vec<f64> {
    fn average(items: &[Self]) -> Self {
        let len = items[0].len();
        (0..len)
            .map(|i| items.iter().map(|v| v[i]).sum::<f64>() / items.len() as f64)
            .collect()
    }
}

/// Result of averaging a statistic over `M` randomizations.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizationAverage<T> {
    pub value: T,
    pub m: usize,
    /// False when `M > 1`: the averaged statistic no longer has the
    /// distribution-free null law of a single randomization.
    pub distribution_free: bool,
}

/// Evaluates `statistic` on every replicate of `panel` and averages.
pub fn average_over_randomizations<T, F>(
    statistic: F,
    panel: &GeneralizedErrorPanel,
) -> Result<RandomizationAverage<T>>
where
    T: Averageable + Send,
    F: Fn(&ErrorMatrix) -> Result<T> + Sync,
{
    let m = panel.m();
    if m == 0 {
        return Err(invalid("cannot average over zero randomizations"));
    }
    let values = panel
        .replicates()
        .par_iter()
        .map(&statistic)
        .collect::<Result<Vec<T>>>()?;
    Ok(RandomizationAverage {
        value: T::average(&values),
        m,
        distribution_free: m == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{Component, ConditionalLaw};

    fn bernoulli(p0: f64) -> ConditionalLaw {
        ConditionalLaw::single(Component::bernoulli_zero_mass(p0))
    }

    #[test]
    fn bernoulli_chain_example() {
        let g = bernoulli(0.6);
        assert!((pit_value(&g, 0.0, 0.5) - 0.30).abs() < 1e-15);
    }

    #[test]
    fn continuous_ignores_variate() {
        let g = ConditionalLaw::gaussian(0.0, 1.0);
        for v in [0.0, 0.3, 0.999] {
            assert_eq!(pit_value(&g, 0.4, v), g.cdf(0.4));
        }
    }

    #[test]
    fn poisson_left_limit() {
        let g = ConditionalLaw::poisson(1.0);
        assert!((pit_value(&g, 1.0, 0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((pit_value(&g, 1.0, 0.0) - 0.367_879).abs() < 1e-6);
    }

    #[test]
    fn j_transform_examples() {
        let c = ConditionalLaw::gaussian(0.0, 1.0);
        let x = crate::special::normal_quantile(0.4);
        assert_eq!(j_transform(&c, x, 0.7), 1.0);
        let b = bernoulli(0.5);
        assert!((j_transform(&b, 0.0, 0.25) - 0.5).abs() < 1e-15);
        assert_eq!(j_transform(&b, 0.0, 1.0), 1.0);
        assert_eq!(j_transform(&b, 1.0, 1.0), 1.0);
        assert_eq!(j_transform(&c, 3.0, 1.0), 1.0);
    }

    #[test]
    fn chi0_examples() {
        let c = ConditionalLaw::gaussian(0.0, 1.0);
        assert_eq!(chi0(&c, 0.2, 0.4), 0.0);
        let b = bernoulli(0.5);
        assert!((chi0(&b, 0.2, 0.4) - 0.04).abs() < 1e-15);
        assert_eq!(chi0(&b, 0.2, 0.7), 0.0);
        // atom spanning [0.3, 0.8]
        let g = ConditionalLaw::single(
            Component::discrete(&[(-1.0, 0.3), (0.0, 0.5), (1.0, 0.2)]).unwrap(),
        );
        assert!((chi0(&g, 0.5, 0.5) - 0.12).abs() < 1e-15);
    }

    #[test]
    fn plan_streams_are_order_insensitive() {
        let plan = RandomizationPlan::new(3, 42).unwrap();
        let col = plan.variates(2, 1, 50);
        for t in [0, 7, 49] {
            assert_eq!(plan.variate(2, 1, t), col[t]);
        }
        assert_ne!(plan.variates(0, 1, 5), plan.variates(1, 1, 5));
        assert_ne!(plan.variates(0, 0, 5), plan.variates(0, 1, 5));
        assert!(RandomizationPlan::new(0, 1).is_err());
    }

    #[test]
    fn averaging() {
        let series = SeriesPanel::from_columns(vec![vec![0.0, 1.0, 0.0, 1.0], vec![0.1, -0.2, 0.3, 0.0]]).unwrap();
        let laws = vec![
            vec![bernoulli(0.4); 4],
            vec![ConditionalLaw::gaussian(0.0, 1.0); 4],
        ];
        let trace = ConditionalDistributionTrace::new(laws).unwrap();
        let panel = randomized_pit(&series, &trace, &RandomizationPlan::new(5, 9).unwrap()).unwrap();
        let one = average_over_randomizations(
            |e: &ErrorMatrix| Ok(e.column(1).to_vec()),
            &panel,
        )
        .unwrap();
        assert!(!one.distribution_free);
        // continuous column: every replicate identical
        assert_eq!(one.value, panel.replicate(0).column(1).to_vec());
        let mean0 = average_over_randomizations(|e: &ErrorMatrix| Ok(e.column(0)[0]), &panel).unwrap();
        let direct: f64 = (0..5).map(|k| panel.replicate(k).column(0)[0]).sum::<f64>() / 5.0;
        assert!((mean0.value - direct).abs() < 1e-15);
        let single = randomized_pit(&series, &trace, &RandomizationPlan::new(1, 9).unwrap()).unwrap();
        let avg = average_over_randomizations(|e: &ErrorMatrix| Ok(e.column(0).to_vec()), &single).unwrap();
        assert!(avg.distribution_free);
        assert_eq!(avg.value, single.errors().column(0).to_vec());
    }
}
