//! The limiting null law `ξ_d = Σ λ_{i_1..i_d} Z²` of a single
//! Cramér–von Mises term, with `λ = (π^{2d} (i_1⋯i_d)²)^{-1}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use super::imhof::{Pchip, WeightedChiSquare};
use super::xi_table_data as table_data;
use crate::error::{invalid, Result};
use crate::special::zeta_even_over_pi_power;

/// Default per-coordinate truncation for `d = 2` and `d = 3`.
pub fn default_truncation(d: usize) -> usize {
    if d == 2 {
        50
    } else {
        20
    }
}

/// `Σ_{i > I} i^{-s}` by direct summation plus an Euler–Maclaurin tail.
fn zeta_tail(s: i32, from: usize) -> f64 {
    let big = (from + 2000) as f64;
    let direct: f64 = ((from + 1)..(from + 2000)).map(|i| (i as f64).powi(-s)).sum();
    let sf = f64::from(s);
    direct + big.powf(1.0 - sf) / (sf - 1.0) + 0.5 * big.powi(-s) + sf * big.powi(-s - 1) / 12.0
}

/// `ξ_d` truncated to indices `i_k <= I`, with the remaining eigenvalues
/// replaced by one scaled chi-square term matching their mean and variance.
#[derive(Debug, Clone)]
pub struct XiDistribution {
    d: usize,
    truncation: usize,
    /// Distinct eigenvalues with multiplicities, decreasing.
    groups: Vec<(f64, u64)>,
    tail_mass: f64,
    tail_square_sum: f64,
    law: WeightedChiSquare,
}

impl XiDistribution {
    pub fn new(d: usize) -> Result<Self> {
        Self::with_truncation(d, default_truncation(d))
    }

    pub fn with_truncation(d: usize, truncation: usize) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(invalid(format!("ξ_d is available for d ∈ {{2,3}}, got {d}")));
        }
        if truncation == 0 {
            return Err(invalid("truncation must be positive"));
        }
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        let mut idx = vec![1usize; d];
        loop {
            let p: u64 = idx.iter().map(|&i| i as u64).product();
            *counts.entry(p).or_default() += 1;
            let mut c = 0;
            loop {
                if c == d {
                    break;
                }
                idx[c] += 1;
                if idx[c] <= truncation {
                    break;
                }
                idx[c] = 1;
                c += 1;
            }
            if c == d {
                break;
            }
        }
        let pi2d = PI.powi(2 * d as i32);
        let groups: Vec<(f64, u64)> = counts
            .into_iter()
            .map(|(p, h)| (1.0 / (pi2d * (p as f64) * (p as f64)), h))
            .collect();

        // omitted sums Σ λ^r for r = 1, 2 from ζ(2r)^d - S_I(2r)^d
        let omitted = |r: i32| {
            let tail = zeta_tail(2 * r, truncation);
            let full = zeta_even_over_pi_power(r as usize) * PI.powi(2 * r);
            let partial = full - tail;
            let mut geo = 0.0;
            for k in 0..d {
                geo += full.powi(k as i32) * partial.powi((d - 1 - k) as i32);
            }
            tail * geo / PI.powi(2 * r * d as i32)
        };
        let tail_mass = omitted(1);
        let tail_square_sum = omitted(2);

        let mut terms: Vec<(f64, f64)> = groups.iter().map(|&(l, h)| (l, h as f64)).collect();
        if tail_mass > 0.0 && tail_square_sum > 0.0 {
            let c = tail_square_sum / tail_mass;
            let nu = tail_mass * tail_mass / tail_square_sum;
            terms.push((c, nu));
        }
        Ok(Self {
            d,
            truncation,
            groups,
            tail_mass,
            tail_square_sum,
            law: WeightedChiSquare::new(terms),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Distinct retained eigenvalues `(λ, multiplicity)`.
    pub fn eigenvalue_groups(&self) -> &[(f64, u64)] {
        &self.groups
    }

    /// Mass `Σλ` of the eigenvalues beyond the truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `Σλ²` beyond the truncation.
    pub fn tail_square_sum(&self) -> f64 {
        self.tail_square_sum
    }

    /// `Σλ` over retained and omitted eigenvalues; equals `6^{-d}`.
    pub fn eigenvalue_sum(&self) -> f64 {
        self.groups.iter().map(|&(l, h)| l * h as f64).sum::<f64>() + self.tail_mass
    }

    pub fn mean(&self) -> f64 {
        self.law.mean()
    }

    /// The weighted chi-square law used for inversion.
    pub fn law(&self) -> &WeightedChiSquare {
        &self.law
    }

    /// `P(ξ_d > s)` by direct characteristic-function inversion.
    pub fn tail_probability_exact(&self, s: f64) -> f64 {
        self.law.tail_probability(s)
    }
}

/// Exact cumulants `κ_r(ξ_d) = 2^{r-1}(r-1)! (ζ(2r)/π^{2r})^d`, `r = 1..=6`.
pub fn xi_cumulants(d: usize) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, slot) in out.iter_mut().enumerate() {
        let r = i + 1;
        let fact: f64 = (1..r).map(|k| k as f64).product();
        *slot = 2f64.powi(r as i32 - 1) * fact * zeta_even_over_pi_power(r).powi(d as i32);
    }
    out
}

/// Interpolation table for `ln P(ξ_d > s)`.
#[derive(Debug)]
pub struct XiTable {
    dist: XiDistribution,
    log_tail: Pchip,
}

const TABLE_POINTS: usize = 241;
/// The table covers tail probabilities down to about this value.
const TABLE_FLOOR: f64 = 1e-10;

fn grid(s_max: f64) -> Vec<f64> {
    (0..TABLE_POINTS)
        .map(|i| s_max * (i as f64 / (TABLE_POINTS - 1) as f64).powi(2))
        .collect()
}

impl XiTable {
    pub fn build(dist: XiDistribution) -> Self {
        let law = dist.law();
        // leading-term bound locates the far end of the table
        let mut s_max = law.mean();
        while law.leading_tail(s_max) > TABLE_FLOOR * 1e-2 {
            s_max *= 1.25;
        }
        while s_max > law.mean() && dist.tail_probability_exact(s_max) < TABLE_FLOOR {
            s_max *= 0.95;
        }
        let ys: Vec<f64> = grid(s_max)
            .iter()
            .map(|&s| dist.tail_probability_exact(s).max(1e-300).ln())
            .collect();
        Self::from_values(dist, s_max, ys)
    }

    /// Table from precomputed `ln P(ξ_d > s)` on the grid
    /// `s_i = s_max (i/N)²`, denser near zero where the law is steep.
    pub fn from_values(dist: XiDistribution, s_max: f64, log_tail: Vec<f64>) -> Self {
        Self {
            dist,
            log_tail: Pchip::new(grid(s_max), log_tail),
        }
    }

    pub fn s_max(&self) -> f64 {
        self.log_tail.x_max()
    }

    /// Tabulated `ln P(ξ_d > s)` values.
    pub fn log_tail_values(&self) -> &[f64] {
        self.log_tail.y()
    }

    pub fn distribution(&self) -> &XiDistribution {
        &self.dist
    }

    pub fn tail_probability(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let s_max = self.log_tail.x_max();
        if s <= s_max {
            return self.log_tail.eval(s).exp().clamp(0.0, 1.0);
        }
        // beyond the table the law behaves like its leading term
        let law = self.dist.law();
        let ratio = law.leading_tail(s) / law.leading_tail(s_max);
        (self.log_tail.y_last().exp() * ratio).clamp(0.0, 1.0)
    }

    /// `q` with `P(ξ_d > q) = alpha`.
    pub fn quantile(&self, alpha: f64) -> f64 {
        let alpha = alpha.clamp(1e-300, 1.0);
        let (mut lo, mut hi) = (0.0, self.dist.mean());
        while self.tail_probability(hi) > alpha {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.tail_probability(mid) > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

static TABLE_D2: OnceLock<XiTable> = OnceLock::new();
static TABLE_D3: OnceLock<XiTable> = OnceLock::new();

/// Shared table for the default truncation.
/// Tables are precomputed with [`XiTable::build`]; a test checks them.
pub fn xi_table(d: usize) -> Result<&'static XiTable> {
    let cell = match d {
        2 => &TABLE_D2,
        3 => &TABLE_D3,
        _ => return Err(invalid(format!("ξ_d is available for d ∈ {{2,3}}, got {d}"))),
    };
    Ok(cell.get_or_init(|| {
        let dist = XiDistribution::new(d).expect("valid dimension");
        let (s_max, values) = if d == 2 {
            (table_data::XI2_S_MAX, &table_data::XI2_LOG_TAIL[..])
        } else {
            (table_data::XI3_S_MAX, &table_data::XI3_LOG_TAIL[..])
        };
        XiTable::from_values(dist, s_max, values.to_vec())
    }))
}

/// `P(ξ_d > s)`.
pub fn xi_tail_probability(d: usize, s: f64) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(invalid(format!("ξ tail requested at s = {s}")));
    }
    Ok(xi_table(d)?.tail_probability(s))
}

/// Upper `alpha` quantile of `ξ_d`.
pub fn xi_quantile(d: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(xi_table(d)?.quantile(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_sum_to_mean() {
        for d in [2, 3] {
            for i in [5, default_truncation(d)] {
                let xi = XiDistribution::with_truncation(d, i).unwrap();
                let target = 6f64.powi(-(d as i32));
                assert!((xi.eigenvalue_sum() - target).abs() < 1e-12);
                assert!((xi.mean() - target).abs() < 1e-12);
                let var = 2.0 * 90f64.powi(-(d as i32));
                assert!((xi.law().cumulant(2) - var).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cumulant_values() {
        let k = xi_cumulants(2);
        assert!((k[0] - 1.0 / 36.0).abs() < 1e-16);
        assert!((k[1] - 2.0 / 8100.0).abs() < 1e-18);
        assert!((xi_cumulants(3)[0] - 1.0 / 216.0).abs() < 1e-16);
    }

    #[test]
    fn tail_is_monotone_and_starts_at_one() {
        for d in [2, 3] {
            assert_eq!(xi_tail_probability(d, 0.0).unwrap(), 1.0);
            let mean = 6f64.powi(-(d as i32));
            let mut prev = 1.0;
            for i in 1..400 {
                let p = xi_tail_probability(d, mean * i as f64 * 0.05).unwrap();
                assert!(p <= prev + 1e-12);
                prev = p;
            }
            assert!(prev < 1e-12);
        }
        assert!(xi_tail_probability(2, -1.0).is_err());
    }

    #[test]
    fn shipped_table_matches_fresh_build() {
        for d in [2, 3] {
            let fresh = XiTable::build(XiDistribution::new(d).unwrap());
            let shipped = xi_table(d).unwrap();
            assert!((fresh.s_max() - shipped.s_max()).abs() < 1e-15);
            for (a, b) in fresh.log_tail_values().iter().zip(shipped.log_tail_values()) {
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "d={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn table_matches_direct_inversion() {
        for d in [2, 3] {
            let table = xi_table(d).unwrap();
            let mean = 6f64.powi(-(d as i32));
            for f in [0.3, 0.77, 1.0, 1.9, 3.3, 6.1] {
                let s = f * mean;
                let a = table.tail_probability(s);
                let b = table.distribution().tail_probability_exact(s);
                assert!((a - b).abs() < 2e-5 * b.max(1e-3), "d={d} s={s} {a} {b}");
            }
        }
    }

    #[test]
    fn truncation_insensitive() {
        // a much coarser truncation with the moment-matched tail barely moves p-values
        let coarse = XiDistribution::with_truncation(2, 10).unwrap();
        let fine = XiDistribution::new(2).unwrap();
        for s in [0.02, 0.05, 0.1, 0.2] {
            let a = coarse.tail_probability_exact(s);
            let b = fine.tail_probability_exact(s);
            assert!((a - b).abs() < 2e-4, "{s}: {a} vs {b}");
        }
    }

    #[test]
    fn monte_carlo_oracle() {
        // ξ_d simulated from its series with i.i.d. normals, index by index
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for (d, cut) in [(2usize, 40usize), (3, 12)] {
            let reps = 20_000;
            let pi2d = PI.powi(2 * d as i32);
            let weights: Vec<f64> = if d == 2 {
                (1..=cut)
                    .flat_map(|i| (1..=cut).map(move |j| 1.0 / (pi2d * ((i * j) as f64).powi(2))))
                    .collect()
            } else {
                (1..=cut)
                    .flat_map(|i| {
                        (1..=cut).flat_map(move |j| {
                            (1..=cut).map(move |k| 1.0 / (pi2d * ((i * j * k) as f64).powi(2)))
                        })
                    })
                    .collect()
            };
            // the omitted eigenvalues contribute their mean
            let rest = 6f64.powi(-(d as i32)) - weights.iter().sum::<f64>();
            let draws: Vec<f64> = (0..reps)
                .map(|_| {
                    rest + weights
                        .iter()
                        .map(|w| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            w * z * z
                        })
                        .sum::<f64>()
                })
                .collect();
            let mean = 6f64.powi(-(d as i32));
            for f in [0.8, 1.5, 2.5, 4.0] {
                let s = f * mean;
                let emp = draws.iter().filter(|&&x| x > s).count() as f64 / reps as f64;
                let p = xi_tail_probability(d, s).unwrap();
                let se = (p * (1.0 - p) / reps as f64).sqrt();
                assert!((emp - p).abs() < 4.0 * se + 1e-3, "d={d} s={s}: mc {emp} vs {p}");
            }
        }
    }
}
