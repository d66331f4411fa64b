//! Conditional distributions `G_t` and per-time-step traces.
//!
//! Every model adapter produces, for each time step, a [`ConditionalLaw`]: a
//! finite mixture of point masses, location-scale continuous laws, Poisson
//! laws and finite discrete laws. This covers Gaussian HMM predictive
//! mixtures (with an optional zero point mass), Poisson HMMs and INGARCH.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::{normal_cdf, normal_pdf, normal_quantile, poisson_cdf, poisson_pmf};

/// The conditional cdf interface consumed by the probability integral
/// transform.
pub trait ConditionalDistribution {
    /// `G(y) = P(X <= y)`.
    fn cdf(&self, y: f64) -> f64;
    /// `G(y-) = P(X < y)`.
    fn cdf_left(&self, y: f64) -> f64;
    /// `ΔG(y) = P(X = y)`.
    fn atom(&self, y: f64) -> f64 {
        (self.cdf(y) - self.cdf_left(y)).max(0.0)
    }
    /// Generalized inverse `inf{y : G(y) >= u}`.
    fn quantile(&self, u: f64) -> f64;
}

/// Standardized innovation law of a location-scale component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    #[default]
    Gaussian,
    /// `1 - exp(-(x + 1))` on `x >= -1`.
    CenteredExponential,
    /// `1 - (x + 6/5)^{-6}` on `x >= -1/5`.
    CenteredPareto,
    /// Uniform on `[0, 1]`.
    Uniform,
}

impl Innovation {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Innovation::Gaussian => normal_cdf(x),
            Innovation::CenteredExponential => {
                if x <= -1.0 {
                    0.0
                } else {
                    -(-(x + 1.0)).exp_m1()
                }
            }
            Innovation::CenteredPareto => {
                if x <= -0.2 {
                    0.0
                } else {
                    1.0 - (x + 1.2).powi(-6)
                }
            }
            Innovation::Uniform => x.clamp(0.0, 1.0),
        }
    }

    pub fn pdf(self, x: f64) -> f64 {
        match self {
            Innovation::Gaussian => normal_pdf(x),
            Innovation::CenteredExponential => {
                if x < -1.0 {
                    0.0
                } else {
                    (-(x + 1.0)).exp()
                }
            }
            Innovation::CenteredPareto => {
                if x < -0.2 {
                    0.0
                } else {
                    6.0 * (x + 1.2).powi(-7)
                }
            }
            Innovation::Uniform => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn quantile(self, u: f64) -> f64 {
        match self {
            Innovation::Gaussian => normal_quantile(u),
            Innovation::CenteredExponential => -(-u).ln_1p() - 1.0,
            Innovation::CenteredPareto => (1.0 - u).powf(-1.0 / 6.0) - 1.2,
            Innovation::Uniform => u,
        }
    }
}

/// One mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    PointMass {
        at: f64,
    },
    LocationScale {
        location: f64,
        scale: f64,
        innovation: Innovation,
    },
    Poisson {
        lambda: f64,
    },
    /// Finite support, sorted ascending, with cumulative probabilities.
    Discrete {
        support: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

impl Component {
    pub fn gaussian(mean: f64, sd: f64) -> Self {
        Component::LocationScale {
            location: mean,
            scale: sd,
            innovation: Innovation::Gaussian,
        }
    }

    /// Finite discrete law from (value, probability) pairs.
    pub fn discrete(points: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.to_vec();
        if pts.is_empty() {
            return Err(invalid("discrete law without support points"));
        }
        if pts.iter().any(|(x, p)| !x.is_finite() || !(*p >= 0.0)) {
            return Err(invalid("discrete law with invalid point or probability"));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pts.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("discrete probabilities sum to {total}")));
        }
        let mut support: Vec<f64> = Vec::with_capacity(pts.len());
        let mut cumulative: Vec<f64> = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        for (x, p) in pts {
            acc += p;
            if support.last() == Some(&x) {
                *cumulative.last_mut().unwrap() = acc;
            } else {
                support.push(x);
                cumulative.push(acc);
            }
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Component::Discrete {
            support,
            cumulative,
        })
    }

    /// Bernoulli law on `{0, 1}` with `P(X = 0) = p0`.
    pub fn bernoulli_zero_mass(p0: f64) -> Self {
        Component::Discrete {
            support: vec![0.0, 1.0],
            cumulative: vec![p0, 1.0],
        }
    }

    fn is_continuous(&self) -> bool {
        matches!(self, Component::LocationScale { .. })
    }

    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            Component::PointMass { at } => f64::from(u8::from(y >= *at)),
            Component::LocationScale {
                location,
                scale,
                innovation,
            } => innovation.cdf((y - location) / scale),
            Component::Poisson { lambda } => {
                if y < 0.0 {
                    0.0
                } else {
                    poisson_cdf(y.floor(), *lambda)
                }
            }
            Component::Discrete {
                support,
                cumulative,
            } => {
                let idx = support.partition_point(|s| *s <= y);
                if idx == 0 {
                    0.0
                } else {
                    cumulative[idx - 1]
                }
            }
        }
    }

    pub fn cdf_left(&self, y: f64) -> f64 {
        match self {
            Component::PointMass { at } => f64::from(u8::from(y > *at)),
            Component::LocationScale { .. } => self.cdf(y),
            Component::Poisson { lambda } => {
                if y <= 0.0 {
                    0.0
                } else {
                    // largest integer strictly below y
                    let k = y.ceil() - 1.0;
                    poisson_cdf(k, *lambda)
                }
            }
            Component::Discrete {
                support,
                cumulative,
            } => {
                let idx = support.partition_point(|s| *s < y);
                if idx == 0 {
                    0.0
                } else {
                    cumulative[idx - 1]
                }
            }
        }
    }

    pub fn atom(&self, y: f64) -> f64 {
        match self {
            Component::PointMass { at } => f64::from(u8::from(y == *at)),
            Component::LocationScale { .. } => 0.0,
            Component::Poisson { lambda } => {
                if y >= 0.0 && y.fract() == 0.0 {
                    poisson_pmf(y, *lambda)
                } else {
                    0.0
                }
            }
            Component::Discrete {
                support,
                cumulative,
            } => match support.iter().position(|s| *s == y) {
                Some(0) => cumulative[0],
                Some(i) => cumulative[i] - cumulative[i - 1],
                None => 0.0,
            },
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Component::PointMass { at } => *at,
            Component::LocationScale {
                location,
                scale,
                innovation,
            } => location + scale * innovation.quantile(u),
            Component::Poisson { lambda } => {
                if u <= 0.0 {
                    return 0.0;
                }
                let mut k = 0.0;
                let mut acc = poisson_pmf(0.0, *lambda);
                // fall back to the incomplete gamma once the running sum saturates
                while acc < u {
                    k += 1.0;
                    let p = poisson_pmf(k, *lambda);
                    acc += p;
                    if p == 0.0 && k > *lambda {
                        acc = poisson_cdf(k, *lambda);
                        if acc < u {
                            // u numerically indistinguishable from 1
                            return k;
                        }
                    }
                }
                k
            }
            Component::Discrete {
                support,
                cumulative,
            } => {
                let idx = cumulative.partition_point(|c| *c < u);
                support[idx.min(support.len() - 1)]
            }
        }
    }

    /// Atoms in `[lo, hi]`.
    fn atoms_in(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        match self {
            Component::PointMass { at } => {
                if *at >= lo && *at <= hi {
                    out.push(*at);
                }
            }
            Component::LocationScale { .. } => {}
            Component::Poisson { .. } => {
                let mut k = lo.max(0.0).ceil();
                while k <= hi {
                    out.push(k);
                    k += 1.0;
                }
            }
            Component::Discrete { support, .. } => {
                out.extend(support.iter().copied().filter(|s| *s >= lo && *s <= hi));
            }
        }
    }
}

/// Finite mixture `G = Σ w_i G_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLaw {
    weights: Vec<f64>,
    components: Vec<Component>,
}

impl ConditionalLaw {
    pub fn new(weights: Vec<f64>, components: Vec<Component>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(invalid("mixture weights and components differ in length"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("mixture weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(invalid(format!("mixture weights sum to {total}")));
        }
        Ok(Self {
            weights: weights.iter().map(|w| w / total).collect(),
            components,
        })
    }

    pub fn single(component: Component) -> Self {
        Self {
            weights: vec![1.0],
            components: vec![component],
        }
    }

    pub fn gaussian(mean: f64, sd: f64) -> Self {
        Self::single(Component::gaussian(mean, sd))
    }

    pub fn poisson(lambda: f64) -> Self {
        Self::single(Component::Poisson { lambda })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    fn has_continuous_part(&self) -> bool {
        self.weights
            .iter()
            .zip(&self.components)
            .any(|(w, c)| *w > 0.0 && c.is_continuous())
    }

    fn active(&self) -> impl Iterator<Item = (f64, &Component)> {
        self.weights
            .iter()
            .copied()
            .zip(self.components.iter())
            .filter(|(w, _)| *w > 0.0)
    }
}

impl ConditionalDistribution for ConditionalLaw {
    fn cdf(&self, y: f64) -> f64 {
        self.active()
            .map(|(w, c)| w * c.cdf(y))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    fn cdf_left(&self, y: f64) -> f64 {
        self.active()
            .map(|(w, c)| w * c.cdf_left(y))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    fn atom(&self, y: f64) -> f64 {
        self.active().map(|(w, c)| w * c.atom(y)).sum()
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let active: Vec<(f64, &Component)> = self.active().collect();
        if active.len() == 1 {
            return active[0].1.quantile(u);
        }
        // G(y) >= u whenever every component reaches u, so the mixture
        // quantile lies between the smallest and largest component quantiles.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (_, c) in &active {
            let q = c.quantile(u);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if lo == hi || !lo.is_finite() || !hi.is_finite() {
            return lo;
        }
        let mut atoms = Vec::new();
        for (_, c) in &active {
            c.atoms_in(lo, hi, &mut atoms);
        }
        atoms.sort_by(|a, b| a.total_cmp(b));
        atoms.dedup();

        if !self.has_continuous_part() {
            return atoms
                .into_iter()
                .find(|a| self.cdf(*a) >= u)
                .unwrap_or(hi);
        }

        // bisection keeping G(a) < u <= G(b)
        let (mut a, mut b) = (lo, hi);
        if self.cdf(a) >= u {
            return a;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.cdf(mid) >= u {
                b = mid;
            } else {
                a = mid;
            }
        }
        atoms
            .into_iter()
            .find(|x| *x >= a && *x <= b && self.cdf(*x) >= u)
            .unwrap_or(b)
    }
}

/// Conditional laws `G_{jt}` for every series `j` and time step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalDistributionTrace {
    series: Vec<Vec<ConditionalLaw>>,
}

impl ConditionalDistributionTrace {
    pub fn new(series: Vec<Vec<ConditionalLaw>>) -> Result<Self> {
        if series.is_empty() {
            return Err(invalid("trace without series"));
        }
        let n = series[0].len();
        if series.iter().any(|s| s.len() != n) {
            return Err(invalid("trace series have different lengths"));
        }
        Ok(Self { series })
    }

    pub fn d(&self) -> usize {
        self.series.len()
    }

    pub fn n(&self) -> usize {
        self.series[0].len()
    }

    pub fn law(&self, t: usize, j: usize) -> &ConditionalLaw {
        &self.series[j][t]
    }

    pub fn series(&self, j: usize) -> &[ConditionalLaw] {
        &self.series[j]
    }

    /// Stacks single-series traces.
    pub fn from_series(parts: Vec<Vec<ConditionalLaw>>) -> Result<Self> {
        Self::new(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_inflated() -> ConditionalLaw {
        ConditionalLaw::new(
            vec![0.2, 0.5, 0.3],
            vec![
                Component::PointMass { at: 0.0 },
                Component::gaussian(-0.01, 0.02),
                Component::gaussian(0.005, 0.01),
            ],
        )
        .unwrap()
    }

    #[test]
    fn poisson_law_atoms() {
        let g = ConditionalLaw::poisson(1.0);
        let e = (-1.0f64).exp();
        assert!((g.atom(0.0) - e).abs() < 1e-15);
        assert!((g.cdf(0.0) - e).abs() < 1e-15);
        assert_eq!(g.cdf_left(0.0), 0.0);
        assert!((g.cdf_left(1.0) - e).abs() < 1e-15);
        assert!((g.cdf(0.7) - e).abs() < 1e-15);
        assert_eq!(g.atom(0.5), 0.0);
        assert_eq!(g.quantile(e), 0.0);
        assert_eq!(g.quantile(e + 1e-9), 1.0);
    }

    #[test]
    fn gaussian_has_no_atoms() {
        let g = ConditionalLaw::gaussian(1.0, 2.0);
        for y in [-3.0, 0.0, 1.0, 4.5] {
            assert_eq!(g.atom(y), 0.0);
            assert_eq!(g.cdf(y), g.cdf_left(y));
        }
        assert!((g.quantile(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_inflated_mixture() {
        let g = zero_inflated();
        assert!(g.atom(0.0) >= 0.2 - 1e-15);
        let jump = g.cdf(0.0) - g.cdf_left(0.0);
        assert!((jump - 0.2).abs() < 1e-12);
        // any u inside the jump maps to the atom
        let mid = g.cdf_left(0.0) + 0.1;
        assert_eq!(g.quantile(mid), 0.0);
        for u in [0.01, 0.2, 0.5, 0.9, 0.999] {
            let q = g.quantile(u);
            assert!(g.cdf(q) >= u - 1e-12);
            assert!(g.cdf_left(q) <= u + 1e-12);
        }
    }

    #[test]
    fn cdf_monotone_and_right_continuous() {
        let laws = [
            zero_inflated(),
            ConditionalLaw::poisson(2.3),
            ConditionalLaw::new(
                vec![0.4, 0.6],
                vec![Component::Poisson { lambda: 1.0 }, Component::Poisson { lambda: 6.0 }],
            )
            .unwrap(),
            ConditionalLaw::single(Component::bernoulli_zero_mass(0.3)),
        ];
        for g in &laws {
            let mut prev = 0.0;
            for i in 0..2000 {
                let y = -3.0 + i as f64 * 0.0075;
                let c = g.cdf(y);
                assert!(c >= prev - 1e-15);
                assert!(g.cdf_left(y) <= c + 1e-15);
                assert!((g.cdf(y + 1e-10) - c).abs() < 1e-6);
                prev = c;
            }
            for &y in &[-0.01, 0.0, 0.5, 1.0, 2.0, 5.0] {
                let c = g.cdf(y);
                // only support points below the top of the support
                if g.cdf_left(y) < c || (c > 1e-9 && c < 1.0 - 1e-9) {
                    if c < 1.0 - 1e-9 {
                        assert!(g.quantile(c + 1e-12) >= y, "{y}");
                    }
                }
            }
        }
    }

    #[test]
    fn discrete_component() {
        let c = Component::discrete(&[(2.0, 0.5), (0.0, 0.25), (2.0, 0.0), (5.0, 0.25)]).unwrap();
        assert_eq!(c.cdf(1.0), 0.25);
        assert_eq!(c.cdf_left(2.0), 0.25);
        assert_eq!(c.cdf(2.0), 0.75);
        assert_eq!(c.atom(2.0), 0.5);
        assert_eq!(c.quantile(0.3), 2.0);
        assert_eq!(c.quantile(0.25), 0.0);
    }

    #[test]
    fn innovation_families() {
        assert!((Innovation::CenteredPareto.cdf(0.0) - (1.0 - 1.2f64.powi(-6))).abs() < 1e-15);
        for inn in [
            Innovation::Gaussian,
            Innovation::CenteredExponential,
            Innovation::CenteredPareto,
            Innovation::Uniform,
        ] {
            for u in [0.05, 0.5, 0.95] {
                assert!((inn.cdf(inn.quantile(u)) - u).abs() < 1e-12);
            }
        }
    }
}
