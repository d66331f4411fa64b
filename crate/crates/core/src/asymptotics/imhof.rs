//! Tail probabilities of weighted sums of independent chi-square variables
//! by numerical inversion of the characteristic function.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use statrs::function::gamma::gamma_ur;

/// `Q = Σ_k λ_k χ²_{h_k}` with `λ_k > 0` and (possibly fractional) degrees
/// of freedom `h_k > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedChiSquare {
    terms: Vec<(f64, f64)>,
}

impl WeightedChiSquare {
    /// Terms are `(λ, h)` pairs; they are sorted by decreasing `λ`.
    pub fn new(mut terms: Vec<(f64, f64)>) -> Self {
        terms.retain(|&(l, h)| l > 0.0 && h > 0.0);
        terms.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self { terms }
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// `κ_r = 2^{r-1}(r-1)! Σ h_k λ_k^r`.
    pub fn cumulant(&self, r: u32) -> f64 {
        let fact: f64 = (1..r).map(f64::from).product();
        2f64.powi(r as i32 - 1) * fact * self.terms.iter().map(|(l, h)| h * l.powi(r as i32)).sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.cumulant(1)
    }

    pub fn lambda_max(&self) -> f64 {
        self.terms.first().map(|t| t.0).unwrap_or(0.0)
    }

    /// Degrees of freedom carried by the largest weight.
    pub fn leading_multiplicity(&self) -> f64 {
        let top = self.lambda_max();
        self.terms
            .iter()
            .filter(|t| t.0 == top)
            .map(|t| t.1)
            .sum()
    }

    fn theta_and_log_rho(&self, u: f64, x: f64) -> (f64, f64) {
        let mut theta = 0.0;
        let mut log_rho = 0.0;
        for &(l, h) in &self.terms {
            let lu = l * u;
            theta += h * lu.atan();
            log_rho += h * (lu * lu).ln_1p();
        }
        (0.5 * (theta - x * u), 0.25 * log_rho)
    }

    /// `P(Q > x)` from `1/2 + (1/π) ∫_0^∞ sin θ(u) / (u ρ(u)) du` with
    /// `θ(u) = ½ Σ h_k atan(λ_k u) - ½ x u` and
    /// `ρ(u) = Π (1 + λ_k² u²)^{h_k/4}`.
    pub fn tail_probability(&self, x: f64) -> f64 {
        if x <= 0.0 || self.terms.is_empty() {
            return 1.0;
        }
        let lmax = self.lambda_max();
        // truncation error beyond U is at most 1/(π k ρ(U)), k = Σh/2
        let k: f64 = 0.5 * self.terms.iter().map(|t| t.1).sum::<f64>();
        let target = (1e12 / (PI * k)).ln();
        let mut upper = 1.0 / lmax;
        while self.theta_and_log_rho(upper, x).1 < target && upper < 1e15 / lmax {
            upper *= 1.5;
        }
        let freq = 0.5 * (self.mean() + x);
        let width = (4.0 / lmax).min(2.0 * PI / freq);
        let panels = (upper / width).ceil().max(1.0) as usize;
        let width = upper / panels as f64;
        let rule = GaussLegendre::new(16).expect("valid Gauss-Legendre degree");
        let mut integral = 0.0;
        for p in 0..panels {
            let a = p as f64 * width;
            integral += rule.integrate(a, a + width, |u| {
                let (theta, log_rho) = self.theta_and_log_rho(u, x);
                theta.sin() / (u * log_rho.exp())
            });
        }
        (0.5 + integral / PI).clamp(0.0, 1.0)
    }

    /// Tail of the leading term alone, `P(λ_1 χ²_{h_1} > x)`.
    pub fn leading_tail(&self, x: f64) -> f64 {
        let h = self.leading_multiplicity();
        gamma_ur(0.5 * h, 0.5 * x / self.lambda_max())
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub(crate) struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    pub(crate) fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            m[0] = end(h[0], h[1], delta[0], delta[1]);
            m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self { x, y, m }
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|v| *v <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }

    pub(crate) fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub(crate) fn y(&self) -> &[f64] {
        &self.y
    }

    pub(crate) fn y_last(&self) -> f64 {
        *self.y.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_four() {
        let q = WeightedChiSquare::new(vec![(2.0, 4.0)]);
        // 2χ²_4 > 2x  <=>  χ²_4 > x; P(χ²_4 > 9.487729) = 0.05
        assert!((q.tail_probability(2.0 * 9.487_729_036_781_154) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn two_distinct_weights_match_closed_form() {
        // λ1 χ²_2 + λ2 χ²_2 has tail (λ1 e^{-x/2λ1} - λ2 e^{-x/2λ2})/(λ1 - λ2)
        let (l1, l2) = (1.0, 0.25);
        let q = WeightedChiSquare::new(vec![(l1, 2.0), (l2, 2.0)]);
        for x in [0.1, 1.0, 3.0, 10.0, 25.0] {
            let exact = (l1 * (-x / (2.0 * l1)).exp() - l2 * (-x / (2.0 * l2)).exp()) / (l1 - l2);
            assert!((q.tail_probability(x) - exact).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn pchip_is_monotone() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (-(v * v) / 10.0).exp()).collect();
        let p = Pchip::new(x, y);
        let mut prev = f64::INFINITY;
        for i in 0..=900 {
            let v = p.eval(i as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!((p.eval(3.0) - (-0.9f64).exp()).abs() < 1e-15);
    }
}
