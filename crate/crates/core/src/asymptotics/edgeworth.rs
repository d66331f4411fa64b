//! Edgeworth tail approximation from the first six cumulants.

use crate::special::{normal_cdf, normal_pdf};

/// Probabilists' Hermite polynomials `He_0..He_max` at `z`.
fn hermite(z: f64, max: usize) -> Vec<f64> {
    let mut he = vec![1.0, z];
    for k in 2..=max {
        let next = z * he[k - 1] - (k as f64 - 1.0) * he[k - 2];
        he.push(next);
    }
    he
}

/// `P(X > x)` for `X` with cumulants `κ_1..κ_6`, from the Edgeworth density
/// expansion carried to the order of the sixth cumulant:
/// `f(z) = φ(z)[1 + Σ c_k He_k(z)]` with standardized cumulants `λ_r` and
/// `c_3 = λ3/6`, `c_4 = λ4/24`, `c_5 = λ5/120`, `c_6 = λ3²/72 + λ6/720`,
/// `c_7 = λ3λ4/144`, `c_8 = λ4²/1152 + λ3λ5/720`, `c_9 = λ3³/1296`,
/// `c_10 = λ3²λ4/1728`, `c_12 = λ3⁴/31104`. Integrating term by term uses
/// `∫_z^∞ φ He_k = φ(z) He_{k-1}(z)`. The result is clamped to `[0, 1]`.
pub fn edgeworth_tail(x: f64, cumulants: &[f64; 6]) -> f64 {
    let sd = cumulants[1].sqrt();
    let z = (x - cumulants[0]) / sd;
    let l = |r: usize| cumulants[r - 1] / sd.powi(r as i32);
    let (l3, l4, l5, l6) = (l(3), l(4), l(5), l(6));
    let mut c = [0.0; 13];
    c[3] = l3 / 6.0;
    c[4] = l4 / 24.0;
    c[5] = l5 / 120.0;
    c[6] = l3 * l3 / 72.0 + l6 / 720.0;
    c[7] = l3 * l4 / 144.0;
    c[8] = l4 * l4 / 1152.0 + l3 * l5 / 720.0;
    c[9] = l3.powi(3) / 1296.0;
    c[10] = l3 * l3 * l4 / 1728.0;
    c[12] = l3.powi(4) / 31104.0;
    let he = hermite(z, 11);
    let correction: f64 = (3..=12).map(|k| c[k] * he[k - 1]).sum();
    (1.0 - normal_cdf(z) + normal_pdf(z) * correction).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_cumulants_give_normal_tail() {
        let k = [1.0, 4.0, 0.0, 0.0, 0.0, 0.0];
        assert!((edgeworth_tail(1.0 + 2.0 * 1.644_853_626_951_472_2, &k) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn sum_of_many_chi_squares() {
        // χ²_200 tail at its 95% point 233.994 is reproduced to high accuracy
        let nu: f64 = 200.0;
        let k = [nu, 2.0 * nu, 8.0 * nu, 48.0 * nu, 384.0 * nu, 3840.0 * nu];
        assert!((edgeworth_tail(233.994_3, &k) - 0.05).abs() < 2e-4);
    }
}
