//! Null distributions and p-values: the `ξ_d` limit of a single term, the
//! finite-sample bias `B(n, d)`, chi-square references and the Edgeworth
//! approximation for `W`.

mod combined;
mod edgeworth;
mod imhof;
mod xi;
mod xi_table_data;

pub use combined::{
    combined_null_descriptor, combined_p_value, combined_statistics, combined_values,
    term_p_value, CombinedNullDescriptor, TermValues, WeightBlock,
};
pub use edgeworth::edgeworth_tail;
pub use imhof::WeightedChiSquare;
pub use xi::{
    default_truncation, xi_cumulants, xi_quantile, xi_table, xi_tail_probability,
    XiDistribution, XiTable,
};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

/// `B(n,d) = ((n-1)/(6n))^d - 6^{-d} + (n-1)(-1/(6n))^d`, so that the null
/// mean of `S_{n,A,ℓ}` is `B(n,|A|) + 6^{-|A|}`.
pub fn bias_term(n: usize, d: usize) -> f64 {
    let nf = n as f64;
    let di = d as i32;
    ((nf - 1.0) / (6.0 * nf)).powi(di) - 6f64.powi(-di) + (nf - 1.0) * (-1.0 / (6.0 * nf)).powi(di)
}

/// `P(χ²_df > x)`.
pub fn chi_square_sf(df: usize, x: f64) -> Result<f64> {
    let dist = ChiSquared::new(df as f64).map_err(|e| invalid(format!("chi-square: {e}")))?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(dist.sf(x).clamp(0.0, 1.0))
}

/// Lower `prob` quantile of `χ²_df`.
pub fn chi_square_quantile(df: usize, prob: f64) -> Result<f64> {
    let dist = ChiSquared::new(df as f64).map_err(|e| invalid(format!("chi-square: {e}")))?;
    Ok(dist.inverse_cdf(prob))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bias_examples() {
        let b = bias_term(100, 2);
        let expected = 0.165f64.powi(2) - 1.0 / 36.0 + 99.0 / 360_000.0;
        assert!((b - expected).abs() < 1e-15);
        assert!((b + 2.778e-4).abs() < 1e-6);
        assert!((bias_term(1, 2) + 1.0 / 36.0).abs() < 1e-15);
        assert!(bias_term(1_000_000, 2).abs() < 1e-6);
    }

    #[test]
    fn chi_square_reference() {
        assert!((chi_square_quantile(11, 0.95).unwrap() - 19.675_14).abs() < 1e-4);
        assert!((chi_square_sf(11, 19.675_137_572_83).unwrap() - 0.05).abs() < 1e-9);
        assert_eq!(chi_square_sf(22, 0.0).unwrap(), 1.0);
    }
}
