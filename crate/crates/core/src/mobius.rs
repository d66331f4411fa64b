//! Circular ranks and Cramér–von Mises statistics of the Möbius-transformed
//! lagged empirical copula process.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ErrorMatrix, GeneralizedErrorPanel, SubsetLagFamily};
use crate::error::{invalid, Error, Result};

/// Largest sample size accepted by [`cvm_statistic`]; the double sum costs
/// `O(n²|A|)`, about 0.1 s per term at this size.
pub const CVM_MAX_N: usize = 5000;
/// Largest sample size accepted by [`cvm_oracle`].
pub const ORACLE_MAX_N: usize = 50;

/// Ranks `R_{j,t} ∈ {1..n}` per column, read circularly in `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircularRankMatrix {
    ranks: Vec<Vec<u32>>,
}

impl CircularRankMatrix {
    /// Ranks each column; ties are broken by ascending time index.
    pub fn from_errors(errors: &ErrorMatrix) -> Self {
        Self::from_columns(errors.columns())
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let ranks = columns
            .iter()
            .map(|col| {
                let mut order: Vec<usize> = (0..col.len()).collect();
                // stable sort keeps time order among ties
                order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
                let mut r = vec![0u32; col.len()];
                for (pos, &t) in order.iter().enumerate() {
                    r[t] = pos as u32 + 1;
                }
                r
            })
            .collect();
        Self { ranks }
    }

    /// Wraps precomputed ranks; each column must be a permutation of `1..=n`.
    pub fn from_ranks(ranks: Vec<Vec<u32>>) -> Result<Self> {
        let n = ranks.first().map(|c| c.len()).unwrap_or(0);
        if n == 0 {
            return Err(invalid("empty rank matrix"));
        }
        for col in &ranks {
            let mut seen = vec![false; n];
            if col.len() != n {
                return Err(invalid("rank columns differ in length"));
            }
            for &r in col {
                let idx = r as usize;
                if idx == 0 || idx > n || seen[idx - 1] {
                    return Err(invalid("rank column is not a permutation of 1..n"));
                }
                seen[idx - 1] = true;
            }
        }
        Ok(Self { ranks })
    }

    pub fn n(&self) -> usize {
        self.ranks[0].len()
    }

    pub fn d(&self) -> usize {
        self.ranks.len()
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.ranks[j]
    }

    /// `R_{j,t}` for any integer `t` (0-based, circular).
    pub fn rank(&self, j: usize, t: i64) -> u32 {
        let n = self.n() as i64;
        self.ranks[j][t.rem_euclid(n) as usize]
    }

    /// Column `j` shifted by `lag`: entry `t` is `R_{j,t+lag}`.
    pub fn shifted(&self, j: usize, lag: i64) -> Vec<u32> {
        (0..self.n() as i64).map(|t| self.rank(j, t + lag)).collect()
    }
}

/// Ranks of replicate `k` of a generalized-error panel.
pub fn circular_ranks(panel: &GeneralizedErrorPanel, k: usize) -> Result<CircularRankMatrix> {
    if k >= panel.m() {
        return Err(invalid(format!("replicate {k} out of range (M = {})", panel.m())));
    }
    Ok(CircularRankMatrix::from_errors(panel.replicate(k)))
}

fn check_term(ranks: &CircularRankMatrix, subset: &[usize], lag: &[i64]) -> Result<()> {
    if !(2..=3).contains(&subset.len()) {
        return Err(invalid(format!("subset {subset:?} must have 2 or 3 elements")));
    }
    let d = ranks.d();
    if subset.iter().any(|&j| j >= d) {
        return Err(invalid(format!("subset {subset:?} out of range for d = {d}")));
    }
    for (i, a) in subset.iter().enumerate() {
        if subset[..i].contains(a) {
            return Err(invalid(format!("subset {subset:?} has repeated indices")));
        }
    }
    if lag.len() != d {
        return Err(invalid(format!("lag {lag:?} does not have length {d}")));
    }
    Ok(())
}

/// Per-rank kernel pieces: `m(a, b) = c + h[a] + h[b] - max(a, b)/(n+1)`.
struct Kernel {
    c: f64,
    h: Vec<f64>,
    inv_np1: f64,
}

impl Kernel {
    fn new(n: usize) -> Self {
        let nf = n as f64;
        let denom = 2.0 * nf * (nf + 1.0);
        let h = (0..=n).map(|r| (r as f64) * (r as f64 - 1.0) / denom).collect();
        Self {
            c: (2.0 * nf + 1.0) / (6.0 * nf),
            h,
            inv_np1: 1.0 / (nf + 1.0),
        }
    }

    #[inline]
    fn eval(&self, a: u32, b: u32) -> f64 {
        self.c + self.h[a as usize] + self.h[b as usize] - f64::from(a.max(b)) * self.inv_np1
    }
}

/// `S_{n,A,ℓ} = (1/n) Σ_{t,s} Π_{j∈A} m(R_{j,t+ℓ_j}, R_{j,s+ℓ_j})` with
/// `m(a,b) = (2n+1)/(6n) + a(a-1)/(2n(n+1)) + b(b-1)/(2n(n+1)) - max(a,b)/(n+1)`.
pub fn cvm_statistic(ranks: &CircularRankMatrix, subset: &[usize], lag: &[i64]) -> Result<f64> {
    check_term(ranks, subset, lag)?;
    let n = ranks.n();
    if n > CVM_MAX_N {
        return Err(Error::SizeGuard(format!("n = {n} exceeds {CVM_MAX_N}")));
    }
    let kernel = Kernel::new(n);
    let cols: Vec<Vec<u32>> = subset.iter().map(|&j| ranks.shifted(j, lag[j])).collect();
    let mut total = 0.0;
    for t in 0..n {
        let mut row = 0.0;
        for s in 0..t {
            let mut prod = 1.0;
            for col in &cols {
                prod *= kernel.eval(col[t], col[s]);
            }
            row += prod;
        }
        let mut diag = 1.0;
        for col in &cols {
            diag *= kernel.eval(col[t], col[t]);
        }
        total += 2.0 * row + diag;
    }
    Ok(total / n as f64)
}

/// Statistics for every `(A, ℓ)` of `family`, in family order.
pub fn cvm_family(ranks: &CircularRankMatrix, family: &SubsetLagFamily) -> Result<Vec<f64>> {
    let terms: Vec<(&[usize], &[i64])> = family.terms().collect();
    terms
        .par_iter()
        .map(|(a, l)| cvm_statistic(ranks, a, l))
        .collect()
}

/// Definitional integral `∫ 𝕔²_{n,A,ℓ}` of the Möbius process
/// `𝕔(u) = n^{-1/2} Σ_t Π_{j∈A} [1{R_{j,t+ℓ_j} <= (n+1)u_j} - D_n(u_j)]`.
///
/// With `grid_resolution = None` the integral is exact: the integrand is
/// constant on the cells `[k/(n+1), (k+1)/(n+1))`. `Some(g)` uses a midpoint
/// rule with `g` points per axis instead.
pub fn cvm_oracle(
    ranks: &CircularRankMatrix,
    subset: &[usize],
    lag: &[i64],
    grid_resolution: Option<usize>,
) -> Result<f64> {
    check_term(ranks, subset, lag)?;
    let n = ranks.n();
    if n > ORACLE_MAX_N {
        return Err(Error::SizeGuard(format!("oracle limited to n <= {ORACLE_MAX_N}, got {n}")));
    }
    let nf = n as f64;
    let cols: Vec<Vec<u32>> = subset.iter().map(|&j| ranks.shifted(j, lag[j])).collect();
    let dim = subset.len();

    // per-axis abscissae as (weight, k) with the process depending on u only via k
    let points: Vec<(f64, usize)> = match grid_resolution {
        None => (0..=n).map(|k| (1.0 / (nf + 1.0), k)).collect(),
        Some(g) => {
            if g == 0 {
                return Err(invalid("grid resolution must be positive"));
            }
            (0..g)
                .map(|i| {
                    let u = (i as f64 + 0.5) / g as f64;
                    let k = ((nf + 1.0) * u).floor().min(nf) as usize;
                    (1.0 / g as f64, k)
                })
                .collect()
        }
    };

    let mut idx = vec![0usize; dim];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for &i in &idx {
            weight *= points[i].0;
        }
        let mut process = 0.0;
        for t in 0..n {
            let mut prod = 1.0;
            for (c, col) in cols.iter().enumerate() {
                let k = points[idx[c]].1;
                let ind = f64::from(u8::from(col[t] as usize <= k));
                let dn = k.min(n) as f64 / nf;
                prod *= ind - dn;
            }
            process += prod;
        }
        total += weight * process * process / nf;

        // odometer increment
        let mut c = 0;
        loop {
            if c == dim {
                return Ok(total);
            }
            idx[c] += 1;
            if idx[c] < points.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}
