use gei::distribution::ConditionalDistribution;
use gei::models::{fit_gaussian_hmm, fit_ingarch, GaussianHmmSpec, IngarchSpec, ModelSpec};
use gei::pit::pit_value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn table1_x2() -> GaussianHmmSpec {
    GaussianHmmSpec::intercept_only(
        &[0.000759, 0.000908],
        &[0.029993, 0.014038],
        vec![vec![0.974388, 0.025612], vec![0.006381, 0.993619]],
    )
}

#[test]
fn gaussian_hmm_recovers_two_regime_parameters() {
    let truth = ModelSpec::GaussianHmm(table1_x2());
    let (x, _) = truth.simulate(&uniforms(2000, 11), None, 0.0).unwrap();
    let fit = fit_gaussian_hmm(&x, None, 2, 0, false, &Default::default()).unwrap();
    // align labels by volatility, high first as in the true spec
    let order: Vec<usize> = if fit.sigma[0] >= fit.sigma[1] { vec![0, 1] } else { vec![1, 0] };
    let t = table1_x2();
    for (k, &r) in order.iter().enumerate() {
        assert!((fit.theta[r][0] - t.theta[k][0]).abs() < 0.15);
        assert!((fit.sigma[r] - t.sigma[k]).abs() < 0.15);
        for (k2, &r2) in order.iter().enumerate() {
            assert!((fit.q[r][r2] - t.q[k][k2]).abs() < 0.15, "Q[{k}][{k2}]");
        }
    }
    let summary = fit.fit.as_ref().unwrap();
    for w in summary.log_likelihood_trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "EM decreased: {} -> {}", w[0], w[1]);
    }
    assert!(summary.warnings.is_empty(), "{:?}", summary.warnings);
    // tighter than the ±0.15 tolerance: volatilities within 15% relative
    assert!((fit.sigma[order[0]] / 0.029993 - 1.0).abs() < 0.15);
    assert!((fit.sigma[order[1]] / 0.014038 - 1.0).abs() < 0.15);
}

#[test]
fn zero_inflated_regime_vanishes_without_zeros() {
    let truth = ModelSpec::GaussianHmm(table1_x2());
    let (x, _) = truth.simulate(&uniforms(600, 12), None, 0.0).unwrap();
    assert!(x.iter().all(|v| *v != 0.0));
    let fit = fit_gaussian_hmm(&x, None, 3, 0, true, &Default::default()).unwrap();
    let pi = fit.stationary();
    assert!(pi[0] < 1e-6, "zero regime stationary mass {}", pi[0]);
    assert!(fit.initial.as_ref().unwrap()[0] < 1e-12);
}

#[test]
fn ingarch_recovers_parameters() {
    let truth = IngarchSpec::new(0.1187, vec![0.0575], vec![0.8849]).unwrap();
    let (x, _) = ModelSpec::Ingarch(truth).simulate(&uniforms(5000, 13), None, 0.0).unwrap();
    let fit = fit_ingarch(&x, 1, 1).unwrap();
    assert!((fit.omega - 0.1187).abs() < 0.1, "omega {}", fit.omega);
    assert!((fit.alpha[0] - 0.0575).abs() < 0.1, "alpha {}", fit.alpha[0]);
    assert!((fit.beta[0] - 0.8849).abs() < 0.1, "beta {}", fit.beta[0]);
}

#[test]
fn quantile_inverts_cdf_on_support() {
    let mut zi = GaussianHmmSpec::intercept_only(&[0.0, 0.0, 0.01], &[0.0, 0.02, 0.01], vec![
        vec![0.1, 0.6, 0.3],
        vec![0.05, 0.9, 0.05],
        vec![0.1, 0.1, 0.8],
    ]);
    zi.zero_inflated = true;
    let specs = [
        ModelSpec::GaussianHmm(table1_x2()),
        ModelSpec::GaussianHmm(zi),
        ModelSpec::Ingarch(IngarchSpec::new(0.5, vec![0.3], vec![0.4]).unwrap()),
    ];
    for spec in &specs {
        let (x, laws) = spec.simulate(&uniforms(50, 14), None, 0.0).unwrap();
        for law in &laws {
            for &y in x.iter().chain(&[0.0, 1.0, 2.0, -0.01]) {
                let c = law.cdf(y);
                if c < 1.0 - 1e-9 {
                    assert!(law.quantile(c + 1e-12) >= y - 1e-12, "{spec:?} y={y}");
                }
            }
        }
    }
}

/// Kolmogorov–Smirnov statistic against the uniform law.
fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &u)| (u - i as f64 / n).max((i + 1) as f64 / n - u))
        .fold(0.0, f64::max)
}

#[test]
fn randomized_pit_of_correct_model_is_uniform() {
    // 1% critical value of the KS statistic, n = 200: 1.628 / sqrt(n)
    let n = 200;
    let crit = 1.628 / (n as f64).sqrt();
    let specs = [
        ModelSpec::GaussianHmm(table1_x2()),
        ModelSpec::Ingarch(IngarchSpec::new(0.5, vec![0.3], vec![0.4]).unwrap()),
    ];
    for spec in &specs {
        let mut pass = 0;
        for rep in 0..200u64 {
            let (x, _) = spec.simulate(&uniforms(n, 1000 + rep), None, 0.0).unwrap();
            let laws = spec.conditional_trace(&x, None).unwrap();
            let v = uniforms(n, 5000 + rep);
            let u: Vec<f64> = laws.iter().zip(&x).zip(&v).map(|((g, &xt), &vt)| pit_value(g, xt, vt)).collect();
            if ks_uniform(&u) < crit {
                pass += 1;
            }
        }
        assert!(pass >= 190, "{spec:?}: {pass}/200");
    }
}
