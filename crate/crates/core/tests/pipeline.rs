//! The fit → PIT → evaluate pipeline as shown in the README.

use gei::domain::build_subset_lag_family;
use gei::models::{conditional_trace, fit_ingarch, ModelSpec};
use gei::report::{CombinedKind, StatisticSelection, TermKind};
use gei::stats::evaluate;
use gei::{randomized_pit, RandomizationPlan, SeriesPanel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

fn ingarch_path(omega: f64, alpha: f64, beta: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lambda = omega / (1.0 - alpha - beta);
    let mut x = lambda;
    let mut out = Vec::with_capacity(n);
    for t in 0..n + 200 {
        lambda = omega + alpha * x + beta * lambda;
        x = Poisson::new(lambda).unwrap().sample(&mut rng);
        if t >= 200 {
            out.push(x);
        }
    }
    out
}

#[test]
fn fitted_ingarch_pair_end_to_end() {
    let x = ingarch_path(0.5, 0.3, 0.4, 400, 1);
    let y = ingarch_path(1.0, 0.2, 0.5, 400, 2);
    let panel = SeriesPanel::new(vec![x, y], vec!["x".into(), "y".into()]).unwrap();
    let models = vec![
        ModelSpec::Ingarch(fit_ingarch(&panel.columns()[0], 1, 1).unwrap()),
        ModelSpec::Ingarch(fit_ingarch(&panel.columns()[1], 1, 1).unwrap()),
    ];
    let trace = conditional_trace(&models, &panel, None).unwrap();
    let errors = randomized_pit(&panel, &trace, &RandomizationPlan::new(1, 42).unwrap()).unwrap();
    let family = build_subset_lag_family(panel.d(), 5, 2, true).unwrap();
    let selection = StatisticSelection::default();
    let report = evaluate(&errors, &family, &selection, None).unwrap();

    // 11 lags for the single pair, one entry per term kind in use
    let kinds = selection.term_kinds().len();
    assert_eq!(family.term_count(), 11);
    assert_eq!(report.per_term.len(), 11 * kinds);
    for k in CombinedKind::ALL {
        assert!(report.combined_by_label(k.name()).is_some(), "{} missing", k.name());
    }
    assert!(report.per_term.iter().all(|t| (0.0..=1.0).contains(&t.p_value)));
    assert_eq!(report.terms_of_kind(TermKind::Cvm).count(), 11);
    assert!(report.metadata.distribution_free);

    let again = evaluate(&errors, &family, &selection, None).unwrap();
    assert_eq!(report, again);
}
