use linkage_core::inference::{
    bayes_factor_test, log_likelihood, log_marginal_continuous, marginal_approx_haldane,
    marginal_exact_haldane, Posterior,
};
use linkage_core::model::{
    distance_prior_density, haldane_inverse, haldane_map, ContinuousPrior, CrossCount,
    GeneticDistance, MixturePrior, RecombinationRate,
};
use linkage_core::numerics::{integrate, log_sum_weighted, reg_inc_beta, LogValue};
use proptest::prelude::*;

fn rate(r: f64) -> RecombinationRate {
    RecombinationRate::new(r).unwrap()
}

proptest! {
    #[test]
    fn inc_beta_reflection(x in 0.0f64..=1.0, a in 0.05f64..200.0, b in 0.05f64..200.0) {
        let lhs = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
        prop_assert!((lhs - 1.0).abs() <= 1e-12, "sum = {lhs}");
    }

    #[test]
    fn inc_beta_monotone_in_x(x1 in 0.0f64..=1.0, x2 in 0.0f64..=1.0, a in 0.1f64..100.0, b in 0.1f64..100.0) {
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let i_lo = reg_inc_beta(lo, a, b).unwrap();
        let i_hi = reg_inc_beta(hi, a, b).unwrap();
        prop_assert!(i_lo <= i_hi + 1e-15);
        prop_assert!((0.0..=1.0).contains(&i_lo));
    }

    #[test]
    fn log_sum_weighted_matches_linear(ws in prop::collection::vec((0.0f64..5.0, -30.0f64..30.0), 1..8)) {
        let terms: Vec<(f64, LogValue)> = ws.iter().map(|&(w, l)| (w, LogValue::from_ln(l))).collect();
        let direct: f64 = ws.iter().map(|&(w, l)| w * l.exp()).sum();
        let got = log_sum_weighted(&terms).unwrap();
        if direct == 0.0 {
            prop_assert!(got.is_zero);
        } else {
            prop_assert!((got.value() - direct).abs() <= 1e-13 * direct);
        }
    }

    #[test]
    fn mixture_weights_sum_to_one(w in 0.0f64..=1.0) {
        let m = MixturePrior::new(w, RecombinationRate::UNLINKED, ContinuousPrior::FlatHaldane).unwrap();
        prop_assert_eq!(m.point_mass_weight() + m.continuous_weight(), 1.0);
    }

    #[test]
    fn mapping_is_strictly_increasing(x1 in 0.0f64..=1.0, x2 in 0.0f64..=1.0, length in 0.1f64..5.0) {
        prop_assume!(x1 != x2);
        let (a, b) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let ra = haldane_map(GeneticDistance::with_length(a, length).unwrap()).value();
        let rb = haldane_map(GeneticDistance::with_length(b, length).unwrap()).value();
        prop_assert!(ra <= rb);
        // strict unless both saturate at the same double
        if (b - a) * length > 1e-12 {
            prop_assert!(ra < rb);
        }
    }

    #[test]
    fn posterior_integrates_to_one(n in 0u64..=100, frac in 0.0f64..=1.0, which in 0usize..4) {
        let y = ((n as f64) * frac).round() as u64;
        let data = CrossCount::new(n, y).unwrap();
        let prior = [
            ContinuousPrior::FlatHaldane,
            ContinuousPrior::haldane_distance(1.0).unwrap(),
            ContinuousPrior::scaled_beta(2.0, 5.0).unwrap(),
            ContinuousPrior::haldane_distance(0.5).unwrap(),
        ][which];
        let post = Posterior::new(&data, &prior).unwrap();
        let (lo, hi) = prior.support();
        let mut pts = vec![lo, hi];
        if n > 0 {
            let m = (y as f64 / n as f64).clamp(lo, hi);
            if m > lo && m < hi {
                pts.insert(1, m);
            }
        }
        let total: f64 = pts
            .windows(2)
            .map(|w| integrate(|r| post.density(r), w[0], w[1], 1e-10, 1e-14).unwrap().value)
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-6, "total = {total}");
    }

    #[test]
    fn bayes_factor_ignores_point_mass_weight(n in 0u64..=200, frac in 0.0f64..=1.0, w in 0.01f64..0.99) {
        let y = ((n as f64) * frac).round() as u64;
        let data = CrossCount::new(n, y).unwrap();
        let a = bayes_factor_test(&data, &MixturePrior::primrose()).unwrap();
        let m = MixturePrior::new(w, RecombinationRate::UNLINKED, ContinuousPrior::FlatHaldane).unwrap();
        let b = bayes_factor_test(&data, &m).unwrap();
        prop_assert_eq!(a.log_bayes_factor.to_bits(), b.log_bayes_factor.to_bits());
        let lpo = b.posterior_odds.ln();
        prop_assert!((lpo - (b.prior_odds.ln() + b.log_bayes_factor)).abs() <= 1e-14 * lpo.abs().max(1.0));
        prop_assert!((b.posterior_prob_linked - b.posterior_odds / (1.0 + b.posterior_odds)).abs() <= 1e-15);
    }
}

#[test]
fn mapping_round_trip_grid() {
    for length in [0.5, 1.0, 2.0] {
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            let rho = haldane_map(GeneticDistance::with_length(x, length).unwrap());
            if rho.value() >= 0.5 {
                continue;
            }
            let back = haldane_inverse(rho, length).unwrap();
            let again = haldane_map(back);
            assert!((again.value() - rho.value()).abs() <= 1e-12);
            assert!((back.fraction() - x).abs() <= 1e-12 * (1.0 + 1.0 / (1.0 - 2.0 * rho.value())));
        }
    }
}

#[test]
fn haldane_density_is_the_push_forward() {
    // p(ρ) = p_x(x(ρ)) |dx/dρ| with dx/dρ by central differences
    for length in [0.5, 1.0, 2.0] {
        let prior = ContinuousPrior::haldane_distance(length).unwrap();
        let (lo, hi) = prior.support();
        let h = 1e-6;
        for i in 1..100 {
            let rho = lo + (hi - lo) * i as f64 / 100.0;
            let x_of = |r: f64| haldane_inverse(rate(r), length).unwrap().fraction();
            let dxdr = (x_of(rho + h) - x_of(rho - h)) / (2.0 * h);
            let px =
                distance_prior_density(GeneticDistance::with_length(x_of(rho), length).unwrap());
            let fd = px * dxdr;
            assert!(
                (prior.density(rho) - fd).abs() <= 1e-6,
                "L={length} rho={rho}"
            );
        }
    }
}

#[test]
fn proper_priors_integrate_to_one() {
    let priors = [
        ContinuousPrior::FlatHaldane,
        ContinuousPrior::haldane_distance(0.5).unwrap(),
        ContinuousPrior::haldane_distance(1.0).unwrap(),
        ContinuousPrior::haldane_distance(2.0).unwrap(),
        ContinuousPrior::scaled_beta(1.0, 1.0).unwrap(),
        ContinuousPrior::scaled_beta(2.0, 5.0).unwrap(),
        ContinuousPrior::scaled_beta(3.5, 1.5).unwrap(),
    ];
    for p in priors {
        let (lo, hi) = p.support();
        let r = integrate(|r| p.density(r), lo, hi, 1e-12, 1e-15).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-8, "{p:?}: {}", r.value);
    }
}

#[test]
fn scaled_beta_cdf_matches_quadrature() {
    let p = ContinuousPrior::scaled_beta(2.0, 5.0).unwrap();
    for rho in [0.05, 0.1, 0.2, 0.3, 0.45] {
        let q = integrate(|r| p.density(r), 0.0, rho, 1e-12, 1e-15)
            .unwrap()
            .value;
        assert!((p.cdf(rho).unwrap() - q).abs() <= 1e-10);
    }
}

#[test]
fn binomial_likelihood_normalizes() {
    for n in 0..=60u64 {
        for rho in [0.0, 0.013, 0.2, 0.37, 0.5] {
            let total: f64 = (0..=n)
                .map(|y| log_likelihood(&CrossCount::new(n, y).unwrap(), rate(rho)).value())
                .sum();
            assert!((total - 1.0).abs() <= 1e-10, "N={n} rho={rho}: {total}");
        }
    }
}

#[test]
fn exact_over_approx_is_the_half_share() {
    let m = MixturePrior::primrose();
    for n in 0..=50u64 {
        for y in 0..=n {
            let data = CrossCount::new(n, y).unwrap();
            let exact = marginal_exact_haldane(&data, &m).unwrap().log_marginal.ln();
            let approx = marginal_approx_haldane(&data, &m)
                .unwrap()
                .log_marginal
                .ln();
            let ratio = (exact - approx).exp();

            // brute force: ∫_0^{1/2} ρ^y (1−ρ)^{N−y} / ∫_0^1 ρ^y (1−ρ)^{N−y}
            let f = |r: f64| r.powi(y as i32) * (1.0 - r).powi((n - y) as i32);
            let half = integrate(f, 0.0, 0.5, 1e-13, 0.0).unwrap().value;
            let whole = integrate(f, 0.0, 1.0, 1e-13, 0.0).unwrap().value;
            assert!(
                (ratio - half / whole).abs() <= 1e-10 * ratio.max(1e-300),
                "N={n} y={y}"
            );
            assert!(exact <= approx, "N={n} y={y}");
            // below that the shortfall is under half an ulp of the log
            if ratio < 1.0 - 1e-12 {
                assert!(exact < approx, "N={n} y={y}");
            }
        }
    }
}

#[test]
fn quadrature_and_closed_form_agree_for_flat_prior() {
    let m = MixturePrior::primrose();
    for (n, y) in [
        (400, 160),
        (10, 3),
        (100, 0),
        (100, 100),
        (1000, 480),
        (250_000, 100_000),
    ] {
        let data = CrossCount::new(n, y).unwrap();
        let closed = marginal_exact_haldane(&data, &m).unwrap().log_marginal.ln()
            - m.continuous_weight().ln();
        let quad = log_marginal_continuous(&data, &ContinuousPrior::FlatHaldane)
            .unwrap()
            .log_marginal
            .ln();
        assert!(((quad - closed).exp() - 1.0).abs() <= 1e-10, "N={n} y={y}");
    }
}

#[test]
fn haldane_prior_lowers_primrose_linkage_evidence() {
    let data = CrossCount::primrose();
    let flat = bayes_factor_test(&data, &MixturePrior::primrose()).unwrap();
    let hd = bayes_factor_test(
        &data,
        &MixturePrior::with_continuous(ContinuousPrior::haldane_distance(1.0).unwrap()),
    )
    .unwrap();
    assert!(hd.log_bayes_factor < flat.log_bayes_factor);
    assert!(hd.log_marginal_linked.ln() < flat.log_marginal_linked.ln());
}

#[test]
fn large_counts_stay_in_log_space() {
    let data = CrossCount::new(1_000_000, 400_000).unwrap();
    let r = bayes_factor_test(&data, &MixturePrior::primrose()).unwrap();
    assert!(r.log_bayes_factor.is_finite());
    assert!(r.log_marginal_mixture.ln().is_finite());
    let hd =
        log_marginal_continuous(&data, &ContinuousPrior::haldane_distance(1.0).unwrap()).unwrap();
    assert!(hd.log_marginal.ln().is_finite() && hd.log_marginal.ln() < 0.0);
}
