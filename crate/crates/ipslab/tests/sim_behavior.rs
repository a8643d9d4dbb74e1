//! Behavioral tests of the single-copy engine: determinism, conservation
//! laws, cache exactness and stationary ground truths.

mod common;

use ipslab::alphabet::Nucleotide;
use ipslab::analytics::independent_invariant;
use ipslab::kernel::CutPasteKernel;
use ipslab::rates::{specialize_jc, GenericRateModel, QMatrix, RnYprParams};
use ipslab::ring::RingConfig;
use ipslab::sim::{estimate_stationary, simulate, Horizon, InitialConfig, RateModelSpec, SimSpec};

use common::{batch_series, mean_se, within_se};

fn spec(model: RateModelSpec, kernel: CutPasteKernel, n: usize, seed: u64) -> SimSpec {
    SimSpec {
        model,
        kernel,
        ring_n: n,
        init: InitialConfig::UniformRandom,
        horizon: Horizon::Time(10.0),
        seed,
        stream: 0,
        sample_interval: 0.5,
        max_events: None,
        debug_check_interval: None,
    }
}

fn zero_params() -> RnYprParams {
    RnYprParams::new([0.0; 4], [0.0; 4], 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap()
}

#[test]
fn identical_seeds_reproduce_identical_stats() {
    let jc = specialize_jc(1.0, 2.0).unwrap();
    let make = || {
        let mut s = spec(
            RateModelSpec::RnYpr(jc),
            CutPasteKernel::stirring(1.0),
            32,
            42,
        );
        s.horizon = Horizon::Events(5_000);
        s
    };
    let a = simulate(&make()).unwrap();
    let b = simulate(&make()).unwrap();
    assert_eq!(a, b);

    let mut other = make();
    other.stream = 1;
    let c = simulate(&other).unwrap();
    assert_ne!(a.final_config, c.final_config);
}

#[test]
fn null_generator_never_moves() {
    let s = spec(
        RateModelSpec::RnYpr(zero_params()),
        CutPasteKernel::stirring(0.0),
        16,
        7,
    );
    let stats = simulate(&s).unwrap();
    assert_eq!(stats.substitution_events, [0; 4]);
    assert_eq!(stats.cut_paste_events, 0);
    assert_eq!(stats.time, 10.0);
    assert_eq!(stats.samples, 20);
    // the initial random configuration is still there
    let mut rng = s.rng();
    let init = s.init.build(16, &mut rng).unwrap();
    assert_eq!(stats.final_config, init);
}

#[test]
fn pure_cut_paste_conserves_letters() {
    let mut s = spec(
        RateModelSpec::RnYpr(zero_params()),
        CutPasteKernel::new(2.0, vec![(-5, 0.25), (1, 0.5), (3, 0.25)]).unwrap(),
        48,
        13,
    );
    s.horizon = Horizon::Events(20_000);
    s.debug_check_interval = Some(1_000);
    let mut rng = s.rng();
    let init = s.init.build(48, &mut rng).unwrap();
    let stats = simulate(&s).unwrap();
    assert_eq!(stats.cut_paste_events, 20_000);
    assert_eq!(stats.final_config.letter_counts(), init.letter_counts());
}

#[test]
fn debug_cache_check_passes_on_mixed_dynamics() {
    let params = ipslab::rates::specialize_t92(0.3, 1.0, 2.0, 5.0).unwrap();
    let mut s = spec(
        RateModelSpec::RnYpr(params),
        CutPasteKernel::new(1.0, vec![(-2, 0.3), (1, 0.4), (6, 0.3)]).unwrap(),
        40,
        3,
    );
    s.horizon = Horizon::Events(30_000);
    s.debug_check_interval = Some(1_000);
    simulate(&s).unwrap();
}

#[test]
fn event_budget_overflow_is_an_error() {
    let jc = specialize_jc(1.0, 0.0).unwrap();
    let mut s = spec(
        RateModelSpec::RnYpr(jc),
        CutPasteKernel::stirring(1.0),
        16,
        5,
    );
    s.horizon = Horizon::Time(1_000.0);
    s.max_events = Some(500);
    assert!(matches!(
        simulate(&s),
        Err(ipslab::Error::EventBudgetExceeded(500))
    ));
}

#[test]
fn symmetric_model_has_uniform_marginals() {
    let jc = specialize_jc(1.0, 0.0).unwrap();
    let s = spec(
        RateModelSpec::RnYpr(jc),
        CutPasteKernel::stirring(1.0),
        64,
        101,
    );
    let stats = estimate_stationary(&s, 30.0, 0.5, 3_000).unwrap();
    assert_eq!(stats.samples, 3_000);
    for letter in Nucleotide::ALL {
        let m = stats.marginal(letter);
        assert!(
            within_se(m.mean, 0.25, m.se, 3.0),
            "{letter}: {} +- {}",
            m.mean,
            m.se
        );
    }
}

/// Independent sites keep their product-form invariant law under any
/// cut-and-paste kernel: marginals match the single-site invariant law and
/// adjacent pairs factorize.
#[test]
fn independent_model_keeps_product_measure() {
    // rate 2 toward a, rate 1 elsewhere: invariant law (0.4, 0.2, 0.2, 0.2)
    let mut rates = [[1.0; 4]; 4];
    for row in &mut rates {
        row[Nucleotide::A.index()] = 2.0;
    }
    let q = QMatrix::from_rates(rates).unwrap();
    let pi = independent_invariant(&q).unwrap();
    let s = spec(
        RateModelSpec::Generic(GenericRateModel::independent(&q)),
        CutPasteKernel::new(1.5, vec![(-3, 0.3), (1, 0.5), (2, 0.2)]).unwrap(),
        64,
        2024,
    );
    let stats = estimate_stationary(&s, 25.0, 0.5, 4_000).unwrap();
    for letter in Nucleotide::ALL {
        let m = stats.marginal(letter);
        assert!(
            within_se(m.mean, pi[letter.index()], m.se, 3.0),
            "{letter}: {} vs {} +- {}",
            m.mean,
            pi[letter.index()],
            m.se
        );
    }
    // factorization through batch means of the cross product
    for x in Nucleotide::ALL {
        for y in Nucleotide::ALL {
            let pair_b = batch_series(&stats.rows, 30, |r| r.pairs[x.index()][y.index()]);
            let mx_b = batch_series(&stats.rows, 30, |r| r.marginals[x.index()]);
            let my_b = batch_series(&stats.rows, 30, |r| r.marginals[y.index()]);
            let diff: Vec<f64> = pair_b
                .iter()
                .zip(&mx_b)
                .zip(&my_b)
                .map(|((p, mx), my)| p - mx * my)
                .collect();
            let (mean, se) = mean_se(&diff);
            assert!(
                within_se(mean, 0.0, se, 3.5),
                "pair ({x},{y}): {mean} +- {se}"
            );
        }
    }
}

#[test]
fn explicit_initial_configuration_is_used() {
    let jc = specialize_jc(1.0, 0.0).unwrap();
    let init = RingConfig::parse("aaaattttccccgggg").unwrap();
    let mut s = spec(
        RateModelSpec::RnYpr(jc),
        CutPasteKernel::stirring(0.0),
        16,
        8,
    );
    s.init = InitialConfig::Explicit(init.clone());
    s.horizon = Horizon::Events(1);
    let stats = simulate(&s).unwrap();
    // one substitution away from the initial configuration
    let differing = stats
        .final_config
        .cells()
        .iter()
        .zip(init.cells())
        .filter(|(a, b)| a != b)
        .count();
    assert_eq!(differing, 1);

    let mut mismatched = s;
    mismatched.ring_n = 20;
    assert!(simulate(&mismatched).is_err());
}

#[test]
fn sample_times_are_on_the_grid() {
    let jc = specialize_jc(0.7, 0.3).unwrap();
    let s = spec(
        RateModelSpec::RnYpr(jc),
        CutPasteKernel::stirring(0.5),
        24,
        6,
    );
    let stats = estimate_stationary(&s, 5.0, 0.25, 100).unwrap();
    assert_eq!(stats.samples, 100);
    for (i, row) in stats.rows.iter().enumerate() {
        let expected = 5.0 + 0.25 * (i as f64 + 1.0);
        assert_eq!(row.t, expected);
        let total: f64 = row.marginals.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let pair_total: f64 = row.pairs.iter().flatten().sum();
        assert!((pair_total - 1.0).abs() < 1e-12);
    }
}

/// With every interaction rate zero the class masses and all four
/// marginals follow the closed-form first moments with no correction
/// terms.
#[test]
fn interaction_free_rn_matches_closed_form_moments() {
    let params = RnYprParams::new(
        [0.5, 1.0, 0.75, 1.25],
        [0.5, 1.0, 0.75, 1.25],
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    )
    .unwrap();
    let solution = ipslab::analytics::solve_first_moments(&params, 0.0, 0.0).unwrap();
    let v_r = params.v_a + params.v_g;
    let v_y = params.v_t + params.v_c;
    assert!((solution.mu_r - v_r / (v_y + v_r)).abs() < 1e-15);

    let s = spec(
        RateModelSpec::RnYpr(params),
        CutPasteKernel::new(1.0, vec![(-2, 0.5), (3, 0.5)]).unwrap(),
        64,
        314,
    );
    let stats = estimate_stationary(&s, 30.0, 0.5, 4_000).unwrap();
    let class_r = stats
        .summarize(|r| r.marginals[Nucleotide::A.index()] + r.marginals[Nucleotide::G.index()]);
    assert!(
        within_se(class_r.mean, solution.mu_r, class_r.se, 3.0),
        "mu(R): {} vs {} +- {}",
        class_r.mean,
        solution.mu_r,
        class_r.se
    );
    for letter in Nucleotide::ALL {
        let m = stats.marginal(letter);
        assert!(
            within_se(m.mean, solution.marginal(letter), m.se, 3.0),
            "{letter}: {} vs {} +- {}",
            m.mean,
            solution.marginal(letter),
            m.se
        );
    }
}

/// The event path is logarithmic in the ring size: a hundred-thousand-site
/// ring processes a burst of events without trouble.
#[test]
fn large_ring_smoke() {
    let params = ipslab::rates::specialize_t92(0.3, 1.0, 2.0, 5.0).unwrap();
    let mut s = spec(
        RateModelSpec::RnYpr(params),
        CutPasteKernel::new(0.5, vec![(-9, 0.3), (2, 0.4), (40, 0.3)]).unwrap(),
        100_000,
        17,
    );
    s.horizon = Horizon::Events(200_000);
    s.sample_interval = 1_000.0;
    let stats = simulate(&s).unwrap();
    assert_eq!(
        stats.substitution_events.iter().sum::<u64>() + stats.cut_paste_events,
        200_000
    );
    assert!(stats.cut_paste_events > 0);
}
