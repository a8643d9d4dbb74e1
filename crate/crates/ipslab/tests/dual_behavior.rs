//! Behavioral tests of the dual-set process: the independent-deaths null
//! case, cardinality invariants on instrumented runs, extinction
//! consistency, and domination in mean by the branching process.

mod common;

use ipslab::dual::{
    extinction_fixed_point, mean_offspring, simulate_branching, simulate_dual_set, BranchingSpec,
    DualSetSpec,
};
use ipslab::kernel::CutPasteKernel;
use ipslab::rates::{derived_constants, specialize_t92, GenericRateModel, QMatrix};

fn dual_spec(model: GenericRateModel, kernel: CutPasteKernel, runs: u64) -> DualSetSpec {
    DualSetSpec {
        model,
        kernel,
        ring_n: 64,
        initial_set: vec![0, 5, 11, 17, 23, 31, 42, 55],
        horizon: 1.6,
        runs,
        seed: 31,
        checkpoints: vec![0.2, 0.4, 0.6, 0.9, 1.3],
    }
}

/// Independent model: every site dies independently at the aggregated
/// noise rate and nothing is ever added, so emptiness follows the closed
/// form `(1 - exp(-rate * t))^|D|`.
#[test]
fn independent_dual_matches_closed_form() {
    let model = GenericRateModel::independent(&QMatrix::symmetric(1.0));
    let rate = model.total_base_rate();
    assert_eq!(rate, 4.0);
    let spec = dual_spec(model, CutPasteKernel::stirring(1.0), 4_000);
    let out = simulate_dual_set(&spec).unwrap();
    for point in &out.empty_fraction_by_time {
        let expected = (1.0 - (-rate * point.t).exp()).powi(8);
        assert!(
            common::within_se(point.fraction_alive, expected, point.se, 3.0),
            "t = {}: {} vs {} +- {}",
            point.t,
            point.fraction_alive,
            expected,
            point.se
        );
    }
    // cut-and-paste marks never change the cardinality, so the mean
    // cardinality matches the pure-death expectation too
    for point in &out.mean_cardinality {
        let expected = 8.0 * (-rate * point.t).exp();
        assert!(
            common::within_se(point.fraction_alive, expected, point.se, 3.5),
            "t = {}: {} vs {} +- {}",
            point.t,
            point.fraction_alive,
            expected,
            point.se
        );
    }
}

/// Subcritical interaction levels: the set dies out and the survival
/// fraction decays with time.
#[test]
fn subcritical_dual_empties_out() {
    let params = specialize_t92(0.3, 1.0, 2.0, 1.0).unwrap();
    let d = derived_constants(&params);
    // (s - 1) * lambda_bar < lambda_bar_0 holds for these rates
    assert!((d.s - 1) as f64 * d.lambda_bar < d.lambda_bar_0);
    let mut spec = dual_spec(
        GenericRateModel::from_rnypr(&params),
        CutPasteKernel::stirring(1.0),
        1_500,
    );
    spec.horizon = 40.0;
    spec.checkpoints = vec![2.0, 8.0, 16.0, 28.0, 40.0];
    let out = simulate_dual_set(&spec).unwrap();
    let survival: Vec<f64> = out
        .survival_curve
        .iter()
        .map(|p| p.fraction_alive)
        .collect();
    for pair in survival.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "survival not decaying: {survival:?}"
        );
    }
    assert!(
        survival.last().unwrap() < &0.05,
        "survival too high at the end: {survival:?}"
    );
    // the late tail keeps shrinking by a comparable factor per window,
    // consistent with an exponential decay
    let p1 = survival[1]; // t = 8
    let p2 = survival[2]; // t = 16
    let p3 = survival[3]; // t = 28
    if p2 > 0.01 {
        assert!(p2 / p1 < 0.75, "p(8) = {p1}, p(16) = {p2}");
        assert!(p3 / p2 < 0.75, "p(16) = {p2}, p(28) = {p3}");
    }
}

/// The branching process dominates the dual set in mean at matched times.
#[test]
fn branching_dominates_dual_cardinality_in_mean() {
    let params = specialize_t92(0.3, 1.0, 2.0, 5.0).unwrap();
    let d = derived_constants(&params);
    let mut spec = dual_spec(
        GenericRateModel::from_rnypr(&params),
        CutPasteKernel::stirring(1.0),
        3_000,
    );
    spec.horizon = 2.0;
    spec.checkpoints = vec![0.25, 0.5, 1.0, 1.5, 2.0];
    let dual_out = simulate_dual_set(&spec).unwrap();

    let branching = BranchingSpec {
        s: d.s,
        lambda_bar: d.lambda_bar,
        lambda_bar_0: d.lambda_bar_0,
        initial: 8,
        runs: 3_000,
        horizon: 2.0,
        cap: 1_000_000,
        seed: 77,
        survival_points: 8,
    };
    let branch_out = simulate_branching(&branching).unwrap();
    // checkpoints 2, 4, 8 of the 8-point branching grid match 0.5, 1.0, 2.0
    for (dual_idx, branch_idx) in [(1usize, 1usize), (2, 3), (4, 7)] {
        let dual_point = &dual_out.mean_cardinality[dual_idx];
        let branch_point = &branch_out.mean_population[branch_idx];
        assert_eq!(dual_point.t, branch_point.t);
        let slack = 3.0 * (dual_point.se.powi(2) + branch_point.se.powi(2)).sqrt();
        assert!(
            dual_point.fraction_alive <= branch_point.fraction_alive + slack,
            "t = {}: dual {} > branching {} (+{slack})",
            dual_point.t,
            dual_point.fraction_alive,
            branch_point.fraction_alive
        );
    }
}

#[test]
fn extinction_monte_carlo_matches_fixed_point_moderately() {
    // a moderately supercritical case away from the headline values
    let spec = BranchingSpec {
        s: 3,
        lambda_bar: 1.0,
        lambda_bar_0: 1.5,
        initial: 1,
        runs: 3_000,
        horizon: 30.0,
        cap: 3_000,
        seed: 5,
        survival_points: 6,
    };
    assert!(mean_offspring(&spec).unwrap() > 1.0);
    let q = extinction_fixed_point(&spec).unwrap();
    let out = simulate_branching(&spec).unwrap();
    let se = (q * (1.0 - q) / spec.runs as f64).sqrt();
    assert!(
        (out.extinct_fraction - q).abs() <= 3.0 * se + 0.01,
        "{} vs {q}",
        out.extinct_fraction
    );
    // the horizon resolves essentially every run: survivors are capped
    assert!(
        out.unresolved_fraction < 0.005,
        "unresolved = {}",
        out.unresolved_fraction
    );
}

#[test]
fn dual_set_spec_validation() {
    let model = GenericRateModel::independent(&QMatrix::symmetric(1.0));
    let mut spec = dual_spec(model, CutPasteKernel::stirring(1.0), 10);
    spec.initial_set = vec![];
    assert!(simulate_dual_set(&spec).is_err());
    spec.initial_set = vec![64];
    assert!(simulate_dual_set(&spec).is_err());
    spec.initial_set = vec![0];
    spec.checkpoints = vec![2.0, 1.0];
    assert!(simulate_dual_set(&spec).is_err());
}
