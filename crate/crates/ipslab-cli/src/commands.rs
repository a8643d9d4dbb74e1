//! Subcommand implementations. Verdicts are data, not errors: any checker
//! outcome exits 0; configuration problems exit 2 and runtime failures 3.

use std::path::Path;
use std::time::Instant;

use serde_json::json;

use ipslab::analytics;
use ipslab::checker::ergodicity_report;
use ipslab::dual::{
    extinction_fixed_point, extinction_fixed_point_decomposed, mean_offspring,
    mean_offspring_decomposed, simulate_branching, simulate_branching_decomposed,
    simulate_dual_set, BranchingOutcome, BranchingSpec, DecomposedBranchingSpec, DualSetSpec,
};
use ipslab::sim::{
    estimate_stationary, simulate, simulate_coupled, RateModelSpec, TrajectoryStats,
};
use ipslab::RingConfig;

use crate::config::{ConfigError, DualConfig, RunConfig};
use crate::io;

pub enum CliError {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> CliError {
        CliError::Config(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn cmd_check(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let params = config.rnypr_params()?;
    let report = ergodicity_report(&params).map_err(runtime)?;
    let conditions: Vec<_> = report.verdicts().into_iter().cloned().collect();
    let document = json!({
        "conditions": conditions,
        "attractive_orders": report.attractive_orders,
        "nu_diag": report.nu_diag,
        "m_positive": report.m_positive,
        "constants": report.constants,
    });
    let text = serde_json::to_string_pretty(&document).map_err(runtime)?;
    io::write_file(out_dir, "report.json", &(text + "\n")).map_err(CliError::Runtime)?;
    io::write_summary(
        out_dir,
        "check",
        config,
        started.elapsed().as_secs_f64(),
        json!({
            "rnypr_status": report.rnypr.status,
            "general_status": report.general.status,
            "decomposed_status": report.decomposed.status,
        }),
    )
    .map_err(CliError::Runtime)?;
    println!(
        "check: report written to {}",
        out_dir.join("report.json").display()
    );
    Ok(())
}

fn trajectory_results(stats: &TrajectoryStats) -> serde_json::Value {
    json!({
        "time": stats.time,
        "samples": stats.samples,
        "substitution_events": stats.substitution_events,
        "cut_paste_events": stats.cut_paste_events,
        "marginals": {
            "a": stats.marginals[0], "t": stats.marginals[1],
            "c": stats.marginals[2], "g": stats.marginals[3],
        },
        "final_config": stats.final_config.to_string(),
    })
}

pub fn cmd_simulate(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let spec = config.sim_spec()?;
    let stats = match config.samples {
        Some(samples) => {
            estimate_stationary(&spec, config.burn_in, config.sample_interval, samples)
                .map_err(runtime)?
        }
        None => simulate(&spec).map_err(runtime)?,
    };
    io::write_file(out_dir, "trajectory.csv", &io::trajectory_csv(&stats))
        .map_err(CliError::Runtime)?;
    io::write_summary(
        out_dir,
        "simulate",
        config,
        started.elapsed().as_secs_f64(),
        trajectory_results(&stats),
    )
    .map_err(CliError::Runtime)?;
    println!(
        "simulate: {} samples to t = {}, {} substitutions, {} cut-and-paste events",
        stats.samples,
        stats.time,
        stats.substitution_events.iter().sum::<u64>(),
        stats.cut_paste_events
    );
    Ok(())
}

pub fn cmd_couple(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let spec = config.sim_spec()?;
    if !matches!(spec.model, RateModelSpec::RnYpr(_)) {
        return Err(CliError::Config(
            "the couple command requires a model of the RN+YpR family".into(),
        ));
    }
    let order = config.order()?;
    // initial configurations draw from a stream disjoint from the events
    let mut build_rng = spec.rng_with_stream(u64::MAX);
    let lower = config
        .initial(Some(config.init.as_deref().unwrap_or(
            match order.minimal() {
                ipslab::Nucleotide::A => "all-a",
                ipslab::Nucleotide::T => "all-t",
                ipslab::Nucleotide::C => "all-c",
                ipslab::Nucleotide::G => "all-g",
            },
        )))?
        .build(config.ring_n, &mut build_rng)
        .map_err(runtime)?;
    let upper = config
        .initial(Some(config.init_upper.as_deref().unwrap_or(
            match order.maximal() {
                ipslab::Nucleotide::A => "all-a",
                ipslab::Nucleotide::T => "all-t",
                ipslab::Nucleotide::C => "all-c",
                ipslab::Nucleotide::G => "all-g",
            },
        )))?
        .build(config.ring_n, &mut build_rng)
        .map_err(runtime)?;
    let stats = simulate_coupled(&spec, &order, &lower, &upper).map_err(runtime)?;
    io::write_file(out_dir, "coupled.csv", &io::coupled_csv(&stats, &order))
        .map_err(CliError::Runtime)?;
    io::write_summary(
        out_dir,
        "couple",
        config,
        started.elapsed().as_secs_f64(),
        json!({
            "order": order.id().to_string(),
            "order_violations": stats.order_violations,
            "flagged": stats.flagged,
            "coalescence_time": stats.coalescence_time,
            "discrepancy_freq": stats.discrepancy_freq,
            "cross_class_freq": stats.cross_class_freq(&order),
            "within_class_freq": stats.within_class_freq(&order),
            "time": stats.time,
            "events": stats.events,
        }),
    )
    .map_err(CliError::Runtime)?;
    println!(
        "couple: {} events to t = {}, order_violations = {}, coalescence = {:?}",
        stats.events, stats.time, stats.order_violations, stats.coalescence_time
    );
    Ok(())
}

fn branching_results(
    outcome: &BranchingOutcome,
    mean_offspring: f64,
    fixed_point: f64,
) -> serde_json::Value {
    json!({
        "extinct_fraction": outcome.extinct_fraction,
        "capped_fraction": outcome.capped_fraction,
        "unresolved_fraction": outcome.unresolved_fraction,
        "mean_time_to_extinction": if outcome.mean_time_to_extinction.is_nan() {
            serde_json::Value::Null
        } else {
            json!(outcome.mean_time_to_extinction)
        },
        "mean_offspring": mean_offspring,
        "extinction_fixed_point": fixed_point,
        "runs": outcome.runs,
    })
}

pub fn cmd_dual(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let Some(dual) = &config.dual else {
        return Err(CliError::Config(
            "the dual command needs a `dual` section".into(),
        ));
    };
    match dual {
        DualConfig::Branching {
            s,
            lambda_bar,
            lambda_bar_0,
            initial,
            runs,
            horizon,
            cap,
            survival_points,
        } => {
            let spec = BranchingSpec {
                s: *s,
                lambda_bar: *lambda_bar,
                lambda_bar_0: *lambda_bar_0,
                initial: *initial,
                runs: *runs,
                horizon: *horizon,
                cap: *cap,
                seed: config.seed,
                survival_points: *survival_points,
            };
            let outcome = simulate_branching(&spec).map_err(runtime)?;
            let m = mean_offspring(&spec).map_err(runtime)?;
            let q = extinction_fixed_point(&spec).map_err(runtime)?;
            io::write_file(
                out_dir,
                "survival.csv",
                &io::survival_csv(&outcome.survival),
            )
            .map_err(CliError::Runtime)?;
            io::write_summary(
                out_dir,
                "dual",
                config,
                started.elapsed().as_secs_f64(),
                branching_results(&outcome, m, q),
            )
            .map_err(CliError::Runtime)?;
            println!(
                "dual branching: extinction = {} (fixed point {q}), capped = {}",
                outcome.extinct_fraction, outcome.capped_fraction
            );
        }
        DualConfig::DecomposedBranching {
            parts,
            lambda_bar_0d,
            initial,
            runs,
            horizon,
            cap,
            survival_points,
        } => {
            let spec = DecomposedBranchingSpec {
                parts: parts.clone(),
                lambda_bar_0d: *lambda_bar_0d,
                initial: *initial,
                runs: *runs,
                horizon: *horizon,
                cap: *cap,
                seed: config.seed,
                survival_points: *survival_points,
            };
            let outcome = simulate_branching_decomposed(&spec).map_err(runtime)?;
            let m = mean_offspring_decomposed(&spec).map_err(runtime)?;
            let q = extinction_fixed_point_decomposed(&spec).map_err(runtime)?;
            io::write_file(
                out_dir,
                "survival.csv",
                &io::survival_csv(&outcome.survival),
            )
            .map_err(CliError::Runtime)?;
            io::write_summary(
                out_dir,
                "dual",
                config,
                started.elapsed().as_secs_f64(),
                branching_results(&outcome, m, q),
            )
            .map_err(CliError::Runtime)?;
            println!(
                "dual decomposed branching: extinction = {} (fixed point {q})",
                outcome.extinct_fraction
            );
        }
        DualConfig::Set {
            initial_set,
            runs,
            horizon,
            checkpoints,
        } => {
            let model = match config.rate_model()? {
                RateModelSpec::Generic(m) => m,
                RateModelSpec::RnYpr(p) => ipslab::GenericRateModel::from_rnypr(&p),
            };
            let spec = DualSetSpec {
                model,
                kernel: config.kernel()?,
                ring_n: config.ring_n,
                initial_set: initial_set.clone(),
                horizon: *horizon,
                runs: *runs,
                seed: config.seed,
                checkpoints: checkpoints.clone(),
            };
            let outcome = simulate_dual_set(&spec).map_err(runtime)?;
            io::write_file(
                out_dir,
                "survival.csv",
                &io::survival_csv(&outcome.survival_curve),
            )
            .map_err(CliError::Runtime)?;
            io::write_summary(
                out_dir,
                "dual",
                config,
                started.elapsed().as_secs_f64(),
                json!({
                    "empty_fraction_by_time": outcome.empty_fraction_by_time,
                    "mean_cardinality": outcome.mean_cardinality,
                    "runs": outcome.runs,
                }),
            )
            .map_err(CliError::Runtime)?;
            let last = outcome.empty_fraction_by_time.last().unwrap();
            println!(
                "dual set: P(empty by t = {}) = {} over {} runs",
                last.t, last.fraction_alive, outcome.runs
            );
        }
    }
    Ok(())
}

pub fn cmd_moments(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let Some(moments) = &config.moments else {
        return Err(CliError::Config(
            "the moments command needs a `moments` section".into(),
        ));
    };
    let params = config.rnypr_params()?;
    let rows = io::read_trajectory_csv(&moments.input_csv).map_err(|e| runtime(e.to_string()))?;
    if rows.is_empty() {
        return Err(CliError::Runtime(
            "the trajectory file has no samples".into(),
        ));
    }
    // rebuild trajectory statistics from the stored rows
    let stats = TrajectoryStats::from_rows(
        RingConfig::uniform(RingConfig::MIN_SITES, ipslab::Nucleotide::A).map_err(runtime)?,
        rows.last().map(|r| r.t).unwrap_or(0.0),
        [0; 4],
        0,
        rows,
        ipslab::sim::DEFAULT_BATCHES,
    );
    let residuals = analytics::moment_residuals(&params, &stats).map_err(runtime)?;
    let with_se = analytics::moment_residuals_with_se(&params, &stats).map_err(runtime)?;
    let mut table = Vec::with_capacity(residuals.len());
    let mut all_pass = true;
    for (eq, (_, residual, se)) in residuals.iter().zip(&with_se) {
        // floor covers identities that hold to rounding with zero spread
        let tolerance = moments.se_multiplier * se + 1e-12;
        let pass = residual.abs() <= tolerance;
        all_pass &= pass;
        table.push(io::ResidualRow {
            equation: eq.name.clone(),
            lhs: eq.lhs,
            rhs: eq.rhs,
            residual: *residual,
            tolerance,
            pass,
        });
    }
    io::write_file(out_dir, "residuals.csv", &io::residuals_csv(&table))
        .map_err(CliError::Runtime)?;
    io::write_summary(
        out_dir,
        "moments",
        config,
        started.elapsed().as_secs_f64(),
        json!({
            "all_pass": all_pass,
            "se_multiplier": moments.se_multiplier,
            "equations": table.iter().map(|r| json!({
                "equation": r.equation,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "residual": r.residual,
                "tolerance": r.tolerance,
                "pass": r.pass,
            })).collect::<Vec<_>>(),
        }),
    )
    .map_err(CliError::Runtime)?;
    println!("moments: {} equations, all_pass = {all_pass}", table.len());
    Ok(())
}
