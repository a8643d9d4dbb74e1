//! Deterministic file emission: CSV writers with `.` decimals and no
//! locale, plus the summary documents. Identical configuration and seed
//! reproduce CSV files byte for byte; summaries additionally carry the
//! wall clock.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ipslab::alphabet::{AlphabetOrder, Nucleotide};
use ipslab::dual::SurvivalPoint;
use ipslab::sim::{ordered_pairs, CoupledStats, FreqSample, TrajectoryStats};

use crate::config::{ConfigError, RunConfig};

pub const PAIR_COLUMNS: [(Nucleotide, Nucleotide); 16] = {
    let all = Nucleotide::ALL;
    let mut out = [(Nucleotide::A, Nucleotide::A); 16];
    let mut i = 0;
    while i < 16 {
        out[i] = (all[i / 4], all[i % 4]);
        i += 1;
    }
    out
};

pub fn trajectory_csv(stats: &TrajectoryStats) -> String {
    let mut out = String::new();
    out.push_str("t,freq_a,freq_t,freq_c,freq_g");
    for (x, y) in PAIR_COLUMNS {
        let _ = write!(out, ",pair_{x}{y}");
    }
    out.push('\n');
    for row in &stats.rows {
        let _ = write!(out, "{}", row.t);
        for m in row.marginals {
            let _ = write!(out, ",{m}");
        }
        for (x, y) in PAIR_COLUMNS {
            let _ = write!(out, ",{}", row.pairs[x.index()][y.index()]);
        }
        out.push('\n');
    }
    out
}

pub fn coupled_csv(stats: &CoupledStats, order: &AlphabetOrder) -> String {
    let pairs = ordered_pairs(order);
    let mut out = String::new();
    out.push_str("t,viol_count,discrepancy");
    for (l, u) in pairs {
        let _ = write!(out, ",pair_{l}{u}");
    }
    out.push('\n');
    for row in &stats.rows {
        let _ = write!(out, "{},{},{}", row.t, row.viol_count, row.discrepancy);
        for (l, u) in pairs {
            let _ = write!(out, ",{}", row.pair_freqs[l.index()][u.index()]);
        }
        out.push('\n');
    }
    out
}

pub fn survival_csv(points: &[SurvivalPoint]) -> String {
    let mut out = String::from("t,fraction_alive,se\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.t, p.fraction_alive, p.se);
    }
    out
}

pub struct ResidualRow {
    pub equation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn residuals_csv(rows: &[ResidualRow]) -> String {
    let mut out = String::from("equation,lhs,rhs,residual,tolerance,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.equation, r.lhs, r.rhs, r.residual, r.tolerance, r.pass
        );
    }
    out
}

/// Parse a trajectory CSV back into frequency samples.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<FreqSample>, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::Message(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| ConfigError::Message("empty trajectory file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| -> Result<usize, ConfigError> {
        columns
            .iter()
            .position(|&c| c == name)
            .ok_or_else(|| ConfigError::Message(format!("missing column {name:?}")))
    };
    let t_col = col("t")?;
    let marginal_cols: [usize; 4] = [
        col("freq_a")?,
        col("freq_t")?,
        col("freq_c")?,
        col("freq_g")?,
    ];
    let mut pair_cols = [[0usize; 4]; 4];
    for (x, y) in PAIR_COLUMNS {
        pair_cols[x.index()][y.index()] = col(&format!("pair_{x}{y}"))?;
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |idx: usize| -> Result<f64, ConfigError> {
            fields
                .get(idx)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    ConfigError::Message(format!("bad field {idx} on data line {}", lineno + 1))
                })
        };
        let mut marginals = [0.0; 4];
        for (i, &c) in marginal_cols.iter().enumerate() {
            marginals[i] = get(c)?;
        }
        let mut pairs = [[0.0; 4]; 4];
        for (x, y) in PAIR_COLUMNS {
            pairs[x.index()][y.index()] = get(pair_cols[x.index()][y.index()])?;
        }
        rows.push(FreqSample {
            t: get(t_col)?,
            marginals,
            pairs,
        });
    }
    Ok(rows)
}

/// Command summary: configuration echo, seed, version, wall clock and the
/// command-specific results document.
pub fn write_summary(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    wall_clock_seconds: f64,
    results: serde_json::Value,
) -> Result<PathBuf, String> {
    let summary = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "wall_clock_seconds": wall_clock_seconds,
        "config": config,
        "results": results,
    });
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
    fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, String> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}
