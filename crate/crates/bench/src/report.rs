//! Report structures and the plot-ready CSV panels.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::MethodSpec;

/// One (method, size, seed) run. Timing fields are the only nondeterministic
/// content; everything else is seed-determined.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub n: usize,
    pub seed: u64,
    pub phase1_seconds: f64,
    pub phase2_seconds: f64,
    pub total_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
    pub eigenvalue_count: usize,
    pub eigenvalues: Vec<f64>,
    /// Against the oracle window, when the oracle is enabled.
    pub max_error: Option<f64>,
    /// baseline_total / this_total for the matched (n, seed).
    pub speedup: Option<f64>,
    pub q_used: Option<usize>,
    pub rho_hat: Option<f64>,
    pub epsilon_hat: Option<f64>,
    /// Realized distance from exterior eigenvalues to the contour circle.
    pub realized_gap: Option<f64>,
    pub realized_gap_flagged: bool,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(method: &MethodSpec, n: usize, seed: u64, error: String) -> Self {
        RunRecord {
            method: method.name.clone(),
            n,
            seed,
            phase1_seconds: 0.0,
            phase2_seconds: 0.0,
            total_seconds: 0.0,
            iterations: 0,
            converged: false,
            eigenvalue_count: 0,
            eigenvalues: Vec::new(),
            max_error: None,
            speedup: None,
            q_used: None,
            rho_hat: None,
            epsilon_hat: None,
            realized_gap: None,
            realized_gap_flagged: false,
            error: Some(error),
        }
    }
}

/// Subspace-size policy log: in-window count versus the m0 actually used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct M0LogEntry {
    pub n: usize,
    pub seed: u64,
    pub in_window_count: usize,
    pub m0: usize,
}

/// Per-(method, size) aggregate over seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub n: usize,
    pub runs: usize,
    pub mean_total_seconds: f64,
    pub std_total_seconds: f64,
    pub mean_phase1_seconds: f64,
    pub mean_phase2_seconds: f64,
    pub mean_max_error: Option<f64>,
    pub worst_max_error: Option<f64>,
    pub mean_speedup: Option<f64>,
    pub mean_iterations: f64,
}

/// Full-fidelity sweep report (serialized as report.json).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub sizes: Vec<usize>,
    pub seeds: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub m0_cap: usize,
    pub methods: Vec<MethodSpec>,
    pub oracle: bool,
    pub parallel_quadrature: bool,
    pub model_caveat: String,
    pub m0_log: Vec<M0LogEntry>,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), String> {
    let mut body = String::from(header);
    body.push('\n');
    for r in rows {
        body.push_str(r);
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| e.to_string())
}

/// Emits the four plot panels:
/// A speedup vs n per method, B total time vs n, C phase split at the
/// largest n, D max error vs n.
pub fn emit_plot_data(report: &BenchmarkReport, out_dir: &Path) -> Result<(), String> {
    let mut a_rows = Vec::new();
    let mut b_rows = Vec::new();
    let mut d_rows = Vec::new();
    for agg in &report.aggregates {
        a_rows.push(format!(
            "{},{},{}",
            agg.method,
            agg.n,
            agg.mean_speedup.map_or(String::from("nan"), |v| format!("{v:.6}"))
        ));
        b_rows.push(format!("{},{},{:.6e}", agg.method, agg.n, agg.mean_total_seconds));
        d_rows.push(format!(
            "{},{},{},{}",
            agg.method,
            agg.n,
            agg.mean_max_error.map_or(String::from("nan"), |v| format!("{v:.6e}")),
            agg.worst_max_error.map_or(String::from("nan"), |v| format!("{v:.6e}")),
        ));
    }
    write_csv(&out_dir.join("panel_a.csv"), "method,n,speedup", &a_rows)?;
    write_csv(&out_dir.join("panel_b.csv"), "method,n,total_seconds", &b_rows)?;

    let largest = report.sizes.iter().copied().max().unwrap_or(0);
    let c_rows: Vec<String> = report
        .aggregates
        .iter()
        .filter(|a| a.n == largest)
        .map(|a| {
            format!(
                "{},{},{:.6e},{:.6e},{:.6e}",
                a.method, a.n, a.mean_phase1_seconds, a.mean_phase2_seconds, a.mean_total_seconds
            )
        })
        .collect();
    write_csv(
        &out_dir.join("panel_c.csv"),
        "method,n,phase1_seconds,phase2_seconds,total_seconds",
        &c_rows,
    )?;
    write_csv(&out_dir.join("panel_d.csv"), "method,n,mean_max_error,worst_max_error", &d_rows)?;
    Ok(())
}
