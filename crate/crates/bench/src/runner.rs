//! Sweep executor: sequential over configurations for timing fidelity.

use std::time::Instant;

use rafeast::analysis::fit_contraction;
use rafeast::contour::{build_contour, realized_gap_distance};
use rafeast::feast::{feast_standard, ra_feast, select_q_for_interval, FeastConfig};
use rafeast::oracle::{dense_eigenvalues, max_error_metric};
use rafeast::problems::{laplacian, random_geometric_graph};
use rafeast::solver::{SolverConfig, SolverMode};
use rafeast::sparse::SymmetricSparseMatrix;
use rafeast::warmstart::WarmstartConfig;

use crate::config::{BenchmarkConfig, MethodSpec};
use crate::report::{Aggregate, BenchmarkReport, M0LogEntry, RunRecord};

struct ProblemInstance {
    matrix: SymmetricSparseMatrix,
    truth: Option<Vec<f64>>,
    /// (last in-window eigenvalue, first beyond-basis eigenvalue)
    oracle_pair: Option<(f64, f64)>,
    m0: usize,
    count: Option<usize>,
    realized_gap: Option<(f64, bool)>,
}

fn prepare_instance(cfg: &BenchmarkConfig, n: usize, seed: u64) -> Result<ProblemInstance, String> {
    let interval = cfg.interval()?;
    let graph = random_geometric_graph(n, seed);
    let matrix = laplacian(&graph);
    if !cfg.oracle {
        return Ok(ProblemInstance {
            matrix,
            truth: None,
            oracle_pair: None,
            m0: cfg.m0_cap,
            count: None,
            realized_gap: None,
        });
    }
    let all = dense_eigenvalues(&matrix.to_dense()).map_err(|e| e.to_string())?;
    let truth: Vec<f64> =
        all.iter().copied().filter(|&w| w >= interval.lambda_min && w <= interval.lambda_max).collect();
    let count = truth.len();
    let m0 = cfg.m0_cap.min(count + 5).max(1);
    let oracle_pair = if count >= 1 && m0 < all.len() {
        Some((truth[count - 1], all[m0]))
    } else {
        None
    };
    let contour = build_contour(&interval, 2).map_err(|e| e.to_string())?;
    let realized_gap = realized_gap_distance(&contour, &all);
    Ok(ProblemInstance {
        matrix,
        truth: Some(truth),
        oracle_pair,
        m0,
        count: Some(count),
        realized_gap,
    })
}

fn solver_config(m: &MethodSpec) -> SolverConfig {
    match m.solver_mode.as_str() {
        "iterative" => SolverConfig {
            mode: SolverMode::Iterative,
            tolerance: m.solver_tolerance,
            max_inner_iterations: 200,
        },
        _ => SolverConfig::direct(),
    }
}

fn run_one(
    cfg: &BenchmarkConfig,
    method: &MethodSpec,
    inst: &ProblemInstance,
    n: usize,
    seed: u64,
) -> RunRecord {
    let interval = match cfg.interval() {
        Ok(iv) => iv,
        Err(e) => return RunRecord::failed(method, n, seed, e),
    };
    let mut feast_cfg = FeastConfig::new(interval, inst.m0, method.n_c, method.max_iter);
    feast_cfg.solver = solver_config(method);
    feast_cfg.residual_tolerance = method.residual_tolerance;
    feast_cfg.seed = seed;
    feast_cfg.parallel_quadrature = cfg.parallel_quadrature;

    let t0 = Instant::now();
    let result = if method.warmstart {
        let p = WarmstartConfig::default_oversampling(inst.m0);
        let base = match WarmstartConfig::new(inst.m0, p, 0, seed, 0.05) {
            Ok(w) => w,
            Err(e) => return RunRecord::failed(method, n, seed, e.to_string()),
        };
        match select_q_for_interval(&inst.matrix, &interval, &base, 0.1, inst.oracle_pair) {
            Ok(q) => {
                let warm = WarmstartConfig { q, ..base };
                ra_feast(&inst.matrix, &feast_cfg, &warm)
            }
            Err(e) => return RunRecord::failed(method, n, seed, e.to_string()),
        }
    } else {
        feast_standard(&inst.matrix, &feast_cfg)
    };
    let total_seconds = t0.elapsed().as_secs_f64();

    let result = match result {
        Ok(r) => r,
        Err(e) => return RunRecord::failed(method, n, seed, e.to_string()),
    };

    let max_error = inst.truth.as_ref().and_then(|truth| {
        if result.eigenvalues.len() <= truth.len() {
            max_error_metric(&result.eigenvalues, truth).ok()
        } else {
            None
        }
    });

    // contraction fit of the residual trace when enough iterations ran
    let residual_trace: Vec<f64> =
        result.trace.iter().map(|t| t.max_eigenpair_residual).filter(|r| r.is_finite()).collect();
    let fit = if residual_trace.len() >= 3 {
        fit_contraction(&residual_trace, 1e-16).ok()
    } else {
        None
    };

    RunRecord {
        method: method.name.clone(),
        n,
        seed,
        phase1_seconds: result.phase1_seconds,
        phase2_seconds: (total_seconds - result.phase1_seconds).max(0.0),
        total_seconds,
        iterations: result.iterations_used,
        converged: result.converged,
        eigenvalue_count: result.eigenvalues.len(),
        eigenvalues: result.eigenvalues.clone(),
        max_error,
        speedup: None,
        q_used: result.warmstart_q,
        rho_hat: fit.map(|f| f.rho_hat),
        epsilon_hat: fit.map(|f| f.epsilon_hat),
        realized_gap: inst.realized_gap.map(|(d, _)| d),
        realized_gap_flagged: inst.realized_gap.map(|(_, f)| f).unwrap_or(false),
        error: None,
    }
}

/// Runs the full sweep. Per-run failures are recorded in the report, never
/// aborting the sweep; configuration errors abort before any run.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport, String> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| e.to_string())?;

    let mut runs: Vec<RunRecord> = Vec::new();
    let mut m0_log: Vec<M0LogEntry> = Vec::new();

    for &n in &cfg.sizes {
        for seed in 0..cfg.seeds {
            let inst = match prepare_instance(cfg, n, seed) {
                Ok(i) => i,
                Err(e) => {
                    for method in &cfg.methods {
                        runs.push(RunRecord::failed(method, n, seed, e.clone()));
                    }
                    continue;
                }
            };
            if let Some(count) = inst.count {
                m0_log.push(M0LogEntry { n, seed, in_window_count: count, m0: inst.m0 });
            }
            let mut baseline_total: Option<f64> = None;
            for (mi, method) in cfg.methods.iter().enumerate() {
                let mut rec = run_one(cfg, method, &inst, n, seed);
                if mi == 0 {
                    baseline_total = rec.error.is_none().then_some(rec.total_seconds);
                }
                rec.speedup = match (baseline_total, rec.error.is_none()) {
                    (Some(b), true) => Some(b / rec.total_seconds),
                    _ => None,
                };
                // persist the eigenvalue list
                let fname = format!("run_{}_{}_{}.txt", method.name, n, seed);
                let path = cfg.out_dir.join(&fname);
                let body: String =
                    rec.eigenvalues.iter().map(|v| format!("{v:.17e}\n")).collect();
                if let Err(e) = std::fs::write(&path, body) {
                    rec.error = Some(format!("persisting eigenvalues failed: {e}"));
                }
                runs.push(rec);
            }
        }
    }

    let aggregates = aggregate(cfg, &runs);
    let report = BenchmarkReport {
        sizes: cfg.sizes.clone(),
        seeds: cfg.seeds,
        lambda_min: cfg.lambda_min,
        lambda_max: cfg.lambda_max,
        m0_cap: cfg.m0_cap,
        methods: cfg.methods.clone(),
        oracle: cfg.oracle,
        parallel_quadrature: cfg.parallel_quadrature,
        model_caveat: "speedup model assumes nnz(A) = O(n); phase-1 cost is undercounted for denser matrices".into(),
        m0_log,
        runs,
        aggregates,
    };

    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    std::fs::write(cfg.out_dir.join("report.json"), json).map_err(|e| e.to_string())?;
    if cfg.emit_plots {
        crate::report::emit_plot_data(&report, &cfg.out_dir)?;
    }
    Ok(report)
}

fn aggregate(cfg: &BenchmarkConfig, runs: &[RunRecord]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for method in &cfg.methods {
        for &n in &cfg.sizes {
            let group: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.method == method.name && r.n == n && r.error.is_none())
                .collect();
            if group.is_empty() {
                continue;
            }
            let k = group.len() as f64;
            let mean = |f: &dyn Fn(&RunRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / k;
            let mean_total = mean(&|r| r.total_seconds);
            let std_total = (group
                .iter()
                .map(|r| (r.total_seconds - mean_total).powi(2))
                .sum::<f64>()
                / k)
                .sqrt();
            let errs: Vec<f64> = group.iter().filter_map(|r| r.max_error).collect();
            let speeds: Vec<f64> = group.iter().filter_map(|r| r.speedup).collect();
            out.push(Aggregate {
                method: method.name.clone(),
                n,
                runs: group.len(),
                mean_total_seconds: mean_total,
                std_total_seconds: std_total,
                mean_phase1_seconds: mean(&|r| r.phase1_seconds),
                mean_phase2_seconds: mean(&|r| r.phase2_seconds),
                mean_max_error: if errs.is_empty() { None } else { Some(errs.iter().sum::<f64>() / errs.len() as f64) },
                worst_max_error: errs.iter().copied().fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e)))),
                mean_speedup: if speeds.is_empty() { None } else { Some(speeds.iter().sum::<f64>() / speeds.len() as f64) },
                mean_iterations: mean(&|r| r.iterations as f64),
            });
        }
    }
    out
}
