use std::path::PathBuf;

use clap::Parser;

use rafeast_bench::{parse_method, run_benchmark, BenchmarkConfig, MethodSpec};

/// Graph-Laplacian eigensolver benchmark: sweeps solver variants over seeded
/// random geometric graphs, validates against the dense oracle, and writes
/// report.json plus optional CSV plot panels.
#[derive(Parser, Debug)]
#[command(name = "rafeast-bench", version, about)]
struct Cli {
    /// Problem sizes (node counts), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "500")]
    sizes: Vec<usize>,

    /// Seeds per configuration (runs use seeds 0..N).
    #[arg(long, default_value_t = 3)]
    seeds: u64,

    /// Target window as MIN MAX.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values = ["0.001", "5.0"])]
    interval: Vec<f64>,

    /// Cap of the subspace-size policy m0 = min(cap, count + 5).
    #[arg(long, default_value_t = 40)]
    m0: usize,

    /// Method spec NAME:NC:MAXITER[:warm]; repeatable. The first method is
    /// the speedup baseline.
    #[arg(long = "method")]
    methods: Vec<String>,

    /// Validate against the dense oracle (sizes must stay within its guard).
    #[arg(long, value_parser = ["on", "off"], default_value = "on")]
    oracle: String,

    /// Output directory.
    #[arg(long, default_value = "bench_out")]
    out: PathBuf,

    /// Solve quadrature nodes on separate threads (results stay bitwise
    /// identical; timings change).
    #[arg(long = "parallel-quadrature", value_parser = ["on", "off"], default_value = "off")]
    parallel_quadrature: String,

    /// Also write the four CSV plot panels.
    #[arg(long = "emit-plots", default_value_t = false)]
    emit_plots: bool,
}

fn main() {
    let cli = Cli::parse();
    let methods: Vec<MethodSpec> = if cli.methods.is_empty() {
        vec![
            parse_method("standard:8:20").expect("default method"),
            parse_method("rafeast:2:2:warm").expect("default method"),
        ]
    } else {
        match cli.methods.iter().map(|s| parse_method(s)).collect::<Result<Vec<_>, _>>() {
            Ok(ms) => ms,
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(2);
            }
        }
    };

    let cfg = BenchmarkConfig {
        sizes: cli.sizes,
        seeds: cli.seeds,
        lambda_min: cli.interval[0],
        lambda_max: cli.interval[1],
        m0_cap: cli.m0,
        methods,
        out_dir: cli.out,
        oracle: cli.oracle == "on",
        parallel_quadrature: cli.parallel_quadrature == "on",
        emit_plots: cli.emit_plots,
    };

    match run_benchmark(&cfg) {
        Ok(report) => {
            let failed = report.runs.iter().filter(|r| r.error.is_some()).count();
            println!(
                "completed {} runs ({} failed); report at {}",
                report.runs.len(),
                failed,
                cfg.out_dir.join("report.json").display()
            );
            for agg in &report.aggregates {
                println!(
                    "  {} n={}: total {:.3}s (phase1 {:.3}s), speedup {}, max_error {}",
                    agg.method,
                    agg.n,
                    agg.mean_total_seconds,
                    agg.mean_phase1_seconds,
                    agg.mean_speedup.map_or("n/a".into(), |v| format!("{v:.2}x")),
                    agg.worst_max_error.map_or("n/a".into(), |v| format!("{v:.2e}")),
                );
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
