//! Benchmark configuration and method-spec parsing.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rafeast::contour::SpectralInterval;
use rafeast::oracle::ORACLE_SIZE_GUARD;

/// One solver variant in the sweep. The first configured method is the
/// speedup baseline.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    /// Effective quadrature node count.
    pub n_c: usize,
    pub max_iter: usize,
    /// Phase-1 randomized warmstart on/off.
    pub warmstart: bool,
    /// "direct" or "iterative".
    pub solver_mode: String,
    pub solver_tolerance: f64,
    /// Eigenpair residual stop; warmstarted runs rely on the max_iter cap.
    pub residual_tolerance: f64,
}

/// Parses `NAME:NC:MAXITER[:warm]`.
pub fn parse_method(spec: &str) -> Result<MethodSpec, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() < 3 || parts.len() > 4 {
        return Err(format!("method spec '{spec}' is not NAME:NC:MAXITER[:warm]"));
    }
    let n_c: usize = parts[1].parse().map_err(|_| format!("bad node count in '{spec}'"))?;
    let max_iter: usize = parts[2].parse().map_err(|_| format!("bad max_iter in '{spec}'"))?;
    let warmstart = match parts.get(3) {
        None => false,
        Some(&"warm") => true,
        Some(other) => return Err(format!("unknown method suffix '{other}' in '{spec}'")),
    };
    if n_c < 2 || n_c % 2 != 0 {
        return Err(format!("node count {n_c} must be even and >= 2"));
    }
    if max_iter < 1 {
        return Err("max_iter must be >= 1".into());
    }
    Ok(MethodSpec {
        name: parts[0].to_string(),
        n_c,
        max_iter,
        warmstart,
        solver_mode: "direct".into(),
        solver_tolerance: 1e-12,
        residual_tolerance: 1e-10,
    })
}

/// Full sweep configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub sizes: Vec<usize>,
    /// Seeds per (method, size); runs use seeds 0..seeds.
    pub seeds: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Cap of the subspace-dimension policy m0 = min(cap, count + 5).
    pub m0_cap: usize,
    pub methods: Vec<MethodSpec>,
    pub out_dir: PathBuf,
    pub oracle: bool,
    pub parallel_quadrature: bool,
    pub emit_plots: bool,
}

impl BenchmarkConfig {
    pub fn interval(&self) -> Result<SpectralInterval, String> {
        SpectralInterval::new(self.lambda_min, self.lambda_max).map_err(|e| e.to_string())
    }

    /// Rejects invalid configurations before any run.
    pub fn validate(&self) -> Result<(), String> {
        if self.seeds < 1 {
            return Err("need at least one seed".into());
        }
        if self.sizes.is_empty() {
            return Err("need at least one size".into());
        }
        if self.methods.is_empty() {
            return Err("need at least one method".into());
        }
        self.interval()?;
        if self.oracle {
            for &n in &self.sizes {
                if n > ORACLE_SIZE_GUARD {
                    return Err(format!(
                        "size {n} exceeds the dense-oracle guard {ORACLE_SIZE_GUARD}; disable the oracle or shrink n"
                    ));
                }
            }
        }
        for &n in &self.sizes {
            if n < 2 {
                return Err(format!("size {n} too small"));
            }
        }
        Ok(())
    }
}
