//! Phase 2: the contour-filtered refinement loop. Applies the quadrature
//! projector through shifted solves, re-orthonormalizes with column-pivoted
//! QR, extracts Ritz pairs, and records per-iteration diagnostics
//! (residuals, perturbation estimates, optional oracle-measured subspace
//! error).

use std::time::Instant;

use crate::contour::{build_contour, rational_filter_value, Contour, SpectralInterval};
use crate::dense::{pivoted_qr_orthonormalize, DenseMatrix};
use crate::error::Error;
use crate::oracle;
use crate::solver::{
    block_residuals, factor_shifted, iterative_solve_block, solve_block, ShiftedFactorization,
    SolverConfig, SolverMode,
};
use crate::sparse::{spmm, SymmetricSparseMatrix};
use crate::warmstart::{
    estimate_spectral_top, gaussian_test_matrix, randomized_subspace, select_power_iterations,
    sketch_rayleigh_ritz, ScaledOperator, SubspaceBasis, WarmstartConfig,
};
use crate::Result;

/// Refinement-engine configuration.
#[derive(Debug, Clone)]
pub struct FeastConfig {
    /// Effective quadrature node count (stored nodes = n_c / 2).
    pub n_c: usize,
    /// Hard cap on refinement iterations.
    pub max_iter: usize,
    pub solver: SolverConfig,
    /// Eigenpair residual target for the tolerance-based stop.
    pub residual_tolerance: f64,
    /// Initial basis; a seeded random orthonormal basis when absent.
    pub warmstart: Option<SubspaceBasis>,
    /// Subspace dimension.
    pub m0: usize,
    pub interval: SpectralInterval,
    /// Seed for the random initial basis (standard runs).
    pub seed: u64,
    /// Solve the per-node systems on separate threads; the weighted
    /// summation stays in fixed node order either way.
    pub parallel_quadrature: bool,
}

impl FeastConfig {
    pub fn new(interval: SpectralInterval, m0: usize, n_c: usize, max_iter: usize) -> Self {
        Self {
            n_c,
            max_iter,
            solver: SolverConfig::direct(),
            residual_tolerance: 1e-10,
            warmstart: None,
            m0,
            interval,
            seed: 0,
            parallel_quadrature: false,
        }
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub iteration: usize,
    /// ||P^(m) - P||_F against the oracle eigenbasis (oracle runs only).
    pub subspace_error: Option<f64>,
    pub max_eigenpair_residual: f64,
    /// Upper estimate of the per-iteration perturbation: solver residuals
    /// weighted by |w_j| plus the filter deviation at the current Ritz
    /// values. Diagnostic only, never control flow.
    pub estimated_perturbation: f64,
    pub solve_seconds: f64,
    pub orth_seconds: f64,
    pub ritz_seconds: f64,
}

/// Converged eigenpairs inside the window plus run diagnostics.
#[derive(Debug, Clone)]
pub struct EigResult {
    /// Ascending, inside the window (up to the selection slack).
    pub eigenvalues: Vec<f64>,
    /// Column k pairs with eigenvalues[k]; orthonormal.
    pub eigenvectors: DenseMatrix,
    /// ||A v - lambda v||_2 per pair.
    pub residual_norms: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub trace: Vec<IterationTrace>,
    /// Subspace error of the initial basis (e_0), measured when an oracle
    /// eigenbasis of matching dimension is attached.
    pub initial_subspace_error: Option<f64>,
    /// Wall time of the randomized warmstart; zero for standard runs.
    pub phase1_seconds: f64,
    /// Power iterations spent in the warmstart, when one ran.
    pub warmstart_q: Option<usize>,
}

impl EigResult {
    /// e_0, e_1, ... where available: the initial error followed by the
    /// per-iteration oracle-measured errors.
    pub fn subspace_error_trace(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(e0) = self.initial_subspace_error {
            out.push(e0);
        }
        out.extend(self.trace.iter().filter_map(|t| t.subspace_error));
        out
    }
}

fn per_node_solve(
    a: &SymmetricSparseMatrix,
    contour: &Contour,
    idx: usize,
    q: &DenseMatrix,
    solver: &SolverConfig,
    fact: Option<&ShiftedFactorization>,
) -> Result<(DenseMatrix, f64)> {
    let z = contour.nodes[idx];
    let w = contour.weights[idx];
    let (x, achieved) = match solver.mode {
        SolverMode::Direct => {
            let owned;
            let f = match fact {
                Some(f) => f,
                None => {
                    owned = factor_shifted(a, z)?;
                    &owned
                }
            };
            let x = solve_block(f, q)?;
            let res = block_residuals(a, z, &x, q)?;
            let worst = res.into_iter().fold(0.0f64, f64::max);
            (x, worst)
        }
        SolverMode::Iterative => {
            let out = iterative_solve_block(a, z, q, solver)?;
            let worst = out.achieved_residuals.iter().copied().fold(0.0f64, f64::max);
            (out.x, worst)
        }
    };
    // contribution 2 Re(w X) = 2 (w_re X_re - w_im X_im)
    let mut contrib = x.re;
    contrib.scale(2.0 * w.re);
    contrib.axpy(-2.0 * w.im, &x.im);
    Ok((contrib, achieved * w.norm()))
}

/// One application of the discrete spectral projector:
/// Q~ = 2 Re sum_j w_j X_j with (z_j I - A) X_j = Q, summed in node order.
/// Returns the filtered block and the solver contribution to the
/// perturbation estimate, sum_j |w_j| r_j ||Q||_F.
pub fn apply_filter(
    a: &SymmetricSparseMatrix,
    contour: &Contour,
    q: &SubspaceBasis,
    solver: &SolverConfig,
) -> Result<(DenseMatrix, f64)> {
    apply_filter_inner(a, contour, &q.columns, solver, None, false)
}

fn apply_filter_inner(
    a: &SymmetricSparseMatrix,
    contour: &Contour,
    q: &DenseMatrix,
    solver: &SolverConfig,
    facts: Option<&[ShiftedFactorization]>,
    parallel: bool,
) -> Result<(DenseMatrix, f64)> {
    let stored = contour.nodes.len();
    let mut parts: Vec<Option<(DenseMatrix, f64)>> = (0..stored).map(|_| None).collect();
    if parallel && stored > 1 {
        let results: Vec<Result<(DenseMatrix, f64)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..stored)
                .map(|idx| {
                    let fact = facts.map(|f| &f[idx]);
                    scope.spawn(move || per_node_solve(a, contour, idx, q, solver, fact))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        });
        for (slot, r) in parts.iter_mut().zip(results) {
            *slot = Some(r?);
        }
    } else {
        for idx in 0..stored {
            let fact = facts.map(|f| &f[idx]);
            parts[idx] = Some(per_node_solve(a, contour, idx, q, solver, fact)?);
        }
    }
    // fixed node order for the weighted summation
    let mut iter = parts.into_iter().map(Option::unwrap);
    let (mut acc, mut eps) = iter.next().expect("contour has at least one node");
    for (part, e) in iter {
        acc.axpy(1.0, &part);
        eps += e;
    }
    let qnorm = (q.cols as f64).sqrt();
    Ok((acc, eps * qnorm))
}

/// Rayleigh-Ritz extraction: diagonalizes Q^T A Q and rotates the basis.
/// Returns Ritz values ascending with the rotated basis aligned to them.
pub fn rayleigh_ritz(
    a: &SymmetricSparseMatrix,
    q: &SubspaceBasis,
) -> Result<(Vec<f64>, SubspaceBasis)> {
    let aq = spmm(a, &q.columns)?;
    let s = q.columns.transpose_matmul(&aq);
    let eig = oracle::symmetric_eig_small(&s)?;
    let rotated = q.columns.matmul(&eig.eigenvectors);
    Ok((eig.eigenvalues, SubspaceBasis::from_columns(rotated)))
}

/// Keeps Ritz pairs with values in [lambda_min - slack, lambda_max + slack]
/// (closed window). Default slack is 1e-8 times the window width.
pub fn filter_ritz_pairs(
    ritz_values: &[f64],
    basis: &DenseMatrix,
    interval: &SpectralInterval,
    slack: Option<f64>,
) -> Result<(Vec<f64>, DenseMatrix)> {
    let slack = slack.unwrap_or(1e-8 * interval.width());
    assert!(slack >= 0.0, "slack must be non-negative");
    let keep: Vec<usize> = ritz_values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= interval.lambda_min - slack && v <= interval.lambda_max + slack)
        .map(|(k, _)| k)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let vals: Vec<f64> = keep.iter().map(|&k| ritz_values[k]).collect();
    let mut cols = DenseMatrix::zeros(basis.rows, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        cols.set_col(j, &basis.col(k));
    }
    Ok((vals, cols))
}

/// Subspace error e = ||Q Q^T - V1 V1^T||_F computed as
/// sqrt(2 sum_i sin^2 theta_i) through the residual matrix (no n x n
/// projectors are formed; accurate for tiny angles).
pub fn subspace_error(q: &SubspaceBasis, v1: &SubspaceBasis) -> Result<f64> {
    if q.m != v1.m || q.n != v1.n {
        return Err(Error::DimensionMismatch { expected: v1.m, got: q.m });
    }
    let (_, fro) = oracle::sin_theta_norms(&v1.columns, &q.columns)?;
    Ok(std::f64::consts::SQRT_2 * fro)
}

fn random_orthonormal_basis(n: usize, m0: usize, seed: u64) -> SubspaceBasis {
    let g = gaussian_test_matrix(n, m0, seed ^ 0x5851f42d4c957f2d);
    let qr = pivoted_qr_orthonormalize(&g);
    SubspaceBasis::from_columns(qr.q)
}

fn run_engine(
    a: &SymmetricSparseMatrix,
    cfg: &FeastConfig,
    oracle_v1: Option<&DenseMatrix>,
    phase1_seconds: f64,
    warmstart_q: Option<usize>,
) -> Result<EigResult> {
    assert!(cfg.max_iter >= 1, "max_iter must be at least 1");
    assert!(
        cfg.residual_tolerance > 0.0 && cfg.residual_tolerance < 1.0,
        "residual tolerance must lie in (0, 1)"
    );
    let contour = build_contour(&cfg.interval, cfg.n_c)?;
    let mut q = match &cfg.warmstart {
        Some(b) => {
            if b.n != a.n || b.m != cfg.m0 {
                return Err(Error::DimensionMismatch { expected: cfg.m0, got: b.m });
            }
            b.columns.clone()
        }
        None => random_orthonormal_basis(a.n, cfg.m0, cfg.seed).columns,
    };

    // direct solves reuse one factorization per node across iterations
    let facts: Option<Vec<ShiftedFactorization>> = match cfg.solver.mode {
        SolverMode::Direct => {
            if cfg.parallel_quadrature && contour.nodes.len() > 1 {
                let results: Vec<Result<ShiftedFactorization>> = std::thread::scope(|scope| {
                    let handles: Vec<_> = contour
                        .nodes
                        .iter()
                        .map(|&z| scope.spawn(move || factor_shifted(a, z)))
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("factor thread panicked")).collect()
                });
                Some(results.into_iter().collect::<Result<Vec<_>>>()?)
            } else {
                let mut fs = Vec::with_capacity(contour.nodes.len());
                for &z in &contour.nodes {
                    fs.push(factor_shifted(a, z)?);
                }
                Some(fs)
            }
        }
        SolverMode::Iterative => None,
    };

    let slack = 1e-8 * cfg.interval.width();
    let initial_subspace_error = match oracle_v1 {
        Some(v1) if v1.cols == cfg.m0 => {
            let (_, fro) = oracle::sin_theta_norms(v1, &q)?;
            Some(std::f64::consts::SQRT_2 * fro)
        }
        _ => None,
    };
    let mut trace = Vec::with_capacity(cfg.max_iter);
    let mut converged = false;
    let mut iterations_used = 0;
    let mut ritz_values: Vec<f64> = Vec::new();

    for m in 0..cfg.max_iter {
        let t_solve = Instant::now();
        let (filtered, eps_solver) =
            apply_filter_inner(a, &contour, &q, &cfg.solver, facts.as_deref(), cfg.parallel_quadrature)?;
        let solve_seconds = t_solve.elapsed().as_secs_f64();

        let t_orth = Instant::now();
        let qr = pivoted_qr_orthonormalize(&filtered);
        let orth_seconds = t_orth.elapsed().as_secs_f64();

        let t_ritz = Instant::now();
        let basis = SubspaceBasis::from_columns(qr.q);
        let (vals, rotated) = rayleigh_ritz(a, &basis)?;
        q = rotated.columns;
        ritz_values = vals;
        let ritz_seconds = t_ritz.elapsed().as_secs_f64();

        // residuals of the in-window Ritz pairs
        let aq = spmm(a, &q)?;
        let mut max_resid = 0.0f64;
        let mut any_in_window = false;
        let mut residual_of = vec![0.0f64; cfg.m0];
        for (j, &lam) in ritz_values.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..a.n {
                let r = aq.at(i, j) - lam * q.at(i, j);
                s += r * r;
            }
            residual_of[j] = s.sqrt();
            if lam >= cfg.interval.lambda_min - slack && lam <= cfg.interval.lambda_max + slack {
                any_in_window = true;
                max_resid = max_resid.max(residual_of[j]);
            }
        }
        if !any_in_window {
            max_resid = f64::INFINITY;
        }

        // quadrature part of the perturbation estimate
        let mut quad_dev = 0.0f64;
        for &lam in &ritz_values {
            let ideal = if cfg.interval.contains(lam) { 1.0 } else { 0.0 };
            quad_dev = quad_dev.max((rational_filter_value(&contour, lam) - ideal).abs());
        }
        let estimated_perturbation = eps_solver + quad_dev * (cfg.m0 as f64).sqrt();

        let subspace_err = match oracle_v1 {
            Some(v1) => {
                let sel = filter_ritz_pairs(&ritz_values, &q, &cfg.interval, None);
                match sel {
                    Ok((_, cols)) if cols.cols == v1.cols => {
                        let (_, fro) = oracle::sin_theta_norms(v1, &cols)?;
                        Some(std::f64::consts::SQRT_2 * fro)
                    }
                    _ => None,
                }
            }
            None => None,
        };

        trace.push(IterationTrace {
            iteration: m,
            subspace_error: subspace_err,
            max_eigenpair_residual: max_resid,
            estimated_perturbation,
            solve_seconds,
            orth_seconds,
            ritz_seconds,
        });
        iterations_used = m + 1;
        if max_resid <= cfg.residual_tolerance {
            converged = true;
            break;
        }
    }

    let (eigenvalues, eigenvectors) =
        filter_ritz_pairs(&ritz_values, &q, &cfg.interval, None)?;
    let aq = spmm(a, &eigenvectors)?;
    let mut residual_norms = Vec::with_capacity(eigenvalues.len());
    for (j, &lam) in eigenvalues.iter().enumerate() {
        let mut s = 0.0;
        for i in 0..a.n {
            let r = aq.at(i, j) - lam * eigenvectors.at(i, j);
            s += r * r;
        }
        residual_norms.push(s.sqrt());
    }
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
        residual_norms,
        iterations_used,
        converged,
        trace,
        initial_subspace_error,
        phase1_seconds,
        warmstart_q,
    })
}

/// Standard refinement: seeded random orthonormal start, configured node
/// count, iterating until the eigenpair residual tolerance or `max_iter`.
pub fn feast_standard(a: &SymmetricSparseMatrix, cfg: &FeastConfig) -> Result<EigResult> {
    assert!(cfg.warmstart.is_none(), "standard runs start from a random basis");
    run_engine(a, cfg, None, 0.0, None)
}

/// Standard refinement with an oracle eigenbasis attached so the trace
/// carries measured subspace errors.
pub fn feast_standard_with_oracle(
    a: &SymmetricSparseMatrix,
    cfg: &FeastConfig,
    oracle_v1: &DenseMatrix,
) -> Result<EigResult> {
    run_engine(a, cfg, Some(oracle_v1), 0.0, None)
}

/// Picks the power-iteration count for an interval via the selection rule,
/// anchoring the scaled operator so the window is dominant.
///
/// The rule's inputs are the scaled images of the last in-window eigenvalue
/// and of the first eigenvalue beyond the basis: the target-gap reading of
/// the bound. They come from the oracle when available (`oracle_pair`),
/// otherwise from sketch Rayleigh-Ritz estimates.
pub fn select_q_for_interval(
    a: &SymmetricSparseMatrix,
    interval: &SpectralInterval,
    warm: &WarmstartConfig,
    epsilon: f64,
    oracle_pair: Option<(f64, f64)>,
) -> Result<usize> {
    let lambda_hi = estimate_spectral_top(a, 40, warm.seed)?;
    let b = ScaledOperator::for_interval(a, interval, lambda_hi);
    let edge = b
        .scale_point(interval.lambda_min)
        .min(b.scale_point(interval.lambda_max));
    let (beta_edge, beta_comp) = match oracle_pair {
        Some((lam_edge, lam_comp)) => (b.scale_point(lam_edge), b.scale_point(lam_comp)),
        None => {
            let rr = sketch_rayleigh_ritz(&b, warm.m0 + warm.p, 2, warm.seed)?;
            let comp = rr
                .iter()
                .copied()
                .find(|&v| v < edge)
                .unwrap_or(edge * 0.9);
            (edge, comp)
        }
    };
    let beta_comp = beta_comp.max(0.0);
    if beta_comp >= beta_edge {
        // no measurable separation; power iterations cannot help
        return Ok(0);
    }
    select_power_iterations(warm, beta_edge, beta_comp, epsilon, beta_edge - beta_comp)
}

/// Two-phase solve: randomized warmstart (Phase 1) followed by the
/// refinement loop (Phase 2) from the warm basis. Phase-1 wall time is
/// recorded separately on the result.
pub fn ra_feast(
    a: &SymmetricSparseMatrix,
    cfg: &FeastConfig,
    warm_cfg: &WarmstartConfig,
) -> Result<EigResult> {
    ra_feast_with_oracle(a, cfg, warm_cfg, None)
}

/// [`ra_feast`] with an optional oracle eigenbasis attached to the trace.
pub fn ra_feast_with_oracle(
    a: &SymmetricSparseMatrix,
    cfg: &FeastConfig,
    warm_cfg: &WarmstartConfig,
    oracle_v1: Option<&DenseMatrix>,
) -> Result<EigResult> {
    assert_eq!(cfg.m0, warm_cfg.m0, "engine and warmstart subspace sizes must agree");
    let t0 = Instant::now();
    let lambda_hi = estimate_spectral_top(a, 40, warm_cfg.seed)?;
    let b = ScaledOperator::for_interval(a, &cfg.interval, lambda_hi);
    let basis = randomized_subspace(&b, warm_cfg)?;
    let phase1_seconds = t0.elapsed().as_secs_f64();

    let mut engine_cfg = cfg.clone();
    engine_cfg.warmstart = Some(basis);
    run_engine(a, &engine_cfg, oracle_v1, phase1_seconds, Some(warm_cfg.q))
}
