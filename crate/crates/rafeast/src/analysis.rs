//! Standalone evaluators for the solver's error theory: the Davis-Kahan
//! quotient, the perturbed-iteration error recursion, the warmstart/refinement
//! speedup model, and empirical contraction fitting for measured traces.

use crate::error::Error;
use crate::Result;

/// Parameters of the perturbed-iteration error recursion.
#[derive(Debug, Clone)]
pub struct RecursionParams {
    /// Contraction factor in [0, 1).
    pub rho: f64,
    /// Initial subspace error.
    pub e0: f64,
    /// Per-iteration perturbation sizes; the last value is extended when the
    /// simulation runs longer than the list.
    pub epsilon_sequence: Vec<f64>,
    /// Machine-precision floor added every step.
    pub eps_mach: f64,
}

impl RecursionParams {
    pub fn constant(rho: f64, e0: f64, epsilon: f64, eps_mach: f64) -> Self {
        Self { rho, e0, epsilon_sequence: vec![epsilon], eps_mach }
    }
}

/// Parameters of the speedup model.
#[derive(Debug, Clone, Copy)]
pub struct SpeedupParams {
    /// Inner solver iterations per right-hand side, exact baseline.
    pub k_iter: usize,
    /// Inner solver iterations under relaxed tolerances.
    pub k_inexact: usize,
    /// Power-iteration count of the warmstart.
    pub q: usize,
    /// Subspace dimension.
    pub m0: usize,
    /// Outer refinement iterations.
    pub t_outer: usize,
    /// Quadrature node count.
    pub n_c: usize,
    /// Matrix dimension.
    pub n: usize,
}

/// Davis-Kahan quotient: residual_norm / delta_gap.
pub fn davis_kahan_bound(residual_norm: f64, delta_gap: f64) -> Result<f64> {
    if delta_gap <= 0.0 {
        return Err(Error::DegenerateGap(delta_gap));
    }
    Ok(residual_norm / delta_gap)
}

/// Iterates e_{m+1} = rho e_m + eps^{(m)} + eps_mach with equality (the
/// worst-case envelope of the bound). Returns e_0 .. e_steps inclusive.
pub fn simulate_error_recursion(p: &RecursionParams, steps: usize) -> Vec<f64> {
    assert!(steps >= 1, "need at least one step");
    assert!((0.0..1.0).contains(&p.rho), "rho must lie in [0, 1)");
    let mut out = Vec::with_capacity(steps + 1);
    out.push(p.e0);
    let mut e = p.e0;
    for m in 0..steps {
        let eps = p
            .epsilon_sequence
            .get(m)
            .or(p.epsilon_sequence.last())
            .copied()
            .unwrap_or(0.0);
        e = p.rho * e + eps + p.eps_mach;
        out.push(e);
    }
    out
}

/// Speedup estimate (k_iter / k_inexact) * (1 + q m0 / (T N_c n))^{-1}.
///
/// The overhead term presumes nnz(A) = O(n); for denser matrices it
/// undercounts the warmstart cost.
pub fn speedup_model(p: &SpeedupParams) -> f64 {
    assert!(p.k_iter >= 1 && p.k_inexact >= 1 && p.m0 >= 1 && p.t_outer >= 1 && p.n_c >= 1 && p.n >= 1);
    let ratio = p.k_iter as f64 / p.k_inexact as f64;
    let overhead = 1.0 + (p.q as f64 * p.m0 as f64) / (p.t_outer as f64 * p.n_c as f64 * p.n as f64);
    ratio / overhead
}

/// Fitted contraction of a measured error trace.
#[derive(Debug, Clone, Copy)]
pub struct ContractionFit {
    pub rho_hat: f64,
    pub epsilon_hat: f64,
    /// Stagnation level epsilon_hat / (1 - rho_hat).
    pub floor: f64,
    /// Log-space coefficient of determination of the fitted recursion on the
    /// pre-floor segment (geometric-decay fit quality).
    pub r_squared: f64,
    /// True when the fitted map does not contract (rho_hat ~ 1 or above).
    pub non_contractive: bool,
}

/// Least-squares fit of e_{m+1} = rho e_m + eps over the pre-floor segment
/// (entries above 10 * eps_mach), relative-weighted so every decade of the
/// decay carries equal weight; equivalently a linear regression of the
/// ratios e_{m+1}/e_m on the reciprocals 1/e_m. Exact on affine traces.
pub fn fit_contraction(trace: &[f64], eps_mach: f64) -> Result<ContractionFit> {
    let cutoff = 10.0 * eps_mach;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in trace.windows(2) {
        if w[0] > cutoff && w[1] > cutoff {
            xs.push(w[0]);
            ys.push(w[1]);
        }
    }
    // pairs + 1 usable points
    if xs.len() < 2 {
        return Err(Error::InsufficientTrace(xs.len() + usize::from(!xs.is_empty())));
    }
    let ratios: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y / x).collect();
    let recips: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
    let n = ratios.len() as f64;
    let mean_u = recips.iter().sum::<f64>() / n;
    let mean_r = ratios.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (u, r) in recips.iter().zip(&ratios) {
        cov += (u - mean_u) * (r - mean_r);
        var += (u - mean_u) * (u - mean_u);
    }
    let max_u = recips.iter().fold(0.0f64, |m, &u| m.max(u.abs()));
    let (rho_hat, epsilon_hat) = if var <= (1e-14 * max_u).powi(2) * n {
        // all pre-floor errors equal: stationary sequence
        (mean_r, 0.0)
    } else {
        let eps = cov / var;
        (mean_r - eps * mean_u, eps)
    };
    let non_contractive = rho_hat >= 1.0 - 1e-6;
    let floor = if non_contractive { f64::INFINITY } else { epsilon_hat / (1.0 - rho_hat) };

    // log-space R^2 of the fitted recursion
    let mut sst = 0.0;
    let mut ssr = 0.0;
    let log_ys: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mean_ly = log_ys.iter().sum::<f64>() / n;
    for (i, (&x, &ly)) in xs.iter().zip(&log_ys).enumerate() {
        let pred = rho_hat * x + epsilon_hat;
        let lp = if pred > 0.0 { pred.ln() } else { log_ys[i] };
        sst += (ly - mean_ly) * (ly - mean_ly);
        ssr += (ly - lp) * (ly - lp);
    }
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    Ok(ContractionFit { rho_hat, epsilon_hat, floor, r_squared, non_contractive })
}
