//! Warmstart bound verification on controlled spectra: the probabilistic
//! projector-error bound and the Davis-Kahan chain measured side by side.

use rafeast::analysis::davis_kahan_bound;
use rafeast::dense::DenseMatrix;
use rafeast::oracle::{sin_theta_norms, spectral_norm};
use rafeast::problems::synthetic_diagonal;
use rafeast::warmstart::{
    bound_report, randomized_subspace, verify_warmstart_bound, ScaledOperator, SubspaceBasis,
    WarmstartConfig,
};

fn controlled_spectrum(n: usize, m0: usize) -> Vec<f64> {
    // targets linspace 1 .. 0.5, tail 0.25 geometrically decaying
    let mut betas: Vec<f64> = (0..m0)
        .map(|i| 1.0 - 0.5 * i as f64 / (m0 - 1) as f64)
        .collect();
    betas.extend((0..n - m0).map(|i| 0.25 * 0.97f64.powi(i as i32)));
    betas
}

/// The Davis-Kahan chain holds on every seeded run:
/// ||(I - Q0 Q0^T) B||_2 / delta_gap >= ||sin Theta||_2, both sides computed
/// independently.
#[test]
fn davis_kahan_chain_on_seeded_runs() {
    let n = 120;
    let m0 = 6;
    let betas = controlled_spectrum(n, m0);
    let delta_gap = betas[m0 - 1] - betas[m0];
    let a = synthetic_diagonal(&betas).unwrap();
    let b = ScaledOperator::new(&a, 0.0, 1.0);
    let b_dense = a.to_dense();
    let v1 = DenseMatrix::from_fn(n, m0, |i, j| if i == j { 1.0 } else { 0.0 });

    for seed in 0..20u64 {
        let cfg = WarmstartConfig::new(m0, 10, 2, seed, 0.05).unwrap();
        let basis = randomized_subspace(&b, &cfg).unwrap();
        // left side: dense residual norm
        let proj = basis.columns.matmul(&basis.columns.transpose_matmul(&b_dense));
        let residual = spectral_norm(&b_dense.sub(&proj));
        let lhs = davis_kahan_bound(residual, delta_gap).unwrap();
        // right side: canonical-angle sine
        let (rhs, _) = sin_theta_norms(&basis.columns, &v1).unwrap();
        assert!(lhs + 1e-10 >= rhs, "seed {seed}: DK chain violated: {lhs} < {rhs}");
    }
}

/// Theorem-level bound check: observed projector error within the closed-form
/// bound on the vast majority of seeds (the bound holds with probability
/// 1 - delta; in practice it is loose).
#[test]
fn warmstart_bound_monte_carlo() {
    let n = 120;
    let m0 = 6;
    let betas = controlled_spectrum(n, m0);
    let a = synthetic_diagonal(&betas).unwrap();
    let b = ScaledOperator::new(&a, 0.0, 1.0);
    let v1 = DenseMatrix::from_fn(n, m0, |i, j| if i == j { 1.0 } else { 0.0 });

    let mut holds = 0;
    let trials = 30;
    for seed in 0..trials {
        let cfg = WarmstartConfig::new(m0, 10, 2, seed, 0.05).unwrap();
        let report = bound_report(&cfg, betas[m0 - 1], betas[m0], 0.1).unwrap();
        let basis = randomized_subspace(&b, &cfg).unwrap();
        let (_, _, ok) = verify_warmstart_bound(&basis, &v1, &report).unwrap();
        if ok {
            holds += 1;
        }
    }
    assert!(holds >= trials - 1, "bound held only {holds}/{trials}");
}

/// Orthonormality is preserved through the power loop at the Gram tolerance.
#[test]
fn basis_gram_condition() {
    let n = 200;
    let betas = controlled_spectrum(n, 8);
    let a = synthetic_diagonal(&betas).unwrap();
    let b = ScaledOperator::new(&a, 0.0, 1.0);
    for q in [0usize, 3, 10] {
        let cfg = WarmstartConfig::new(8, 10, q, 7, 0.05).unwrap();
        let basis = randomized_subspace(&b, &cfg).unwrap();
        assert!(
            basis.orthonormality_defect() <= 1e-12 * (basis.m as f64).sqrt(),
            "q={q}: defect {}",
            basis.orthonormality_defect()
        );
    }
}

/// Exact-basis sanity for the verifier: identical bases give zero observed
/// error against any bound.
#[test]
fn verifier_on_exact_basis() {
    let v1 = DenseMatrix::from_fn(30, 3, |i, j| if i == j { 1.0 } else { 0.0 });
    let cfg = WarmstartConfig::new(3, 10, 1, 0, 0.05).unwrap();
    let report = bound_report(&cfg, 0.9, 0.3, 0.1).unwrap();
    let (obs, bound, holds) =
        verify_warmstart_bound(&SubspaceBasis::from_columns(v1.clone()), &v1, &report).unwrap();
    assert!(obs <= 1e-13);
    assert!(holds, "bound {bound} must cover zero error");
}
