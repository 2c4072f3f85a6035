//! Phase 1: randomized warmstart. Gaussian sketching, power iteration on the
//! shifted/scaled operator with re-orthonormalization after every
//! application, plus the closed-form residual bound and the
//! power-iteration-count selection rule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::contour::SpectralInterval;
use crate::dense::{cholqr_in_place, gram_defect, pivoted_qr_orthonormalize, DenseMatrix};
use crate::error::Error;
use crate::oracle;
use crate::sparse::{spmv, SymmetricSparseMatrix};
use crate::Result;

/// Lazily applied affine image B = (A - lambda_min I) / (lambda_max - lambda_min).
///
/// The anchors map lambda_min -> 0 and lambda_max -> 1; swapping them (a
/// negative scale) reflects the spectrum, which is how intervals at the
/// bottom of the spectrum are made dominant for the power iteration.
#[derive(Debug, Clone, Copy)]
pub struct ScaledOperator<'a> {
    pub matrix: &'a SymmetricSparseMatrix,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl<'a> ScaledOperator<'a> {
    pub fn new(matrix: &'a SymmetricSparseMatrix, lambda_min: f64, lambda_max: f64) -> Self {
        assert!(lambda_min != lambda_max, "degenerate scaling anchors");
        Self { matrix, lambda_min, lambda_max }
    }

    /// Orientation that makes the target interval dominant: literal anchors
    /// when the window reaches the top of the spectrum, reflected anchors
    /// (lambda_hi -> 0, window bottom -> 1) otherwise.
    pub fn for_interval(
        matrix: &'a SymmetricSparseMatrix,
        interval: &SpectralInterval,
        lambda_hi: f64,
    ) -> Self {
        if interval.lambda_max >= lambda_hi * (1.0 - 1e-9) {
            Self::new(matrix, interval.lambda_min, interval.lambda_max)
        } else {
            Self::new(matrix, lambda_hi, interval.lambda_min)
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.n
    }

    /// Scaled image of a point on the real axis.
    pub fn scale_point(&self, lambda: f64) -> f64 {
        (lambda - self.lambda_min) / (self.lambda_max - self.lambda_min)
    }

    /// y = B x: one spmv, one axpy, one scale.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = spmv(self.matrix, x)?;
        let inv = 1.0 / (self.lambda_max - self.lambda_min);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = (*yi - self.lambda_min * xi) * inv;
        }
        Ok(y)
    }

    /// Y = B X, columnwise; the sparse product and the affine map run in one
    /// pass per row.
    pub fn apply_block(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let a = self.matrix;
        if x.rows != a.n {
            return Err(Error::DimensionMismatch { expected: a.n, got: x.rows });
        }
        let inv = 1.0 / (self.lambda_max - self.lambda_min);
        let shift = self.lambda_min;
        let mut y = DenseMatrix::zeros(a.n, x.cols);
        for i in 0..a.n {
            let (cols, vals) = a.row(i);
            let y_row = y.row_mut(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let x_row = x.row(j);
                for (acc, &xv) in y_row.iter_mut().zip(x_row) {
                    *acc += v * xv;
                }
            }
            let x_row = x.row(i);
            for (acc, &xv) in y_row.iter_mut().zip(x_row) {
                *acc = (*acc - shift * xv) * inv;
            }
        }
        Ok(y)
    }
}

/// Warmstart configuration.
#[derive(Debug, Clone, Copy)]
pub struct WarmstartConfig {
    /// Target subspace dimension.
    pub m0: usize,
    /// Oversampling.
    pub p: usize,
    /// Power iterations.
    pub q: usize,
    pub seed: u64,
    /// Failure probability of the probabilistic bound.
    pub delta: f64,
}

impl WarmstartConfig {
    pub fn new(m0: usize, p: usize, q: usize, seed: u64, delta: f64) -> Result<Self> {
        let cfg = Self { m0, p, q, seed, delta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 4 {
            return Err(Error::InvalidOversampling(self.p));
        }
        if self.m0 < 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.m0 });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidSpectrum { beta_m0: self.delta, beta_m1: self.delta });
        }
        Ok(())
    }

    /// Default oversampling policy: p = 10 for m0 <= 50, else min(20, ceil(m0/2)).
    pub fn default_oversampling(m0: usize) -> usize {
        if m0 <= 50 {
            10
        } else {
            20.min(m0.div_ceil(2))
        }
    }
}

/// Column-orthonormal basis of a subspace.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub n: usize,
    pub m: usize,
    pub columns: DenseMatrix,
}

impl SubspaceBasis {
    pub fn from_columns(columns: DenseMatrix) -> Self {
        Self { n: columns.rows, m: columns.cols, columns }
    }

    /// ||Q^T Q - I||_F <= 1e-12 sqrt(m).
    pub fn orthonormality_defect(&self) -> f64 {
        gram_defect(&self.columns)
    }
}

/// Evaluated theoretical quantities for a warmstart instance.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub r_halko: f64,
    pub c1_delta: f64,
    pub delta_gap: f64,
    pub warmstart_bound: f64,
    pub recommended_q: usize,
}

/// i.i.d. standard normal test matrix from a seeded counter-based generator
/// (ChaCha8 stream + the rand_distr ziggurat sampler), row-major fill order;
/// identical seeds give bitwise identical matrices across platforms.
pub fn gaussian_test_matrix(n: usize, k: usize, seed: u64) -> DenseMatrix {
    assert!(n >= k && k >= 1, "need n >= k >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * k);
    for _ in 0..n * k {
        let v: f64 = StandardNormal.sample(&mut rng);
        data.push(v);
    }
    DenseMatrix { rows: n, cols: k, data }
}

/// Re-orthonormalizes the block in place and reports its numerical rank.
/// CholeskyQR is cheap and fine for the well-conditioned power-loop blocks;
/// a definiteness failure falls back to pivoted Householder, whose pivot
/// count exposes rank collapse.
fn reorthonormalize(y: &mut DenseMatrix) -> usize {
    if cholqr_in_place(y) {
        y.cols
    } else {
        let qr = pivoted_qr_orthonormalize(y);
        *y = qr.q;
        qr.rank
    }
}

/// Randomized range finder: Y = (B B^T)^q B Omega with re-orthonormalization
/// after every application of B; returns the first m0 columns of orth(Y)
/// ordered by Rayleigh quotient against B, descending.
pub fn randomized_subspace(b: &ScaledOperator, cfg: &WarmstartConfig) -> Result<SubspaceBasis> {
    cfg.validate()?;
    let n = b.n();
    let k = cfg.m0 + cfg.p;
    if k > n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    let omega = gaussian_test_matrix(n, k, cfg.seed);
    let mut y = b.apply_block(&omega)?;
    let mut min_rank = reorthonormalize(&mut y);
    for _ in 0..cfg.q {
        // B is symmetric, so (B B^T)^q B = B^{2q+1}
        y = b.apply_block(&y)?;
        min_rank = min_rank.min(reorthonormalize(&mut y));
        y = b.apply_block(&y)?;
        min_rank = min_rank.min(reorthonormalize(&mut y));
    }

    let qr = pivoted_qr_orthonormalize(&y);
    if qr.rank.min(min_rank) < cfg.m0 {
        return Err(Error::RankDeficientSketch { rank: qr.rank.min(min_rank), requested: cfg.m0 });
    }
    let q = qr.q;

    // order by Rayleigh quotient against B, descending
    let by = b.apply_block(&q)?;
    let s = q.transpose_matmul(&by);
    let eig = oracle::symmetric_eig_small(&s)?;
    let mut rotated = q.matmul(&eig.eigenvectors);
    // eigenvalues ascending -> reverse the columns
    let m = rotated.cols;
    for j in 0..m / 2 {
        for i in 0..rotated.rows {
            let t = rotated.at(i, j);
            rotated.set(i, j, rotated.at(i, m - 1 - j));
            rotated.set(i, m - 1 - j, t);
        }
    }
    let columns = rotated.truncate_cols(cfg.m0);
    Ok(SubspaceBasis::from_columns(columns))
}

/// Rayleigh-Ritz values of B on a lightly powered sketch, descending; the
/// production-path estimator for beta quantities when no oracle is available.
pub fn sketch_rayleigh_ritz(
    b: &ScaledOperator,
    k: usize,
    est_power: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = b.n();
    if k > n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    let omega = gaussian_test_matrix(n, k, seed);
    let mut y = b.apply_block(&omega)?;
    let _ = reorthonormalize(&mut y);
    for _ in 0..est_power {
        y = b.apply_block(&y)?;
        let _ = reorthonormalize(&mut y);
    }
    let by = b.apply_block(&y)?;
    let s = y.transpose_matmul(&by);
    let eig = oracle::symmetric_eig_small(&s)?;
    let mut vals = eig.eigenvalues;
    vals.reverse();
    Ok(vals)
}

/// C1(delta) = 1 + (p/2) ln(2 m0 / delta).
pub fn c1_delta(m0: usize, p: usize, delta: f64) -> f64 {
    1.0 + (p as f64 / 2.0) * (2.0 * m0 as f64 / delta).ln()
}

/// Closed-form randomized range-finder residual bound
/// R = C1(delta) sqrt(1 + m0/(p-1)) beta_{m0+1} (beta_{m0+1}/beta_{m0})^{2q}.
pub fn halko_residual_bound(cfg: &WarmstartConfig, beta_m0: f64, beta_m0_plus_1: f64) -> Result<f64> {
    if cfg.p < 2 {
        return Err(Error::InvalidOversampling(cfg.p));
    }
    if !(beta_m0_plus_1 >= 0.0 && beta_m0_plus_1 < beta_m0) {
        return Err(Error::InvalidSpectrum { beta_m0, beta_m1: beta_m0_plus_1 });
    }
    if beta_m0_plus_1 == 0.0 {
        return Ok(0.0);
    }
    let c1 = c1_delta(cfg.m0, cfg.p, cfg.delta);
    let factor = (1.0 + cfg.m0 as f64 / (cfg.p as f64 - 1.0)).sqrt();
    let ratio = beta_m0_plus_1 / beta_m0;
    Ok(c1 * factor * beta_m0_plus_1 * ratio.powi(2 * cfg.q as i32))
}

/// Smallest integer q >= 0 with
/// q >= ln(C1 sqrt(1 + m0/(p-1)) beta_{m0+1} / (eps delta_gap))
///      / (2 ln(beta_m0 / beta_{m0+1})).
///
/// The q field of `cfg` is ignored.
pub fn select_power_iterations(
    cfg: &WarmstartConfig,
    beta_m0: f64,
    beta_m0_plus_1: f64,
    epsilon: f64,
    delta_gap: f64,
) -> Result<usize> {
    if cfg.p < 2 {
        return Err(Error::InvalidOversampling(cfg.p));
    }
    if beta_m0 == beta_m0_plus_1 {
        return Err(Error::DegenerateGap(beta_m0));
    }
    if !(beta_m0_plus_1 >= 0.0 && beta_m0_plus_1 < beta_m0) {
        return Err(Error::InvalidSpectrum { beta_m0, beta_m1: beta_m0_plus_1 });
    }
    assert!(epsilon > 0.0 && delta_gap > 0.0, "epsilon and delta_gap must be positive");
    if beta_m0_plus_1 == 0.0 {
        return Ok(0);
    }
    let c1 = c1_delta(cfg.m0, cfg.p, cfg.delta);
    let factor = (1.0 + cfg.m0 as f64 / (cfg.p as f64 - 1.0)).sqrt();
    let arg = c1 * factor * beta_m0_plus_1 / (epsilon * delta_gap);
    if arg <= 1.0 {
        return Ok(0);
    }
    let rhs = arg.ln() / (2.0 * (beta_m0 / beta_m0_plus_1).ln());
    Ok(rhs.max(0.0).ceil() as usize)
}

/// Assembles the evaluated bound quantities for a warmstart instance.
pub fn bound_report(
    cfg: &WarmstartConfig,
    beta_m0: f64,
    beta_m0_plus_1: f64,
    epsilon: f64,
) -> Result<BoundReport> {
    let delta_gap = beta_m0 - beta_m0_plus_1;
    let r_halko = halko_residual_bound(cfg, beta_m0, beta_m0_plus_1)?;
    let recommended_q = select_power_iterations(cfg, beta_m0, beta_m0_plus_1, epsilon, delta_gap)?;
    Ok(BoundReport {
        r_halko,
        c1_delta: c1_delta(cfg.m0, cfg.p, cfg.delta),
        delta_gap,
        warmstart_bound: if delta_gap > 0.0 { r_halko / delta_gap } else { f64::INFINITY },
        recommended_q,
    })
}

/// Measured versus predicted warmstart projector error:
/// observed = ||V1 V1^T - Q0 Q0^T||_2 via the largest canonical-angle sine.
pub fn verify_warmstart_bound(
    q0: &SubspaceBasis,
    oracle_eigvecs: &DenseMatrix,
    report: &BoundReport,
) -> Result<(f64, f64, bool)> {
    if oracle_eigvecs.rows != q0.n || oracle_eigvecs.cols != q0.m {
        return Err(Error::DimensionMismatch { expected: q0.m, got: oracle_eigvecs.cols });
    }
    let (observed, _) = oracle::sin_theta_norms(&q0.columns, oracle_eigvecs)?;
    Ok((observed, report.warmstart_bound, observed <= report.warmstart_bound))
}

/// Power-method estimate of the spectral top of A (Rayleigh quotient after
/// `iters` steps, inflated by 2%), used to anchor the reflected scaling.
pub fn estimate_spectral_top(a: &SymmetricSparseMatrix, iters: usize, seed: u64) -> Result<f64> {
    let n = a.n;
    if n == 0 {
        return Ok(0.0);
    }
    let omega = gaussian_test_matrix(n, 1, seed ^ 0x9e3779b97f4a7c15);
    let mut v: Vec<f64> = omega.data;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    let mut rq = 0.0;
    for _ in 0..iters {
        let av = spmv(a, &v)?;
        rq = v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>();
        let norm = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = av.into_iter().map(|x| x / norm).collect();
    }
    Ok(rq * 1.02)
}
