//! Quadrature contours enclosing the target interval and the induced
//! rational filter.
//!
//! The contour is a circle through the interval endpoints, discretized with
//! Gauss-Legendre quadrature on the upper semicircle; the lower half is
//! recovered by conjugate symmetry (the matrix is real), which halves the
//! number of linear solves. Node count `n_c` counts effective full-circle
//! nodes, so the stored upper-half node count (= solve count) is `n_c / 2`.

use num_complex::Complex64;

use crate::error::Error;
use crate::solver::ComplexShift;
use crate::Result;

/// Target spectral window [lambda_min, lambda_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInterval {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SpectralInterval {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Result<Self> {
        if !(lambda_min.is_finite() && lambda_max.is_finite() && lambda_min < lambda_max) {
            return Err(Error::ParseError {
                line: 0,
                msg: format!("invalid interval [{lambda_min}, {lambda_max}]"),
            });
        }
        Ok(Self { lambda_min, lambda_max })
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lambda_min + self.lambda_max)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.lambda_max - self.lambda_min)
    }

    pub fn width(&self) -> f64 {
        self.lambda_max - self.lambda_min
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lambda_min && lambda <= self.lambda_max
    }
}

/// Discretized contour. Only upper-half nodes are stored
/// (`conjugate_reduced`); filter evaluation applies the doubled-real-part
/// convention 2 Re(sum w_j / (z_j - lambda)).
#[derive(Debug, Clone)]
pub struct Contour {
    /// Upper-half quadrature nodes, mirror-symmetric about the center,
    /// ordered left to right.
    pub nodes: Vec<ComplexShift>,
    /// Matching quadrature weights.
    pub weights: Vec<Complex64>,
    /// Real-axis node offsets from the center; exact negations across mirror
    /// pairs, which keeps filter evaluation bitwise symmetric.
    pub real_offsets: Vec<f64>,
    /// Effective full-circle node count (stored count is n_c / 2).
    pub n_c: usize,
    pub center: f64,
    pub radius: f64,
    /// Smallest distance from a stored node to the real axis.
    pub min_real_axis_distance: f64,
    pub conjugate_reduced: bool,
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration on the
/// Legendre recurrence; nodes ascending, exactly mirror-symmetric.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1);
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let m = (k + 1) / 2;
    for i in 0..m {
        // Tricomi-style initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            if k == 1 {
                p1 = x;
            }
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_k(x), p0 = P_{k-1}(x)
            pp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one clean-up step
                let mut p0 = 1.0;
                let mut p1 = x;
                for j in 2..=k {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                pp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        // mirror exactly
        nodes[i] = -x.abs();
        nodes[k - 1 - i] = x.abs();
        weights[i] = w;
        weights[k - 1 - i] = w;
        if k % 2 == 1 && i == m - 1 {
            nodes[i] = 0.0;
            // weight at 0 from the recurrence directly
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 2..=k {
                let p2 = (-(j as f64 - 1.0) * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let ppz = k as f64 * (0.0 * p1 - p0) / (0.0 - 1.0);
            weights[i] = 2.0 / (ppz * ppz);
        }
    }
    (nodes, weights)
}

/// Builds the circular contour for the interval with `n_c` effective nodes
/// (even, >= 2). Upper-half nodes sit at theta_k = (pi/2)(1 - t_k) for the
/// (n_c/2)-point Gauss-Legendre points t_k; the weight of each stored node is
/// glw_k * (pi/2) * (i r e^{i theta_k}) / (2 pi i), oriented counterclockwise
/// so that the discrete filter is ~1 inside the interval.
pub fn build_contour(interval: &SpectralInterval, n_c: usize) -> Result<Contour> {
    if n_c < 2 || n_c % 2 != 0 {
        return Err(Error::InvalidNodeCount(n_c));
    }
    let half = n_c / 2;
    let (ts, glws) = gauss_legendre(half);
    let c = interval.center();
    let r = interval.radius();

    // Build mirror pairs with exactly negated real offsets so the filter is
    // bitwise symmetric about the center.
    let mut cos_t = vec![0.0; half];
    let mut sin_t = vec![0.0; half];
    for i in 0..half {
        let t = ts[i];
        if t > 0.0 {
            let theta = (std::f64::consts::PI / 2.0) * (1.0 - t);
            cos_t[i] = theta.cos();
            sin_t[i] = theta.sin();
            cos_t[half - 1 - i] = -cos_t[i];
            sin_t[half - 1 - i] = sin_t[i];
        } else if t == 0.0 {
            cos_t[i] = 0.0;
            sin_t[i] = 1.0;
        }
    }

    let mut nodes = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    let mut real_offsets = Vec::with_capacity(half);
    for i in 0..half {
        let offset = r * cos_t[i];
        let zi = r * sin_t[i];
        nodes.push(ComplexShift::new(c + offset, zi));
        real_offsets.push(offset);
        // w = glw * r * e^{i theta} / 4
        let scale = glws[i] * r / 4.0;
        weights.push(Complex64::new(scale * cos_t[i], scale * sin_t[i]));
    }
    let min_dist = nodes.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    Ok(Contour {
        nodes,
        weights,
        real_offsets,
        n_c,
        center: c,
        radius: r,
        min_real_axis_distance: min_dist,
        conjugate_reduced: true,
    })
}

/// Discrete rational filter h(lambda) = 2 Re sum_k w_k / (z_k - lambda).
///
/// Summation pairs mirror nodes first, so h(center - x) == h(center + x)
/// holds bitwise.
pub fn rational_filter_value(contour: &Contour, lambda: f64) -> f64 {
    let n = contour.nodes.len();
    let rel = lambda - contour.center;
    let term = |i: usize| -> f64 {
        let w = contour.weights[i];
        let dr = contour.real_offsets[i] - rel;
        let di = contour.nodes[i].im;
        (w.re * dr + w.im * di) / (dr * dr + di * di)
    };
    let mut acc = 0.0;
    let half = n / 2;
    for i in 0..half {
        acc += term(i) + term(n - 1 - i);
    }
    if n % 2 == 1 {
        acc += term(half);
    }
    2.0 * acc
}

/// Realized distance from the contour circle to the nearest eigenvalue
/// outside the interval, with a degeneracy flag (distance below
/// 1e-10 * radius). `None` when no exterior eigenvalue exists.
pub fn realized_gap_distance(contour: &Contour, eigenvalues: &[f64]) -> Option<(f64, bool)> {
    let mut best: Option<f64> = None;
    for &lam in eigenvalues {
        let inside = lam >= contour.center - contour.radius && lam <= contour.center + contour.radius;
        if !inside {
            let d = (lam - contour.center).abs() - contour.radius;
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best.map(|d| (d, d < 1e-10 * contour.radius))
}
