//! Benchmark problem generators: random geometric graph Laplacians and
//! synthetic diagonal matrices with controlled spectra.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::sparse::{csr_from_triplets, SymmetricSparseMatrix};
use crate::Result;

/// Random geometric graph on the unit square.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub n: usize,
    /// Node positions in [0,1]^2.
    pub positions: Vec<(f64, f64)>,
    /// Undirected edges with i < j, lexicographically sorted.
    pub edges: Vec<(usize, usize)>,
    /// Connection radius.
    pub radius: f64,
}

impl GeometricGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Writes the edge list as "i j" lines, 0-based.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?,
        );
        for &(i, j) in &self.edges {
            writeln!(out, "{i} {j}").map_err(|e| Error::Io(e.to_string()))?;
        }
        Ok(())
    }
}

/// Samples a random geometric graph: n i.i.d. uniform points, connection
/// radius r = 1.5 sqrt(ln n / n), exact neighbor search on a uniform grid of
/// cell size r.
pub fn random_geometric_graph(n: usize, seed: u64) -> GeometricGraph {
    assert!(n >= 2, "need at least two nodes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        let y: f64 = rng.gen();
        positions.push((x, y));
    }
    let radius = 1.5 * ((n as f64).ln() / n as f64).sqrt();
    let r2 = radius * radius;

    let cells = (1.0 / radius).floor().max(1.0) as usize;
    let cell_of = |x: f64, y: f64| -> (usize, usize) {
        let cx = ((x * cells as f64) as usize).min(cells - 1);
        let cy = ((y * cells as f64) as usize).min(cells - 1);
        (cx, cy)
    };
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (idx, &(x, y)) in positions.iter().enumerate() {
        let (cx, cy) = cell_of(x, y);
        grid[cy * cells + cx].push(idx);
    }

    let mut edges = Vec::new();
    for (idx, &(x, y)) in positions.iter().enumerate() {
        let (cx, cy) = cell_of(x, y);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let nx = cx as i64 + dx;
                let ny = cy as i64 + dy;
                if nx < 0 || ny < 0 || nx >= cells as i64 || ny >= cells as i64 {
                    continue;
                }
                for &other in &grid[ny as usize * cells + nx as usize] {
                    if other <= idx {
                        continue;
                    }
                    let (ox, oy) = positions[other];
                    let d2 = (x - ox) * (x - ox) + (y - oy) * (y - oy);
                    if d2 <= r2 {
                        edges.push((idx, other));
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    GeometricGraph { n, positions, edges, radius }
}

/// L = D - A, assembled so row sums cancel structurally (diagonal = degree).
pub fn laplacian(g: &GeometricGraph) -> SymmetricSparseMatrix {
    let deg = g.degrees();
    let mut trips: Vec<(usize, usize, f64)> = Vec::with_capacity(g.n + g.edges.len());
    for i in 0..g.n {
        trips.push((i, i, deg[i] as f64));
    }
    for &(i, j) in &g.edges {
        trips.push((i, j, -1.0));
    }
    csr_from_triplets(&trips, g.n).expect("laplacian triplets are valid")
}

/// diag(spectrum) as CSR; zero entries are stored explicitly.
pub fn synthetic_diagonal(spectrum: &[f64]) -> Result<SymmetricSparseMatrix> {
    let n = spectrum.len();
    for (i, &v) in spectrum.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { row: i, col: i });
        }
    }
    // bypass the triplet builder so explicit zeros stay stored
    Ok(SymmetricSparseMatrix {
        n,
        row_offsets: (0..=n).collect(),
        col_indices: (0..n).collect(),
        values: spectrum.to_vec(),
    })
}
