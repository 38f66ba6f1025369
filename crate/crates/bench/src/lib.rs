//! Benchmark fixtures.

use wdnd_core::ils::initial_solution;
use wdnd_core::linalg::SparseCholesky;
use wdnd_core::{synth, Constraints, Evaluator, Network, PipeTypeCatalog, Solution, SolverConfig};

/// Looped network of roughly the size of the published benchmark
/// instances: a 6 x 12 grid fed from one corner over a 24-period day.
pub fn grid_network() -> Network {
    synth::grid(80.0, 6, 12, 120.0, 0.0015)
}

/// Cheapest feasible uniform assignment of `net`.
pub fn uniform_start(net: &Network, cat: &PipeTypeCatalog) -> Solution {
    let eval = Evaluator::build(net, cat, Constraints::default(), SolverConfig::default()).unwrap();
    initial_solution(&eval).unwrap()
}

/// Factorization pattern of a `rows x cols` grid Laplacian and matching
/// diagonally dominant values.
pub fn grid_system(rows: usize, cols: usize) -> (SparseCholesky, Vec<f64>, Vec<f64>) {
    let at = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((at(r, c), at(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((at(r, c), at(r + 1, c)));
            }
        }
    }
    let chol = SparseCholesky::new(rows * cols, edges.iter().copied());
    let (mut diag, mut off) = chol.values();
    for &(a, b) in &edges {
        off[chol.slot(a, b).unwrap()] = -1.0;
        diag[chol.diag_slot(a)] += 1.0;
        diag[chol.diag_slot(b)] += 1.0;
    }
    diag.iter_mut().for_each(|d| *d += 0.1);
    (chol, diag, off)
}
