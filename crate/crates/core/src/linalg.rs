//! Sparse Cholesky factorization for the symmetric positive-definite
//! junction systems of the hydraulic solver.
//!
//! The sparsity pattern of a network never changes between solves, so the
//! ordering and the fill pattern of `L` are computed once in
//! [`SparseCholesky::new`] and every Newton step only refills values.

use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub column: usize,
}

/// Symbolic factorization plus value storage for `A = L L^T`.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// `inv[old] = new`
    inv: Vec<usize>,
    col_start: Vec<usize>,
    /// Row indices (new numbering) of the strictly lower part of `L`,
    /// sorted within each column.
    rows: Vec<usize>,
    /// For every row `j`, the `(column, storage index)` pairs of its
    /// off-diagonal entries in `L`, sorted by column.
    row_entries: Vec<Vec<(usize, usize)>>,
}

impl SparseCholesky {
    /// Builds the symbolic factorization for an `n x n` matrix whose
    /// off-diagonal nonzeros are `edges` (either triangle, duplicates
    /// allowed). The ordering is greedy minimum degree with ties broken by
    /// the smaller index.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            if a != b {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut eliminated = vec![false; n];
        let mut perm = Vec::with_capacity(n);
        let mut columns: Vec<Vec<usize>> = Vec::with_capacity(n);
        for _ in 0..n {
            let v = (0..n)
                .filter(|&v| !eliminated[v])
                .min_by_key(|&v| (adj[v].len(), v))
                .expect("uneliminated node remains");
            eliminated[v] = true;
            perm.push(v);
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            for &a in &nbrs {
                adj[a].remove(&v);
                for &b in &nbrs {
                    if a != b {
                        adj[a].insert(b);
                    }
                }
            }
            columns.push(nbrs);
            adj[v].clear();
        }
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut col_start = Vec::with_capacity(n + 1);
        let mut rows = Vec::new();
        col_start.push(0);
        for col in &columns {
            let mut r: Vec<usize> = col.iter().map(|&old| inv[old]).collect();
            r.sort_unstable();
            rows.extend(r);
            col_start.push(rows.len());
        }
        let mut row_entries = vec![Vec::new(); n];
        for k in 0..n {
            for idx in col_start[k]..col_start[k + 1] {
                row_entries[rows[idx]].push((k, idx));
            }
        }
        Self {
            n,
            perm,
            inv,
            col_start,
            rows,
            row_entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    /// Storage index of the off-diagonal entry `(a, b)` of the original
    /// matrix inside the value array, or `None` if `(a, b)` was not declared.
    pub fn slot(&self, a: usize, b: usize) -> Option<usize> {
        let (i, j) = (self.inv[a], self.inv[b]);
        let (row, col) = if i > j { (i, j) } else { (j, i) };
        let range = self.col_start[col]..self.col_start[col + 1];
        self.rows[range.clone()]
            .binary_search(&row)
            .ok()
            .map(|k| range.start + k)
    }

    /// Position of original index `a` on the permuted diagonal.
    pub fn diag_slot(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// Fresh zeroed value storage: `(diagonal, off-diagonal)`.
    pub fn values(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; self.n], vec![0.0; self.rows.len()])
    }

    /// Factorizes in place. On entry `diag`/`off` hold `A` (addressed through
    /// [`Self::diag_slot`] and [`Self::slot`]); on success they hold `L`.
    #[allow(clippy::needless_range_loop)]
    pub fn factor(&self, diag: &mut [f64], off: &mut [f64], work: &mut Vec<f64>) -> Result<(), NotPositiveDefinite> {
        work.clear();
        work.resize(self.n, 0.0);
        for j in 0..self.n {
            let col = self.col_start[j]..self.col_start[j + 1];
            for idx in col.clone() {
                work[self.rows[idx]] = off[idx];
            }
            let mut d = diag[j];
            for &(k, pos) in &self.row_entries[j] {
                let ljk = off[pos];
                d -= ljk * ljk;
                for idx in pos + 1..self.col_start[k + 1] {
                    work[self.rows[idx]] -= ljk * off[idx];
                }
            }
            if d.is_nan() || d <= 0.0 || d.is_infinite() {
                return Err(NotPositiveDefinite { column: j });
            }
            let ljj = d.sqrt();
            diag[j] = ljj;
            for idx in col {
                let r = self.rows[idx];
                off[idx] = work[r] / ljj;
                work[r] = 0.0;
            }
        }
        Ok(())
    }

    /// Solves `L L^T x = b` with a factor produced by [`Self::factor`];
    /// `b` is in original numbering and is overwritten with `x`.
    pub fn solve(&self, diag: &[f64], off: &[f64], b: &mut [f64], work: &mut Vec<f64>) {
        work.clear();
        work.extend(self.perm.iter().map(|&old| b[old]));
        // L y = b
        for j in 0..self.n {
            let yj = work[j] / diag[j];
            work[j] = yj;
            for idx in self.col_start[j]..self.col_start[j + 1] {
                work[self.rows[idx]] -= off[idx] * yj;
            }
        }
        // L^T x = y
        for j in (0..self.n).rev() {
            let mut s = work[j];
            for idx in self.col_start[j]..self.col_start[j + 1] {
                s -= off[idx] * work[self.rows[idx]];
            }
            work[j] = s / diag[j];
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = work[new];
        }
    }
}
