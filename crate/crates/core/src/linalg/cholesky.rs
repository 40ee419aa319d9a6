//! Envelope (profile) Cholesky factorization with reverse Cuthill–McKee ordering.
//!
//! For a symmetric positive definite `A` the factorization computes a permutation
//! `P` and a lower triangular `L` with `P A P^T = L L^T`. Writing `R = P^T L`,
//! this is `A = R R^T`, which is what the generalized SVD needs in addition to
//! plain solves. Row `i` of `L` is stored densely from its first structural
//! nonzero up to the diagonal; fill-in is confined to that envelope.

use std::collections::VecDeque;

use super::sparse::{dot, SparseSym};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// `inv_perm[old] = new`
    inv_perm: Vec<usize>,
    first: Vec<usize>,
    row_ptr: Vec<usize>,
    values: Vec<f64>,
}

/// Cholesky factorization of `a`, reusable for any number of right-hand sides.
pub fn factorize(a: &SparseSym) -> Result<Factorization> {
    let n = a.dim();
    let perm = reverse_cuthill_mckee(a);
    let mut inv_perm = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv_perm[old] = new;
    }

    let mut first: Vec<usize> = (0..n).collect();
    for old in 0..n {
        let i = inv_perm[old];
        for &c in a.row(old).0 {
            let j = inv_perm[c];
            if j < first[i] {
                first[i] = j;
            }
        }
    }
    let mut row_ptr = vec![0usize; n + 1];
    for i in 0..n {
        row_ptr[i + 1] = row_ptr[i] + (i - first[i] + 1);
    }
    let mut values = vec![0.0; row_ptr[n]];
    for old in 0..n {
        let i = inv_perm[old];
        let (cols, vals) = a.row(old);
        for (&c, &v) in cols.iter().zip(vals) {
            let j = inv_perm[c];
            if j <= i {
                values[row_ptr[i] + j - first[i]] = v;
            }
        }
    }

    for i in 0..n {
        let fi = first[i];
        let (done, rest) = values.split_at_mut(row_ptr[i]);
        let row_i = &mut rest[..i - fi + 1];
        for j in fi..i {
            let fj = first[j];
            let k0 = fi.max(fj);
            let row_j = &done[row_ptr[j]..row_ptr[j + 1]];
            let s = row_i[j - fi] - dot(&row_i[k0 - fi..j - fi], &row_j[k0 - fj..j - fj]);
            row_i[j - fi] = s / row_j[j - fj];
        }
        let off = &row_i[..i - fi];
        let d = row_i[i - fi] - dot(off, off);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: perm[i], value: d });
        }
        row_i[i - fi] = d.sqrt();
    }

    Ok(Factorization { n, perm, inv_perm, first, row_ptr, values })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries of `L`.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    fn permute(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "right-hand side has wrong length");
        self.perm.iter().map(|&old| x[old]).collect()
    }

    fn unpermute(&self, y: &[f64]) -> Vec<f64> {
        self.inv_perm.iter().map(|&new| y[new]).collect()
    }

    /// In-place `L y = b` on permuted coordinates.
    fn forward(&self, y: &mut [f64]) {
        for i in 0..self.n {
            let fi = self.first[i];
            let row = self.row(i);
            let s = dot(&row[..i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / row[i - fi];
        }
    }

    /// In-place `L^T x = y` on permuted coordinates.
    fn backward(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = self.row(i);
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yj, lij) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yj -= lij * xi;
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.permute(b);
        self.forward(&mut y);
        self.backward(&mut y);
        self.unpermute(&y)
    }

    /// `R^T x` where `A = R R^T`.
    pub fn factor_t_mul(&self, x: &[f64]) -> Vec<f64> {
        let px = self.permute(x);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let fi = self.first[i];
            for (o, lij) in out[fi..=i].iter_mut().zip(self.row(i)) {
                *o += lij * px[i];
            }
        }
        out
    }

    /// `R^{-1} x` where `A = R R^T`.
    pub fn factor_solve(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.permute(x);
        self.forward(&mut y);
        y
    }

    /// `R^{-T} w` where `A = R R^T`.
    pub fn factor_t_solve(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n);
        let mut y = w.to_vec();
        self.backward(&mut y);
        self.unpermute(&y)
    }
}

/// Reverse Cuthill–McKee ordering of the adjacency graph of `a`, one component
/// at a time, each started from a pseudo-peripheral node. Returns `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSym) -> Vec<usize> {
    let n = a.dim();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect()).collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut scratch = vec![usize::MAX; n];
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree, &mut scratch);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize], level: &mut [usize]) -> usize {
    let mut start = seed;
    let mut ecc = 0;
    loop {
        let (depth, last) = bfs_levels(start, adj, level);
        let candidate = last.into_iter().min_by_key(|&v| (degree[v], v)).unwrap_or(start);
        if depth <= ecc || candidate == start {
            return start;
        }
        ecc = depth;
        start = candidate;
    }
}

fn bfs_levels(start: usize, adj: &[Vec<usize>], level: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![start];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        depth = depth.max(level[v]);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
    }
    let last = touched.iter().copied().filter(|&v| level[v] == depth).collect();
    for v in touched {
        level[v] = usize::MAX;
    }
    (depth, last)
}
