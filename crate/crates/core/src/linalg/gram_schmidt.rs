//! Modified Gram–Schmidt in the inner product induced by a sparse SPD matrix.

use super::sparse::{axpy, dot, SparseSym};

/// Relative norm below which a vector counts as linearly dependent.
pub const DEFAULT_TOL_DROP: f64 = 1e-10;

/// A `G`-orthonormal set of vectors, stored together with their images `G b`
/// so that inner products against the basis reduce to dot products.
#[derive(Debug, Clone, Default)]
pub struct OrthonormalBasis {
    vectors: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
}

impl OrthonormalBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }

    /// Removes the components of `v` along the basis, twice.
    fn orthogonalize(&self, v: &mut [f64]) {
        for _ in 0..2 {
            for (b, gb) in self.vectors.iter().zip(&self.images) {
                let c = dot(v, gb);
                axpy(-c, b, v);
            }
        }
    }

    /// Orthonormalizes `v` against the basis and appends it, unless its remaining
    /// `G`-norm falls below `tol_drop` times its original `G`-norm.
    pub fn try_push(&mut self, mut v: Vec<f64>, g: &SparseSym, tol_drop: f64) -> bool {
        let before = g.norm(&v);
        if !(before > 0.0) || !before.is_finite() {
            return false;
        }
        self.orthogonalize(&mut v);
        let gv = g.mul_vec(&v);
        let after = dot(&v, &gv).max(0.0).sqrt();
        if after < tol_drop * before {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= after);
        self.images.push(gv.into_iter().map(|x| x / after).collect());
        self.vectors.push(v);
        true
    }

    /// `t - P t`, with `P` the `G`-orthogonal projection onto the span.
    pub fn project_out(&self, t: &mut [f64]) {
        for (b, gb) in self.vectors.iter().zip(&self.images) {
            let c = dot(t, gb);
            axpy(-c, b, t);
        }
    }

    /// Coefficients `(t, b_k)_G` of `t` against every basis vector.
    pub fn coefficients(&self, t: &[f64]) -> Vec<f64> {
        self.images.iter().map(|gb| dot(t, gb)).collect()
    }
}

/// Orthonormalizes `vectors` in the `G` inner product. Returns the orthonormal set
/// and the number of dropped (numerically dependent) inputs.
pub fn gram_orthonormalize(vectors: &[Vec<f64>], g: &SparseSym, tol_drop: f64) -> (Vec<Vec<f64>>, usize) {
    let mut basis = OrthonormalBasis::new();
    let mut dropped = 0;
    for v in vectors {
        assert_eq!(v.len(), g.dim());
        if !basis.try_push(v.clone(), g, tol_drop) {
            dropped += 1;
        }
    }
    (basis.into_vectors(), dropped)
}
