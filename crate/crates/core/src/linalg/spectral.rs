use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cholesky::factorize;
use super::sparse::{dot, SparseSym};
use crate::error::{Error, Result};

/// Singular values and left singular vectors of an operator between two
/// inner-product spaces.
#[derive(Debug, Clone)]
pub struct GeneralizedSvd {
    /// Non-increasing.
    pub sigmas: Vec<f64>,
    /// `G_range`-orthonormal, in range coordinates, matching `sigmas`.
    pub left: Vec<Vec<f64>>,
}

/// SVD of the map `x -> T x` from `(R^n, G_source)` to `(R^m, G_range)`.
///
/// With `G_source = L L^T` and `G_range = R R^T` the singular values are those of
/// `R^T T L^{-T}`; a left vector `w` of that matrix maps back to `R^{-T} w`.
pub fn generalized_svd(t: &DMatrix<f64>, g_source: &SparseSym, g_range: &SparseSym) -> Result<GeneralizedSvd> {
    let (m, n) = t.shape();
    if g_source.dim() != n || g_range.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "operator is {m}x{n}, source Gram {}, range Gram {}",
            g_source.dim(),
            g_range.dim()
        )));
    }
    let fs = factorize(g_source)?;
    let fr = factorize(g_range)?;

    let mut y = DMatrix::zeros(m, n);
    for r in 0..m {
        let row: Vec<f64> = t.row(r).iter().copied().collect();
        let z = fs.factor_solve(&row);
        for c in 0..n {
            y[(r, c)] = z[c];
        }
    }
    let mut w = DMatrix::zeros(m, n);
    for c in 0..n {
        let col: Vec<f64> = y.column(c).iter().copied().collect();
        let z = fr.factor_t_mul(&col);
        for r in 0..m {
            w[(r, c)] = z[r];
        }
    }

    let svd = w.svd(true, false);
    let u = svd.u.ok_or_else(|| Error::SolverFailure("SVD did not return left vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let sigmas = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left = order
        .iter()
        .map(|&k| {
            let col: Vec<f64> = u.column(k).iter().copied().collect();
            fr.factor_t_solve(&col)
        })
        .collect();
    Ok(GeneralizedSvd { sigmas, left })
}

const MAX_INVERSE_ITERATIONS: usize = 100_000;

/// Smallest eigenvalue of an SPD matrix by inverse iteration with Rayleigh quotients.
///
/// The estimate approaches the true value from above. Clustered spectra (such as
/// boundary mass matrices) converge only like `1/k` in the Rayleigh quotient, so the
/// loop runs until successive estimates agree to `1e-9` relative.
pub fn min_eigenvalue(g: &SparseSym) -> Result<f64> {
    let n = g.dim();
    if n == 0 {
        return Err(Error::InsufficientData("empty matrix has no eigenvalues".into()));
    }
    let f = factorize(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nx = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= nx);
    let mut lambda = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let y = f.solve(&x);
        // Rayleigh quotient of y: y^T G y / y^T y = y^T x / y^T y
        let yy = dot(&y, &y);
        let next = dot(&y, &x) / yy;
        let ny = yy.sqrt();
        x = y.into_iter().map(|v| v / ny).collect();
        let converged = (lambda - next).abs() <= 1e-9 * next;
        lambda = next;
        if converged {
            break;
        }
    }
    Ok(lambda)
}
