//! Approximation of the range of a transfer operator: the adaptive randomized
//! range finder, the SVD-optimal spaces, the a-priori bound and projection errors.

use rayon::prelude::*;
use statrs::function::erf::erf_inv;

use crate::error::{Error, Result};
use crate::linalg::rng::streams;
use crate::linalg::sparse::{axpy, dot};
use crate::linalg::{
    gaussian_vector, generalized_svd, min_eigenvalue, GaussianStream, OrthonormalBasis, SparseSym, DEFAULT_TOL_DROP,
};
use crate::spaces::{MixedFunction, MixedSpace};
use crate::transfer::{transfer_matrix, TransferSystem};

/// Consecutive numerically dependent draws after which training gives up.
const MAX_CONSECUTIVE_DROPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Randomized,
    SvdOptimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The estimator fell below the tolerance.
    Converged,
    /// `max_basis` vectors were generated before the estimator reached the tolerance.
    MaxBasisReached,
    /// New draws kept lying in the span of the basis.
    RankExhausted,
    /// Computed directly (SVD oracle).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingStep {
    pub basis_size: usize,
    /// Largest weighted norm over the deflated test set.
    pub max_test_norm: f64,
    /// `max_test_norm * c_est`.
    pub estimate: f64,
}

#[derive(Debug, Clone)]
pub struct RangeApproximation {
    /// Weighted-Gram-orthonormal basis as flat interior `[flux; scalar]` vectors.
    pub basis: Vec<Vec<f64>>,
    pub provenance: Provenance,
    /// Singular values, oracle only.
    pub sigmas: Option<Vec<f64>>,
    pub training_log: Vec<TrainingStep>,
    pub termination: Termination,
    pub c_est: Option<f64>,
    /// Number of operator applications spent on basis candidates.
    pub draws: usize,
}

impl RangeApproximation {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis_functions(&self, space: &MixedSpace) -> Result<Vec<MixedFunction>> {
        self.basis.iter().map(|b| MixedFunction::from_flat(space, b)).collect()
    }

    /// First `n` basis vectors.
    pub fn truncated(&self, n: usize) -> RangeApproximation {
        let mut out = self.clone();
        out.basis.truncate(n);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub tol: f64,
    /// Number of random test vectors.
    pub n_test: usize,
    /// Admissible probability that the estimator underestimates the error.
    pub eps_fail: f64,
    pub max_basis: usize,
    pub seed: u64,
    /// Replaces the computed estimator constant.
    pub c_est: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { tol: 1e-2, n_test: 40, eps_fail: 1e-15, max_basis: 120, seed: 1, c_est: None }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.n_test < 1 {
            return Err(Error::InvalidConfig("n_test must be at least 1".into()));
        }
        if !(self.eps_fail > 0.0 && self.eps_fail < 1.0) {
            return Err(Error::InvalidConfig(format!("eps_fail must lie in (0, 1), got {}", self.eps_fail)));
        }
        if let Some(c) = self.c_est {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidConfig(format!("c_est override must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// Constant scaling the largest test-vector norm into an error estimate that
/// holds with probability at least `1 - eps_fail`:
/// `c_est = 1 / (sqrt(2 lambda_min(G_bnd)) erfinv(eps_fail^(1 / n_test)))`.
pub fn estimator_constant(cfg: &TrainingConfig, boundary_gram: &SparseSym) -> Result<f64> {
    if let Some(c) = cfg.c_est {
        return Ok(c);
    }
    let lambda = min_eigenvalue(boundary_gram)?;
    let quantile = erf_inv(cfg.eps_fail.powf(1.0 / cfg.n_test as f64));
    Ok(1.0 / ((2.0 * lambda).sqrt() * quantile))
}

fn apply_all(sys: &TransferSystem, draws: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    draws.into_par_iter().map(|g| sys.apply_flat(&g)).collect()
}

/// Boundary data and their flat interior images.
pub type Samples = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Random evaluation samples `T(g)` with Gaussian `g` from the given sub-stream.
pub fn random_samples(sys: &TransferSystem, seed: u64, stream: u64, count: usize) -> Result<Samples> {
    let mut rng = GaussianStream::new(seed, stream);
    let data: Vec<Vec<f64>> = (0..count).map(|_| gaussian_vector(sys.n_boundary(), &mut rng)).collect();
    let images = apply_all(sys, data.clone())?;
    Ok((data, images))
}

/// Adaptive randomized range approximation.
///
/// A test set of `n_test` images of Gaussian boundary data is drawn up front.
/// Each iteration applies the transfer operator to one fresh Gaussian vector,
/// orthonormalizes it into the basis and deflates the test set, until the
/// largest remaining test norm times `c_est` is at most `tol`.
pub fn adaptive_range(sys: &TransferSystem, cfg: &TrainingConfig) -> Result<RangeApproximation> {
    cfg.validate()?;
    let gram = &sys.weighted_gram_interior;
    let c_est = estimator_constant(cfg, &sys.boundary_mass)?;
    let (_, mut tests) = random_samples(sys, cfg.seed, streams::TEST, cfg.n_test)?;
    let mut train = GaussianStream::new(cfg.seed, streams::TRAIN);

    let mut basis = OrthonormalBasis::new();
    let mut log = Vec::new();
    let mut draws = 0;
    let mut drops = 0;
    let termination = loop {
        let max_test_norm = tests.iter().map(|t| gram.norm(t)).fold(0.0, f64::max);
        let estimate = max_test_norm * c_est;
        log.push(TrainingStep { basis_size: basis.len(), max_test_norm, estimate });
        if estimate <= cfg.tol {
            break Termination::Converged;
        }
        if basis.len() >= cfg.max_basis {
            break Termination::MaxBasisReached;
        }
        loop {
            let r = gaussian_vector(sys.n_boundary(), &mut train);
            draws += 1;
            if basis.try_push(sys.apply_flat(&r)?, gram, DEFAULT_TOL_DROP) {
                drops = 0;
                break;
            }
            drops += 1;
            if drops >= MAX_CONSECUTIVE_DROPS {
                break;
            }
        }
        if drops >= MAX_CONSECUTIVE_DROPS {
            break Termination::RankExhausted;
        }
        tests.par_iter_mut().for_each(|t| basis.project_out(t));
    };
    log::info!(
        "range finder: {} basis vectors after {} draws ({termination:?}), c_est = {c_est:.4}",
        basis.len(),
        draws
    );

    Ok(RangeApproximation {
        basis: basis.into_vectors(),
        provenance: Provenance::Randomized,
        sigmas: None,
        training_log: log,
        termination,
        c_est: Some(c_est),
        draws,
    })
}

/// Optimal spaces: left singular vectors of the transfer operator from the
/// boundary L2 space to the interior weighted L2 space.
pub fn oracle(sys: &TransferSystem, cap: usize) -> Result<RangeApproximation> {
    let t = transfer_matrix(sys, cap)?;
    let svd = generalized_svd(&t, &sys.boundary_mass, &sys.weighted_gram_interior)?;
    Ok(RangeApproximation {
        basis: svd.left,
        provenance: Provenance::SvdOptimal,
        sigmas: Some(svd.sigmas),
        training_log: Vec::new(),
        termination: Termination::Exact,
        c_est: None,
        draws: 0,
    })
}

/// The a-priori bound without its leading constant:
/// `min over k + p = n, k, p >= 2 of (1 + sqrt(k / (p - 1))) s_{k+1} + e sqrt(n) / p * (sum_{j > k} s_j^2)^(1/2)`,
/// with `sigmas[0] = s_1`.
pub fn apriori_bound(sigmas: &[f64], n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::InsufficientData(format!("bound needs n >= 4, got {n}")));
    }
    if sigmas.len() < n + 1 {
        return Err(Error::InsufficientData(format!(
            "bound for n = {n} needs {} singular values, got {}",
            n + 1,
            sigmas.len()
        )));
    }
    let nf = n as f64;
    Ok((2..=n - 2)
        .map(|k| {
            let p = (n - k) as f64;
            let tail: f64 = sigmas[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
            (1.0 + (k as f64 / (p - 1.0)).sqrt()) * sigmas[k] + std::f64::consts::E * nf.sqrt() / p * tail
        })
        .fold(f64::INFINITY, f64::min))
}

/// Relative projection errors, one row per sample and one column per basis size
/// `N = 1..=len`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub total: Vec<Vec<f64>>,
    pub scalar: Vec<Vec<f64>>,
    pub flux: Vec<Vec<f64>>,
}

impl ErrorTable {
    pub fn n_samples(&self) -> usize {
        self.total.len()
    }

    pub fn n_dims(&self) -> usize {
        self.total.first().map_or(0, Vec::len)
    }

    /// Median over samples of the total error for each basis size.
    pub fn median_total(&self) -> Vec<f64> {
        (0..self.n_dims())
            .map(|n| {
                let mut col: Vec<f64> = self.total.iter().map(|r| r[n]).collect();
                median(&mut col)
            })
            .collect()
    }
}

pub fn median(v: &mut [f64]) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `||s - P_N s|| / ||s||` in the weighted norm, together with its flux part
/// `||D^{-1}(sigma - P_N sigma)|| / ||s||` and scalar part `||u - P_N u|| / ||s||`,
/// for `P_N` the weighted orthogonal projection onto the first `N` basis vectors.
///
/// The weighted Gram matrix has no flux–scalar coupling, so the squared total is
/// the sum of the squared parts.
pub fn projection_errors(
    basis: &[Vec<f64>],
    samples: &[Vec<f64>],
    gram: &SparseSym,
    n_flux: usize,
) -> Result<ErrorTable> {
    let images: Vec<Vec<f64>> = basis.par_iter().map(|b| gram.mul_vec(b)).collect();
    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut e = s.clone();
            let mut ge = gram.mul_vec(s);
            let norm = dot(&e, &ge).max(0.0).sqrt();
            if !(norm > 0.0) {
                return Err(Error::ZeroSample(i));
            }
            let mut total = Vec::with_capacity(basis.len());
            let mut flux = Vec::with_capacity(basis.len());
            let mut scalar = Vec::with_capacity(basis.len());
            for (b, gb) in basis.iter().zip(&images) {
                let c = dot(&e, gb);
                axpy(-c, b, &mut e);
                axpy(-c, gb, &mut ge);
                let f2 = dot(&e[..n_flux], &ge[..n_flux]).max(0.0);
                let s2 = dot(&e[n_flux..], &ge[n_flux..]).max(0.0);
                total.push((f2 + s2).sqrt() / norm);
                flux.push(f2.sqrt() / norm);
                scalar.push(s2.sqrt() / norm);
            }
            Ok((total, scalar, flux))
        })
        .collect::<Result<_>>()?;
    let mut table = ErrorTable { total: Vec::new(), scalar: Vec::new(), flux: Vec::new() };
    for (t, s, f) in rows {
        table.total.push(t);
        table.scalar.push(s);
        table.flux.push(f);
    }
    Ok(table)
}
