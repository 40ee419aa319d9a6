//! Sparse and dense linear algebra used by the local solvers and the range finders.

pub mod cholesky;
pub mod gram_schmidt;
pub mod rng;
pub mod sparse;
pub mod spectral;

pub use cholesky::{factorize, Factorization};
pub use gram_schmidt::{gram_orthonormalize, OrthonormalBasis, DEFAULT_TOL_DROP};
pub use rng::{gaussian_vector, GaussianStream};
pub use sparse::{CsrMatrix, SparseSym};
pub use spectral::{generalized_svd, min_eigenvalue, GeneralizedSvd};
