//! Local FOSLS problems on the oversampling domain and the transfer operator
//! mapping boundary data on the oversampling boundary to local solutions
//! restricted to the interior.
//!
//! Dirichlet data is imposed strongly on the scalar nodes of the oversampling
//! boundary; flux DOFs are never constrained. The reduced normal-equation matrix
//! is factorized once per system and shared by every solve.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::assembly::{
    assemble_fosls, assemble_load, assemble_mass, assemble_weighted_gram, check_friedrichs_positivity, graph_norm_with,
    max_coefficient_matrix_norm, CoefficientField, PositivityReport,
};
use crate::error::{Error, Result};
use crate::grid::{Rect, SubdomainPair};
use crate::linalg::sparse::{axpy, norm2};
use crate::linalg::{factorize, CsrMatrix, Factorization, SparseSym};
use crate::spaces::{restrict, BoundarySpace, MixedFunction, MixedSpace, RestrictionMap};

/// Default cap on the number of boundary DOFs for dense transfer matrices.
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// Relative residual accepted from the reduced solves.
pub const SOLVER_TOL: f64 = 1e-10;

const MAX_REFINEMENT_STEPS: usize = 3;

pub struct TransferSystem {
    pub pair: SubdomainPair,
    pub coeff: CoefficientField,
    pub interior_coeff: CoefficientField,
    pub positivity: PositivityReport,
    pub space: MixedSpace,
    pub boundary: BoundarySpace,
    pub restriction: RestrictionMap,
    /// FOSLS matrix on the oversampling domain.
    pub fosls: SparseSym,
    /// Weighted and plain L2 Gram matrices on the oversampling domain.
    pub weighted_gram_star: SparseSym,
    pub mass_star: SparseSym,
    /// FOSLS, weighted Gram and plain L2 matrices on the interior.
    pub fosls_interior: SparseSym,
    pub weighted_gram_interior: SparseSym,
    pub mass_interior: SparseSym,
    /// L2 mass matrix of the boundary space.
    pub boundary_mass: SparseSym,
    free: Vec<usize>,
    constrained: Vec<usize>,
    reduced: SparseSym,
    coupling: CsrMatrix,
    factor: Factorization,
    homogeneous: Vec<bool>,
}

/// Assembles every matrix of the local problem and factorizes the reduced system.
pub fn build_transfer(pair: &SubdomainPair, coeff: CoefficientField) -> Result<TransferSystem> {
    let space = MixedSpace::new(pair.grid);
    if coeff.n_cells() != pair.grid.n_cells() {
        return Err(Error::DimensionMismatch(format!(
            "coefficients cover {} cells, grid has {}",
            coeff.n_cells(),
            pair.grid.n_cells()
        )));
    }
    let positivity = check_friedrichs_positivity(&coeff)?;
    let boundary = BoundarySpace::new(pair.grid);
    let restriction = RestrictionMap::new(pair);
    let interior_coeff = coeff.restrict(pair);

    let fosls = assemble_fosls(&space, &coeff);
    let n_flux = space.n_flux();
    let constrained: Vec<usize> = boundary.nodes.iter().map(|&n| n_flux + n).collect();
    let mut is_constrained = vec![false; space.n_dofs()];
    for &c in &constrained {
        is_constrained[c] = true;
    }
    let free: Vec<usize> = (0..space.n_dofs()).filter(|&d| !is_constrained[d]).collect();
    let reduced = fosls.principal(&free);
    let coupling = fosls.submatrix(&free, &constrained);
    let factor = factorize(&reduced)?;
    log::debug!(
        "transfer system: {} free DOFs, {} boundary DOFs, factor envelope {}",
        free.len(),
        constrained.len(),
        factor.envelope_size()
    );

    let target = &restriction.target;
    Ok(TransferSystem {
        weighted_gram_star: assemble_weighted_gram(&space, &coeff),
        mass_star: assemble_mass(&space),
        fosls_interior: assemble_fosls(target, &interior_coeff),
        weighted_gram_interior: assemble_weighted_gram(target, &interior_coeff),
        mass_interior: assemble_mass(target),
        boundary_mass: boundary.mass_matrix(),
        homogeneous: vec![false; boundary.n_dofs()],
        pair: pair.clone(),
        coeff,
        interior_coeff,
        positivity,
        space,
        boundary,
        restriction,
        fosls,
        free,
        constrained,
        reduced,
        coupling,
        factor,
    })
}

impl TransferSystem {
    pub fn n_boundary(&self) -> usize {
        self.boundary.n_dofs()
    }

    /// Dimension of the Dirichlet-reduced system.
    pub fn reduced_dim(&self) -> usize {
        self.free.len()
    }

    /// Number of mixed DOFs on the interior.
    pub fn n_interior(&self) -> usize {
        self.restriction.target.n_dofs()
    }

    pub fn interior_space(&self) -> &MixedSpace {
        &self.restriction.target
    }

    /// Marks boundary nodes lying on the boundary of the global domain; they
    /// receive homogeneous data whatever the input.
    pub fn set_global_boundary(&mut self, global: Rect) {
        let on = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
        self.homogeneous = self
            .boundary
            .nodes
            .iter()
            .map(|&n| {
                let p = self.pair.grid.node_coords(n);
                on(p[0], global.x0) || on(p[0], global.x1) || on(p[1], global.y0) || on(p[1], global.y1)
            })
            .collect();
    }

    pub fn homogeneous_mask(&self) -> &[bool] {
        &self.homogeneous
    }

    fn check_boundary(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.n_boundary() {
            return Err(Error::SpaceMismatch { expected: self.n_boundary(), got: g.len() });
        }
        Ok(())
    }

    /// Full solution vector on the oversampling domain for boundary data `g` and an
    /// optional load on the free DOFs.
    fn solve_full(&self, g: &[f64], load: Option<&[f64]>) -> Result<Vec<f64>> {
        self.check_boundary(g)?;
        let data: Vec<f64> = g.iter().zip(&self.homogeneous).map(|(&v, &zero)| if zero { 0.0 } else { v }).collect();
        let mut rhs = self.coupling.mul_vec(&data);
        rhs.iter_mut().for_each(|v| *v = -*v);
        if let Some(load) = load {
            for (r, &d) in rhs.iter_mut().zip(&self.free) {
                *r += load[d];
            }
        }
        let x = self.solve_reduced(&rhs)?;
        let mut full = vec![0.0; self.space.n_dofs()];
        for (&d, v) in self.free.iter().zip(x) {
            full[d] = v;
        }
        for (&d, v) in self.constrained.iter().zip(data) {
            full[d] = v;
        }
        Ok(full)
    }

    /// Solves the reduced system with a few steps of iterative refinement.
    fn solve_reduced(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let scale = norm2(rhs);
        let mut x = self.factor.solve(rhs);
        if scale == 0.0 {
            return Ok(x);
        }
        for step in 0..=MAX_REFINEMENT_STEPS {
            let mut r = self.reduced.mul_vec(&x);
            r.iter_mut().zip(rhs).for_each(|(ri, bi)| *ri = bi - *ri);
            let rel = norm2(&r) / scale;
            if !rel.is_finite() {
                return Err(Error::SolverFailure("non-finite residual".into()));
            }
            if rel <= SOLVER_TOL {
                return Ok(x);
            }
            if step == MAX_REFINEMENT_STEPS {
                return Err(Error::SolverFailure(format!("relative residual {rel:e} above {SOLVER_TOL:e}")));
            }
            axpy(1.0, &self.factor.solve(&r), &mut x);
        }
        unreachable!()
    }

    /// Solution of the shifted local problem on the whole oversampling domain.
    pub fn shifted_solution(&self, g: &[f64]) -> Result<MixedFunction> {
        MixedFunction::from_flat(&self.space, &self.solve_full(g, None)?)
    }

    /// Interior restriction of the shifted solution as a flat `[flux; scalar]` vector.
    pub fn apply_flat(&self, g: &[f64]) -> Result<Vec<f64>> {
        let full = self.solve_full(g, None)?;
        Ok(self.restriction.flat_indices().iter().map(|&d| full[d]).collect())
    }

    /// Relative residual of the normal equations on the free DOFs for a full
    /// solution vector with load `load`.
    pub fn free_residual(&self, full: &MixedFunction, load: Option<&[f64]>) -> f64 {
        let v = full.to_flat();
        let kv = self.fosls.mul_vec(&v);
        let mut num = 0.0;
        let mut den = 0.0;
        for &d in &self.free {
            let f = load.map_or(0.0, |l| l[d]);
            num += (kv[d] - f).powi(2);
            den += f * f;
        }
        let scale = den.sqrt().max(self.fosls.max_abs() * norm2(&v));
        if scale == 0.0 {
            0.0
        } else {
            num.sqrt() / scale
        }
    }
}

/// `T(g)`: solve the shifted local problem with boundary data `g` and restrict to
/// the interior.
pub fn apply_transfer(sys: &TransferSystem, g: &[f64]) -> Result<MixedFunction> {
    restrict(&sys.restriction, &sys.shifted_solution(g)?)
}

/// Solution of the local problem with boundary data `g` and cellwise source `source`
/// (second component of the right-hand side), on the oversampling domain.
pub fn solve_local_affine(sys: &TransferSystem, g: &[f64], source: &[f64]) -> Result<MixedFunction> {
    if source.len() != sys.coeff.n_cells() {
        return Err(Error::SpaceMismatch { expected: sys.coeff.n_cells(), got: source.len() });
    }
    let load = assemble_load(&sys.space, &sys.coeff, source);
    MixedFunction::from_flat(&sys.space, &sys.solve_full(g, Some(&load))?)
}

/// Load vector of `solve_local_affine`, for residual checks.
pub fn local_load(sys: &TransferSystem, source: &[f64]) -> Vec<f64> {
    assemble_load(&sys.space, &sys.coeff, source)
}

/// Dense matrix of `T`: column `j` is the flat interior response to the `j`-th
/// boundary hat function.
pub fn transfer_matrix(sys: &TransferSystem, cap: usize) -> Result<DMatrix<f64>> {
    let nb = sys.n_boundary();
    if nb > cap {
        return Err(Error::CapExceeded { dofs: nb, cap });
    }
    let columns: Vec<Vec<f64>> = (0..nb)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; nb];
            e[j] = 1.0;
            sys.apply_flat(&e)
        })
        .collect::<Result<_>>()?;
    let m = sys.n_interior();
    Ok(DMatrix::from_fn(m, nb, |i, j| columns[j][i]))
}

/// Both sides of the Caccioppoli inequality for a shifted local solution `f` on
/// the oversampling domain: the interior graph norm, and
/// `max_i ||A^i|| * 2 / delta * ||f||_{L2(oversampling)}`.
pub fn caccioppoli_ratio(sys: &TransferSystem, f: &MixedFunction) -> Result<(f64, f64)> {
    f.check(&sys.space)?;
    let interior = restrict(&sys.restriction, f)?;
    let lhs = graph_norm_with(&sys.fosls_interior, &sys.mass_interior, &interior);
    let v = f.to_flat();
    let l2 = sys.mass_star.inner(&v, &v).max(0.0).sqrt();
    let rhs = max_coefficient_matrix_norm(&sys.coeff) * 2.0 / sys.pair.delta * l2;
    Ok((lhs, rhs))
}
