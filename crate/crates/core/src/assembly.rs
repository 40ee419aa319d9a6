//! Coefficients of the mixed convection–diffusion–reaction operator
//!
//! ```text
//! A(sigma, u) = ( D^{-1} sigma + grad u ,  div sigma + b . grad u + c u )
//! ```
//!
//! and assembly of the FOSLS normal-equation matrix, the weighted and plain L2
//! Gram matrices, and the right-hand side of the local problem.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{StructuredGrid, SubdomainPair};
use crate::linalg::SparseSym;
use crate::spaces::{flux_shape, scalar_shape, scalar_shape_grad, MixedFunction, MixedSpace, FLUX_SHAPE_DIV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Bands of width `2 * half_width` around the given centers, running across the
/// whole domain along each axis in `axes`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelPattern {
    pub axes: Vec<Axis>,
    pub centers: Vec<f64>,
    pub half_width: f64,
    pub inside_value: f64,
    pub outside_value: f64,
}

impl ChannelPattern {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.axes.iter().any(|axis| {
            let coord = match axis {
                Axis::Horizontal => p[1],
                Axis::Vertical => p[0],
            };
            self.centers.iter().any(|c| (coord - c).abs() <= self.half_width)
        })
    }

    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        if self.contains(p) {
            self.inside_value
        } else {
            self.outside_value
        }
    }

    fn validate(&self, grid: &StructuredGrid) -> Result<()> {
        if !(self.half_width > 0.0) {
            return Err(Error::InvalidConfig(format!("channel half width {} must be positive", self.half_width)));
        }
        let r = grid.rect;
        for axis in &self.axes {
            let (lo, hi) = match axis {
                Axis::Horizontal => (r.y0, r.y1),
                Axis::Vertical => (r.x0, r.x1),
            };
            if let Some(c) = self.centers.iter().find(|&&c| c < lo || c > hi) {
                return Err(Error::InvalidConfig(format!("channel center {c} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    Channels(ChannelPattern),
}

impl Profile {
    fn value_at(&self, p: [f64; 2]) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Channels(c) => c.value_at(p),
        }
    }
}

/// Description of the coefficients before they are sampled on a grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    /// Isotropic diffusion `D = d I`.
    pub diffusion: Profile,
    pub convection: [f64; 2],
    pub reaction: Profile,
}

impl CoefficientSpec {
    pub fn pure_diffusion() -> Self {
        Self { diffusion: Profile::Constant(1.0), convection: [0.0, 0.0], reaction: Profile::Constant(0.0) }
    }

    /// Full CDR case: `b = (1, 1)`, and inside the channels `D = contrast`, `c = 0`,
    /// elsewhere `D = 1`, `c = 1`.
    pub fn full_cdr(axes: Vec<Axis>, centers: Vec<f64>, half_width: f64, contrast: f64) -> Self {
        let pattern = |inside, outside| ChannelPattern {
            axes: axes.clone(),
            centers: centers.clone(),
            half_width,
            inside_value: inside,
            outside_value: outside,
        };
        Self {
            diffusion: Profile::Channels(pattern(contrast, 1.0)),
            convection: [1.0, 1.0],
            reaction: Profile::Channels(pattern(0.0, 1.0)),
        }
    }
}

/// Cellwise coefficients: diagonal diffusion, constant convection, reaction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub diffusion: Vec<[f64; 2]>,
    pub convection: [f64; 2],
    pub reaction: Vec<f64>,
}

/// Samples `spec` at the cell midpoints of `grid`.
pub fn sample_coefficients(spec: &CoefficientSpec, grid: &StructuredGrid) -> Result<CoefficientField> {
    for p in [&spec.diffusion, &spec.reaction] {
        if let Profile::Channels(c) = p {
            c.validate(grid)?;
        }
    }
    if !spec.convection.iter().all(|b| b.is_finite()) {
        return Err(Error::InvalidConfig("convection must be finite".into()));
    }
    let centers: Vec<[f64; 2]> = (0..grid.n_cells()).map(|c| grid.cell_center(c)).collect();
    let diffusion: Vec<[f64; 2]> = centers
        .iter()
        .map(|&p| {
            let d = spec.diffusion.value_at(p);
            [d, d]
        })
        .collect();
    if let Some(d) = diffusion.iter().flatten().find(|d| !(**d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidConfig(format!("diffusion {d} must be positive")));
    }
    Ok(CoefficientField {
        diffusion,
        convection: spec.convection,
        reaction: centers.iter().map(|&p| spec.reaction.value_at(p)).collect(),
    })
}

impl CoefficientField {
    pub fn constant(grid: &StructuredGrid, diffusion: f64, convection: [f64; 2], reaction: f64) -> Self {
        Self { diffusion: vec![[diffusion; 2]; grid.n_cells()], convection, reaction: vec![reaction; grid.n_cells()] }
    }

    pub fn n_cells(&self) -> usize {
        self.reaction.len()
    }

    /// Coefficients of the interior cells of `pair`.
    pub fn restrict(&self, pair: &SubdomainPair) -> CoefficientField {
        let cells: Vec<usize> =
            (0..pair.interior_grid.n_cells()).map(|c| pair.interior_to_oversampling_cell(c)).collect();
        CoefficientField {
            diffusion: cells.iter().map(|&c| self.diffusion[c]).collect(),
            convection: self.convection,
            reaction: cells.iter().map(|&c| self.reaction[c]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    /// Smallest eigenvalue of `2 D^{-1}` over all cells.
    pub flux_part: f64,
    /// Smallest value of `2 (c - div(b) / 2)` over all cells.
    pub scalar_part: f64,
    /// Largest `eps` with `A_0 + A_0^T - div A >= 2 eps I`.
    pub epsilon: f64,
    /// `epsilon == 0`: positivity holds only in the semi-definite sense.
    pub semi_definite: bool,
}

/// Evaluates `A_0 + A_0^T - div A = diag(2 D^{-1}, 2 c - div b)` on every cell.
/// `b` is constant, so `div b = 0`.
pub fn check_friedrichs_positivity(coeff: &CoefficientField) -> Result<PositivityReport> {
    let mut flux_part = f64::INFINITY;
    let mut scalar_part = f64::INFINITY;
    for (cell, (d, c)) in coeff.diffusion.iter().zip(&coeff.reaction).enumerate() {
        if d[0] <= 0.0 || d[1] <= 0.0 {
            return Err(Error::NegativeDefinite(format!("diffusion {d:?} on cell {cell}")));
        }
        flux_part = flux_part.min(2.0 / d[0]).min(2.0 / d[1]);
        scalar_part = scalar_part.min(2.0 * c);
    }
    if scalar_part < 0.0 {
        return Err(Error::NegativeDefinite(format!("reaction term 2(c - div b / 2) = {scalar_part}")));
    }
    let epsilon = 0.5 * flux_part.min(scalar_part);
    Ok(PositivityReport { flux_part, scalar_part, epsilon, semi_definite: epsilon == 0.0 })
}

/// The coefficient matrices `A^1`, `A^2` of the first-order terms, variables
/// ordered `(sigma_1, sigma_2, u)`.
pub fn first_order_matrices(b: [f64; 2]) -> [[[f64; 3]; 3]; 2] {
    [[[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, b[0]]], [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, b[1]]]]
}

fn max_row_sum(a: &[[f64; 3]; 3]) -> f64 {
    a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `max_i ||A^i||_inf` with the maximum-absolute-row-sum norm. `b` is constant so
/// every cell gives the same value.
pub fn max_coefficient_matrix_norm(coeff: &CoefficientField) -> f64 {
    first_order_matrices(coeff.convection).iter().map(max_row_sum).fold(0.0, f64::max)
}

/// Gauss–Legendre rule on `[0, 1]^2` as `(point, weight)` pairs.
pub fn gauss_rule(order: usize) -> Vec<([f64; 2], f64)> {
    let (x, w): (Vec<f64>, Vec<f64>) = match order {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (0.6f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        _ => panic!("Gauss rule of order {order} not tabulated"),
    };
    let mut rule = Vec::with_capacity(order * order);
    for (yj, wj) in x.iter().zip(&w) {
        for (xi, wi) in x.iter().zip(&w) {
            rule.push(([0.5 * (xi + 1.0), 0.5 * (yj + 1.0)], 0.25 * wi * wj));
        }
    }
    rule
}

/// Default rule; exact for every integrand assembled here.
pub const QUADRATURE_ORDER: usize = 2;

/// Local "row vectors" of each of the 8 cell basis functions at a point: three
/// components per basis function, which the kernels below combine pairwise.
type LocalRows = [[f64; 3]; 8];

fn operator_rows(local: [f64; 2], h: f64, dinv: [f64; 2], b: [f64; 2], c: f64) -> LocalRows {
    let psi = flux_shape(local);
    let phi = scalar_shape(local);
    let dphi = scalar_shape_grad(local);
    let mut rows = [[0.0; 3]; 8];
    for k in 0..4 {
        rows[k] = [dinv[0] * psi[k][0], dinv[1] * psi[k][1], FLUX_SHAPE_DIV[k] / h];
        let g = [dphi[k][0] / h, dphi[k][1] / h];
        rows[4 + k] = [g[0], g[1], b[0] * g[0] + b[1] * g[1] + c * phi[k]];
    }
    rows
}

fn value_rows(local: [f64; 2], weight: [f64; 2]) -> LocalRows {
    let psi = flux_shape(local);
    let phi = scalar_shape(local);
    let mut rows = [[0.0; 3]; 8];
    for k in 0..4 {
        rows[k] = [weight[0] * psi[k][0], weight[1] * psi[k][1], 0.0];
        rows[4 + k] = [0.0, 0.0, phi[k]];
    }
    rows
}

fn assemble_pairwise(space: &MixedSpace, order: usize, rows_at: impl Fn(usize, [f64; 2]) -> LocalRows) -> SparseSym {
    let grid = space.grid();
    let area = grid.h * grid.h;
    let rule = gauss_rule(order);
    let mut triplets = Vec::with_capacity(grid.n_cells() * 64);
    for cell in 0..grid.n_cells() {
        let mut local = [[0.0; 8]; 8];
        for &(p, w) in &rule {
            let rows = rows_at(cell, p);
            for a in 0..8 {
                for b in 0..8 {
                    let v = rows[a][0] * rows[b][0] + rows[a][1] * rows[b][1] + rows[a][2] * rows[b][2];
                    local[a][b] += w * area * v;
                }
            }
        }
        let dofs = space.cell_dofs(cell);
        for a in 0..8 {
            for b in 0..8 {
                triplets.push((dofs[a], dofs[b], local[a][b]));
            }
        }
    }
    SparseSym::from_triplets(space.n_dofs(), triplets).expect("cell matrices are symmetric")
}

fn check_sizes(space: &MixedSpace, coeff: &CoefficientField) {
    assert_eq!(coeff.n_cells(), space.grid().n_cells(), "coefficient field does not match grid");
}

fn dinv(d: [f64; 2]) -> [f64; 2] {
    [1.0 / d[0], 1.0 / d[1]]
}

/// FOSLS matrix `(A(sigma, u), A(tau, v))` over all mixed DOFs.
pub fn assemble_fosls(space: &MixedSpace, coeff: &CoefficientField) -> SparseSym {
    assemble_fosls_with_order(space, coeff, QUADRATURE_ORDER)
}

pub fn assemble_fosls_with_order(space: &MixedSpace, coeff: &CoefficientField, order: usize) -> SparseSym {
    check_sizes(space, coeff);
    let h = space.grid().h;
    assemble_pairwise(space, order, |cell, p| {
        operator_rows(p, h, dinv(coeff.diffusion[cell]), coeff.convection, coeff.reaction[cell])
    })
}

/// Gram matrix of `(D^{-1} sigma, D^{-1} tau) + (u, v)`.
pub fn assemble_weighted_gram(space: &MixedSpace, coeff: &CoefficientField) -> SparseSym {
    check_sizes(space, coeff);
    assemble_pairwise(space, QUADRATURE_ORDER, |cell, p| value_rows(p, dinv(coeff.diffusion[cell])))
}

/// Gram matrix of `(sigma, tau) + (u, v)`.
pub fn assemble_mass(space: &MixedSpace) -> SparseSym {
    assemble_pairwise(space, QUADRATURE_ORDER, |_, p| value_rows(p, [1.0, 1.0]))
}

/// Load vector `((0, f), A(tau, v))` for a cellwise constant source `f`.
pub fn assemble_load(space: &MixedSpace, coeff: &CoefficientField, source: &[f64]) -> Vec<f64> {
    check_sizes(space, coeff);
    assert_eq!(source.len(), coeff.n_cells());
    let grid = space.grid();
    let area = grid.h * grid.h;
    let mut out = vec![0.0; space.n_dofs()];
    for cell in 0..grid.n_cells() {
        if source[cell] == 0.0 {
            continue;
        }
        let dofs = space.cell_dofs(cell);
        for &(p, w) in &gauss_rule(QUADRATURE_ORDER) {
            let rows = operator_rows(p, grid.h, dinv(coeff.diffusion[cell]), coeff.convection, coeff.reaction[cell]);
            for a in 0..8 {
                out[dofs[a]] += w * area * source[cell] * rows[a][2];
            }
        }
    }
    out
}

/// `sqrt(|f|^2 + |A f|^2)` from precomputed mass and FOSLS matrices.
pub fn graph_norm_with(fosls: &SparseSym, mass: &SparseSym, f: &MixedFunction) -> f64 {
    let v = f.to_flat();
    (mass.inner(&v, &v) + fosls.inner(&v, &v)).max(0.0).sqrt()
}

/// Graph norm of `f` on the domain of `space`.
pub fn graph_norm(space: &MixedSpace, coeff: &CoefficientField, f: &MixedFunction) -> Result<f64> {
    f.check(space)?;
    Ok(graph_norm_with(&assemble_fosls(space, coeff), &assemble_mass(space), f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Rect};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(h: f64) -> MixedSpace {
        MixedSpace::new(build_grid(Rect::unit_square(), h).unwrap())
    }

    fn parallel_channels() -> CoefficientSpec {
        CoefficientSpec::full_cdr(
            vec![Axis::Horizontal],
            vec![-2.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0],
            0.04,
            100.0,
        )
    }

    fn random_field(grid: &StructuredGrid, rng: &mut ChaCha8Rng) -> CoefficientField {
        CoefficientField {
            diffusion: (0..grid.n_cells()).map(|_| [0.1 + rng.random::<f64>(), 0.1 + rng.random::<f64>()]).collect(),
            convection: [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5],
            reaction: (0..grid.n_cells()).map(|_| rng.random::<f64>()).collect(),
        }
    }

    #[test]
    fn full_cdr_channel_coefficients() {
        let g = build_grid(Rect::new(-1.0, -1.0, 2.0, 2.0).unwrap(), 1.0 / 30.0).unwrap();
        let pd = sample_coefficients(&CoefficientSpec::pure_diffusion(), &g).unwrap();
        assert!(pd.diffusion.iter().all(|d| *d == [1.0, 1.0]));
        assert!(pd.reaction.iter().all(|&c| c == 0.0));
        assert_eq!(pd.convection, [0.0, 0.0]);

        let cdr = sample_coefficients(&parallel_channels(), &g).unwrap();
        assert_eq!(cdr.convection, [1.0, 1.0]);
        for cell in 0..g.n_cells() {
            let d = cdr.diffusion[cell][0];
            let c = cdr.reaction[cell];
            assert!((d == 100.0 && c == 0.0) || (d == 1.0 && c == 1.0));
        }
        // six bands, each two cells thick at h = 1/30, every band spans all 90 columns
        let channel_rows: Vec<usize> = (0..g.ny).filter(|&j| cdr.diffusion[g.cell_index(0, j)][0] == 100.0).collect();
        assert_eq!(channel_rows.len(), 12);
        for &j in &channel_rows {
            assert!((0..g.nx).all(|i| cdr.diffusion[g.cell_index(i, j)][0] == 100.0));
        }
    }

    #[test]
    fn channel_membership() {
        let spec = parallel_channels();
        let Profile::Channels(p) = &spec.diffusion else { unreachable!() };
        assert_eq!(p.value_at([0.5, 1.0 / 3.0]), 100.0);
        assert_eq!(p.value_at([0.5, 0.0]), 1.0);
        let lattice = ChannelPattern { axes: vec![Axis::Horizontal, Axis::Vertical], ..p.clone() };
        assert_eq!(lattice.value_at([1.0 / 3.0, 0.0]), 100.0);
    }

    #[test]
    fn channel_outside_domain_rejected() {
        let g = build_grid(Rect::unit_square(), 0.25).unwrap();
        let spec = CoefficientSpec::full_cdr(vec![Axis::Vertical], vec![1.5], 0.04, 100.0);
        assert!(matches!(sample_coefficients(&spec, &g), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn positivity_reports() {
        let g = build_grid(Rect::new(-1.0, -1.0, 2.0, 2.0).unwrap(), 1.0 / 30.0).unwrap();
        let cdr = sample_coefficients(&parallel_channels(), &g).unwrap();
        let r = check_friedrichs_positivity(&cdr).unwrap();
        assert!((r.flux_part - 2e-2).abs() < 1e-15);
        assert_eq!(r.scalar_part, 0.0);
        assert!(r.semi_definite && r.epsilon == 0.0);

        let pd = CoefficientField::constant(&g, 1.0, [0.0, 0.0], 0.0);
        let r = check_friedrichs_positivity(&pd).unwrap();
        assert_eq!((r.flux_part, r.scalar_part), (2.0, 0.0));
        assert!(r.semi_definite);

        let mut bad = pd.clone();
        bad.reaction[17] = -1.0;
        assert!(matches!(check_friedrichs_positivity(&bad), Err(Error::NegativeDefinite(_))));

        let strict = CoefficientField::constant(&g, 4.0, [1.0, 0.0], 1.0);
        let r = check_friedrichs_positivity(&strict).unwrap();
        assert!(!r.semi_definite && (r.epsilon - 0.25).abs() < 1e-15);
    }

    #[test]
    fn first_order_matrices_are_symmetric() {
        for a in first_order_matrices([0.7, -3.0]) {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(a[i][j], a[j][i]);
                }
            }
        }
    }

    #[test]
    fn coefficient_matrix_norms() {
        let g = build_grid(Rect::unit_square(), 0.5).unwrap();
        let norm = |b| max_coefficient_matrix_norm(&CoefficientField::constant(&g, 1.0, b, 0.0));
        assert_eq!(norm([0.0, 0.0]), 1.0);
        assert_eq!(norm([1.0, 1.0]), 2.0);
        assert_eq!(norm([3.0, 0.0]), 4.0);
    }

    #[test]
    fn fosls_kernel_contains_affine_solution() {
        let sp = unit(0.125);
        let coeff = CoefficientField::constant(sp.grid(), 1.0, [0.0, 0.0], 0.0);
        let k = assemble_fosls(&sp, &coeff);
        let f = sp.interpolate(|_| [-1.0, 0.0], |p| p[0]).to_flat();
        let r = k.mul_vec(&f);
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{:e}", r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        assert!(k.mul_vec(&vec![0.0; sp.n_dofs()]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fosls_symmetry_and_quadrature_exactness() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = unit(0.25);
        for _ in 0..3 {
            let coeff = random_field(sp.grid(), &mut rng);
            let k = assemble_fosls(&sp, &coeff);
            let kmax = k.max_abs();
            assert!(k.max_abs_diff(&k.transpose()) <= 1e-12 * kmax);
            let k3 = assemble_fosls_with_order(&sp, &coeff, 3);
            assert!(k.max_abs_diff(&k3) <= 1e-12 * kmax);
            let k4 = assemble_fosls_with_order(&sp, &coeff, 4);
            assert!(k.max_abs_diff(&k4) <= 1e-12 * kmax);
        }
    }

    #[test]
    fn weighted_gram_cases() {
        let sp = unit(0.25);
        let g = sp.grid();
        let d2 = CoefficientField::constant(g, 2.0, [0.0, 0.0], 0.0);
        let gw = assemble_weighted_gram(&sp, &d2);
        let f = sp.interpolate(|_| [2.0, 0.0], |_| 0.0).to_flat();
        assert!((gw.inner(&f, &f) - 1.0).abs() < 1e-13);

        let d1 = CoefficientField::constant(g, 1.0, [0.0, 0.0], 0.0);
        let gw1 = assemble_weighted_gram(&sp, &d1);
        let m2 = assemble_mass(&sp);
        assert!(gw1.max_abs_diff(&m2) <= 1e-12);

        let one = sp.interpolate(|_| [0.0, 0.0], |_| 1.0).to_flat();
        assert!((m2.inner(&one, &one) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn graph_norm_cases() {
        let sp = unit(0.125);
        let coeff = CoefficientField::constant(sp.grid(), 1.0, [0.0, 0.0], 0.0);
        let zero = MixedFunction::zeros(&sp);
        assert_eq!(graph_norm(&sp, &coeff, &zero).unwrap(), 0.0);
        // |A f| = 0 and |f|^2 = 1 + int x^2 = 4/3
        let f = sp.interpolate(|_| [-1.0, 0.0], |p| p[0]);
        let gn = graph_norm(&sp, &coeff, &f).unwrap();
        assert!((gn - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m2 = assemble_mass(&sp);
        for _ in 0..10 {
            let v: Vec<f64> = (0..sp.n_dofs()).map(|_| rng.random::<f64>() - 0.5).collect();
            let f = MixedFunction::from_flat(&sp, &v).unwrap();
            let gn = graph_norm(&sp, &coeff, &f).unwrap();
            assert!(gn * gn >= m2.inner(&v, &v) * (1.0 - 1e-14));
        }
    }

    #[test]
    fn load_vector_pairs_with_operator() {
        // (f, A v) for f = (0, 1) and v = (0, 1) with c = 1: int c * 1 = |Omega|
        let sp = unit(0.25);
        let coeff = CoefficientField::constant(sp.grid(), 1.0, [0.3, 0.1], 1.0);
        let load = assemble_load(&sp, &coeff, &vec![1.0; sp.grid().n_cells()]);
        let v = sp.interpolate(|_| [0.0, 0.0], |_| 1.0).to_flat();
        let pairing: f64 = load.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((pairing - 1.0).abs() < 1e-13);
    }
}
