//! Discrete spaces on a [`StructuredGrid`]: continuous bilinear (Q1) scalars,
//! lowest-order Raviart–Thomas (RT0) fluxes and the piecewise-linear trace space
//! on the outer boundary.
//!
//! Flux degrees of freedom are normal components with a fixed global
//! orientation: `+x` on vertical edges and `+y` on horizontal edges. On a cell
//! with local coordinates `(s, t)` in `[0, 1]^2` and edge values `q_l, q_r, q_b, q_t`
//! the flux is `((1 - s) q_l + s q_r, (1 - t) q_b + t q_t)`.

use crate::error::{Error, Result};
use crate::grid::{StructuredGrid, SubdomainPair};
use crate::linalg::SparseSym;

/// Q1 shape functions in the order SW, SE, NW, NE.
pub fn scalar_shape(local: [f64; 2]) -> [f64; 4] {
    let [s, t] = local;
    [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t]
}

/// Reference gradients of the Q1 shape functions.
pub fn scalar_shape_grad(local: [f64; 2]) -> [[f64; 2]; 4] {
    let [s, t] = local;
    [[-(1.0 - t), -(1.0 - s)], [1.0 - t, -s], [-t, 1.0 - s], [t, s]]
}

/// RT0 shape functions in the order left, right, bottom, top.
pub fn flux_shape(local: [f64; 2]) -> [[f64; 2]; 4] {
    let [s, t] = local;
    [[1.0 - s, 0.0], [s, 0.0], [0.0, 1.0 - t], [0.0, t]]
}

/// Reference divergences of the RT0 shape functions.
pub const FLUX_SHAPE_DIV: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpace {
    pub grid: StructuredGrid,
    /// Nodes on the outer boundary, counter-clockwise from the bottom-left corner.
    pub boundary_dofs: Vec<usize>,
}

impl ScalarSpace {
    pub fn new(grid: StructuredGrid) -> Self {
        Self { boundary_dofs: boundary_loop(&grid), grid }
    }

    pub fn n_dofs(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.n_dofs()).map(|n| f(self.grid.node_coords(n))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxSpace {
    pub grid: StructuredGrid,
}

impl FluxSpace {
    pub fn new(grid: StructuredGrid) -> Self {
        Self { grid }
    }

    pub fn n_dofs(&self) -> usize {
        self.grid.n_edges()
    }

    /// Normal component of `f` at every edge midpoint.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0; self.n_dofs()];
        for j in 0..=g.ny {
            for i in 0..g.nx {
                let p = [g.rect.x0 + (i as f64 + 0.5) * g.h, g.rect.y0 + j as f64 * g.h];
                out[g.horizontal_edge(i, j)] = f(p)[1];
            }
        }
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let p = [g.rect.x0 + i as f64 * g.h, g.rect.y0 + (j as f64 + 0.5) * g.h];
                out[g.vertical_edge(i, j)] = f(p)[0];
            }
        }
        out
    }
}

/// Continuous piecewise-linear functions on the closed boundary loop.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpace {
    pub grid: StructuredGrid,
    /// Grid node of each boundary DOF, counter-clockwise from the bottom-left corner.
    pub nodes: Vec<usize>,
}

impl BoundarySpace {
    pub fn new(grid: StructuredGrid) -> Self {
        Self { nodes: boundary_loop(&grid), grid }
    }

    pub fn n_dofs(&self) -> usize {
        self.nodes.len()
    }

    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&n| f(self.grid.node_coords(n))).collect()
    }

    /// L2 mass matrix of the hat functions along the loop.
    pub fn mass_matrix(&self) -> SparseSym {
        let n = self.n_dofs();
        let h = self.grid.h;
        let mut t = Vec::with_capacity(4 * n);
        for k in 0..n {
            let l = (k + 1) % n;
            t.push((k, k, h / 3.0));
            t.push((l, l, h / 3.0));
            t.push((k, l, h / 6.0));
            t.push((l, k, h / 6.0));
        }
        SparseSym::from_triplets(n, t).expect("loop mass matrix is symmetric")
    }
}

fn boundary_loop(g: &StructuredGrid) -> Vec<usize> {
    let mut nodes = Vec::with_capacity(2 * (g.nx + g.ny));
    nodes.extend((0..g.nx).map(|i| g.node_index(i, 0)));
    nodes.extend((0..g.ny).map(|j| g.node_index(g.nx, j)));
    nodes.extend((1..=g.nx).rev().map(|i| g.node_index(i, g.ny)));
    nodes.extend((1..=g.ny).rev().map(|j| g.node_index(0, j)));
    nodes
}

/// Flux and scalar spaces on one grid. Mixed coefficient vectors are laid out as
/// `[flux; scalar]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSpace {
    pub flux: FluxSpace,
    pub scalar: ScalarSpace,
}

impl MixedSpace {
    pub fn new(grid: StructuredGrid) -> Self {
        Self { flux: FluxSpace::new(grid), scalar: ScalarSpace::new(grid) }
    }

    pub fn grid(&self) -> &StructuredGrid {
        &self.scalar.grid
    }

    pub fn n_flux(&self) -> usize {
        self.flux.n_dofs()
    }

    pub fn n_scalar(&self) -> usize {
        self.scalar.n_dofs()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_flux() + self.n_scalar()
    }

    /// Global mixed DOFs of a cell: four edges (left, right, bottom, top) then four
    /// nodes (SW, SE, NW, NE).
    pub fn cell_dofs(&self, cell: usize) -> [usize; 8] {
        let g = self.grid();
        let e = g.cell_edges(cell);
        let n = g.cell_nodes(cell);
        let o = self.n_flux();
        [e[0], e[1], e[2], e[3], o + n[0], o + n[1], o + n[2], o + n[3]]
    }

    /// Interpolant of a pair `(sigma, u)`.
    pub fn interpolate(&self, sigma: impl Fn([f64; 2]) -> [f64; 2], u: impl Fn([f64; 2]) -> f64) -> MixedFunction {
        MixedFunction { flux: self.flux.interpolate(sigma), scalar: self.scalar.interpolate(u) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedFunction {
    pub flux: Vec<f64>,
    pub scalar: Vec<f64>,
}

impl MixedFunction {
    pub fn zeros(space: &MixedSpace) -> Self {
        Self { flux: vec![0.0; space.n_flux()], scalar: vec![0.0; space.n_scalar()] }
    }

    pub fn from_flat(space: &MixedSpace, v: &[f64]) -> Result<Self> {
        if v.len() != space.n_dofs() {
            return Err(Error::SpaceMismatch { expected: space.n_dofs(), got: v.len() });
        }
        let (f, s) = v.split_at(space.n_flux());
        Ok(Self { flux: f.to_vec(), scalar: s.to_vec() })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.flux.len() + self.scalar.len());
        v.extend_from_slice(&self.flux);
        v.extend_from_slice(&self.scalar);
        v
    }

    pub fn check(&self, space: &MixedSpace) -> Result<()> {
        if self.flux.len() != space.n_flux() {
            return Err(Error::SpaceMismatch { expected: space.n_flux(), got: self.flux.len() });
        }
        if self.scalar.len() != space.n_scalar() {
            return Err(Error::SpaceMismatch { expected: space.n_scalar(), got: self.scalar.len() });
        }
        Ok(())
    }
}

/// Value and physical gradient of a Q1 function.
pub fn eval_scalar(space: &ScalarSpace, cell: usize, local: [f64; 2], coeffs: &[f64]) -> (f64, [f64; 2]) {
    assert_eq!(coeffs.len(), space.n_dofs());
    assert!(cell < space.grid.n_cells());
    let nodes = space.grid.cell_nodes(cell);
    let phi = scalar_shape(local);
    let dphi = scalar_shape_grad(local);
    let inv_h = 1.0 / space.grid.h;
    let mut value = 0.0;
    let mut grad = [0.0; 2];
    for k in 0..4 {
        let c = coeffs[nodes[k]];
        value += c * phi[k];
        grad[0] += c * dphi[k][0] * inv_h;
        grad[1] += c * dphi[k][1] * inv_h;
    }
    (value, grad)
}

/// Value and divergence of an RT0 function.
pub fn eval_flux(space: &FluxSpace, cell: usize, local: [f64; 2], coeffs: &[f64]) -> ([f64; 2], f64) {
    assert_eq!(coeffs.len(), space.n_dofs());
    assert!(cell < space.grid.n_cells());
    let edges = space.grid.cell_edges(cell);
    let psi = flux_shape(local);
    let inv_h = 1.0 / space.grid.h;
    let mut value = [0.0; 2];
    let mut div = 0.0;
    for k in 0..4 {
        let c = coeffs[edges[k]];
        value[0] += c * psi[k][0];
        value[1] += c * psi[k][1];
        div += c * FLUX_SHAPE_DIV[k] * inv_h;
    }
    (value, div)
}

/// DOF gather from the oversampling spaces to the nested interior spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionMap {
    pub source: MixedSpace,
    pub target: MixedSpace,
    /// `flux[k]` is the source edge of target edge `k`.
    pub flux: Vec<usize>,
    /// `scalar[k]` is the source node of target node `k`.
    pub scalar: Vec<usize>,
}

impl RestrictionMap {
    pub fn new(pair: &SubdomainPair) -> Self {
        let src = pair.grid;
        let tgt = pair.interior_grid;
        let off = pair.offset();
        let mut scalar = vec![0; tgt.n_nodes()];
        for j in 0..=tgt.ny {
            for i in 0..=tgt.nx {
                scalar[tgt.node_index(i, j)] = src.node_index(i + off, j + off);
            }
        }
        let mut flux = vec![0; tgt.n_edges()];
        for j in 0..=tgt.ny {
            for i in 0..tgt.nx {
                flux[tgt.horizontal_edge(i, j)] = src.horizontal_edge(i + off, j + off);
            }
        }
        for j in 0..tgt.ny {
            for i in 0..=tgt.nx {
                flux[tgt.vertical_edge(i, j)] = src.vertical_edge(i + off, j + off);
            }
        }
        Self { source: MixedSpace::new(src), target: MixedSpace::new(tgt), flux, scalar }
    }

    /// Extension by zero from the interior to the oversampling domain.
    pub fn extend_by_zero(&self, f: &MixedFunction) -> Result<MixedFunction> {
        f.check(&self.target)?;
        let mut out = MixedFunction::zeros(&self.source);
        for (k, &s) in self.flux.iter().enumerate() {
            out.flux[s] = f.flux[k];
        }
        for (k, &s) in self.scalar.iter().enumerate() {
            out.scalar[s] = f.scalar[k];
        }
        Ok(out)
    }

    /// Mixed-DOF indices of the target within the flat source layout.
    pub fn flat_indices(&self) -> Vec<usize> {
        let o = self.source.n_flux();
        self.flux.iter().copied().chain(self.scalar.iter().map(|&s| s + o)).collect()
    }
}

/// Restriction of `f` to the interior domain. Exact, since the meshes are nested.
pub fn restrict(map: &RestrictionMap, f: &MixedFunction) -> Result<MixedFunction> {
    f.check(&map.source)?;
    Ok(MixedFunction {
        flux: map.flux.iter().map(|&s| f.flux[s]).collect(),
        scalar: map.scalar.iter().map(|&s| f.scalar[s]).collect(),
    })
}

/// Identifies boundary-space coefficients with the scalar DOFs on the boundary.
pub fn boundary_to_scalar(space: &BoundarySpace, g: &[f64]) -> Result<Vec<(usize, f64)>> {
    if g.len() != space.n_dofs() {
        return Err(Error::SpaceMismatch { expected: space.n_dofs(), got: g.len() });
    }
    Ok(space.nodes.iter().copied().zip(g.iter().copied()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_pair, Rect};
    use proptest::prelude::*;

    fn grid(x0: f64, y0: f64, x1: f64, y1: f64, h: f64) -> StructuredGrid {
        build_grid(Rect::new(x0, y0, x1, y1).unwrap(), h).unwrap()
    }

    #[test]
    fn constant_scalar() {
        let sp = ScalarSpace::new(grid(0.0, 0.0, 1.0, 1.0, 0.25));
        let c = vec![1.0; sp.n_dofs()];
        let (v, g) = eval_scalar(&sp, 5, [0.3, 0.8], &c);
        assert!((v - 1.0).abs() < 1e-15 && g[0].abs() < 1e-14 && g[1].abs() < 1e-14);
    }

    #[test]
    fn linear_scalar_gradient() {
        let sp = ScalarSpace::new(grid(-1.0, 0.0, 1.0, 1.0, 0.25));
        let c = sp.interpolate(|p| p[0]);
        let gauss = 0.5 - 0.5 / 3f64.sqrt();
        for cell in 0..sp.grid.n_cells() {
            for local in [[gauss, gauss], [1.0 - gauss, gauss], [gauss, 1.0 - gauss]] {
                let (_, g) = eval_scalar(&sp, cell, local, &c);
                assert!((g[0] - 1.0).abs() < 1e-13 && g[1].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn bilinear_gradient_at_center() {
        let h = 0.5;
        let sp = ScalarSpace::new(grid(0.0, 0.0, 1.0, 1.0, h));
        let c = sp.interpolate(|p| p[0] * p[1]);
        let (v, g) = eval_scalar(&sp, 0, [0.5, 0.5], &c);
        assert!((v - h * h / 4.0).abs() < 1e-15);
        assert!((g[0] - h / 2.0).abs() < 1e-15 && (g[1] - h / 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_flux_divergence_free() {
        let fs = FluxSpace::new(grid(0.0, 0.0, 1.0, 1.0, 0.5));
        let c = fs.interpolate(|_| [1.0, 0.0]);
        for cell in 0..4 {
            let (v, d) = eval_flux(&fs, cell, [0.2, 0.7], &c);
            assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15 && d.abs() < 1e-14);
        }
        let z = vec![0.0; fs.n_dofs()];
        assert_eq!(eval_flux(&fs, 2, [0.5, 0.5], &z), ([0.0, 0.0], 0.0));
    }

    #[test]
    fn linear_flux_divergence() {
        let h = 0.25;
        let fs = FluxSpace::new(grid(0.0, 0.0, 1.0, 1.0, h));
        let c = fs.interpolate(|p| [p[0] / h, 0.0]);
        let (v, d) = eval_flux(&fs, 0, [0.5, 0.5], &c);
        assert!((v[0] - 0.5).abs() < 1e-14);
        assert!((d - 1.0 / h).abs() < 1e-12);
    }

    #[test]
    fn shape_function_normal_components() {
        // normal of psi_k is 1 on its own edge, 0 on the others
        let psi_on = |local| flux_shape(local);
        let left = psi_on([0.0, 0.5]);
        let right = psi_on([1.0, 0.5]);
        let bottom = psi_on([0.5, 0.0]);
        let top = psi_on([0.5, 1.0]);
        for k in 0..4 {
            let e = |i: usize| if i == k { 1.0 } else { 0.0 };
            assert_eq!(left[k][0], e(0));
            assert_eq!(right[k][0], e(1));
            assert_eq!(bottom[k][1], e(2));
            assert_eq!(top[k][1], e(3));
        }
    }

    #[test]
    fn boundary_loop_order() {
        let g = grid(0.0, 0.0, 1.0, 0.5, 0.5);
        let b = BoundarySpace::new(g);
        assert_eq!(b.n_dofs(), 2 * (g.nx + g.ny));
        assert_eq!(b.nodes, vec![0, 1, 2, 5, 4, 3]);
        let mut sorted = b.nodes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), b.n_dofs());
        // mass of the constant function = perimeter
        let ones = vec![1.0; b.n_dofs()];
        assert!((b.mass_matrix().inner(&ones, &ones) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_to_scalar_cases() {
        let b = BoundarySpace::new(grid(0.0, 0.0, 1.0, 1.0, 0.25));
        let ones = vec![1.0; b.n_dofs()];
        let a = boundary_to_scalar(&b, &ones).unwrap();
        assert!(a.iter().all(|&(_, v)| v == 1.0));
        let mut e = vec![0.0; b.n_dofs()];
        e[5] = 1.0;
        let a = boundary_to_scalar(&b, &e).unwrap();
        assert_eq!(a.iter().filter(|(_, v)| *v != 0.0).count(), 1);
        let xs = b.interpolate(|p| p[0]);
        let sp = ScalarSpace::new(b.grid);
        let trace = sp.interpolate(|p| p[0]);
        for (node, v) in boundary_to_scalar(&b, &xs).unwrap() {
            assert_eq!(v, trace[node]);
        }
        assert!(matches!(boundary_to_scalar(&b, &[1.0]), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn restrict_linear_and_zero() {
        let pair = build_pair(Rect::unit_square(), 1.0, 1.0 / 6.0).unwrap();
        let map = RestrictionMap::new(&pair);
        let z = MixedFunction::zeros(&map.source);
        let r = restrict(&map, &z).unwrap();
        assert!(r.flux.iter().chain(&r.scalar).all(|&v| v == 0.0));
        let f = map.source.interpolate(|_| [0.0, 0.0], |p| p[0]);
        let r = restrict(&map, &f).unwrap();
        let expect = map.target.scalar.interpolate(|p| p[0]);
        assert!(r.scalar.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-13));
        assert!(matches!(restrict(&map, &r), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn extension_then_restriction_is_identity() {
        let pair = build_pair(Rect::new(0.0, 0.0, 1.0, 0.5).unwrap(), 0.25, 0.125).unwrap();
        let map = RestrictionMap::new(&pair);
        let n = map.target.n_dofs();
        let v: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin()).collect();
        let f = MixedFunction::from_flat(&map.target, &v).unwrap();
        let back = restrict(&map, &map.extend_by_zero(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    proptest! {
        #[test]
        fn affine_patch_test(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, s in 0.0..1.0f64, t in 0.0..1.0f64) {
            let sp = MixedSpace::new(grid(-1.0, -0.5, 1.0, 1.0, 0.25));
            let f = sp.interpolate(|_| [b, c], |p| a + b * p[0] + c * p[1]);
            for cell in [0, 7, 17, sp.grid().n_cells() - 1] {
                let p = sp.grid().map_to_physical(cell, [s, t]);
                let (v, g) = eval_scalar(&sp.scalar, cell, [s, t], &f.scalar);
                prop_assert!((v - (a + b * p[0] + c * p[1])).abs() < 1e-13);
                prop_assert!((g[0] - b).abs() < 1e-12 && (g[1] - c).abs() < 1e-12);
                let (fv, d) = eval_flux(&sp.flux, cell, [s, t], &f.flux);
                prop_assert!((fv[0] - b).abs() < 1e-13 && (fv[1] - c).abs() < 1e-13 && d.abs() < 1e-12);
            }
        }

        #[test]
        fn normal_continuity_and_flux_balance(seed in 0u64..1000, t in 0.0..1.0f64) {
            let g = grid(0.0, 0.0, 1.0, 0.75, 0.25);
            let fs = FluxSpace::new(g);
            let c: Vec<f64> = (0..fs.n_dofs()).map(|k| ((k as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
            for j in 0..g.ny {
                for i in 0..g.nx - 1 {
                    let (l, _) = eval_flux(&fs, g.cell_index(i, j), [1.0, t], &c);
                    let (r, _) = eval_flux(&fs, g.cell_index(i + 1, j), [0.0, t], &c);
                    prop_assert!((l[0] - r[0]).abs() < 1e-13);
                }
            }
            for j in 0..g.ny - 1 {
                for i in 0..g.nx {
                    let (b, _) = eval_flux(&fs, g.cell_index(i, j), [t, 1.0], &c);
                    let (a, _) = eval_flux(&fs, g.cell_index(i, j + 1), [t, 0.0], &c);
                    prop_assert!((a[1] - b[1]).abs() < 1e-13);
                }
            }
            for cell in 0..g.n_cells() {
                let e = g.cell_edges(cell);
                let balance = g.h * (c[e[1]] - c[e[0]] + c[e[3]] - c[e[2]]);
                let (_, d) = eval_flux(&fs, cell, [t, 0.5], &c);
                prop_assert!((d - balance / (g.h * g.h)).abs() < 1e-12);
            }
        }

        #[test]
        fn restriction_preserves_point_values(seed in 0u64..50) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pair = build_pair(Rect::unit_square(), 0.5, 0.125).unwrap();
            let map = RestrictionMap::new(&pair);
            let f = MixedFunction {
                flux: (0..map.source.n_flux()).map(|_| rng.random::<f64>() - 0.5).collect(),
                scalar: (0..map.source.n_scalar()).map(|_| rng.random::<f64>() - 0.5).collect(),
            };
            let r = restrict(&map, &f).unwrap();
            for _ in 0..100 {
                let p = [rng.random::<f64>(), rng.random::<f64>()];
                let (cs, ls) = pair.grid.locate(p).unwrap();
                let (ct, lt) = pair.interior_grid.locate(p).unwrap();
                let (a, ga) = eval_scalar(&map.source.scalar, cs, ls, &f.scalar);
                let (b, gb) = eval_scalar(&map.target.scalar, ct, lt, &r.scalar);
                prop_assert!((a - b).abs() < 1e-13);
                prop_assert!((ga[0] - gb[0]).abs() < 1e-12 && (ga[1] - gb[1]).abs() < 1e-12);
                let (fa, da) = eval_flux(&map.source.flux, cs, ls, &f.flux);
                let (fb, db) = eval_flux(&map.target.flux, ct, lt, &r.flux);
                prop_assert!((fa[0] - fb[0]).abs() < 1e-13 && (fa[1] - fb[1]).abs() < 1e-13);
                prop_assert!((da - db).abs() < 1e-12);
            }
        }
    }
}
