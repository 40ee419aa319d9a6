//! Structured quadrilateral meshes of axis-aligned rectangles.
//!
//! Enumeration is row-major with x running fastest:
//!
//! * node `(i, j)`, `0 <= i <= nx`, `0 <= j <= ny` has index `j * (nx + 1) + i`;
//! * cell `(i, j)`, `0 <= i < nx`, `0 <= j < ny` has index `j * nx + i`;
//! * horizontal edges `(i, j)` joining nodes `(i, j)` and `(i + 1, j)` come first,
//!   index `j * nx + i`;
//! * vertical edges `(i, j)` joining nodes `(i, j)` and `(i, j + 1)` follow,
//!   index `nx * (ny + 1) + j * (nx + 1) + i`.

use std::ops::Range;

use crate::error::{Error, Result};

const TILING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRect { x0, y0, x1, y1 });
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn unit_square() -> Self {
        Self { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn inflate(&self, margin: f64) -> Self {
        Self { x0: self.x0 - margin, y0: self.y0 - margin, x1: self.x1 + margin, y1: self.y1 + margin }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    /// Distance from `self` to the boundary of `outer`, assuming `self` lies inside `outer`.
    pub fn distance_to_boundary_of(&self, outer: &Rect) -> f64 {
        (self.x0 - outer.x0).min(self.y0 - outer.y0).min(outer.x1 - self.x1).min(outer.y1 - self.y1)
    }
}

/// Number of cells of width `h` in `extent`, if `h` tiles it.
fn cell_count(extent: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonConformingResolution { extent, h });
    }
    let ratio = extent / h;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > TILING_TOL * ratio {
        return Err(Error::NonConformingResolution { extent, h });
    }
    Ok(n as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredGrid {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

/// Mesh `rect` with square cells of side `h`.
pub fn build_grid(rect: Rect, h: f64) -> Result<StructuredGrid> {
    let nx = cell_count(rect.width(), h)?;
    let ny = cell_count(rect.height(), h)?;
    Ok(StructuredGrid { rect, nx, ny, h })
}

impl StructuredGrid {
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_horizontal_edges(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn n_vertical_edges(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn n_edges(&self) -> usize {
        self.n_horizontal_edges() + self.n_vertical_edges()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    pub fn horizontal_edge(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn vertical_edge(&self, i: usize, j: usize) -> usize {
        self.n_horizontal_edges() + j * (self.nx + 1) + i
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let i = node % (self.nx + 1);
        let j = node / (self.nx + 1);
        [self.rect.x0 + i as f64 * self.h, self.rect.y0 + j as f64 * self.h]
    }

    pub fn cell_origin(&self, cell: usize) -> [f64; 2] {
        let (i, j) = self.cell_ij(cell);
        [self.rect.x0 + i as f64 * self.h, self.rect.y0 + j as f64 * self.h]
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let o = self.cell_origin(cell);
        [o[0] + 0.5 * self.h, o[1] + 0.5 * self.h]
    }

    /// Physical point of local coordinates `(s, t)` in `[0, 1]^2`.
    pub fn map_to_physical(&self, cell: usize, local: [f64; 2]) -> [f64; 2] {
        let o = self.cell_origin(cell);
        [o[0] + local[0] * self.h, o[1] + local[1] * self.h]
    }

    /// Nodes of a cell in the order SW, SE, NW, NE.
    pub fn cell_nodes(&self, cell: usize) -> [usize; 4] {
        let (i, j) = self.cell_ij(cell);
        [self.node_index(i, j), self.node_index(i + 1, j), self.node_index(i, j + 1), self.node_index(i + 1, j + 1)]
    }

    /// Edges of a cell in the order left, right, bottom, top.
    pub fn cell_edges(&self, cell: usize) -> [usize; 4] {
        let (i, j) = self.cell_ij(cell);
        [
            self.vertical_edge(i, j),
            self.vertical_edge(i + 1, j),
            self.horizontal_edge(i, j),
            self.horizontal_edge(i, j + 1),
        ]
    }

    /// Cell containing `p` and the local coordinates of `p` in it.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        if !self.rect.contains(p) {
            return None;
        }
        let fx = (p[0] - self.rect.x0) / self.h;
        let fy = (p[1] - self.rect.y0) / self.h;
        let i = (fx.floor() as usize).min(self.nx - 1);
        let j = (fy.floor() as usize).min(self.ny - 1);
        Some((self.cell_index(i, j), [fx - i as f64, fy - j as f64]))
    }
}

/// Interior subdomain together with its oversampling domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainPair {
    pub interior: Rect,
    pub oversampling: Rect,
    pub delta: f64,
    /// Grid on the oversampling domain.
    pub grid: StructuredGrid,
    /// Grid on the interior domain, nested in `grid`.
    pub interior_grid: StructuredGrid,
    /// Cell index ranges (x, y) of the interior block within `grid`.
    pub interior_cell_range: (Range<usize>, Range<usize>),
}

pub fn build_pair(interior: Rect, delta: f64, h: f64) -> Result<SubdomainPair> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::NonPositiveMargin(delta));
    }
    let interior_grid = build_grid(interior, h)?;
    let offset = cell_count(delta, h)?;
    let oversampling = interior.inflate(delta);
    let grid =
        StructuredGrid { rect: oversampling, nx: interior_grid.nx + 2 * offset, ny: interior_grid.ny + 2 * offset, h };
    Ok(SubdomainPair {
        interior,
        oversampling,
        delta,
        grid,
        interior_grid,
        interior_cell_range: (offset..offset + interior_grid.nx, offset..offset + interior_grid.ny),
    })
}

impl SubdomainPair {
    /// Number of cells between the interior and the oversampling boundary.
    pub fn offset(&self) -> usize {
        self.interior_cell_range.0.start
    }

    /// Oversampling cell index of an interior cell.
    pub fn interior_to_oversampling_cell(&self, cell: usize) -> usize {
        let (i, j) = self.interior_grid.cell_ij(cell);
        self.grid.cell_index(i + self.offset(), j + self.offset())
    }

    pub fn interior_cells(&self) -> impl Iterator<Item = usize> + '_ {
        let (rx, ry) = self.interior_cell_range.clone();
        ry.flat_map(move |j| rx.clone().map(move |i| self.grid.cell_index(i, j)))
    }
}
