use serde::{Deserialize, Serialize};

use super::geometry::{GeometryRecord, RveGeometry};
use crate::error::{Error, Result};

/// Side tags, combined as bit flags for corner nodes.
pub mod side {
    pub const LEFT: u8 = 1;
    pub const RIGHT: u8 = 2;
    pub const BOTTOM: u8 = 4;
    pub const TOP: u8 = 8;
    pub const ALL: u8 = LEFT | RIGHT | BOTTOM | TOP;
}

/// Layout of a structured rectangular grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub size: [f64; 2],
}

impl GridLayout {
    pub fn unit_square(n: usize) -> Self {
        GridLayout { nx: n, ny: n, origin: [0.0, 0.0], size: [1.0, 1.0] }
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    fn coord(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + self.size[0] * i as f64 / self.nx as f64,
            self.origin[1] + self.size[1] * j as f64 / self.ny as f64,
        ]
    }

    fn cell_diagonal_rising(i: usize, j: usize) -> bool {
        (i + j) % 2 == 0
    }
}

/// Structured triangulation with per-element material ids.
///
/// Each grid square is split along one diagonal; the diagonal direction
/// alternates in a checkerboard so that meshes with an even number of
/// subdivisions are symmetric under reflections about both mid-lines and the
/// diagonals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counter-clockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub material: Vec<u8>,
    /// Side flags per node; zero for interior nodes.
    pub boundary: Vec<u8>,
    pub layout: GridLayout,
}

/// Barycentric location of a point inside a mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointLocation {
    pub element: usize,
    pub weights: [f64; 3],
}

impl TriMesh {
    /// Structured mesh of a rectangle, all material 0.
    pub fn structured(layout: GridLayout) -> Self {
        let GridLayout { nx, ny, .. } = layout;
        assert!(nx >= 1 && ny >= 1, "grid needs at least one subdivision per side");
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut boundary = Vec::with_capacity(nodes.capacity());
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push(layout.coord(i, j));
                let mut flags = 0;
                if i == 0 {
                    flags |= side::LEFT;
                }
                if i == nx {
                    flags |= side::RIGHT;
                }
                if j == 0 {
                    flags |= side::BOTTOM;
                }
                if j == ny {
                    flags |= side::TOP;
                }
                boundary.push(flags);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let a = layout.node_index(i, j);
                let b = layout.node_index(i + 1, j);
                let c = layout.node_index(i + 1, j + 1);
                let d = layout.node_index(i, j + 1);
                if GridLayout::cell_diagonal_rising(i, j) {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                } else {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
            }
        }
        let material = vec![0; triangles.len()];
        TriMesh { nodes, triangles, material, boundary, layout }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, e: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[e];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    pub fn signed_area(&self, e: usize) -> f64 {
        let [p0, p1, p2] = self.vertices(e);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let [p0, p1, p2] = self.vertices(e);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.element_count()).map(|e| self.signed_area(e)).sum()
    }

    /// Area fraction of elements tagged with material 1.
    pub fn inclusion_fraction(&self) -> f64 {
        let inc: f64 = (0..self.element_count())
            .filter(|&e| self.material[e] == 1)
            .map(|e| self.signed_area(e))
            .sum();
        inc / self.total_area()
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary.iter().enumerate().filter(|(_, &f)| f != 0).map(|(i, _)| i)
    }

    /// Nodes carrying any of the given side flags.
    pub fn nodes_on(&self, sides: u8) -> Vec<usize> {
        self.boundary
            .iter()
            .enumerate()
            .filter(|(_, &f)| f & sides != 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Boundary edges `(n0, n1, side)` along the outer rectangle.
    pub fn boundary_edges(&self) -> Vec<(usize, usize, u8)> {
        let l = self.layout;
        let mut edges = Vec::new();
        for i in 0..l.nx {
            edges.push((l.node_index(i, 0), l.node_index(i + 1, 0), side::BOTTOM));
            edges.push((l.node_index(i, l.ny), l.node_index(i + 1, l.ny), side::TOP));
        }
        for j in 0..l.ny {
            edges.push((l.node_index(0, j), l.node_index(0, j + 1), side::LEFT));
            edges.push((l.node_index(l.nx, j), l.node_index(l.nx, j + 1), side::RIGHT));
        }
        edges
    }

    /// Finds the element containing `p` (points outside are clamped to the
    /// nearest grid square) and its barycentric weights.
    pub fn locate(&self, p: [f64; 2]) -> PointLocation {
        let l = self.layout;
        let fx = (p[0] - l.origin[0]) / l.size[0] * l.nx as f64;
        let fy = (p[1] - l.origin[1]) / l.size[1] * l.ny as f64;
        let i = (fx.floor().max(0.0) as usize).min(l.nx - 1);
        let j = (fy.floor().max(0.0) as usize).min(l.ny - 1);
        let (xi, eta) = (fx - i as f64, fy - j as f64);
        let square = j * l.nx + i;
        let local = if GridLayout::cell_diagonal_rising(i, j) {
            usize::from(eta > xi)
        } else {
            usize::from(xi + eta > 1.0)
        };
        let element = 2 * square + local;
        PointLocation { element, weights: self.barycentric(element, p) }
    }

    pub fn barycentric(&self, e: usize, p: [f64; 2]) -> [f64; 3] {
        let [p0, p1, p2] = self.vertices(e);
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let l1 = ((p[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p[1] - p0[1])) / det;
        let l2 = ((p1[0] - p0[0]) * (p[1] - p0[1]) - (p[0] - p0[0]) * (p1[1] - p0[1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Evaluates a P1 field with `components` values per node at `p`.
    pub fn interpolate(&self, values: &[f64], components: usize, p: [f64; 2], out: &mut [f64]) {
        let loc = self.locate(p);
        self.interpolate_at(&loc, values, components, out);
    }

    pub fn interpolate_at(&self, loc: &PointLocation, values: &[f64], components: usize, out: &mut [f64]) {
        let t = self.triangles[loc.element];
        for (c, o) in out.iter_mut().enumerate().take(components) {
            *o = (0..3).map(|a| loc.weights[a] * values[t[a] * components + c]).sum();
        }
    }
}

/// Unit-cell mesh with centroid-based material tagging.
pub fn build_mesh(geometry: &RveGeometry, n: usize) -> TriMesh {
    let mut mesh = TriMesh::structured(GridLayout::unit_square(n));
    for e in 0..mesh.element_count() {
        mesh.material[e] = geometry.material_at(mesh.centroid(e));
    }
    mesh
}

/// Meshes a parsed geometry record; 3D records are rejected.
pub fn build_mesh_from_record(record: &GeometryRecord, n: usize) -> Result<TriMesh> {
    match record {
        GeometryRecord::Planar(g) => Ok(build_mesh(g, n)),
        GeometryRecord::Spatial { .. } => Err(Error::Unsupported("meshing of 3D ellipsoid geometries".into())),
    }
}

/// Number of cells per side for cell size `eps` on the unit square.
pub fn cells_per_side(eps: f64) -> Result<usize> {
    let inv = 1.0 / eps;
    let r = inv.round();
    if !(eps > 0.0) || r < 1.0 || (inv - r).abs() > 1e-9 * inv.max(1.0) {
        return Err(Error::NonIntegerTiling { inverse: inv });
    }
    Ok(r as usize)
}

/// Which sample geometry occupies each cell of the tiled domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CellAssignment {
    /// The same sample in every cell.
    Periodic { sample: usize },
    /// Sample id per cell, row-major from the bottom-left cell.
    PerCell { samples: Vec<usize> },
}

impl CellAssignment {
    /// Cycles through `sample_count` samples over `cells` cells.
    pub fn round_robin(cells: usize, sample_count: usize) -> Self {
        CellAssignment::PerCell { samples: (0..cells).map(|c| c % sample_count).collect() }
    }

    pub fn sample_of(&self, cell: usize) -> usize {
        match self {
            CellAssignment::Periodic { sample } => *sample,
            CellAssignment::PerCell { samples } => samples[cell],
        }
    }

    pub fn max_sample(&self) -> usize {
        match self {
            CellAssignment::Periodic { sample } => *sample,
            CellAssignment::PerCell { samples } => samples.iter().copied().max().unwrap_or(0),
        }
    }
}

/// Maps a point of the unit-square domain to `(cell index, local y)`.
pub fn cell_coordinates(x: [f64; 2], eps: f64, cells: usize) -> (usize, [f64; 2]) {
    let mut idx = [0usize; 2];
    let mut y = [0.0; 2];
    for d in 0..2 {
        let s = x[d] / eps;
        let c = (s.floor().max(0.0) as usize).min(cells - 1);
        idx[d] = c;
        y[d] = (s - c as f64).clamp(0.0, 1.0);
    }
    (idx[1] * cells + idx[0], y)
}

/// Fine mesh of the unit square tiled by `1/eps` cells per side, each with
/// `n_per_cell` subdivisions and the material pattern of its sample.
pub fn tile_domain(
    geometries: &[RveGeometry],
    assignment: &CellAssignment,
    eps: f64,
    n_per_cell: usize,
) -> Result<TriMesh> {
    let cells = cells_per_side(eps)?;
    if assignment.max_sample() >= geometries.len() {
        return Err(Error::InvalidInput(format!(
            "cell assignment references sample {} but only {} geometries exist",
            assignment.max_sample(),
            geometries.len()
        )));
    }
    if let CellAssignment::PerCell { samples } = assignment {
        if samples.len() != cells * cells {
            return Err(Error::InvalidInput(format!(
                "assignment lists {} cells, tiling has {}",
                samples.len(),
                cells * cells
            )));
        }
    }
    let n = cells * n_per_cell;
    let mut mesh = TriMesh::structured(GridLayout::unit_square(n));
    for e in 0..mesh.element_count() {
        let (cell, y) = cell_coordinates(mesh.centroid(e), eps, cells);
        mesh.material[e] = geometries[assignment.sample_of(cell)].material_at(y);
    }
    Ok(mesh)
}
