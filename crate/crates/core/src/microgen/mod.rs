//! Random unit-cell microstructures and structured, material-tagged meshes.

mod geometry;
mod mesh;

pub use geometry::{
    overlap_test, parse_geometry, rng_for_seed, sample_inclusions, AngleDistribution, EllipsoidParams,
    GeometryRecord, InclusionParams, InclusionSpec, OverlapMode, RveGeometry, SURFACE_SAMPLES,
};
pub use mesh::{
    build_mesh, build_mesh_from_record, cell_coordinates, cells_per_side, side, tile_domain, CellAssignment,
    GridLayout, PointLocation, TriMesh,
};

/// Geometry of sample `index` drawn from `spec` with seed `seed_base + index`.
pub fn sample_geometry(spec: &InclusionSpec, seed_base: u64, index: usize) -> crate::Result<RveGeometry> {
    sample_inclusions(spec, seed_base + index as u64)
}
