//! Shared fixtures for the benchmarks.

use thermoscale::fem::{apply_dirichlet, assemble_diffusion, assemble_mass, SparseSystem};
use thermoscale::material::{presets, Constituents};
use thermoscale::microgen::{build_mesh, InclusionParams, RveGeometry, TriMesh};
use thermoscale::tensor::IDENTITY2;

/// SiC matrix with carbon inclusions, lengths in cm.
pub fn example_laws() -> Constituents {
    Constituents::new(presets::sic_matrix(), presets::carbon_inclusion()).in_length_unit(0.01)
}

/// Unit cell mesh with one centred circular inclusion of radius 0.3.
pub fn circle_cell(n: usize) -> TriMesh {
    build_mesh(&RveGeometry::new(vec![InclusionParams::circle([0.5, 0.5], 0.3)], 0), n)
}

/// Poisson problem `-Δu = 1` with zero boundary values.
pub fn poisson_system(mesh: &TriMesh) -> SparseSystem {
    let elements = mesh.element_count();
    let a = assemble_diffusion(mesh, &vec![IDENTITY2; elements]).expect("assembly");
    let m = assemble_mass(mesh, &vec![1.0; elements], false).expect("assembly");
    let mut sys = SparseSystem::new(a, m.mul_vec(&vec![1.0; mesh.node_count()]));
    let fixed: Vec<usize> = mesh.boundary_nodes().collect();
    apply_dirichlet(&mut sys, &fixed, &vec![0.0; fixed.len()]);
    sys
}
