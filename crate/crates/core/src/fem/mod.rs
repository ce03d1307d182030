//! Linear triangular finite elements: assembly, constraints, SPD solvers and
//! gradient recovery.

mod assembly;
mod field;
mod solve;
mod sparse;

pub use assembly::{
    assemble_diffusion, assemble_elasticity, assemble_mass, edge_load, element_geometry, mesh_geometry,
    scalar_load, vector_load, ElementGeometry, MIN_ELEMENT_AREA,
};
pub use field::{element_gradients, element_means, integrate_with_field, recover_gradient, NodalField, Unit};
pub use solve::{
    pcg, solve_spd, solve_system, BandCholesky, CgStats, PreparedSolver, SolverKind, SolverOptions,
    AUTO_DIRECT_LIMIT, DEFAULT_MAX_ITER, DEFAULT_REL_TOL,
};
pub use sparse::{apply_dirichlet, constrain_matrix, zero_entries, CsrMatrix, SparseSystem};

/// Interleaved dof indices for the given nodes.
pub fn node_dofs(nodes: &[usize], components: usize) -> Vec<usize> {
    nodes.iter().flat_map(|&a| (0..components).map(move |c| a * components + c)).collect()
}
