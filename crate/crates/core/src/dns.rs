//! Fine-mesh reference solution of the heterogeneous problem.

use crate::error::Result;
use crate::macro_solver::{
    run_transient_from, Checkpointing, ConstituentCoefficients, MacroProblem, MacroState, StepSettings, TransientRun,
};
use crate::material::Constituents;
use crate::microgen::{tile_domain, CellAssignment, RveGeometry, TriMesh};

/// A tiled heterogeneous domain with its constituents and loading.
#[derive(Clone, Debug)]
pub struct DnsProblem {
    pub mesh: TriMesh,
    pub coefficients: ConstituentCoefficients,
    pub settings: StepSettings,
}

impl DnsProblem {
    pub fn new(mesh: TriMesh, laws: Constituents, settings: StepSettings) -> Self {
        let coefficients = ConstituentCoefficients { laws, material: mesh.material.clone() };
        DnsProblem { mesh, coefficients, settings }
    }

    /// Tiles `1/eps` cells per side with `n_per_cell` subdivisions each.
    pub fn tiled(
        geometries: &[RveGeometry],
        assignment: &CellAssignment,
        eps: f64,
        n_per_cell: usize,
        laws: Constituents,
        settings: StepSettings,
    ) -> Result<Self> {
        Ok(Self::new(tile_domain(geometries, assignment, eps, n_per_cell)?, laws, settings))
    }

    pub fn as_problem(&self) -> MacroProblem<'_, ConstituentCoefficients> {
        MacroProblem { mesh: &self.mesh, coefficients: &self.coefficients, settings: &self.settings }
    }
}

/// Runs the reference simulation over the whole horizon.
pub fn solve_dns(problem: &DnsProblem) -> Result<TransientRun> {
    let start = MacroState::initial(&problem.mesh, problem.settings.reference_temperature);
    run_transient_from(problem.as_problem(), start, &Checkpointing::default())
}
