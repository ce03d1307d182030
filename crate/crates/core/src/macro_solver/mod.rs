//! Implicit-Euler stepping of the coupled heat and quasi-static elasticity
//! equations, shared by the homogenized solver and the fine-scale reference.

mod bc;
mod coefficients;

pub use bc::{side_index, BoundaryData, MechanicalBc, ThermalBc, TimeFn, SIDES};
pub use coefficients::{CoeffInterpolator, CoefficientProvider, ConstituentCoefficients};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_diffusion, assemble_elasticity, assemble_mass, edge_load, element_means,
    scalar_load, vector_load, PreparedSolver, SolverOptions, SparseSystem,
};
use crate::microgen::TriMesh;
use crate::table::Table;
use crate::tensor::{Mat2, Tensor4};

pub const DEFAULT_PICARD_TOL: f64 = 1e-8;
pub const DEFAULT_PICARD_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardOptions {
    /// Stopping threshold on the max-norm change between iterates (K).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: DEFAULT_PICARD_TOL, max_iter: DEFAULT_PICARD_MAX_ITER }
    }
}

/// Loads, boundary data and time stepping of a transient run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSettings {
    pub boundary: BoundaryData,
    /// Volumetric heat source.
    pub source: TimeFn,
    pub body_force: [TimeFn; 2],
    /// Initial and stress-free temperature (K).
    pub reference_temperature: f64,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub picard: PicardOptions,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_lumped")]
    pub lumped_mass: bool,
}

fn default_lumped() -> bool {
    true
}

impl StepSettings {
    pub fn step_count(&self) -> usize {
        (self.horizon / self.dt).round().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step {} must be positive", self.dt)));
        }
        if !(self.horizon >= self.dt) {
            return Err(Error::InvalidInput(format!("horizon {} shorter than the time step {}", self.horizon, self.dt)));
        }
        if !self.boundary.has_displacement_side() {
            return Err(Error::InvalidInput("no side has a prescribed displacement".into()));
        }
        if !(self.picard.tol > 0.0 && self.picard.max_iter > 0) {
            return Err(Error::InvalidInput("Picard tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// A transient problem on a mesh with its coefficient source.
pub struct MacroProblem<'a, P: CoefficientProvider> {
    pub mesh: &'a TriMesh,
    pub coefficients: &'a P,
    pub settings: &'a StepSettings,
}

impl<'a, P: CoefficientProvider> Clone for MacroProblem<'a, P> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<'a, P: CoefficientProvider> Copy for MacroProblem<'a, P> {}

/// Nodal temperature and displacement after `step` steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub step: usize,
    pub time: f64,
    pub temperature: Vec<f64>,
    /// Interleaved `(u1, u2)` per node.
    pub displacement: Vec<f64>,
    pub picard_iterations: usize,
}

impl MacroState {
    pub fn initial(mesh: &TriMesh, reference_temperature: f64) -> Self {
        MacroState {
            step: 0,
            time: 0.0,
            temperature: vec![reference_temperature; mesh.node_count()],
            displacement: vec![0.0; 2 * mesh.node_count()],
            picard_iterations: 0,
        }
    }

    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec(self).expect("state serialises"))?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn read_checkpoint(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        serde_json::from_slice(&bytes)
            .map_err(|e| Error::Parse { context: path.display().to_string(), message: e.to_string() })
    }
}

fn centroid_temperatures(mesh: &TriMesh, t: &[f64]) -> Vec<f64> {
    element_means(mesh, t, 1)
}

/// One linear implicit-Euler solve with coefficients frozen at `frozen`.
pub fn thermal_linear_solve<P: CoefficientProvider>(
    problem: MacroProblem<'_, P>,
    previous: &[f64],
    frozen: &[f64],
    time: f64,
) -> Result<Vec<f64>> {
    let MacroProblem { mesh, coefficients, settings } = problem;
    let te = centroid_temperatures(mesh, frozen);
    let (cap, k): (Vec<f64>, Vec<Mat2>) = te.iter().enumerate().map(|(e, &t)| coefficients.thermal(e, t)).unzip();
    let mass = assemble_mass(mesh, &cap, settings.lumped_mass)?;
    let mut a = assemble_diffusion(mesh, &k)?;
    a.add_scaled(1.0 / settings.dt, &mass);

    let mut rhs = mass.mul_vec(previous);
    rhs.iter_mut().for_each(|r| *r /= settings.dt);
    let h = settings.source.eval(time);
    if h != 0.0 {
        let src = vec![h; mesh.element_count()];
        add_into(&mut rhs, &scalar_load(mesh, Some(&src), None)?);
    }
    let bc = &settings.boundary;
    let flux_edges: Vec<_> = mesh
        .boundary_edges()
        .into_iter()
        .filter(|&(_, _, s)| matches!(bc.thermal[side_index(s)], ThermalBc::Flux { .. }))
        .collect();
    if !flux_edges.is_empty() {
        let load = edge_load(mesh, &flux_edges, 1, |_, s, out| {
            if let ThermalBc::Flux { value } = bc.thermal[side_index(s)] {
                out[0] = value.eval(time);
            }
        });
        add_into(&mut rhs, &load);
    }

    let (dofs, values): (Vec<usize>, Vec<f64>) = mesh
        .boundary_nodes()
        .filter_map(|n| bc.node_temperature(mesh.boundary[n], time).map(|v| (n, v)))
        .unzip();
    let mut system = SparseSystem::new(a, rhs);
    apply_dirichlet(&mut system, &dofs, &values);
    PreparedSolver::new(system.matrix, &settings.solver)?.solve_from(&system.rhs, Some(frozen))
}

fn add_into(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Picard iteration for the temperature at `time = previous time + dt`.
/// Returns the converged temperature and the number of linear solves.
pub fn step_thermal<P: CoefficientProvider>(
    problem: MacroProblem<'_, P>,
    state: &MacroState,
) -> Result<(Vec<f64>, usize)> {
    let opts = problem.settings.picard;
    let time = state.time + problem.settings.dt;
    let mut iterate = state.temperature.clone();
    let mut change = f64::INFINITY;
    for lambda in 1..=opts.max_iter {
        let next = thermal_linear_solve(problem, &state.temperature, &iterate, time)?;
        change = max_change(&next, &iterate);
        if !change.is_finite() {
            break;
        }
        if change <= opts.tol {
            return Ok((next, lambda));
        }
        iterate = next;
        if lambda == opts.max_iter {
            let prev = thermal_linear_solve(problem, &state.temperature, &iterate, time)?;
            return Err(Error::PicardNoConvergence {
                step: state.step + 1,
                max_iter: opts.max_iter,
                last_change: change,
                iterates: Box::new([iterate, prev]),
            });
        }
    }
    Err(Error::PicardNoConvergence {
        step: state.step + 1,
        max_iter: opts.max_iter,
        last_change: change,
        iterates: Box::new([state.temperature.clone(), iterate]),
    })
}

/// Load of the mechanical step: `∫ f·v + ∫ beta (T - T_ref) : ∇v` plus
/// tractions, and the element stiffness tensors.
pub fn mechanical_load<P: CoefficientProvider>(
    problem: MacroProblem<'_, P>,
    temperature: &[f64],
    time: f64,
) -> (Vec<Tensor4>, Vec<f64>) {
    let MacroProblem { mesh, coefficients, settings } = problem;
    let te = centroid_temperatures(mesh, temperature);
    let mut stiffness = Vec::with_capacity(te.len());
    let mut thermal = Vec::with_capacity(te.len());
    for (e, &t) in te.iter().enumerate() {
        let (c, beta) = coefficients.mechanical(e, t);
        stiffness.push(c);
        let theta = t - settings.reference_temperature;
        thermal.push([[beta[0][0] * theta, beta[0][1] * theta], [beta[1][0] * theta, beta[1][1] * theta]]);
    }
    let f = [settings.body_force[0].eval(time), settings.body_force[1].eval(time)];
    let body = vec![f; mesh.element_count()];
    let mut rhs = vector_load(mesh, Some(&body), Some(&thermal)).expect("elements validated by assembly");
    let bc = &settings.boundary;
    let edges: Vec<_> = mesh
        .boundary_edges()
        .into_iter()
        .filter(|&(_, _, s)| matches!(bc.mechanical[side_index(s)], MechanicalBc::Traction { .. }))
        .collect();
    if !edges.is_empty() {
        let load = edge_load(mesh, &edges, 2, |_, s, out| {
            if let MechanicalBc::Traction { value } = bc.mechanical[side_index(s)] {
                out[0] = value[0].eval(time);
                out[1] = value[1].eval(time);
            }
        });
        add_into(&mut rhs, &load);
    }
    (stiffness, rhs)
}

/// Displacement at `time` for the given temperature.
pub fn step_mechanical<P: CoefficientProvider>(
    problem: MacroProblem<'_, P>,
    temperature: &[f64],
    time: f64,
) -> Result<Vec<f64>> {
    let mesh = problem.mesh;
    let (stiffness, rhs) = mechanical_load(problem, temperature, time);
    let a = assemble_elasticity(mesh, &stiffness)?;
    let bc = &problem.settings.boundary;
    let mut dofs = Vec::new();
    let mut values = Vec::new();
    for n in mesh.boundary_nodes() {
        if let Some(u) = bc.node_displacement(mesh.boundary[n], time) {
            dofs.extend([2 * n, 2 * n + 1]);
            values.extend(u);
        }
    }
    let mut system = SparseSystem::new(a, rhs);
    apply_dirichlet(&mut system, &dofs, &values);
    PreparedSolver::new(system.matrix, &problem.settings.solver)?.solve(&system.rhs)
}

/// Advances one step: thermal Picard solve, then the mechanical solve.
pub fn advance<P: CoefficientProvider>(problem: MacroProblem<'_, P>, state: &MacroState) -> Result<MacroState> {
    let time = state.time + problem.settings.dt;
    let (temperature, picard_iterations) = step_thermal(problem, state)?;
    let displacement = step_mechanical(problem, &temperature, time)?;
    Ok(MacroState { step: state.step + 1, time, temperature, displacement, picard_iterations })
}

/// Per-step summary of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    pub time: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_mean: f64,
    pub picard_iterations: usize,
}

impl StepLog {
    pub fn of(state: &MacroState) -> Self {
        let t = &state.temperature;
        StepLog {
            step: state.step,
            time: state.time,
            t_min: t.iter().copied().fold(f64::INFINITY, f64::min),
            t_max: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            t_mean: t.iter().sum::<f64>() / t.len() as f64,
            picard_iterations: state.picard_iterations,
        }
    }
}

/// Per-step CSV: `t, T_min, T_max, T_mean, picard`.
pub fn step_table(log: &[StepLog]) -> Table {
    let mut table = Table::new(["t", "T_min", "T_max", "T_mean", "picard"].map(String::from).to_vec());
    for l in log {
        table.push(vec![l.time, l.t_min, l.t_max, l.t_mean, l.picard_iterations as f64]);
    }
    table
}

/// Checkpointing of a transient run.
#[derive(Clone, Debug, Default)]
pub struct Checkpointing {
    pub path: Option<PathBuf>,
    /// Write every `every` steps (0 writes only on failure).
    pub every: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransientRun {
    /// States from the starting state through the final step.
    pub states: Vec<MacroState>,
    pub log: Vec<StepLog>,
}

/// Runs from `start` until the horizon. On a Picard failure the last
/// converged state is checkpointed (when a path is configured) before the
/// error is returned.
pub fn run_transient_from<P: CoefficientProvider>(
    problem: MacroProblem<'_, P>,
    start: MacroState,
    checkpoint: &Checkpointing,
) -> Result<TransientRun> {
    problem.settings.validate()?;
    let steps = problem.settings.step_count();
    let mut run = TransientRun { log: vec![StepLog::of(&start)], states: vec![start] };
    while run.states.last().expect("nonempty").step < steps {
        let current = run.states.last().expect("nonempty");
        let next = match advance(problem, current) {
            Ok(s) => s,
            Err(e) => {
                if let Some(path) = &checkpoint.path {
                    current.write_checkpoint(path)?;
                    log::error!("step {} failed; state checkpointed to {}", current.step + 1, path.display());
                }
                return Err(e);
            }
        };
        log::debug!("step {} t={:.4} picard={}", next.step, next.time, next.picard_iterations);
        if let (Some(path), true) = (&checkpoint.path, checkpoint.every > 0 && next.step % checkpoint.every.max(1) == 0) {
            next.write_checkpoint(path)?;
        }
        run.log.push(StepLog::of(&next));
        run.states.push(next);
    }
    Ok(run)
}

pub fn run_transient<P: CoefficientProvider>(problem: MacroProblem<'_, P>) -> Result<TransientRun> {
    let start = MacroState::initial(problem.mesh, problem.settings.reference_temperature);
    run_transient_from(problem, start, &Checkpointing::default())
}
