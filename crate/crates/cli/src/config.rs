use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use thermoscale::cell::{CellOptions, CellOrder, TemperatureGrid, XDerivativeMode};
use thermoscale::fem::{SolverKind, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_REL_TOL};
use thermoscale::macro_solver::{BoundaryData, PicardOptions, StepSettings, TimeFn, DEFAULT_PICARD_MAX_ITER, DEFAULT_PICARD_TOL};
use thermoscale::material::{presets, Constituents, MaterialLaw};
use thermoscale::microgen::{cells_per_side, CellAssignment, InclusionParams, InclusionSpec};

use crate::error::CliError;

/// A full pipeline description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub microstructure: Microstructure,
    pub materials: Materials,
    #[serde(default)]
    pub cell: CellSection,
    #[serde(default)]
    pub temperature_grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    /// On-line stages run only when this section is present.
    #[serde(default, rename = "macro")]
    pub macro_: Option<MacroSection>,
    #[serde(default)]
    pub dns: Option<DnsSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    /// Output directory, relative to the config file.
    pub output_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// One sample repeated in every cell.
    Periodic,
    /// Independent samples assigned round-robin to the cells.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Microstructure {
    pub layout: Layout,
    /// Number of random samples `M`.
    #[serde(default = "one")]
    pub samples: usize,
    /// Seed of sample 0; sample `s` uses `seed + s`.
    #[serde(default)]
    pub seed: u64,
    /// Fixed inclusions (used instead of `generator` when given).
    #[serde(default)]
    pub inclusions: Option<Vec<InclusionParams>>,
    #[serde(default)]
    pub generator: Option<InclusionSpec>,
}

fn one() -> usize {
    1
}

/// A preset name or a full law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Preset(String),
    Law(MaterialLaw),
}

pub const PRESETS: [&str; 6] = ["sic", "carbon", "ti64", "zro2", "sic-property", "carbon-property"];

impl MaterialSpec {
    pub fn resolve(&self, path: &str) -> Result<MaterialLaw, CliError> {
        match self {
            MaterialSpec::Law(l) => Ok(l.clone()),
            MaterialSpec::Preset(name) => match name.as_str() {
                "sic" => Ok(presets::sic_matrix()),
                "carbon" => Ok(presets::carbon_inclusion()),
                "ti64" => Ok(presets::ti64_matrix()),
                "zro2" => Ok(presets::zro2_inclusion()),
                "sic-property" => Ok(presets::sic_c_property_pair().0),
                "carbon-property" => Ok(presets::sic_c_property_pair().1),
                other => Err(CliError::config(path, format!("unknown preset {other:?} (known: {})", PRESETS.join(", ")))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Materials {
    pub matrix: MaterialSpec,
    pub inclusion: MaterialSpec,
    /// Length unit in metres in which the simulation works (0.01 = cm).
    #[serde(default = "unit_length")]
    pub length_unit: f64,
}

fn unit_length() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    /// Subdivisions per side of the cell mesh.
    pub n: usize,
    pub order: CellOrder,
    pub x_derivatives: XDerivativeMode,
}

impl Default for CellSection {
    fn default() -> Self {
        CellSection { n: 32, order: CellOrder::Second, x_derivatives: XDerivativeMode::ChainRule }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { min: 273.15, max: 873.15, points: 60 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub kind: SolverKind,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub lumped_mass: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            kind: SolverKind::Auto,
            cg_tol: DEFAULT_REL_TOL,
            cg_max_iter: DEFAULT_MAX_ITER,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
            lumped_mass: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroSection {
    /// Subdivisions per side of the macro mesh.
    pub n: usize,
    pub eps: f64,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "default_reference")]
    pub reference_temperature: f64,
    #[serde(default)]
    pub source: TimeFn,
    #[serde(default)]
    pub body_force: [TimeFn; 2],
    pub boundary: BoundaryData,
}

fn default_reference() -> f64 {
    273.15
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DnsSection {
    /// Subdivisions per cell side of the fine mesh.
    pub n_per_cell: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Reconstruct and compare every this many steps.
    pub snapshot_every: usize,
    /// Steps whose fields are also written as VTK.
    pub vtk_steps: Vec<usize>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { snapshot_every: 5, vtk_steps: Vec::new() }
    }
}

/// A config with its file location.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub path: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(&path.display().to_string(), format!("cannot read: {e}")))?;
        let config = RunConfig::parse(&text)?;
        Ok(LoadedConfig { config, path: path.to_path_buf() })
    }

    pub fn output_dir(&self) -> PathBuf {
        let base = self.path.parent().unwrap_or(Path::new("."));
        base.join(&self.config.run.output_dir)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let at = e.span().map(|s| line_of(text, s.start)).map_or(String::new(), |l| format!(" (line {l})"));
            CliError::config("config", format!("{msg}{at}"))
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Semantic checks with the dotted path of the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.microstructure;
        if m.samples == 0 {
            return Err(CliError::config("microstructure.samples", "must be at least 1"));
        }
        if m.inclusions.is_none() && m.generator.is_none() {
            return Err(CliError::config("microstructure", "needs `inclusions` or `generator`"));
        }
        if m.layout == Layout::Periodic && m.samples != 1 {
            return Err(CliError::config("microstructure.samples", "periodic layout uses exactly one sample"));
        }
        if let Some(incs) = &m.inclusions {
            if m.layout == Layout::Random && m.generator.is_none() {
                return Err(CliError::config("microstructure.generator", "random layout needs a generator"));
            }
            for (i, inc) in incs.iter().enumerate() {
                if !(inc.semi_axes[0] >= inc.semi_axes[1] && inc.semi_axes[1] > 0.0) || !inc.inside_unit_square() {
                    return Err(CliError::config(&format!("microstructure.inclusions[{i}]"), "needs a >= b > 0 inside the unit square"));
                }
            }
        }
        let laws = self.constituents()?;
        if !(self.materials.length_unit > 0.0) {
            return Err(CliError::config("materials.length_unit", "must be positive"));
        }
        if self.cell.n < 2 {
            return Err(CliError::config("cell.n", "must be at least 2"));
        }
        let g = &self.temperature_grid;
        let min_points = if self.cell.order == CellOrder::Second { 3 } else { 1 };
        if !(g.max > g.min) || g.points < min_points.max(2) {
            return Err(CliError::config("temperature_grid", format!("needs max > min and at least {} points", min_points.max(2))));
        }
        laws.validate(g.min, g.max).map_err(|e| CliError::config("materials", e.to_string()))?;
        let s = &self.solver;
        if !(s.cg_tol > 0.0 && s.picard_tol > 0.0 && s.cg_max_iter > 0 && s.picard_max_iter > 0) {
            return Err(CliError::config("solver", "tolerances and iteration caps must be positive"));
        }
        if let Some(mc) = &self.macro_ {
            if mc.n < 1 {
                return Err(CliError::config("macro.n", "must be at least 1"));
            }
            let cells = cells_per_side(mc.eps).map_err(|e| CliError::config("macro.eps", e.to_string()))?;
            if m.layout == Layout::Random && m.samples > cells * cells {
                log::warn!("{} samples for {} cells; only the first {} are placed", m.samples, cells * cells, cells * cells);
            }
            if !(mc.dt > 0.0) {
                return Err(CliError::config("macro.dt", "must be positive"));
            }
            if !(mc.horizon >= mc.dt) {
                return Err(CliError::config("macro.horizon", "must be at least one time step"));
            }
            if !(g.min..=g.max).contains(&mc.reference_temperature) {
                return Err(CliError::config("macro.reference_temperature", "must lie inside the temperature grid"));
            }
            if !mc.boundary.has_displacement_side() {
                return Err(CliError::config("macro.boundary.mechanical", "at least one side needs a displacement"));
            }
        }
        if let Some(d) = &self.dns {
            if self.macro_.is_none() {
                return Err(CliError::config("dns", "requires a [macro] section"));
            }
            if d.n_per_cell < 2 {
                return Err(CliError::config("dns.n_per_cell", "must be at least 2"));
            }
        }
        if self.output.snapshot_every == 0 {
            return Err(CliError::config("output.snapshot_every", "must be at least 1"));
        }
        Ok(())
    }

    pub fn constituents(&self) -> Result<Constituents, CliError> {
        let m = self.materials.matrix.resolve("materials.matrix")?;
        let i = self.materials.inclusion.resolve("materials.inclusion")?;
        Ok(Constituents::new(m, i).in_length_unit(self.materials.length_unit))
    }

    pub fn grid(&self) -> TemperatureGrid {
        let g = &self.temperature_grid;
        TemperatureGrid::uniform(g.min, g.max, g.points).expect("validated grid")
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { kind: self.solver.kind, rel_tol: self.solver.cg_tol, max_iter: self.solver.cg_max_iter }
    }

    pub fn cell_options(&self) -> CellOptions {
        CellOptions { order: self.cell.order, x_derivatives: self.cell.x_derivatives, solver: self.solver_options() }
    }

    pub fn step_settings(&self) -> Option<StepSettings> {
        let mc = self.macro_.as_ref()?;
        Some(StepSettings {
            boundary: mc.boundary,
            source: mc.source,
            body_force: mc.body_force,
            reference_temperature: mc.reference_temperature,
            dt: mc.dt,
            horizon: mc.horizon,
            picard: PicardOptions { tol: self.solver.picard_tol, max_iter: self.solver.picard_max_iter },
            solver: self.solver_options(),
            lumped_mass: self.solver.lumped_mass,
        })
    }

    /// Cell-to-sample map of the tiled domain.
    pub fn assignment(&self) -> Option<CellAssignment> {
        let cells = cells_per_side(self.macro_.as_ref()?.eps).ok()?;
        Some(match self.microstructure.layout {
            Layout::Periodic => CellAssignment::Periodic { sample: 0 },
            Layout::Random => CellAssignment::round_robin(cells * cells, self.microstructure.samples),
        })
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
