//! Pipeline stages, their on-disk outputs and skip bookkeeping.
//!
//! Every stage writes `<stage>/stage.json` holding a key hashed from the
//! config sections it depends on and from its upstream keys. A stage whose
//! record carries the current key and whose listed outputs all exist is
//! skipped unless forced.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use thermoscale::cell::{build_cell_tables, sha256_hex, solves_per_temperature, CellCache, CellOrder, SampleTables};
use thermoscale::dns::DnsProblem;
use thermoscale::effective::{bounds_table, EffectiveTable};
use thermoscale::fem::{NodalField, Unit};
use thermoscale::macro_solver::{
    run_transient_from, step_table, Checkpointing, CoeffInterpolator, MacroProblem, MacroState, TransientRun,
};
use thermoscale::microgen::{
    build_mesh, parse_geometry, sample_geometry, tile_domain, GeometryRecord, GridLayout, RveGeometry, TriMesh,
};
use thermoscale::reconstruct::{derived_fields, expand, FineField, MacroSnapshot, ReconstructionRequest};
use thermoscale::report::{emit_series, error_norms, write_mesh_vtk, write_vtk, ErrorRow, ErrorSeries, FieldErrors};
use thermoscale::table::Table;

use crate::config::{Layout, LoadedConfig, RunConfig};
use crate::error::{CliError, CliResult};

/// Off-line solve count of the reference implementation (60 temperatures).
pub const REFERENCE_SOLVES: usize = 4380;
/// Evaluation-mesh resolution per cell when no DNS is configured.
pub const DEFAULT_EVAL_PER_CELL: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Generate,
    Cells,
    Effective,
    Macro,
    Dns,
    Reconstruct,
    Errors,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Generate, Stage::Cells, Stage::Effective, Stage::Macro, Stage::Dns, Stage::Reconstruct, Stage::Errors];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Cells => "cells",
            Stage::Effective => "effective",
            Stage::Macro => "macro",
            Stage::Dns => "dns",
            Stage::Reconstruct => "reconstruct",
            Stage::Errors => "errors",
        }
    }

    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Generate => &[],
            Stage::Cells => &[Stage::Generate],
            Stage::Effective => &[Stage::Cells],
            Stage::Macro => &[Stage::Effective],
            Stage::Dns => &[Stage::Generate],
            Stage::Reconstruct => &[Stage::Macro, Stage::Cells],
            Stage::Errors => &[Stage::Reconstruct, Stage::Dns],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Contents of `<stage>/stage.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub key: String,
    /// Output files relative to the run directory.
    pub outputs: Vec<String>,
    pub details: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageStatus {
    Ran,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: Stage,
    pub status: StageStatus,
    pub seconds: f64,
    /// Wall time of the most recent execution, kept across skips.
    #[serde(default)]
    pub last_run_seconds: f64,
    /// Linear cell solves performed (cells stage only).
    #[serde(default)]
    pub solves: usize,
}

/// Off-line solve bookkeeping compared against the reference count.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveCounts {
    pub samples: usize,
    pub grid_points: usize,
    pub per_temperature: usize,
    pub per_sample: usize,
    pub total: usize,
    pub performed_last_run: usize,
    pub reference_total: usize,
    pub ratio_to_reference: f64,
}

/// `run_manifest.json` at the run root.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub seed: u64,
    pub stages: BTreeMap<Stage, StageOutcome>,
    pub solves: SolveCounts,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub force: bool,
    pub seed_override: Option<u64>,
    /// Run directory; defaults to the config's `output_dir`.
    pub output_dir: Option<PathBuf>,
}

pub struct Pipeline {
    config: RunConfig,
    out: PathBuf,
    force: bool,
    manifest: RunManifest,
}

fn rel(stage: Stage, file: &str) -> String {
    format!("{}/{file}", stage.name())
}

fn step_file(step: usize, ext: &str) -> String {
    format!("step_{step:05}.{ext}")
}

/// Steps compared against the reference: every `every` steps, plus the last.
pub fn snapshot_steps(total: usize, every: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (every..=total).step_by(every.max(1)).collect();
    if total > 0 && s.last() != Some(&total) {
        s.push(total);
    }
    s
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    }
    let text = serde_json::to_string_pretty(value).expect("serialisable");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path.display().to_string(), e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Core(thermoscale::Error::Parse { context: path.display().to_string(), message: e.to_string() })
    })
}

/// Nodal fields as CSV: `x1, x2, T, u1, u2`.
pub fn field_table(mesh: &TriMesh, field: &FineField) -> Table {
    let mut t = Table::new(["x1", "x2", "T", "u1", "u2"]);
    for (i, p) in mesh.nodes.iter().enumerate() {
        let u = field.displacement.at(i);
        t.push(vec![p[0], p[1], field.temperature.values[i], u[0], u[1]]);
    }
    t
}

/// Inverse of [`field_table`].
pub fn parse_field(table: &Table) -> CliResult<FineField> {
    let col = |name: &str| {
        table.column(name).ok_or_else(|| {
            CliError::Core(thermoscale::Error::Parse { context: "field csv".into(), message: format!("no column {name}") })
        })
    };
    let (u1, u2) = (col("u1")?, col("u2")?);
    Ok(FineField {
        temperature: NodalField::new(col("T")?, 1, Unit::Kelvin),
        displacement: NodalField::new(u1.iter().zip(&u2).flat_map(|(a, b)| [*a, *b]).collect(), 2, Unit::Length),
    })
}

fn state_field(state: &MacroState) -> FineField {
    FineField {
        temperature: NodalField::new(state.temperature.clone(), 1, Unit::Kelvin),
        displacement: NodalField::new(state.displacement.clone(), 2, Unit::Length),
    }
}

impl Pipeline {
    pub fn new(loaded: &LoadedConfig, options: &RunOptions) -> CliResult<Self> {
        let mut config = loaded.config.clone();
        if let Some(seed) = options.seed_override {
            config.microstructure.seed = seed;
        }
        config.validate()?;
        let out = options.output_dir.clone().unwrap_or_else(|| loaded.output_dir());
        let manifest_path = out.join("run_manifest.json");
        let mut manifest: RunManifest =
            if manifest_path.exists() { read_json(&manifest_path).unwrap_or_default() } else { RunManifest::default() };
        manifest.name = config.run.name.clone();
        manifest.config_hash = sha256_hex(serde_json::to_string(&config).expect("config serialises").as_bytes());
        manifest.seed = config.microstructure.seed;
        manifest.versions = BTreeMap::from([
            ("thermoscale".to_string(), thermoscale::VERSION.to_string()),
            ("thermoscale-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]);
        let grid_points = config.temperature_grid.points;
        let samples = config.microstructure.samples;
        let per_temperature = solves_per_temperature(&config.cell_options());
        let total = samples * grid_points * per_temperature;
        manifest.solves = SolveCounts {
            samples,
            grid_points,
            per_temperature,
            per_sample: grid_points * per_temperature,
            total,
            performed_last_run: manifest.solves.performed_last_run,
            reference_total: REFERENCE_SOLVES,
            ratio_to_reference: (grid_points * per_temperature) as f64 / REFERENCE_SOLVES as f64,
        };
        Ok(Pipeline { config, out, force: options.force, manifest })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    pub fn record_path(&self, stage: Stage) -> PathBuf {
        self.out.join(stage.name()).join("stage.json")
    }

    /// Stages enabled by the config, in dependency order.
    pub fn enabled_stages(&self) -> Vec<Stage> {
        Stage::ALL.into_iter().filter(|s| self.enabled(*s)).collect()
    }

    fn enabled(&self, stage: Stage) -> bool {
        match stage {
            Stage::Generate | Stage::Cells | Stage::Effective => true,
            Stage::Macro | Stage::Reconstruct => self.config.macro_.is_some(),
            Stage::Dns | Stage::Errors => self.config.dns.is_some(),
        }
    }

    /// Key of a stage: its config inputs and the keys of its upstream stages.
    pub fn stage_key(&self, stage: Stage) -> String {
        let c = &self.config;
        let inputs = match stage {
            Stage::Generate => json!({ "microstructure": c.microstructure, "n": c.cell.n }),
            Stage::Cells => json!({
                "materials": c.materials, "cell": c.cell, "grid": c.temperature_grid,
                "solver": [c.solver.kind, c.solver.cg_tol, c.solver.cg_max_iter],
            }),
            Stage::Effective => json!(null),
            Stage::Macro => json!({ "macro": c.macro_, "solver": c.solver }),
            Stage::Dns => json!({ "materials": c.materials, "macro": c.macro_, "dns": c.dns, "solver": c.solver, "output": c.output }),
            Stage::Reconstruct => json!({ "dns": c.dns, "output": c.output }),
            Stage::Errors => json!(null),
        };
        let upstream: Vec<String> = stage.requires().iter().map(|s| self.stage_key(*s)).collect();
        let payload = json!({ "stage": stage, "version": thermoscale::VERSION, "inputs": inputs, "upstream": upstream });
        sha256_hex(payload.to_string().as_bytes())
    }

    pub fn read_record(&self, stage: Stage) -> Option<StageRecord> {
        read_json(&self.record_path(stage)).ok()
    }

    fn is_current(&self, stage: Stage) -> bool {
        self.read_record(stage).is_some_and(|r| {
            r.key == self.stage_key(stage) && r.outputs.iter().all(|o| self.out.join(o).exists())
        })
    }

    /// Runs every enabled stage in dependency order.
    pub fn run_all(&mut self) -> CliResult<Vec<StageOutcome>> {
        let mut outcomes = Vec::new();
        for stage in self.enabled_stages() {
            outcomes.push(self.run(stage)?);
        }
        Ok(outcomes)
    }

    /// Runs one stage; its upstream stages must be current.
    pub fn run(&mut self, stage: Stage) -> CliResult<StageOutcome> {
        if !self.enabled(stage) {
            let section = if matches!(stage, Stage::Dns | Stage::Errors) { "dns" } else { "macro" };
            return Err(CliError::config(section, format!("section required by stage `{stage}`")));
        }
        for &up in stage.requires() {
            if !self.is_current(up) {
                return Err(CliError::StageInputMissing { stage: stage.name(), requires: up.name(), manifest: self.record_path(up) });
            }
        }
        let start = Instant::now();
        let outcome = if !self.force && self.is_current(stage) {
            log::info!("{stage}: up to date");
            let last = self.manifest.stages.get(&stage).map_or(0.0, |o| o.last_run_seconds);
            StageOutcome { stage, status: StageStatus::Skipped, seconds: 0.0, last_run_seconds: last, solves: 0 }
        } else {
            log::info!("{stage}: running");
            let (outputs, details, solves) = self.execute(stage)?;
            let record = StageRecord { stage, key: self.stage_key(stage), outputs, details };
            write_json(&self.record_path(stage), &record)?;
            let seconds = start.elapsed().as_secs_f64();
            StageOutcome { stage, status: StageStatus::Ran, seconds, last_run_seconds: seconds, solves }
        };
        if stage == Stage::Cells {
            self.manifest.solves.performed_last_run = outcome.solves;
        }
        self.manifest.stages.insert(stage, outcome.clone());
        write_json(&self.out.join("run_manifest.json"), &self.manifest)?;
        Ok(outcome)
    }

    fn execute(&self, stage: Stage) -> CliResult<(Vec<String>, Value, usize)> {
        match stage {
            Stage::Generate => self.generate(),
            Stage::Cells => self.cells(),
            Stage::Effective => self.effective(),
            Stage::Macro => self.macro_run(),
            Stage::Dns => self.dns(),
            Stage::Reconstruct => self.reconstruct(),
            Stage::Errors => self.errors(),
        }
    }

    fn geometry_file(s: usize) -> String {
        rel(Stage::Generate, &format!("sample_{s:04}.txt"))
    }

    fn generate(&self) -> CliResult<(Vec<String>, Value, usize)> {
        let m = &self.config.microstructure;
        let mut outputs = Vec::new();
        let mut samples = Vec::new();
        for s in 0..m.samples {
            let seed = m.seed + s as u64;
            let geometry = match (&m.inclusions, &m.generator) {
                (Some(incs), _) if m.layout == Layout::Periodic => RveGeometry::new(incs.clone(), seed),
                (_, Some(spec)) => sample_geometry(spec, m.seed, s)?,
                _ => return Err(CliError::config("microstructure.generator", "random layout needs a generator")),
            };
            let file = Self::geometry_file(s);
            let path = self.out.join(&file);
            std::fs::create_dir_all(path.parent().expect("has parent")).map_err(|e| CliError::io(&file, e))?;
            std::fs::write(&path, geometry.to_text()).map_err(|e| CliError::io(&file, e))?;
            let mesh_file = rel(Stage::Generate, &format!("mesh_{s:04}.vtk"));
            let mesh = build_mesh(&geometry, self.config.cell.n);
            write_mesh_vtk(&self.out.join(&mesh_file), &mesh)?;
            samples.push(json!({
                "seed": seed,
                "inclusions": geometry.inclusions.len(),
                "achieved_fraction": geometry.achieved_fraction,
                "mesh_fraction": mesh.inclusion_fraction(),
            }));
            outputs.extend([file, mesh_file]);
        }
        Ok((outputs, json!({ "samples": samples }), 0))
    }

    /// Sample geometries as written by the generate stage.
    pub fn geometries(&self) -> CliResult<Vec<RveGeometry>> {
        (0..self.config.microstructure.samples)
            .map(|s| {
                let path = self.out.join(Self::geometry_file(s));
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(path.display().to_string(), e))?;
                match parse_geometry(&text)? {
                    GeometryRecord::Planar(g) => Ok(g),
                    GeometryRecord::Spatial { .. } => {
                        Err(CliError::Core(thermoscale::Error::Unsupported("3D geometry records".into())))
                    }
                }
            })
            .collect()
    }

    fn cache(&self) -> CellCache {
        CellCache::new(self.out.join(Stage::Cells.name()))
    }

    /// Cell tables of every sample, loaded from the cache when intact.
    pub fn cell_tables(&self, force: bool) -> CliResult<(Vec<SampleTables>, usize)> {
        let c = &self.config;
        let tables = build_cell_tables(
            &self.geometries()?,
            c.cell.n,
            &c.constituents()?,
            &c.grid(),
            &c.cell_options(),
            Some(&self.cache()),
            force,
        )?;
        Ok((tables.samples, tables.solves))
    }

    fn cells(&self) -> CliResult<(Vec<String>, Value, usize)> {
        let (tables, solves) = self.cell_tables(self.force)?;
        let per_temperature = solves_per_temperature(&self.config.cell_options());
        let details = json!({
            "solves": solves,
            "solves_per_temperature": per_temperature,
            "samples": tables.iter().map(|t| t.seed).collect::<Vec<_>>(),
            "grid": self.config.grid(),
        });
        Ok((vec![rel(Stage::Cells, "manifest.json")], details, solves))
    }

    fn effective(&self) -> CliResult<(Vec<String>, Value, usize)> {
        let (tables, solves) = self.cell_tables(false)?;
        if solves > 0 {
            log::warn!("effective: {solves} cell solves repeated (cache incomplete)");
        }
        let per_sample: Vec<_> = tables.iter().map(|t| t.effective.clone()).collect();
        let table = EffectiveTable::from_samples(self.config.grid(), &per_sample)?;
        // bounds refer to the tagged mesh actually solved
        let fraction = tables.iter().map(|t| t.mesh.inclusion_fraction()).sum::<f64>() / tables.len() as f64;
        let files = ["effective.csv", "bounds.csv", "table.json"].map(|f| rel(Stage::Effective, f));
        table.to_table().write(&self.out.join(&files[0]))?;
        bounds_table(&table, &self.config.constituents()?, fraction).write(&self.out.join(&files[1]))?;
        write_json(&self.out.join(&files[2]), &table)?;
        Ok((files.to_vec(), json!({ "fraction": fraction, "samples": table.sample_count }), 0))
    }

    fn snapshots(&self) -> Vec<usize> {
        let settings = self.config.step_settings().expect("macro section");
        snapshot_steps(settings.step_count(), self.config.output.snapshot_every)
    }

    fn macro_mesh(&self) -> TriMesh {
        TriMesh::structured(GridLayout::unit_square(self.config.macro_.as_ref().expect("macro section").n))
    }

    fn macro_state_file(step: usize) -> String {
        rel(Stage::Macro, &format!("states/{}", step_file(step, "json")))
    }

    fn macro_run(&self) -> CliResult<(Vec<String>, Value, usize)> {
        let table: EffectiveTable = read_json(&self.out.join(rel(Stage::Effective, "table.json")))?;
        let settings = self.config.step_settings().expect("macro section");
        let mesh = self.macro_mesh();
        let interp = CoeffInterpolator::new(table);
        let problem = MacroProblem { mesh: &mesh, coefficients: &interp, settings: &settings };
        let run = self.transient(problem, Stage::Macro)?;
        let mut outputs = vec![rel(Stage::Macro, "steps.csv")];
        step_table(&run.log).write(&self.out.join(&outputs[0]))?;
        let mut keep: Vec<usize> = self.snapshots().iter().flat_map(|&s| [s - 1, s]).collect();
        keep.dedup();
        for s in keep {
            let file = Self::macro_state_file(s);
            run.states[s].write_checkpoint(&self.out.join(&file))?;
            outputs.push(file);
        }
        let picard: Vec<usize> = run.log.iter().skip(1).map(|l| l.picard_iterations).collect();
        Ok((outputs, json!({ "picard_iterations": picard, "clamped": interp.clamped() }), 0))
    }

    fn transient<P: thermoscale::macro_solver::CoefficientProvider>(
        &self,
        problem: MacroProblem<'_, P>,
        stage: Stage,
    ) -> CliResult<TransientRun> {
        let checkpoint = Checkpointing { path: Some(self.out.join(rel(stage, "checkpoint.json"))), every: 0 };
        let start = MacroState::initial(problem.mesh, problem.settings.reference_temperature);
        Ok(run_transient_from(problem, start, &checkpoint)?)
    }

    fn eval_per_cell(&self) -> usize {
        self.config.dns.map_or(DEFAULT_EVAL_PER_CELL, |d| d.n_per_cell)
    }

    /// The fine tiled mesh shared by the DNS and the reconstructions.
    pub fn fine_mesh(&self) -> CliResult<TriMesh> {
        let eps = self.config.macro_.as_ref().expect("macro section").eps;
        let assignment = self.config.assignment().expect("macro section");
        Ok(tile_domain(&self.geometries()?, &assignment, eps, self.eval_per_cell())?)
    }

    fn dns_field_file(step: usize) -> String {
        rel(Stage::Dns, &format!("fields/{}", step_file(step, "csv")))
    }

    fn dns(&self) -> CliResult<(Vec<String>, Value, usize)> {
        let c = &self.config;
        let settings = c.step_settings().expect("macro section");
        let problem = DnsProblem::new(self.fine_mesh()?, c.constituents()?, settings);
        let run = self.transient(problem.as_problem(), Stage::Dns)?;
        let mut outputs = vec![rel(Stage::Dns, "steps.csv")];
        step_table(&run.log).write(&self.out.join(&outputs[0]))?;
        for s in self.snapshots() {
            let file = Self::dns_field_file(s);
            field_table(&problem.mesh, &state_field(&run.states[s])).write(&self.out.join(&file))?;
            outputs.push(file);
        }
        let laws = c.constituents()?;
        for &s in c.output.vtk_steps.iter().filter(|&&s| s < run.states.len()) {
            let field = state_field(&run.states[s]);
            let derived = derived_fields(&problem.mesh, &field, &laws, problem.settings.reference_temperature)?;
            let file = rel(Stage::Dns, &format!("vtk/{}", step_file(s, "vtk")));
            write_vtk(&self.out.join(&file), &problem.mesh, &field, Some(&derived))?;
            outputs.push(file);
        }
        let m = &c.microstructure;
        let details = json!({
            "seeds": (0..m.samples).map(|s| m.seed + s as u64).collect::<Vec<_>>(),
            "nodes": problem.mesh.node_count(),
            "elements": problem.mesh.element_count(),
            "picard_iterations": run.log.iter().skip(1).map(|l| l.picard_iterations).collect::<Vec<_>>(),
        });
        Ok((outputs, details, 0))
    }

    /// Highest reconstruction order the cell tables support.
    pub fn max_order(&self) -> usize {
        match self.config.cell.order {
            CellOrder::First => 1,
            CellOrder::Second => 2,
        }
    }

    fn reconstruct_file(order: usize, step: usize) -> String {
        rel(Stage::Reconstruct, &format!("order{order}/{}", step_file(step, "csv")))
    }

    fn reconstruct(&self) -> CliResult<(Vec<String>, Value, usize)> {
        let c = &self.config;
        let mc = c.macro_.as_ref().expect("macro section");
        let (tables, _) = self.cell_tables(false)?;
        let macro_mesh = self.macro_mesh();
        let fine = self.fine_mesh()?;
        let laws = c.constituents()?;
        let request = ReconstructionRequest {
            order: self.max_order(),
            eps: mc.eps,
            assignment: c.assignment().expect("macro section"),
            reference_temperature: mc.reference_temperature,
        };
        let mut outputs = Vec::new();
        for s in self.snapshots() {
            let state = MacroState::read_checkpoint(&self.out.join(Self::macro_state_file(s)))?;
            let previous = MacroState::read_checkpoint(&self.out.join(Self::macro_state_file(s - 1)))?;
            let snapshot = MacroSnapshot { mesh: &macro_mesh, state: &state, previous: Some(&previous), dt: mc.dt };
            let expansion = expand(&request, &snapshot, &tables, &fine)?;
            for k in 0..=request.order {
                let field = expansion.field(k);
                let file = Self::reconstruct_file(k, s);
                field_table(&fine, &field).write(&self.out.join(&file))?;
                outputs.push(file);
                if c.output.vtk_steps.contains(&s) {
                    let derived = derived_fields(&fine, &field, &laws, mc.reference_temperature)?;
                    let vtk = rel(Stage::Reconstruct, &format!("vtk/order{k}_{}", step_file(s, "vtk")));
                    write_vtk(&self.out.join(&vtk), &fine, &field, Some(&derived))?;
                    outputs.push(vtk);
                }
            }
        }
        Ok((outputs, json!({ "orders": request.order + 1, "snapshots": self.snapshots() }), 0))
    }

    fn errors(&self) -> CliResult<(Vec<String>, Value, usize)> {
        let mesh = self.fine_mesh()?;
        let dt = self.config.macro_.as_ref().expect("macro section").dt;
        let mut series = ErrorSeries::default();
        for s in self.snapshots() {
            let reference = parse_field(&Table::read(&self.out.join(Self::dns_field_file(s)))?)?;
            let mut orders = [FieldErrors::default(); 3];
            for (k, o) in orders.iter_mut().enumerate() {
                *o = if k <= self.max_order() {
                    let field = parse_field(&Table::read(&self.out.join(Self::reconstruct_file(k, s)))?)?;
                    error_norms(&mesh, &field, &reference)?
                } else {
                    nan_errors()
                };
            }
            series.rows.push(ErrorRow { step: s, time: s as f64 * dt, orders });
        }
        let file = rel(Stage::Errors, "errors.csv");
        emit_series(&series).write(&self.out.join(&file))?;
        Ok((vec![file], json!({ "rows": series.rows.len() }), 0))
    }
}

fn nan_errors() -> FieldErrors {
    let r = thermoscale::report::RelativeErrors { l2: f64::NAN, h1_semi: f64::NAN, h1: f64::NAN };
    FieldErrors { temperature: r, displacement: r }
}
