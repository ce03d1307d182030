//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thermoscale::cell::{
    build_cell_tables, solve_first_order, solve_sample, CellFn, CellOptions, CellOrder, TemperatureGrid,
};
use thermoscale::effective::{bounds_table, effective_at, EffectiveSample, EffectiveTable};
use thermoscale::fem::{
    apply_dirichlet, assemble_diffusion, assemble_mass, integrate_with_field, recover_gradient, solve_spd, NodalField,
    SolverOptions, SparseSystem, Unit,
};
use thermoscale::macro_solver::{
    run_transient, thermal_linear_solve, BoundaryData, CoeffInterpolator, MacroProblem, PicardOptions, StepSettings,
    TimeFn,
};
use thermoscale::material::{presets, Constituents};
use thermoscale::microgen::{
    build_mesh, sample_geometry, tile_domain, CellAssignment, GridLayout, InclusionParams, InclusionSpec, RveGeometry,
    TriMesh,
};
use thermoscale::reconstruct::{expand, MacroSnapshot, ReconstructionRequest};
use thermoscale::report::parse_series;
use thermoscale::table::Table;
use thermoscale::tensor::IDENTITY2;
use thermoscale_cli::{LoadedConfig, Pipeline, RunOptions};

const TERR_MARGIN: f64 = 0.7;
const HS_SHARE: f64 = 0.95;
const DEGENERACY_TOL: f64 = 1e-8;
const HOMOGENEOUS_EFFECTIVE_TOL: f64 = 1e-10;
const HOMOGENEOUS_FIELD_TOL: f64 = 1e-9;
const LAYERED_TOL: f64 = 0.05;
const FEM_RATE: (f64, f64) = (2.0, 0.2);
const MC_SLOPE: (f64, f64) = (-0.5, 0.15);
const PICARD_MAX: usize = 10;
const PICARD_TOL: f64 = 1e-8;

type Check<'a> = Box<dyn FnOnce() -> Result<Verdict, String> + 'a>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn example_laws() -> Constituents {
    Constituents::new(presets::sic_matrix(), presets::carbon_inclusion()).in_length_unit(0.01)
}

fn centered_circle() -> RveGeometry {
    RveGeometry::new(vec![InclusionParams::circle([0.5, 0.5], 0.3)], 0)
}

fn example_settings(dt: f64, horizon: f64) -> StepSettings {
    StepSettings {
        boundary: BoundaryData::uniform(373.15),
        source: TimeFn::Constant(5000.0),
        body_force: [TimeFn::Constant(-2000.0); 2],
        reference_temperature: 273.15,
        dt,
        horizon,
        picard: PicardOptions { tol: PICARD_TOL, max_iter: 50 },
        solver: SolverOptions::default(),
        lumped_mass: true,
    }
}

fn run_example1(out: &Path) -> Result<(), String> {
    let loaded = LoadedConfig::load(&config_path("example1_periodic.toml")).map_err(|e| e.to_string())?;
    let options = RunOptions { output_dir: Some(out.to_path_buf()), ..Default::default() };
    let mut pipeline = Pipeline::new(&loaded, &options).map_err(|e| e.to_string())?;
    pipeline.run_all().map_err(|e| e.to_string())?;
    Ok(())
}

fn error_ordering(run: &Path) -> Result<Verdict, String> {
    let table = Table::read(&run.join("errors/errors.csv")).map_err(|e| e.to_string())?;
    let series = parse_series(&table).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for row in series.rows.iter().filter(|r| r.step > 5) {
        checked += 1;
        let t: Vec<f64> = row.orders.iter().map(|o| o.temperature.h1_semi).collect();
        let u: Vec<f64> = row.orders.iter().map(|o| o.displacement.h1_semi).collect();
        let ok = t[2] < t[1] && t[1] < t[0] && u[2] < u[1] && u[1] <= u[0] && t[2] <= TERR_MARGIN * t[1];
        if !ok {
            failures.push(format!("step {}: TErr {t:.4?} UErr {u:.4?}", row.step));
        }
    }
    let last = series.rows.last().ok_or("empty error series")?;
    let detail = format!(
        "{checked} snapshots; final TErr0/1/2 = {:.4}/{:.4}/{:.4}, UErr0/1/2 = {:.4}/{:.4}/{:.4}{}",
        last.orders[0].temperature.h1_semi,
        last.orders[1].temperature.h1_semi,
        last.orders[2].temperature.h1_semi,
        last.orders[0].displacement.h1_semi,
        last.orders[1].displacement.h1_semi,
        last.orders[2].displacement.h1_semi,
        if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
    );
    Ok(verdict(checked > 0 && failures.is_empty(), detail))
}

fn bound_containment() -> Result<Verdict, String> {
    let grid = TemperatureGrid::uniform(273.15, 873.15, 12).map_err(|e| e.to_string())?;
    let options = CellOptions { order: CellOrder::First, ..Default::default() };
    let (m1, m2) = presets::sic_c_property_pair();
    let pairs = [
        ("Ti-6Al-4V/ZrO2", Constituents::new(presets::ti64_matrix(), presets::zro2_inclusion())),
        ("SiC/C", Constituents::new(m1, m2)),
    ];
    let populations = [("9 circles", InclusionSpec::circles(9, 0.1)), ("4 fibres", InclusionSpec::fibres(4, 0.2, 0.05))];
    let mut pass = true;
    let mut parts = Vec::new();
    for (pair, laws) in &pairs {
        for (label, spec) in &populations {
            let geometries: Vec<RveGeometry> =
                (0..20).map(|s| sample_geometry(spec, 100, s)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            let tables = build_cell_tables(&geometries, 64, laws, &grid, &options, None, false).map_err(|e| e.to_string())?;
            let per_sample: Vec<Vec<EffectiveSample>> = tables.samples.iter().map(|t| t.effective.clone()).collect();
            let table = EffectiveTable::from_samples(grid.clone(), &per_sample).map_err(|e| e.to_string())?;
            let fraction = tables.samples.iter().map(|t| t.mesh.inclusion_fraction()).sum::<f64>() / 20.0;
            let b = bounds_table(&table, laws, fraction);
            let col = |n: &str| b.column(n).expect("bounds column");
            let (k, reuss, voigt, lo, hi) =
                (col("k_eig_mean"), col("k_reuss"), col("k_voigt"), col("k_hs_lower"), col("k_hs_upper"));
            let vr = (0..k.len()).filter(|&i| reuss[i] < k[i] && k[i] < voigt[i]).count();
            let hs = (0..k.len()).filter(|&i| lo[i] <= k[i] && k[i] <= hi[i]).count();
            let ok = vr == k.len() && hs as f64 >= HS_SHARE * k.len() as f64;
            pass &= ok;
            parts.push(format!("{pair} {label} (f={fraction:.4}): VR {vr}/{n}, HS {hs}/{n}", n = k.len()));
        }
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn linear_degeneracy() -> Result<Verdict, String> {
    let laws = example_laws().frozen_at(500.0);
    let grid = TemperatureGrid::uniform(300.0, 800.0, 4).map_err(|e| e.to_string())?;
    let (tables, _) = solve_sample(0, build_mesh(&centered_circle(), 32), &laws, &grid, &CellOptions::default())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for set in &tables.functions {
        let scalar = set.max_abs(CellFn::M(0)).max(set.max_abs(CellFn::M(1)));
        let vector = [CellFn::N(0, 0), CellFn::N(0, 1), CellFn::N(1, 0), CellFn::N(1, 1), CellFn::P]
            .iter()
            .fold(0.0f64, |m, &f| m.max(set.max_abs(f)));
        for f in CellFn::all().into_iter().filter(|f| f.is_temperature_induced()) {
            let scale = if f.components() == 1 { scalar } else { vector };
            worst = worst.max(set.max_abs(f) / scale);
        }
    }
    Ok(verdict(worst <= DEGENERACY_TOL, format!("max relative norm of R, B, Z, Q, W, A = {worst:.2e}")))
}

fn relative_max_diff(a: &[f64], b: &[f64], scale: f64) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn homogeneous_identity() -> Result<Verdict, String> {
    let law = presets::sic_matrix().in_length_unit(0.01);
    let laws = Constituents::homogeneous(law.clone());
    let grid = TemperatureGrid::uniform(273.15, 873.15, 12).map_err(|e| e.to_string())?;
    let (tables, _) = solve_sample(0, build_mesh(&centered_circle(), 16), &laws, &grid, &CellOptions::default())
        .map_err(|e| e.to_string())?;
    let mut eff_err = 0.0f64;
    for e in &tables.effective {
        let (got, want) = (e.to_flat(), EffectiveSample::of_law(&law, e.temperature).to_flat());
        let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // each block relative to its own magnitude
        for range in [0..1, 1..5, 5..21, 21..25] {
            let s = want[range.clone()].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300 * scale);
            eff_err = eff_err.max(relative_max_diff(&got[range.clone()], &want[range], s));
        }
    }

    let table = EffectiveTable::from_samples(grid, std::slice::from_ref(&tables.effective)).map_err(|e| e.to_string())?;
    let settings = example_settings(0.01, 0.05);
    let macro_mesh = TriMesh::structured(GridLayout::unit_square(10));
    let interp = CoeffInterpolator::new(table);
    let run = run_transient(MacroProblem { mesh: &macro_mesh, coefficients: &interp, settings: &settings })
        .map_err(|e| e.to_string())?;
    let assignment = CellAssignment::Periodic { sample: 0 };
    let fine = tile_domain(&[centered_circle()], &assignment, 0.2, 8).map_err(|e| e.to_string())?;
    let request = ReconstructionRequest { order: 2, eps: 0.2, assignment, reference_temperature: 273.15 };
    let snapshot = MacroSnapshot { mesh: &macro_mesh, state: &run.states[5], previous: Some(&run.states[4]), dt: 0.01 };
    let expansion = expand(&request, &snapshot, &[tables], &fine).map_err(|e| e.to_string())?;
    let f0 = expansion.field(0);
    let t_scale = f0.temperature.values.iter().fold(0.0f64, |m, t| m.max((t - 273.15).abs()));
    let u_scale = f0.displacement.max_abs();
    let mut field_err = 0.0f64;
    for k in 1..=2 {
        let fk = expansion.field(k);
        field_err = field_err.max(relative_max_diff(&fk.temperature.values, &f0.temperature.values, t_scale));
        field_err = field_err.max(relative_max_diff(&fk.displacement.values, &f0.displacement.values, u_scale));
    }
    Ok(verdict(
        eff_err <= HOMOGENEOUS_EFFECTIVE_TOL && field_err <= HOMOGENEOUS_FIELD_TOL,
        format!("effective deviation {eff_err:.2e}, order 1/2 vs order 0 deviation {field_err:.2e}"),
    ))
}

fn layered_oracle() -> Result<Verdict, String> {
    let n = 128;
    let mut mesh = TriMesh::structured(GridLayout::unit_square(n));
    for e in 0..mesh.element_count() {
        mesh.material[e] = u8::from((0.25..0.75).contains(&mesh.centroid(e)[0]));
    }
    let t = 400.0;
    let laws = example_laws().frozen_at(t);
    let (set, _) = solve_first_order(&mesh, &laws, t, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let eff = effective_at(&mesh, &laws, t, &set).map_err(|e| e.to_string())?;
    let f = mesh.inclusion_fraction();
    let (k1, k2) = (laws.law(0).k.eval(t), laws.law(1).k.eval(t));
    let harmonic = 1.0 / ((1.0 - f) / k1 + f / k2);
    let rel = (eff.k_hat[0][0] - harmonic).abs() / harmonic;
    Ok(verdict(
        rel <= LAYERED_TOL,
        format!("k11 = {:.4}, harmonic mean {harmonic:.4}, relative deviation {:.1}% (contrast {:.1})", eff.k_hat[0][0], 100.0 * rel, k1 / k2),
    ))
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

fn poisson_l2_error(n: usize) -> f64 {
    let mesh = TriMesh::structured(GridLayout::unit_square(n));
    let exact = |p: [f64; 2]| (PI * p[0]).sin() * (PI * p[1]).sin();
    let a = assemble_diffusion(&mesh, &vec![IDENTITY2; mesh.element_count()]).expect("assembly");
    let m = assemble_mass(&mesh, &vec![1.0; mesh.element_count()], false).expect("assembly");
    let f: Vec<f64> = mesh.nodes.iter().map(|&p| 2.0 * PI * PI * exact(p)).collect();
    let mut sys = SparseSystem::new(a, m.mul_vec(&f));
    let fixed: Vec<usize> = mesh.boundary_nodes().collect();
    apply_dirichlet(&mut sys, &fixed, &vec![0.0; fixed.len()]);
    let u = solve_spd(&sys, 1e-12, 10_000).expect("solve");
    integrate_with_field(&mesh, &u, 1, |x, v| (v[0] - exact(x)).powi(2)).sqrt()
}

fn fem_convergence() -> Result<Verdict, String> {
    let ns = [16usize, 32, 64];
    let errors: Vec<f64> = ns.iter().map(|&n| poisson_l2_error(n)).collect();
    let x: Vec<f64> = ns.iter().map(|&n| (1.0 / n as f64).ln()).collect();
    let rate = slope(&x, &errors.iter().map(|e| e.ln()).collect::<Vec<_>>());

    let mesh = TriMesh::structured(GridLayout::unit_square(7));
    let values: Vec<f64> = mesh.nodes.iter().map(|p| 1.5 - 2.0 * p[0] + 0.75 * p[1]).collect();
    let g = recover_gradient(&mesh, &NodalField::new(values, 1, Unit::Kelvin)).map_err(|e| e.to_string())?;
    let recovery = (0..mesh.node_count())
        .map(|a| (g.at(a)[0] + 2.0).abs().max((g.at(a)[1] - 0.75).abs()))
        .fold(0.0f64, f64::max);
    Ok(verdict(
        (rate - FEM_RATE.0).abs() <= FEM_RATE.1 && recovery <= 1e-12,
        format!("L2 rate {rate:.3} (errors {}), linear gradient recovery error {recovery:.1e}", sci(&errors)),
    ))
}

fn monte_carlo_scaling() -> Result<Verdict, String> {
    let sizes = [5usize, 10, 20, 40];
    let batches = 50;
    let spec = InclusionSpec::circles(4, 0.15);
    let laws = example_laws();
    let t = 500.0;
    let pool: Vec<f64> = (0..batches * sizes[3])
        .map(|s| {
            let geometry = sample_geometry(&spec, 5000, s).map_err(|e| e.to_string())?;
            let mesh = build_mesh(&geometry, 32);
            let (set, _) = solve_first_order(&mesh, &laws, t, &SolverOptions::default()).map_err(|e| e.to_string())?;
            Ok(effective_at(&mesh, &laws, t, &set).map_err(|e| e.to_string())?.k_eigen_mean())
        })
        .collect::<Result<_, String>>()?;
    let mut errors = Vec::new();
    for &m in &sizes {
        let means: Vec<f64> = pool[..batches * m].chunks(m).map(|c| c.iter().sum::<f64>() / m as f64).collect();
        let mu = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (batches - 1) as f64;
        errors.push(var.sqrt());
    }
    let x: Vec<f64> = sizes.iter().map(|&m| (m as f64).ln()).collect();
    let s = slope(&x, &errors.iter().map(|e| e.ln()).collect::<Vec<_>>());
    Ok(verdict(
        (s - MC_SLOPE.0).abs() <= MC_SLOPE.1,
        format!("slope {s:.3} over M = {sizes:?} ({batches} batches each; standard errors {})", sci(&errors)),
    ))
}

fn picard_convergence() -> Result<Verdict, String> {
    let grid = TemperatureGrid::uniform(273.15, 873.15, 12).map_err(|e| e.to_string())?;
    let options = CellOptions { order: CellOrder::First, ..Default::default() };
    let (tables, _) =
        solve_sample(0, build_mesh(&centered_circle(), 32), &example_laws(), &grid, &options).map_err(|e| e.to_string())?;
    let table = EffectiveTable::from_samples(grid, &[tables.effective]).map_err(|e| e.to_string())?;
    let dt = 0.002;
    let settings = example_settings(dt, 50.0 * dt);
    let mesh = TriMesh::structured(GridLayout::unit_square(40));
    let interp = CoeffInterpolator::new(table);
    let problem = MacroProblem { mesh: &mesh, coefficients: &interp, settings: &settings };
    let run = run_transient(problem).map_err(|e| e.to_string())?;
    let max_iter = run.log.iter().skip(1).map(|l| l.picard_iterations).max().unwrap_or(0);
    let mut resolve = 0.0f64;
    for w in run.states.windows(2) {
        let again = thermal_linear_solve(problem, &w[0].temperature, &w[1].temperature, w[1].time).map_err(|e| e.to_string())?;
        resolve = resolve.max(relative_max_diff(&again, &w[1].temperature, 1.0));
    }
    Ok(verdict(
        max_iter <= PICARD_MAX && resolve <= 10.0 * PICARD_TOL,
        format!("{} steps at dt = {dt}: max Picard iterations {max_iter}, max re-solve change {resolve:.2e} K", run.states.len() - 1),
    ))
}

fn csv_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                let bytes = std::fs::read(&path).unwrap_or_default();
                out.insert(path.strip_prefix(root).expect("under root").to_path_buf(), bytes);
            }
        }
    }
    out
}

fn determinism(first: &Path) -> Result<Verdict, String> {
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_example1(second.path())?;
    let (a, b) = (csv_files(first), csv_files(second.path()));
    let differing: Vec<String> =
        a.iter().filter(|(k, v)| b.get(*k) != Some(*v)).map(|(k, _)| k.display().to_string()).collect();
    let same_set = a.keys().eq(b.keys());
    Ok(verdict(
        same_set && differing.is_empty() && !a.is_empty(),
        format!("{} CSV files compared, {} differ{}", a.len(), differing.len(), if same_set { "" } else { ", file sets differ" }),
    ))
}

fn main() {
    let example1 = tempfile::tempdir().expect("temporary directory");
    let example1_run = {
        let start = Instant::now();
        let r = run_example1(example1.path());
        eprintln!("example 1 pipeline: {:.1} s", start.elapsed().as_secs_f64());
        r
    };
    let criteria: Vec<(&str, Check)> = vec![
        ("error ordering", Box::new(|| example1_run.clone().and_then(|_| error_ordering(example1.path())))),
        ("bound containment", Box::new(bound_containment)),
        ("linear degeneracy", Box::new(linear_degeneracy)),
        ("homogeneous identity", Box::new(homogeneous_identity)),
        ("layered oracle", Box::new(layered_oracle)),
        ("FEM convergence", Box::new(fem_convergence)),
        ("Monte Carlo scaling", Box::new(monte_carlo_scaling)),
        ("Picard convergence", Box::new(picard_convergence)),
        ("determinism", Box::new(|| example1_run.clone().and_then(|_| determinism(example1.path())))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = check().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        failed += usize::from(!v.pass);
        println!(
            "criterion {} {:<21} {} ({:.1} s): {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
