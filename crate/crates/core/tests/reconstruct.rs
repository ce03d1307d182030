use thermoscale::cell::{solve_sample, CellFn, CellOptions, CellOrder, SampleTables, TemperatureGrid};
use thermoscale::fem::{NodalField, Unit};
use thermoscale::macro_solver::MacroState;
use thermoscale::material::{presets, Constituents};
use thermoscale::microgen::{build_mesh, cell_coordinates, CellAssignment, GridLayout, InclusionParams, RveGeometry, TriMesh};
use thermoscale::reconstruct::*;
use thermoscale::Error;

const T_REF: f64 = 273.15;

fn laws() -> Constituents {
    Constituents::new(presets::sic_matrix(), presets::carbon_inclusion()).in_length_unit(0.01)
}

fn geometry() -> RveGeometry {
    RveGeometry::new(vec![InclusionParams::circle([0.5, 0.5], 0.3)], 0)
}

fn grid() -> TemperatureGrid {
    TemperatureGrid::uniform(273.15, 673.15, 5).unwrap()
}

fn tables(laws: &Constituents, order: CellOrder) -> Vec<SampleTables> {
    let opts = CellOptions { order, ..Default::default() };
    vec![solve_sample(0, build_mesh(&geometry(), 16), laws, &grid(), &opts).unwrap().0]
}

fn state(mesh: &TriMesh, t: impl Fn([f64; 2]) -> f64, u: impl Fn([f64; 2]) -> [f64; 2]) -> MacroState {
    MacroState {
        step: 1,
        time: 0.01,
        temperature: mesh.nodes.iter().map(|&p| t(p)).collect(),
        displacement: mesh.nodes.iter().flat_map(|&p| u(p)).collect(),
        picard_iterations: 1,
    }
}

fn request(order: usize, eps: f64) -> ReconstructionRequest {
    ReconstructionRequest { order, eps, assignment: CellAssignment::Periodic { sample: 0 }, reference_temperature: T_REF }
}

fn unit_mesh(n: usize) -> TriMesh {
    TriMesh::structured(GridLayout::unit_square(n))
}

/// Hand evaluation of component `c` of `f` at `(y, T)`.
fn cell_value(t: &SampleTables, f: CellFn, y: [f64; 2], temp: f64, c: usize) -> f64 {
    let b = t.grid.bracket(temp);
    let mut lo = vec![0.0; f.components()];
    let mut hi = vec![0.0; f.components()];
    t.mesh.interpolate(t.functions[b.lower].get(f).unwrap(), f.components(), y, &mut lo);
    t.mesh.interpolate(t.functions[b.lower + 1].get(f).unwrap(), f.components(), y, &mut hi);
    (1.0 - b.weight) * lo[c] + b.weight * hi[c]
}

#[test]
fn order_zero_returns_the_macro_field() {
    let mesh = unit_mesh(10);
    let s = state(&mesh, |p| 300.0 + 20.0 * p[0] * p[1], |p| [p[0] * p[1], -p[0]]);
    let snap = MacroSnapshot { mesh: &mesh, state: &s, previous: None, dt: 0.01 };
    let f = reconstruct(&request(0, 0.2), &snap, &[], &mesh).unwrap();
    assert_eq!(f.temperature.values, s.temperature);
    assert_eq!(f.displacement.values, s.displacement);
}

#[test]
fn linear_temperature_matches_hand_evaluated_first_order_term() {
    let laws = laws();
    let t = tables(&laws, CellOrder::First);
    let macro_mesh = unit_mesh(10);
    let (a, b) = (300.0, 50.0);
    let s = state(&macro_mesh, |p| a + b * p[0], |_| [0.0, 0.0]);
    let snap = MacroSnapshot { mesh: &macro_mesh, state: &s, previous: None, dt: 0.01 };
    let eval = unit_mesh(35);
    let eps = 0.2;
    let f = reconstruct_temperature(&request(1, eps), &snap, &t, &eval).unwrap();
    let mut worst: f64 = 0.0;
    for (node, &x) in eval.nodes.iter().enumerate() {
        let (_, y) = cell_coordinates(x, eps, 5);
        let t0 = a + b * x[0];
        let expected = t0 + eps * cell_value(&t[0], CellFn::M(0), y, t0, 0) * b;
        worst = worst.max((f.values[node] - expected).abs());
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn uniform_strain_matches_hand_evaluated_first_order_term() {
    let laws = laws();
    let t = tables(&laws, CellOrder::First);
    let macro_mesh = unit_mesh(8);
    let s = state(&macro_mesh, |_| T_REF, |p| [p[0], 0.0]);
    let snap = MacroSnapshot { mesh: &macro_mesh, state: &s, previous: None, dt: 0.01 };
    let eval = unit_mesh(30);
    let eps = 0.2;
    let u = reconstruct_displacement(&request(1, eps), &snap, &t, &eval).unwrap();
    for (node, &x) in eval.nodes.iter().enumerate() {
        let (_, y) = cell_coordinates(x, eps, 5);
        for c in 0..2 {
            let u0 = if c == 0 { x[0] } else { 0.0 };
            let expected = u0 + eps * cell_value(&t[0], CellFn::N(0, 0), y, T_REF, c);
            assert!((u.values[2 * node + c] - expected).abs() < 1e-9);
        }
    }
}

#[test]
fn homogeneous_material_reconstructions_coincide() {
    let law = presets::sic_matrix().in_length_unit(0.01);
    let t = tables(&Constituents::homogeneous(law), CellOrder::Second);
    let mesh = unit_mesh(10);
    let s = state(&mesh, |p| 300.0 + 40.0 * p[0] * p[0] + 10.0 * p[1], |p| [0.01 * p[0] * p[1], -0.02 * p[1] * p[1]]);
    let prev = state(&mesh, |p| 299.0 + 40.0 * p[0] * p[0], |_| [0.0, 0.0]);
    let snap = MacroSnapshot { mesh: &mesh, state: &s, previous: Some(&prev), dt: 0.01 };
    let e = expand(&request(2, 0.2), &snap, &t, &unit_mesh(20)).unwrap();
    let (f0, f2) = (e.field(0), e.field(2));
    for (a, b) in f0.temperature.values.iter().zip(&f2.temperature.values) {
        assert!((a - b).abs() <= 1e-9 * a.abs());
    }
    for (a, b) in f0.displacement.values.iter().zip(&f2.displacement.values) {
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn truncations_nest() {
    let laws = laws();
    let t = tables(&laws, CellOrder::Second);
    let mesh = unit_mesh(10);
    let s = state(&mesh, |p| 320.0 + 30.0 * p[0] * p[1], |p| [0.01 * p[0] * p[0], 0.02 * p[0] * p[1]]);
    let prev = state(&mesh, |p| 318.0 + 30.0 * p[0] * p[1], |_| [0.0, 0.0]);
    let snap = MacroSnapshot { mesh: &mesh, state: &s, previous: Some(&prev), dt: 0.01 };
    let e = expand(&request(2, 0.2), &snap, &t, &unit_mesh(25)).unwrap();
    assert!(e.temperature[2].iter().any(|v| v.abs() > 0.0));
    assert!(e.displacement[2].iter().any(|v| v.abs() > 0.0));
    let (f0, f1, f2) = (e.field(0), e.field(1), e.field(2));
    for node in 0..f0.temperature.values.len() {
        let d1 = f1.temperature.values[node] - f0.temperature.values[node];
        let d2 = f2.temperature.values[node] - f1.temperature.values[node];
        assert!((d1 - e.temperature[1][node]).abs() <= 1e-12 * f0.temperature.values[node]);
        assert!((d2 - e.temperature[2][node]).abs() <= 1e-12 * f0.temperature.values[node]);
    }
    // the order-1 request agrees with the order-2 expansion truncated
    let f1_direct = reconstruct(&request(1, 0.2), &snap, &t, &unit_mesh(25)).unwrap();
    assert_eq!(f1_direct, f1);
}

#[test]
fn halving_eps_halves_the_first_order_correction() {
    let laws = laws();
    let t = tables(&laws, CellOrder::First);
    let mesh = unit_mesh(10);
    let s = state(&mesh, |p| 300.0 + 50.0 * p[0] + 20.0 * p[1], |_| [0.0, 0.0]);
    let snap = MacroSnapshot { mesh: &mesh, state: &s, previous: None, dt: 0.01 };
    let eval = unit_mesh(160);
    let amplitude = |eps: f64| {
        let e = expand(&request(1, eps), &snap, &t, &eval).unwrap();
        e.temperature[1].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let ratio = amplitude(0.2) / amplitude(0.1);
    assert!((ratio - 2.0).abs() <= 0.2, "{ratio}");
}

#[test]
fn periodic_tiling_gives_cell_periodic_oscillation() {
    let laws = laws();
    let t = tables(&laws, CellOrder::First);
    let mesh = unit_mesh(10);
    let s = state(&mesh, |p| 300.0 + 40.0 * p[0] * p[0], |_| [0.0, 0.0]);
    let snap = MacroSnapshot { mesh: &mesh, state: &s, previous: None, dt: 0.01 };
    let per_cell = 16;
    let eval = unit_mesh(5 * per_cell);
    let e = expand(&request(1, 0.2), &snap, &t, &eval).unwrap();
    let pattern = |cx: usize, cy: usize| -> Vec<f64> {
        let mut v = Vec::new();
        for j in 0..=per_cell {
            for i in 0..=per_cell {
                v.push(e.temperature[1][eval.layout.node_index(cx * per_cell + i, cy * per_cell + j)]);
            }
        }
        v
    };
    let corr = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    };
    let base = pattern(1, 1);
    for (cx, cy) in [(2, 1), (3, 2), (1, 3), (3, 3)] {
        let c = corr(&base, &pattern(cx, cy));
        assert!(c >= 0.99, "cell ({cx}, {cy}): {c}");
    }
}

#[test]
fn missing_tables_are_reported() {
    let laws = laws();
    let first = tables(&laws, CellOrder::First);
    let mesh = unit_mesh(6);
    let s = state(&mesh, |_| 300.0, |_| [0.0, 0.0]);
    let snap = MacroSnapshot { mesh: &mesh, state: &s, previous: None, dt: 0.01 };
    let r = reconstruct(&request(2, 0.2), &snap, &first, &mesh);
    assert!(matches!(r, Err(Error::MissingTable { sample: 0, .. })));
    let mut req = request(1, 0.2);
    req.assignment = CellAssignment::Periodic { sample: 3 };
    assert!(matches!(reconstruct(&req, &snap, &first, &mesh), Err(Error::MissingTable { sample: 3, .. })));
    let hot = state(&mesh, |_| 900.0, |_| [0.0, 0.0]);
    let snap = MacroSnapshot { mesh: &mesh, state: &hot, previous: None, dt: 0.01 };
    assert!(matches!(reconstruct(&request(1, 0.2), &snap, &first, &mesh), Err(Error::MissingTable { .. })));
}

#[test]
fn derived_fields_of_simple_states() {
    let laws = laws();
    let mesh = build_mesh(&geometry(), 8);
    let n = mesh.node_count();
    let rest = FineField {
        temperature: NodalField::new(vec![T_REF; n], 1, Unit::Kelvin),
        displacement: NodalField::zeros(n, 2, Unit::Length),
    };
    let d = derived_fields(&mesh, &rest, &laws, T_REF).unwrap();
    assert!(d.flux.iter().all(|q| q == &[0.0, 0.0]));
    assert!(d.stress.iter().all(|s| s.iter().flatten().all(|v| *v == 0.0)));

    let homogeneous = Constituents::homogeneous(laws.law(0).clone());
    let g = [3.0, -2.0];
    let linear = FineField {
        temperature: NodalField::new(mesh.nodes.iter().map(|p| 400.0 + g[0] * p[0] + g[1] * p[1]).collect(), 1, Unit::Kelvin),
        displacement: NodalField::new(mesh.nodes.iter().flat_map(|p| [0.01 * p[1], 0.02 * p[0]]).collect(), 2, Unit::Length),
    };
    let d = derived_fields(&mesh, &linear, &homogeneous, T_REF).unwrap();
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let t = tri.iter().map(|&a| linear.temperature.values[a]).sum::<f64>() / 3.0;
        let k = homogeneous.law(0).conductivity(t)[0][0];
        assert!((d.flux[e][0] + k * g[0]).abs() < 1e-9 * k);
        assert!((d.flux[e][1] + k * g[1]).abs() < 1e-9 * k);
        assert!((d.stress[e][0][1] - d.stress[e][1][0]).abs() <= 1e-12 * d.stress[e][0][1].abs().max(1.0));
        assert!((d.strain[e][0][1] - 0.015).abs() < 1e-12);
    }
}
