//! Two-scale reconstruction of fine temperature and displacement fields from
//! a macroscopic state and tabulated cell functions.

mod derived;

pub use derived::{derived_fields, DerivedFields};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::{CellFn, CellFunctionSet, SampleTables, SYM_PAIRS};
use crate::error::{Error, Result};
use crate::fem::{recover_gradient, NodalField, Unit};
use crate::macro_solver::MacroState;
use crate::microgen::{cell_coordinates, cells_per_side, CellAssignment, PointLocation, TriMesh};

/// Parameters of a reconstruction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRequest {
    /// Highest expansion order, 0, 1 or 2.
    pub order: usize,
    pub eps: f64,
    pub assignment: CellAssignment,
    /// Stress-free temperature (K).
    pub reference_temperature: f64,
}

/// A macroscopic state with its predecessor for the time derivative.
#[derive(Clone, Copy, Debug)]
pub struct MacroSnapshot<'a> {
    pub mesh: &'a TriMesh,
    pub state: &'a MacroState,
    pub previous: Option<&'a MacroState>,
    pub dt: f64,
}

/// Reconstructed nodal fields on an evaluation mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct FineField {
    pub temperature: NodalField,
    pub displacement: NodalField,
}

/// The terms of the expansion, already scaled by their power of `eps`:
/// `terms[k]` is the order-`k` contribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub order: usize,
    pub temperature: [Vec<f64>; 3],
    pub displacement: [Vec<f64>; 3],
}

impl Expansion {
    /// Sum of the terms up to `order`.
    pub fn field(&self, order: usize) -> FineField {
        assert!(order <= self.order, "order {order} not computed");
        let sum = |terms: &[Vec<f64>; 3]| {
            let mut v = terms[0].clone();
            for t in &terms[1..=order] {
                v.iter_mut().zip(t).for_each(|(a, b)| *a += b);
            }
            v
        };
        FineField {
            temperature: NodalField::new(sum(&self.temperature), 1, Unit::Kelvin),
            displacement: NodalField::new(sum(&self.displacement), 2, Unit::Length),
        }
    }
}

/// Macro fields and derivatives interpolated at one evaluation point.
#[derive(Clone, Copy, Debug, Default)]
struct MacroPoint {
    t: f64,
    dt_t: f64,
    grad_t: [f64; 2],
    hess_t: [[f64; 2]; 2],
    u: [f64; 2],
    /// `grad_u[m][a] = du_m/dx_a`
    grad_u: [[f64; 2]; 2],
    /// `hess_u[m][a][b]`
    hess_u: [[[f64; 2]; 2]; 2],
}

struct MacroDerivatives {
    grad_t: NodalField,
    hess_t: NodalField,
    grad_u: NodalField,
    hess_u: NodalField,
    dt_t: Vec<f64>,
}

impl MacroDerivatives {
    fn new(snap: &MacroSnapshot<'_>) -> Result<Self> {
        let mesh = snap.mesh;
        let t = NodalField::new(snap.state.temperature.clone(), 1, Unit::Kelvin);
        let u = NodalField::new(snap.state.displacement.clone(), 2, Unit::Length);
        let grad_t = recover_gradient(mesh, &t)?;
        let hess_t = recover_gradient(mesh, &grad_t)?;
        let grad_u = recover_gradient(mesh, &u)?;
        let hess_u = recover_gradient(mesh, &grad_u)?;
        let dt_t = match snap.previous {
            Some(prev) => snap.state.temperature.iter().zip(&prev.temperature).map(|(a, b)| (a - b) / snap.dt).collect(),
            None => vec![0.0; mesh.node_count()],
        };
        Ok(MacroDerivatives { grad_t, hess_t, grad_u, hess_u, dt_t })
    }

    fn at(&self, snap: &MacroSnapshot<'_>, p: [f64; 2]) -> MacroPoint {
        let loc = snap.mesh.locate(p);
        let mesh = snap.mesh;
        let mut out = MacroPoint::default();
        let mut buf = [0.0; 8];
        mesh.interpolate_at(&loc, &snap.state.temperature, 1, &mut buf[..1]);
        out.t = buf[0];
        mesh.interpolate_at(&loc, &self.dt_t, 1, &mut buf[..1]);
        out.dt_t = buf[0];
        mesh.interpolate_at(&loc, &self.grad_t.values, 2, &mut buf[..2]);
        out.grad_t = [buf[0], buf[1]];
        mesh.interpolate_at(&loc, &self.hess_t.values, 4, &mut buf[..4]);
        let off = 0.5 * (buf[1] + buf[2]);
        out.hess_t = [[buf[0], off], [off, buf[3]]];
        mesh.interpolate_at(&loc, &snap.state.displacement, 2, &mut buf[..2]);
        out.u = [buf[0], buf[1]];
        mesh.interpolate_at(&loc, &self.grad_u.values, 4, &mut buf[..4]);
        out.grad_u = [[buf[0], buf[1]], [buf[2], buf[3]]];
        mesh.interpolate_at(&loc, &self.hess_u.values, 8, &mut buf);
        for m in 0..2 {
            let h = &buf[4 * m..4 * m + 4];
            let off = 0.5 * (h[1] + h[2]);
            out.hess_u[m] = [[h[0], off], [off, h[3]]];
        }
        out
    }
}

/// Cell functions at one `(y, T)` point, P1 in `y` and linear in `T`.
struct CellLookup<'a> {
    sets: [&'a CellFunctionSet; 2],
    weight: f64,
    loc: PointLocation,
    nodes: [usize; 3],
}

impl CellLookup<'_> {
    fn value(&self, f: CellFn, c: usize) -> f64 {
        let mut v = 0.0;
        for a in 0..3 {
            let lo = self.sets[0].value(f, self.nodes[a], c);
            let hi = self.sets[1].value(f, self.nodes[a], c);
            v += self.loc.weights[a] * ((1.0 - self.weight) * lo + self.weight * hi);
        }
        v
    }
}

fn lookup<'a>(tables: &'a SampleTables, y: [f64; 2], t: f64) -> CellLookup<'a> {
    let b = tables.grid.bracket(t);
    let hi = (b.lower + 1).min(tables.functions.len() - 1);
    let loc = tables.mesh.locate(y);
    let nodes = tables.mesh.triangles[loc.element];
    CellLookup { sets: [&tables.functions[b.lower], &tables.functions[hi]], weight: b.weight, loc, nodes }
}

fn check_tables(request: &ReconstructionRequest, tables: &[SampleTables]) -> Result<()> {
    if request.order > 2 {
        return Err(Error::InvalidInput(format!("expansion order {} is not 0, 1 or 2", request.order)));
    }
    let needed = request.assignment.max_sample();
    if request.order == 0 {
        return Ok(());
    }
    if needed >= tables.len() {
        return Err(Error::MissingTable { sample: needed, reason: format!("only {} samples tabulated", tables.len()) });
    }
    let mut used = vec![false; tables.len()];
    match &request.assignment {
        CellAssignment::Periodic { sample } => used[*sample] = true,
        CellAssignment::PerCell { samples } => samples.iter().for_each(|&s| used[s] = true),
    }
    for (s, t) in tables.iter().enumerate().filter(|(s, _)| used[*s]) {
        let first = t.functions.iter().all(|f| f.has(CellFn::M(0)));
        if !first {
            return Err(Error::MissingTable { sample: s, reason: "first-order functions not tabulated".into() });
        }
        if request.order == 2 && !t.functions.iter().all(|f| f.has(CellFn::S)) {
            return Err(Error::MissingTable { sample: s, reason: "second-order functions not tabulated".into() });
        }
    }
    Ok(())
}

/// Weight of a symmetric pair in a full double contraction.
fn pair_weight(s: usize) -> f64 {
    if SYM_PAIRS[s].0 == SYM_PAIRS[s].1 {
        1.0
    } else {
        2.0
    }
}

type NodeTerms = ([f64; 3], [[f64; 2]; 3]);

fn node_terms(mp: &MacroPoint, cell: Option<&CellLookup<'_>>, order: usize, eps: f64, t_ref: f64) -> NodeTerms {
    let mut t = [mp.t, 0.0, 0.0];
    let mut u = [mp.u, [0.0; 2], [0.0; 2]];
    let Some(cell) = cell else { return (t, u) };
    let g = mp.grad_t;
    let gu = mp.grad_u;
    let theta = mp.t - t_ref;

    t[1] = eps * (0..2).map(|a| cell.value(CellFn::M(a), 0) * g[a]).sum::<f64>();
    for (i, ui) in u[1].iter_mut().enumerate() {
        let mut v = -cell.value(CellFn::P, i) * theta;
        for a in 0..2 {
            for m in 0..2 {
                v += cell.value(CellFn::N(a, m), i) * gu[m][a];
            }
        }
        *ui = eps * v;
    }
    if order < 2 {
        return (t, u);
    }

    let e2 = eps * eps;
    let mut v = cell.value(CellFn::S, 0) * mp.dt_t;
    for (s, &(a, b)) in SYM_PAIRS.iter().enumerate() {
        v += pair_weight(s) * cell.value(CellFn::M2(s), 0) * mp.hess_t[a][b];
    }
    for a1 in 0..2 {
        for a2 in 0..2 {
            v += cell.value(CellFn::R(a1, a2), 0) * g[a2] * g[a1];
            v -= cell.value(CellFn::B(a1, a2), 0) * g[a1] * g[a2];
        }
    }
    t[2] = e2 * v;

    for (i, ui) in u[2].iter_mut().enumerate() {
        let mut v = 0.0;
        for m in 0..2 {
            for (s, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                v += pair_weight(s) * cell.value(CellFn::N2(s, m), i) * mp.hess_u[m][a][b];
            }
            for a1 in 0..2 {
                for a2 in 0..2 {
                    v += cell.value(CellFn::Z(a1, a2, m), i) * g[a2] * gu[m][a1];
                    v -= cell.value(CellFn::A(a1, a2, m), i) * g[a1] * gu[m][a2];
                }
            }
        }
        for a in 0..2 {
            v -= cell.value(CellFn::Q(a), i) * g[a] * theta;
            v -= cell.value(CellFn::H(a), i) * g[a];
            v += cell.value(CellFn::W(a), i) * g[a] * theta;
        }
        *ui = e2 * v;
    }
    (t, u)
}

/// Evaluates the expansion terms up to `request.order` at the nodes of
/// `eval_mesh`, a mesh of the same unit-square domain as the macro mesh.
pub fn expand(
    request: &ReconstructionRequest,
    snapshot: &MacroSnapshot<'_>,
    tables: &[SampleTables],
    eval_mesh: &TriMesh,
) -> Result<Expansion> {
    check_tables(request, tables)?;
    let cells = cells_per_side(request.eps)?;
    if let CellAssignment::PerCell { samples } = &request.assignment {
        if samples.len() != cells * cells {
            return Err(Error::InvalidInput(format!("{} cell samples for {} cells", samples.len(), cells * cells)));
        }
    }
    let derivatives = MacroDerivatives::new(snapshot)?;
    let per_node: Vec<NodeTerms> = eval_mesh
        .nodes
        .par_iter()
        .map(|&x| {
            let mp = derivatives.at(snapshot, x);
            if request.order == 0 {
                return Ok(node_terms(&mp, None, 0, request.eps, request.reference_temperature));
            }
            let (cell, y) = cell_coordinates(x, request.eps, cells);
            let sample = request.assignment.sample_of(cell);
            let table = &tables[sample];
            let slack = 1e-9 * (table.grid.max() - table.grid.min()).max(1.0);
            if mp.t < table.grid.min() - slack || mp.t > table.grid.max() + slack {
                return Err(Error::MissingTable {
                    sample,
                    reason: format!(
                        "temperature {:.6} K outside the tabulated range [{}, {}]",
                        mp.t,
                        table.grid.min(),
                        table.grid.max()
                    ),
                });
            }
            let cl = lookup(table, y, mp.t);
            Ok(node_terms(&mp, Some(&cl), request.order, request.eps, request.reference_temperature))
        })
        .collect::<Result<_>>()?;

    let n = eval_mesh.node_count();
    let mut temperature = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut displacement = [vec![0.0; 2 * n], vec![0.0; 2 * n], vec![0.0; 2 * n]];
    for (node, (t, u)) in per_node.iter().enumerate() {
        for k in 0..3 {
            temperature[k][node] = t[k];
            displacement[k][2 * node] = u[k][0];
            displacement[k][2 * node + 1] = u[k][1];
        }
    }
    Ok(Expansion { order: request.order, temperature, displacement })
}

/// Reconstructed temperature and displacement at `request.order`.
pub fn reconstruct(
    request: &ReconstructionRequest,
    snapshot: &MacroSnapshot<'_>,
    tables: &[SampleTables],
    eval_mesh: &TriMesh,
) -> Result<FineField> {
    Ok(expand(request, snapshot, tables, eval_mesh)?.field(request.order))
}

pub fn reconstruct_temperature(
    request: &ReconstructionRequest,
    snapshot: &MacroSnapshot<'_>,
    tables: &[SampleTables],
    eval_mesh: &TriMesh,
) -> Result<NodalField> {
    reconstruct(request, snapshot, tables, eval_mesh).map(|f| f.temperature)
}

pub fn reconstruct_displacement(
    request: &ReconstructionRequest,
    snapshot: &MacroSnapshot<'_>,
    tables: &[SampleTables],
    eval_mesh: &TriMesh,
) -> Result<NodalField> {
    reconstruct(request, snapshot, tables, eval_mesh).map(|f| f.displacement)
}
