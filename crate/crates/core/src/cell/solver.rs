use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functions::{CellFn, CellFunctionSet, FIRST_ORDER_SLOTS, SYM_PAIRS};
use super::grid::{temperature_sensitivity, TemperatureGrid};
use crate::effective::{effective_at, EffectiveSample, FLAT_LEN};
use crate::error::Result;
use crate::fem::{
    assemble_diffusion, assemble_elasticity, constrain_matrix, element_gradients, element_means, node_dofs,
    scalar_load, vector_load, zero_entries, PreparedSolver, SolverOptions,
};
use crate::material::Constituents;
use crate::microgen::TriMesh;
use crate::tensor::{Mat2, Tensor4};

/// How macroscopic x-derivatives of coefficients and first-order functions
/// inside the second-order cell problems are realised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XDerivativeMode {
    /// Through the chain rule `d/dx = d/dT dT0/dx`, giving the directional
    /// functions `R`, `Z`, `Q`.
    #[default]
    ChainRule,
    /// Neglect those terms; `R`, `Z`, `Q` are not solved.
    Drop,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellOrder {
    First,
    #[default]
    Second,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CellOptions {
    pub order: CellOrder,
    pub x_derivatives: XDerivativeMode,
    pub solver: SolverOptions,
}

/// Temperature derivatives of the first-order functions and of the
/// single-sample effective coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Sensitivity {
    pub functions: CellFunctionSet,
    pub effective: EffectiveSample,
}

struct Dirichlet {
    scalar: Vec<usize>,
    vector: Vec<usize>,
}

impl Dirichlet {
    fn of(mesh: &TriMesh) -> Self {
        let nodes: Vec<usize> = mesh.boundary_nodes().collect();
        Dirichlet { vector: node_dofs(&nodes, 2), scalar: nodes }
    }
}

fn scalar_solver(mesh: &TriMesh, k: &[Mat2], bc: &Dirichlet, opts: &SolverOptions) -> Result<PreparedSolver> {
    let mut a = assemble_diffusion(mesh, k)?;
    constrain_matrix(&mut a, &bc.scalar);
    PreparedSolver::new(a, opts)
}

fn vector_solver(mesh: &TriMesh, c: &[Tensor4], bc: &Dirichlet, opts: &SolverOptions) -> Result<PreparedSolver> {
    let mut a = assemble_elasticity(mesh, c)?;
    constrain_matrix(&mut a, &bc.vector);
    PreparedSolver::new(a, opts)
}

/// Solves `div(k grad phi) = g + div F` with zero boundary values.
fn solve_scalar(
    mesh: &TriMesh,
    solver: &PreparedSolver,
    bc: &Dirichlet,
    g: Option<&[f64]>,
    f: Option<&[[f64; 2]]>,
) -> Result<Vec<f64>> {
    let neg: Option<Vec<f64>> = g.map(|g| g.iter().map(|v| -v).collect());
    let mut b = scalar_load(mesh, neg.as_deref(), f)?;
    zero_entries(&mut b, &bc.scalar);
    solver.solve(&b)
}

/// Solves `d_j(C_ijkl d_l phi_k) = g_i + d_j F_ij` with zero boundary values.
fn solve_vector(
    mesh: &TriMesh,
    solver: &PreparedSolver,
    bc: &Dirichlet,
    g: Option<&[[f64; 2]]>,
    f: Option<&[Mat2]>,
) -> Result<Vec<f64>> {
    let neg: Option<Vec<[f64; 2]>> = g.map(|g| g.iter().map(|v| [-v[0], -v[1]]).collect());
    let mut b = vector_load(mesh, neg.as_deref(), f)?;
    zero_entries(&mut b, &bc.vector);
    solver.solve(&b)
}

/// Per-element constitutive data at one temperature.
struct ElementData {
    k: Vec<Mat2>,
    dk: Vec<Mat2>,
    c: Vec<Tensor4>,
    dc: Vec<Tensor4>,
    beta: Vec<Mat2>,
    dbeta: Vec<Mat2>,
    rho_c: Vec<f64>,
}

impl ElementData {
    fn new(mesh: &TriMesh, laws: &Constituents, t: f64) -> Self {
        let per = |f: &dyn Fn(u8) -> Mat2| mesh.material.iter().map(|&m| f(m)).collect::<Vec<_>>();
        ElementData {
            k: per(&|m| laws.law(m).conductivity(t)),
            dk: per(&|m| laws.law(m).conductivity_derivative(t, 1)),
            beta: per(&|m| laws.law(m).thermal_modulus(t)),
            dbeta: per(&|m| laws.law(m).thermal_modulus_derivative(t, 1)),
            c: mesh.material.iter().map(|&m| laws.law(m).stiffness(t)).collect(),
            dc: mesh.material.iter().map(|&m| laws.law(m).stiffness_derivative(t, 1)).collect(),
            rho_c: mesh.material.iter().map(|&m| laws.law(m).heat_capacity(t)).collect(),
        }
    }
}

/// Solves the first-order problems for `M_a`, `N^a_{.m}` and `P` at
/// temperature `t`. Returns the functions and the number of linear solves.
pub fn solve_first_order(
    mesh: &TriMesh,
    laws: &Constituents,
    t: f64,
    opts: &SolverOptions,
) -> Result<(CellFunctionSet, usize)> {
    let bc = Dirichlet::of(mesh);
    let d = ElementData::new(mesh, laws, t);
    let mut set = CellFunctionSet::empty(mesh.node_count());

    let ks = scalar_solver(mesh, &d.k, &bc, opts)?;
    for a in 0..2 {
        let f: Vec<[f64; 2]> = d.k.iter().map(|k| [-k[0][a], -k[1][a]]).collect();
        set.set(CellFn::M(a), solve_scalar(mesh, &ks, &bc, None, Some(&f))?);
    }
    let cs = vector_solver(mesh, &d.c, &bc, opts)?;
    for a in 0..2 {
        for m in 0..2 {
            let f: Vec<Mat2> = d.c.iter().map(|c| [[-c.0[0][0][m][a], -c.0[0][1][m][a]], [-c.0[1][0][m][a], -c.0[1][1][m][a]]]).collect();
            set.set(CellFn::N(a, m), solve_vector(mesh, &cs, &bc, None, Some(&f))?);
        }
    }
    let f: Vec<Mat2> = d.beta.iter().map(|b| [[-b[0][0], -b[0][1]], [-b[1][0], -b[1][1]]]).collect();
    set.set(CellFn::P, solve_vector(mesh, &cs, &bc, None, Some(&f))?);
    Ok((set, FIRST_ORDER_SLOTS))
}

/// Element gradients and element means of the first-order functions.
struct FirstOrderElementwise {
    // gm[a][e] = grad M_a
    gm: [Vec<[f64; 2]>; 2],
    mm: [Vec<f64>; 2],
    // gn[a][m][e] = d_l N^a_{km} as [k][l]
    gn: [[Vec<Mat2>; 2]; 2],
    mn: [[Vec<[f64; 2]>; 2]; 2],
    gp: Vec<Mat2>,
    mp: Vec<[f64; 2]>,
}

impl FirstOrderElementwise {
    fn new(mesh: &TriMesh, set: &CellFunctionSet) -> Result<Self> {
        let zeros = vec![0.0; 2 * mesh.node_count()];
        let vals = |f: CellFn| set.get(f).unwrap_or(&zeros[..mesh.node_count() * f.components()]);
        let scalar = |f: CellFn| -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
            Ok((element_gradients(mesh, vals(f), 1)?, element_means(mesh, vals(f), 1)))
        };
        let vector = |f: CellFn| -> Result<(Vec<Mat2>, Vec<[f64; 2]>)> {
            let g = element_gradients(mesh, vals(f), 2)?;
            let m = element_means(mesh, vals(f), 2);
            Ok((
                g.chunks(2).map(|c| [c[0], c[1]]).collect(),
                m.chunks(2).map(|c| [c[0], c[1]]).collect(),
            ))
        };
        let (gm0, mm0) = scalar(CellFn::M(0))?;
        let (gm1, mm1) = scalar(CellFn::M(1))?;
        let (g00, m00) = vector(CellFn::N(0, 0))?;
        let (g01, m01) = vector(CellFn::N(0, 1))?;
        let (g10, m10) = vector(CellFn::N(1, 0))?;
        let (g11, m11) = vector(CellFn::N(1, 1))?;
        let (gp, mp) = vector(CellFn::P)?;
        Ok(FirstOrderElementwise {
            gm: [gm0, gm1],
            mm: [mm0, mm1],
            gn: [[g00, g01], [g10, g11]],
            mn: [[m00, m01], [m10, m11]],
            gp,
            mp,
        })
    }
}

/// `sum_kl C_{i j k l} G_{k l}` for fixed `i`, `j`.
#[inline]
fn cg(c: &Tensor4, i: usize, j: usize, g: &Mat2) -> f64 {
    let mut s = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            s += c.0[i][j][k][l] * g[k][l];
        }
    }
    s
}

/// Solves every second-order problem at temperature `t` and stores the
/// results in `set`. `sens` is required when x-derivatives are realised by
/// the chain rule. Returns the number of linear solves.
pub fn solve_second_order(
    mesh: &TriMesh,
    laws: &Constituents,
    t: f64,
    set: &mut CellFunctionSet,
    eff: &EffectiveSample,
    sens: Option<&Sensitivity>,
    opts: &CellOptions,
) -> Result<usize> {
    let bc = Dirichlet::of(mesh);
    let d = ElementData::new(mesh, laws, t);
    let ne = mesh.element_count();
    let fo = FirstOrderElementwise::new(mesh, set)?;
    let dfo = match (opts.x_derivatives, sens) {
        (XDerivativeMode::ChainRule, Some(s)) => Some((FirstOrderElementwise::new(mesh, &s.functions)?, s.effective)),
        (XDerivativeMode::ChainRule, None) => {
            return Err(crate::Error::InvalidInput("chain-rule x-derivatives need temperature sensitivities".into()))
        }
        (XDerivativeMode::Drop, _) => None,
    };
    let mut solves = 0;

    let ks = scalar_solver(mesh, &d.k, &bc, &opts.solver)?;
    let mut scalar = |set: &mut CellFunctionSet, id: CellFn, g: Option<Vec<f64>>, f: Vec<[f64; 2]>| -> Result<()> {
        set.set(id, solve_scalar(mesh, &ks, &bc, g.as_deref(), Some(&f))?);
        solves += 1;
        Ok(())
    };

    let g: Vec<f64> = d.rho_c.iter().map(|rc| rc - eff.s_hat).collect();
    scalar(set, CellFn::S, Some(g), vec![[0.0; 2]; ne])?;

    for (s, &(a1, a2)) in SYM_PAIRS.iter().enumerate() {
        let mut g = vec![0.0; ne];
        let mut f = vec![[0.0; 2]; ne];
        for (x, y) in [(a1, a2), (a2, a1)] {
            for e in 0..ne {
                let k = &d.k[e];
                g[e] += 0.5 * (eff.k_hat[x][y] - k[x][y] - k[x][0] * fo.gm[y][e][0] - k[x][1] * fo.gm[y][e][1]);
                for i in 0..2 {
                    f[e][i] -= 0.5 * k[i][x] * fo.mm[y][e];
                }
            }
        }
        scalar(set, CellFn::M2(s), Some(g), f)?;
    }

    if let Some((dfo, deff)) = &dfo {
        for a1 in 0..2 {
            for gam in 0..2 {
                let mut g = vec![0.0; ne];
                let mut f = vec![[0.0; 2]; ne];
                for e in 0..ne {
                    let (k, dk) = (&d.k[e], &d.dk[e]);
                    g[e] = deff.k_hat[gam][a1] - dk[gam][a1]
                        - (0..2).map(|j| dk[gam][j] * fo.gm[a1][e][j] + k[gam][j] * dfo.gm[a1][e][j]).sum::<f64>();
                    for i in 0..2 {
                        f[e][i] = -k[i][gam] * dfo.mm[a1][e];
                    }
                }
                scalar(set, CellFn::R(a1, gam), Some(g), f)?;
            }
        }
    }

    for a1 in 0..2 {
        for a2 in 0..2 {
            let f: Vec<[f64; 2]> = (0..ne)
                .map(|e| {
                    let dk = &d.dk[e];
                    let m = fo.mm[a1][e];
                    [0, 1].map(|i| m * (dk[i][a2] + dk[i][0] * fo.gm[a2][e][0] + dk[i][1] * fo.gm[a2][e][1]))
                })
                .collect();
            scalar(set, CellFn::B(a1, a2), None, f)?;
        }
    }
    drop(ks);

    let cs = vector_solver(mesh, &d.c, &bc, &opts.solver)?;
    let mut vector = |set: &mut CellFunctionSet, id: CellFn, g: Option<Vec<[f64; 2]>>, f: Vec<Mat2>| -> Result<()> {
        set.set(id, solve_vector(mesh, &cs, &bc, g.as_deref(), Some(&f))?);
        solves += 1;
        Ok(())
    };

    for (s, &(a1, a2)) in SYM_PAIRS.iter().enumerate() {
        for m in 0..2 {
            let mut g = vec![[0.0; 2]; ne];
            let mut f = vec![[[0.0; 2]; 2]; ne];
            for (x, y) in [(a1, a2), (a2, a1)] {
                for e in 0..ne {
                    let c = &d.c[e];
                    for i in 0..2 {
                        g[e][i] += 0.5 * (eff.c_hat.0[i][x][m][y] - c.0[i][x][m][y] - cg(c, i, x, &fo.gn[y][m][e]));
                        for j in 0..2 {
                            f[e][i][j] -= 0.5 * (0..2).map(|k| c.0[i][j][k][x] * fo.mn[y][m][e][k]).sum::<f64>();
                        }
                    }
                }
            }
            vector(set, CellFn::N2(s, m), Some(g), f)?;
        }
    }

    if let Some((dfo, deff)) = &dfo {
        for a1 in 0..2 {
            for gam in 0..2 {
                for m in 0..2 {
                    let mut g = vec![[0.0; 2]; ne];
                    let mut f = vec![[[0.0; 2]; 2]; ne];
                    for e in 0..ne {
                        let (c, dc) = (&d.c[e], &d.dc[e]);
                        for i in 0..2 {
                            g[e][i] = deff.c_hat.0[i][gam][m][a1] - dc.0[i][gam][m][a1]
                                - cg(dc, i, gam, &fo.gn[a1][m][e])
                                - cg(c, i, gam, &dfo.gn[a1][m][e]);
                            for j in 0..2 {
                                f[e][i][j] = -(0..2).map(|k| c.0[i][j][k][gam] * dfo.mn[a1][m][e][k]).sum::<f64>();
                            }
                        }
                    }
                    vector(set, CellFn::Z(a1, gam, m), Some(g), f)?;
                }
            }
        }
        for gam in 0..2 {
            let mut g = vec![[0.0; 2]; ne];
            let mut f = vec![[[0.0; 2]; 2]; ne];
            for e in 0..ne {
                let (c, dc) = (&d.c[e], &d.dc[e]);
                for i in 0..2 {
                    g[e][i] = deff.beta_hat[i][gam] - d.dbeta[e][i][gam] - cg(dc, i, gam, &fo.gp[e]) - cg(c, i, gam, &dfo.gp[e]);
                    for j in 0..2 {
                        f[e][i][j] = -(0..2).map(|k| c.0[i][j][k][gam] * dfo.mp[e][k]).sum::<f64>();
                    }
                }
            }
            vector(set, CellFn::Q(gam), Some(g), f)?;
        }
    }

    for a1 in 0..2 {
        let mut g = vec![[0.0; 2]; ne];
        let mut f = vec![[[0.0; 2]; 2]; ne];
        for e in 0..ne {
            let c = &d.c[e];
            for i in 0..2 {
                g[e][i] = eff.beta_hat[i][a1] - d.beta[e][i][a1] - cg(c, i, a1, &fo.gp[e]);
                for j in 0..2 {
                    f[e][i][j] = -(0..2).map(|k| c.0[i][j][k][a1] * fo.mp[e][k]).sum::<f64>() - d.beta[e][i][j] * fo.mm[a1][e];
                }
            }
        }
        vector(set, CellFn::H(a1), Some(g), f)?;
    }

    for a1 in 0..2 {
        let f: Vec<Mat2> = (0..ne)
            .map(|e| {
                let m = fo.mm[a1][e];
                let mut out = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        out[i][j] = m * (d.dbeta[e][i][j] + cg(&d.dc[e], i, j, &fo.gp[e]));
                    }
                }
                out
            })
            .collect();
        vector(set, CellFn::W(a1), None, f)?;
    }

    for a1 in 0..2 {
        for a2 in 0..2 {
            for m in 0..2 {
                let f: Vec<Mat2> = (0..ne)
                    .map(|e| {
                        let dc = &d.dc[e];
                        let mm = fo.mm[a1][e];
                        let mut out = [[0.0; 2]; 2];
                        for i in 0..2 {
                            for j in 0..2 {
                                out[i][j] = mm * (dc.0[i][j][m][a2] + cg(dc, i, j, &fo.gn[a2][m][e]));
                            }
                        }
                        out
                    })
                    .collect();
                vector(set, CellFn::A(a1, a2, m), None, f)?;
            }
        }
    }
    Ok(solves)
}

/// All cell functions and effective coefficients of one sample over the
/// temperature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTables {
    pub seed: u64,
    pub mesh: TriMesh,
    pub grid: TemperatureGrid,
    pub functions: Vec<CellFunctionSet>,
    pub effective: Vec<EffectiveSample>,
}

fn flatten_first_order(set: &CellFunctionSet) -> Vec<f64> {
    set.slots[..FIRST_ORDER_SLOTS].concat()
}

fn unflatten_first_order(nodes: usize, flat: &[f64]) -> CellFunctionSet {
    let mut set = CellFunctionSet::empty(nodes);
    let mut off = 0;
    for f in CellFn::all().into_iter().take(FIRST_ORDER_SLOTS) {
        let len = nodes * f.components();
        set.set(f, flat[off..off + len].to_vec());
        off += len;
    }
    set
}

/// Finite-difference sensitivities over the grid for every temperature.
pub fn sample_sensitivities(
    grid: &TemperatureGrid,
    functions: &[CellFunctionSet],
    effective: &[EffectiveSample],
) -> Result<Vec<Sensitivity>> {
    let nodes = functions[0].nodes;
    let df = temperature_sensitivity(grid, &functions.iter().map(flatten_first_order).collect::<Vec<_>>())?;
    let de = temperature_sensitivity(grid, &effective.iter().map(EffectiveSample::to_flat).collect::<Vec<_>>())?;
    Ok(df
        .iter()
        .zip(&de)
        .zip(grid.values())
        .map(|((f, e), &t)| Sensitivity {
            functions: unflatten_first_order(nodes, f),
            effective: EffectiveSample::from_flat(t, &e[..FLAT_LEN]),
        })
        .collect())
}

/// Solves every cell problem of one sample at every grid temperature.
/// Returns the tables and the number of linear solves.
pub fn solve_sample(
    seed: u64,
    mesh: TriMesh,
    laws: &Constituents,
    grid: &TemperatureGrid,
    opts: &CellOptions,
) -> Result<(SampleTables, usize)> {
    let first: Vec<(CellFunctionSet, usize, EffectiveSample)> = grid
        .values()
        .par_iter()
        .map(|&t| {
            let (set, n) = solve_first_order(&mesh, laws, t, &opts.solver)?;
            let eff = effective_at(&mesh, laws, t, &set)?;
            Ok((set, n, eff))
        })
        .collect::<Result<_>>()?;
    let mut solves: usize = first.iter().map(|f| f.1).sum();
    let effective: Vec<EffectiveSample> = first.iter().map(|f| f.2).collect();
    let mut functions: Vec<CellFunctionSet> = first.into_iter().map(|f| f.0).collect();

    if opts.order == CellOrder::Second {
        let sens = match opts.x_derivatives {
            XDerivativeMode::ChainRule => Some(sample_sensitivities(grid, &functions, &effective)?),
            XDerivativeMode::Drop => None,
        };
        let counts: Vec<usize> = functions
            .par_iter_mut()
            .enumerate()
            .map(|(s, set)| {
                let t = grid.values()[s];
                solve_second_order(&mesh, laws, t, set, &effective[s], sens.as_ref().map(|v| &v[s]), opts)
            })
            .collect::<Result<_>>()?;
        solves += counts.iter().sum::<usize>();
    }
    Ok((SampleTables { seed, mesh, grid: grid.clone(), functions, effective }, solves))
}

/// Linear solves per temperature for the given options.
pub fn solves_per_temperature(opts: &CellOptions) -> usize {
    let second = match (opts.order, opts.x_derivatives) {
        (CellOrder::First, _) => 0,
        (CellOrder::Second, XDerivativeMode::ChainRule) => 40,
        (CellOrder::Second, XDerivativeMode::Drop) => 26,
    };
    FIRST_ORDER_SLOTS + second
}
