//! Effective coefficients of single samples, Monte Carlo ensemble averages,
//! and analytic bounds.

mod bounds;

pub use bounds::{hashin_shtrikman_bounds, isotropic_projection, voigt_reuss_bounds};

use serde::{Deserialize, Serialize};

use crate::cell::{CellFn, CellFunctionSet, TemperatureGrid};
use crate::error::{Error, Result};
use crate::fem::element_gradients;
use crate::material::{Constituents, MaterialLaw};
use crate::microgen::TriMesh;
use crate::table::Table;
use crate::tensor::{sym2_eigenvalues, Mat2, Tensor4, VOIGT_PAIRS};

/// Number of scalars in [`EffectiveSample::to_flat`].
pub const FLAT_LEN: usize = 25;

/// Effective heat capacity, conductivity, stiffness and thermal modulus at
/// one temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSample {
    pub temperature: f64,
    pub s_hat: f64,
    pub k_hat: Mat2,
    pub c_hat: Tensor4,
    pub beta_hat: Mat2,
}

impl EffectiveSample {
    /// Coefficients of a single constituent.
    pub fn of_law(law: &MaterialLaw, t: f64) -> Self {
        EffectiveSample {
            temperature: t,
            s_hat: law.heat_capacity(t),
            k_hat: law.conductivity(t),
            c_hat: law.stiffness(t),
            beta_hat: law.thermal_modulus(t),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(FLAT_LEN);
        v.push(self.s_hat);
        v.extend(self.k_hat.iter().flatten());
        v.extend(self.c_hat.0.iter().flatten().flatten().flatten());
        v.extend(self.beta_hat.iter().flatten());
        v
    }

    pub fn from_flat(temperature: f64, v: &[f64]) -> Self {
        assert_eq!(v.len(), FLAT_LEN);
        let m = |o: usize| [[v[o], v[o + 1]], [v[o + 2], v[o + 3]]];
        let mut c = Tensor4::zero();
        for (n, x) in v[5..21].iter().enumerate() {
            c.0[n >> 3][(n >> 2) & 1][(n >> 1) & 1][n & 1] = *x;
        }
        EffectiveSample { temperature, s_hat: v[0], k_hat: m(1), c_hat: c, beta_hat: m(21) }
    }

    /// Componentwise `a + w (b - a)`.
    pub fn lerp(a: &Self, b: &Self, w: f64) -> Self {
        let (fa, fb) = (a.to_flat(), b.to_flat());
        let f: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x + w * (y - x)).collect();
        Self::from_flat(a.temperature + w * (b.temperature - a.temperature), &f)
    }

    /// Mean of the conductivity eigenvalues.
    pub fn k_eigen_mean(&self) -> f64 {
        let e = sym2_eigenvalues(&self.k_hat);
        0.5 * (e[0] + e[1])
    }
}

/// Volume averages of the effective-coefficient integrands over the cell,
/// using the first-order functions solved on the same mesh.
pub fn effective_at(mesh: &TriMesh, laws: &Constituents, t: f64, first: &CellFunctionSet) -> Result<EffectiveSample> {
    let ne = mesh.element_count();
    let zeros = vec![0.0; 2 * mesh.node_count()];
    let grad = |f: CellFn| -> Result<Vec<[f64; 2]>> {
        let vals = first.get(f).unwrap_or(&zeros[..mesh.node_count() * f.components()]);
        element_gradients(mesh, vals, f.components())
    };
    let gm = [grad(CellFn::M(0))?, grad(CellFn::M(1))?];
    // gn[a][m][e * 2 + k] = grad of component k of N^a_{.m}
    let gn = [
        [grad(CellFn::N(0, 0))?, grad(CellFn::N(0, 1))?],
        [grad(CellFn::N(1, 0))?, grad(CellFn::N(1, 1))?],
    ];
    let gp = grad(CellFn::P)?;

    let mut s_hat = 0.0;
    let mut k_hat = [[0.0; 2]; 2];
    let mut c_hat = Tensor4::zero();
    let mut beta_hat = [[0.0; 2]; 2];
    let mut total = 0.0;
    for e in 0..ne {
        let law = laws.law(mesh.material[e]);
        let area = mesh.signed_area(e);
        total += area;
        let k = law.conductivity(t);
        let c = law.stiffness(t);
        let beta = law.thermal_modulus(t);
        s_hat += area * law.heat_capacity(t);
        for i in 0..2 {
            for j in 0..2 {
                let mut v = k[i][j];
                for m in 0..2 {
                    v += k[i][m] * gm[j][e][m];
                }
                k_hat[i][j] += area * v;

                let mut b = beta[i][j];
                for kk in 0..2 {
                    for l in 0..2 {
                        b += c.0[i][j][kk][l] * gp[2 * e + kk][l];
                    }
                }
                beta_hat[i][j] += area * b;

                for m in 0..2 {
                    for a in 0..2 {
                        let mut v = c.0[i][j][m][a];
                        for kk in 0..2 {
                            for l in 0..2 {
                                v += c.0[i][j][kk][l] * gn[a][m][2 * e + kk][l];
                            }
                        }
                        c_hat.0[i][j][m][a] += area * v;
                    }
                }
            }
        }
    }
    let inv = 1.0 / total;
    Ok(EffectiveSample {
        temperature: t,
        s_hat: s_hat * inv,
        k_hat: k_hat.map(|r| r.map(|v| v * inv)),
        c_hat: c_hat.scaled(inv),
        beta_hat: beta_hat.map(|r| r.map(|v| v * inv)),
    })
}

/// Arithmetic mean and unbiased standard deviation, componentwise, summed in
/// sample order.
pub fn ensemble_average(samples: &[EffectiveSample]) -> Result<(EffectiveSample, EffectiveSample)> {
    let first = samples.first().ok_or(Error::EmptySampleSet)?;
    let m = samples.len() as f64;
    let flats: Vec<Vec<f64>> = samples.iter().map(EffectiveSample::to_flat).collect();
    let mut mean = vec![0.0; FLAT_LEN];
    for f in &flats {
        for (a, b) in mean.iter_mut().zip(f) {
            *a += b;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    let mut var = vec![0.0; FLAT_LEN];
    if samples.len() > 1 {
        for f in &flats {
            for ((a, b), mu) in var.iter_mut().zip(f).zip(&mean) {
                *a += (b - mu) * (b - mu);
            }
        }
        var.iter_mut().for_each(|v| *v = (*v / (m - 1.0)).sqrt());
    }
    let t = first.temperature;
    Ok((EffectiveSample::from_flat(t, &mean), EffectiveSample::from_flat(t, &var)))
}

/// Ensemble-averaged effective coefficients on a temperature grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTable {
    pub grid: TemperatureGrid,
    pub mean: Vec<EffectiveSample>,
    pub std_dev: Vec<EffectiveSample>,
    pub sample_count: usize,
}

impl EffectiveTable {
    /// `per_sample[s][t]` is sample `s` at grid point `t`.
    pub fn from_samples(grid: TemperatureGrid, per_sample: &[Vec<EffectiveSample>]) -> Result<Self> {
        if per_sample.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let mut mean = Vec::with_capacity(grid.len());
        let mut std_dev = Vec::with_capacity(grid.len());
        for t in 0..grid.len() {
            let column: Vec<EffectiveSample> = per_sample.iter().map(|s| s[t]).collect();
            let (m, s) = ensemble_average(&column)?;
            mean.push(m);
            std_dev.push(s);
        }
        Ok(EffectiveTable { grid, mean, std_dev, sample_count: per_sample.len() })
    }

    /// Table of constituent values, as if the medium were homogeneous.
    pub fn of_law(law: &MaterialLaw, grid: TemperatureGrid) -> Self {
        let mean: Vec<EffectiveSample> = grid.values().iter().map(|&t| EffectiveSample::of_law(law, t)).collect();
        let std_dev = mean.iter().map(|m| EffectiveSample::from_flat(m.temperature, &[0.0; FLAT_LEN])).collect();
        EffectiveTable { grid, mean, std_dev, sample_count: 1 }
    }

    /// Piecewise-linear interpolation in temperature; the flag reports
    /// clamping at the grid ends.
    pub fn at(&self, t: f64) -> (EffectiveSample, bool) {
        let b = self.grid.bracket(t);
        if self.grid.len() == 1 {
            return (self.mean[0], b.clamped);
        }
        let mut s = EffectiveSample::lerp(&self.mean[b.lower], &self.mean[b.lower + 1], b.weight);
        s.temperature = t;
        (s, b.clamped)
    }

    pub fn to_table(&self) -> Table {
        let mut headers = vec!["T".to_string()];
        let names = column_names();
        headers.extend(names.iter().cloned());
        headers.extend(names.iter().map(|n| format!("std_{n}")));
        headers.extend(["k_eig_mean", "E_iso", "nu_iso"].map(String::from));
        let mut table = Table::new(headers);
        for (m, s) in self.mean.iter().zip(&self.std_dev) {
            let mut row = vec![m.temperature];
            row.extend(columns(m));
            row.extend(columns(s));
            let (e, nu) = isotropic_projection(&m.c_hat);
            row.extend([m.k_eigen_mean(), e, nu]);
            table.push(row);
        }
        table
    }
}

fn column_names() -> Vec<String> {
    let mut v = vec!["S".to_string(), "k11".into(), "k12".into(), "k22".into()];
    let idx = |(i, j): (usize, usize)| format!("{}{}", i + 1, j + 1);
    for a in 0..3 {
        for b in a..3 {
            v.push(format!("C{}{}", idx(VOIGT_PAIRS[a]), idx(VOIGT_PAIRS[b])));
        }
    }
    v.extend(["b11", "b12", "b22"].map(String::from));
    v
}

fn columns(s: &EffectiveSample) -> Vec<f64> {
    let mut v = vec![s.s_hat, s.k_hat[0][0], s.k_hat[0][1], s.k_hat[1][1]];
    let voigt = s.c_hat.to_voigt();
    for a in 0..3 {
        for b in a..3 {
            v.push(voigt[a][b]);
        }
    }
    v.extend([s.beta_hat[0][0], s.beta_hat[0][1], s.beta_hat[1][1]]);
    v
}

/// Bounds on the conductivity and stiffness of a two-phase medium with
/// inclusion fraction `fraction`, alongside the computed effective values.
pub fn bounds_table(table: &EffectiveTable, laws: &Constituents, fraction: f64) -> Table {
    let mut out = Table::new([
        "T",
        "fraction",
        "k_matrix",
        "k_inclusion",
        "k_reuss",
        "k_voigt",
        "k_hs_lower",
        "k_hs_upper",
        "k_eig_mean",
        "E_reuss",
        "E_voigt",
        "E_iso",
    ]);
    for m in &table.mean {
        let t = m.temperature;
        let (km, ki) = (laws.law(0).k.eval(t), laws.law(1).k.eval(t));
        let (em, ei) = (laws.law(0).e.eval(t), laws.law(1).e.eval(t));
        let (kr, kv) = voigt_reuss_bounds(fraction, km, ki);
        let (hl, hu) = hashin_shtrikman_bounds(fraction, km, ki);
        let (er, ev) = voigt_reuss_bounds(fraction, em, ei);
        out.push(vec![t, fraction, km, ki, kr, kv, hl, hu, m.k_eigen_mean(), er, ev, isotropic_projection(&m.c_hat).0]);
    }
    out
}
