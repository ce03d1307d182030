//! Relative error norms between reconstructed and reference fields, and
//! their time series.

mod vtk;

pub use vtk::{write_mesh_vtk, write_vtk};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{element_gradients, integrate_with_field};
use crate::microgen::TriMesh;
use crate::reconstruct::FineField;
use crate::table::Table;

/// Below this a reference norm is treated as zero.
pub const MIN_REFERENCE_NORM: f64 = 1e-14;

/// L² norm and H¹ seminorm of a P1 field. For two-component fields the
/// seminorm is the strain seminorm `(∫ e(u):e(u))^½`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

impl FieldNorms {
    pub fn h1(&self) -> f64 {
        self.l2.hypot(self.h1_semi)
    }
}

pub fn field_norms(mesh: &TriMesh, values: &[f64], components: usize) -> Result<FieldNorms> {
    let l2 = integrate_with_field(mesh, values, components, |_, u| u.iter().map(|v| v * v).sum()).max(0.0).sqrt();
    let grads = element_gradients(mesh, values, components)?;
    let mut semi = 0.0;
    for e in 0..mesh.element_count() {
        let area = mesh.signed_area(e);
        let density = if components == 2 {
            let (g0, g1) = (grads[2 * e], grads[2 * e + 1]);
            let off = 0.5 * (g0[1] + g1[0]);
            g0[0] * g0[0] + g1[1] * g1[1] + 2.0 * off * off
        } else {
            (0..components).map(|c| grads[e * components + c]).map(|g| g[0] * g[0] + g[1] * g[1]).sum()
        };
        semi += area * density;
    }
    Ok(FieldNorms { l2, h1_semi: semi.sqrt() })
}

/// Relative errors of one field: `|a - b| / |b|` in each norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrors {
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
}

pub fn relative_errors(mesh: &TriMesh, values: &[f64], reference: &[f64], components: usize) -> Result<RelativeErrors> {
    let diff: Vec<f64> = values.iter().zip(reference).map(|(a, b)| a - b).collect();
    let d = field_norms(mesh, &diff, components)?;
    let r = field_norms(mesh, reference, components)?;
    for norm in [r.l2, r.h1_semi] {
        if norm < MIN_REFERENCE_NORM {
            return Err(Error::ZeroReference { norm });
        }
    }
    Ok(RelativeErrors { l2: d.l2 / r.l2, h1_semi: d.h1_semi / r.h1_semi, h1: d.h1() / r.h1() })
}

/// Temperature and displacement errors of one reconstruction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldErrors {
    pub temperature: RelativeErrors,
    pub displacement: RelativeErrors,
}

pub fn error_norms(mesh: &TriMesh, reconstructed: &FineField, reference: &FineField) -> Result<FieldErrors> {
    Ok(FieldErrors {
        temperature: relative_errors(mesh, &reconstructed.temperature.values, &reference.temperature.values, 1)?,
        displacement: relative_errors(mesh, &reconstructed.displacement.values, &reference.displacement.values, 2)?,
    })
}

/// Errors of the order-0, 1 and 2 reconstructions at one snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub step: usize,
    pub time: f64,
    pub orders: [FieldErrors; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub rows: Vec<ErrorRow>,
}

/// Column order of [`emit_series`].
pub fn series_headers() -> Vec<String> {
    let mut h = vec!["step".to_string(), "t".to_string()];
    for (name, _) in NORM_COLUMNS {
        for k in 0..3 {
            h.push(format!("{name}{k}"));
        }
    }
    h
}

type Pick = fn(&FieldErrors) -> f64;

const NORM_COLUMNS: [(&str, Pick); 6] = [
    ("Terr", |e| e.temperature.l2),
    ("TErr", |e| e.temperature.h1_semi),
    ("Uerr", |e| e.displacement.l2),
    ("UErr", |e| e.displacement.h1_semi),
    ("TH1err", |e| e.temperature.h1),
    ("UH1err", |e| e.displacement.h1),
];

/// One row per snapshot: `step, t`, then relative L² (`Terr*`, `Uerr*`),
/// H¹/strain seminorm (`TErr*`, `UErr*`) and full H¹ (`TH1err*`, `UH1err*`)
/// errors for orders 0, 1, 2.
pub fn emit_series(series: &ErrorSeries) -> Table {
    let mut table = Table::new(series_headers());
    for r in &series.rows {
        let mut row = vec![r.step as f64, r.time];
        for (_, pick) in NORM_COLUMNS {
            row.extend(r.orders.iter().map(pick));
        }
        table.push(row);
    }
    table
}

/// Inverse of [`emit_series`].
pub fn parse_series(table: &Table) -> Result<ErrorSeries> {
    if table.headers != series_headers() {
        return Err(Error::Parse { context: "error series".into(), message: "unexpected columns".into() });
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut orders = [FieldErrors::default(); 3];
            let col = |block: usize, k: usize| r[2 + 3 * block + k];
            for (k, o) in orders.iter_mut().enumerate() {
                o.temperature = RelativeErrors { l2: col(0, k), h1_semi: col(1, k), h1: col(4, k) };
                o.displacement = RelativeErrors { l2: col(2, k), h1_semi: col(3, k), h1: col(5, k) };
            }
            ErrorRow { step: r[0] as usize, time: r[1], orders }
        })
        .collect();
    Ok(ErrorSeries { rows })
}
