use serde::{Deserialize, Serialize};

use super::assembly::element_geometry;
use crate::error::Result;
use crate::microgen::TriMesh;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    Kelvin,
    Length,
    #[default]
    Dimensionless,
}

/// Node values with a fixed number of interleaved components per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalField {
    pub values: Vec<f64>,
    pub components: usize,
    pub unit: Unit,
}

impl NodalField {
    pub fn new(values: Vec<f64>, components: usize, unit: Unit) -> Self {
        assert!(components > 0 && values.len() % components == 0);
        NodalField { values, components, unit }
    }

    pub fn zeros(nodes: usize, components: usize, unit: Unit) -> Self {
        NodalField::new(vec![0.0; nodes * components], components, unit)
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.components..(node + 1) * self.components]
    }

    /// Values of one component in node order.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.components).copied().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Constant gradients of a P1 field per element, laid out as
/// `[e * components + c] = [d/dx1, d/dx2]`.
pub fn element_gradients(mesh: &TriMesh, values: &[f64], components: usize) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::with_capacity(mesh.element_count() * components);
    for (e, t) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, e)?;
        for c in 0..components {
            let mut d = [0.0; 2];
            for a in 0..3 {
                let v = values[t[a] * components + c];
                d[0] += v * g.grads[a][0];
                d[1] += v * g.grads[a][1];
            }
            out.push(d);
        }
    }
    Ok(out)
}

/// Nodal gradients by area-weighted averaging of the element gradients of
/// the incident triangles. Component `c` of the input maps to output
/// components `2c` and `2c + 1`.
pub fn recover_gradient(mesh: &TriMesh, field: &NodalField) -> Result<NodalField> {
    let nc = field.components;
    let grads = element_gradients(mesh, &field.values, nc)?;
    let mut sum = vec![0.0; mesh.node_count() * 2 * nc];
    let mut weight = vec![0.0; mesh.node_count()];
    for (e, t) in mesh.triangles.iter().enumerate() {
        let area = mesh.signed_area(e);
        for &a in t {
            weight[a] += area;
            for c in 0..nc {
                let g = grads[e * nc + c];
                sum[a * 2 * nc + 2 * c] += area * g[0];
                sum[a * 2 * nc + 2 * c + 1] += area * g[1];
            }
        }
    }
    for (a, w) in weight.iter().enumerate() {
        for v in &mut sum[a * 2 * nc..(a + 1) * 2 * nc] {
            *v /= w;
        }
    }
    Ok(NodalField::new(sum, 2 * nc, Unit::Dimensionless))
}

/// Mean of a P1 field over each element.
pub fn element_means(mesh: &TriMesh, values: &[f64], components: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(mesh.element_count() * components);
    for t in &mesh.triangles {
        for c in 0..components {
            out.push((values[t[0] * components + c] + values[t[1] * components + c] + values[t[2] * components + c]) / 3.0);
        }
    }
    out
}

/// Edge-midpoint quadrature (exact for quadratics) of `f(x, u_h(x))` over
/// the mesh, where `u_h` is the P1 interpolant of `values`.
pub fn integrate_with_field(
    mesh: &TriMesh,
    values: &[f64],
    components: usize,
    mut f: impl FnMut([f64; 2], &[f64]) -> f64,
) -> f64 {
    let mut total = 0.0;
    let mut u = vec![0.0; components];
    for (e, t) in mesh.triangles.iter().enumerate() {
        let area = mesh.signed_area(e);
        let mut s = 0.0;
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let (pa, pb) = (mesh.nodes[t[a]], mesh.nodes[t[b]]);
            let x = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            for (c, uc) in u.iter_mut().enumerate() {
                *uc = 0.5 * (values[t[a] * components + c] + values[t[b] * components + c]);
            }
            s += f(x, &u);
        }
        total += area * s / 3.0;
    }
    total
}
