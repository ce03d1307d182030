use crate::error::Result;
use crate::fem::element_gradients;
use crate::material::Constituents;
use crate::microgen::TriMesh;
use crate::tensor::Mat2;

use super::FineField;

/// Element-wise heat flux, strain and stress of a fine field.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedFields {
    pub flux: Vec<[f64; 2]>,
    pub strain: Vec<Mat2>,
    pub stress: Vec<Mat2>,
}

/// `q = -k(T) grad T`, `e = sym grad u`, `s = C(T) grad u - beta(T) (T - T_ref)`
/// with the element's own constituent law at its mean temperature.
pub fn derived_fields(mesh: &TriMesh, field: &FineField, laws: &Constituents, reference_temperature: f64) -> Result<DerivedFields> {
    let gt = element_gradients(mesh, &field.temperature.values, 1)?;
    let gu = element_gradients(mesh, &field.displacement.values, 2)?;
    let ne = mesh.element_count();
    let mut out = DerivedFields { flux: Vec::with_capacity(ne), strain: Vec::with_capacity(ne), stress: Vec::with_capacity(ne) };
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let t = tri.iter().map(|&a| field.temperature.values[a]).sum::<f64>() / 3.0;
        let law = laws.law(mesh.material[e]);
        let k = law.conductivity(t);
        let g = gt[e];
        out.flux.push([-(k[0][0] * g[0] + k[0][1] * g[1]), -(k[1][0] * g[0] + k[1][1] * g[1])]);
        let grad: Mat2 = [gu[2 * e], gu[2 * e + 1]];
        let off = 0.5 * (grad[0][1] + grad[1][0]);
        out.strain.push([[grad[0][0], off], [off, grad[1][1]]]);
        let mut s = law.stiffness(t).contract(&grad);
        let beta = law.thermal_modulus(t);
        let theta = t - reference_temperature;
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] -= beta[i][j] * theta;
            }
        }
        out.stress.push(s);
    }
    Ok(out)
}
