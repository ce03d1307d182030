use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::microgen::TriMesh;
use crate::tensor::{Mat2, Tensor4};

/// Triangles smaller than this are rejected as degenerate.
pub const MIN_ELEMENT_AREA: f64 = 1e-14;

/// Area and constant shape-function gradients of one P1 triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

pub fn element_geometry(mesh: &TriMesh, e: usize) -> Result<ElementGeometry> {
    let [p0, p1, p2] = mesh.vertices(e);
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let area = 0.5 * det;
    if area < MIN_ELEMENT_AREA {
        return Err(Error::SingularElement { element: e, area });
    }
    let grads = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    Ok(ElementGeometry { area, grads })
}

pub fn mesh_geometry(mesh: &TriMesh) -> Result<Vec<ElementGeometry>> {
    (0..mesh.element_count()).map(|e| element_geometry(mesh, e)).collect()
}

/// P1 stiffness matrix of `-div(k grad u)` with element-constant `k`.
pub fn assemble_diffusion(mesh: &TriMesh, k: &[Mat2]) -> Result<CsrMatrix> {
    assert_eq!(k.len(), mesh.element_count());
    let mut a = CsrMatrix::from_mesh(mesh, 1);
    for (e, t) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, e)?;
        let ke = &k[e];
        for p in 0..3 {
            let kg = [
                ke[0][0] * g.grads[p][0] + ke[0][1] * g.grads[p][1],
                ke[1][0] * g.grads[p][0] + ke[1][1] * g.grads[p][1],
            ];
            for q in 0..3 {
                let v = g.area * (g.grads[q][0] * kg[0] + g.grads[q][1] * kg[1]);
                a.add(t[q], t[p], v);
            }
        }
    }
    Ok(a)
}

/// Vector P1 stiffness matrix of `-div(C : grad u)`; dofs are interleaved
/// `(node, component)` pairs.
pub fn assemble_elasticity(mesh: &TriMesh, c: &[Tensor4]) -> Result<CsrMatrix> {
    assert_eq!(c.len(), mesh.element_count());
    let mut a = CsrMatrix::from_mesh(mesh, 2);
    for (e, t) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, e)?;
        let ce = &c[e];
        for p in 0..3 {
            for q in 0..3 {
                for i in 0..2 {
                    for k in 0..2 {
                        let mut s = 0.0;
                        for j in 0..2 {
                            for l in 0..2 {
                                s += ce.0[i][j][k][l] * g.grads[p][j] * g.grads[q][l];
                            }
                        }
                        a.add(2 * t[p] + i, 2 * t[q] + k, g.area * s);
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Consistent (or row-lumped) P1 mass matrix weighted by an element constant.
pub fn assemble_mass(mesh: &TriMesh, coefficient: &[f64], lumped: bool) -> Result<CsrMatrix> {
    assert_eq!(coefficient.len(), mesh.element_count());
    let mut a = CsrMatrix::from_mesh(mesh, 1);
    for (e, t) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, e)?;
        let w = coefficient[e] * g.area / 12.0;
        for p in 0..3 {
            if lumped {
                a.add(t[p], t[p], 4.0 * w);
            } else {
                for q in 0..3 {
                    a.add(t[p], t[q], if p == q { 2.0 * w } else { w });
                }
            }
        }
    }
    Ok(a)
}

/// `∫ s v + ∫ F·∇v` for element-constant scalar source `s` and flux `F`.
pub fn scalar_load(mesh: &TriMesh, source: Option<&[f64]>, flux: Option<&[[f64; 2]]>) -> Result<Vec<f64>> {
    let mut b = vec![0.0; mesh.node_count()];
    for (e, t) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, e)?;
        for p in 0..3 {
            let mut v = 0.0;
            if let Some(s) = source {
                v += s[e] * g.area / 3.0;
            }
            if let Some(f) = flux {
                v += g.area * (f[e][0] * g.grads[p][0] + f[e][1] * g.grads[p][1]);
            }
            b[t[p]] += v;
        }
    }
    Ok(b)
}

/// `∫ s_i v_i + ∫ F_ij ∂_j v_i` for element-constant vector source and flux.
pub fn vector_load(mesh: &TriMesh, source: Option<&[[f64; 2]]>, flux: Option<&[Mat2]>) -> Result<Vec<f64>> {
    let mut b = vec![0.0; 2 * mesh.node_count()];
    for (e, t) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, e)?;
        for p in 0..3 {
            for i in 0..2 {
                let mut v = 0.0;
                if let Some(s) = source {
                    v += s[e][i] * g.area / 3.0;
                }
                if let Some(f) = flux {
                    v += g.area * (f[e][i][0] * g.grads[p][0] + f[e][i][1] * g.grads[p][1]);
                }
                b[2 * t[p] + i] += v;
            }
        }
    }
    Ok(b)
}

/// `∫_Γ g v` over boundary edges with `components` values per edge, using
/// the midpoint value of `g`.
pub fn edge_load(
    mesh: &TriMesh,
    edges: &[(usize, usize, u8)],
    components: usize,
    mut g: impl FnMut([f64; 2], u8, &mut [f64]),
) -> Vec<f64> {
    let mut b = vec![0.0; components * mesh.node_count()];
    let mut val = vec![0.0; components];
    for &(n0, n1, side) in edges {
        let (p0, p1) = (mesh.nodes[n0], mesh.nodes[n1]);
        let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
        let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
        val.iter_mut().for_each(|v| *v = 0.0);
        g(mid, side, &mut val);
        for c in 0..components {
            b[components * n0 + c] += 0.5 * len * val[c];
            b[components * n1 + c] += 0.5 * len * val[c];
        }
    }
    b
}
