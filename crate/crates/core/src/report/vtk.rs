use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::microgen::TriMesh;
use crate::reconstruct::{DerivedFields, FineField};

/// Legacy ASCII VTK unstructured grid with point data `T`, `u` and cell data
/// `material` plus, when given, `q`, strain and stress components.
pub fn write_vtk(path: &Path, mesh: &TriMesh, field: &FineField, derived: Option<&DerivedFields>) -> Result<()> {
    let mut s = grid_section(mesh, "thermoscale field");
    let np = mesh.node_count();
    let _ = writeln!(s, "POINT_DATA {np}\nSCALARS T double 1\nLOOKUP_TABLE default");
    for v in &field.temperature.values {
        let _ = writeln!(s, "{v:.16e}");
    }
    s.push_str("VECTORS u double\n");
    for u in field.displacement.values.chunks_exact(2) {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", u[0], u[1]);
    }
    material_section(&mut s, mesh);
    if let Some(d) = derived {
        s.push_str("VECTORS q double\n");
        for q in &d.flux {
            let _ = writeln!(s, "{:.16e} {:.16e} 0", q[0], q[1]);
        }
        for (name, data) in [("strain", &d.strain), ("stress", &d.stress)] {
            for (label, (i, j)) in [("11", (0, 0)), ("12", (0, 1)), ("22", (1, 1))] {
                let _ = writeln!(s, "SCALARS {name}{label} double 1\nLOOKUP_TABLE default");
                for m in data.iter() {
                    let _ = writeln!(s, "{:.16e}", m[i][j]);
                }
            }
        }
    }
    write_text(path, s)
}

/// Mesh with its material tags only.
pub fn write_mesh_vtk(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut s = grid_section(mesh, "thermoscale mesh");
    material_section(&mut s, mesh);
    write_text(path, s)
}

fn material_section(s: &mut String, mesh: &TriMesh) {
    let _ = writeln!(s, "CELL_DATA {}\nSCALARS material int 1\nLOOKUP_TABLE default", mesh.element_count());
    for m in &mesh.material {
        let _ = writeln!(s, "{m}");
    }
}

fn write_text(path: &Path, s: String) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn grid_section(mesh: &TriMesh, title: &str) -> String {
    let mut s = String::new();
    let (np, ne) = (mesh.node_count(), mesh.element_count());
    let _ = write!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {np} double");
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {ne} {}", 4 * ne);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("5\n");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{NodalField, Unit};
    use crate::microgen::GridLayout;

    #[test]
    fn writes_consistent_counts() {
        let mesh = TriMesh::structured(GridLayout::unit_square(2));
        let field = FineField {
            temperature: NodalField::zeros(9, 1, Unit::Kelvin),
            displacement: NodalField::zeros(9, 2, Unit::Length),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.vtk");
        write_vtk(&path, &mesh, &field, None).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("CELLS 8 32"));
        assert_eq!(text.lines().filter(|l| *l == "5").count(), 8);
        write_mesh_vtk(&path, &mesh).unwrap();
        assert!(std::fs::read_to_string(path).unwrap().contains("CELL_DATA 8"));
    }
}
