use std::f64::consts::PI;

use proptest::prelude::*;
use thermoscale::fem::*;
use thermoscale::microgen::{side, GridLayout, TriMesh};
use thermoscale::tensor::{Tensor4, IDENTITY2};

fn poisson_errors(n: usize) -> (f64, f64) {
    let mesh = TriMesh::structured(GridLayout::unit_square(n));
    let exact = |p: [f64; 2]| (PI * p[0]).sin() * (PI * p[1]).sin();
    let a = assemble_diffusion(&mesh, &vec![IDENTITY2; mesh.element_count()]).unwrap();
    let m = assemble_mass(&mesh, &vec![1.0; mesh.element_count()], false).unwrap();
    let f: Vec<f64> = mesh.nodes.iter().map(|&p| 2.0 * PI * PI * exact(p)).collect();
    let mut sys = SparseSystem::new(a, m.mul_vec(&f));
    let fixed: Vec<usize> = mesh.boundary_nodes().collect();
    apply_dirichlet(&mut sys, &fixed, &vec![0.0; fixed.len()]);
    let u = solve_spd(&sys, 1e-12, 10_000).unwrap();
    let l2 = integrate_with_field(&mesh, &u, 1, |x, v| (v[0] - exact(x)).powi(2)).sqrt();
    let grads = element_gradients(&mesh, &u, 1).unwrap();
    let mut h1 = 0.0;
    for (e, g) in grads.iter().enumerate() {
        let c = mesh.centroid(e);
        let ex = [PI * (PI * c[0]).cos() * (PI * c[1]).sin(), PI * (PI * c[0]).sin() * (PI * c[1]).cos()];
        h1 += mesh.signed_area(e) * ((g[0] - ex[0]).powi(2) + (g[1] - ex[1]).powi(2));
    }
    (l2, h1.sqrt())
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let ns = [16, 32, 64];
    let errs: Vec<(f64, f64)> = ns.iter().map(|&n| poisson_errors(n)).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = ns.iter().zip(&errs).map(|(&n, e)| ((1.0 / n as f64).ln(), e.0.ln())).unzip();
    let mx = x.iter().sum::<f64>() / 3.0;
    let my = y.iter().sum::<f64>() / 3.0;
    let slope: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() <= 0.2, "L2 rate {slope}");
    assert!(errs[0].1 > errs[1].1 && errs[1].1 > errs[2].1, "energy error not decreasing: {errs:?}");
}

#[test]
fn dirichlet_linear_field_is_reproduced() {
    let mesh = TriMesh::structured(GridLayout::unit_square(9));
    let lin = |p: [f64; 2]| 2.0 - 0.5 * p[0] + 3.0 * p[1];
    let k = vec![[[2.0, 0.5], [0.5, 1.0]]; mesh.element_count()];
    let mut sys = SparseSystem::new(assemble_diffusion(&mesh, &k).unwrap(), vec![0.0; mesh.node_count()]);
    let fixed: Vec<usize> = mesh.boundary_nodes().collect();
    let vals: Vec<f64> = fixed.iter().map(|&a| lin(mesh.nodes[a])).collect();
    apply_dirichlet(&mut sys, &fixed, &vals);
    let u = solve_spd(&sys, 1e-14, 1000).unwrap();
    for (a, p) in mesh.nodes.iter().enumerate() {
        assert!((u[a] - lin(*p)).abs() < 1e-10);
    }
}

#[test]
fn diffusion_patch_test_with_flux_load() {
    // u = x1 with unit conductivity: natural flux +1 on the right, -1 on the left
    let mesh = TriMesh::structured(GridLayout::unit_square(6));
    let a = assemble_diffusion(&mesh, &vec![IDENTITY2; mesh.element_count()]).unwrap();
    let u: Vec<f64> = mesh.nodes.iter().map(|p| p[0]).collect();
    let flux = edge_load(&mesh, &mesh.boundary_edges(), 1, |_, s, v| {
        v[0] = match s {
            side::RIGHT => 1.0,
            side::LEFT => -1.0,
            _ => 0.0,
        }
    });
    let r = a.mul_vec(&u);
    for (ri, fi) in r.iter().zip(&flux) {
        assert!((ri - fi).abs() < 1e-12);
    }
}

#[test]
fn elasticity_uniaxial_patch_test() {
    // u = (e x1, 0) on a homogeneous square under matching tractions
    let mesh = TriMesh::structured(GridLayout::unit_square(5));
    let c = Tensor4::plane_strain(10.0, 0.3);
    let strain = 1e-3;
    let sigma = c.contract(&[[strain, 0.0], [0.0, 0.0]]);
    let k = assemble_elasticity(&mesh, &vec![c; mesh.element_count()]).unwrap();
    let rhs = edge_load(&mesh, &mesh.boundary_edges(), 2, |_, s, t| {
        let n = match s {
            side::LEFT => [-1.0, 0.0],
            side::RIGHT => [1.0, 0.0],
            side::BOTTOM => [0.0, -1.0],
            _ => [0.0, 1.0],
        };
        for i in 0..2 {
            t[i] = sigma[i][0] * n[0] + sigma[i][1] * n[1];
        }
    });
    let mut sys = SparseSystem::new(k, rhs);
    // pin rigid motions: origin fully, (1, 0) vertically
    let origin = mesh.layout.node_index(0, 0);
    let corner = mesh.layout.node_index(mesh.layout.nx, 0);
    apply_dirichlet(&mut sys, &[2 * origin, 2 * origin + 1, 2 * corner + 1], &[0.0, 0.0, 0.0]);
    let u = solve_system(sys, &SolverOptions { kind: SolverKind::Direct, ..Default::default() }).unwrap();
    for (a, p) in mesh.nodes.iter().enumerate() {
        assert!((u[2 * a] - strain * p[0]).abs() < 1e-12, "node {a}");
        assert!(u[2 * a + 1].abs() < 1e-12);
    }
}

#[test]
fn direct_and_iterative_solves_agree_on_elasticity() {
    let mesh = TriMesh::structured(GridLayout::unit_square(12));
    let c: Vec<Tensor4> = (0..mesh.element_count())
        .map(|e| Tensor4::plane_strain(if e % 3 == 0 { 5.0 } else { 1.0 }, 0.3))
        .collect();
    let mut sys = SparseSystem::new(assemble_elasticity(&mesh, &c).unwrap(), vec![1.0; 2 * mesh.node_count()]);
    let fixed = node_dofs(&mesh.boundary_nodes().collect::<Vec<_>>(), 2);
    apply_dirichlet(&mut sys, &fixed, &vec![0.0; fixed.len()]);
    let cg = solve_spd(&sys, 1e-12, 10_000).unwrap();
    let direct = BandCholesky::factor(&sys.matrix).unwrap().solve(&sys.rhs);
    let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(cg.iter().zip(&direct).all(|(a, b)| (a - b).abs() < 1e-9 * scale));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solution_is_invariant_under_dof_permutation(seed in 0u64..1000, n in 3usize..8) {
        let mesh = TriMesh::structured(GridLayout::unit_square(n));
        let k: Vec<_> = (0..mesh.element_count())
            .map(|e| if (e as u64 + seed) % 4 == 0 { [[5.0, 0.0], [0.0, 5.0]] } else { IDENTITY2 })
            .collect();
        let rhs: Vec<f64> = (0..mesh.node_count()).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
        let mut sys = SparseSystem::new(assemble_diffusion(&mesh, &k).unwrap(), rhs);
        let fixed: Vec<usize> = mesh.nodes_on(side::LEFT);
        apply_dirichlet(&mut sys, &fixed, &vec![0.0; fixed.len()]);
        let x = solve_spd(&sys, 1e-12, 10_000).unwrap();

        // reverse the dof order and solve again
        let nn = sys.dimension();
        let dense = sys.matrix.to_dense();
        let perm: Vec<usize> = (0..nn).rev().collect();
        let pd: Vec<Vec<f64>> = perm.iter().map(|&i| perm.iter().map(|&j| dense[i][j]).collect()).collect();
        let prhs: Vec<f64> = perm.iter().map(|&i| sys.rhs[i]).collect();
        let y = solve_spd(&SparseSystem::new(CsrMatrix::from_dense(&pd), prhs), 1e-12, 10_000).unwrap();
        let scale = x.iter().fold(1e-30f64, |m, v| m.max(v.abs()));
        for (pi, &i) in perm.iter().enumerate() {
            prop_assert!((y[pi] - x[i]).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn assembled_matrices_are_symmetric(n in 1usize..7, k11 in 0.1f64..10.0, k22 in 0.1f64..10.0, e in 0.5f64..5.0, nu in 0.05f64..0.45) {
        let mesh = TriMesh::structured(GridLayout::unit_square(n));
        let off = 0.5 * (k11 * k22).sqrt();
        let a = assemble_diffusion(&mesh, &vec![[[k11, off], [off, k22]]; mesh.element_count()]).unwrap();
        prop_assert!(a.asymmetry() < 1e-12);
        let b = assemble_elasticity(&mesh, &vec![Tensor4::plane_strain(e, nu); mesh.element_count()]).unwrap();
        prop_assert!(b.asymmetry() < 1e-12);
        for i in 0..a.n {
            prop_assert!(a.row(i).map(|(_, v)| v).sum::<f64>().abs() < 1e-10 * (k11 + k22));
        }
    }
}
