use crate::tensor::{young_poisson_plane_strain, Tensor4};

/// Reuss (harmonic) and Voigt (arithmetic) means for inclusion fraction `f`.
pub fn voigt_reuss_bounds(f: f64, p_matrix: f64, p_inclusion: f64) -> (f64, f64) {
    let upper = (1.0 - f) * p_matrix + f * p_inclusion;
    let lower = 1.0 / ((1.0 - f) / p_matrix + f / p_inclusion);
    (lower, upper)
}

/// Two-dimensional Hashin–Shtrikman bounds on the conductivity of a
/// two-phase medium with inclusion fraction `f`.
pub fn hashin_shtrikman_bounds(f: f64, k_matrix: f64, k_inclusion: f64) -> (f64, f64) {
    if k_matrix == k_inclusion {
        return (k_matrix, k_matrix);
    }
    let ((k1, f1), (k2, f2)) = if k_matrix < k_inclusion {
        ((k_matrix, 1.0 - f), (k_inclusion, f))
    } else {
        ((k_inclusion, f), (k_matrix, 1.0 - f))
    };
    let lower = k1 + f2 / (1.0 / (k2 - k1) + f1 / (2.0 * k1));
    let upper = k2 + f1 / (1.0 / (k1 - k2) + f2 / (2.0 * k2));
    (lower, upper)
}

/// Plane-strain `(E, nu)` of the isotropic tensor sharing the invariants
/// `C_iijj` and `C_ijij` with `c`.
pub fn isotropic_projection(c: &Tensor4) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            a += c.get(i, i, j, j);
            b += c.get(i, j, i, j);
        }
    }
    let mu = b / 4.0 - a / 8.0;
    let lambda = a / 4.0 - mu;
    young_poisson_plane_strain(lambda, mu)
}
