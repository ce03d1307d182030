//! Small fixed-size tensors for 2D continuum mechanics.
//!
//! Fourth-order tensors are stored in full index form `c[i][j][k][l]`; the
//! Voigt ordering used for export and assembly is `(11, 22, 12)` with
//! engineering shear strain.

use serde::{Deserialize, Serialize};

pub type Mat2 = [[f64; 2]; 2];
pub type Voigt3 = [[f64; 3]; 3];

/// Voigt index pairs in `(11, 22, 12)` order.
pub const VOIGT_PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

pub const IDENTITY2: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mat2_scaled(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn mat2_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym2_eigenvalues(a: &Mat2) -> [f64; 2] {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let off = 0.5 * (a[0][1] + a[1][0]);
    let d = (0.25 * (a[0][0] - a[1][1]).powi(2) + off * off).sqrt();
    [m - d, m + d]
}

/// A fourth-order tensor over two dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor4(pub [[[[f64; 2]; 2]; 2]; 2]);

impl Default for Tensor4 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Tensor4 {
    pub fn zero() -> Self {
        Tensor4([[[[0.0; 2]; 2]; 2]; 2])
    }

    /// `lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk)`
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut c = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        c.0[i][j][k][l] =
                            lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        c
    }

    /// Plane-strain stiffness from Young's modulus and Poisson ratio.
    pub fn plane_strain(e: f64, nu: f64) -> Self {
        let (lambda, mu) = lame_plane_strain(e, nu);
        Self::isotropic(lambda, mu)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[i][j][k][l]
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        out.for_each_mut(|idx, v| *v += other.0[idx.0][idx.1][idx.2][idx.3]);
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        out.for_each_mut(|_, v| *v = f(*v));
        out
    }

    fn for_each_mut(&mut self, mut f: impl FnMut((usize, usize, usize, usize), &mut f64)) {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        f((i, j, k, l), &mut self.0[i][j][k][l]);
                    }
                }
            }
        }
    }

    /// `C_ijkl g_kl` for a (not necessarily symmetric) 2x2 gradient.
    pub fn contract(&self, g: &Mat2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        s += self.0[i][j][k][l] * g[k][l];
                    }
                }
                out[i][j] = s;
            }
        }
        out
    }

    pub fn to_voigt(&self) -> Voigt3 {
        let mut v = [[0.0; 3]; 3];
        for (a, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
            for (b, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
                v[a][b] = self.0[i][j][k][l];
            }
        }
        v
    }

    /// Expands a Voigt matrix assuming minor symmetries.
    pub fn from_voigt(v: &Voigt3) -> Self {
        let idx = |i: usize, j: usize| match (i, j) {
            (0, 0) => 0,
            (1, 1) => 1,
            _ => 2,
        };
        let mut c = Self::zero();
        c.for_each_mut(|(i, j, k, l), x| *x = v[idx(i, j)][idx(k, l)]);
        c
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        let mut c = *self;
        c.for_each_mut(|_, v| m = m.max(v.abs()));
        m
    }
}

/// Lame constants `(lambda, mu)` for plane strain.
pub fn lame_plane_strain(e: f64, nu: f64) -> (f64, f64) {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    (lambda, mu)
}

/// Inverse of [`lame_plane_strain`].
pub fn young_poisson_plane_strain(lambda: f64, mu: f64) -> (f64, f64) {
    let nu = lambda / (2.0 * (lambda + mu));
    (2.0 * mu * (1.0 + nu), nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_strain_round_trip() {
        let (l, m) = lame_plane_strain(350.0, 0.25);
        let (e, nu) = young_poisson_plane_strain(l, m);
        assert!((e - 350.0).abs() < 1e-12 && (nu - 0.25).abs() < 1e-15);
    }

    #[test]
    fn voigt_round_trip_and_symmetries() {
        let c = Tensor4::plane_strain(2.0, 0.3);
        let v = c.to_voigt();
        assert_eq!(Tensor4::from_voigt(&v), c);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(c.get(i, j, k, l), c.get(j, i, k, l));
                        assert_eq!(c.get(i, j, k, l), c.get(k, l, i, j));
                    }
                }
            }
        }
        assert_eq!(v[2][2], c.get(0, 1, 0, 1));
    }

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        assert_eq!(sym2_eigenvalues(&[[3.0, 0.0], [0.0, 1.0]]), [1.0, 3.0]);
        let e = sym2_eigenvalues(&[[2.0, 1.0], [1.0, 2.0]]);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }
}
