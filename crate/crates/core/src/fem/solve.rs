use serde::{Deserialize, Serialize};

use super::sparse::{CsrMatrix, SparseSystem};
use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 20_000;

/// Band storage budget (in entries) under which `Auto` factorizes directly.
pub const AUTO_DIRECT_LIMIT: usize = 12_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Auto,
    Cg,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { kind: SolverKind::Auto, rel_tol: DEFAULT_REL_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = a.n;
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgStats::default()));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = a.mul_vec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / bnorm;
    for it in 0..max_iter {
        if res <= rel_tol {
            return Ok((x, CgStats { iterations: it, relative_residual: res }));
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: it, value: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
    }
    if res <= rel_tol {
        return Ok((x, CgStats { iterations: max_iter, relative_residual: res }));
    }
    Err(Error::NoConvergence { max_iter, residual: res })
}

/// Solves an SPD system by preconditioned conjugate gradients.
pub fn solve_spd(system: &SparseSystem, rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    pcg(&system.matrix, &system.rhs, None, rel_tol, max_iter).map(|(x, _)| x)
}

/// Dot product with four independent partial sums.
#[inline]
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Cholesky factor of a symmetric banded matrix, `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // row i holds L[i][i-bw ..= i]
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    band[i * w + (j + bw - i)] = v;
                }
            }
        }
        for i in 0..n {
            let i0 = i.saturating_sub(bw);
            let ri = i * w + bw - i;
            for j in i0..=i {
                let k0 = i0.max(j.saturating_sub(bw));
                let rj = j * w + bw - j;
                let s = band[ri + j] - dot4(&band[ri + k0..ri + j], &band[rj + k0..rj + j]);
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { index: i, value: s });
                    }
                    band[ri + i] = s.sqrt();
                } else {
                    band[ri + j] = s / band[rj + j];
                }
            }
        }
        Ok(BandCholesky { n, bw, band })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let ri = i * w + bw - i;
            let k0 = i.saturating_sub(bw);
            y[i] = (y[i] - dot4(&self.band[ri + k0..ri + i], &y[k0..i])) / self.band[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * w + bw - i;
            y[i] /= self.band[ri + i];
            let yi = y[i];
            let k0 = i.saturating_sub(bw);
            for (yk, l) in y[k0..i].iter_mut().zip(&self.band[ri + k0..ri + i]) {
                *yk -= l * yi;
            }
        }
        y
    }
}

/// A matrix prepared for repeated solves with different right-hand sides.
#[derive(Clone, Debug)]
pub enum PreparedSolver {
    Direct(BandCholesky),
    Cg { matrix: CsrMatrix, rel_tol: f64, max_iter: usize },
}

impl PreparedSolver {
    pub fn new(matrix: CsrMatrix, options: &SolverOptions) -> Result<Self> {
        let direct = match options.kind {
            SolverKind::Direct => true,
            SolverKind::Cg => false,
            SolverKind::Auto => matrix.n * (matrix.bandwidth() + 1) <= AUTO_DIRECT_LIMIT,
        };
        if direct {
            BandCholesky::factor(&matrix).map(PreparedSolver::Direct)
        } else {
            Ok(PreparedSolver::Cg { matrix, rel_tol: options.rel_tol, max_iter: options.max_iter })
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_from(b, None)
    }

    /// Solve with an optional starting guess (used by iterative solves only).
    pub fn solve_from(&self, b: &[f64], x0: Option<&[f64]>) -> Result<Vec<f64>> {
        match self {
            PreparedSolver::Direct(f) => Ok(f.solve(b)),
            PreparedSolver::Cg { matrix, rel_tol, max_iter } => {
                pcg(matrix, b, x0, *rel_tol, *max_iter).map(|(x, _)| x)
            }
        }
    }
}

/// One-shot solve of a system with the configured method.
pub fn solve_system(system: SparseSystem, options: &SolverOptions) -> Result<Vec<f64>> {
    PreparedSolver::new(system.matrix, options)?.solve(&system.rhs)
}
