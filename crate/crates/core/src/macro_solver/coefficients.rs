use std::sync::atomic::{AtomicBool, Ordering};

use crate::effective::EffectiveTable;
use crate::material::Constituents;
use crate::tensor::{Mat2, Tensor4};

/// Element-wise coefficients of the thermo-mechanical equations at a given
/// element temperature.
pub trait CoefficientProvider {
    /// `(rho c, k)`.
    fn thermal(&self, element: usize, t: f64) -> (f64, Mat2);
    /// `(C, beta)`.
    fn mechanical(&self, element: usize, t: f64) -> (Tensor4, Mat2);
}

/// Effective coefficients interpolated linearly in temperature. Outside the
/// grid the end values are used and a warning is logged once.
#[derive(Debug)]
pub struct CoeffInterpolator {
    table: EffectiveTable,
    warned: AtomicBool,
}

impl CoeffInterpolator {
    pub fn new(table: EffectiveTable) -> Self {
        CoeffInterpolator { table, warned: AtomicBool::new(false) }
    }

    pub fn table(&self) -> &EffectiveTable {
        &self.table
    }

    pub fn clamped(&self) -> bool {
        self.warned.load(Ordering::Relaxed)
    }

    fn sample(&self, t: f64) -> crate::effective::EffectiveSample {
        let (s, clamped) = self.table.at(t);
        if clamped && !self.warned.swap(true, Ordering::Relaxed) {
            log::warn!(
                "temperature {t:.3} K outside [{}, {}]; coefficients clamped to the grid ends",
                self.table.grid.min(),
                self.table.grid.max()
            );
        }
        s
    }
}

impl CoefficientProvider for CoeffInterpolator {
    fn thermal(&self, _element: usize, t: f64) -> (f64, Mat2) {
        let s = self.sample(t);
        (s.s_hat, s.k_hat)
    }

    fn mechanical(&self, _element: usize, t: f64) -> (Tensor4, Mat2) {
        let s = self.sample(t);
        (s.c_hat, s.beta_hat)
    }
}

/// Constituent laws looked up by per-element material id.
#[derive(Clone, Debug)]
pub struct ConstituentCoefficients {
    pub laws: Constituents,
    pub material: Vec<u8>,
}

impl CoefficientProvider for ConstituentCoefficients {
    fn thermal(&self, element: usize, t: f64) -> (f64, Mat2) {
        let law = self.laws.law(self.material[element]);
        (law.heat_capacity(t), law.conductivity(t))
    }

    fn mechanical(&self, element: usize, t: f64) -> (Tensor4, Mat2) {
        let law = self.laws.law(self.material[element]);
        (law.stiffness(t), law.thermal_modulus(t))
    }
}
