//! Temperature-dependent constituent laws.
//!
//! Every parameter except the Poisson ratio is a polynomial in the absolute
//! temperature. Conductivity and thermal modulus are isotropic (scalar times
//! identity); the stiffness is the plane-strain tensor built from `(E, nu)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{mat2_scaled, Mat2, Tensor4, IDENTITY2};

/// Polynomial with ascending coefficients: `c0 + c1 T + c2 T^2 + ...`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Polynomial(vec![c])
    }

    pub fn new(coeffs: &[f64]) -> Self {
        Polynomial(coeffs.to_vec())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.0.len() <= 1 {
            return Polynomial(vec![0.0]);
        }
        Polynomial(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, &c)| p as f64 * c)
                .collect(),
        )
    }

    /// Value of the `order`-th derivative at `t`.
    pub fn eval_derivative(&self, t: f64, order: usize) -> f64 {
        let mut p = self.clone();
        for _ in 0..order {
            p = p.derivative();
        }
        p.eval(t)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().skip(1).all(|&c| c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        Polynomial(self.0.iter().map(|c| c * s).collect())
    }

    /// Keeps only the constant term evaluated at `t`.
    pub fn frozen_at(&self, t: f64) -> Polynomial {
        Polynomial::constant(self.eval(t))
    }
}

/// Constitutive parameters of one constituent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialLaw {
    pub name: String,
    /// Mass density.
    pub rho: Polynomial,
    /// Specific heat.
    pub c: Polynomial,
    /// Isotropic conductivity.
    pub k: Polynomial,
    /// Young's modulus.
    pub e: Polynomial,
    /// Poisson ratio (temperature independent).
    pub nu: f64,
    /// Isotropic thermal modulus.
    pub beta: Polynomial,
}

/// Value and first two temperature derivatives of a scalar parameter.
pub type Jet = [f64; 3];

impl MaterialLaw {
    /// Checks positivity of `rho`, `c`, `k`, `E` and `0 < nu < 0.5` on
    /// `[t_min, t_max]` by dense sampling.
    pub fn validate(&self, t_min: f64, t_max: f64) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return Err(Error::InvalidMaterial(format!(
                "{}: Poisson ratio {} outside (0, 0.5)",
                self.name, self.nu
            )));
        }
        const SAMPLES: usize = 256;
        for s in 0..=SAMPLES {
            let t = t_min + (t_max - t_min) * s as f64 / SAMPLES as f64;
            for (label, p) in [("rho", &self.rho), ("c", &self.c), ("k", &self.k), ("E", &self.e)] {
                let v = p.eval(t);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidMaterial(format!(
                        "{}: {label}({t:.3}) = {v} is not positive",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// `rho(T) c(T)`.
    pub fn heat_capacity(&self, t: f64) -> f64 {
        self.rho.eval(t) * self.c.eval(t)
    }

    /// Temperature jet of `rho c`.
    pub fn heat_capacity_jet(&self, t: f64) -> Jet {
        let r = self.jet(&self.rho, t);
        let c = self.jet(&self.c, t);
        [r[0] * c[0], r[1] * c[0] + r[0] * c[1], r[2] * c[0] + 2.0 * r[1] * c[1] + r[0] * c[2]]
    }

    fn jet(&self, p: &Polynomial, t: f64) -> Jet {
        [p.eval(t), p.eval_derivative(t, 1), p.eval_derivative(t, 2)]
    }

    pub fn conductivity(&self, t: f64) -> Mat2 {
        mat2_scaled(&IDENTITY2, self.k.eval(t))
    }

    /// `d^order k / dT^order` as a tensor.
    pub fn conductivity_derivative(&self, t: f64, order: usize) -> Mat2 {
        mat2_scaled(&IDENTITY2, self.k.eval_derivative(t, order))
    }

    pub fn thermal_modulus(&self, t: f64) -> Mat2 {
        mat2_scaled(&IDENTITY2, self.beta.eval(t))
    }

    pub fn thermal_modulus_derivative(&self, t: f64, order: usize) -> Mat2 {
        mat2_scaled(&IDENTITY2, self.beta.eval_derivative(t, order))
    }

    pub fn stiffness(&self, t: f64) -> Tensor4 {
        Tensor4::plane_strain(self.e.eval(t), self.nu)
    }

    /// Stiffness is linear in `E` at fixed `nu`, so derivatives follow from `E`.
    pub fn stiffness_derivative(&self, t: f64, order: usize) -> Tensor4 {
        Tensor4::plane_strain(1.0, self.nu).scaled(self.e.eval_derivative(t, order))
    }

    pub fn is_temperature_independent(&self) -> bool {
        [&self.rho, &self.c, &self.k, &self.e, &self.beta]
            .iter()
            .all(|p| p.is_constant())
    }

    /// Replaces every polynomial by its value at `t`.
    pub fn frozen_at(&self, t: f64) -> MaterialLaw {
        MaterialLaw {
            name: format!("{} (frozen at {t})", self.name),
            rho: self.rho.frozen_at(t),
            c: self.c.frozen_at(t),
            k: self.k.frozen_at(t),
            e: self.e.frozen_at(t),
            nu: self.nu,
            beta: self.beta.frozen_at(t),
        }
    }

    /// Converts SI coefficients to a unit system whose length unit is
    /// `length_unit_m` metres (e.g. `0.01` for centimetres). Energy, force,
    /// time, mass and temperature units are unchanged.
    pub fn in_length_unit(&self, length_unit_m: f64) -> MaterialLaw {
        let l = length_unit_m;
        MaterialLaw {
            name: self.name.clone(),
            rho: self.rho.scaled(l.powi(3)),
            c: self.c.clone(),
            k: self.k.scaled(l),
            e: self.e.scaled(l * l),
            nu: self.nu,
            beta: self.beta.scaled(l * l),
        }
    }
}

/// Parameter expansion `p(T0 + eps T1 + eps^2 T2) = p0 + eps p1 + eps^2 p2 + O(eps^3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpandedScalar {
    pub terms: [f64; 3],
}

impl ExpandedScalar {
    /// `p0 = p(T0)`, `p1 = T1 p'(T0)`, `p2 = T2 p'(T0) + T1^2 p''(T0) / 2`.
    pub fn from_jet(jet: Jet, t1: f64, t2: f64) -> Self {
        ExpandedScalar {
            terms: [jet[0], t1 * jet[1], t2 * jet[1] + 0.5 * t1 * t1 * jet[2]],
        }
    }

    pub fn sum(&self, eps: f64) -> f64 {
        self.terms[0] + eps * self.terms[1] + eps * eps * self.terms[2]
    }
}

/// Expansion terms of every temperature-dependent parameter of one law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpandedParameters {
    pub k: ExpandedScalar,
    pub e: ExpandedScalar,
    pub beta: ExpandedScalar,
    pub rho: ExpandedScalar,
    pub c: ExpandedScalar,
}

/// Expands all parameters of `law` about `t0` given corrector values `t1`, `t2`.
pub fn expand_parameters(law: &MaterialLaw, t0: f64, t1: f64, t2: f64) -> ExpandedParameters {
    let ex = |p: &Polynomial| ExpandedScalar::from_jet(law.jet(p, t0), t1, t2);
    ExpandedParameters {
        k: ex(&law.k),
        e: ex(&law.e),
        beta: ex(&law.beta),
        rho: ex(&law.rho),
        c: ex(&law.c),
    }
}

/// Constituent laws indexed by material id (0 = matrix, 1 = inclusion).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constituents {
    pub laws: Vec<MaterialLaw>,
}

impl Constituents {
    pub fn new(matrix: MaterialLaw, inclusion: MaterialLaw) -> Self {
        Constituents { laws: vec![matrix, inclusion] }
    }

    pub fn homogeneous(law: MaterialLaw) -> Self {
        Constituents { laws: vec![law.clone(), law] }
    }

    pub fn law(&self, material: u8) -> &MaterialLaw {
        &self.laws[material as usize]
    }

    pub fn validate(&self, t_min: f64, t_max: f64) -> Result<()> {
        if self.laws.len() < 2 {
            return Err(Error::InvalidMaterial("two constituent laws are required".into()));
        }
        self.laws.iter().try_for_each(|l| l.validate(t_min, t_max))
    }

    pub fn in_length_unit(&self, length_unit_m: f64) -> Constituents {
        Constituents {
            laws: self.laws.iter().map(|l| l.in_length_unit(length_unit_m)).collect(),
        }
    }

    pub fn frozen_at(&self, t: f64) -> Constituents {
        Constituents { laws: self.laws.iter().map(|l| l.frozen_at(t)).collect() }
    }

    pub fn is_temperature_independent(&self) -> bool {
        self.laws.iter().all(|l| l.is_temperature_independent())
    }
}

/// Reference constituent data (SI units, `E` in Pa).
pub mod presets {
    use super::{MaterialLaw, Polynomial};

    const GPA: f64 = 1e9;

    /// SiC-like matrix with temperature-dependent specific heat and stiffness.
    pub fn sic_matrix() -> MaterialLaw {
        MaterialLaw {
            name: "SiC matrix".into(),
            rho: Polynomial::constant(3210.0),
            c: Polynomial::new(&[660.0, 1.915, -1.491e-3]),
            k: Polynomial::new(&[250.0, 0.02728]),
            e: Polynomial::new(&[350.0 * GPA, -3.04e-2 * GPA]),
            nu: 0.25,
            beta: Polynomial::constant(3.50),
        }
    }

    /// Carbon-like inclusion.
    pub fn carbon_inclusion() -> MaterialLaw {
        MaterialLaw {
            name: "C inclusion".into(),
            rho: Polynomial::constant(1760.0),
            c: Polynomial::new(&[710.0, 1.781, -1.976e-3]),
            k: Polynomial::new(&[8.0, 0.02535]),
            e: Polynomial::new(&[220.0 * GPA, -1.10e-4 * GPA]),
            nu: 0.20,
            beta: Polynomial::new(&[9273.0, -57.53, 0.0817]),
        }
    }

    /// Ti-6Al-4V matrix; only `k`, `E`, `nu` are characterised, the
    /// remaining parameters are unit placeholders.
    pub fn ti64_matrix() -> MaterialLaw {
        MaterialLaw {
            name: "Ti-6Al-4V matrix".into(),
            rho: Polynomial::constant(1.0),
            c: Polynomial::constant(1.0),
            k: Polynomial::new(&[1.10, 0.017]),
            e: Polynomial::new(&[122.7 * GPA, -5.65e-3 * GPA]),
            nu: 0.289,
            beta: Polynomial::constant(0.0),
        }
    }

    /// ZrO2 inclusion; placeholders as in [`ti64_matrix`].
    pub fn zro2_inclusion() -> MaterialLaw {
        MaterialLaw {
            name: "ZrO2 inclusion".into(),
            rho: Polynomial::constant(1.0),
            c: Polynomial::constant(1.0),
            k: Polynomial::new(&[1.71, 2.1e-4, 1.16e-7]),
            e: Polynomial::new(&[132.2 * GPA, -50.3e-3 * GPA, -8.1e-6 * GPA]),
            nu: 0.333,
            beta: Polynomial::constant(0.0),
        }
    }

    /// SiC/C pair with placeholder density/heat/thermal modulus, for property studies.
    pub fn sic_c_property_pair() -> (MaterialLaw, MaterialLaw) {
        let mut m = sic_matrix();
        let mut i = carbon_inclusion();
        for law in [&mut m, &mut i] {
            law.rho = Polynomial::constant(1.0);
            law.c = Polynomial::constant(1.0);
            law.beta = Polynomial::constant(0.0);
        }
        (m, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_conductivity_at_373() {
        let k = presets::sic_matrix().k.eval(373.15);
        assert!((k - (250.0 + 0.02728 * 373.15)).abs() < 1e-12);
        assert!((k - 260.179532).abs() < 1e-6);
    }

    #[test]
    fn inclusion_beta_and_derivative() {
        let law = presets::carbon_inclusion();
        let t = 500.0;
        let b = law.beta.eval(t);
        assert!((b - (9273.0 - 57.53 * t + 0.0817 * t * t)).abs() < 1e-9);
        let db = law.beta.eval_derivative(t, 1);
        assert!((db - (-57.53 + 0.1634 * t)).abs() < 1e-12);
        assert!((law.beta.eval_derivative(t, 2) - 0.1634).abs() < 1e-15);
        assert_eq!(law.beta.eval_derivative(t, 3), 0.0);
    }

    #[test]
    fn constant_law_has_vanishing_expansion_terms() {
        let law = presets::sic_matrix().frozen_at(400.0);
        let ex = expand_parameters(&law, 400.0, 3.0, -2.0);
        for s in [ex.k, ex.e, ex.beta, ex.rho, ex.c] {
            assert_eq!(s.terms[1], 0.0);
            assert_eq!(s.terms[2], 0.0);
        }
    }

    #[test]
    fn expansion_matches_taylor_series() {
        let law = presets::carbon_inclusion();
        let (t0, t1, t2, eps) = (450.0, 2.0, -1.5, 1e-2);
        let ex = expand_parameters(&law, t0, t1, t2);
        let exact = law.beta.eval(t0 + eps * t1 + eps * eps * t2);
        // quadratic polynomial: residual is O(eps^3)
        assert!((ex.beta.sum(eps) - exact).abs() < 1e-5);
    }

    #[test]
    fn heat_capacity_jet_is_product_rule() {
        let law = presets::sic_matrix();
        let t = 500.0;
        let j = law.heat_capacity_jet(t);
        let h = 1e-3;
        let fd = (law.heat_capacity(t + h) - law.heat_capacity(t - h)) / (2.0 * h);
        assert!((j[0] - law.heat_capacity(t)).abs() < 1e-6);
        assert!((j[1] - fd).abs() / fd.abs() < 1e-8);
    }

    #[test]
    fn validation_rejects_bad_poisson_ratio() {
        let mut law = presets::sic_matrix();
        law.nu = 0.5;
        assert!(law.validate(273.15, 873.15).is_err());
        assert!(presets::sic_matrix().validate(273.15, 873.15).is_ok());
        assert!(presets::carbon_inclusion().validate(273.15, 873.15).is_ok());
    }

    #[test]
    fn length_unit_conversion() {
        let cm = presets::sic_matrix().in_length_unit(0.01);
        assert!((cm.k.eval(0.0) - 2.5).abs() < 1e-12);
        assert!((cm.e.eval(0.0) - 350.0e5).abs() < 1e-3);
        assert!((cm.rho.eval(0.0) - 3.21e-3).abs() < 1e-15);
    }
}
