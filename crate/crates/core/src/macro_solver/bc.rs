use serde::{Deserialize, Serialize};

use crate::microgen::side;

/// A scalar prescription in time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeFn {
    Constant(f64),
    /// Linear ramp from `from` to `to` over `duration`, constant afterwards.
    Ramp { from: f64, to: f64, duration: f64 },
}

impl Default for TimeFn {
    fn default() -> Self {
        TimeFn::Constant(0.0)
    }
}

impl TimeFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeFn::Constant(v) => v,
            TimeFn::Ramp { from, to, duration } => {
                let s = if duration > 0.0 { (t / duration).clamp(0.0, 1.0) } else { 1.0 };
                from + (to - from) * s
            }
        }
    }
}

/// Thermal condition on one side of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThermalBc {
    /// Prescribed temperature (K).
    Temperature { value: TimeFn },
    /// Prescribed inward normal heat flux.
    Flux { value: TimeFn },
}

impl Default for ThermalBc {
    fn default() -> Self {
        ThermalBc::Flux { value: TimeFn::default() }
    }
}

/// Mechanical condition on one side of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MechanicalBc {
    Displacement { value: [TimeFn; 2] },
    Traction { value: [TimeFn; 2] },
}

impl Default for MechanicalBc {
    fn default() -> Self {
        MechanicalBc::Traction { value: [TimeFn::default(); 2] }
    }
}

impl MechanicalBc {
    pub fn clamped() -> Self {
        MechanicalBc::Displacement { value: [TimeFn::default(); 2] }
    }
}

/// Side order used by the per-side arrays.
pub const SIDES: [u8; 4] = [side::LEFT, side::RIGHT, side::BOTTOM, side::TOP];

/// Index of a single side flag in [`SIDES`].
pub fn side_index(flag: u8) -> usize {
    SIDES.iter().position(|&s| s == flag).expect("single side flag")
}

/// Conditions on the four sides, in [`SIDES`] order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub thermal: [ThermalBc; 4],
    pub mechanical: [MechanicalBc; 4],
}

impl BoundaryData {
    /// Same temperature and clamping on every side.
    pub fn uniform(temperature: f64) -> Self {
        BoundaryData {
            thermal: [ThermalBc::Temperature { value: TimeFn::Constant(temperature) }; 4],
            mechanical: [MechanicalBc::clamped(); 4],
        }
    }

    /// Prescribed temperature at a boundary node with side flags `flags`;
    /// the first Dirichlet side in [`SIDES`] order wins at corners.
    pub fn node_temperature(&self, flags: u8, t: f64) -> Option<f64> {
        SIDES.iter().zip(&self.thermal).find_map(|(&s, bc)| match bc {
            ThermalBc::Temperature { value } if flags & s != 0 => Some(value.eval(t)),
            _ => None,
        })
    }

    pub fn node_displacement(&self, flags: u8, t: f64) -> Option<[f64; 2]> {
        SIDES.iter().zip(&self.mechanical).find_map(|(&s, bc)| match bc {
            MechanicalBc::Displacement { value } if flags & s != 0 => Some([value[0].eval(t), value[1].eval(t)]),
            _ => None,
        })
    }

    pub fn has_displacement_side(&self) -> bool {
        self.mechanical.iter().any(|bc| matches!(bc, MechanicalBc::Displacement { .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_saturates() {
        let f = TimeFn::Ramp { from: 1.0, to: 3.0, duration: 2.0 };
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(1.0), 2.0);
        assert_eq!(f.eval(5.0), 3.0);
        assert_eq!(TimeFn::Constant(4.0).eval(9.0), 4.0);
    }

    #[test]
    fn corners_take_the_first_dirichlet_side() {
        let mut bc = BoundaryData::default();
        bc.thermal[1] = ThermalBc::Temperature { value: TimeFn::Constant(5.0) };
        bc.thermal[3] = ThermalBc::Temperature { value: TimeFn::Constant(7.0) };
        assert_eq!(bc.node_temperature(side::RIGHT | side::TOP, 0.0), Some(5.0));
        assert_eq!(bc.node_temperature(side::TOP, 0.0), Some(7.0));
        assert_eq!(bc.node_temperature(side::LEFT, 0.0), None);
        assert!(!bc.has_displacement_side());
    }

    #[test]
    fn time_functions_read_from_plain_numbers() {
        let f: TimeFn = serde_json::from_str("2.5").unwrap();
        assert_eq!(f, TimeFn::Constant(2.5));
        let bc: ThermalBc = serde_json::from_str(r#"{"kind":"temperature","value":{"from":1,"to":2,"duration":1}}"#).unwrap();
        assert!(matches!(bc, ThermalBc::Temperature { value: TimeFn::Ramp { .. } }));
    }
}
