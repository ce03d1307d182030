use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Representative temperatures at which cell problems are solved off-line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureGrid {
    values: Vec<f64>,
}

/// Position of a temperature between two grid rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lower: usize,
    /// Weight of row `lower + 1`.
    pub weight: f64,
    /// The query lay outside the grid and was clamped.
    pub clamped: bool,
}

impl Default for TemperatureGrid {
    fn default() -> Self {
        TemperatureGrid::uniform(273.15, 873.15, 60).expect("default grid is valid")
    }
}

impl TemperatureGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("temperature grid is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("temperatures must be finite and strictly increasing".into()));
        }
        Ok(TemperatureGrid { values })
    }

    pub fn uniform(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::InvalidGrid("temperature grid needs at least one point".into())),
            1 => TemperatureGrid::new(vec![t_min]),
            _ => {
                let h = (t_max - t_min) / (count - 1) as f64;
                let mut v: Vec<f64> = (0..count).map(|s| t_min + h * s as f64).collect();
                v[count - 1] = t_max;
                TemperatureGrid::new(v)
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Linear-interpolation bracket for `t`, clamped to the grid ends.
    pub fn bracket(&self, t: f64) -> Bracket {
        let v = &self.values;
        if v.len() == 1 {
            return Bracket { lower: 0, weight: 0.0, clamped: t != v[0] };
        }
        if t <= v[0] {
            return Bracket { lower: 0, weight: 0.0, clamped: t < v[0] };
        }
        let last = v.len() - 1;
        if t >= v[last] {
            return Bracket { lower: last - 1, weight: 1.0, clamped: t > v[last] };
        }
        let hi = v.partition_point(|&x| x <= t);
        let lo = hi - 1;
        Bracket { lower: lo, weight: (t - v[lo]) / (v[hi] - v[lo]), clamped: false }
    }

    /// Three-point weights for `d/dT` at grid point `s`: centred inside,
    /// one-sided at the ends. Exact for quadratics on any spacing.
    pub fn derivative_weights(&self, s: usize) -> Result<[(usize, f64); 3]> {
        let n = self.values.len();
        if n < 3 {
            return Err(Error::GridTooCoarse { points: n });
        }
        let base = s.saturating_sub(1).min(n - 3);
        let idx = [base, base + 1, base + 2];
        let x = idx.map(|i| self.values[i]);
        let t = self.values[s];
        // derivative of the Lagrange basis polynomials at t
        let mut w = [0.0; 3];
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            w[a] = ((t - x[b]) + (t - x[c])) / ((x[a] - x[b]) * (x[a] - x[c]));
        }
        Ok([(idx[0], w[0]), (idx[1], w[1]), (idx[2], w[2])])
    }
}

/// Finite-difference temperature derivatives of tabulated arrays.
///
/// `table[s]` holds the values at grid point `s`; all rows must have equal
/// length. Returns `d table / dT` row by row.
pub fn temperature_sensitivity(grid: &TemperatureGrid, table: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if table.len() != grid.len() {
        return Err(Error::InvalidInput(format!("{} table rows for {} temperatures", table.len(), grid.len())));
    }
    (0..grid.len())
        .map(|s| {
            let w = grid.derivative_weights(s)?;
            let len = table[s].len();
            Ok((0..len).map(|i| w.iter().map(|&(r, c)| c * table[r][i]).sum()).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = TemperatureGrid::default();
        assert_eq!(g.len(), 60);
        assert_eq!((g.min(), g.max()), (273.15, 873.15));
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(TemperatureGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TemperatureGrid::new(vec![]).is_err());
    }

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let g = TemperatureGrid::new(vec![300.0, 310.0, 325.0, 330.0, 360.0]).unwrap();
        let table: Vec<Vec<f64>> = g.values().iter().map(|t| vec![t * t, 5.0]).collect();
        let d = temperature_sensitivity(&g, &table).unwrap();
        for (s, t) in g.values().iter().enumerate() {
            assert!((d[s][0] - 2.0 * t).abs() < 1e-8 * t);
            assert!(d[s][1].abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = TemperatureGrid::uniform(300.0, 400.0, 2).unwrap();
        assert!(matches!(
            temperature_sensitivity(&g, &[vec![1.0], vec![2.0]]),
            Err(Error::GridTooCoarse { points: 2 })
        ));
    }

    #[test]
    fn bracket_interpolates_and_clamps() {
        let g = TemperatureGrid::uniform(0.0, 10.0, 11).unwrap();
        let b = g.bracket(3.25);
        assert_eq!(b.lower, 3);
        assert!((b.weight - 0.25).abs() < 1e-12 && !b.clamped);
        assert!(g.bracket(-1.0).clamped && g.bracket(11.0).clamped);
        assert_eq!(g.bracket(10.0), Bracket { lower: 9, weight: 1.0, clamped: false });
    }
}
