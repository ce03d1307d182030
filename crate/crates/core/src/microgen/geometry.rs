use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of boundary points sampled by [`OverlapMode::SurfaceRay`].
pub const SURFACE_SAMPLES: usize = 64;

/// One elliptical inclusion in unit-cell coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionParams {
    pub center: [f64; 2],
    /// `(a, b)` with `a >= b > 0`.
    pub semi_axes: [f64; 2],
    /// Angle between the major axis and the `y1` axis, radians.
    pub angle: f64,
}

impl InclusionParams {
    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        InclusionParams { center, semi_axes: [radius, radius], angle: 0.0 }
    }

    pub fn area(&self) -> f64 {
        PI * self.semi_axes[0] * self.semi_axes[1]
    }

    /// Radius of the circumscribed circle.
    pub fn bounding_radius(&self) -> f64 {
        self.semi_axes[0]
    }

    /// Half extents of the axis-aligned bounding box.
    pub fn half_extents(&self) -> [f64; 2] {
        let [a, b] = self.semi_axes;
        let (s, c) = self.angle.sin_cos();
        [(a * a * c * c + b * b * s * s).sqrt(), (a * a * s * s + b * b * c * c).sqrt()]
    }

    /// Whether the whole ellipse lies inside `[0, 1]^2`.
    pub fn inside_unit_square(&self) -> bool {
        let h = self.half_extents();
        (0..2).all(|d| self.center[d] - h[d] >= 0.0 && self.center[d] + h[d] <= 1.0)
    }

    /// Point-in-ellipse test (boundary counts as inside).
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let (s, c) = self.angle.sin_cos();
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        let [a, b] = self.semi_axes;
        (u / a).powi(2) + (v / b).powi(2) <= 1.0
    }

    /// Point on the boundary at parameter `phi`.
    pub fn boundary_point(&self, phi: f64) -> [f64; 2] {
        let [a, b] = self.semi_axes;
        let (s, c) = self.angle.sin_cos();
        let (u, v) = (a * phi.cos(), b * phi.sin());
        [self.center[0] + c * u - s * v, self.center[1] + s * u + c * v]
    }

    fn validate(&self) -> Result<()> {
        let [a, b] = self.semi_axes;
        if !(b > 0.0 && a >= b) {
            return Err(Error::InvalidInput(format!("semi-axes must satisfy a >= b > 0, got ({a}, {b})")));
        }
        Ok(())
    }
}

/// Non-intersection criterion used while packing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    /// Centre distance must exceed the sum of bounding-circle radii.
    #[default]
    CenterDistance,
    /// No sampled point of the candidate's boundary may fall inside an
    /// existing inclusion (and no existing centre inside the candidate).
    SurfaceRay,
}

/// `true` iff `candidate` is admissible next to every inclusion in `existing`.
pub fn overlap_test(candidate: &InclusionParams, existing: &[InclusionParams], mode: OverlapMode) -> bool {
    match mode {
        OverlapMode::CenterDistance => existing.iter().all(|e| {
            let d = ((candidate.center[0] - e.center[0]).powi(2) + (candidate.center[1] - e.center[1]).powi(2)).sqrt();
            d > candidate.bounding_radius() + e.bounding_radius()
        }),
        OverlapMode::SurfaceRay => existing.iter().all(|e| {
            if candidate.contains(e.center) || e.contains(candidate.center) {
                return false;
            }
            (0..SURFACE_SAMPLES).all(|k| {
                let phi = 2.0 * PI * k as f64 / SURFACE_SAMPLES as f64;
                !e.contains(candidate.boundary_point(phi))
            })
        }),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AngleDistribution {
    /// Uniform on `[0, pi)`.
    #[default]
    Uniform,
    Fixed { angle: f64 },
}

/// Random inclusion population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    /// Exact number of inclusions; takes precedence over `target_fraction`.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub target_fraction: Option<f64>,
    /// Uniform range of the semi-major axis `a`.
    pub semi_major: [f64; 2],
    /// Uniform range of `a / b` (1 = circles, >= 4 reads as fibres).
    #[serde(default = "unit_range")]
    pub aspect_ratio: [f64; 2],
    #[serde(default)]
    pub angle: AngleDistribution,
    #[serde(default)]
    pub overlap: OverlapMode,
    #[serde(default = "default_max_rejections")]
    pub max_rejections: usize,
}

fn unit_range() -> [f64; 2] {
    [1.0, 1.0]
}

fn default_max_rejections() -> usize {
    100_000
}

impl InclusionSpec {
    /// `count` circles of a single radius.
    pub fn circles(count: usize, radius: f64) -> Self {
        InclusionSpec {
            count: Some(count),
            target_fraction: None,
            semi_major: [radius, radius],
            aspect_ratio: [1.0, 1.0],
            angle: AngleDistribution::Fixed { angle: 0.0 },
            overlap: OverlapMode::CenterDistance,
            max_rejections: default_max_rejections(),
        }
    }

    /// `count` ellipses with fixed semi-axes and uniformly random orientation.
    pub fn fibres(count: usize, a: f64, b: f64) -> Self {
        InclusionSpec {
            count: Some(count),
            target_fraction: None,
            semi_major: [a, a],
            aspect_ratio: [a / b, a / b],
            angle: AngleDistribution::Uniform,
            overlap: OverlapMode::SurfaceRay,
            max_rejections: default_max_rejections(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count.is_none() && self.target_fraction.is_none() {
            return Err(Error::InvalidInput("inclusion spec needs count or target_fraction".into()));
        }
        if let Some(f) = self.target_fraction {
            if !(0.0..=0.5).contains(&f) {
                return Err(Error::InvalidInput(format!("target fraction {f} outside [0, 0.5]")));
            }
        }
        let [a0, a1] = self.semi_major;
        let [r0, r1] = self.aspect_ratio;
        if !(a0 > 0.0 && a1 >= a0 && r0 >= 1.0 && r1 >= r0) {
            return Err(Error::InvalidInput("invalid semi-major or aspect-ratio range".into()));
        }
        Ok(())
    }
}

/// A sampled unit cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RveGeometry {
    pub inclusions: Vec<InclusionParams>,
    pub seed: u64,
    pub achieved_fraction: f64,
}

impl RveGeometry {
    pub fn new(inclusions: Vec<InclusionParams>, seed: u64) -> Self {
        let achieved_fraction = inclusions.iter().map(|i| i.area()).sum();
        RveGeometry { inclusions, seed, achieved_fraction }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), 0)
    }

    /// Material id at `y` in the unit cell (1 inside any inclusion).
    pub fn material_at(&self, y: [f64; 2]) -> u8 {
        u8::from(self.inclusions.iter().any(|inc| inc.contains(y)))
    }

    /// Plain-text record: comment header, then `x1 x2 a b theta` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# inclusion geometry: x1 x2 a b theta1");
        let _ = writeln!(s, "# seed = {}", self.seed);
        let _ = writeln!(s, "# achieved_fraction = {}", self.achieved_fraction);
        for i in &self.inclusions {
            let _ = writeln!(s, "{} {} {} {} {}", i.center[0], i.center[1], i.semi_axes[0], i.semi_axes[1], i.angle);
        }
        s
    }
}

/// A 3D ellipsoid `(x1, x2, x3, a, b, c, theta1, theta2, theta3)`. Parsed and
/// stored, never meshed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidParams {
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    pub euler_angles: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryRecord {
    Planar(RveGeometry),
    Spatial { inclusions: Vec<EllipsoidParams>, seed: u64 },
}

/// Parses the text written by [`RveGeometry::to_text`]; nine-column rows
/// yield a [`GeometryRecord::Spatial`] record.
pub fn parse_geometry(text: &str) -> Result<GeometryRecord> {
    let mut seed = 0u64;
    let mut planar = Vec::new();
    let mut spatial = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("seed =") {
                seed = v.trim().parse().map_err(|e| parse_err(lineno, e))?;
            }
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(lineno, e)))
            .collect::<Result<_>>()?;
        match vals.len() {
            5 => {
                let inc = InclusionParams { center: [vals[0], vals[1]], semi_axes: [vals[2], vals[3]], angle: vals[4] };
                inc.validate()?;
                planar.push(inc);
            }
            9 => spatial.push(EllipsoidParams {
                center: [vals[0], vals[1], vals[2]],
                semi_axes: [vals[3], vals[4], vals[5]],
                euler_angles: [vals[6], vals[7], vals[8]],
            }),
            n => {
                return Err(Error::Parse {
                    context: format!("geometry line {}", lineno + 1),
                    message: format!("expected 5 or 9 columns, found {n}"),
                })
            }
        }
    }
    match (planar.is_empty(), spatial.is_empty()) {
        (_, true) => Ok(GeometryRecord::Planar(RveGeometry::new(planar, seed))),
        (true, false) => Ok(GeometryRecord::Spatial { inclusions: spatial, seed }),
        (false, false) => Err(Error::Parse {
            context: "geometry".into(),
            message: "mixed 2D and 3D rows".into(),
        }),
    }
}

fn parse_err(lineno: usize, e: impl std::fmt::Display) -> Error {
    Error::Parse { context: format!("geometry line {}", lineno + 1), message: e.to_string() }
}

/// The generator behind every random microstructure: ChaCha with 8 rounds.
pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sequential packing of non-intersecting ellipses inside the unit square.
pub fn sample_inclusions(spec: &InclusionSpec, seed: u64) -> Result<RveGeometry> {
    spec.validate()?;
    let mut rng = rng_for_seed(seed);
    let mut placed: Vec<InclusionParams> = Vec::new();
    let mut fraction = 0.0;
    let done = |placed: &[InclusionParams], fraction: f64| match spec.count {
        Some(n) => placed.len() >= n,
        None => fraction >= spec.target_fraction.unwrap_or(0.0),
    };
    let mut rejections = 0usize;
    while !done(&placed, fraction) {
        let a = uniform(&mut rng, spec.semi_major);
        let ratio = uniform(&mut rng, spec.aspect_ratio);
        let angle = match spec.angle {
            AngleDistribution::Uniform => rng.random::<f64>() * PI,
            AngleDistribution::Fixed { angle } => angle,
        };
        let center = [rng.random::<f64>(), rng.random::<f64>()];
        let candidate = InclusionParams { center, semi_axes: [a, a / ratio], angle };
        if candidate.inside_unit_square() && overlap_test(&candidate, &placed, spec.overlap) {
            fraction += candidate.area();
            placed.push(candidate);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= spec.max_rejections {
                return Err(Error::PackingFailure { rejections, placed: placed.len() });
            }
        }
    }
    Ok(RveGeometry::new(placed, seed))
}

fn uniform(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        range[0] + (range[1] - range[0]) * rng.random::<f64>()
    } else {
        range[0]
    }
}
