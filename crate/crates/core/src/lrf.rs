//! Steerable laser range finders and the two-unit LRF group.
//!
//! A unit has two rotational degrees of freedom: `rotate1` sets the zenith of
//! the emitted ray, `rotate2` its azimuth about Z. The azimuth is read against
//! the polar axis R0 (parallel to GX), so a reading is directly a
//! [`SphericalPoint`] in the unit's detection frame.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordsys::{body_to_global, ray_direction_body, spherical_to_body};
use crate::real::normalize_angle;
use crate::simworld::{ray_cast, EntityId, Scene};
use crate::{BodyPoint, FrameConfig, GlobalPoint, LrfMount, RobotPose, SphericalPoint};

use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Default sweep step, 0.25 degrees.
pub const DEFAULT_RESOLUTION: f64 = 0.25 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LrfId(pub u32);

impl std::fmt::Display for LrfId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LRF{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LrfError {
    #[error("zenith {0} rad outside gimbal range [0, pi]")]
    OutOfGimbalRange(f64),
    #[error("azimuth interval has non-positive width {0}")]
    EmptyInterval(f64),
    #[error("azimuth interval width {0} exceeds a full turn")]
    IntervalTooWide(f64),
    #[error("invalid LRF configuration: {0}")]
    InvalidConfig(String),
    #[error("group units must share x/y mount offsets (upper {upper:?}, lower {lower:?})")]
    Misaligned { upper: BodyPoint, lower: BodyPoint },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Normal,
    Locking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrfUnit {
    pub id: LrfId,
    pub mount: LrfMount,
    rotate1: f64,
    rotate2: f64,
    pub max_range: f64,
    pub angular_resolution: f64,
    pub range_noise_sigma: f64,
}

impl LrfUnit {
    /// A unit pointing horizontally along R0.
    pub fn new(
        id: LrfId,
        mount: LrfMount,
        max_range: f64,
        angular_resolution: f64,
        range_noise_sigma: f64,
    ) -> Result<Self, LrfError> {
        if !(max_range > 0.0 && max_range.is_finite()) {
            return Err(LrfError::InvalidConfig(format!("max_range must be > 0, got {max_range}")));
        }
        if !(angular_resolution > 0.0 && angular_resolution.is_finite()) {
            return Err(LrfError::InvalidConfig(format!(
                "angular_resolution must be > 0, got {angular_resolution}"
            )));
        }
        if !(range_noise_sigma >= 0.0 && range_noise_sigma.is_finite()) {
            return Err(LrfError::InvalidConfig(format!(
                "range_noise_sigma must be >= 0, got {range_noise_sigma}"
            )));
        }
        if !mount.offset.is_finite() {
            return Err(LrfError::InvalidConfig("mount offset must be finite".into()));
        }
        Ok(Self {
            id,
            mount,
            rotate1: FRAC_PI_2,
            rotate2: 0.0,
            max_range,
            angular_resolution,
            range_noise_sigma,
        })
    }

    pub fn zenith(&self) -> f64 {
        self.rotate1
    }

    pub fn azimuth(&self) -> f64 {
        self.rotate2
    }

    pub fn exit_point(&self, robot: &RobotPose) -> BodyPoint {
        robot.exit_point(&self.mount)
    }
}

/// Returns `u` pointed at (`zenith`, `azimuth`), azimuth wrapped into `[0, 2π)`.
pub fn steer(u: &LrfUnit, zenith: f64, azimuth: f64) -> Result<LrfUnit, LrfError> {
    if !(0.0..=PI).contains(&zenith) {
        return Err(LrfError::OutOfGimbalRange(zenith));
    }
    Ok(LrfUnit {
        rotate1: zenith,
        rotate2: normalize_angle(azimuth),
        ..*u
    })
}

/// Two units on one Z-parallel line, steered and read independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrfGroup {
    pub upper: LrfUnit,
    pub lower: LrfUnit,
}

impl LrfGroup {
    pub fn new(upper: LrfUnit, lower: LrfUnit) -> Result<Self, LrfError> {
        let (a, b) = (upper.mount.offset, lower.mount.offset);
        if a.x != b.x || a.y != b.y {
            return Err(LrfError::Misaligned { upper: a, lower: b });
        }
        if upper.id == lower.id {
            return Err(LrfError::InvalidConfig(format!("both units use id {}", upper.id.0)));
        }
        Ok(Self { upper, lower })
    }

    pub fn unit(&self, id: LrfId) -> Option<&LrfUnit> {
        [&self.upper, &self.lower].into_iter().find(|u| u.id == id)
    }
}

/// One ray measurement. `body` and `global` are always the coordinate
/// conversions of `reading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub time: f64,
    pub lrf_id: LrfId,
    pub reading: SphericalPoint,
    pub body: BodyPoint,
    pub global: GlobalPoint,
    /// `None` encodes NoHit; the reading then carries `max_range`.
    pub hit: Option<EntityId>,
    pub mode_tag: ScanMode,
}

impl ScanSample {
    pub fn is_hit(&self) -> bool {
        self.hit.is_some()
    }

    /// Exit point the ray left from, in global coordinates.
    pub fn ray_origin_global(&self) -> GlobalPoint {
        let [ux, uy, uz] = self.reading.direction();
        let r = self.reading.r;
        // R0 is parallel to GX, so the reading's direction is already global
        GlobalPoint::new(self.global.gx - r * ux, self.global.gy - r * uy, self.global.gz - r * uz)
    }
}

/// Counterclockwise azimuth interval `[start, start + width]` in the R0 frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzimuthWindow {
    pub start: f64,
    pub width: f64,
}

impl AzimuthWindow {
    pub fn new(start: f64, width: f64) -> Result<Self, LrfError> {
        if !(width > 0.0) {
            return Err(LrfError::EmptyInterval(width));
        }
        if width > TAU + 1e-12 {
            return Err(LrfError::IntervalTooWide(width));
        }
        Ok(Self {
            start: normalize_angle(start),
            width: width.min(TAU),
        })
    }

    /// From an `[a, b]` pair given in increasing unwrapped order.
    pub fn from_bounds(a: f64, b: f64) -> Result<Self, LrfError> {
        Self::new(a, b - a)
    }

    pub fn end(&self) -> f64 {
        normalize_angle(self.start + self.width)
    }

    pub fn contains_angle(&self, phi: f64) -> bool {
        crate::real::ccw_delta(self.start, phi) <= self.width
    }

    /// Grid azimuths `start + k * step`, `k = 0..=floor(width / step)`.
    pub fn grid(&self, step: f64) -> impl Iterator<Item = f64> + '_ {
        let n = (self.width / step + 1e-9).floor() as usize;
        let start = self.start;
        (0..=n).map(move |k| normalize_angle(start + k as f64 * step))
    }
}

fn emit(u: &LrfUnit, zenith: f64, azimuth: f64, robot: &RobotPose, f: &FrameConfig, scene: &Scene, rng: &mut impl Rng) -> ScanSample {
    let exit = u.exit_point(robot);
    let dir = ray_direction_body(azimuth, zenith, f);
    let hit = ray_cast(&exit, &dir, scene).filter(|h| h.distance <= u.max_range);
    let (r, hit) = match hit {
        Some(h) => {
            let noise = if u.range_noise_sigma > 0.0 {
                u.range_noise_sigma * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            ((h.distance + noise).clamp(0.0, u.max_range), Some(h.entity))
        }
        None => (u.max_range, None),
    };
    let reading = SphericalPoint {
        r,
        phi: azimuth,
        theta: zenith,
    };
    let body = spherical_to_body(&reading, robot, &u.mount, f);
    ScanSample {
        time: robot.time,
        lrf_id: u.id,
        reading,
        body,
        global: body_to_global(&body, f),
        hit,
        mode_tag: ScanMode::Normal,
    }
}

/// One ray along the unit's current pointing.
pub fn measure(u: &LrfUnit, robot: &RobotPose, f: &FrameConfig, scene: &Scene, rng: &mut impl Rng) -> ScanSample {
    emit(u, u.rotate1, u.rotate2, robot, f, scene, rng)
}

/// Samples at every listed azimuth, in the given order.
pub fn sweep_azimuths(
    u: &LrfUnit,
    zenith: f64,
    azimuths: impl IntoIterator<Item = f64>,
    robot: &RobotPose,
    f: &FrameConfig,
    scene: &Scene,
    rng: &mut impl Rng,
) -> Result<Vec<ScanSample>, LrfError> {
    if !(0.0..=PI).contains(&zenith) {
        return Err(LrfError::OutOfGimbalRange(zenith));
    }
    Ok(azimuths
        .into_iter()
        .map(|phi| emit(u, zenith, phi, robot, f, scene, rng))
        .collect())
}

/// Sweep across `window` in increasing azimuth at the unit's angular resolution.
pub fn sweep(
    u: &LrfUnit,
    zenith: f64,
    window: &AzimuthWindow,
    robot: &RobotPose,
    f: &FrameConfig,
    scene: &Scene,
    rng: &mut impl Rng,
) -> Result<Vec<ScanSample>, LrfError> {
    sweep_azimuths(u, zenith, window.grid(u.angular_resolution), robot, f, scene, rng)
}

/// Both units sweep the same window at their own zenith. Upper first, then lower.
pub fn group_sweep(
    g: &LrfGroup,
    window: &AzimuthWindow,
    robot: &RobotPose,
    f: &FrameConfig,
    scene: &Scene,
    rng: &mut impl Rng,
) -> Result<(Vec<ScanSample>, Vec<ScanSample>), LrfError> {
    let upper = sweep(&g.upper, g.upper.zenith(), window, robot, f, scene, rng)?;
    let lower = sweep(&g.lower, g.lower.zenith(), window, robot, f, scene, rng)?;
    Ok((upper, lower))
}
