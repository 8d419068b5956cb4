//! Combined coordinate system: the global positioning frame (GX, GY, GZ),
//! the robot following frame (X, Y, Z) fixed at task start, and the
//! dynamic detection spherical frame (R, Φ, Θ) centered on an LRF exit point.
//!
//! The following frame is the hub: global and spherical coordinates are
//! never converted into each other directly, only through [`BodyPoint`].
//!
//! All angles are radians. The spherical polar axis R0 stays parallel to GX,
//! so it sits at `theta_g` counterclockwise from the X axis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{normalize_angle, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CoordError {
    /// The point coincides with the LRF exit point, so its angles are undefined.
    #[error("point coincides with the LRF exit point; spherical angles undefined")]
    ZeroRange,
    #[error("invalid spherical point: {0}")]
    InvalidSpherical(&'static str),
}

/// Point in the global positioning frame. `gx` is meters north, `gy` meters
/// east, `gz` meters above the reference level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GlobalPoint<T> {
    pub gx: T,
    pub gy: T,
    pub gz: T,
}

/// Point in the robot following frame (x right, y forward at task start, z up).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Detection-frame reading: radial distance, azimuth from R0 and zenith from +Z.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SphericalPoint<T> {
    pub r: T,
    pub phi: T,
    pub theta: T,
}

/// Static relation between the global and following frames.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameConfig<T> {
    /// Counterclockwise angle from the GX axis to the X axis.
    pub theta_g: T,
    /// Robot geometric center at task start, in global coordinates.
    pub global_origin: GlobalPoint<T>,
}

/// Light-exit point of an LRF relative to the robot geometric center.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LrfMount<T> {
    pub offset: BodyPoint<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotPose<T> {
    pub position: BodyPoint<T>,
    pub time: T,
}

impl<T: Real> GlobalPoint<T> {
    pub fn new(gx: T, gy: T, gz: T) -> Self {
        Self { gx, gy, gz }
    }

    pub fn distance(&self, other: &Self) -> T {
        let (dx, dy, dz) = (self.gx - other.gx, self.gy - other.gy, self.gz - other.gz);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.gx.is_finite() && self.gy.is_finite() && self.gz.is_finite()
    }
}

impl<T: Real> BodyPoint<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, o: &Self) -> T {
        self.sub(o).norm()
    }

    pub fn planar_distance(&self, o: &Self) -> T {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Real> SphericalPoint<T> {
    /// Builds a reading, normalizing `phi` into `[0, 2π)`.
    pub fn new(r: T, phi: T, theta: T) -> Result<Self, CoordError> {
        if !(r.is_finite() && phi.is_finite() && theta.is_finite()) {
            return Err(CoordError::InvalidSpherical("non-finite component"));
        }
        if r < T::zero() {
            return Err(CoordError::InvalidSpherical("negative radial distance"));
        }
        if theta < T::zero() || theta > T::PI() {
            return Err(CoordError::InvalidSpherical("zenith outside [0, pi]"));
        }
        Ok(Self {
            r,
            phi: normalize_angle(phi),
            theta,
        })
    }

    /// Unit direction in the R0-aligned Cartesian frame.
    pub fn direction(&self) -> [T; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

impl<T: Real> FrameConfig<T> {
    pub fn new(theta_g: T, global_origin: GlobalPoint<T>) -> Self {
        Self {
            theta_g: normalize_angle(theta_g),
            global_origin,
        }
    }

    /// Global and following frames coincide.
    pub fn identity() -> Self {
        Self::new(T::zero(), GlobalPoint::default())
    }
}

impl<T: Real> LrfMount<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self {
            offset: BodyPoint::new(x, y, z),
        }
    }
}

impl<T: Real> RobotPose<T> {
    pub fn new(position: BodyPoint<T>, time: T) -> Self {
        Self { position, time }
    }

    /// LRF exit point of `mount` in the following frame.
    pub fn exit_point(&self, mount: &LrfMount<T>) -> BodyPoint<T> {
        self.position.add(&mount.offset)
    }
}

/// Following frame to global frame: the planar displacement is taken in
/// polar form and rotated by `-theta_g`, then the global origin is added.
pub fn body_to_global<T: Real>(p: &BodyPoint<T>, f: &FrameConfig<T>) -> GlobalPoint<T> {
    let rho = p.x.hypot(p.y);
    let alpha = p.y.atan2(p.x);
    let (s, c) = (alpha - f.theta_g).sin_cos();
    GlobalPoint {
        gx: rho * c + f.global_origin.gx,
        gy: rho * s + f.global_origin.gy,
        gz: p.z + f.global_origin.gz,
    }
}

/// Inverse of [`body_to_global`].
pub fn global_to_body<T: Real>(g: &GlobalPoint<T>, f: &FrameConfig<T>) -> BodyPoint<T> {
    let dx = g.gx - f.global_origin.gx;
    let dy = g.gy - f.global_origin.gy;
    let rho = dx.hypot(dy);
    let beta = dy.atan2(dx);
    let (s, c) = (beta + f.theta_g).sin_cos();
    BodyPoint {
        x: rho * c,
        y: rho * s,
        z: g.gz - f.global_origin.gz,
    }
}

/// A point expressed relative to the LRF exit point, moved to the robot-center frame.
pub fn lrf_frame_to_body<T: Real>(p_lrf: &BodyPoint<T>, mount: &LrfMount<T>) -> BodyPoint<T> {
    p_lrf.add(&mount.offset)
}

/// Inverse of [`lrf_frame_to_body`].
pub fn body_to_lrf_frame<T: Real>(p: &BodyPoint<T>, mount: &LrfMount<T>) -> BodyPoint<T> {
    p.sub(&mount.offset)
}

/// Following-frame point as seen from the LRF exit point `robot.position + mount.offset`.
///
/// `phi` is referenced to R0 (parallel to GX), so the planar angle in the
/// following frame is reduced by `theta_g`. On the Z axis `phi` is 0.
pub fn body_to_spherical<T: Real>(
    pa: &BodyPoint<T>,
    robot: &RobotPose<T>,
    mount: &LrfMount<T>,
    f: &FrameConfig<T>,
) -> Result<SphericalPoint<T>, CoordError> {
    let d = pa.sub(&robot.exit_point(mount));
    let r = d.norm();
    if r == T::zero() {
        return Err(CoordError::ZeroRange);
    }
    let planar = d.x.hypot(d.y);
    let theta = planar.atan2(d.z);
    let phi = if planar == T::zero() {
        T::zero()
    } else {
        normalize_angle(d.y.atan2(d.x) - f.theta_g)
    };
    Ok(SphericalPoint { r, phi, theta })
}

/// Detection-frame reading back to the following frame.
pub fn spherical_to_body<T: Real>(
    ps: &SphericalPoint<T>,
    robot: &RobotPose<T>,
    mount: &LrfMount<T>,
    f: &FrameConfig<T>,
) -> BodyPoint<T> {
    let [ux, uy, uz] = ps.direction();
    let (rx, ry, rz) = (ps.r * ux, ps.r * uy, ps.r * uz);
    let (s, c) = f.theta_g.sin_cos();
    let rel = BodyPoint {
        x: rx * c - ry * s,
        y: ry * c + rx * s,
        z: rz,
    };
    rel.add(&robot.exit_point(mount))
}

/// Global point to detection frame, through the following frame.
pub fn global_to_spherical<T: Real>(
    g: &GlobalPoint<T>,
    robot: &RobotPose<T>,
    mount: &LrfMount<T>,
    f: &FrameConfig<T>,
) -> Result<SphericalPoint<T>, CoordError> {
    body_to_spherical(&global_to_body(g, f), robot, mount, f)
}

/// Detection frame to global point, through the following frame.
pub fn spherical_to_global<T: Real>(
    ps: &SphericalPoint<T>,
    robot: &RobotPose<T>,
    mount: &LrfMount<T>,
    f: &FrameConfig<T>,
) -> GlobalPoint<T> {
    body_to_global(&spherical_to_body(ps, robot, mount, f), f)
}

/// Unit ray direction in the following frame for a detection-frame
/// azimuth/zenith pair.
pub fn ray_direction_body<T: Real>(phi: T, theta: T, f: &FrameConfig<T>) -> BodyPoint<T> {
    let (st, ct) = theta.sin_cos();
    let (s, c) = (phi + f.theta_g).sin_cos();
    BodyPoint::new(st * c, st * s, ct)
}
