//! Analytic ray intersection against vertical prisms standing on z = 0.

use serde::{Deserialize, Serialize};

use crate::coordsys::BodyPoint;
use crate::real::Real;

/// Footprint of a 2.5-D entity. Boxes are axis-aligned in the following frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape<T> {
    Cylinder { radius: T },
    Box { half_x: T, half_y: T },
}

impl<T: Real> Shape<T> {
    pub fn is_valid(&self) -> bool {
        match *self {
            Shape::Cylinder { radius } => radius > T::zero() && radius.is_finite(),
            Shape::Box { half_x, half_y } => {
                half_x > T::zero() && half_y > T::zero() && half_x.is_finite() && half_y.is_finite()
            }
        }
    }

    /// Largest distance from the center to the footprint boundary.
    pub fn bounding_radius(&self) -> T {
        match *self {
            Shape::Cylinder { radius } => radius,
            Shape::Box { half_x, half_y } => half_x.hypot(half_y),
        }
    }

    pub fn contains_xy(&self, center: (T, T), x: T, y: T) -> bool {
        let (dx, dy) = (x - center.0, y - center.1);
        match *self {
            Shape::Cylinder { radius } => dx * dx + dy * dy <= radius * radius,
            Shape::Box { half_x, half_y } => dx.abs() <= half_x && dy.abs() <= half_y,
        }
    }
}

// Parameter interval where the ray lies inside the slab lo <= o + t d <= hi.
fn slab<T: Real>(o: T, d: T, lo: T, hi: T) -> Option<(T, T)> {
    if d == T::zero() {
        return (o >= lo && o <= hi).then(|| (T::neg_infinity(), T::infinity()));
    }
    let t1 = (lo - o) / d;
    let t2 = (hi - o) / d;
    Some(if t1 <= t2 { (t1, t2) } else { (t2, t1) })
}

fn circle_span<T: Real>(o: &BodyPoint<T>, d: &BodyPoint<T>, c: (T, T), radius: T) -> Option<(T, T)> {
    let (px, py) = (o.x - c.0, o.y - c.1);
    let a = d.x * d.x + d.y * d.y;
    let cc = px * px + py * py - radius * radius;
    if a == T::zero() {
        return (cc <= T::zero()).then(|| (T::neg_infinity(), T::infinity()));
    }
    let b = px * d.x + py * d.y;
    let disc = b * b - a * cc;
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    // numerically stable root pair
    let q = if b >= T::zero() { -(b + sq) } else { -b + sq };
    let (r1, r2) = if q == T::zero() {
        (T::zero(), T::zero())
    } else {
        (q / a, cc / q)
    };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// Distance along the unit ray `origin + t * dir` (t >= 0) to the first point
/// inside the prism, or `None`. A ray starting inside reports 0.
pub fn intersect_prism<T: Real>(
    origin: &BodyPoint<T>,
    dir: &BodyPoint<T>,
    shape: &Shape<T>,
    center: (T, T),
    height: T,
) -> Option<T> {
    let (mut lo, mut hi) = slab(origin.z, dir.z, T::zero(), height)?;
    let spans: [(T, T); 2] = match *shape {
        Shape::Cylinder { radius } => {
            let s = circle_span(origin, dir, center, radius)?;
            [s, (T::neg_infinity(), T::infinity())]
        }
        Shape::Box { half_x, half_y } => [
            slab(origin.x, dir.x, center.0 - half_x, center.0 + half_x)?,
            slab(origin.y, dir.y, center.1 - half_y, center.1 + half_y)?,
        ],
    };
    for (a, b) in spans {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if lo > hi || hi < T::zero() {
        return None;
    }
    Some(lo.max(T::zero()))
}
