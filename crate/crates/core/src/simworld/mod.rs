//! Scripted 2.5-D world: the target person, irrelevant humans and obstacles
//! as vertical prisms on piecewise-linear motion scripts, the robot pose
//! track, and the brute-force oracles the scan-mode code is checked against.

mod bench;
pub mod geometry;
mod run;
mod scenario;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordsys::ray_direction_body;
use crate::lrf::{AzimuthWindow, LrfError, LrfGroup};
use crate::real::{ccw_delta, normalize_angle};
use crate::scanmodes::{ScanConfig, ScanError, ScanInterval};
use crate::storage::StoragePolicy;
use crate::{BodyPoint, FrameConfig, RobotPose};

pub use bench::{fusion_benchmark, FusionStats};
pub use geometry::{intersect_prism, Shape};
pub use run::{run, ModeSegment, PassLog, RunReport, RunStats, Simulation, StepOutput};
pub use scenario::{parse_scenario, ScenarioError, ScenarioFile, BUNDLED_SCENARIOS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl std::fmt::Display for EntityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Target,
    IrrelevantHuman,
    Obstacle,
}

/// Timed planar position of an entity's footprint center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: EntityId,
    pub kind: EntityKind,
    pub shape: Shape<f64>,
    pub height: f64,
    pub motion: Vec<Waypoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frame: FrameConfig,
    pub robot_track: Vec<RobotPose>,
    pub group: LrfGroup,
    pub entities: Vec<Entity>,
    pub duration: f64,
    pub step_dt: f64,
    pub seed: u64,
    pub policy: StoragePolicy,
    pub scan: ScanConfig,
}

/// Entity resolved at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacedEntity {
    pub id: EntityId,
    pub kind: EntityKind,
    pub shape: Shape<f64>,
    pub height: f64,
    pub center: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub time: f64,
    pub entities: Vec<PlacedEntity>,
    pub robot: RobotPose,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub entity: EntityId,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time {t} outside scenario range [0, {duration}]")]
    OutOfTimeRange { t: f64, duration: f64 },
    #[error(transparent)]
    Lrf(#[from] LrfError),
    #[error(transparent)]
    Scan(#[from] ScanError),
}

impl Scene {
    /// A scene without a robot track, robot parked at the origin.
    pub fn new(time: f64, entities: Vec<PlacedEntity>) -> Self {
        Self {
            time,
            entities,
            robot: RobotPose::new(BodyPoint::origin(), time),
        }
    }

    pub fn empty() -> Self {
        Self::new(0.0, Vec::new())
    }

    pub fn entity(&self, id: EntityId) -> Option<&PlacedEntity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn target(&self) -> Option<&PlacedEntity> {
        self.entities.iter().find(|e| e.kind == EntityKind::Target)
    }
}

impl Scenario {
    pub fn target_id(&self) -> Option<EntityId> {
        self.entities
            .iter()
            .find(|e| e.kind == EntityKind::Target)
            .map(|e| e.id)
    }

    /// Number of passes a run executes: one every `step_dt` over `[0, duration)`.
    pub fn pass_count(&self) -> usize {
        if self.duration <= 0.0 {
            return 0;
        }
        (self.duration / self.step_dt - 1e-9).ceil().max(0.0) as usize
    }
}

fn lerp_track<P: Copy>(track: &[(f64, P)], t: f64, mix: impl Fn(P, P, f64) -> P) -> P {
    let first = track[0];
    if t <= first.0 {
        return first.1;
    }
    for w in track.windows(2) {
        let (t0, p0) = w[0];
        let (t1, p1) = w[1];
        if t <= t1 {
            return mix(p0, p1, (t - t0) / (t1 - t0));
        }
    }
    track[track.len() - 1].1
}

/// Resolves every motion script at time `t`. Positions hold before the first
/// and after the last waypoint.
pub fn scene_at(scenario: &Scenario, t: f64) -> Result<Scene, SimError> {
    if !(t >= 0.0 && t <= scenario.duration) {
        return Err(SimError::OutOfTimeRange {
            t,
            duration: scenario.duration,
        });
    }
    let entities = scenario
        .entities
        .iter()
        .map(|e| {
            let track: Vec<(f64, (f64, f64))> = e.motion.iter().map(|w| (w.t, (w.x, w.y))).collect();
            let center = lerp_track(&track, t, |a, b, s| (a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s));
            PlacedEntity {
                id: e.id,
                kind: e.kind,
                shape: e.shape,
                height: e.height,
                center,
            }
        })
        .collect();
    let track: Vec<(f64, BodyPoint)> = scenario
        .robot_track
        .iter()
        .map(|p| (p.time, p.position))
        .collect();
    let position = lerp_track(&track, t, |a, b, s| a.add(&b.sub(&a).scale(s)));
    Ok(Scene {
        time: t,
        entities,
        robot: RobotPose::new(position, t),
    })
}

/// Nearest intersection of a unit ray with any entity volume.
pub fn ray_cast(origin: &BodyPoint, direction: &BodyPoint, scene: &Scene) -> Option<RayHit> {
    let mut best: Option<RayHit> = None;
    for e in &scene.entities {
        if let Some(d) = intersect_prism(origin, direction, &e.shape, e.center, e.height) {
            if best.map_or(true, |b| d < b.distance) {
                best = Some(RayHit {
                    distance: d,
                    entity: e.id,
                });
            }
        }
    }
    best
}

/// Position and pointing of an LRF for oracle sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrfPose {
    pub exit: BodyPoint,
    pub zenith: f64,
    pub frame: FrameConfig,
    pub max_range: f64,
}

/// Dense noiseless sweep over `window`, clustered by ground-truth entity
/// identity (no gap tolerance). Intervals come back in sweep order.
pub fn brute_force_intervals(
    scene: &Scene,
    pose: &LrfPose,
    window: &AzimuthWindow,
    resolution: f64,
) -> Vec<(EntityId, ScanInterval)> {
    let steps = (window.width / resolution + 1e-9).floor() as usize;
    let mut out = Vec::new();
    let mut run: Option<(EntityId, f64, f64)> = None;
    for k in 0..=steps {
        let phi = normalize_angle(window.start + k as f64 * resolution);
        let dir = ray_direction_body(phi, pose.zenith, &pose.frame);
        let hit = ray_cast(&pose.exit, &dir, scene)
            .filter(|h| h.distance <= pose.max_range)
            .map(|h| h.entity);
        match (run, hit) {
            (Some((id, a, _)), Some(h)) if h == id => run = Some((id, a, phi)),
            (current, h) => {
                if let Some((id, a, b)) = current {
                    out.push((id, ScanInterval::new(a, b, pose.frame.theta_g)));
                }
                run = h.map(|id| (id, phi, phi));
            }
        }
    }
    if let Some((id, a, b)) = run {
        out.push((id, ScanInterval::new(a, b, pose.frame.theta_g)));
    }
    out
}

/// Exact azimuth span (R0-referenced) an entity subtends for horizontal rays
/// from `exit`, or `None` when the exit point is inside the footprint or
/// outside the entity's height band.
pub fn true_subtended_span(entity: &PlacedEntity, exit: &BodyPoint, frame: &FrameConfig) -> Option<AzimuthWindow> {
    if exit.z < 0.0 || exit.z > entity.height || entity.shape.contains_xy(entity.center, exit.x, exit.y) {
        return None;
    }
    let (dx, dy) = (entity.center.0 - exit.x, entity.center.1 - exit.y);
    let bearing = dy.atan2(dx);
    let (lo, hi) = match entity.shape {
        Shape::Cylinder { radius } => {
            let half = (radius / dx.hypot(dy)).asin();
            (-half, half)
        }
        Shape::Box { half_x, half_y } => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (sx, sy) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                let a = (dy + sy * half_y).atan2(dx + sx * half_x);
                let mut off = normalize_angle(a - bearing);
                if off > std::f64::consts::PI {
                    off -= std::f64::consts::TAU;
                }
                lo = lo.min(off);
                hi = hi.max(off);
            }
            (lo, hi)
        }
    };
    Some(AzimuthWindow {
        start: normalize_angle(bearing + lo - frame.theta_g),
        width: hi - lo,
    })
}

/// Whether `inner` lies inside `outer`, both taken counterclockwise from their starts.
pub fn span_contains(outer: &AzimuthWindow, inner: &AzimuthWindow) -> bool {
    let off = ccw_delta(outer.start, inner.start);
    // allow the start to sit a hair before the outer start
    let off = if off > std::f64::consts::PI * 1.5 { off - std::f64::consts::TAU } else { off };
    off >= -1e-12 && off + inner.width <= outer.width + 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn disk(id: u32, x: f64, y: f64, r: f64) -> PlacedEntity {
        PlacedEntity {
            id: EntityId(id),
            kind: EntityKind::Obstacle,
            shape: Shape::Cylinder { radius: r },
            height: 2.0,
            center: (x, y),
        }
    }

    fn pose() -> LrfPose {
        LrfPose {
            exit: BodyPoint::new(0.0, 0.0, 1.0),
            zenith: FRAC_PI_2,
            frame: FrameConfig::identity(),
            max_range: 30.0,
        }
    }

    #[test]
    fn ray_cast_nearest_entity() {
        let scene = Scene::new(0.0, vec![disk(1, 5.0, 0.0, 1.0), disk(2, 9.0, 0.0, 1.0)]);
        let hit = ray_cast(&BodyPoint::new(0.0, 0.0, 1.0), &BodyPoint::new(1.0, 0.0, 0.0), &scene).unwrap();
        assert_eq!(hit.entity, EntityId(1));
        assert!((hit.distance - 4.0).abs() < 1e-12);
        assert!(ray_cast(&BodyPoint::new(0.0, 0.0, 1.0), &BodyPoint::new(-1.0, 0.0, 0.0), &scene).is_none());
    }

    #[test]
    fn single_disk_interval_matches_subtended_angle() {
        let d = 4.0;
        let rho = 0.5;
        let scene = Scene::new(0.0, vec![disk(1, d * 0.6, d * 0.8, rho)]);
        let res = (0.01_f64).to_radians();
        let window = AzimuthWindow::new(0.0, PI).unwrap();
        let iv = brute_force_intervals(&scene, &pose(), &window, res);
        assert_eq!(iv.len(), 1);
        let expected = 2.0 * (rho / d).asin();
        assert!((iv[0].1.scan_angle_range() - expected).abs() <= 2.0 * res);
    }

    #[test]
    fn two_disks_in_sweep_order() {
        let scene = Scene::new(0.0, vec![disk(7, -3.0, 1.0, 0.4), disk(3, 3.0, 1.0, 0.4)]);
        let window = AzimuthWindow::new(0.0, PI).unwrap();
        let iv = brute_force_intervals(&scene, &pose(), &window, 0.001);
        let ids: Vec<_> = iv.iter().map(|(id, _)| id.0).collect();
        assert_eq!(ids, vec![3, 7]);
        assert!(iv[0].1.psi_a < iv[1].1.psi_a);
    }

    #[test]
    fn empty_scene_has_no_intervals() {
        let window = AzimuthWindow::new(0.0, PI).unwrap();
        assert!(brute_force_intervals(&Scene::empty(), &pose(), &window, 0.01).is_empty());
    }

    #[test]
    fn subtended_span_of_disk_and_box() {
        let e = disk(1, 0.0, 3.0, 0.3);
        let s = true_subtended_span(&e, &BodyPoint::new(0.0, 0.0, 1.0), &FrameConfig::identity()).unwrap();
        assert!((s.width - 2.0 * (0.1_f64).asin()).abs() < 1e-12);
        assert!((s.start + s.width / 2.0 - FRAC_PI_2).abs() < 1e-12);

        let b = PlacedEntity {
            shape: Shape::Box { half_x: 1.0, half_y: 0.5 },
            ..disk(2, 0.0, 3.0, 1.0)
        };
        let s = true_subtended_span(&b, &BodyPoint::new(0.0, 0.0, 1.0), &FrameConfig::identity()).unwrap();
        // nearest face corners at (+-1, 2.5)
        assert!((s.width - 2.0 * (1.0_f64).atan2(2.5)).abs() < 1e-12);
    }

    #[test]
    fn span_containment() {
        let outer = AzimuthWindow { start: 6.0, width: 1.0 };
        assert!(span_contains(&outer, &AzimuthWindow { start: 6.1, width: 0.5 }));
        assert!(span_contains(&outer, &AzimuthWindow { start: 0.1, width: 0.5 }));
        assert!(!span_contains(&outer, &AzimuthWindow { start: 0.5, width: 0.5 }));
        assert!(!span_contains(&outer, &AzimuthWindow { start: 5.9, width: 0.5 }));
    }
}
