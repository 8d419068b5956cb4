use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{extract_intervals, face_window, DetectedObject, ScanConfig, ScanError, ScanInterval};
use crate::coordsys::body_to_global;
use crate::lrf::{sweep_azimuths, AzimuthWindow, LrfGroup, LrfId, ScanMode, ScanSample};
use crate::simworld::{EntityId, Scene};
use crate::storage::Store;
use crate::{BodyPoint, FrameConfig, RobotPose};

use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    Forward,
    Reverse,
}

/// One entry of the target's tracking path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackRecord {
    pub time: f64,
    pub centroid_body: BodyPoint,
    pub interval: ScanInterval,
    pub robot_pose: RobotPose,
}

/// Locking-mode controller state for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct LockState {
    pub target_id: EntityId,
    pub interval: ScanInterval,
    pub guard: f64,
    pub tracker_lrf: LrfId,
    pub sweeper_lrf: LrfId,
    pub track: Vec<TrackRecord>,
    pub last_centroid: BodyPoint,
    passes: u64,
}

/// Samples and outcome of one locking pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LockingPass {
    pub direction: SweepDirection,
    pub window: AzimuthWindow,
    /// Tracker samples in the order they were taken.
    pub tracker: Vec<ScanSample>,
    pub sweeper: Vec<ScanSample>,
    pub target: Option<DetectedObject>,
}

impl LockingPass {
    pub fn samples(&self) -> impl Iterator<Item = &ScanSample> {
        self.tracker.iter().chain(self.sweeper.iter())
    }
}

impl LockState {
    /// Window the tracker sweeps next: the locked interval widened by the guard on both sides.
    pub fn window(&self) -> AzimuthWindow {
        let width = (self.interval.scan_angle_range() + 2.0 * self.guard).min(TAU);
        AzimuthWindow {
            start: crate::real::normalize_angle(self.interval.psi_a - self.guard),
            width,
        }
    }

    pub fn next_direction(&self) -> SweepDirection {
        if self.passes % 2 == 0 {
            SweepDirection::Forward
        } else {
            SweepDirection::Reverse
        }
    }

    pub fn passes(&self) -> u64 {
        self.passes
    }
}

/// Starts a lock from a normal-mode detection of the target. The upper unit
/// becomes the tracker and the lower one the sweeper. The detection is the
/// first track record.
pub fn seed_lock(target: &DetectedObject, target_id: EntityId, group: &LrfGroup, robot: &RobotPose, config: &ScanConfig) -> LockState {
    LockState {
        target_id,
        interval: target.interval,
        guard: config.guard,
        tracker_lrf: group.upper.id,
        sweeper_lrf: group.lower.id,
        track: vec![TrackRecord {
            time: robot.time,
            centroid_body: target.centroid,
            interval: target.interval,
            robot_pose: *robot,
        }],
        last_centroid: target.centroid,
        passes: 0,
    }
}

/// One round-trip tracking pass plus the sweeper's pass over the rest of the face.
///
/// The tracker sweeps the guarded window in alternating direction; the target
/// cluster nearest the previous centroid (within the association gate)
/// updates the locked interval and extends the track. The sweeper covers the
/// face sector outside the window. All samples go to the store.
pub fn locking_step(
    lock: &mut LockState,
    group: &LrfGroup,
    robot: &RobotPose,
    f: &FrameConfig,
    scene: &Scene,
    rng: &mut impl Rng,
    store: &mut Store,
    config: &ScanConfig,
) -> Result<LockingPass, ScanError> {
    let tracker = *group.unit(lock.tracker_lrf).expect("tracker belongs to the group");
    let sweeper = *group.unit(lock.sweeper_lrf).expect("sweeper belongs to the group");
    let window = lock.window();
    let direction = lock.next_direction();
    lock.passes += 1;

    let mut azimuths: Vec<f64> = window.grid(tracker.angular_resolution).collect();
    if direction == SweepDirection::Reverse {
        azimuths.reverse();
    }
    let mut tracked = sweep_azimuths(&tracker, tracker.zenith(), azimuths, robot, f, scene, rng)?;
    let rest = face_window(f)
        .grid(sweeper.angular_resolution)
        .filter(|&phi| !window.contains_angle(phi))
        .collect::<Vec<_>>();
    let mut swept = sweep_azimuths(&sweeper, sweeper.zenith(), rest, robot, f, scene, rng)?;
    for s in tracked.iter_mut().chain(swept.iter_mut()) {
        s.mode_tag = ScanMode::Locking;
    }
    store.record_all(tracked.iter().chain(swept.iter()), &body_to_global(&robot.position, f));

    let ascending: Vec<ScanSample> = match direction {
        SweepDirection::Forward => tracked.clone(),
        SweepDirection::Reverse => tracked.iter().rev().copied().collect(),
    };
    let target = extract_intervals(&ascending, f.theta_g)
        .into_iter()
        .filter(|o| o.label == Some(lock.target_id))
        .map(|o| (o.centroid.distance(&lock.last_centroid), o))
        .filter(|(d, _)| *d < config.association_gate)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, o)| o);

    let pass = LockingPass {
        direction,
        window,
        tracker: tracked,
        sweeper: swept,
        target: target.clone(),
    };
    let Some(obj) = target else {
        return Err(ScanError::TargetLost {
            target: lock.target_id,
            pass: Box::new(pass),
        });
    };
    lock.interval = obj.interval;
    lock.last_centroid = obj.centroid;
    if lock.track.last().map_or(true, |r| robot.time > r.time) {
        lock.track.push(TrackRecord {
            time: robot.time,
            centroid_body: obj.centroid,
            interval: obj.interval,
            robot_pose: *robot,
        });
    }
    Ok(pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrf::LrfUnit;
    use crate::scanmodes::normal_step;
    use crate::simworld::{EntityKind, PlacedEntity, Shape};
    use crate::storage::StoragePolicy;
    use crate::{seeded_rng, LrfMount};

    fn group() -> LrfGroup {
        let res = 0.25_f64.to_radians();
        LrfGroup::new(
            LrfUnit::new(LrfId(1), LrfMount::new(0.0, 0.0, 1.0), 8.0, res, 0.0).unwrap(),
            LrfUnit::new(LrfId(2), LrfMount::new(0.0, 0.0, 0.6), 8.0, res, 0.0).unwrap(),
        )
        .unwrap()
    }

    fn person(x: f64, y: f64) -> PlacedEntity {
        PlacedEntity {
            id: EntityId(1),
            kind: EntityKind::Target,
            shape: Shape::Cylinder { radius: 0.25 },
            height: 1.7,
            center: (x, y),
        }
    }

    fn locked(scene: &Scene) -> (LockState, Store) {
        let mut st = Store::new(&StoragePolicy::obscured(8.0), &FrameConfig::identity());
        let cfg = ScanConfig::default();
        let p = normal_step(&group(), &RobotPose::default(), &FrameConfig::identity(), scene, &mut seeded_rng(1), &mut st, &cfg).unwrap();
        let obj = crate::scanmodes::extract_intervals(&p.upper, 0.0)
            .into_iter()
            .find(|o| o.label == Some(EntityId(1)))
            .unwrap();
        (seed_lock(&obj, EntityId(1), &group(), &RobotPose::default(), &cfg), st)
    }

    #[test]
    fn stationary_target_keeps_its_interval() {
        let scene = Scene::new(0.0, vec![person(0.5, 2.5)]);
        let (mut lock, mut st) = locked(&scene);
        let first = lock.interval;
        let mut dirs = Vec::new();
        for k in 1..=6 {
            let robot = RobotPose::new(BodyPoint::origin(), k as f64 * 0.1);
            let pass = locking_step(&mut lock, &group(), &robot, &FrameConfig::identity(), &scene, &mut seeded_rng(k), &mut st, &ScanConfig::default()).unwrap();
            dirs.push(pass.direction);
            let d = (lock.interval.scan_angle_range() - first.scan_angle_range()).abs();
            assert!(d <= 0.25_f64.to_radians() + 1e-12);
            // tracker and sweeper never share an azimuth
            for s in &pass.sweeper {
                assert!(!pass.window.contains_angle(s.reading.phi));
            }
            for s in &pass.tracker {
                assert!(pass.window.contains_angle(s.reading.phi));
            }
        }
        assert_eq!(dirs[0], SweepDirection::Forward);
        assert_eq!(dirs[1], SweepDirection::Reverse);
        assert_eq!(lock.track.len(), 7);
        assert!(lock.track.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn reverse_pass_is_recorded_descending() {
        let scene = Scene::new(0.0, vec![person(-0.5, 3.0)]);
        let (mut lock, mut st) = locked(&scene);
        let cfg = ScanConfig::default();
        let f = FrameConfig::identity();
        locking_step(&mut lock, &group(), &RobotPose::new(BodyPoint::origin(), 0.1), &f, &scene, &mut seeded_rng(2), &mut st, &cfg).unwrap();
        let pass = locking_step(&mut lock, &group(), &RobotPose::new(BodyPoint::origin(), 0.2), &f, &scene, &mut seeded_rng(3), &mut st, &cfg).unwrap();
        assert_eq!(pass.direction, SweepDirection::Reverse);
        assert!(pass.tracker.first().unwrap().reading.phi > pass.tracker.last().unwrap().reading.phi);
    }

    #[test]
    fn vanished_target_is_lost() {
        let scene = Scene::new(0.0, vec![person(0.5, 2.5)]);
        let (mut lock, mut st) = locked(&scene);
        let before = lock.clone();
        let err = locking_step(&mut lock, &group(), &RobotPose::new(BodyPoint::origin(), 0.1), &FrameConfig::identity(), &Scene::empty(), &mut seeded_rng(2), &mut st, &ScanConfig::default()).unwrap_err();
        assert!(matches!(err, ScanError::TargetLost { target: EntityId(1), .. }));
        assert_eq!(lock.interval, before.interval);
        assert_eq!(lock.track.len(), 1);
    }

    #[test]
    fn jump_beyond_gate_is_lost() {
        let scene = Scene::new(0.0, vec![person(0.5, 2.5)]);
        let (mut lock, mut st) = locked(&scene);
        // same bearing, 1 m further: inside the window but outside the centroid gate
        let moved = Scene::new(0.0, vec![person(0.5 * 1.4, 2.5 * 1.4)]);
        let r = locking_step(&mut lock, &group(), &RobotPose::new(BodyPoint::origin(), 0.1), &FrameConfig::identity(), &moved, &mut seeded_rng(2), &mut st, &ScanConfig::default());
        assert!(matches!(r, Err(ScanError::TargetLost { .. })));
    }
}
