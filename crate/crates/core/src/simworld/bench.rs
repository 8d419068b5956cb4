use serde::Serialize;

use super::{ray_cast, EntityId, EntityKind, PlacedEntity, Scene, Shape};
use crate::coordsys::ray_direction_body;
use crate::lrf::{group_sweep, LrfGroup, LrfId, LrfUnit, ScanSample};
use crate::scanmodes::{face_window, fuse_dual};
use crate::{seeded_rng, BodyPoint, FrameConfig, LrfMount, RobotPose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FusionStats {
    pub pairs: usize,
    pub single_rms: f64,
    pub fused_rms: f64,
    pub ratio: f64,
}

fn true_point(s: &ScanSample, unit: &LrfUnit, robot: &RobotPose, f: &FrameConfig, scene: &Scene) -> BodyPoint {
    let origin = robot.exit_point(&unit.mount);
    let dir = ray_direction_body(s.reading.phi, s.reading.theta, f);
    let hit = ray_cast(&origin, &dir, scene).expect("benchmark sample is a hit");
    origin.add(&dir.scale(hit.distance))
}

/// Repeated normal-mode sweeps of a flat wall 3 m ahead until `pairs` fused
/// pairs are collected. Errors are Euclidean distances to the noiseless hit
/// points; the single-unit RMS is taken over both members of every pair.
pub fn fusion_benchmark(sigma: f64, pairs: usize, seed: u64) -> FusionStats {
    let res = 0.25_f64.to_radians();
    let group = LrfGroup::new(
        LrfUnit::new(LrfId(1), LrfMount::new(0.0, 0.0, 1.0), 8.0, res, sigma).expect("valid unit"),
        LrfUnit::new(LrfId(2), LrfMount::new(0.0, 0.0, 0.6), 8.0, res, sigma).expect("valid unit"),
    )
    .expect("aligned group");
    let f = FrameConfig::identity();
    let scene = Scene::new(
        0.0,
        vec![PlacedEntity {
            id: EntityId(1),
            kind: EntityKind::Obstacle,
            shape: Shape::Box { half_x: 4.0, half_y: 0.05 },
            height: 2.0,
            center: (0.0, 3.0),
        }],
    );
    let robot = RobotPose::default();
    let mut rng = seeded_rng(seed);

    let (mut single_sq, mut fused_sq, mut n_single, mut n) = (0.0, 0.0, 0usize, 0usize);
    while n < pairs {
        let (upper, lower) = group_sweep(&group, &face_window(&f), &robot, &f, &scene, &mut rng).expect("valid sweep");
        for p in fuse_dual(&upper, &lower, 0.2) {
            let (Some(ui), Some(li)) = (p.upper, p.lower) else {
                continue;
            };
            if n == pairs {
                break;
            }
            let tu = true_point(&upper[ui], &group.upper, &robot, &f, &scene);
            let tl = true_point(&lower[li], &group.lower, &robot, &f, &scene);
            single_sq += upper[ui].body.distance(&tu).powi(2) + lower[li].body.distance(&tl).powi(2);
            n_single += 2;
            fused_sq += p.body.distance(&tu.add(&tl).scale(0.5)).powi(2);
            n += 1;
        }
    }
    let single_rms = (single_sq / n_single.max(1) as f64).sqrt();
    let fused_rms = (fused_sq / n.max(1) as f64).sqrt();
    FusionStats {
        pairs: n,
        single_rms,
        fused_rms,
        ratio: fused_rms / single_rms,
    }
}
