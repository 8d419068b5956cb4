use rand::Rng;

use super::{face_window, fuse_dual, FusedPoint, ScanConfig};
use crate::coordsys::body_to_global;
use crate::lrf::{group_sweep, LrfError, LrfGroup, ScanMode, ScanSample};
use crate::simworld::Scene;
use crate::storage::Store;
use crate::{FrameConfig, RobotPose};

/// Output of one normal-mode pass.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalPass {
    pub upper: Vec<ScanSample>,
    pub lower: Vec<ScanSample>,
    pub fused: Vec<FusedPoint>,
}

impl NormalPass {
    pub fn samples(&self) -> impl Iterator<Item = &ScanSample> {
        self.upper.iter().chain(self.lower.iter())
    }
}

/// Both units sweep the forward 180 degree sector; their hits are fused and
/// every sample is handed to the store. No track is built.
pub fn normal_step(
    group: &LrfGroup,
    robot: &RobotPose,
    f: &FrameConfig,
    scene: &Scene,
    rng: &mut impl Rng,
    store: &mut Store,
    config: &ScanConfig,
) -> Result<NormalPass, LrfError> {
    let (mut upper, mut lower) = group_sweep(group, &face_window(f), robot, f, scene, rng)?;
    for s in upper.iter_mut().chain(lower.iter_mut()) {
        s.mode_tag = ScanMode::Normal;
    }
    let fused = fuse_dual(&upper, &lower, config.fusion_gate);
    let robot_global = body_to_global(&robot.position, f);
    store.record_all(upper.iter().chain(lower.iter()), &robot_global);
    Ok(NormalPass { upper, lower, fused })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrf::{LrfId, LrfUnit};
    use crate::simworld::{EntityId, EntityKind, PlacedEntity, Shape};
    use crate::storage::StoragePolicy;
    use crate::{seeded_rng, LrfMount};

    fn group(sigma: f64) -> LrfGroup {
        let res = 0.25_f64.to_radians();
        LrfGroup::new(
            LrfUnit::new(LrfId(1), LrfMount::new(0.0, 0.1, 1.0), 8.0, res, sigma).unwrap(),
            LrfUnit::new(LrfId(2), LrfMount::new(0.0, 0.1, 0.6), 8.0, res, sigma).unwrap(),
        )
        .unwrap()
    }

    fn store() -> Store {
        Store::new(&StoragePolicy::obscured(8.0), &FrameConfig::identity())
    }

    #[test]
    fn empty_scene_all_no_hit() {
        let mut st = store();
        let p = normal_step(&group(0.0), &RobotPose::default(), &FrameConfig::identity(), &crate::simworld::Scene::empty(), &mut seeded_rng(0), &mut st, &ScanConfig::default()).unwrap();
        assert_eq!(p.upper.len() + p.lower.len(), 2 * (720 + 1));
        assert!(p.samples().all(|s| s.hit.is_none() && s.mode_tag == ScanMode::Normal));
        assert!(p.fused.is_empty());
    }

    #[test]
    fn fused_output_matches_direct_fusion() {
        let scene = Scene::new(
            0.0,
            vec![PlacedEntity {
                id: EntityId(3),
                kind: EntityKind::Obstacle,
                shape: Shape::Box { half_x: 2.0, half_y: 0.2 },
                height: 1.5,
                center: (0.0, 3.0),
            }],
        );
        let mut st = store();
        let f = FrameConfig::new(0.4, Default::default());
        let p = normal_step(&group(0.05), &RobotPose::default(), &f, &scene, &mut seeded_rng(7), &mut st, &ScanConfig::default()).unwrap();
        assert_eq!(p.fused, fuse_dual(&p.upper, &p.lower, 0.2));
        assert!(p.fused.iter().filter(|x| x.is_paired()).count() > 100);
    }
}
