use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use lrfsim::coordsys::{
    self, body_to_global, body_to_spherical, global_to_body, global_to_spherical, spherical_to_body, spherical_to_global,
};
use lrfsim::lrf::{LrfId, ScanMode, ScanSample};
use lrfsim::real::{ccw_delta, normalize_angle};
use lrfsim::scanmodes::{mode_transition, ScanInterval};
use lrfsim::simworld::{intersect_prism, Shape};
use lrfsim::storage::{CellCounts, ObscuredStore, OccupancyMap};
use lrfsim::{BodyPoint, BodyPoint32, FrameConfig, FrameConfig32, GlobalPoint, LrfMount, RobotPose, SphericalPoint};

fn frame() -> impl Strategy<Value = FrameConfig> {
    (0.0..TAU, -100.0..100.0, -100.0..100.0, -3.0..3.0_f64)
        .prop_map(|(t, x, y, z)| FrameConfig::new(t, GlobalPoint::new(x, y, z)))
}

fn body() -> impl Strategy<Value = BodyPoint> {
    (-50.0..50.0, -50.0..50.0, -10.0..10.0_f64).prop_map(|(x, y, z)| BodyPoint::new(x, y, z))
}

fn mount() -> impl Strategy<Value = LrfMount> {
    (-0.5..0.5, -0.5..0.5, 0.1..1.5_f64).prop_map(|(x, y, z)| LrfMount::new(x, y, z))
}

proptest! {
    #[test]
    fn global_body_round_trip(f in frame(), b in body()) {
        let back = global_to_body(&body_to_global(&b, &f), &f);
        prop_assert!(back.distance(&b) < 1e-9);
    }

    #[test]
    fn body_to_global_is_an_isometry(f in frame(), a in body(), b in body()) {
        let d = body_to_global(&a, &f).distance(&body_to_global(&b, &f));
        prop_assert!((d - a.distance(&b)).abs() < 1e-9);
        // heights only shift by the origin
        prop_assert!((body_to_global(&a, &f).gz - a.z - f.global_origin.gz).abs() < 1e-12);
    }

    #[test]
    fn spherical_round_trip(f in frame(), robot in body(), m in mount(), p in body()) {
        let robot = RobotPose::new(robot, 0.0);
        if let Ok(s) = body_to_spherical(&p, &robot, &m, &f) {
            prop_assert!(s.phi >= 0.0 && s.phi < TAU);
            prop_assert!((0.0..=PI).contains(&s.theta));
            prop_assert!((s.r - p.distance(&robot.exit_point(&m))).abs() < 1e-9);
            prop_assert!(spherical_to_body(&s, &robot, &m, &f).distance(&p) < 1e-9);
        }
    }

    #[test]
    fn hub_law_is_exact(f in frame(), robot in body(), m in mount(), p in body(),
                        r in 0.01..40.0_f64, phi in 0.0..TAU, theta in 0.0..PI) {
        let robot = RobotPose::new(robot, 0.0);
        let g = body_to_global(&p, &f);
        if let Ok(s) = global_to_spherical(&g, &robot, &m, &f) {
            prop_assert_eq!(s, body_to_spherical(&global_to_body(&g, &f), &robot, &m, &f).unwrap());
        }
        let s = SphericalPoint::new(r, phi, theta).unwrap();
        prop_assert_eq!(spherical_to_global(&s, &robot, &m, &f), body_to_global(&spherical_to_body(&s, &robot, &m, &f), &f));
    }

    #[test]
    fn single_precision_round_trip(t in 0.0..6.28_f32, x in -20.0..20.0_f32, y in -20.0..20.0_f32, z in -2.0..2.0_f32) {
        let f = FrameConfig32::new(t, coordsys::GlobalPoint::new(1.5, -2.0, 0.25));
        let b = BodyPoint32::new(x, y, z);
        let back = global_to_body(&body_to_global(&b, &f), &f);
        prop_assert!(back.distance(&b) < 1e-4);
    }

    #[test]
    fn angles_wrap_into_range(a in -1e4..1e4_f64, b in -1e4..1e4_f64) {
        let n = normalize_angle(a);
        prop_assert!((0.0..TAU).contains(&n));
        prop_assert!(((n - a) / TAU - ((n - a) / TAU).round()).abs() < 1e-9);
        let d = ccw_delta(a, b);
        prop_assert!((0.0..TAU).contains(&d));
    }

    #[test]
    fn interval_range_matches_ccw_span(a in 0.0..TAU, w in 0.0..PI, tg in 0.0..TAU) {
        let i = ScanInterval::new(a, normalize_angle(a + w), tg);
        prop_assert!((i.scan_angle_range() - w).abs() < 1e-9);
        prop_assert!((0.0..TAU).contains(&i.deflection));
    }

    #[test]
    fn cylinder_hit_lies_on_its_surface(cx in -5.0..5.0_f64, cy in 2.0..8.0_f64, rho in 0.1..1.5_f64, bearing in 0.2..2.9_f64) {
        let o = BodyPoint::new(0.0, 0.0, 1.0);
        let dir = BodyPoint::new(bearing.cos(), bearing.sin(), 0.0);
        if let Some(d) = intersect_prism(&o, &dir, &Shape::Cylinder { radius: rho }, (cx, cy), 2.0) {
            let p = o.add(&dir.scale(d));
            prop_assert!(((p.x - cx).hypot(p.y - cy) - rho).abs() < 1e-9);
            // nothing closer along the ray is inside the disk
            let q = o.add(&dir.scale(d * 0.999));
            prop_assert!((q.x - cx).hypot(q.y - cy) >= rho - 1e-9);
        }
    }

    #[test]
    fn miss_limit_consecutive_misses_return_to_normal(limit in 1u32..8, seen in proptest::collection::vec(any::<bool>(), 0..40)) {
        let (mut mode, mut misses) = (ScanMode::Normal, 0);
        let mut run = 0;
        for &s in &seen {
            let prev = mode;
            (mode, misses) = mode_transition(mode, misses, s, limit);
            run = if s { 0 } else { run + 1 };
            if s {
                prop_assert_eq!(mode, ScanMode::Locking);
            } else if prev == ScanMode::Locking {
                prop_assert_eq!(mode == ScanMode::Normal, misses == 0 && run >= limit as usize);
            } else {
                prop_assert_eq!(mode, ScanMode::Normal);
            }
            prop_assert!(misses < limit);
        }
    }

    #[test]
    fn obscured_store_respects_bound(points in proptest::collection::vec((-12.0..12.0_f64, -12.0..12.0_f64, 0.0..2.0_f64), 1..400),
                                     rx in -3.0..3.0_f64, ry in -3.0..3.0_f64) {
        let (r, s) = (5.0, 0.5);
        let mut store = ObscuredStore::new(r, s);
        let robot = GlobalPoint::new(rx, ry, 0.0);
        for (i, &(x, y, z)) in points.iter().enumerate() {
            let sample = ScanSample {
                time: i as f64,
                lrf_id: LrfId(1),
                reading: SphericalPoint { r: 1.0, phi: 0.0, theta: 1.0 },
                body: BodyPoint::origin(),
                global: GlobalPoint::new(x, y, z),
                hit: None,
                mode_tag: ScanMode::Normal,
            };
            store.record(&sample, &robot);
            prop_assert!(store.len() as f64 <= store.capacity_bound());
            prop_assert!(store.iter().all(|x| x.global.distance(&robot) <= r));
        }
    }

    #[test]
    fn map_bytes_round_trip(res in 0.05..1.0_f64, extent in 0.5..10.0_f64, counts in proptest::collection::vec((any::<u32>(), any::<u32>()), 0..50)) {
        let mut m = OccupancyMap::new(GlobalPoint::new(-1.0, 2.0, 0.5), res, extent);
        let n = m.cells().len();
        for (k, &(h, mi)) in counts.iter().enumerate() {
            m.cells_mut()[k * 7919 % n] = CellCounts { hits: h, misses: mi };
        }
        let bytes = m.to_bytes();
        let back = OccupancyMap::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_bytes(), bytes);
    }
}
