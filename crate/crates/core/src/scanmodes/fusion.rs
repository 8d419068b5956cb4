use serde::Serialize;

use crate::lrf::ScanSample;
use crate::real::ccw_delta;
use crate::BodyPoint;

/// Output of dual-scan superposition. Paired points carry both source indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FusedPoint {
    pub body: BodyPoint,
    pub upper: Option<usize>,
    pub lower: Option<usize>,
}

impl FusedPoint {
    pub fn is_paired(&self) -> bool {
        self.upper.is_some() && self.lower.is_some()
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = ccw_delta(a, b);
    d.min(std::f64::consts::TAU - d)
}

/// Averages the body coordinates of upper/lower hits that saw the same spot.
///
/// Each upper hit is associated with the unused lower hit nearest in azimuth;
/// the pair is accepted when their planar distance is below `gate`. The two
/// units share an XY line, so equal azimuths mean coincident ray projections.
/// Paired points come out in upper order (unpaired upper hits interleaved),
/// followed by the unpaired lower hits. NoHit samples are ignored.
pub fn fuse_dual(upper: &[ScanSample], lower: &[ScanSample], gate: f64) -> Vec<FusedPoint> {
    let mut by_phi: Vec<(f64, usize)> = lower
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_hit())
        .map(|(i, s)| (s.reading.phi, i))
        .collect();
    by_phi.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut used = vec![false; by_phi.len()];

    let mut out = Vec::new();
    for (ui, u) in upper.iter().enumerate() {
        if !u.is_hit() {
            continue;
        }
        let partner = nearest_unused(&by_phi, &used, u.reading.phi)
            .filter(|&k| lower[by_phi[k].1].body.planar_distance(&u.body) < gate);
        match partner {
            Some(k) => {
                used[k] = true;
                let li = by_phi[k].1;
                out.push(FusedPoint {
                    body: u.body.add(&lower[li].body).scale(0.5),
                    upper: Some(ui),
                    lower: Some(li),
                });
            }
            None => out.push(FusedPoint {
                body: u.body,
                upper: Some(ui),
                lower: None,
            }),
        }
    }
    let mut rest: Vec<usize> = (0..by_phi.len()).filter(|&k| !used[k]).map(|k| by_phi[k].1).collect();
    rest.sort_unstable();
    out.extend(rest.into_iter().map(|li| FusedPoint {
        body: lower[li].body,
        upper: None,
        lower: Some(li),
    }));
    out
}

fn nearest_unused(by_phi: &[(f64, usize)], used: &[bool], phi: f64) -> Option<usize> {
    let n = by_phi.len();
    if n == 0 {
        return None;
    }
    let pos = by_phi.partition_point(|e| e.0 < phi) as isize;
    // first unused candidate walking down, then walking up (with wrap)
    let below = (1..=n as isize)
        .map(|s| (pos - s).rem_euclid(n as isize) as usize)
        .find(|&k| !used[k]);
    let above = (0..n as isize)
        .map(|s| (pos + s).rem_euclid(n as isize) as usize)
        .find(|&k| !used[k]);
    [below, above]
        .into_iter()
        .flatten()
        .min_by(|&a, &b| {
            circular_gap(phi, by_phi[a].0)
                .total_cmp(&circular_gap(phi, by_phi[b].0))
                .then(a.cmp(&b))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrf::{LrfId, ScanMode};
    use crate::simworld::EntityId;
    use crate::{GlobalPoint, SphericalPoint};

    fn sample(id: u32, phi: f64, x: f64, y: f64, z: f64) -> ScanSample {
        ScanSample {
            time: 0.0,
            lrf_id: LrfId(id),
            reading: SphericalPoint { r: 1.0, phi, theta: 1.0 },
            body: BodyPoint::new(x, y, z),
            global: GlobalPoint::default(),
            hit: Some(EntityId(1)),
            mode_tag: ScanMode::Normal,
        }
    }

    #[test]
    fn identical_sweeps_fuse_to_themselves() {
        let up: Vec<_> = (0..10).map(|i| sample(1, i as f64 * 0.1, i as f64, 2.0, 0.5)).collect();
        let fused = fuse_dual(&up, &up, 0.2);
        assert_eq!(fused.len(), 10);
        for (f, u) in fused.iter().zip(&up) {
            assert!(f.is_paired());
            assert_eq!(f.body, u.body);
        }
    }

    #[test]
    fn pair_is_arithmetic_mean() {
        let f = fuse_dual(&[sample(1, 0.0, 1.0, 0.0, 0.0)], &[sample(2, 0.0, 1.2, 0.0, 0.0)], 0.2);
        assert_eq!(f.len(), 1);
        assert!((f[0].body.x - 1.1).abs() < 1e-15 && f[0].body.y == 0.0);
    }

    #[test]
    fn gate_rejects_far_partner_and_passes_through() {
        let up = [sample(1, 0.0, 1.0, 0.0, 1.0)];
        let lo = [sample(2, 0.0, 1.5, 0.0, 0.5)];
        let f = fuse_dual(&up, &lo, 0.2);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].body, up[0].body);
        assert_eq!(f[1].body, lo[0].body);
        assert!(!f[0].is_paired() && !f[1].is_paired());
    }

    #[test]
    fn association_by_azimuth_not_by_closeness() {
        // the lower sample at the same azimuth wins even if a neighbour is closer in XY
        let up = [sample(1, 1.0, 2.0, 0.0, 1.0)];
        let lo = [sample(2, 0.99, 2.01, 0.0, 0.5), sample(2, 1.0, 2.1, 0.0, 0.5)];
        let f = fuse_dual(&up, &lo, 0.2);
        assert_eq!(f[0].lower, Some(1));
    }

    #[test]
    fn wraps_around_zero() {
        let up = [sample(1, 0.001, 2.0, 0.0, 1.0)];
        let lo = [sample(2, 6.2829, 2.05, 0.0, 0.5), sample(2, 0.2, 2.0, 0.1, 0.5)];
        let f = fuse_dual(&up, &lo, 0.2);
        assert_eq!(f[0].lower, Some(0));
    }

    #[test]
    fn each_lower_used_once() {
        let up = [sample(1, 1.0, 2.0, 0.0, 1.0), sample(1, 1.0, 2.0, 0.01, 1.0)];
        let lo = [sample(2, 1.0, 2.0, 0.0, 0.5)];
        let f = fuse_dual(&up, &lo, 0.2);
        assert_eq!(f.iter().filter(|p| p.is_paired()).count(), 1);
        assert_eq!(f.len(), 2);
    }
}
