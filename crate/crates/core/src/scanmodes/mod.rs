//! Normal and locking scan modes of an LRF group, boundary-angle extraction
//! and the mode transition rule.

mod fusion;
mod locking;
mod normal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lrf::{AzimuthWindow, LrfError, ScanMode, ScanSample};
use crate::real::{ccw_delta, normalize_angle};
use crate::simworld::EntityId;
use crate::{BodyPoint, FrameConfig};

pub use fusion::{fuse_dual, FusedPoint};
pub use locking::{locking_step, seed_lock, LockState, LockingPass, SweepDirection, TrackRecord};
pub use normal::{normal_step, NormalPass};

use std::f64::consts::{FRAC_PI_2, PI};

/// Missing samples tolerated inside one cluster.
pub const GAP_TOLERANCE: usize = 1;
/// Consecutive hits further apart than this start a new cluster (meters).
pub const SPLIT_DISTANCE: f64 = 0.3;
/// Clusters with at most this many hits are folded into a contiguous neighbour.
pub const MIN_CLUSTER_HITS: usize = 2;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error(transparent)]
    Lrf(#[from] LrfError),
    #[error("target {target} lost: no gated cluster in the tracking pass")]
    TargetLost { target: EntityId, pass: Box<LockingPass> },
}

/// Tunables of both scan modes. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    /// Margin added to both sides of the locked interval.
    pub guard: f64,
    /// Consecutive missed passes before locking falls back to normal.
    pub miss_limit: u32,
    /// Planar distance under which upper/lower samples count as the same point.
    pub fusion_gate: f64,
    /// Largest centroid jump accepted for the target between passes.
    pub association_gate: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            guard: 5.0_f64.to_radians(),
            miss_limit: 3,
            fusion_gate: 0.2,
            association_gate: 0.5,
        }
    }
}

/// Boundary angles of one detected object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanInterval {
    /// First boundary angle (counterclockwise start), from R0.
    pub psi_a: f64,
    /// Second boundary angle, from R0.
    pub psi_b: f64,
    /// Counterclockwise angle from the +Y start line to the first boundary line.
    pub deflection: f64,
}

impl ScanInterval {
    pub fn new(psi_a: f64, psi_b: f64, theta_g: f64) -> Self {
        let psi_a = normalize_angle(psi_a);
        Self {
            psi_a,
            psi_b: normalize_angle(psi_b),
            // R0 sits at theta_g from +X; +Y at pi/2
            deflection: normalize_angle(theta_g + psi_a - FRAC_PI_2),
        }
    }

    pub fn scan_angle_range(&self) -> f64 {
        scan_angle_range(self)
    }

    pub fn as_window(&self) -> AzimuthWindow {
        AzimuthWindow {
            start: self.psi_a,
            width: self.scan_angle_range(),
        }
    }
}

/// Counterclockwise extent from the first to the second boundary angle.
pub fn scan_angle_range(i: &ScanInterval) -> f64 {
    ccw_delta(i.psi_a, i.psi_b)
}

/// One cluster of contiguous hits from a single sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedObject {
    /// Most frequent ground-truth tag among the cluster's hits.
    pub label: Option<EntityId>,
    pub interval: ScanInterval,
    pub centroid: BodyPoint,
    pub first_index: usize,
    pub last_index: usize,
    pub hits: usize,
}

/// Clusters a sweep (samples in increasing azimuth order) into objects.
///
/// A cluster tolerates [`GAP_TOLERANCE`] missing samples and splits when two
/// consecutive hits lie more than [`SPLIT_DISTANCE`] apart. Fragments of at
/// most [`MIN_CLUSTER_HITS`] hits that touch a neighbouring cluster without a
/// gap are merged into it; grazing rays along a flat side produce those.
pub fn extract_intervals(samples: &[ScanSample], theta_g: f64) -> Vec<DetectedObject> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if !s.is_hit() {
            continue;
        }
        if let Some(&last) = current.last() {
            let near = i - last <= GAP_TOLERANCE + 1;
            let joined = near && samples[last].body.distance(&s.body) <= SPLIT_DISTANCE;
            if !joined {
                clusters.push(std::mem::take(&mut current));
            }
        }
        current.push(i);
    }
    if !current.is_empty() {
        clusters.push(current);
    }
    let clusters = merge_fragments(clusters);
    clusters
        .into_iter()
        .map(|idx| {
            let first = idx[0];
            let last = idx[idx.len() - 1];
            let n = idx.len() as f64;
            let sum = idx
                .iter()
                .fold(BodyPoint::origin(), |acc, &i| acc.add(&samples[i].body));
            let mut tags: Vec<EntityId> = idx.iter().filter_map(|&i| samples[i].hit).collect();
            tags.sort();
            let label = majority(&tags);
            DetectedObject {
                label,
                interval: ScanInterval::new(samples[first].reading.phi, samples[last].reading.phi, theta_g),
                centroid: sum.scale(1.0 / n),
                first_index: first,
                last_index: last,
                hits: idx.len(),
            }
        })
        .collect()
}

fn merge_fragments(raw: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(raw.len());
    for c in raw {
        match out.last_mut() {
            Some(prev)
                if c[0] - prev[prev.len() - 1] <= GAP_TOLERANCE + 1
                    && (prev.len() <= MIN_CLUSTER_HITS || c.len() <= MIN_CLUSTER_HITS) =>
            {
                prev.extend(c);
            }
            _ => out.push(c),
        }
    }
    out
}

fn majority(sorted: &[EntityId]) -> Option<EntityId> {
    let mut best: Option<(EntityId, usize)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&t| t == sorted[i]).count();
        if best.map_or(true, |(_, c)| j > c) {
            best = Some((sorted[i], j));
        }
        i += j;
    }
    best.map(|(t, _)| t)
}

/// The 180 degree sector facing the robot's forward (+Y) direction, in R0 azimuths.
pub fn face_window(f: &FrameConfig) -> AzimuthWindow {
    AzimuthWindow {
        start: normalize_angle(-f.theta_g),
        width: PI,
    }
}

/// Transition rule between the two modes.
///
/// Normal switches to Locking as soon as the target is detected. Locking
/// returns to Normal after `miss_limit` consecutive passes without the target.
/// Returns the next mode and the updated miss counter.
pub fn mode_transition(mode: ScanMode, misses: u32, target_detected: bool, miss_limit: u32) -> (ScanMode, u32) {
    match (mode, target_detected) {
        (_, true) => (ScanMode::Locking, 0),
        (ScanMode::Normal, false) => (ScanMode::Normal, 0),
        (ScanMode::Locking, false) => {
            let misses = misses + 1;
            if misses >= miss_limit {
                (ScanMode::Normal, 0)
            } else {
                (ScanMode::Locking, misses)
            }
        }
    }
}

/// Stateful wrapper over [`mode_transition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTracker {
    pub mode: ScanMode,
    pub misses: u32,
    pub miss_limit: u32,
}

impl ModeTracker {
    pub fn new(miss_limit: u32) -> Self {
        Self {
            mode: ScanMode::Normal,
            misses: 0,
            miss_limit,
        }
    }

    pub fn observe(&mut self, target_detected: bool) -> ScanMode {
        let (mode, misses) = mode_transition(self.mode, self.misses, target_detected, self.miss_limit);
        self.mode = mode;
        self.misses = misses;
        mode
    }
}
