use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::lrf::ScanSample;
use crate::GlobalPoint;

/// Forgetting store. Samples are keyed by the planar global cell they fall in
/// (side `spacing`); a newer sample replaces an older one in the same cell.
///
/// After every insert a cell survives only if its center lies within
/// `max_retention_range - spacing / sqrt(2)` of the robot and its sample
/// within `max_retention_range`. Retained cells then sit entirely inside the
/// retention disk, which bounds the count by `pi R^2 / spacing^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObscuredStore {
    pub max_retention_range: f64,
    pub spacing: f64,
    samples: BTreeMap<(i64, i64), ScanSample>,
}

fn cell_center(key: (i64, i64), spacing: f64) -> (f64, f64) {
    ((key.0 as f64 + 0.5) * spacing, (key.1 as f64 + 0.5) * spacing)
}

impl ObscuredStore {
    pub fn new(max_retention_range: f64, spacing: f64) -> Self {
        Self {
            max_retention_range,
            spacing,
            samples: BTreeMap::new(),
        }
    }

    fn key(&self, g: &GlobalPoint) -> (i64, i64) {
        ((g.gx / self.spacing).floor() as i64, (g.gy / self.spacing).floor() as i64)
    }

    /// Largest number of samples the store can hold.
    pub fn capacity_bound(&self) -> f64 {
        std::f64::consts::PI * self.max_retention_range.powi(2) / self.spacing.powi(2)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScanSample> {
        self.samples.values()
    }

    pub fn record(&mut self, sample: &ScanSample, robot_global: &GlobalPoint) {
        self.record_all(std::iter::once(sample), robot_global);
    }

    /// Inserts every sample, then evicts once. Equivalent to per-sample
    /// [`record`](Self::record) since eviction only depends on the robot position.
    pub fn record_all<'a>(&mut self, samples: impl IntoIterator<Item = &'a ScanSample>, robot_global: &GlobalPoint) {
        for s in samples {
            let k = self.key(&s.global);
            self.samples.insert(k, *s);
        }
        self.evict(robot_global);
    }

    pub fn evict(&mut self, robot_global: &GlobalPoint) {
        let r = self.max_retention_range;
        let inner = r - self.spacing * FRAC_1_SQRT_2;
        let spacing = self.spacing;
        self.samples.retain(|&k, s| {
            let (cx, cy) = cell_center(k, spacing);
            let planar = (cx - robot_global.gx).hypot(cy - robot_global.gy);
            planar <= inner && s.global.distance(robot_global) <= r
        });
    }

    /// Retained samples within `radius` of `center`, ordered by time, unit and azimuth.
    pub fn query_region(&self, center: &GlobalPoint, radius: f64) -> Vec<ScanSample> {
        let mut out: Vec<ScanSample> = self
            .samples
            .values()
            .filter(|s| s.global.distance(center) <= radius)
            .copied()
            .collect();
        out.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then(a.lrf_id.cmp(&b.lrf_id))
                .then(a.reading.phi.total_cmp(&b.reading.phi))
        });
        out
    }
}
