//! Scan-data storage policies: obscured (forgetting) storage and map
//! planning storage backed by a counting occupancy grid.

mod obscured;
mod occupancy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lrf::ScanSample;
use crate::{FrameConfig, GlobalPoint};

pub use obscured::ObscuredStore;
pub use occupancy::{load_map, save_map, CellCounts, CellState, CellSummary, OccupancyMap, MAP_FORMAT_VERSION, MAP_MAGIC};

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("map file format/version mismatch: {0}")]
    FormatVersionMismatch(String),
    #[error("hit at ({gx}, {gy}) falls outside the map grid")]
    OutOfGrid { gx: f64, gy: f64 },
}

fn default_spacing() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoragePolicy {
    Obscured {
        max_retention_range: f64,
        /// Side of the position cells samples are keyed by (meters).
        #[serde(default = "default_spacing")]
        min_sample_spacing: f64,
    },
    MapPlanning {
        grid_resolution: f64,
        grid_extent: f64,
    },
}

impl StoragePolicy {
    pub fn obscured(max_retention_range: f64) -> Self {
        StoragePolicy::Obscured {
            max_retention_range,
            min_sample_spacing: default_spacing(),
        }
    }

    pub fn map(grid_resolution: f64, grid_extent: f64) -> Self {
        StoragePolicy::MapPlanning {
            grid_resolution,
            grid_extent,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        match *self {
            StoragePolicy::Obscured {
                max_retention_range,
                min_sample_spacing,
            } => {
                ok("max_retention_range", max_retention_range)?;
                ok("min_sample_spacing", min_sample_spacing)?;
                if min_sample_spacing * std::f64::consts::FRAC_1_SQRT_2 >= max_retention_range {
                    return Err("min_sample_spacing too coarse for max_retention_range".into());
                }
                Ok(())
            }
            StoragePolicy::MapPlanning {
                grid_resolution,
                grid_extent,
            } => {
                ok("grid_resolution", grid_resolution)?;
                ok("grid_extent", grid_extent)
            }
        }
    }
}

/// Result of a region query.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionContents {
    Samples(Vec<ScanSample>),
    Cells(Vec<CellSummary>),
}

/// The active store of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Store {
    Obscured(ObscuredStore),
    Map(OccupancyMap),
}

impl Store {
    /// Map grids are centered on the global origin of `frame`.
    pub fn new(policy: &StoragePolicy, frame: &FrameConfig) -> Self {
        match *policy {
            StoragePolicy::Obscured {
                max_retention_range,
                min_sample_spacing,
            } => Store::Obscured(ObscuredStore::new(max_retention_range, min_sample_spacing)),
            StoragePolicy::MapPlanning {
                grid_resolution,
                grid_extent,
            } => {
                let o = frame.global_origin;
                let corner = GlobalPoint::new(o.gx - grid_extent / 2.0, o.gy - grid_extent / 2.0, o.gz);
                Store::Map(OccupancyMap::new(corner, grid_resolution, grid_extent))
            }
        }
    }

    /// Out-of-grid hits in map mode are dropped and counted on the map.
    pub fn record(&mut self, sample: &ScanSample, robot_global: &GlobalPoint) {
        match self {
            Store::Obscured(s) => s.record(sample, robot_global),
            Store::Map(m) => {
                let _ = m.record(sample);
            }
        }
    }

    pub fn record_all<'a>(&mut self, samples: impl IntoIterator<Item = &'a ScanSample>, robot_global: &GlobalPoint) {
        match self {
            Store::Obscured(s) => s.record_all(samples, robot_global),
            Store::Map(m) => {
                for sample in samples {
                    let _ = m.record(sample);
                }
            }
        }
    }

    pub fn query_region(&self, center: &GlobalPoint, radius: f64) -> RegionContents {
        match self {
            Store::Obscured(s) => RegionContents::Samples(s.query_region(center, radius)),
            Store::Map(m) => RegionContents::Cells(m.query_region(center, radius)),
        }
    }

    pub fn as_map(&self) -> Option<&OccupancyMap> {
        match self {
            Store::Map(m) => Some(m),
            Store::Obscured(_) => None,
        }
    }
}
