//! Scenario JSON schema. Angles are degrees in the file and radians in memory.
//!
//! ```json
//! {
//!   "name": "demo",
//!   "seed": 1,
//!   "duration": 4.0,
//!   "step_dt": 0.05,
//!   "frame": { "theta_g_deg": 30.0, "global_origin": [gx, gy, gz] },
//!   "robot_track": [[t, x, y, z], ...],
//!   "group": {
//!     "mounts": [[x, y, z_upper], [x, y, z_lower]],
//!     "zenith_deg": [90.0, 90.0],
//!     "max_range": 8.0, "resolution_deg": 0.25, "sigma": 0.01
//!   },
//!   "entities": [
//!     { "id": 1, "kind": "target", "shape": { "type": "cylinder", "radius": 0.25 },
//!       "height": 1.7, "motion": [[t, x, y], ...] }
//!   ],
//!   "policy": { "kind": "obscured", "max_retention_range": 8.0 },
//!   "scan": { "guard_deg": 5.0, "miss_limit": 3, "fusion_gate": 0.2, "association_gate": 0.5 }
//! }
//! ```
//!
//! `zenith_deg`, `policy` and `scan` are optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Entity, EntityId, EntityKind, Scenario, Shape, Waypoint};
use crate::lrf::{steer, LrfGroup, LrfId, LrfUnit, DEFAULT_RESOLUTION};
use crate::scanmodes::ScanConfig;
use crate::storage::StoragePolicy;
use crate::{BodyPoint, FrameConfig, GlobalPoint, LrfMount, RobotPose};

/// Scenarios shipped with the crate, by name.
pub const BUNDLED_SCENARIOS: &[(&str, &str)] = &[
    ("fig13_normal", include_str!("../../scenarios/fig13_normal.json")),
    ("fig14_locking", include_str!("../../scenarios/fig14_locking.json")),
    ("fusion_bench", include_str!("../../scenarios/fusion_bench.json")),
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at line {line}, column {column}, field `{field}`: {message}")]
    Schema {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    pub theta_g_deg: f64,
    pub global_origin: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    /// Upper unit first.
    pub mounts: [[f64; 3]; 2],
    #[serde(default = "default_zenith")]
    pub zenith_deg: [f64; 2],
    pub max_range: f64,
    #[serde(default = "default_resolution_deg")]
    pub resolution_deg: f64,
    #[serde(default)]
    pub sigma: f64,
}

fn default_zenith() -> [f64; 2] {
    [90.0, 90.0]
}

fn default_resolution_deg() -> f64 {
    DEFAULT_RESOLUTION.to_degrees()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityFile {
    pub id: u32,
    pub kind: EntityKind,
    pub shape: Shape<f64>,
    pub height: f64,
    pub motion: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanFile {
    pub guard_deg: f64,
    pub miss_limit: u32,
    pub fusion_gate: f64,
    pub association_gate: f64,
}

impl Default for ScanFile {
    fn default() -> Self {
        let c = ScanConfig::default();
        Self {
            guard_deg: c.guard.to_degrees(),
            miss_limit: c.miss_limit,
            fusion_gate: c.fusion_gate,
            association_gate: c.association_gate,
        }
    }
}

/// On-disk scenario, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub duration: f64,
    pub step_dt: f64,
    pub frame: FrameFile,
    pub robot_track: Vec<[f64; 4]>,
    pub group: GroupFile,
    pub entities: Vec<EntityFile>,
    #[serde(default)]
    pub policy: Option<StoragePolicy>,
    #[serde(default)]
    pub scan: ScanFile,
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(json: &str) -> Result<(ScenarioFile, Scenario), ScenarioError> {
    let file = ScenarioFile::from_json(json)?;
    let scenario = file.to_scenario()?;
    Ok((file, scenario))
}

fn finite(field: &str, v: f64) -> Result<f64, ScenarioError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn increasing(field: &str, times: impl Iterator<Item = f64>) -> Result<(), ScenarioError> {
    let mut prev: Option<f64> = None;
    for (i, t) in times.enumerate() {
        finite(&format!("{field}[{i}]"), t)?;
        if prev.is_some_and(|p| t <= p) {
            return Err(invalid(format!("{field}[{i}]"), "waypoint times must strictly increase"));
        }
        prev = Some(t);
    }
    Ok(())
}

impl ScenarioFile {
    pub fn from_json(json: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(json);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ScenarioError::Schema {
                line: inner.line(),
                column: inner.column(),
                field,
                message: inner.to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn to_scenario(&self) -> Result<Scenario, ScenarioError> {
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(invalid("duration", format!("must be >= 0, got {}", self.duration)));
        }
        if !(self.step_dt > 0.0 && self.step_dt.is_finite()) {
            return Err(invalid("step_dt", format!("must be > 0, got {}", self.step_dt)));
        }

        let theta_g = finite("frame.theta_g_deg", self.frame.theta_g_deg)?.to_radians();
        let [gx, gy, gz] = self.frame.global_origin;
        for (i, v) in self.frame.global_origin.iter().enumerate() {
            finite(&format!("frame.global_origin[{i}]"), *v)?;
        }
        let frame = FrameConfig::new(theta_g, GlobalPoint::new(gx, gy, gz));

        if self.robot_track.is_empty() {
            return Err(invalid("robot_track", "needs at least one waypoint"));
        }
        increasing("robot_track", self.robot_track.iter().map(|w| w[0]))?;
        let mut robot_track = Vec::with_capacity(self.robot_track.len());
        for (i, &[t, x, y, z]) in self.robot_track.iter().enumerate() {
            for v in [x, y, z] {
                finite(&format!("robot_track[{i}]"), v)?;
            }
            robot_track.push(RobotPose::new(BodyPoint::new(x, y, z), t));
        }

        let group = self.build_group()?;

        let mut entities = Vec::with_capacity(self.entities.len());
        for (i, e) in self.entities.iter().enumerate() {
            let at = |f: &str| format!("entities[{i}].{f}");
            if !e.shape.is_valid() {
                return Err(invalid(at("shape"), "dimensions must be positive"));
            }
            if !(e.height > 0.0 && e.height.is_finite()) {
                return Err(invalid(at("height"), "must be > 0"));
            }
            if e.motion.is_empty() {
                return Err(invalid(at("motion"), "needs at least one waypoint"));
            }
            increasing(&at("motion"), e.motion.iter().map(|w| w[0]))?;
            if self.entities[..i].iter().any(|o| o.id == e.id) {
                return Err(invalid(at("id"), format!("duplicate id {}", e.id)));
            }
            entities.push(Entity {
                id: EntityId(e.id),
                kind: e.kind,
                shape: e.shape,
                height: e.height,
                motion: e.motion.iter().map(|&[t, x, y]| Waypoint { t, x, y }).collect(),
            });
        }
        let targets = entities.iter().filter(|e| e.kind == EntityKind::Target).count();
        if targets != 1 {
            return Err(invalid("entities", format!("exactly one target required, found {targets}")));
        }

        let policy = self
            .policy
            .unwrap_or_else(|| StoragePolicy::obscured(self.group.max_range));
        policy.validate().map_err(|m| invalid("policy", m))?;

        let s = &self.scan;
        if !(s.guard_deg >= 0.0 && s.guard_deg < 180.0) {
            return Err(invalid("scan.guard_deg", "must be in [0, 180)"));
        }
        if s.miss_limit == 0 {
            return Err(invalid("scan.miss_limit", "must be >= 1"));
        }
        if !(s.fusion_gate > 0.0 && s.association_gate > 0.0) {
            return Err(invalid("scan", "gates must be positive"));
        }
        let scan = ScanConfig {
            guard: s.guard_deg.to_radians(),
            miss_limit: s.miss_limit,
            fusion_gate: s.fusion_gate,
            association_gate: s.association_gate,
        };

        Ok(Scenario {
            frame,
            robot_track,
            group,
            entities,
            duration: self.duration,
            step_dt: self.step_dt,
            seed: self.seed,
            policy,
            scan,
        })
    }

    fn build_group(&self) -> Result<LrfGroup, ScenarioError> {
        let g = &self.group;
        let err = |e: crate::lrf::LrfError| invalid("group", e.to_string());
        let mut units = Vec::with_capacity(2);
        for (i, m) in g.mounts.iter().enumerate() {
            let unit = LrfUnit::new(
                LrfId(i as u32 + 1),
                LrfMount::new(m[0], m[1], m[2]),
                g.max_range,
                g.resolution_deg.to_radians(),
                g.sigma,
            )
            .map_err(err)?;
            units.push(steer(&unit, g.zenith_deg[i].to_radians(), 0.0).map_err(err)?);
        }
        LrfGroup::new(units[0], units[1]).map_err(err)
    }

    /// Replaces the storage policy with the defaults for `kind` ("obscured" or "map").
    pub fn override_storage(&mut self, kind: &str) -> Result<(), ScenarioError> {
        let r = self.group.max_range;
        self.policy = Some(match kind {
            "obscured" => StoragePolicy::obscured(r),
            "map" => StoragePolicy::map(0.1, 4.0 * r),
            other => return Err(invalid("storage", format!("unknown storage kind `{other}`"))),
        });
        Ok(())
    }
}
