//! Run outputs. Angles are written in degrees, all numbers at full `f64`
//! precision. Nothing time- or host-dependent is written, so identical runs
//! produce identical files.
//!
//! | file            | content                                         |
//! |-----------------|-------------------------------------------------|
//! | `samples.jsonl` | one [`SampleRecord`] per ray                    |
//! | `passes.jsonl`  | one [`PassRecord`] per pass                     |
//! | `track.csv`     | target track in the following frame             |
//! | `summary.json`  | [`Summary`]: counts, mode timeline, containment |
//! | `map.bin`       | occupancy map (map storage only) + `map.json`   |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::lrf::{ScanMode, ScanSample};
use crate::scanmodes::{SweepDirection, TrackRecord};
use crate::simworld::{ModeSegment, PassLog, RunReport, RunStats, Scenario};
use crate::storage::{save_map, StorageError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Storage(#[from] StorageError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub t: f64,
    pub lrf: u32,
    pub mode: ScanMode,
    pub hit: Option<u32>,
    pub r: f64,
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
}

impl From<&ScanSample> for SampleRecord {
    fn from(s: &ScanSample) -> Self {
        Self {
            t: s.time,
            lrf: s.lrf_id.0,
            mode: s.mode_tag,
            hit: s.hit.map(|h| h.0),
            r: s.reading.r,
            phi_deg: s.reading.phi.to_degrees(),
            theta_deg: s.reading.theta.to_degrees(),
            x: s.body.x,
            y: s.body.y,
            z: s.body.z,
            gx: s.global.gx,
            gy: s.global.gy,
            gz: s.global.gz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassRecord {
    pub index: usize,
    pub t: f64,
    pub mode: ScanMode,
    pub next_mode: ScanMode,
    pub target_detected: bool,
    pub target_lost: bool,
    pub direction: Option<SweepDirection>,
    pub window_start_deg: Option<f64>,
    pub window_width_deg: Option<f64>,
    pub psi_a_deg: Option<f64>,
    pub psi_b_deg: Option<f64>,
    pub range_deg: Option<f64>,
    pub true_start_deg: Option<f64>,
    pub true_width_deg: Option<f64>,
    pub contained: Option<bool>,
    pub samples: usize,
    pub hits: usize,
    pub stored: usize,
}

impl From<&PassLog> for PassRecord {
    fn from(l: &PassLog) -> Self {
        Self {
            index: l.index,
            t: l.time,
            mode: l.mode,
            next_mode: l.next_mode,
            target_detected: l.target_detected,
            target_lost: l.target_lost,
            direction: l.direction,
            window_start_deg: l.window.map(|w| w.start.to_degrees()),
            window_width_deg: l.window.map(|w| w.width.to_degrees()),
            psi_a_deg: l.interval.map(|i| i.psi_a.to_degrees()),
            psi_b_deg: l.interval.map(|i| i.psi_b.to_degrees()),
            range_deg: l.interval.map(|i| i.scan_angle_range().to_degrees()),
            true_start_deg: l.true_span.map(|w| w.start.to_degrees()),
            true_width_deg: l.true_span.map(|w| w.width.to_degrees()),
            contained: l.contained,
            samples: l.samples,
            hits: l.hits,
            stored: l.stored,
        }
    }
}

/// One row of `track.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub psi_a_deg: f64,
    pub psi_b_deg: f64,
    pub range_deg: f64,
    pub deflection_deg: f64,
}

impl From<&TrackRecord> for TrackRow {
    fn from(r: &TrackRecord) -> Self {
        Self {
            t: r.time,
            x: r.centroid_body.x,
            y: r.centroid_body.y,
            z: r.centroid_body.z,
            psi_a_deg: r.interval.psi_a.to_degrees(),
            psi_b_deg: r.interval.psi_b.to_degrees(),
            range_deg: r.interval.scan_angle_range().to_degrees(),
            deflection_deg: r.interval.deflection.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Containment {
    pub checked: usize,
    pub held: usize,
    /// `held / checked`, or `None` when nothing was checked.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeStats {
    pub first_deg: f64,
    pub last_deg: f64,
    pub min_deg: f64,
    pub max_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub duration: f64,
    pub step_dt: f64,
    pub storage: &'static str,
    pub stats: RunStats,
    pub timeline: Vec<ModeSegment>,
    pub containment: Containment,
    pub track_points: usize,
    pub track_range: Option<RangeStats>,
    pub files: Vec<String>,
}

pub fn summarize(name: &str, scenario: &Scenario, report: &RunReport, files: Vec<String>) -> Summary {
    let ranges: Vec<f64> = report
        .track
        .iter()
        .map(|r| r.interval.scan_angle_range().to_degrees())
        .collect();
    let track_range = (!ranges.is_empty()).then(|| RangeStats {
        first_deg: ranges[0],
        last_deg: ranges[ranges.len() - 1],
        min_deg: ranges.iter().copied().fold(f64::INFINITY, f64::min),
        max_deg: ranges.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    let s = report.stats;
    Summary {
        schema_version: SCHEMA_VERSION,
        scenario: name.to_string(),
        seed: scenario.seed,
        duration: scenario.duration,
        step_dt: scenario.step_dt,
        storage: match report.store.as_map() {
            Some(_) => "map_planning",
            None => "obscured",
        },
        stats: s,
        timeline: report.timeline.clone(),
        containment: Containment {
            checked: s.containment_checked,
            held: s.containment_held,
            ratio: (s.containment_checked > 0).then(|| s.containment_held as f64 / s.containment_checked as f64),
        },
        track_points: report.track.len(),
        track_range,
        files,
    }
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<(), ExportError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, &row).map_err(|e| io_err(path)(e.into()))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_samples(path: &Path, samples: &[ScanSample]) -> Result<(), ExportError> {
    write_jsonl(path, samples.iter().map(SampleRecord::from))
}

pub fn write_passes(path: &Path, logs: &[PassLog]) -> Result<(), ExportError> {
    write_jsonl(path, logs.iter().map(PassRecord::from))
}

/// Always writes the header, also for an empty track.
pub fn write_track(path: &Path, track: &[TrackRecord]) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    if track.is_empty() {
        w.write_record(["t", "x", "y", "z", "psi_a_deg", "psi_b_deg", "range_deg", "deflection_deg"])?;
    }
    for r in track {
        w.serialize(TrackRow::from(r))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes every output of `report` into `dir` (created if missing) and
/// returns the written paths.
pub fn write_run(dir: &Path, name: &str, scenario: &Scenario, report: &RunReport) -> Result<Vec<PathBuf>, ExportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let p = dir.join("samples.jsonl");
    write_samples(&p, &report.samples)?;
    written.push(p);
    let p = dir.join("passes.jsonl");
    write_passes(&p, &report.logs)?;
    written.push(p);
    let p = dir.join("track.csv");
    write_track(&p, &report.track)?;
    written.push(p);
    if let Some(map) = report.store.as_map() {
        let p = dir.join("map.bin");
        save_map(map, &p)?;
        written.push(p.clone());
        written.push(p.with_extension("json"));
    }

    let p = dir.join("summary.json");
    let mut files: Vec<String> = written
        .iter()
        .filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    files.push("summary.json".into());
    let summary = summarize(name, scenario, report, files);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&p, json + "\n").map_err(io_err(&p))?;
    written.push(p);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simworld::{parse_scenario, run, BUNDLED_SCENARIOS};

    #[test]
    fn empty_run_writes_headers() {
        let (file, mut sc) = parse_scenario(BUNDLED_SCENARIOS[1].1).unwrap();
        sc.duration = 0.0;
        let report = run(&sc).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_run(dir.path(), &file.name, &sc, &report).unwrap();
        assert_eq!(files.len(), 4);
        let csv = std::fs::read_to_string(dir.path().join("track.csv")).unwrap();
        assert_eq!(csv, "t,x,y,z,psi_a_deg,psi_b_deg,range_deg,deflection_deg\n");
        assert_eq!(std::fs::read_to_string(dir.path().join("samples.jsonl")).unwrap(), "");
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["schema_version"], 1);
        assert_eq!(summary["stats"]["passes"], 0);
    }

    #[test]
    fn sample_record_is_lossless() {
        let (_, mut sc) = parse_scenario(BUNDLED_SCENARIOS[1].1).unwrap();
        sc.duration = sc.step_dt;
        let report = run(&sc).unwrap();
        let s = report.samples[17];
        let line = serde_json::to_string(&SampleRecord::from(&s)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["gx"].as_f64().unwrap(), s.global.gx);
        assert_eq!(v["r"].as_f64().unwrap(), s.reading.r);
    }
}
