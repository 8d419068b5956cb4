use serde::Serialize;

use super::{scene_at, span_contains, true_subtended_span, EntityId, Scenario, SimError};
use crate::lrf::{AzimuthWindow, ScanMode, ScanSample};
use crate::scanmodes::{
    extract_intervals, locking_step, normal_step, seed_lock, LockState, ModeTracker, ScanError, ScanInterval,
    SweepDirection, TrackRecord,
};
use crate::storage::Store;
use crate::{seeded_rng, SimRng};

/// Per-pass log line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassLog {
    pub index: usize,
    pub time: f64,
    /// Mode the pass was executed in.
    pub mode: ScanMode,
    /// Mode after the transition rule was applied.
    pub next_mode: ScanMode,
    pub target_detected: bool,
    pub target_lost: bool,
    pub direction: Option<SweepDirection>,
    /// Tracker window of a locking pass.
    pub window: Option<AzimuthWindow>,
    /// Target interval measured in this pass.
    pub interval: Option<ScanInterval>,
    /// Ground-truth target span seen from the tracker exit point.
    pub true_span: Option<AzimuthWindow>,
    /// Whether `true_span` lies inside `window`; `None` when not checked.
    pub contained: Option<bool>,
    pub samples: usize,
    pub hits: usize,
    pub stored: usize,
}

/// Maximal run of consecutive passes executed in one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSegment {
    pub mode: ScanMode,
    pub start: f64,
    pub end: f64,
    pub first_pass: usize,
    pub passes: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub passes: usize,
    pub normal_passes: usize,
    pub locking_passes: usize,
    pub lock_acquisitions: usize,
    pub target_lost: usize,
    pub containment_checked: usize,
    pub containment_held: usize,
    pub samples: usize,
    pub hits: usize,
    pub max_stored: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub logs: Vec<PassLog>,
    pub samples: Vec<ScanSample>,
    pub track: Vec<TrackRecord>,
    pub timeline: Vec<ModeSegment>,
    pub stats: RunStats,
    pub store: Store,
}

/// Output of a single [`Simulation::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub log: PassLog,
    pub samples: Vec<ScanSample>,
}

/// Incremental runner. Owns the RNG stream, the store and the mode state.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    target: EntityId,
    rng: SimRng,
    store: Store,
    modes: ModeTracker,
    lock: Option<LockState>,
    next: usize,
    total: usize,
    track: Vec<TrackRecord>,
    stats: RunStats,
}

fn stored_len(store: &Store) -> usize {
    match store {
        Store::Obscured(s) => s.len(),
        Store::Map(m) => m.cells().iter().filter(|c| c.hits + c.misses > 0).count(),
    }
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            target: scenario.target_id().unwrap_or(EntityId(u32::MAX)),
            rng: seeded_rng(scenario.seed),
            store: Store::new(&scenario.policy, &scenario.frame),
            modes: ModeTracker::new(scenario.scan.miss_limit),
            lock: None,
            next: 0,
            total: scenario.pass_count(),
            track: Vec::new(),
            stats: RunStats::default(),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn lock(&self) -> Option<&LockState> {
        self.lock.as_ref()
    }

    pub fn mode(&self) -> ScanMode {
        self.modes.mode
    }

    pub fn remaining(&self) -> usize {
        self.total - self.next
    }

    /// Executes the next pass, or returns `None` once the run is complete.
    pub fn step(&mut self) -> Result<Option<StepOutput>, SimError> {
        if self.next >= self.total {
            return Ok(None);
        }
        let sc = self.scenario;
        let index = self.next;
        self.next += 1;
        let t = (index as f64 * sc.step_dt).min(sc.duration);
        let scene = scene_at(sc, t)?;
        let robot = scene.robot;
        let f = &sc.frame;
        let mode = self.modes.mode;

        let mut log = PassLog {
            index,
            time: t,
            mode,
            next_mode: mode,
            target_detected: false,
            target_lost: false,
            direction: None,
            window: None,
            interval: None,
            true_span: None,
            contained: None,
            samples: 0,
            hits: 0,
            stored: 0,
        };

        let samples: Vec<ScanSample> = match mode {
            ScanMode::Normal => {
                let pass = normal_step(&sc.group, &robot, f, &scene, &mut self.rng, &mut self.store, &sc.scan)?;
                let found = extract_intervals(&pass.upper, f.theta_g)
                    .into_iter()
                    .filter(|o| o.label == Some(self.target))
                    .max_by_key(|o| o.hits);
                if let Some(obj) = found {
                    log.target_detected = true;
                    log.interval = Some(obj.interval);
                    self.lock = Some(seed_lock(&obj, self.target, &sc.group, &robot, &sc.scan));
                    self.stats.lock_acquisitions += 1;
                }
                self.stats.normal_passes += 1;
                pass.samples().copied().collect()
            }
            ScanMode::Locking => {
                let lock = self.lock.as_mut().expect("locking mode always holds a lock");
                let tracker = *sc.group.unit(lock.tracker_lrf).expect("tracker belongs to the group");
                let result = locking_step(lock, &sc.group, &robot, f, &scene, &mut self.rng, &mut self.store, &sc.scan);
                let pass = match result {
                    Ok(pass) => {
                        log.target_detected = true;
                        log.interval = Some(lock.interval);
                        pass
                    }
                    Err(ScanError::TargetLost { pass, .. }) => {
                        log.target_lost = true;
                        self.stats.target_lost += 1;
                        *pass
                    }
                    Err(e) => return Err(e.into()),
                };
                log.direction = Some(pass.direction);
                log.window = Some(pass.window);
                let exit = tracker.exit_point(&robot);
                log.true_span = scene
                    .entity(self.target)
                    .and_then(|e| true_subtended_span(e, &exit, f));
                if let Some(span) = log.true_span {
                    let held = span_contains(&pass.window, &span);
                    log.contained = Some(held);
                    self.stats.containment_checked += 1;
                    self.stats.containment_held += usize::from(held);
                }
                self.stats.locking_passes += 1;
                pass.samples().copied().collect()
            }
        };

        let next_mode = self.modes.observe(log.target_detected);
        log.next_mode = next_mode;
        if next_mode == ScanMode::Normal {
            if let Some(lock) = self.lock.take() {
                self.track.extend(lock.track);
            }
        }

        log.samples = samples.len();
        log.hits = samples.iter().filter(|s| s.is_hit()).count();
        log.stored = stored_len(&self.store);
        self.stats.passes += 1;
        self.stats.samples += log.samples;
        self.stats.hits += log.hits;
        self.stats.max_stored = self.stats.max_stored.max(log.stored);
        Ok(Some(StepOutput { log, samples }))
    }

    /// Completed track records, including those of a still-active lock.
    pub fn track(&self) -> Vec<TrackRecord> {
        let mut out = self.track.clone();
        if let Some(lock) = &self.lock {
            out.extend(lock.track.iter().copied());
        }
        out
    }

    pub fn stats(&self) -> RunStats {
        self.stats
    }

    pub fn into_store(self) -> Store {
        self.store
    }
}

fn timeline(logs: &[PassLog], step_dt: f64, duration: f64) -> Vec<ModeSegment> {
    let mut out: Vec<ModeSegment> = Vec::new();
    for l in logs {
        match out.last_mut() {
            Some(seg) if seg.mode == l.mode => {
                seg.passes += 1;
                seg.end = (l.time + step_dt).min(duration);
            }
            _ => out.push(ModeSegment {
                mode: l.mode,
                start: l.time,
                end: (l.time + step_dt).min(duration),
                first_pass: l.index,
                passes: 1,
            }),
        }
    }
    out
}

/// Runs the scenario to completion. Deterministic in the scenario and its seed.
pub fn run(scenario: &Scenario) -> Result<RunReport, SimError> {
    let mut sim = Simulation::new(scenario);
    let mut logs = Vec::with_capacity(sim.remaining());
    let mut samples = Vec::new();
    while let Some(out) = sim.step()? {
        logs.push(out.log);
        samples.extend(out.samples);
    }
    let track = sim.track();
    let stats = sim.stats();
    let timeline = timeline(&logs, scenario.step_dt, scenario.duration);
    Ok(RunReport {
        logs,
        samples,
        track,
        timeline,
        stats,
        store: sim.into_store(),
    })
}
