use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use lrfsim::coordsys::{
    body_to_global, body_to_spherical, global_to_body, global_to_spherical, spherical_to_body, spherical_to_global,
};
use lrfsim::export::write_run;
use lrfsim::lrf::AzimuthWindow;
use lrfsim::simworld::{
    brute_force_intervals, fusion_benchmark, intersect_prism, run, EntityId, EntityKind, LrfPose, PlacedEntity,
    Scenario, ScenarioError, ScenarioFile, Scene, Shape,
};
use lrfsim::{BodyPoint, FrameConfig, GlobalPoint, LrfMount, RobotPose, SphericalPoint};

#[derive(Parser)]
#[command(name = "lrfsim", version, about = "Dual LRF group simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files and write their outputs.
    Run(RunArgs),
    /// Convert a point between the global, body and spherical frames.
    Convert(ConvertArgs),
    /// Print brute-force oracle vectors.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, required = true, num_args = 1..)]
    scenario: Vec<PathBuf>,
    /// Output directory. With several scenarios each gets a subdirectory named after it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution_deg: Option<f64>,
    #[arg(long, value_enum)]
    storage: Option<StorageKind>,
    /// Scenario files run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum StorageKind {
    Obscured,
    Map,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FrameKind {
    Global,
    Body,
    Spherical,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, allow_hyphen_values = true)]
    theta_g_deg: f64,
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0,0,0")]
    origin: [f64; 3],
    #[arg(long, value_enum)]
    from: FrameKind,
    #[arg(long, value_enum)]
    to: FrameKind,
    /// gx,gy,gz or x,y,z or r,phi_deg,theta_deg.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    point: [f64; 3],
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0,0,0")]
    robot: [f64; 3],
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0,0,0")]
    mount: [f64; 3],
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Intervals,
    Raycast,
    Fusion,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    kind: OracleKind,
    /// intervals: disk x,y,radius in the body frame (repeatable).
    #[arg(long = "disk", value_parser = parse_triple, allow_hyphen_values = true)]
    disks: Vec<[f64; 3]>,
    /// intervals: LRF exit point; raycast: ray origin.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0,0,1")]
    exit: [f64; 3],
    /// intervals: oracle sweep resolution.
    #[arg(long, default_value_t = 0.0625)]
    resolution_deg: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_g_deg: f64,
    #[arg(long, default_value_t = 8.0)]
    max_range: f64,
    /// raycast: ray direction, normalized before use.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0,1,0")]
    dir: [f64; 3],
    /// raycast: cylinder x,y,radius.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0,5,1")]
    cylinder: [f64; 3],
    #[arg(long, default_value_t = 2.0)]
    height: f64,
    /// fusion: range noise standard deviation.
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// fusion: number of fused pairs.
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0_f64; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !o.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

/// Failure with its process exit code: 2 for bad input, 1 for runtime errors.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn runtime(error: anyhow::Error) -> Failure {
    Failure { code: 1, error }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn scenario_name(file: &ScenarioFile, path: &Path) -> String {
    if file.name.is_empty() {
        path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
    } else {
        file.name.clone()
    }
}

fn load(path: &Path, a: &RunArgs) -> Result<ScenarioFile, ScenarioError> {
    let mut file = ScenarioFile::load(path)?;
    if let Some(seed) = a.seed {
        file.seed = seed;
    }
    if let Some(r) = a.resolution_deg {
        file.group.resolution_deg = r;
    }
    match a.storage {
        Some(StorageKind::Obscured) => file.override_storage("obscured")?,
        Some(StorageKind::Map) => file.override_storage("map")?,
        None => {}
    }
    Ok(file)
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let mut jobs = Vec::new();
    for path in &a.scenario {
        let file = load(path, &a).map_err(|e| usage(anyhow!(e).context(format!("scenario {}", path.display()))))?;
        let scenario = file
            .to_scenario()
            .map_err(|e| usage(anyhow!(e).context(format!("scenario {}", path.display()))))?;
        let name = scenario_name(&file, path);
        let out = if a.scenario.len() == 1 { a.out.clone() } else { a.out.join(&name) };
        jobs.push((name, scenario, out));
    }

    let exec = |(name, scenario, out): &(String, Scenario, PathBuf)| -> anyhow::Result<String> {
        let report = run(scenario).with_context(|| format!("running {name}"))?;
        write_run(out, name, scenario, &report).with_context(|| format!("writing {}", out.display()))?;
        Ok(format!(
            "{name}: {} passes ({} normal, {} locking), {} samples -> {}",
            report.stats.passes,
            report.stats.normal_passes,
            report.stats.locking_passes,
            report.stats.samples,
            out.display()
        ))
    };
    let results: Vec<anyhow::Result<String>> = if a.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(a.jobs)
            .build()
            .map_err(|e| runtime(e.into()))?;
        pool.install(|| jobs.par_iter().map(exec).collect())
    } else {
        jobs.iter().map(exec).collect()
    };
    let mut first_err = None;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {e:#}");
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(runtime(e)),
        None => Ok(()),
    }
}

/// `%.12g`-style formatting.
fn sig12(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

fn cmd_convert(a: ConvertArgs) -> Result<(), Failure> {
    if !a.theta_g_deg.is_finite() {
        return Err(usage(anyhow!("--theta-g-deg must be finite")));
    }
    let f = FrameConfig::new(a.theta_g_deg.to_radians(), GlobalPoint::new(a.origin[0], a.origin[1], a.origin[2]));
    let robot = RobotPose::new(BodyPoint::new(a.robot[0], a.robot[1], a.robot[2]), 0.0);
    let mount = LrfMount::new(a.mount[0], a.mount[1], a.mount[2]);
    let [p0, p1, p2] = a.point;

    let sph = |s: SphericalPoint| [s.r, s.phi.to_degrees(), s.theta.to_degrees()];
    let glob = |g: GlobalPoint| [g.gx, g.gy, g.gz];
    let body = |b: BodyPoint| [b.x, b.y, b.z];
    let input_sph = || {
        SphericalPoint::new(p0, p1.to_radians(), p2.to_radians()).map_err(|e| usage(anyhow!(e).context("--point")))
    };
    let spherical_err = |e: lrfsim::coordsys::CoordError| runtime(anyhow!(e));

    let out = match (a.from, a.to) {
        (FrameKind::Global, FrameKind::Global) => glob(GlobalPoint::new(p0, p1, p2)),
        (FrameKind::Body, FrameKind::Body) => body(BodyPoint::new(p0, p1, p2)),
        (FrameKind::Spherical, FrameKind::Spherical) => sph(input_sph()?),
        (FrameKind::Global, FrameKind::Body) => body(global_to_body(&GlobalPoint::new(p0, p1, p2), &f)),
        (FrameKind::Body, FrameKind::Global) => glob(body_to_global(&BodyPoint::new(p0, p1, p2), &f)),
        (FrameKind::Body, FrameKind::Spherical) => {
            sph(body_to_spherical(&BodyPoint::new(p0, p1, p2), &robot, &mount, &f).map_err(spherical_err)?)
        }
        (FrameKind::Spherical, FrameKind::Body) => body(spherical_to_body(&input_sph()?, &robot, &mount, &f)),
        (FrameKind::Global, FrameKind::Spherical) => {
            sph(global_to_spherical(&GlobalPoint::new(p0, p1, p2), &robot, &mount, &f).map_err(spherical_err)?)
        }
        (FrameKind::Spherical, FrameKind::Global) => glob(spherical_to_global(&input_sph()?, &robot, &mount, &f)),
    };
    println!("{} {} {}", sig12(out[0]), sig12(out[1]), sig12(out[2]));
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<(), Failure> {
    let f = FrameConfig::new(a.theta_g_deg.to_radians(), GlobalPoint::default());
    let exit = BodyPoint::new(a.exit[0], a.exit[1], a.exit[2]);
    match a.kind {
        OracleKind::Intervals => {
            if !(a.resolution_deg > 0.0) {
                return Err(usage(anyhow!("--resolution-deg must be positive")));
            }
            let disks = if a.disks.is_empty() { vec![[0.0, 3.0, 0.25]] } else { a.disks.clone() };
            let mut entities = Vec::new();
            for (i, d) in disks.iter().enumerate() {
                if !(d[2] > 0.0) {
                    return Err(usage(anyhow!("disk {i}: radius must be positive")));
                }
                entities.push(PlacedEntity {
                    id: EntityId(i as u32 + 1),
                    kind: EntityKind::Obstacle,
                    shape: Shape::Cylinder { radius: d[2] },
                    height: exit.z.max(0.0) + 1.0,
                    center: (d[0], d[1]),
                });
            }
            let scene = Scene::new(0.0, entities);
            let pose = LrfPose {
                exit,
                zenith: std::f64::consts::FRAC_PI_2,
                frame: f,
                max_range: a.max_range,
            };
            let window = AzimuthWindow {
                start: 0.0,
                width: std::f64::consts::TAU - a.resolution_deg.to_radians(),
            };
            for (id, iv) in brute_force_intervals(&scene, &pose, &window, a.resolution_deg.to_radians()) {
                let d = disks[id.0 as usize - 1];
                let dist = (d[0] - exit.x).hypot(d[1] - exit.y);
                let analytic = (dist > d[2]).then(|| (2.0 * (d[2] / dist).asin()).to_degrees());
                println!(
                    "{}",
                    json!({
                        "entity": id.0,
                        "psi_a_deg": iv.psi_a.to_degrees(),
                        "psi_b_deg": iv.psi_b.to_degrees(),
                        "range_deg": iv.scan_angle_range().to_degrees(),
                        "deflection_deg": iv.deflection.to_degrees(),
                        "analytic_range_deg": analytic,
                    })
                );
            }
        }
        OracleKind::Raycast => {
            let n = (a.dir[0].powi(2) + a.dir[1].powi(2) + a.dir[2].powi(2)).sqrt();
            if !(n > 0.0) {
                return Err(usage(anyhow!("--dir must be non-zero")));
            }
            if !(a.cylinder[2] > 0.0 && a.height > 0.0) {
                return Err(usage(anyhow!("cylinder radius and height must be positive")));
            }
            let dir = BodyPoint::new(a.dir[0] / n, a.dir[1] / n, a.dir[2] / n);
            let d = intersect_prism(
                &exit,
                &dir,
                &Shape::Cylinder { radius: a.cylinder[2] },
                (a.cylinder[0], a.cylinder[1]),
                a.height,
            );
            println!("{}", json!({ "hit": d.is_some(), "distance": d }));
        }
        OracleKind::Fusion => {
            if !(a.sigma >= 0.0 && a.sigma.is_finite()) || a.pairs == 0 {
                return Err(usage(anyhow!("--sigma must be >= 0 and --pairs > 0")));
            }
            let s = fusion_benchmark(a.sigma, a.pairs, a.seed);
            println!("{}", serde_json::to_string(&s).expect("stats serialize"));
        }
    }
    Ok(())
}
