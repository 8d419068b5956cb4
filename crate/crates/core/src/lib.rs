//! Simulation of a dual laser range finder (LRF) group on a mobile robot
//! following a person.
//!
//! * [`coordsys`]: global, robot-following and spherical LRF frames.
//! * [`lrf`]: LRF units, the two-unit group and noisy range sampling.
//! * [`scanmodes`]: normal (fused 180 degree) and locking (target tracking) scan modes.
//! * [`storage`]: obscured (forgetting) storage and occupancy map storage.
//! * [`simworld`]: scripted 2.5-D worlds, the run loop and brute-force oracles.
//! * [`export`]: run outputs as JSON lines, CSV and a JSON summary.
//!
//! Geometry is generic over [`Real`]; the aliases below fix it to `f64`,
//! which the simulation layers use throughout.

pub mod coordsys;
pub mod export;
pub mod lrf;
pub mod real;
pub mod scanmodes;
pub mod simworld;
pub mod storage;

pub use real::Real;

pub type GlobalPoint = coordsys::GlobalPoint<f64>;
pub type BodyPoint = coordsys::BodyPoint<f64>;
pub type SphericalPoint = coordsys::SphericalPoint<f64>;
pub type FrameConfig = coordsys::FrameConfig<f64>;
pub type LrfMount = coordsys::LrfMount<f64>;
pub type RobotPose = coordsys::RobotPose<f64>;

pub type GlobalPoint32 = coordsys::GlobalPoint<f32>;
pub type BodyPoint32 = coordsys::BodyPoint<f32>;
pub type SphericalPoint32 = coordsys::SphericalPoint<f32>;
pub type FrameConfig32 = coordsys::FrameConfig<f32>;

/// RNG used for every noise draw of a run.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
