//! Navier-Stokes / Euler time integration in vorticity-streamfunction form.

mod config;
mod initial;
mod solver;
mod trajectory;

pub use config::{SimConfig, CFL_CAP};
pub use initial::{robin_shear_profile, robin_shear_slope, Initial, InitialData};
pub use solver::{step, Sample, SimState, Solver, StripSample};
pub use trajectory::{
    check_aligned, read_checkpoint, resume, run, run_euler, run_steps, write_checkpoint, DenseTraces, RunManifest, Trajectory,
    BLOW_UP_FACTOR,
};
