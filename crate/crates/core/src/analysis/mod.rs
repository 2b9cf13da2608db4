//! Rotation optimization, η sweeps, and scaling-law fits.

mod fit;
mod noise_model;
mod optimize;
mod sweep;

pub use fit::{fit_scaling, LogBase, ScalingFit, ScalingModel};
pub use noise_model::{simple_model_min, simple_model_min_numeric, IdealScaling, SimpleNoiseModel};
pub use optimize::{
    golden_section_minimize, optimize_rotation, rotation_objective, COARSE_GRID_POINTS,
};
pub use sweep::{log_spaced, parabolic_peak, peak_over_rho, sweep_eta, DensityPeak, SweepResult};
