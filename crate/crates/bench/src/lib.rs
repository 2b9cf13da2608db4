//! Fixtures shared by the benchmarks.

use squeezekit_core::{
    eraser_step, GaussianState, ImperfectionSettings, ProtocolKind, ProtocolSchedule,
};

/// Phase-matched schedule at ρ = 300 near the squeezing optimum.
pub fn pm_schedule(segments: usize) -> ProtocolSchedule {
    ProtocolSchedule::from_density(ProtocolKind::Pm, 300.0, 0.2)
        .unwrap()
        .with_segments(segments)
}

/// Atom-only state after one eraser shear of strength `xi`.
pub fn sheared_state(xi: f64) -> GaussianState {
    let (st, id) = GaussianState::new(0).attach_vacuum();
    eraser_step(&st, id, xi, &ImperfectionSettings::ideal()).unwrap()
}
