//! Gaussian simulation of measurement-based and measurement-free spin
//! squeezing of an atomic ensemble by a multipass probe beam.
//!
//! The atom ensemble is a single bosonic mode in the Holstein–Primakoff
//! picture; every probe pulse adds one light mode. States are tracked by
//! their first and second moments, with a contrast factor for the collective
//! spin length lost to spontaneous emission.
//!
//! ```
//! use squeezekit_core::{run_protocol, ProtocolKind, ProtocolSchedule};
//!
//! let sched = ProtocolSchedule::ideal(ProtocolKind::Qe, 2.0);
//! let rec = run_protocol(&sched).unwrap();
//! assert!(rec.zeta_db > 3.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channels;
pub mod error;
pub mod gaussian;
pub mod oracle;
pub mod protocols;

pub use channels::{
    atom_rotation, coupling_from_physical, double_pass, double_pass_with_loss, eraser_step,
    faraday_map, faraday_pass, optical_loss, rotation_map, scattering_channel, waveplate_map,
    waveplate_quarter, Couplings, DecayRates, Feedback, ImperfectionSettings, PhysicalParams,
    ERASER_ANGLE,
};
pub use error::{Error, Result};
pub use gaussian::{
    min_variance_2x2, symplectic_eigenvalues, symplectic_form, GaussianState, LightId, Mode,
    NoiseChannel, SymplecticMap, VACUUM_VARIANCE,
};
pub use protocols::{
    run_protocol, squeezing_db, theta_min_qe, zeta_dp, zeta_pm, zeta_qe, zeta_qnd, ProtocolKind,
    ProtocolSchedule, RotationMode, SqueezingRecord, DEFAULT_SEGMENTS,
};
