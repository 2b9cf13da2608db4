//! The four squeezing protocols and their closed-form ideal limits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::optimize_rotation;
use crate::channels::{
    atom_rotation, double_pass_with_loss, eraser_step, faraday_pass, optical_loss,
    scattering_channel, DecayRates, ImperfectionSettings,
};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{GaussianState, VACUUM_VARIANCE};

/// Default number of phase-matching segments.
pub const DEFAULT_SEGMENTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// Single Faraday pass plus polarimetry.
    Qnd,
    /// Double pass, probe discarded.
    Dp,
    /// Double pass with quantum eraser.
    Qe,
    /// Phase-matched sequence of eraser steps and counter-rotations.
    Pm,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [Self::Qnd, Self::Dp, Self::Qe, Self::Pm];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Qnd => "qnd",
            Self::Dp => "dp",
            Self::Qe => "qe",
            Self::Pm => "pm",
        }
    }

    /// Closed-form ideal squeezing parameter.
    pub fn ideal_zeta(&self, xi: f64) -> f64 {
        match self {
            Self::Qnd => zeta_qnd(xi),
            Self::Dp => zeta_dp(xi),
            Self::Qe => zeta_qe(xi),
            Self::Pm => zeta_pm(xi),
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qnd" => Ok(Self::Qnd),
            "dp" => Ok(Self::Dp),
            "qe" => Ok(Self::Qe),
            "pm" => Ok(Self::Pm),
            other => Err(invalid("protocol", format!("unknown protocol `{other}`"))),
        }
    }
}

/// Choice of the counter-rotation between phase-matching segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    /// `φ = ξ/(2n)` every segment.
    FixedHalfStep,
    /// Greedy per-segment optimum, see [`optimize_rotation`].
    #[default]
    Optimized,
}

/// A fully specified protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSchedule {
    pub kind: ProtocolKind,
    pub xi_total: f64,
    /// Number of phase-matching segments; forced to 1 for other protocols.
    pub segments: usize,
    pub rotation_mode: RotationMode,
    pub imperfections: ImperfectionSettings,
    /// Decay accumulated over the whole protocol.
    pub rates: DecayRates,
    /// Optical density, for reporting and η ↔ ξ conversion.
    pub rho: Option<f64>,
    /// Scattering probability per atom per pass.
    pub eta_total: f64,
}

impl ProtocolSchedule {
    /// Decoherence-free, imperfection-free schedule.
    pub fn ideal(kind: ProtocolKind, xi: f64) -> Self {
        Self {
            kind,
            xi_total: xi,
            segments: if kind == ProtocolKind::Pm {
                DEFAULT_SEGMENTS
            } else {
                1
            },
            rotation_mode: RotationMode::default(),
            imperfections: ImperfectionSettings::ideal(),
            rates: DecayRates::zero(),
            rho: None,
            eta_total: 0.0,
        }
    }

    /// Schedule at optical density `rho` and scattering probability `eta`,
    /// with `ξ = ρη/9` and spin-1/2 decay rates.
    ///
    /// A QND run makes one pass instead of two and so accumulates half the
    /// double-pass decay.
    pub fn from_density(kind: ProtocolKind, rho: f64, eta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(invalid("rho", format!("{rho} must be positive")));
        }
        let mut rates = DecayRates::from_eta(eta)?;
        if kind == ProtocolKind::Qnd {
            rates = rates.scaled(0.5);
        }
        Ok(Self {
            rates,
            rho: Some(rho),
            eta_total: eta,
            ..Self::ideal(kind, rho * eta / 9.0)
        })
    }

    /// Same schedule re-targeted at a different `eta` (ξ and rates follow).
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        let rho = self
            .rho
            .ok_or_else(|| invalid("rho", "required to convert eta to xi"))?;
        let fresh = Self::from_density(self.kind, rho, eta)?;
        Ok(Self {
            xi_total: fresh.xi_total,
            rates: fresh.rates,
            eta_total: eta,
            ..self.clone()
        })
    }

    pub fn with_segments(self, segments: usize) -> Self {
        Self { segments, ..self }
    }

    pub fn with_rotation(self, rotation_mode: RotationMode) -> Self {
        Self {
            rotation_mode,
            ..self
        }
    }

    pub fn with_imperfections(self, imperfections: ImperfectionSettings) -> Self {
        Self {
            imperfections,
            ..self
        }
    }

    pub fn without_decay(self) -> Self {
        Self {
            rates: DecayRates::zero(),
            ..self
        }
    }

    pub fn effective_segments(&self) -> usize {
        if self.kind == ProtocolKind::Pm {
            self.segments
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi_total >= 0.0 && self.xi_total.is_finite()) {
            return Err(invalid(
                "xi",
                format!("{} must be finite and non-negative", self.xi_total),
            ));
        }
        if self.kind == ProtocolKind::Pm && self.segments == 0 {
            return Err(invalid("segments", "must be at least 1"));
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(invalid("rho", format!("{rho} must be positive")));
            }
        }
        self.imperfections.validate()?;
        self.rates.validate()
    }
}

/// Outcome of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingRecord {
    /// Wineland parameter `2·min_variance/contrast²`.
    pub zeta: f64,
    pub zeta_db: f64,
    pub theta_min: f64,
    pub contrast: f64,
    pub min_variance: f64,
    /// `(accumulated γ⊥τ, zeta_db)` after each segment.
    pub trace: Vec<(f64, f64)>,
}

impl SqueezingRecord {
    fn from_state(state: &GaussianState, trace: Vec<(f64, f64)>) -> Self {
        let (min_variance, theta_min) = state.min_variance();
        let zeta = wineland(min_variance, state.contrast());
        Self {
            zeta,
            zeta_db: db(zeta),
            theta_min,
            contrast: state.contrast(),
            min_variance,
            trace,
        }
    }

    /// Checks the record invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0) {
            return Err(invalid("zeta", format!("{} must be positive", self.zeta)));
        }
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(invalid(
                "contrast",
                format!("{} not in (0, 1]", self.contrast),
            ));
        }
        let expected = wineland(self.min_variance, self.contrast);
        if (self.zeta - expected).abs() > 1e-12 * expected {
            return Err(invalid(
                "zeta",
                format!("{} != 2·min_variance/contrast² = {expected}", self.zeta),
            ));
        }
        if (self.zeta_db - db(self.zeta)).abs() > 1e-9 {
            return Err(invalid("zeta_db", "inconsistent with zeta"));
        }
        Ok(())
    }
}

fn wineland(min_variance: f64, contrast: f64) -> f64 {
    min_variance / VACUUM_VARIANCE / (contrast * contrast)
}

fn db(zeta: f64) -> f64 {
    -10.0 * zeta.log10() + 0.0
}

/// Squeezing in dB; positive values are below projection noise.
pub fn squeezing_db(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(invalid("zeta", format!("{zeta} must be positive")));
    }
    Ok(db(zeta))
}

/// Conditional squeezing of a QND measurement: `1/(1+ξ)`.
pub fn zeta_qnd(xi: f64) -> f64 {
    1.0 / (1.0 + xi)
}

/// `1/2 − √(1/4 + x)` without cancellation.
fn half_minus_root(x: f64) -> f64 {
    -x / (0.5 + (0.25 + x).sqrt())
}

/// Double-pass squeezing at the optimal quadrature:
/// `1 + (ξ² + 2ξ)(1/2 − √(1/4 + (2+ξ)⁻²))`.
pub fn zeta_dp(xi: f64) -> f64 {
    1.0 + (xi * xi + 2.0 * xi) * half_minus_root((2.0 + xi).powi(-2))
}

/// Quantum-eraser squeezing at the optimal quadrature:
/// `1 + ξ²(1/2 − √(1/4 + ξ⁻²))`.
pub fn zeta_qe(xi: f64) -> f64 {
    if xi == 0.0 {
        return 1.0;
    }
    1.0 + xi * xi * half_minus_root(xi.powi(-2))
}

/// Angle of the squeezed quadrature after a shear of strength `ξ`.
pub fn theta_min_qe(xi: f64) -> f64 {
    (2.0 / xi).atan() / 2.0 + std::f64::consts::FRAC_PI_2
}

/// Phase-matched squeezing `e^{−ξ}`.
pub fn zeta_pm(xi: f64) -> f64 {
    (-xi).exp()
}

fn checked(state: GaussianState, step: &str) -> Result<GaussianState> {
    state.check_physical(step)?;
    Ok(state)
}

/// Runs a schedule from the coherent spin state.
pub fn run_protocol(sched: &ProtocolSchedule) -> Result<SqueezingRecord> {
    sched.validate()?;
    let imp = &sched.imperfections;
    let xi = sched.xi_total;
    let half = sched.rates.scaled(0.5);
    let start = GaussianState::new(0);

    let state = match sched.kind {
        ProtocolKind::Qnd => {
            let (st, id) = start.attach_vacuum();
            let st = scattering_channel(&st, &half)?;
            let st = faraday_pass(&st, id, xi)?;
            let st = scattering_channel(&st, &half)?;
            let st = optical_loss(&st, id, imp.detection_loss)?;
            st.homodyne_condition(id, 0.0, imp.detector_noise)?.0
        }
        ProtocolKind::Dp => {
            let (st, id) = start.attach_vacuum();
            let st = scattering_channel(&st, &half)?;
            let st = double_pass_with_loss(&st, id, xi, imp.interpass_loss)?;
            let st = scattering_channel(&st, &half)?;
            st.trace_out(id)?
        }
        ProtocolKind::Qe => {
            let (st, id) = start.attach_vacuum();
            let st = scattering_channel(&st, &half)?;
            let st = eraser_step(&st, id, xi, imp)?;
            scattering_channel(&st, &half)?
        }
        ProtocolKind::Pm => return run_phase_matched(sched),
    };
    let state = checked(state, sched.kind.name())?;
    let record = SqueezingRecord::from_state(&state, Vec::new());
    let point = (sched.rates.gamma_perp_tau, record.zeta_db);
    Ok(SqueezingRecord {
        trace: vec![point],
        ..record
    })
}

fn run_phase_matched(sched: &ProtocolSchedule) -> Result<SqueezingRecord> {
    let n = sched.segments;
    let step_xi = sched.xi_total / n as f64;
    let step_rates = sched.rates.scaled(1.0 / n as f64);
    let imp = &sched.imperfections;

    let mut state = GaussianState::new(0);
    let mut trace = Vec::with_capacity(n);
    for k in 0..n {
        let (st, id) = state.attach_vacuum();
        let st = eraser_step(&st, id, step_xi, imp)?;
        let phi = match sched.rotation_mode {
            RotationMode::FixedHalfStep => 0.5 * step_xi,
            RotationMode::Optimized => {
                let lookahead = if k + 1 < n { step_xi } else { 0.0 };
                optimize_rotation(&st, lookahead, &step_rates, imp)?
            }
        };
        let st = atom_rotation(&st, phi)?;
        let st = scattering_channel(&st, &step_rates)?;
        state = checked(st, &format!("pm segment {k}"))?;

        let (v, _) = state.min_variance();
        let zeta = wineland(v, state.contrast());
        trace.push((step_rates.gamma_perp_tau * (k + 1) as f64, db(zeta)));
    }
    Ok(SqueezingRecord::from_state(&state, trace))
}
