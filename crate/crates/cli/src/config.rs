use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use squeezekit_core::{
    coupling_from_physical, Feedback, PhysicalParams, ProtocolKind, RotationMode, DEFAULT_SEGMENTS,
};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(field: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid `{field}`: {reason}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Qnd,
    Dp,
    Qe,
    Pm,
}

impl From<Protocol> for ProtocolKind {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::Qnd => ProtocolKind::Qnd,
            Protocol::Dp => ProtocolKind::Dp,
            Protocol::Qe => ProtocolKind::Qe,
            Protocol::Pm => ProtocolKind::Pm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Rotation {
    Fixed,
    #[default]
    Optimized,
}

impl From<Rotation> for RotationMode {
    fn from(r: Rotation) -> Self {
        match r {
            Rotation::Fixed => RotationMode::FixedHalfStep,
            Rotation::Optimized => RotationMode::Optimized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackArg {
    #[default]
    Conditional,
    FixedGain,
}

impl From<FeedbackArg> for Feedback {
    fn from(f: FeedbackArg) -> Self {
        match f {
            FeedbackArg::Conditional => Feedback::Conditional,
            FeedbackArg::FixedGain => Feedback::FixedGain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Settings shared by every subcommand. Each field may come from the config
/// file or from a flag; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Protocol to run (sweep and scaling accept several runs when omitted).
    #[arg(long, value_enum)]
    pub protocol: Option<Protocol>,
    /// Resonant optical density at unit oscillator strength.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Photon scattering probability per atom per pass.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Coupling strength; excludes --eta when --rho is given.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Number of phase-matching segments.
    #[arg(long)]
    pub n: Option<usize>,
    /// Optical loss between the two passes.
    #[arg(long)]
    pub loss: Option<f64>,
    /// Detector noise variance relative to shot noise.
    #[arg(long = "det-noise")]
    pub det_noise: Option<f64>,
    /// Optical loss between the second pass and the polarimeter.
    #[arg(long = "det-loss")]
    pub det_loss: Option<f64>,
    /// Eraser feedback model.
    #[arg(long, value_enum)]
    pub feedback: Option<FeedbackArg>,
    /// Counter-rotation schedule for phase matching.
    #[arg(long, value_enum)]
    pub rotation: Option<Rotation>,
    #[arg(long = "eta-min")]
    pub eta_min: Option<f64>,
    #[arg(long = "eta-max")]
    pub eta_max: Option<f64>,
    #[arg(long = "eta-points")]
    pub eta_points: Option<usize>,
    /// Comma-separated optical densities for `scaling`.
    #[arg(long = "rho-list", value_delimiter = ',')]
    pub rho_list: Option<Vec<f64>>,
    /// Comma-separated coupling strengths for `formulas` and `oracle`.
    #[arg(long = "xi-list", value_delimiter = ',')]
    pub xi_list: Option<Vec<f64>>,
    #[arg(long = "xi-min")]
    pub xi_min: Option<f64>,
    #[arg(long = "xi-max")]
    pub xi_max: Option<f64>,
    #[arg(long = "xi-points")]
    pub xi_points: Option<usize>,
    /// Comma-separated particle numbers (N_A = N_L) for `oracle`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Zero decoherence and no technical imperfections.
    #[arg(long, action = clap::ArgAction::SetTrue)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal: Option<bool>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long, env = "SQUEEZEKIT_THREADS")]
    pub threads: Option<usize>,
    /// Microscopic parameters from which rho and eta are derived.
    #[arg(skip)]
    pub physical: Option<PhysicalParams>,
}

impl Settings {
    /// `self` with every unset field taken from `file`.
    pub fn over(self, file: Settings) -> Settings {
        Settings {
            protocol: self.protocol.or(file.protocol),
            rho: self.rho.or(file.rho),
            eta: self.eta.or(file.eta),
            xi: self.xi.or(file.xi),
            n: self.n.or(file.n),
            loss: self.loss.or(file.loss),
            det_noise: self.det_noise.or(file.det_noise),
            det_loss: self.det_loss.or(file.det_loss),
            feedback: self.feedback.or(file.feedback),
            rotation: self.rotation.or(file.rotation),
            eta_min: self.eta_min.or(file.eta_min),
            eta_max: self.eta_max.or(file.eta_max),
            eta_points: self.eta_points.or(file.eta_points),
            rho_list: self.rho_list.or(file.rho_list),
            xi_list: self.xi_list.or(file.xi_list),
            xi_min: self.xi_min.or(file.xi_min),
            xi_max: self.xi_max.or(file.xi_max),
            xi_points: self.xi_points.or(file.xi_points),
            sizes: self.sizes.or(file.sizes),
            ideal: self.ideal.filter(|&on| on).or(file.ideal),
            format: self.format.or(file.format),
            out: self.out.or(file.out),
            threads: self.threads.or(file.threads),
            physical: self.physical.or(file.physical),
        }
    }
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub protocol: Option<Protocol>,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub xi: Option<f64>,
    pub n: usize,
    pub loss: f64,
    pub det_noise: f64,
    pub det_loss: f64,
    pub feedback: FeedbackArg,
    pub rotation: Rotation,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_points: usize,
    pub rho_list: Vec<f64>,
    pub xi_list: Option<Vec<f64>>,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub xi_points: usize,
    pub sizes: Vec<usize>,
    pub ideal: bool,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
    pub physical: Option<PhysicalParams>,
}

pub const DEFAULT_RHO_LIST: [f64; 6] = [300.0, 1e3, 3e3, 1e4, 3e4, 1e5];

/// Reads a JSON config file. Malformed JSON and unknown keys are reported
/// with their position.
pub fn read_file(path: &Path) -> Result<Settings, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_file(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse_file(text: &str) -> Result<Settings, ConfigError> {
    if text.trim().is_empty() {
        return Ok(Settings::default());
    }
    serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
}

fn finite(field: &str, v: Option<f64>) -> Result<Option<f64>, ConfigError> {
    match v {
        Some(x) if !x.is_finite() => Err(bad(field, format!("{x} is not finite"))),
        other => Ok(other),
    }
}

fn positive(field: &str, v: Option<f64>) -> Result<Option<f64>, ConfigError> {
    match finite(field, v)? {
        Some(x) if x <= 0.0 => Err(bad(field, format!("{x} must be positive"))),
        other => Ok(other),
    }
}

fn non_negative(field: &str, v: Option<f64>) -> Result<Option<f64>, ConfigError> {
    match finite(field, v)? {
        Some(x) if x < 0.0 => Err(bad(field, format!("{x} must be non-negative"))),
        other => Ok(other),
    }
}

fn fraction(field: &str, v: Option<f64>) -> Result<f64, ConfigError> {
    match finite(field, v)? {
        Some(x) if !(0.0..1.0).contains(&x) => Err(bad(field, format!("{x} not in [0, 1)"))),
        other => Ok(other.unwrap_or(0.0)),
    }
}

/// Validates merged settings and fills defaults.
pub fn validate(s: Settings) -> Result<RunConfig, ConfigError> {
    let mut rho = positive("rho", s.rho)?;
    let mut eta = non_negative("eta", s.eta)?;
    let xi = non_negative("xi", s.xi)?;
    if let Some(p) = s.physical {
        if rho.is_some() || eta.is_some() {
            return Err(bad("physical", "conflicts with an explicit rho or eta"));
        }
        let c = coupling_from_physical(&p).map_err(|e| bad("physical", e))?;
        rho = Some(c.rho);
        eta = Some(c.eta);
    }
    if rho.is_some() && eta.is_some() && xi.is_some() {
        return Err(bad(
            "xi",
            "xi and eta are mutually exclusive when rho is given",
        ));
    }

    let ideal = s.ideal.unwrap_or(false);
    let loss = fraction("loss", s.loss)?;
    let det_noise = non_negative("det_noise", s.det_noise)?.unwrap_or(0.0);
    let det_loss = fraction("det_loss", s.det_loss)?;
    if ideal && (loss > 0.0 || det_noise > 0.0 || det_loss > 0.0) {
        return Err(bad(
            "ideal",
            "cannot be combined with loss or detector noise",
        ));
    }

    let n = s.n.unwrap_or(DEFAULT_SEGMENTS);
    if n == 0 {
        return Err(bad("n", "must be at least 1"));
    }
    let eta_min = positive("eta_min", s.eta_min)?.unwrap_or(0.005);
    let eta_max = positive("eta_max", s.eta_max)?.unwrap_or(1.0);
    if eta_max <= eta_min {
        return Err(bad(
            "eta_max",
            format!("{eta_max} must exceed eta_min = {eta_min}"),
        ));
    }
    let eta_points = s.eta_points.unwrap_or(41);
    if eta_points < 2 {
        return Err(bad("eta_points", "must be at least 2"));
    }
    let rho_list = s.rho_list.unwrap_or_else(|| DEFAULT_RHO_LIST.to_vec());
    if rho_list.is_empty() || rho_list.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(bad("rho_list", "needs positive, finite entries"));
    }
    if let Some(list) = &s.xi_list {
        if list.is_empty() || list.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(bad("xi_list", "needs non-negative, finite entries"));
        }
    }
    let xi_min = positive("xi_min", s.xi_min)?;
    let xi_max = positive("xi_max", s.xi_max)?;
    if let (Some(lo), Some(hi)) = (xi_min, xi_max) {
        if hi <= lo {
            return Err(bad("xi_max", format!("{hi} must exceed xi_min = {lo}")));
        }
    }
    let xi_points = s.xi_points.unwrap_or(31);
    if xi_points < 2 {
        return Err(bad("xi_points", "must be at least 2"));
    }
    let sizes = s.sizes.unwrap_or_else(|| vec![20, 40]);
    if sizes.is_empty()
        || sizes
            .iter()
            .any(|&k| k == 0 || k > squeezekit_core::oracle::MAX_PARTICLES)
    {
        return Err(bad(
            "sizes",
            format!(
                "entries must lie in 1..={}",
                squeezekit_core::oracle::MAX_PARTICLES
            ),
        ));
    }
    if s.threads == Some(0) {
        return Err(bad("threads", "must be at least 1"));
    }

    Ok(RunConfig {
        protocol: s.protocol,
        rho,
        eta,
        xi,
        n,
        loss,
        det_noise,
        det_loss,
        feedback: s.feedback.unwrap_or_default(),
        rotation: s.rotation.unwrap_or_default(),
        eta_min,
        eta_max,
        eta_points,
        rho_list,
        xi_list: s.xi_list,
        xi_min,
        xi_max,
        xi_points,
        sizes,
        ideal,
        format: s.format.unwrap_or_default(),
        out: s.out,
        threads: s.threads,
        physical: s.physical,
    })
}
