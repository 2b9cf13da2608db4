//! Elementary physical steps of the atom-light interface as Gaussian maps.
//!
//! Sign conventions: the Faraday pass displaces `X_A += √ξ P_L` and
//! `X_L += √ξ P_A`; the quarter waveplate maps `(X_L, P_L) → (−P_L, X_L)`.
//! With these, a double pass carries the which-way information on
//! `X̄_L = (X_L + P_L)/√2` and leaves `P̄_L = (−X_L + P_L)/√2` free of spin
//! information, so the eraser measures at angle `3π/4`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gaussian::{GaussianState, LightId, NoiseChannel, SymplecticMap, VACUUM_VARIANCE};

/// Homodyne angle of `P̄_L` relative to `X_L`.
pub const ERASER_ANGLE: f64 = 3.0 * PI / 4.0;

/// How the eraser feedback uses the polarimeter signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// Optimal linear feedback: the atom is left in the conditional state.
    #[default]
    Conditional,
    /// Feedback displacement `X_A −= √(2ξ)·(measured P̄_L)` at the ideal gain.
    FixedGain,
}

/// Technical imperfections of one double pass.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImperfectionSettings {
    /// Fractional optical loss between the two passes, in `[0, 1)`.
    pub interpass_loss: f64,
    /// Detector noise variance as a fraction of the probe shot noise.
    pub detector_noise: f64,
    #[serde(default)]
    pub feedback: Feedback,
    /// Fractional loss between the second pass and the polarimeter, in `[0, 1)`.
    #[serde(default)]
    pub detection_loss: f64,
}

impl ImperfectionSettings {
    pub fn new(interpass_loss: f64, detector_noise: f64) -> Result<Self> {
        let imp = Self {
            interpass_loss,
            detector_noise,
            ..Self::default()
        };
        imp.validate()?;
        Ok(imp)
    }

    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn with_feedback(self, feedback: Feedback) -> Self {
        Self { feedback, ..self }
    }

    pub fn with_detection_loss(self, detection_loss: f64) -> Result<Self> {
        let imp = Self {
            detection_loss,
            ..self
        };
        imp.validate()?;
        Ok(imp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.interpass_loss) {
            return Err(invalid(
                "interpass_loss",
                format!("{} not in [0, 1)", self.interpass_loss),
            ));
        }
        if !(0.0..1.0).contains(&self.detection_loss) {
            return Err(invalid(
                "detection_loss",
                format!("{} not in [0, 1)", self.detection_loss),
            ));
        }
        if self.detector_noise.is_nan() || self.detector_noise < 0.0 {
            return Err(invalid(
                "detector_noise",
                format!("{} < 0", self.detector_noise),
            ));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.interpass_loss == 0.0 && self.detector_noise == 0.0 && self.detection_loss == 0.0
    }
}

/// Optical-pumping decay over one interval: `γ∥τ` for the spin component
/// along the probe polarization (`J_y`, i.e. `X_A`) and `γ⊥τ` for the two
/// perpendicular components (`J_z` and `J_x`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecayRates {
    pub gamma_par_tau: f64,
    pub gamma_perp_tau: f64,
}

impl DecayRates {
    /// Rates must be non-negative with `γ∥ ≤ 2γ⊥`, the spin-1/2 limit that
    /// keeps the decay map a physical channel.
    pub fn new(gamma_par_tau: f64, gamma_perp_tau: f64) -> Result<Self> {
        let rates = Self {
            gamma_par_tau,
            gamma_perp_tau,
        };
        rates.validate()?;
        Ok(rates)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Spin-1/2 rates for a double pass: `γ∥τ = 8η/9`, `γ⊥τ = 4η/9`.
    pub fn from_eta(eta: f64) -> Result<Self> {
        if eta.is_nan() || eta < 0.0 {
            return Err(invalid("eta", format!("{eta} < 0")));
        }
        Ok(Self {
            gamma_par_tau: 8.0 * eta / 9.0,
            gamma_perp_tau: 4.0 * eta / 9.0,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            gamma_par_tau: self.gamma_par_tau * factor,
            gamma_perp_tau: self.gamma_perp_tau * factor,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gamma_par_tau == 0.0 && self.gamma_perp_tau == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let (par, perp) = (self.gamma_par_tau, self.gamma_perp_tau);
        if par.is_nan() || par < 0.0 {
            return Err(invalid("gamma_par_tau", format!("{par} < 0")));
        }
        if perp.is_nan() || perp < 0.0 {
            return Err(invalid("gamma_perp_tau", format!("{perp} < 0")));
        }
        if par > 2.0 * perp * (1.0 + 1e-12) {
            return Err(invalid(
                "gamma_par_tau",
                format!("{par} exceeds 2·gamma_perp_tau = {}", 2.0 * perp),
            ));
        }
        Ok(())
    }
}

/// Microscopic parameters of the ensemble and probe pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub n_atoms: f64,
    pub n_photons: f64,
    /// Transition wavelength λ.
    pub wavelength: f64,
    /// Cross-sectional area A of the probe mode (same length unit as λ, squared).
    pub area: f64,
    /// Detuning Δ (same unit as the linewidth).
    pub detuning: f64,
    /// Natural linewidth Γ.
    pub linewidth: f64,
}

/// Derived couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    /// Resonant cross section σ₀ = 3λ²/2π.
    pub sigma0: f64,
    /// Faraday rotation per unit angular momentum.
    pub chi: f64,
    /// Resonant optical density at unit oscillator strength.
    pub rho: f64,
    /// Scattering probability per atom per pass.
    pub eta: f64,
    /// Coupling strength.
    pub xi: f64,
}

pub fn coupling_from_physical(p: &PhysicalParams) -> Result<Couplings> {
    let positive = [
        ("n_atoms", p.n_atoms),
        ("wavelength", p.wavelength),
        ("area", p.area),
        ("detuning", p.detuning),
        ("linewidth", p.linewidth),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("{v} must be positive")));
        }
    }
    if !(p.n_photons >= 0.0 && p.n_photons.is_finite()) {
        return Err(invalid(
            "n_photons",
            format!("{} must be non-negative", p.n_photons),
        ));
    }
    let sigma0 = 3.0 * p.wavelength * p.wavelength / (2.0 * PI);
    let od_unit = sigma0 / p.area;
    let chi = od_unit * p.linewidth / (3.0 * p.detuning);
    let rho = p.n_atoms * od_unit;
    let eta = p.n_photons * od_unit * p.linewidth * p.linewidth / (4.0 * p.detuning * p.detuning);
    let xi = p.n_atoms * p.n_photons * chi * chi / 4.0;
    Ok(Couplings {
        sigma0,
        chi,
        rho,
        eta,
        xi,
    })
}

fn check_xi(xi: f64) -> Result<()> {
    if xi.is_nan() || xi < 0.0 || xi.is_infinite() {
        return Err(invalid(
            "xi",
            format!("{xi} must be finite and non-negative"),
        ));
    }
    Ok(())
}

/// Embeds a 4×4 map on `(X_A, P_A, X_L, P_L)` into the full state dimension.
fn embed_atom_light(dim: usize, light_index: usize, local: &[[f64; 4]; 4]) -> DMatrix<f64> {
    let idx = [0, 1, 2 * light_index, 2 * light_index + 1];
    let mut s = DMatrix::identity(dim, dim);
    for (r, row) in local.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            s[(idx[r], idx[c])] = v;
        }
    }
    s
}

/// Symplectic map of one Faraday pass on a state of dimension `dim`.
pub fn faraday_map(dim: usize, light_index: usize, xi: f64) -> Result<SymplecticMap> {
    check_xi(xi)?;
    let r = xi.sqrt();
    Ok(SymplecticMap::new(embed_atom_light(
        dim,
        light_index,
        &[
            [1.0, 0.0, 0.0, r],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, r, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    )))
}

/// Symplectic map of the quarter waveplate on one light mode.
pub fn waveplate_map(dim: usize, light_index: usize) -> SymplecticMap {
    let mut s = DMatrix::identity(dim, dim);
    let (x, p) = (2 * light_index, 2 * light_index + 1);
    s[(x, x)] = 0.0;
    s[(p, p)] = 0.0;
    s[(x, p)] = -1.0;
    s[(p, x)] = 1.0;
    SymplecticMap::new(s)
}

/// Symplectic map rotating the atomic quadratures by `phi`.
pub fn rotation_map(dim: usize, phi: f64) -> Result<SymplecticMap> {
    if !phi.is_finite() {
        return Err(invalid("phi", format!("{phi} is not finite")));
    }
    let (s, c) = phi.sin_cos();
    let mut m = DMatrix::identity(dim, dim);
    m[(0, 0)] = c;
    m[(0, 1)] = -s;
    m[(1, 0)] = s;
    m[(1, 1)] = c;
    Ok(SymplecticMap::new(m))
}

/// Single Faraday pass `U_F = exp(−i√ξ P_A P_L)`.
pub fn faraday_pass(state: &GaussianState, mode: LightId, xi: f64) -> Result<GaussianState> {
    let k = state.light_index(mode)?;
    state.apply_symplectic(&faraday_map(state.dim(), k, xi)?)
}

/// Quarter-turn of the probe quadratures, `(X_L, P_L) → (−P_L, X_L)`.
pub fn waveplate_quarter(state: &GaussianState, mode: LightId) -> Result<GaussianState> {
    let k = state.light_index(mode)?;
    state.apply_symplectic(&waveplate_map(state.dim(), k))
}

/// Pure-loss channel of transmissivity `1 − loss` on one light mode.
pub fn optical_loss(state: &GaussianState, mode: LightId, loss: f64) -> Result<GaussianState> {
    if !(0.0..=1.0).contains(&loss) {
        return Err(invalid("loss", format!("{loss} not in [0, 1]")));
    }
    if loss == 0.0 {
        return Ok(state.clone());
    }
    let k = state.light_index(mode)?;
    let dim = state.dim();
    let mut gain = DMatrix::identity(dim, dim);
    let mut noise = DMatrix::zeros(dim, dim);
    for i in [2 * k, 2 * k + 1] {
        gain[(i, i)] = (1.0 - loss).sqrt();
        noise[(i, i)] = loss * VACUUM_VARIANCE;
    }
    state.apply_channel(&NoiseChannel::new(gain, noise, 1.0))
}

/// Faraday pass, waveplate, Faraday pass.
pub fn double_pass(state: &GaussianState, mode: LightId, xi: f64) -> Result<GaussianState> {
    double_pass_with_loss(state, mode, xi, 0.0)
}

/// Double pass with optical loss on the probe between the passes.
pub fn double_pass_with_loss(
    state: &GaussianState,
    mode: LightId,
    xi: f64,
    interpass_loss: f64,
) -> Result<GaussianState> {
    let first = faraday_pass(state, mode, xi)?;
    let turned = waveplate_quarter(&first, mode)?;
    let lossy = optical_loss(&turned, mode, interpass_loss)?;
    faraday_pass(&lossy, mode, xi)
}

/// Double pass followed by the quantum eraser: measure `P̄_L`, feed back on
/// the spin, discard the probe.
pub fn eraser_step(
    state: &GaussianState,
    mode: LightId,
    xi: f64,
    imp: &ImperfectionSettings,
) -> Result<GaussianState> {
    imp.validate()?;
    let passed = double_pass_with_loss(state, mode, xi, imp.interpass_loss)?;
    let passed = optical_loss(&passed, mode, imp.detection_loss)?;
    match imp.feedback {
        Feedback::Conditional => {
            let (out, _) = passed.homodyne_condition(mode, ERASER_ANGLE, imp.detector_noise)?;
            Ok(out)
        }
        Feedback::FixedGain => fixed_gain_feedback(
            &passed,
            mode,
            xi / (1.0 - imp.detection_loss),
            imp.detector_noise,
        ),
    }
}

/// `X_A −= g·(P̄_L + δ)` with `g = √(2ξ)` and `Var δ = σ²/2`, averaged over
/// outcomes, then the probe is discarded.
fn fixed_gain_feedback(
    state: &GaussianState,
    mode: LightId,
    xi: f64,
    detector_noise: f64,
) -> Result<GaussianState> {
    if detector_noise.is_infinite() {
        return state.trace_out(mode);
    }
    let k = state.light_index(mode)?;
    let dim = state.dim();
    let gain = (2.0 * xi).sqrt();
    let mut g = DMatrix::identity(dim, dim);
    // P̄_L = (−X_L + P_L)/√2
    g[(0, 2 * k)] = gain * FRAC_1_SQRT_2;
    g[(0, 2 * k + 1)] = -gain * FRAC_1_SQRT_2;
    let mut noise = DMatrix::zeros(dim, dim);
    noise[(0, 0)] = gain * gain * detector_noise * VACUUM_VARIANCE;
    let fed = state.apply_channel(&NoiseChannel::new(g, noise, 1.0))?;
    fed.trace_out(mode)
}

/// Rotation of the atomic quadratures by `phi` (counterclockwise).
pub fn atom_rotation(state: &GaussianState, phi: f64) -> Result<GaussianState> {
    state.apply_symplectic(&rotation_map(state.dim(), phi)?)
}

/// Optical-pumping decoherence of the atom mode.
///
/// Independent spin-1/2 Raman flips: the amplitude of each spin component
/// decays as `e^{−γτ}` and its excess variance as `e^{−2γτ}`, relaxing to
/// projection noise. `J_x` decays with `γ⊥`, which sets the contrast.
pub fn scattering_channel(state: &GaussianState, rates: &DecayRates) -> Result<GaussianState> {
    rates.validate()?;
    if rates.is_zero() {
        return Ok(state.clone());
    }
    let dim = state.dim();
    let gx = (-rates.gamma_par_tau).exp();
    let gp = (-rates.gamma_perp_tau).exp();
    let mut gain = DMatrix::identity(dim, dim);
    gain[(0, 0)] = gx;
    gain[(1, 1)] = gp;
    let mut noise = DMatrix::zeros(dim, dim);
    noise[(0, 0)] = -(-2.0 * rates.gamma_par_tau).exp_m1() * VACUUM_VARIANCE;
    noise[(1, 1)] = -(-2.0 * rates.gamma_perp_tau).exp_m1() * VACUUM_VARIANCE;
    // exp underflows to 0 for huge rates; the contrast must stay positive.
    let contrast_factor = gp.max(f64::MIN_POSITIVE);
    state.apply_channel(&NoiseChannel::new(gain, noise, contrast_factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vacuum_with_light() -> (GaussianState, LightId) {
        GaussianState::new(0).attach_vacuum()
    }

    fn local(st: &GaussianState, id: LightId) -> DMatrix<f64> {
        let k = st.light_index(id).unwrap();
        let idx = [0, 1, 2 * k, 2 * k + 1];
        DMatrix::from_fn(4, 4, |i, j| st.cov()[(idx[i], idx[j])])
    }

    #[test]
    fn faraday_on_vacuum() {
        let (st, id) = vacuum_with_light();
        assert_eq!(faraday_pass(&st, id, 0.0).unwrap(), st);
        let out = faraday_pass(&st, id, 1.0).unwrap();
        let c = local(&out, id);
        assert_abs_diff_eq!(c[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(0, 3)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(1, 1)], 0.5, epsilon = 1e-15);
        assert!(faraday_pass(&st, LightId(9), 1.0).is_err());
        assert!(faraday_pass(&st, id, -1.0).is_err());
    }

    #[test]
    fn two_faraday_passes_compose_additively() {
        // S(ξ)² has displacement coefficients 2√ξ, i.e. equals S(4ξ).
        let (st, id) = vacuum_with_light();
        let st = faraday_pass(&st, id, 0.3).unwrap();
        let twice = faraday_pass(&faraday_pass(&st, id, 0.7).unwrap(), id, 0.7).unwrap();
        let once = faraday_pass(&st, id, 4.0 * 0.7).unwrap();
        assert!((twice.cov() - once.cov()).amax() < 1e-13);
    }

    #[test]
    fn waveplate_cycles() {
        let (st, id) = vacuum_with_light();
        let st = faraday_pass(&st, id, 0.9).unwrap();
        let mut cur = st.clone();
        for _ in 0..4 {
            cur = waveplate_quarter(&cur, id).unwrap();
        }
        assert!((cur.cov() - st.cov()).amax() < 1e-15);
        let two = waveplate_quarter(&waveplate_quarter(&st, id).unwrap(), id).unwrap();
        // (X_L, P_L) → (−X_L, −P_L) flips atom-light cross terms only.
        assert_abs_diff_eq!(two.cov()[(0, 3)], -st.cov()[(0, 3)], epsilon = 1e-15);
        let (vac, vid) = vacuum_with_light();
        assert_eq!(waveplate_quarter(&vac, vid).unwrap().cov(), vac.cov());
    }

    #[test]
    fn double_pass_vacuum_moments() {
        let (st, id) = vacuum_with_light();
        let xi: f64 = 2.0;
        let out = double_pass(&st, id, xi).unwrap();
        let atom = out.trace_out(id).unwrap();
        let c = atom.atom_cov();
        assert_abs_diff_eq!(c[0][0], 4.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c[0][1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1][1], 0.5, epsilon = 1e-14);

        let k = out.light_index(id).unwrap();
        let xbar_angle = PI / 4.0;
        assert_abs_diff_eq!(
            out.quadrature_variance(k, xbar_angle),
            (1.0 + 2.0 * xi) / 2.0,
            epsilon = 1e-14
        );
        // Cov(X̄_L, P_A) = √(2ξ)/2
        let (s, c) = xbar_angle.sin_cos();
        let cross = c * out.cov()[(2 * k, 1)] + s * out.cov()[(2 * k + 1, 1)];
        assert_abs_diff_eq!(cross, (2.0 * xi).sqrt() / 2.0, epsilon = 1e-14);

        let plain = double_pass(&st, id, 0.0).unwrap();
        assert_eq!(plain.atom_cov(), st.atom_cov());
    }

    #[test]
    fn ideal_eraser_is_pure_shear() {
        let (st, id) = vacuum_with_light();
        let out = eraser_step(&st, id, 2.0, &ImperfectionSettings::ideal()).unwrap();
        assert_eq!(out.num_modes(), 1);
        let c = out.atom_cov();
        assert_abs_diff_eq!(c[0][0], 2.5, epsilon = 1e-13);
        assert_abs_diff_eq!(c[0][1], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c[1][1], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn blind_eraser_equals_discarding() {
        let (st, id) = vacuum_with_light();
        let imp = ImperfectionSettings {
            detector_noise: f64::INFINITY,
            ..Default::default()
        };
        for feedback in [Feedback::Conditional, Feedback::FixedGain] {
            let out = eraser_step(&st, id, 2.0, &imp.with_feedback(feedback)).unwrap();
            let c = out.atom_cov();
            assert_abs_diff_eq!(c[0][0], 4.5, epsilon = 1e-13);
            assert_abs_diff_eq!(c[0][1], 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn eraser_without_coupling_is_identity_on_atom() {
        let sheared = atom_rotation(
            &GaussianState::from_atom_covariance([[2.5, 1.0], [1.0, 0.5]], 1.0).unwrap(),
            0.2,
        )
        .unwrap();
        let (st, id) = sheared.attach_vacuum();
        for imp in [
            ImperfectionSettings::new(0.2, 0.1).unwrap(),
            ImperfectionSettings::ideal(),
        ] {
            let out = eraser_step(&st, id, 0.0, &imp).unwrap();
            assert!((out.cov() - sheared.cov()).amax() < 1e-14);
        }
    }

    #[test]
    fn fixed_gain_matches_conditioning_when_ideal() {
        let base = GaussianState::from_atom_covariance([[1.2, -0.3], [-0.3, 0.6]], 1.0).unwrap();
        let (st, id) = base.attach_vacuum();
        let ideal = ImperfectionSettings::ideal();
        let a = eraser_step(&st, id, 1.7, &ideal).unwrap();
        let b = eraser_step(&st, id, 1.7, &ideal.with_feedback(Feedback::FixedGain)).unwrap();
        assert!((a.cov() - b.cov()).amax() < 1e-13);
    }

    #[test]
    fn rotations() {
        let st = GaussianState::from_atom_covariance([[2.5, 1.0], [1.0, 0.5]], 1.0).unwrap();
        assert_eq!(atom_rotation(&st, 0.0).unwrap().cov(), st.cov());
        let q = atom_rotation(&st, PI / 2.0).unwrap().atom_cov();
        assert_abs_diff_eq!(q[0][0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(q[0][1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q[1][1], 2.5, epsilon = 1e-14);
        assert!((atom_rotation(&st, 2.0 * PI).unwrap().cov() - st.cov()).amax() < 1e-12);
    }

    #[test]
    fn scattering() {
        let st = GaussianState::from_atom_covariance([[2.5, 1.0], [1.0, 0.5]], 1.0).unwrap();
        assert_eq!(scattering_channel(&st, &DecayRates::zero()).unwrap(), st);

        let out = scattering_channel(&st, &DecayRates::new(80.0, 40.0).unwrap()).unwrap();
        assert!((out.cov() - DMatrix::identity(2, 2) * 0.5).amax() < 1e-12);
        assert!(out.contrast() < 1e-15);

        let rates = DecayRates::from_eta(0.18).unwrap();
        assert_abs_diff_eq!(rates.gamma_perp_tau, 0.08, epsilon = 1e-15);
        assert_abs_diff_eq!(rates.gamma_par_tau, 0.16, epsilon = 1e-15);
        let out = scattering_channel(&GaussianState::new(0), &rates).unwrap();
        assert_abs_diff_eq!(out.contrast(), 0.923_116_346_386_635_8, epsilon = 1e-12);

        assert!(DecayRates::new(0.3, 0.1).is_err());
        assert!(DecayRates::new(-0.1, 0.1).is_err());
    }

    #[test]
    fn couplings() {
        let p = PhysicalParams {
            n_atoms: 1e6,
            n_photons: 0.0,
            wavelength: 852e-9,
            area: 1e-8,
            detuning: 1e3,
            linewidth: 1.0,
        };
        let c = coupling_from_physical(&p).unwrap();
        assert_eq!((c.eta, c.xi), (0.0, 0.0));

        let p = PhysicalParams {
            n_photons: 3.3e9,
            ..p
        };
        let c = coupling_from_physical(&p).unwrap();
        assert!((c.xi - c.rho * c.eta / 9.0).abs() <= 1e-12 * c.xi);

        assert!(coupling_from_physical(&PhysicalParams { area: 0.0, ..p }).is_err());
        assert!(coupling_from_physical(&PhysicalParams {
            n_photons: -1.0,
            ..p
        })
        .is_err());

        // ρ = 300 with ξ = 6 requires η = 9ξ/ρ.
        assert_abs_diff_eq!(9.0 * 6.0 / 300.0, 0.18, epsilon = 1e-15);
    }

    #[test]
    fn imperfection_validation() {
        assert!(ImperfectionSettings::new(1.0, 0.0).is_err());
        assert!(ImperfectionSettings::new(0.1, -0.1).is_err());
        assert!(ImperfectionSettings::new(0.06, 0.03).is_ok());
        assert!(ImperfectionSettings::ideal()
            .with_detection_loss(1.0)
            .is_err());
        assert!(!ImperfectionSettings::ideal()
            .with_detection_loss(0.1)
            .unwrap()
            .is_ideal());
    }

    #[test]
    fn detection_loss_degrades_eraser() {
        let (st, id) = GaussianState::new(0).attach_vacuum();
        let clean = ImperfectionSettings::new(0.06, 0.03).unwrap();
        let lossy = clean.with_detection_loss(0.06).unwrap();
        let v_clean = eraser_step(&st, id, 2.0, &clean).unwrap().min_variance().0;
        let v_lossy = eraser_step(&st, id, 2.0, &lossy).unwrap().min_variance().0;
        assert!(v_lossy > v_clean);
        for feedback in [Feedback::Conditional, Feedback::FixedGain] {
            let imp = ImperfectionSettings::ideal()
                .with_feedback(feedback)
                .with_detection_loss(0.2)
                .unwrap();
            let out = eraser_step(&st, id, 2.0, &imp).unwrap();
            assert!(out.min_variance().0 < 0.5);
        }
    }
}
