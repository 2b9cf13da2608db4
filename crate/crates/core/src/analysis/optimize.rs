use std::f64::consts::{FRAC_PI_2, PI};

use crate::channels::{
    atom_rotation, eraser_step, scattering_channel, DecayRates, ImperfectionSettings,
};
use crate::error::Result;
use crate::gaussian::GaussianState;

pub const COARSE_GRID_POINTS: usize = 64;

const ANGLE_TOL: f64 = 1e-9;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]` down to bracket
/// width `tol`. Returns `(x_min, f_min)`.
pub fn golden_section_minimize(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Atom min-variance after `rotate(phi) → eraser_step → scattering`.
pub fn rotation_objective(
    state: &GaussianState,
    phi: f64,
    next_xi_step: f64,
    next_rates: &DecayRates,
    imp: &ImperfectionSettings,
) -> Result<f64> {
    let rotated = atom_rotation(state, phi)?;
    let (with_light, id) = rotated.attach_vacuum();
    let sheared = eraser_step(&with_light, id, next_xi_step, imp)?;
    let decayed = scattering_channel(&sheared, next_rates)?;
    Ok(decayed.min_variance().0)
}

/// Counter-rotation that minimizes the squeezed variance after the next
/// shear and decay step.
///
/// A 64-point grid over `[−π/2, π/2)` seeds a golden-section refinement to
/// 1e-9 rad. Among equally good grid points the smallest `|φ|` wins, and a
/// flat objective returns 0.
pub fn optimize_rotation(
    state: &GaussianState,
    next_xi_step: f64,
    next_rates: &DecayRates,
    imp: &ImperfectionSettings,
) -> Result<f64> {
    // The objective only depends on the atom block.
    let atom = GaussianState::from_atom_covariance(state.atom_cov(), state.contrast())?;
    let objective = |phi: f64| rotation_objective(&atom, phi, next_xi_step, next_rates, imp);

    let step = PI / COARSE_GRID_POINTS as f64;
    let grid: Vec<f64> = (0..COARSE_GRID_POINTS)
        .map(|i| -FRAC_PI_2 + i as f64 * step)
        .collect();
    let values = grid
        .iter()
        .map(|&phi| objective(phi))
        .collect::<Result<Vec<f64>>>()?;

    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-14 * lo.abs().max(f64::MIN_POSITIVE) {
        return Ok(0.0);
    }
    let tie = 1e-13 * lo.abs();
    let best = grid
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v <= lo + tie)
        .map(|(&phi, _)| phi)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);

    // The objective is π-periodic, so the bracket may cross ±π/2.
    let (phi, value) = golden_section_minimize(
        |x| objective(x).unwrap_or(f64::INFINITY),
        best - step,
        best + step,
        ANGLE_TOL,
    );
    let phi = if value <= lo { phi } else { best };
    let wrapped = (phi + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    Ok(wrapped)
}
