use serde::{Deserialize, Serialize};

use super::optimize::golden_section_minimize;
use crate::error::{invalid, Result};

/// Decoherence-free squeezing law entering the linear noise model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdealScaling {
    /// `1/ξ`
    Qnd,
    /// `1/ξ²`
    Qe,
    /// `e^{−ξ}`
    Pm,
}

impl IdealScaling {
    pub fn zeta(&self, xi: f64) -> f64 {
        match self {
            Self::Qnd => 1.0 / xi,
            Self::Qe => 1.0 / (xi * xi),
            Self::Pm => (-xi).exp(),
        }
    }
}

/// `ζ(η) ≈ ζ_ideal(ρη/9) + c·η`: scattering adds spin noise in proportion to
/// the number of scattered photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleNoiseModel {
    pub c: f64,
    pub ideal: IdealScaling,
}

impl SimpleNoiseModel {
    pub fn new(c: f64, ideal: IdealScaling) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", format!("{c} must be positive")));
        }
        Ok(Self { c, ideal })
    }

    pub fn zeta(&self, rho: f64, eta: f64) -> f64 {
        self.ideal.zeta(rho * eta / 9.0) + self.c * eta
    }
}

fn check(model: &SimpleNoiseModel, rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", format!("{rho} must be positive")));
    }
    if !(model.c > 0.0 && model.c.is_finite()) {
        return Err(invalid("c", format!("{} must be positive", model.c)));
    }
    Ok(())
}

/// Minimum of the simple noise model over `η > 0`: `(ζ_min, η*)`.
pub fn simple_model_min(model: &SimpleNoiseModel, rho: f64) -> Result<(f64, f64)> {
    check(model, rho)?;
    let c = model.c;
    Ok(match model.ideal {
        IdealScaling::Qnd => (6.0 * (c / rho).sqrt(), 3.0 / (c * rho).sqrt()),
        IdealScaling::Qe => {
            let eta = (162.0 / (c * rho * rho)).cbrt();
            (1.5 * c * eta, eta)
        }
        IdealScaling::Pm => {
            let ratio = rho / (9.0 * c);
            if ratio <= 1.0 {
                (1.0, 0.0)
            } else {
                let eta = 9.0 / rho * ratio.ln();
                (9.0 * c / rho + c * eta, eta)
            }
        }
    })
}

/// Same minimum found by a grid scan plus golden-section search in `ln η`.
pub fn simple_model_min_numeric(model: &SimpleNoiseModel, rho: f64) -> Result<(f64, f64)> {
    check(model, rho)?;
    let f = |log_eta: f64| model.zeta(rho, log_eta.exp());
    let (lo, hi, points) = (-40.0, 10.0, 501);
    let step = (hi - lo) / (points - 1) as f64;
    let best = (0..points)
        .map(|i| lo + step * i as f64)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(lo);
    let (x, fx) = golden_section_minimize(f, best - step, best + step, 1e-12);
    Ok((fx, x.exp()))
}
