use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    Natural,
    Ten,
}

impl LogBase {
    fn log(&self, x: f64) -> f64 {
        match self {
            Self::Natural => x.ln(),
            Self::Ten => x.log10(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    /// `ζ = (a + b·log ρ)/ρ`, fitted as `ζρ` against `log ρ`.
    LogOverRho(LogBase),
    /// `ζ = a·ρ^b`, fitted in log-log space.
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    /// `(a, b)`: intercept and log-slope, or prefactor and exponent.
    pub params: (f64, f64),
    /// Coefficient of determination of the linearized fit, in `[0, 1]`.
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
    /// Relative residuals `(ζ_fit − ζ)/ζ` per point.
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    pub fn predict(&self, rho: f64) -> f64 {
        let (a, b) = self.params;
        match self.model {
            ScalingModel::LogOverRho(base) => (a + b * base.log(rho)) / rho,
            ScalingModel::PowerLaw => a * rho.powf(b),
        }
    }
}

/// Ordinary least squares for `y = a + b x`; returns `(a, b, R²)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-300) || sxx <= 1e-24 * xs.iter().map(|x| x * x).sum::<f64>() {
        return Err(Error::SingularFit);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok((a, b, r2.clamp(0.0, 1.0)))
}

/// Least-squares fit of peak squeezing against optical density.
pub fn fit_scaling(points: &[(f64, f64)], model: ScalingModel) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(invalid(
            "points",
            format!("need at least 3, got {}", points.len()),
        ));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.0.is_finite() && p.1.is_finite()))
    {
        return Err(invalid(
            "points",
            format!("rho and zeta must be positive, got {p:?}"),
        ));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = match model {
        ScalingModel::LogOverRho(base) => points.iter().map(|&(r, z)| (base.log(r), z * r)).unzip(),
        ScalingModel::PowerLaw => points.iter().map(|&(r, z)| (r.ln(), z.ln())).unzip(),
    };
    let (a, b, r_squared) = linear_fit(&xs, &ys)?;
    let params = match model {
        ScalingModel::LogOverRho(_) => (a, b),
        ScalingModel::PowerLaw => (a.exp(), b),
    };
    let mut fit = ScalingFit {
        model,
        params,
        r_squared,
        points: points.to_vec(),
        residuals: Vec::new(),
    };
    fit.residuals = points
        .iter()
        .map(|&(r, z)| (fit.predict(r) - z) / z)
        .collect();
    Ok(fit)
}
