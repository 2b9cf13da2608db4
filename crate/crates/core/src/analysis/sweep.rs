use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::protocols::{run_protocol, ProtocolSchedule};

/// Squeezing versus decoherence for one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `(γ⊥τ, zeta_db)` in grid order.
    pub curve: Vec<(f64, f64)>,
    pub peak_db: f64,
    pub peak_gamma_perp_tau: f64,
}

/// `points` values from `lo` to `hi` inclusive, evenly spaced in log.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid(
            "grid",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    match points {
        0 => Err(invalid("grid", "need at least one point")),
        1 => Ok(vec![lo]),
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (points - 1) as f64;
            Ok((0..points)
                .map(|i| {
                    if i + 1 == points {
                        hi
                    } else {
                        (a + step * i as f64).exp()
                    }
                })
                .collect())
        }
    }
}

/// Vertex of the parabola through the best sample and its two neighbours.
///
/// Abscissae are taken in log space when all are positive (sweeps are
/// log-spaced). A maximum on the edge of the grid is returned as is.
pub fn parabolic_peak(curve: &[(f64, f64)]) -> (f64, f64) {
    let Some(best) = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
    else {
        return (f64::NAN, f64::NAN);
    };
    if best == 0 || best + 1 == curve.len() {
        return curve[best];
    }
    let use_log = curve[best - 1..=best + 1].iter().all(|p| p.0 > 0.0);
    let t = |x: f64| if use_log { x.ln() } else { x };
    let (x0, y0) = (t(curve[best - 1].0), curve[best - 1].1);
    let (x1, y1) = (t(curve[best].0), curve[best].1);
    let (x2, y2) = (t(curve[best + 1].0), curve[best + 1].1);

    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature < 0.0) {
        return curve[best];
    }
    // y = y1 + d·(x − x1) + curvature·(x − x1)(x − x_other) form via Newton.
    let xv = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    let xv = xv.clamp(x0, x2);
    let yv = y0 + d01 * (xv - x0) + curvature * (xv - x0) * (xv - x1);
    let xv = if use_log { xv.exp() } else { xv };
    (xv, yv.max(y1))
}

/// Runs `base` at each `eta` (with `ξ = ρη/9`) and locates the best squeezing.
///
/// The abscissa is the double-pass decay `γ⊥τ = 4η/9` for every protocol.
pub fn sweep_eta(base: &ProtocolSchedule, eta_grid: &[f64]) -> Result<SweepResult> {
    if eta_grid.is_empty() {
        return Err(invalid("eta_grid", "must not be empty"));
    }
    if eta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("eta_grid", "must be strictly increasing"));
    }
    if base.rho.is_none() {
        return Err(invalid("rho", "required for an eta sweep"));
    }
    let curve = eta_grid
        .par_iter()
        .map(|&eta| {
            let sched = base.with_eta(eta)?;
            let rec = run_protocol(&sched)?;
            Ok((4.0 * eta / 9.0, rec.zeta_db))
        })
        .collect::<Result<Vec<_>>>()?;
    let (peak_gamma_perp_tau, peak_db) = parabolic_peak(&curve);
    Ok(SweepResult {
        curve,
        peak_db,
        peak_gamma_perp_tau,
    })
}

/// Best squeezing over η at a fixed optical density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPeak {
    pub rho: f64,
    pub peak_db: f64,
    pub eta_star: f64,
}

/// Sweeps `ξ` over `xi_grid` (i.e. `η = 9ξ/ρ`) at optical density `rho`.
pub fn peak_over_rho(base: &ProtocolSchedule, rho: f64, xi_grid: &[f64]) -> Result<DensityPeak> {
    let at_rho = ProtocolSchedule {
        rho: Some(rho),
        ..base.clone()
    };
    let etas: Vec<f64> = xi_grid.iter().map(|xi| 9.0 * xi / rho).collect();
    let sweep = sweep_eta(&at_rho, &etas)?;
    Ok(DensityPeak {
        rho,
        peak_db: sweep.peak_db,
        eta_star: sweep.peak_gamma_perp_tau * 9.0 / 4.0,
    })
}
