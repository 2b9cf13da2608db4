use serde_json::json;
use squeezekit_core::analysis::{
    fit_scaling, log_spaced, peak_over_rho, sweep_eta, LogBase, ScalingModel,
};
use squeezekit_core::oracle::compare_faraday;
use squeezekit_core::{
    run_protocol, zeta_dp, zeta_pm, zeta_qe, zeta_qnd, Error, ImperfectionSettings, ProtocolKind,
    ProtocolSchedule,
};

use crate::config::{ConfigError, Protocol, RunConfig};
use crate::output::{to_value, Cell, Table};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type Outcome = Result<Table, Failure>;

const ALL: [Protocol; 4] = [Protocol::Qnd, Protocol::Dp, Protocol::Qe, Protocol::Pm];

fn name(p: Protocol) -> &'static str {
    ProtocolKind::from(p).name()
}

fn imperfections(cfg: &RunConfig) -> Result<ImperfectionSettings, Failure> {
    Ok(ImperfectionSettings::new(cfg.loss, cfg.det_noise)?
        .with_feedback(cfg.feedback.into())
        .with_detection_loss(cfg.det_loss)?)
}

fn finish(cfg: &RunConfig, sched: ProtocolSchedule) -> Result<ProtocolSchedule, Failure> {
    let sched = sched
        .with_segments(cfg.n)
        .with_rotation(cfg.rotation.into())
        .with_imperfections(imperfections(cfg)?);
    Ok(if cfg.ideal {
        sched.without_decay()
    } else {
        sched
    })
}

/// Schedule for a single run: `(rho, eta)`, `(rho, xi)` or a bare `xi`.
fn schedule(cfg: &RunConfig, kind: ProtocolKind) -> Result<ProtocolSchedule, Failure> {
    let sched = match (cfg.rho, cfg.eta, cfg.xi) {
        (Some(rho), Some(eta), None) => ProtocolSchedule::from_density(kind, rho, eta)?,
        (Some(rho), None, Some(xi)) => ProtocolSchedule::from_density(kind, rho, 9.0 * xi / rho)?,
        (None, eta, Some(xi)) => {
            let mut s = ProtocolSchedule::ideal(kind, xi);
            if let Some(eta) = eta {
                s.rates = squeezekit_core::DecayRates::from_eta(eta)?;
                if kind == ProtocolKind::Qnd {
                    s.rates = s.rates.scaled(0.5);
                }
                s.eta_total = eta;
            }
            s
        }
        _ => {
            return Err(Failure::Config(
                "invalid `xi`: run needs --xi, or --rho with one of --eta or --xi".into(),
            ))
        }
    };
    finish(cfg, sched)
}

fn base_at_density(
    cfg: &RunConfig,
    kind: ProtocolKind,
    rho: f64,
) -> Result<ProtocolSchedule, Failure> {
    finish(cfg, ProtocolSchedule::from_density(kind, rho, 0.0)?)
}

fn protocol(cfg: &RunConfig) -> Result<Protocol, Failure> {
    cfg.protocol
        .ok_or_else(|| Failure::Config("invalid `protocol`: required for this command".into()))
}

fn require_rho(cfg: &RunConfig) -> Result<f64, Failure> {
    cfg.rho
        .ok_or_else(|| Failure::Config("invalid `rho`: required for this command".into()))
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let p = protocol(cfg)?;
    let rec = run_protocol(&schedule(cfg, p.into())?)?;
    Ok(Table {
        header: &["zeta", "zeta_db", "theta_min", "contrast", "min_variance"],
        rows: vec![vec![
            Cell::Num(rec.zeta),
            Cell::Num(rec.zeta_db),
            Cell::Num(rec.theta_min),
            Cell::Num(rec.contrast),
            Cell::Num(rec.min_variance),
        ]],
        footer: Vec::new(),
        payload: json!({ "record": to_value(&rec) }),
    })
}

pub fn sweep(cfg: &RunConfig) -> Outcome {
    let rho = require_rho(cfg)?;
    let grid = log_spaced(cfg.eta_min, cfg.eta_max, cfg.eta_points)?;
    let protocols = cfg.protocol.map_or(ALL.to_vec(), |p| vec![p]);
    let mut rows = Vec::new();
    let mut footer = Vec::new();
    let mut curves = Vec::new();
    for p in protocols {
        let result = sweep_eta(&base_at_density(cfg, p.into(), rho)?, &grid)?;
        for &(g, db) in &result.curve {
            rows.push(vec![Cell::Text(name(p)), Cell::Num(g), Cell::Num(db)]);
        }
        footer.push(format!(
            "peak,{},{},{}",
            name(p),
            crate::output::fmt_g(result.peak_gamma_perp_tau),
            crate::output::fmt_g(result.peak_db)
        ));
        curves.push(json!({
            "protocol": name(p),
            "rows": result.curve.iter()
                .map(|&(g, db)| json!({ "gamma_perp_tau": g, "zeta_db": db }))
                .collect::<Vec<_>>(),
            "peak": { "gamma_perp_tau": result.peak_gamma_perp_tau, "zeta_db": result.peak_db },
        }));
    }
    Ok(Table {
        header: &["protocol", "gamma_perp_tau", "zeta_db"],
        rows,
        footer,
        payload: json!({ "curves": curves }),
    })
}

/// ξ range scanned per density: the phase-matched run stays below ξ ≈ 22,
/// past which the covariance loses too many digits.
fn scaling_xi_grid(cfg: &RunConfig, p: Protocol) -> Result<Vec<f64>, Failure> {
    let (lo, hi) = match p {
        Protocol::Pm => (3.0, 22.0),
        _ => (0.3, 3000.0),
    };
    Ok(log_spaced(
        cfg.xi_min.unwrap_or(lo),
        cfg.xi_max.unwrap_or(hi),
        cfg.xi_points,
    )?)
}

pub fn scaling(cfg: &RunConfig) -> Outcome {
    let p = cfg.protocol.unwrap_or(Protocol::Pm);
    let grid = scaling_xi_grid(cfg, p)?;
    let base = base_at_density(cfg, p.into(), cfg.rho_list[0])?;
    let peaks = cfg
        .rho_list
        .iter()
        .map(|&rho| peak_over_rho(&base, rho, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let points: Vec<(f64, f64)> = peaks
        .iter()
        .map(|d| (d.rho, 10f64.powf(-d.peak_db / 10.0)))
        .collect();
    let fits = if points.len() >= 3 {
        json!({
            "ln": to_value(&fit_scaling(&points, ScalingModel::LogOverRho(LogBase::Natural))?),
            "log10": to_value(&fit_scaling(&points, ScalingModel::LogOverRho(LogBase::Ten))?),
            "power_law": to_value(&fit_scaling(&points, ScalingModel::PowerLaw)?),
        })
    } else {
        json!(null)
    };
    let rows = peaks
        .iter()
        .map(|d| {
            vec![
                Cell::Num(d.rho),
                Cell::Num(d.peak_db),
                Cell::Num(d.eta_star),
            ]
        })
        .collect();
    Ok(Table {
        header: &["rho", "peak_zeta_db", "eta_star"],
        rows,
        footer: vec![format!("fit: {}", serde_json::to_string(&fits).unwrap())],
        payload: json!({ "protocol": name(p), "peaks": to_value(&peaks), "fit": fits }),
    })
}

fn xi_values(cfg: &RunConfig, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>, Failure> {
    if let Some(xi) = cfg.xi {
        return Ok(vec![xi]);
    }
    if let Some(list) = &cfg.xi_list {
        return Ok(list.clone());
    }
    match (cfg.xi_min, cfg.xi_max) {
        (Some(lo), Some(hi)) => Ok(log_spaced(lo, hi, cfg.xi_points)?),
        (None, None) => Ok(default()),
        _ => Err(Failure::Config(
            "invalid `xi_min`: --xi-min and --xi-max go together".into(),
        )),
    }
}

pub fn formulas(cfg: &RunConfig) -> Outcome {
    let xis = xi_values(cfg, || log_spaced(0.01, 100.0, 41).unwrap())?;
    let table: Vec<[f64; 5]> = xis
        .iter()
        .map(|&xi| [xi, zeta_qnd(xi), zeta_dp(xi), zeta_qe(xi), zeta_pm(xi)])
        .collect();
    Ok(Table {
        header: &["xi", "zeta_qnd", "zeta_dp", "zeta_qe", "zeta_pm"],
        rows: table
            .iter()
            .map(|r| r.iter().map(|&x| Cell::Num(x)).collect())
            .collect(),
        footer: Vec::new(),
        payload: json!({
            "rows": table.iter().map(|r| json!({
                "xi": r[0], "zeta_qnd": r[1], "zeta_dp": r[2], "zeta_qe": r[3], "zeta_pm": r[4],
            })).collect::<Vec<_>>(),
        }),
    })
}

pub fn oracle(cfg: &RunConfig) -> Outcome {
    let xis = xi_values(cfg, || vec![0.25, 0.5, 1.0])?;
    let mut results = Vec::new();
    for &size in &cfg.sizes {
        for &xi in &xis {
            results.push(compare_faraday(size, size, xi)?);
        }
    }
    Ok(Table {
        header: &["N_A", "N_L", "xi", "exact_var", "hpa_var", "rel_err"],
        rows: results
            .iter()
            .map(|c| {
                vec![
                    Cell::Int(c.n_atoms),
                    Cell::Int(c.n_photons),
                    Cell::Num(c.xi),
                    Cell::Num(c.exact_var),
                    Cell::Num(c.hpa_var),
                    Cell::Num(c.rel_err),
                ]
            })
            .collect(),
        footer: Vec::new(),
        payload: json!({ "rows": to_value(&results) }),
    })
}
