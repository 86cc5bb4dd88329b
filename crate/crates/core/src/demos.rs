//! Packaged configurations and the demo driver.

use serde::Serialize;
use std::path::Path;

use crate::certificates::{phi0_lower_bound, CertificateReport, Phi0Bound};
use crate::config::{InitialSpec, RunConfig};
use crate::error::{Error, Result};
use crate::io::{self, write_json, CERTIFICATE_FILE, LEDGER_FILE};
use crate::monitor::{build_ledger, LedgerSummary};
use crate::solver::{Diagnostics, RunResult, RunStatus};

pub const DEMOS: &[(&str, &str)] = &[
    ("jl_n3_blowup", include_str!("../configs/jl_n3_blowup.json")),
    ("pe_n3_blowup", include_str!("../configs/pe_n3_blowup.json")),
    ("jl_subcritical", include_str!("../configs/jl_subcritical.json")),
    ("homogeneous_logistic", include_str!("../configs/homogeneous_logistic.json")),
];

pub fn demo_names() -> Vec<&'static str> {
    DEMOS.iter().map(|d| d.0).collect()
}

pub fn demo_config(name: &str) -> Result<RunConfig> {
    let (_, text) = DEMOS
        .iter()
        .find(|d| d.0 == name)
        .ok_or_else(|| Error::Config(format!("unknown demo '{name}'; available: {}", demo_names().join(", "))))?;
    RunConfig::from_json(text)
}

/// Solution of `u' = λu − μu^{1+κ}` for constants `λ > 0`, `μ ≥ 0`, `κ > 0`,
/// through `y = u^{−κ}`.
pub fn logistic_exact(u0: f64, lambda: f64, mu: f64, kappa: f64, t: f64) -> f64 {
    let y0 = u0.powf(-kappa);
    let ratio = mu / lambda;
    let y = ratio + (y0 - ratio) * (-kappa * lambda * t).exp();
    y.powf(-1.0 / kappa)
}

/// Certificate evaluation attached to a demo. Failures are reported, not raised.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateOutcome {
    pub report: Option<CertificateReport>,
    /// Initial moment bound at the certificate's `s0`.
    pub initial_moment: Option<Phi0Bound>,
    /// The same bound at `s0 = r1^n/(1−η)` for a configured concentrated
    /// datum, i.e. the largest `s0` whose inner ball holds the datum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub datum_moment: Option<Phi0Bound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn evaluate_certificate(cfg: &RunConfig, result: &RunResult) -> CertificateOutcome {
    let eta = cfg.certificate.eta;
    let datum_moment = match (&cfg.initial, result.snapshots.first()) {
        (InitialSpec::Concentrated { r1: Some(r1), .. }, Some(u0)) => {
            let s0 = r1.powi(cfg.model.n as i32) / (1.0 - eta);
            let gamma = cfg.moments.map_or(0.5, |m| m.gamma);
            phi0_lower_bound(u0, cfg.model.m1, s0, gamma, eta).ok()
        }
        _ => None,
    };
    match cfg.certificate() {
        Ok(report) => {
            let initial_moment = match (report.s0, result.snapshots.first()) {
                (Some(s0), Some(u0)) if s0 < u0.grid.s_faces[u0.grid.cells()] => {
                    phi0_lower_bound(u0, cfg.model.m1, s0, report.gamma, eta).ok()
                }
                _ => None,
            };
            CertificateOutcome { report: Some(report), initial_moment, datum_moment, error: None }
        }
        Err(e) => CertificateOutcome { report: None, initial_moment: None, datum_moment, error: Some(e.to_string()) },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub name: String,
    pub status: RunStatus,
    pub diagnostics: Diagnostics,
    pub ledger: LedgerSummary,
    pub certificate: CertificateOutcome,
    /// Sup-norm distance to the scalar logistic solution, for constant data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logistic_error: Option<f64>,
}

fn logistic_error(cfg: &RunConfig, result: &RunResult) -> Option<f64> {
    let InitialSpec::Constant { value } = cfg.initial else { return None };
    let (lambda, mu) = (cfg.model.lambda.eval(0.0), cfg.model.mu.eval(0.0));
    let constant = |f: &crate::params::CoefficientFn| matches!(f, crate::params::CoefficientFn::Constant { .. });
    if !(constant(&cfg.model.lambda) && constant(&cfg.model.mu) && lambda > 0.0 && cfg.model.kappa > 0.0) {
        return None;
    }
    let err = result
        .snapshots
        .iter()
        .flat_map(|u| {
            let exact = logistic_exact(value, lambda, mu, cfg.model.kappa, u.t);
            u.values.iter().map(move |v| (v - exact).abs())
        })
        .fold(0.0, f64::max);
    Some(err)
}

/// Runs `cfg`, writes the run directory, ledger and certificate to `out`.
pub fn run_config(cfg: &RunConfig, out: &Path) -> Result<DemoReport> {
    let result = io::simulate(cfg)?;
    io::write_run(out, cfg, &result)?;
    let ledger = build_ledger(&cfg.model, &result.series, &result.snapshots, result.moments.as_ref(), &cfg.monitor)?;
    io::write_ledger(&out.join(LEDGER_FILE), &ledger)?;
    let certificate = evaluate_certificate(cfg, &result);
    write_json(&out.join(CERTIFICATE_FILE), &certificate)?;
    let report = DemoReport {
        name: cfg.name.clone().unwrap_or_else(|| "run".into()),
        status: result.status,
        diagnostics: result.diagnostics,
        ledger: ledger.summary(),
        certificate,
        logistic_error: logistic_error(cfg, &result),
    };
    write_json(&out.join("demo.json"), &report)?;
    Ok(report)
}

pub fn run_demo(name: &str, out: &Path) -> Result<DemoReport> {
    run_config(&demo_config(name)?, out)
}
