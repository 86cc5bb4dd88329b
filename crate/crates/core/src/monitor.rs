//! Inequality ledger along a trajectory. Every check is a pure function of
//! the stored series, the snapshots and the configuration; a failed entry
//! never aborts anything.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::certificates::{i1_bound, i3_bound_jl, i4_bound, jl_envelope_constant};
use crate::elliptic::{flux_max, pe_flux_envelope, solve_pe_signal};
use crate::error::Result;
use crate::functionals::{i2_constant, phi_psi_constant, w_psi_worst, MomentConfig};
use crate::grid::RadialField;
use crate::params::{ModelParams, Variant};
use crate::solver::{MomentSeries, SeriesRow};

pub const MASS_GROWTH: &str = "mass_growth";
pub const POINTWISE_JL: &str = "pointwise_jl";
pub const POINTWISE_PE: &str = "pointwise_pe";
pub const MONOTONE: &str = "monotone";
pub const ODI: &str = "odi";
pub const I3_REMARK: &str = "i3_remark_bound";
pub const W_PSI: &str = "w_psi_bound";
pub const I4_BOUND: &str = "i4_bound";
pub const I1_BOUND: &str = "i1_bound";
pub const PHI_PSI: &str = "phi_psi_bound";
pub const I2_BOUND: &str = "i2_bound";
pub const PE_FLUX: &str = "pe_flux_bound";
pub const I3_PE_SHAPE: &str = "i3_pe_shape";

pub const LEDGER_HEADER: &str = "t,check_id,lhs,rhs,margin,pass,applicable,note";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub identity: f64,
    pub mass: f64,
    pub pointwise: f64,
    /// Relative to `sup u`.
    pub monotone: f64,
    pub odi: f64,
    /// Added to `odi` per unit of the cell width at `r₀ = s0^{1/n}`. The
    /// derivative/quadrature gap is first order in that width.
    pub odi_per_dr: f64,
    pub eps_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-8, mass: 1e-6, pointwise: 1e-6, monotone: 1e-8, odi: 1e-2, odi_per_dr: 32.0, eps_abs: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonitorConfig {
    pub tolerances: Tolerances,
    /// Samples with `sup u ≥ factor · sup u(0)` count as under-resolved.
    pub resolution_factor: f64,
    /// Envelope exponent for PE; `p₀`-style bounds need it supplied.
    pub pe_p: Option<f64>,
    /// Envelope constant for PE; the `t = 0` envelope when absent.
    pub pe_k: Option<f64>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig { tolerances: Tolerances::default(), resolution_factor: 100.0, pe_p: None, pe_k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub t: f64,
    pub check_id: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Nonnegative when the inequality holds exactly.
    pub margin: f64,
    pub pass: bool,
    pub applicable: bool,
    pub resolved: bool,
    pub note: String,
}

impl LedgerEntry {
    /// `pass ⇔ margin ≥ −tol · max(scale, ε)`.
    fn judged(t: f64, check_id: &'static str, lhs: f64, rhs: f64, margin: f64, tol: f64, scale: f64) -> Self {
        LedgerEntry {
            t,
            check_id,
            lhs,
            rhs,
            margin,
            pass: margin >= -tol * scale,
            applicable: true,
            resolved: true,
            note: String::new(),
        }
    }

    /// `lhs ≤ rhs` with scale `max(|lhs|, |rhs|, ε)`.
    fn upper(t: f64, id: &'static str, lhs: f64, rhs: f64, tol: f64, eps: f64) -> Self {
        Self::judged(t, id, lhs, rhs, rhs - lhs, tol, lhs.abs().max(rhs.abs()).max(eps))
    }

    /// `lhs ≥ rhs` with scale `max(|lhs|, |rhs|, ε)`.
    fn lower(t: f64, id: &'static str, lhs: f64, rhs: f64, tol: f64, eps: f64) -> Self {
        Self::judged(t, id, lhs, rhs, lhs - rhs, tol, lhs.abs().max(rhs.abs()).max(eps))
    }

    fn not_applicable(t: f64, check_id: &'static str, note: impl Into<String>) -> Self {
        LedgerEntry {
            t,
            check_id,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            pass: true,
            applicable: false,
            resolved: true,
            note: note.into(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn counts_as_failure(&self) -> bool {
        self.applicable && !self.pass
    }

    pub fn csv_line(&self) -> String {
        let note = if self.resolved || self.note.contains("under-resolved") {
            self.note.clone()
        } else if self.note.is_empty() {
            "under-resolved".to_string()
        } else {
            format!("under-resolved; {}", self.note)
        };
        format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{},{},{}",
            self.t,
            self.check_id,
            self.lhs,
            self.rhs,
            self.margin,
            self.pass,
            self.applicable,
            note.replace(',', ";")
        )
    }
}

/// `mass(t) ≤ M0 e^{λ₁t}` with `M0` the mass of the first row.
pub fn check_mass_growth(series: &MomentSeries, params: &ModelParams, tol: &Tolerances) -> Vec<LedgerEntry> {
    let Some(first) = series.rows.first() else { return Vec::new() };
    let m0 = first.mass;
    let lambda1 = params.lambda1();
    series
        .rows
        .iter()
        .map(|r| {
            let rhs = m0 * (lambda1 * (r.t - first.t)).exp();
            LedgerEntry::upper(r.t, MASS_GROWTH, r.mass, rhs, tol.mass, tol.eps_abs)
        })
        .collect()
}

/// Hypotheses for the JL pointwise and monotonicity checks.
pub fn jl_hypotheses(params: &ModelParams, u0: &RadialField, tol: &Tolerances) -> std::result::Result<(), String> {
    if params.variant != Variant::JL {
        return Err("JL only".into());
    }
    if !params.monotone_coefficients() {
        return Err("needs λ nonincreasing and μ nondecreasing".into());
    }
    if monotone_defect(u0) > tol.monotone * u0.sup().max(tol.eps_abs) {
        return Err("initial datum is not radially nonincreasing".into());
    }
    Ok(())
}

fn monotone_defect(u: &RadialField) -> f64 {
    u.values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Worst cell of `u_i ≤ M0 n e^{λ₁t}/ω_{n−1} · r_i^{−n}`, judged relative to the bound.
pub fn check_pointwise_jl(u: &RadialField, params: &ModelParams, m0: f64, t0: f64, tol: &Tolerances) -> LedgerEntry {
    let n = params.n as i32;
    let k = m0 * params.n as f64 * (params.lambda1() * (u.t - t0)).exp() / params.omega();
    let mut worst = (f64::INFINITY, 0.0, 0.0, 0.0);
    for (&v, &r) in u.values.iter().zip(&u.grid.centers) {
        let bound = k * r.powi(-n);
        let rel = (bound - v) / bound;
        if rel < worst.0 {
            worst = (rel, v, bound, r);
        }
    }
    let (_, lhs, rhs, r) = worst;
    LedgerEntry::judged(u.t, POINTWISE_JL, lhs, rhs, rhs - lhs, tol.pointwise, rhs.max(tol.eps_abs))
        .with_note(format!("worst cell r = {r:.6e}"))
}

/// `max_i u_i r_i^p ≤ K`; `lhs` is the envelope constant at this time.
pub fn check_pointwise_pe(u: &RadialField, k: f64, p: f64, tol: &Tolerances) -> LedgerEntry {
    let env = envelope_constant(u, p);
    LedgerEntry::upper(u.t, POINTWISE_PE, env, k, tol.pointwise, tol.eps_abs).with_note(format!("p = {p}"))
}

/// `max_i u_i r_i^p`.
pub fn envelope_constant(u: &RadialField, p: f64) -> f64 {
    u.values
        .iter()
        .zip(&u.grid.centers)
        .map(|(v, r)| v * r.powf(p))
        .fold(0.0, f64::max)
}

/// `−max_i (u_{i+1} − u_i) ≥ −tol · sup u`.
pub fn check_monotone(u: &RadialField, tol: &Tolerances) -> LedgerEntry {
    let rise = monotone_defect(u);
    LedgerEntry::judged(u.t, MONOTONE, rise, 0.0, -rise, tol.monotone, u.sup().max(tol.eps_abs))
}

fn moment_rows(series: &MomentSeries) -> Vec<&SeriesRow> {
    series.rows.iter().filter(|r| r.moments.is_some()).collect()
}

/// Central-difference `φ'` against `I₁ + I₂ + I₃ + I₄` at interior samples,
/// with scale `max(|φ'|, Σ|I_k|, ε)`.
/// `dr0` is the width of the cell just inside `r₀`; the tolerance is
/// `odi + odi_per_dr · dr0`.
pub fn check_odi(series: &MomentSeries, tol: &Tolerances, dr0: f64) -> Vec<LedgerEntry> {
    let rel = tol.odi + tol.odi_per_dr * dr0;
    let rows = moment_rows(series);
    if rows.len() < 3 {
        let t = rows.first().map_or(0.0, |r| r.t);
        return vec![LedgerEntry::not_applicable(t, ODI, "fewer than three moment samples")];
    }
    rows.windows(3)
        .filter(|w| w[2].t > w[0].t)
        .map(|w| {
            let (a, b, c) = (w[0].moments.unwrap(), w[1].moments.unwrap(), w[2].moments.unwrap());
            let dphi = (c.phi - a.phi) / (w[2].t - w[0].t);
            let sum = b.i.sum();
            let scale = dphi.abs().max(b.i.abs_sum()).max(tol.eps_abs);
            LedgerEntry::judged(w[1].t, ODI, dphi, sum, dphi - sum, rel, scale)
        })
        .collect()
}

/// Moment-level bounds at one sample: `φ`/`ψ`, `I₂`, `I₁`, `I₄`, and the
/// JL form of `I₃` or the PE shape note.
#[allow(clippy::too_many_arguments)]
fn sample_bounds(
    row: &SeriesRow,
    u: &RadialField,
    cfg: &MomentConfig,
    params: &ModelParams,
    m0: f64,
    t0: f64,
    envelope: Option<(f64, f64)>,
    tol: &Tolerances,
) -> Result<Vec<LedgerEntry>> {
    let Some(s) = row.moments else { return Ok(Vec::new()) };
    let (t, s0, g) = (row.t, cfg.s0, cfg.gamma);
    let (eps, id_tol) = (tol.eps_abs, tol.identity);
    let root = s.psi.max(0.0).sqrt();
    let mut out = Vec::new();

    let w = u.to_mass_function();
    out.push(match w_psi_worst(&w, cfg)? {
        Some((sw, lhs, rhs)) => LedgerEntry::upper(t, W_PSI, lhs, rhs, id_tol, eps).with_note(format!("s = {sw:.6e}")),
        None => LedgerEntry::not_applicable(t, W_PSI, "no face inside (0, s0)"),
    });
    let bound = phi_psi_constant(g) * s0.powf((3.0 - g) / 2.0) * root;
    out.push(LedgerEntry::upper(t, PHI_PSI, s.phi, bound, id_tol, eps));
    let bound = i2_constant(params.n, g) * s0.powf(g - 3.0) * s.phi * s.phi;
    out.push(LedgerEntry::lower(t, I2_BOUND, s.i.i2, bound, id_tol, eps));

    match envelope {
        Some((p, k)) => {
            let note = format!("p = {p}, K = {k:.6e}");
            out.push(match i1_bound(params.n, params.m, p, k, g) {
                Ok((branch, b)) => LedgerEntry::lower(t, I1_BOUND, s.i.i1, b.value(s0, s.psi), id_tol, eps)
                    .with_note(format!("{branch}; {note}")),
                Err(e) => LedgerEntry::not_applicable(t, I1_BOUND, e.to_string()),
            });
            out.push(match i4_bound(params, p, k, g) {
                Ok(b) => LedgerEntry::lower(t, I4_BOUND, s.i.i4, b.value(s0, s.psi), id_tol, eps).with_note(note),
                Err(e) => LedgerEntry::not_applicable(t, I4_BOUND, e.to_string()),
            });
        }
        None => {
            out.push(LedgerEntry::not_applicable(t, I1_BOUND, "no pointwise envelope"));
            out.push(LedgerEntry::not_applicable(t, I4_BOUND, "no pointwise envelope"));
        }
    }

    match params.variant {
        Variant::JL => {
            let b = i3_bound_jl(params, m0, t - t0, g);
            out.push(LedgerEntry::lower(t, I3_REMARK, s.i.i3, b.value(s0, s.psi), id_tol, eps));
        }
        Variant::PE => {
            let shape = s0.powf((3.0 - g) / 2.0) * root;
            let mut e = LedgerEntry::not_applicable(t, I3_PE_SHAPE, "constant not explicit; rhs is s0^((3-γ)/2)·√ψ");
            e.lhs = s.i.i3;
            e.rhs = shape;
            out.push(e);
            let signal = solve_pe_signal(u)?;
            let lhs = flux_max(&u.grid, &signal.vr);
            let rhs = pe_flux_envelope(m0, params.lambda1(), t - t0, params.omega());
            out.push(LedgerEntry::upper(t, PE_FLUX, lhs, rhs, id_tol, eps));
        }
    }
    Ok(out)
}

/// Moment-level bounds at every sample that carries moments. `snapshots`
/// must align with `series.rows`.
pub fn check_lemma_bounds(
    series: &MomentSeries,
    snapshots: &[RadialField],
    cfg: &MomentConfig,
    params: &ModelParams,
    mon: &MonitorConfig,
) -> Result<Vec<LedgerEntry>> {
    let Some(first) = series.rows.first() else { return Ok(Vec::new()) };
    let (m0, t0) = (first.mass, first.t);
    let pe_k = match (mon.pe_p, mon.pe_k) {
        (Some(p), Some(k)) => Some((p, k)),
        (Some(p), None) => snapshots.first().map(|u| (p, envelope_constant(u, p))),
        _ => None,
    };
    let per: Vec<Result<Vec<LedgerEntry>>> = series
        .rows
        .par_iter()
        .zip(snapshots.par_iter())
        .map(|(row, u)| {
            let envelope = match params.variant {
                Variant::JL => {
                    let scaled = ModelParams { m0, ..params.clone() };
                    Some((params.n as f64, jl_envelope_constant(&scaled, row.t - t0)))
                }
                Variant::PE => pe_k,
            };
            sample_bounds(row, u, cfg, params, m0, t0, envelope, &mon.tolerances)
        })
        .collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub checked: usize,
    pub failed: usize,
    pub failed_resolved: usize,
    pub not_applicable: usize,
    /// Smallest raw margin among applicable entries.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerSummary {
    pub entries: usize,
    pub failed: usize,
    pub failed_resolved: usize,
    /// No applicable failure in the resolved regime.
    pub full_pass: bool,
    /// First time at which `sup u` crossed the resolution threshold.
    pub resolved_until: Option<f64>,
    pub by_check: BTreeMap<String, CheckSummary>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
    pub resolved_until: Option<f64>,
}

impl Ledger {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(LEDGER_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&e.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a LedgerEntry> + 'a {
        self.entries.iter().filter(move |e| e.check_id == id)
    }

    pub fn summary(&self) -> LedgerSummary {
        let mut by_check: BTreeMap<String, CheckSummary> = BTreeMap::new();
        for e in &self.entries {
            let s = by_check
                .entry(e.check_id.to_string())
                .or_insert(CheckSummary { worst_margin: f64::INFINITY, ..Default::default() });
            if !e.applicable {
                s.not_applicable += 1;
                continue;
            }
            s.checked += 1;
            s.worst_margin = s.worst_margin.min(e.margin);
            if !e.pass {
                s.failed += 1;
                if e.resolved {
                    s.failed_resolved += 1;
                }
            }
        }
        let failed = by_check.values().map(|s| s.failed).sum();
        let failed_resolved = by_check.values().map(|s| s.failed_resolved).sum();
        LedgerSummary {
            entries: self.entries.len(),
            failed,
            failed_resolved,
            full_pass: failed_resolved == 0,
            resolved_until: self.resolved_until,
            by_check,
        }
    }
}

/// Runs every check on a stored trajectory. `snapshots[k]` is the field at
/// `series.rows[k].t`.
pub fn build_ledger(
    params: &ModelParams,
    series: &MomentSeries,
    snapshots: &[RadialField],
    moments: Option<&MomentConfig>,
    mon: &MonitorConfig,
) -> Result<Ledger> {
    if series.rows.len() != snapshots.len() {
        return Err(crate::error::Error::Config(format!(
            "series has {} rows but {} snapshots were given",
            series.rows.len(),
            snapshots.len()
        )));
    }
    let tol = &mon.tolerances;
    let mut entries = check_mass_growth(series, params, tol);

    if let Some(u0) = snapshots.first() {
        let (m0, t0) = (series.rows[0].mass, series.rows[0].t);
        match params.variant {
            Variant::JL => match jl_hypotheses(params, u0, tol) {
                Ok(()) => {
                    let per: Vec<[LedgerEntry; 2]> = snapshots
                        .par_iter()
                        .map(|u| [check_pointwise_jl(u, params, m0, t0, tol), check_monotone(u, tol)])
                        .collect();
                    entries.extend(per.into_iter().flatten());
                }
                Err(why) => {
                    for u in snapshots {
                        entries.push(LedgerEntry::not_applicable(u.t, POINTWISE_JL, why.clone()));
                        entries.push(LedgerEntry::not_applicable(u.t, MONOTONE, why.clone()));
                    }
                }
            },
            Variant::PE => match mon.pe_p {
                Some(p) => {
                    let k = mon.pe_k.unwrap_or_else(|| envelope_constant(u0, p));
                    entries.extend(snapshots.iter().map(|u| check_pointwise_pe(u, k, p, tol)));
                }
                None => {
                    for u in snapshots {
                        entries.push(LedgerEntry::not_applicable(u.t, POINTWISE_PE, "no envelope exponent p"));
                    }
                }
            },
        }
    }

    if let Some(cfg) = moments {
        let dr0 = snapshots.first().map_or(0.0, |u| {
            let g = &u.grid;
            let j = g.s_faces.partition_point(|&s| s < cfg.s0 * (1.0 - 1e-12)).clamp(1, g.cells());
            g.width(j - 1)
        });
        entries.extend(check_odi(series, tol, dr0));
        entries.extend(check_lemma_bounds(series, snapshots, cfg, params, mon)?);
    }

    let sup0 = series.rows.first().map_or(0.0, |r| r.sup_u);
    let threshold = mon.resolution_factor * sup0;
    let resolved_until = series.rows.iter().find(|r| r.sup_u >= threshold).map(|r| r.t);
    if let Some(limit) = resolved_until {
        for e in &mut entries {
            e.resolved = e.t < limit;
        }
    }
    entries.sort_by(|a, b| a.t.total_cmp(&b.t).then_with(|| a.check_id.cmp(b.check_id)));
    Ok(Ledger { entries, resolved_until })
}
