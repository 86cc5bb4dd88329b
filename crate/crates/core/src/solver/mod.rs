//! Conservative finite-volume integration of the radial `u`-equation
//!
//! `u_t = r^{1−n}(r^{n−1}((u+1)^{m−1} u_r − u v_r))_r + λ(r)u − μ(r)u^{1+κ}`
//!
//! for both signal variants, with adaptive steps, blow-up detection and
//! moment sampling at output times.

pub mod wform;

use log::{debug, info};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::elliptic::{center_gap, mean_from_w, solve_pe, vr_jl_values};
use crate::error::{domain, Error, Result};
use crate::functionals::{self, MomentConfig, MomentSample, Signal};
use crate::grid::{accumulate, mass, MassFunction, RadialField, RadialGrid};
use crate::linalg::solve_tridiagonal;
use crate::params::{ModelParams, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExplicitEuler,
    Rk2,
    /// Linearly implicit diffusion (lagged diffusivity), explicit advection
    /// and reaction.
    Imex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceAverage {
    Arithmetic,
    Harmonic,
}

fn default_cfl() -> f64 {
    0.45
}
fn default_cfl_reaction() -> f64 {
    0.1
}
fn default_dt_min() -> f64 {
    1e-12
}
fn default_dt_max() -> f64 {
    1e-2
}
fn default_u_cap() -> f64 {
    1e6
}
fn default_clip_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStepper {
    pub scheme: Scheme,
    /// Fraction of the per-cell diffusive outflow limit.
    #[serde(default = "default_cfl")]
    pub cfl_diffusion: f64,
    /// Fraction of the per-cell advective outflow limit.
    #[serde(default = "default_cfl")]
    pub cfl_advection: f64,
    /// Fraction of the per-cell damping limit `1/(μ u^κ)`.
    #[serde(default = "default_cfl_reaction")]
    pub cfl_reaction: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_u_cap")]
    pub u_cap: f64,
    #[serde(default = "default_face_average")]
    pub face_average: FaceAverage,
    /// Minmod reconstruction of the upwinded density.
    #[serde(default)]
    pub limiter: bool,
    /// Rejection threshold for clipped mass, relative to current mass.
    #[serde(default = "default_clip_tolerance")]
    pub clip_tolerance: f64,
}

fn default_face_average() -> FaceAverage {
    FaceAverage::Arithmetic
}

impl TimeStepper {
    pub fn new(scheme: Scheme) -> Self {
        TimeStepper {
            scheme,
            cfl_diffusion: default_cfl(),
            cfl_advection: default_cfl(),
            cfl_reaction: default_cfl_reaction(),
            dt_min: default_dt_min(),
            dt_max: default_dt_max(),
            u_cap: default_u_cap(),
            face_average: FaceAverage::Arithmetic,
            limiter: false,
            clip_tolerance: default_clip_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("cfl_diffusion", self.cfl_diffusion),
            ("cfl_advection", self.cfl_advection),
            ("cfl_reaction", self.cfl_reaction),
        ] {
            if !(x > 0.0 && x <= 1.0) {
                return domain(format!("{name} must lie in (0, 1], got {x}"));
            }
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max) {
            return domain(format!("need 0 < dt_min < dt_max, got {} and {}", self.dt_min, self.dt_max));
        }
        if !(self.u_cap > 0.0) {
            return domain("u_cap must be positive");
        }
        Ok(())
    }
}

impl Default for TimeStepper {
    fn default() -> Self {
        TimeStepper::new(Scheme::Rk2)
    }
}

/// Per-grid evaluation context: coefficients sampled at cell centres.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub grid: Arc<RadialGrid>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub stepper: TimeStepper,
}

/// Explicit tendency and per-cell outflow rates (1/time).
#[derive(Debug, Clone)]
struct Tendency {
    du: Vec<f64>,
    rate_diffusion: Vec<f64>,
    rate_advection: Vec<f64>,
    rate_reaction: Vec<f64>,
}

/// Signal quantities for a state.
#[derive(Debug, Clone)]
pub struct SignalState {
    pub vr: Vec<f64>,
    pub mbar: f64,
    pub w: Vec<f64>,
    /// PE only.
    pub z: Option<Vec<f64>>,
}

impl Model {
    pub fn new(params: &ModelParams, grid: Arc<RadialGrid>, stepper: TimeStepper) -> Result<Self> {
        if grid.n != params.n {
            return domain(format!("grid dimension {} differs from n = {}", grid.n, params.n));
        }
        stepper.validate()?;
        let lambda = grid.centers.iter().map(|&r| params.lambda.eval(r)).collect();
        let mu = grid.centers.iter().map(|&r| params.mu.eval(r)).collect();
        Ok(Model { params: params.clone(), grid, lambda, mu, stepper })
    }

    pub fn signal(&self, u: &[f64]) -> Result<SignalState> {
        let w = accumulate(&self.grid, u);
        let mbar = mean_from_w(&self.grid, &w);
        match self.params.variant {
            Variant::JL => Ok(SignalState { vr: vr_jl_values(&self.grid, &w, mbar), mbar, w, z: None }),
            Variant::PE => {
                let pe = solve_pe(&self.grid, u)?;
                Ok(SignalState { vr: pe.vr, mbar, w, z: Some(pe.z) })
            }
        }
    }

    fn diffusivity(&self, u: f64) -> f64 {
        (u + 1.0).powf(self.params.m - 1.0)
    }

    fn face_diffusivity(&self, a: f64, b: f64) -> f64 {
        let (da, db) = (self.diffusivity(a), self.diffusivity(b));
        match self.stepper.face_average {
            FaceAverage::Arithmetic => 0.5 * (da + db),
            FaceAverage::Harmonic => 2.0 * da * db / (da + db),
        }
    }

    /// Upwinded density at interior face `j` for velocity sign `positive`.
    fn upwind(&self, u: &[f64], j: usize, positive: bool) -> f64 {
        let cells = u.len();
        let (c, inner, outer) = if positive {
            (j - 1, j.checked_sub(2), Some(j))
        } else {
            (j, Some(j - 1), (j + 1 < cells).then_some(j + 1))
        };
        if !self.stepper.limiter {
            return u[c];
        }
        let (Some(lo), Some(hi)) = (inner, outer) else {
            return u[c];
        };
        let (back, fwd) = if positive { (u[c] - u[lo], u[hi] - u[c]) } else { (u[c] - u[hi], u[lo] - u[c]) };
        let slope = if back * fwd <= 0.0 { 0.0 } else if back.abs() < fwd.abs() { back } else { fwd };
        u[c] + 0.5 * slope
    }

    fn tendency(&self, u: &[f64], signal: &SignalState, with_diffusion: bool) -> Tendency {
        let g = &*self.grid;
        let cells = g.cells();
        let mut du = vec![0.0; cells];
        let mut rate_diffusion = vec![0.0; cells];
        let mut rate_advection = vec![0.0; cells];
        let limiter_factor = if self.stepper.limiter { 1.5 } else { 1.0 };
        for j in 1..cells {
            let area = g.face_area[j];
            let mut flux = 0.0;
            if with_diffusion {
                let coeff = area * self.face_diffusivity(u[j - 1], u[j]) / center_gap(g, j);
                flux += coeff * (u[j] - u[j - 1]);
                rate_diffusion[j - 1] += coeff / g.reduced_volume[j - 1];
                rate_diffusion[j] += coeff / g.reduced_volume[j];
            }
            let v = signal.vr[j];
            if v != 0.0 {
                let up = self.upwind(u, j, v > 0.0);
                flux -= area * v * up;
                let donor = if v > 0.0 { j - 1 } else { j };
                rate_advection[donor] += limiter_factor * area * v.abs() / g.reduced_volume[donor];
            }
            du[j - 1] += flux / g.reduced_volume[j - 1];
            du[j] -= flux / g.reduced_volume[j];
        }
        let kappa = self.params.kappa;
        let mut rate_reaction = vec![0.0; cells];
        for i in 0..cells {
            let damp = self.mu[i] * u[i].powf(kappa);
            du[i] += self.lambda[i] * u[i] - damp * u[i];
            rate_reaction[i] = damp;
        }
        Tendency { du, rate_diffusion, rate_advection, rate_reaction }
    }

    /// Largest `dt` keeping every explicit sub-rate within its safety factor.
    fn stable_dt(&self, t: &Tendency) -> f64 {
        let s = &self.stepper;
        let explicit_diffusion = s.scheme != Scheme::Imex;
        let mut dt = f64::INFINITY;
        for i in 0..t.du.len() {
            if explicit_diffusion && t.rate_diffusion[i] > 0.0 {
                dt = dt.min(s.cfl_diffusion / t.rate_diffusion[i]);
            }
            if t.rate_advection[i] > 0.0 {
                dt = dt.min(s.cfl_advection / t.rate_advection[i]);
            }
            if t.rate_reaction[i] > 0.0 {
                dt = dt.min(s.cfl_reaction / t.rate_reaction[i]);
            }
        }
        dt
    }

    /// CFL-admissible step for the state `u`.
    pub fn stable_dt_for(&self, u: &[f64]) -> Result<f64> {
        let signal = self.signal(u)?;
        let tend = self.tendency(u, &signal, self.stepper.scheme != Scheme::Imex);
        Ok(self.stable_dt(&tend))
    }

    fn euler(&self, u: &[f64], dt: f64) -> Result<(Vec<f64>, bool)> {
        let signal = self.signal(u)?;
        let tend = self.tendency(u, &signal, true);
        let ok = dt <= self.stable_dt(&tend) * (1.0 + 1e-12);
        Ok((u.iter().zip(&tend.du).map(|(u, d)| u + dt * d).collect(), ok))
    }

    fn imex(&self, u: &[f64], dt: f64) -> Result<(Vec<f64>, bool)> {
        let g = &*self.grid;
        let cells = g.cells();
        let signal = self.signal(u)?;
        let tend = self.tendency(u, &signal, false);
        let ok = dt <= self.stable_dt(&tend) * (1.0 + 1e-12);
        let rhs: Vec<f64> = u.iter().zip(&tend.du).map(|(u, d)| u + dt * d).collect();
        let mut lower = vec![0.0; cells];
        let mut diag = vec![1.0; cells];
        let mut upper = vec![0.0; cells];
        for j in 1..cells {
            let coeff = dt * g.face_area[j] * self.face_diffusivity(u[j - 1], u[j]) / center_gap(g, j);
            let (vl, vr) = (g.reduced_volume[j - 1], g.reduced_volume[j]);
            diag[j - 1] += coeff / vl;
            upper[j - 1] = -coeff / vl;
            diag[j] += coeff / vr;
            lower[j] = -coeff / vr;
        }
        Ok((solve_tridiagonal(&lower, &diag, &upper, &rhs)?, ok))
    }

    /// One step of the configured scheme; returns the unclipped update and
    /// whether every stage respected the step limit.
    fn advance(&self, u: &[f64], dt: f64) -> Result<(Vec<f64>, bool)> {
        match self.stepper.scheme {
            Scheme::ExplicitEuler => self.euler(u, dt),
            Scheme::Imex => self.imex(u, dt),
            Scheme::Rk2 => {
                let (u1, ok1) = self.euler(u, dt)?;
                if !ok1 {
                    return Ok((u1, false));
                }
                let stage: Vec<f64> = u1.iter().map(|x| x.max(0.0)).collect();
                let (u2, ok2) = self.euler(&stage, dt)?;
                let out = u.iter().zip(&u2).map(|(a, b)| 0.5 * (a + b)).collect();
                Ok((out, ok2))
            }
        }
    }

    /// Clips negative values; returns the clipped mass.
    fn clip(&self, u: &mut [f64]) -> f64 {
        let mut clipped = 0.0;
        for (x, v) in u.iter_mut().zip(&self.grid.reduced_volume) {
            if *x < 0.0 {
                clipped -= *x * v;
                *x = 0.0;
            }
        }
        clipped * self.grid.omega
    }
}

/// Result of a single step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub field: RadialField,
    pub clipped_mass: f64,
    /// Every stage satisfied the step limit.
    pub within_cfl: bool,
}

/// Advances `u` by one step of length `dt`.
pub fn step_u(u: &RadialField, params: &ModelParams, stepper: &TimeStepper, dt: f64) -> Result<StepOutcome> {
    let model = Model::new(params, Arc::clone(&u.grid), *stepper)?;
    let (mut next, within_cfl) = model.advance(&u.values, dt)?;
    if let Some(i) = next.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t: u.t + dt, reason: format!("cell {i} became {}", next[i]) });
    }
    let clipped_mass = model.clip(&mut next);
    Ok(StepOutcome { field: RadialField::new(Arc::clone(&u.grid), next, u.t + dt)?, clipped_mass, within_cfl })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    ReachedT,
    BlowUpDetected { t: f64 },
    DtUnderflow { t: f64 },
}

impl RunStatus {
    pub fn terminal_time(&self) -> Option<f64> {
        match *self {
            RunStatus::ReachedT => None,
            RunStatus::BlowUpDetected { t } | RunStatus::DtUnderflow { t } => Some(t),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::ReachedT => "reached_t",
            RunStatus::BlowUpDetected { .. } => "blow_up_detected",
            RunStatus::DtUnderflow { .. } => "dt_underflow",
        }
    }
}

/// One row of `series.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub dt: f64,
    pub sup_u: f64,
    pub mass: f64,
    pub mbar: f64,
    pub moments: Option<MomentSample>,
    /// Cumulative clipped mass.
    pub clip_mass: f64,
}

pub const SERIES_HEADER: &str = "t,dt,sup_u,mass,Mbar,phi,psi,I1,I2,I3,I4,clip_mass";

impl SeriesRow {
    pub fn csv_line(&self) -> String {
        let f = |x: f64| format!("{x:.16e}");
        let (phi, psi, i) = match &self.moments {
            Some(m) => (f(m.phi), f(m.psi), [f(m.i.i1), f(m.i.i2), f(m.i.i3), f(m.i.i4)]),
            None => (String::new(), String::new(), Default::default()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            f(self.t),
            f(self.dt),
            f(self.sup_u),
            f(self.mass),
            f(self.mbar),
            phi,
            psi,
            i[0],
            i[1],
            i[2],
            i[3],
            f(self.clip_mass)
        )
    }

    pub fn parse_csv_line(line: &str, variant: Variant) -> Result<SeriesRow> {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 12 {
            return Err(Error::Config(format!("series row has {} columns, expected 12", cols.len())));
        }
        let num = |k: usize| -> Result<f64> {
            cols[k].parse().map_err(|_| Error::Config(format!("bad number '{}' in series", cols[k])))
        };
        let moments = if cols[5].is_empty() {
            None
        } else {
            Some(MomentSample {
                t: num(0)?,
                phi: num(5)?,
                psi: num(6)?,
                i: functionals::IComponents { i1: num(7)?, i2: num(8)?, i3: num(9)?, i4: num(10)? },
                variant,
            })
        };
        Ok(SeriesRow { t: num(0)?, dt: num(1)?, sup_u: num(2)?, mass: num(3)?, mbar: num(4)?, moments, clip_mass: num(11)? })
    }
}

/// Time series recorded at output times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub rows: Vec<SeriesRow>,
}

impl MomentSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SERIES_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, variant: Variant) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == SERIES_HEADER => {}
            _ => return Err(Error::Config("series.csv header mismatch".into())),
        }
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| SeriesRow::parse_csv_line(l, variant))
            .collect::<Result<_>>()?;
        Ok(MomentSeries { rows })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub clipped_mass: f64,
    pub min_dt: f64,
    pub max_sup_u: f64,
    pub final_t: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: RunStatus,
    pub final_field: RadialField,
    pub series: MomentSeries,
    /// Fields at every output time.
    pub snapshots: Vec<RadialField>,
    pub diagnostics: Diagnostics,
    /// Moment configuration with `s0` snapped to the grid.
    pub moments: Option<MomentConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    pub output_every: f64,
    pub moments: Option<MomentConfig>,
}

fn record(model: &Model, u: &RadialField, dt: f64, clip: f64, moments: Option<&MomentConfig>) -> Result<SeriesRow> {
    let signal = model.signal(&u.values)?;
    let sample = match moments {
        None => None,
        Some(cfg) => {
            let w = MassFunction { grid: Arc::clone(&u.grid), w: signal.w.clone(), t: u.t };
            let sig = match &signal.z {
                Some(z) => Signal::Accumulated(z),
                None => Signal::Mean(signal.mbar),
            };
            Some(functionals::sample(&w, cfg, &model.params, sig)?)
        }
    };
    Ok(SeriesRow {
        t: u.t,
        dt,
        sup_u: u.sup(),
        mass: mass(&u.grid, &u.values),
        mbar: signal.mbar,
        moments: sample,
        clip_mass: clip,
    })
}

/// Integrates from `u0` to `t_end` or until blow-up is detected.
pub fn run(params: &ModelParams, u0: &RadialField, stepper: &TimeStepper, opts: &RunOptions) -> Result<RunResult> {
    let model = Model::new(params, Arc::clone(&u0.grid), *stepper)?;
    if !(opts.t_end > 0.0 && opts.output_every > 0.0) {
        return domain("t_end and output_every must be positive");
    }
    let moments = match &opts.moments {
        Some(cfg) => Some(MomentConfig { s0: cfg.snap(&u0.grid)?.1, gamma: cfg.gamma }),
        None => None,
    };
    let outputs = (opts.t_end / opts.output_every - 1e-9).ceil().max(1.0) as usize;
    let output_time = |k: usize| if k >= outputs { opts.t_end } else { k as f64 * opts.output_every };

    let mut u = u0.values.clone();
    let mut t = u0.t;
    let mut field = RadialField::new(Arc::clone(&u0.grid), u.clone(), t)?;
    let mut series = MomentSeries::default();
    let mut snapshots = vec![field.clone()];
    series.rows.push(record(&model, &field, 0.0, 0.0, moments.as_ref())?);

    let mut diag = Diagnostics { min_dt: f64::INFINITY, max_sup_u: field.sup(), ..Default::default() };
    let mut dt_trial = stepper.dt_max;
    let mut next_output = 1;
    let mut last_dt = 0.0;
    let status = loop {
        if t >= opts.t_end {
            break RunStatus::ReachedT;
        }
        let target = output_time(next_output);
        let dt_cfl = model.stable_dt_for(&u)?;
        let dt = dt_trial.min(dt_cfl).min(target - t);
        if dt < stepper.dt_min && target - t > stepper.dt_min {
            info!("step {dt:.3e} below dt_min at t = {t}");
            break RunStatus::DtUnderflow { t };
        }
        let (mut next, within) = model.advance(&u, dt)?;
        if let Some(i) = next.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t: t + dt, reason: format!("cell {i} became {}", next[i]) });
        }
        let clipped = model.clip(&mut next);
        let current_mass = mass(&model.grid, &u);
        if !within || clipped > stepper.clip_tolerance * current_mass {
            diag.rejected_steps += 1;
            debug!("reject dt = {dt:.3e} at t = {t} (cfl ok: {within}, clipped {clipped:.3e})");
            dt_trial = 0.5 * dt;
            if dt_trial < stepper.dt_min {
                break RunStatus::DtUnderflow { t };
            }
            continue;
        }
        diag.accepted_steps += 1;
        diag.clipped_mass += clipped;
        diag.min_dt = diag.min_dt.min(dt);
        last_dt = dt;
        let hit_output = dt == target - t;
        t = if hit_output { target } else { t + dt };
        u = next;
        if dt >= dt_trial {
            dt_trial = (1.2 * dt_trial).min(stepper.dt_max);
        }
        let sup = u.iter().copied().fold(0.0, f64::max);
        diag.max_sup_u = diag.max_sup_u.max(sup);
        if hit_output || sup >= stepper.u_cap {
            field = RadialField::new(Arc::clone(&model.grid), u.clone(), t)?;
            series.rows.push(record(&model, &field, last_dt, diag.clipped_mass, moments.as_ref())?);
            snapshots.push(field.clone());
            if hit_output {
                next_output += 1;
            }
            if sup >= stepper.u_cap {
                info!("sup u = {sup:.3e} reached the cap at t = {t}");
                break RunStatus::BlowUpDetected { t };
            }
        }
    };
    if field.t != t {
        field = RadialField::new(Arc::clone(&model.grid), u.clone(), t)?;
        series.rows.push(record(&model, &field, last_dt, diag.clipped_mass, moments.as_ref())?);
        snapshots.push(field.clone());
    }
    diag.final_t = t;
    if diag.min_dt == f64::INFINITY {
        diag.min_dt = 0.0;
    }
    Ok(RunResult { status, final_field: field, series, snapshots, diagnostics: diag, moments })
}
