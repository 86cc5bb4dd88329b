//! JL integrator for the mass accumulation function on the `s`-faces:
//!
//! `w_t = n² s^{2−2/n}(n w_s + 1)^{m−1} w_ss + n w w_s − M̄ s w_s
//!        + ∫₀^s λ w_s dσ − n^κ ∫₀^s μ w_s^{1+κ} dσ`
//!
//! with `w(0) = 0` and `w(R^n)` following the mass law. Used as an
//! independent oracle for the `u`-form.

use serde::Serialize;
use std::sync::Arc;

use super::{run, RunOptions, TimeStepper};
use crate::error::{domain, Error, Result};
use crate::grid::{MassFunction, RadialField, RadialGrid};
use crate::params::{ModelParams, Variant};

pub const W_CFL: f64 = 0.4;

struct WModel<'a> {
    params: &'a ModelParams,
    grid: &'a RadialGrid,
    lambda: Vec<f64>,
    mu: Vec<f64>,
}

impl<'a> WModel<'a> {
    fn new(params: &'a ModelParams, grid: &'a RadialGrid) -> Result<Self> {
        if params.variant != Variant::JL {
            return domain("the w-form integrator supports JL only");
        }
        Ok(WModel {
            params,
            grid,
            lambda: grid.centers.iter().map(|&r| params.lambda.eval(r)).collect(),
            mu: grid.centers.iter().map(|&r| params.mu.eval(r)).collect(),
        })
    }

    /// Returns `(w_t, largest stiffness rate)`.
    fn rhs(&self, w: &[f64]) -> (Vec<f64>, f64) {
        let s = &self.grid.s_faces;
        let last = s.len() - 1;
        let n = self.grid.n as f64;
        let (m, kappa) = (self.params.m, self.params.kappa);
        let mbar = n * w[last] / s[last];
        let nk = n.powf(kappa);

        // Source prefix integrals with cell slopes.
        let mut source = vec![0.0; last + 1];
        let mut rate = 0.0f64;
        for i in 0..last {
            let ds = s[i + 1] - s[i];
            let slope = ((w[i + 1] - w[i]) / ds).max(0.0);
            let gain = self.lambda[i] * slope * ds;
            let loss = nk * self.mu[i] * slope.powf(1.0 + kappa) * ds;
            source[i + 1] = source[i] + gain - loss;
            rate = rate.max(nk * self.mu[i] * slope.powf(kappa));
        }

        let mut wt = vec![0.0; last + 1];
        for j in 1..last {
            let (hm, hp) = (s[j] - s[j - 1], s[j + 1] - s[j]);
            let dm = (w[j] - w[j - 1]) / hm;
            let dp = (w[j + 1] - w[j]) / hp;
            let ws = (hp * dm + hm * dp) / (hm + hp);
            let wss = 2.0 * (dp - dm) / (hm + hp);
            let diff = n * n * s[j].powf(2.0 - 2.0 / n) * (n * ws.max(0.0) + 1.0).powf(m - 1.0);
            let adv = n * w[j] - mbar * s[j];
            wt[j] = diff * wss + adv * ws + source[j];
            rate = rate.max(2.0 * diff / (hm * hp) + adv.abs() / hm.min(hp));
        }
        wt[last] = source[last];
        (wt, rate)
    }
}

/// Stable explicit step for the `w`-form at state `w`.
pub fn stable_dt_w(w: &MassFunction, params: &ModelParams) -> Result<f64> {
    let model = WModel::new(params, &w.grid)?;
    let (_, rate) = model.rhs(&w.w);
    Ok(if rate > 0.0 { W_CFL / rate } else { f64::INFINITY })
}

fn heun(model: &WModel<'_>, w: &[f64], dt: f64) -> Vec<f64> {
    let (k1, _) = model.rhs(w);
    let stage: Vec<f64> = w.iter().zip(&k1).map(|(a, b)| a + dt * b).collect();
    let (k2, _) = model.rhs(&stage);
    w.iter()
        .zip(k1.iter().zip(&k2))
        .map(|(a, (b, c))| a + 0.5 * dt * (b + c))
        .collect()
}

/// One Heun step of length `dt`.
pub fn step_w(w: &MassFunction, params: &ModelParams, dt: f64) -> Result<MassFunction> {
    let model = WModel::new(params, &w.grid)?;
    let next = heun(&model, &w.w, dt);
    if let Some(j) = next.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t: w.t + dt, reason: format!("w at face {j} became {}", next[j]) });
    }
    Ok(MassFunction { grid: Arc::clone(&w.grid), w: next, t: w.t + dt })
}

/// Integrates to each of `times` (increasing) and returns the states there.
pub fn run_w(params: &ModelParams, w0: &MassFunction, times: &[f64], dt_max: f64) -> Result<Vec<MassFunction>> {
    let model = WModel::new(params, &w0.grid)?;
    let mut w = w0.w.clone();
    let mut t = w0.t;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let (_, rate) = model.rhs(&w);
            let dt_cfl = if rate > 0.0 { W_CFL / rate } else { f64::INFINITY };
            let dt = dt_cfl.min(dt_max).min(target - t);
            w = heun(&model, &w, dt);
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { t: t + dt, reason: "w-form state is not finite".into() });
            }
            t = if dt == target - t { target } else { t + dt };
        }
        out.push(MassFunction { grid: Arc::clone(&w0.grid), w: w.clone(), t });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossReport {
    /// `(t, ‖u − n w_s‖_∞ / ‖u‖_∞)` per output time.
    pub per_output: Vec<(f64, f64)>,
    pub max_discrepancy: f64,
}

/// Relative sup-norm distance between `u` and `n w_s` (cell slopes).
pub fn discrepancy(u: &RadialField, w: &MassFunction) -> f64 {
    let n = u.grid.n as f64;
    let sup = u.sup().max(f64::MIN_POSITIVE);
    (0..u.grid.cells())
        .map(|i| (u.values[i] - n * w.ws(i)).abs())
        .fold(0.0, f64::max)
        / sup
}

/// Runs both formulations from `u0` and compares them at `outputs` equally
/// spaced times in `(0, t_end]`.
pub fn check_cross(
    params: &ModelParams,
    u0: &RadialField,
    t_end: f64,
    outputs: usize,
    stepper: &TimeStepper,
) -> Result<CrossReport> {
    if outputs == 0 {
        return domain("check_cross needs at least one output time");
    }
    let every = t_end / outputs as f64;
    let res = run(params, u0, stepper, &RunOptions { t_end, output_every: every, moments: None })?;
    let times: Vec<f64> = res.snapshots.iter().skip(1).map(|f| f.t).collect();
    let ws = run_w(params, &u0.to_mass_function(), &times, stepper.dt_max)?;
    let per_output: Vec<(f64, f64)> = res
        .snapshots
        .iter()
        .skip(1)
        .zip(&ws)
        .map(|(u, w)| (u.t, discrepancy(u, w)))
        .collect();
    let max_discrepancy = per_output.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(CrossReport { per_output, max_discrepancy })
}
