//! Moment functionals of the mass accumulation function:
//!
//! `φ(s0) = ∫₀^{s0} s^{−γ}(s0−s) w ds`, `ψ(s0) = ∫₀^{s0} s^{−γ}(s0−s) w w_s ds`
//! and the four terms `I₁ … I₄` bounding `φ'` from below.
//!
//! `w` is linear on each `s`-cell, so every integrand is a polynomial of
//! degree ≤ 1 times the weight `s^e (s0−s)`, which is integrated exactly.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{MassFunction, RadialGrid};
use crate::params::{ModelParams, Variant};
use crate::quadrature::{beta, power_integral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub s0: f64,
    pub gamma: f64,
}

impl MomentConfig {
    pub fn new(s0: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return domain(format!("γ must lie in (0, 1), got {gamma}"));
        }
        if !(s0 > 0.0 && s0.is_finite()) {
            return domain(format!("s0 must be positive, got {s0}"));
        }
        Ok(MomentConfig { s0, gamma })
    }

    /// Snaps `s0` to the nearest interior face; returns `(J, s_J)`.
    pub fn snap(&self, grid: &RadialGrid) -> Result<(usize, f64)> {
        MomentConfig::new(self.s0, self.gamma)?;
        let top = grid.s_faces[grid.cells()];
        if self.s0 >= top {
            return domain(format!("s0 = {} must be below R^n = {top}", self.s0));
        }
        let j = grid.nearest_s_face(self.s0).clamp(1, grid.cells() - 1);
        Ok((j, grid.s_faces[j]))
    }
}

/// `(∫ s^e (s0−s) ds, ∫ s^e (s0−s)(s−a) ds)` over `[a, b]`.
fn cell_moments(e: f64, a: f64, b: f64, s0: f64) -> (f64, f64) {
    let p0 = power_integral(e, a, b);
    let p1 = power_integral(e + 1.0, a, b);
    let p2 = power_integral(e + 2.0, a, b);
    let m0 = s0 * p0 - p1;
    let m1 = s0 * p1 - p2 - a * m0;
    (m0, m1)
}

/// `∫₀^{s_J} s^e (s0−s) g(s) ds` for `g` piecewise linear with face values `g`.
fn weighted_linear(grid: &RadialGrid, j_top: usize, s0: f64, e: f64, g: &[f64]) -> f64 {
    let s = &grid.s_faces;
    (0..j_top)
        .map(|i| {
            let (m0, m1) = cell_moments(e, s[i], s[i + 1], s0);
            let slope = (g[i + 1] - g[i]) / (s[i + 1] - s[i]);
            g[i] * m0 + slope * m1
        })
        .sum()
}

/// `Σ_i c_i ∫_{cell i} s^e (s0−s) ds` for per-cell constants `c`.
fn weighted_constant(grid: &RadialGrid, j_top: usize, s0: f64, e: f64, c: impl Fn(usize) -> f64) -> f64 {
    let s = &grid.s_faces;
    (0..j_top)
        .map(|i| c(i) * cell_moments(e, s[i], s[i + 1], s0).0)
        .sum()
}

pub fn phi(w: &MassFunction, cfg: &MomentConfig) -> Result<f64> {
    let (j, s0) = cfg.snap(&w.grid)?;
    Ok(weighted_linear(&w.grid, j, s0, -cfg.gamma, &w.w))
}

/// `φ` at an arbitrary `s0 ∈ (0, R^n]` without snapping; the partial cell
/// containing `s0` is integrated exactly as well.
pub fn phi_at(w: &MassFunction, s0: f64, gamma: f64) -> Result<f64> {
    MomentConfig::new(s0, gamma)?;
    let s = &w.grid.s_faces;
    if s0 > s[s.len() - 1] {
        return domain(format!("s0 = {s0} exceeds R^n = {}", s[s.len() - 1]));
    }
    let j = s.partition_point(|&x| x <= s0) - 1;
    let mut total = weighted_linear(&w.grid, j, s0, -gamma, &w.w);
    if s0 > s[j] {
        let (m0, m1) = cell_moments(-gamma, s[j], s0, s0);
        total += w.w[j] * m0 + w.ws(j) * m1;
    }
    Ok(total)
}

pub fn psi(w: &MassFunction, cfg: &MomentConfig) -> Result<f64> {
    let (j, s0) = cfg.snap(&w.grid)?;
    let s = &w.grid.s_faces;
    Ok((0..j)
        .map(|i| {
            let (m0, m1) = cell_moments(-cfg.gamma, s[i], s[i + 1], s0);
            let k = w.ws(i);
            k * (w.w[i] * m0 + k * m1)
        })
        .sum())
}

/// Signal data entering `I₃`.
#[derive(Debug, Clone, Copy)]
pub enum Signal<'a> {
    /// JL: spatial mean `M̄`.
    Mean(f64),
    /// PE: `z` at the faces.
    Accumulated(&'a [f64]),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IComponents {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
}

impl IComponents {
    pub fn sum(&self) -> f64 {
        self.i1 + self.i2 + self.i3 + self.i4
    }

    pub fn abs_sum(&self) -> f64 {
        self.i1.abs() + self.i2.abs() + self.i3.abs() + self.i4.abs()
    }
}

/// Centred second difference of `w` per cell, from neighbouring cell slopes.
pub fn wss_cells(w: &MassFunction, upto: usize) -> Vec<f64> {
    let s = &w.grid.s_faces;
    let cells = w.grid.cells();
    let mid = |i: usize| 0.5 * (s[i] + s[i + 1]);
    (0..upto)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(cells - 1);
            (w.ws(hi) - w.ws(lo)) / (mid(hi) - mid(lo))
        })
        .collect()
}

pub fn decompose_i(
    w: &MassFunction,
    cfg: &MomentConfig,
    params: &ModelParams,
    signal: Signal<'_>,
) -> Result<IComponents> {
    let grid = &*w.grid;
    let (j, s0) = cfg.snap(grid)?;
    let n = grid.n as f64;
    let gamma = cfg.gamma;
    let s = &grid.s_faces;
    let slopes: Vec<f64> = (0..j).map(|i| w.ws(i)).collect();

    let wss = wss_cells(w, j);
    let i1 = n * n
        * weighted_constant(grid, j, s0, 2.0 - 2.0 / n - gamma, |i| {
            (n * slopes[i] + 1.0).powf(params.m - 1.0) * wss[i]
        });

    let i2 = n * psi(w, cfg)?;

    let i3 = match (params.variant, signal) {
        (Variant::JL, Signal::Mean(mbar)) => {
            -mbar * weighted_constant(grid, j, s0, 1.0 - gamma, |i| slopes[i])
        }
        (Variant::PE, Signal::Accumulated(z)) => {
            -n * (0..j)
                .map(|i| {
                    let (m0, m1) = cell_moments(-gamma, s[i], s[i + 1], s0);
                    let kz = (z[i + 1] - z[i]) / (s[i + 1] - s[i]);
                    slopes[i] * (z[i] * m0 + kz * m1)
                })
                .sum::<f64>()
        }
        (v, _) => return domain(format!("signal data does not match variant {v}")),
    };

    // G(s) = ∫₀^s σ^{α/n} w_s^{1+κ} dσ, exact per cell, interpolated linearly.
    let mut g = Vec::with_capacity(j + 1);
    g.push(0.0);
    for i in 0..j {
        let inc = slopes[i].max(0.0).powf(1.0 + params.kappa)
            * power_integral(params.alpha / n, s[i], s[i + 1]);
        g.push(g[i] + inc);
    }
    let i4 = -n.powf(params.kappa) * params.mu1 * weighted_linear(grid, j, s0, -gamma, &g);

    Ok(IComponents { i1, i2, i3, i4 })
}

/// One row of a moment time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub t: f64,
    pub phi: f64,
    pub psi: f64,
    #[serde(flatten)]
    pub i: IComponents,
    pub variant: Variant,
}

pub fn sample(
    w: &MassFunction,
    cfg: &MomentConfig,
    params: &ModelParams,
    signal: Signal<'_>,
) -> Result<MomentSample> {
    Ok(MomentSample {
        t: w.t,
        phi: phi(w, cfg)?,
        psi: psi(w, cfg)?,
        i: decompose_i(w, cfg, params, signal)?,
        variant: params.variant,
    })
}

/// `√2 B(1−γ/2, 1/2)`, the constant in `φ ≤ C s0^{(3−γ)/2} √ψ`.
pub fn phi_psi_constant(gamma: f64) -> f64 {
    std::f64::consts::SQRT_2 * beta(1.0 - gamma / 2.0, 0.5)
}

/// `n / (2 B²(1−γ/2, 1/2))`, the constant in `I₂ ≥ C s0^{γ−3} φ²`.
pub fn i2_constant(n: u32, gamma: f64) -> f64 {
    let b = beta(1.0 - gamma / 2.0, 0.5);
    n as f64 / (2.0 * b * b)
}

/// Face with the smallest margin in `w(s) ≤ √2 s^{γ/2}(s0−s)^{−1/2} √ψ`,
/// as `(s, w, bound)`; `None` when no face lies strictly inside `(0, s0)`.
pub fn w_psi_worst(w: &MassFunction, cfg: &MomentConfig) -> Result<Option<(f64, f64, f64)>> {
    let (j, s0) = cfg.snap(&w.grid)?;
    let root = psi(w, cfg)?.max(0.0).sqrt();
    let s = &w.grid.s_faces;
    let mut worst: Option<(f64, f64, f64)> = None;
    for k in 1..j {
        let rhs = std::f64::consts::SQRT_2 * s[k].powf(cfg.gamma / 2.0) / (s0 - s[k]).sqrt() * root;
        if worst.is_none_or(|(_, l, r)| rhs - w.w[k] < r - l) {
            worst = Some((s[k], w.w[k], rhs));
        }
    }
    Ok(worst)
}

/// `min_{0 < s_j < s0} [√2 s^{γ/2}(s0−s)^{−1/2} √ψ − w(s_j)]`;
/// `+∞` when no face lies strictly inside `(0, s0)`.
pub fn check_w_psi_bound(w: &MassFunction, cfg: &MomentConfig) -> Result<f64> {
    Ok(w_psi_worst(w, cfg)?.map_or(f64::INFINITY, |(_, l, r)| r - l))
}

/// `C s0^{(3−γ)/2} √ψ − φ` with `C = √2 B(1−γ/2, 1/2)`.
pub fn check_phi_psi_bound(phi_val: f64, psi_val: f64, cfg: &MomentConfig) -> f64 {
    phi_psi_constant(cfg.gamma) * cfg.s0.powf((3.0 - cfg.gamma) / 2.0) * psi_val.max(0.0).sqrt()
        - phi_val
}
