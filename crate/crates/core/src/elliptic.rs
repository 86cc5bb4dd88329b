//! Chemoattractant gradients: the closed form for JL and a conservative
//! tridiagonal solve of `Δv − v + u = 0` for PE.

use crate::error::{Error, Result};
use crate::grid::{accumulate, MassFunction, RadialField, RadialGrid};
use crate::linalg::solve_tridiagonal;
use crate::params::Variant;

/// `v_r` at the `N + 1` faces.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalGradient {
    pub variant: Variant,
    pub vr: Vec<f64>,
}

/// Solution of the PE signal equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PESignal {
    /// `v` at cell centres.
    pub v: Vec<f64>,
    /// `v_r` at faces; zero at both ends.
    pub vr: Vec<f64>,
    /// `z(s_j) = ∫₀^{r_j} ρ^{n−1} v dρ` at faces.
    pub z: Vec<f64>,
}

/// `M̄ = ∫u/|Ω| = n w(R^n)/R^n`.
pub fn mean_from_w(grid: &RadialGrid, w: &[f64]) -> f64 {
    grid.n as f64 * w[w.len() - 1] / grid.s_faces[grid.s_faces.len() - 1]
}

/// JL: `v_r(r) = r M̄/n − r^{1−n} w(r^n)`, pinned to zero at both ends.
pub fn vr_jl_values(grid: &RadialGrid, w: &[f64], mbar: f64) -> Vec<f64> {
    let n = grid.n as f64;
    let last = grid.faces.len() - 1;
    let mut vr = vec![0.0; last + 1];
    for j in 1..last {
        let r = grid.faces[j];
        vr[j] = r * mbar / n - w[j] / grid.face_area[j];
    }
    vr
}

pub fn vr_jl(w: &MassFunction, mbar: f64) -> SignalGradient {
    SignalGradient {
        variant: Variant::JL,
        vr: vr_jl_values(&w.grid, &w.w, mbar),
    }
}

/// Distance between neighbouring cell centres across interior face `j`.
pub(crate) fn center_gap(grid: &RadialGrid, j: usize) -> f64 {
    grid.centers[j] - grid.centers[j - 1]
}

/// PE: solves `r^{1−n}(r^{n−1} v_r)_r − v + u = 0` with `v_r = 0` at `r ∈ {0, R}`.
pub fn solve_pe(grid: &RadialGrid, u: &[f64]) -> Result<PESignal> {
    let cells = grid.cells();
    let mut lower = vec![0.0; cells];
    let mut diag = vec![0.0; cells];
    let mut upper = vec![0.0; cells];
    let mut rhs = vec![0.0; cells];
    for i in 0..cells {
        let vol = grid.reduced_volume[i];
        diag[i] = vol;
        rhs[i] = vol * u[i];
        if i > 0 {
            let c = grid.face_area[i] / center_gap(grid, i);
            lower[i] = -c;
            diag[i] += c;
        }
        if i + 1 < cells {
            let c = grid.face_area[i + 1] / center_gap(grid, i + 1);
            upper[i] = -c;
            diag[i] += c;
        }
    }
    let v = solve_tridiagonal(&lower, &diag, &upper, &rhs)
        .map_err(|e| Error::Domain(format!("PE signal solve failed: {e}")))?;
    let mut vr = vec![0.0; cells + 1];
    for j in 1..cells {
        vr[j] = (v[j] - v[j - 1]) / center_gap(grid, j);
    }
    let z = accumulate(grid, &v);
    Ok(PESignal { v, vr, z })
}

pub fn solve_pe_signal(u: &RadialField) -> Result<PESignal> {
    solve_pe(&u.grid, &u.values)
}

impl PESignal {
    pub fn gradient(&self) -> SignalGradient {
        SignalGradient { variant: Variant::PE, vr: self.vr.clone() }
    }
}

/// `max_j r_j^{n−1} v_r(r_j)` over the faces.
pub fn flux_max(grid: &RadialGrid, vr: &[f64]) -> f64 {
    vr.iter()
        .zip(&grid.face_area)
        .map(|(v, a)| v * a)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Solves the PE signal for `u` and returns `max_j r_j^{n−1} v_r`.
pub fn vr_bound_pe(u: &RadialField) -> Result<f64> {
    let signal = solve_pe_signal(u)?;
    Ok(flux_max(&u.grid, &signal.vr))
}

/// Reference bound `2 e^{λ₁T} M₀ / ω_{n−1}` for `r^{n−1} v_r`.
pub fn pe_flux_envelope(m0: f64, lambda1: f64, t: f64, omega: f64) -> f64 {
    2.0 * (lambda1 * t).exp() * m0 / omega
}
