//! Blow-up certificates: the Riccati witness `y' = a y² − b`, the exponent
//! θ, explicit constants, the dyadic search for `s0`, and concentrated
//! initial data.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::functionals::{i2_constant, phi_at, phi_psi_constant, MomentConfig};
use crate::grid::{RadialField, RadialGrid};
use crate::params::{ModelParams, Variant};
use crate::quadrature::beta;
use crate::regions::{gamma_window, pos, q_from_f64, qi, to_f64, Branch, Q};
use crate::solver::MomentSeries;

/// Comparison solution of `y' = a y² − b`, `y(0) = y0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiWitness {
    pub a: f64,
    pub b: f64,
    pub y0: f64,
    /// `√(a/b) y0`.
    pub rho: f64,
    /// `+∞` when `ρ ≤ 1`.
    pub blow_up_time: f64,
    /// `ln 3 / (2√(ab))`.
    pub bound_ln3: f64,
}

pub fn riccati_blow_up_time(a: f64, b: f64, y0: f64) -> Result<RiccatiWitness> {
    let finite = a.is_finite() && b.is_finite() && y0.is_finite();
    if !(finite && a > 0.0 && b > 0.0 && y0 > 0.0) {
        return domain(format!("Riccati witness needs a, b, y0 > 0, got ({a}, {b}, {y0})"));
    }
    let root = (a * b).sqrt();
    let rho = (a / b).sqrt() * y0;
    let blow_up_time = if rho > 1.0 {
        // ln((ρ+1)/(ρ−1)) = ln(1 + 2/(ρ−1))
        (2.0 / (rho - 1.0)).ln_1p() / (2.0 * root)
    } else {
        f64::INFINITY
    };
    Ok(RiccatiWitness { a, b, y0, rho, blow_up_time, bound_ln3: 3f64.ln() / (2.0 * root) })
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn qmax(a: Q, b: Q) -> Q {
    if a > b {
        a
    } else {
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaExponent {
    #[serde(serialize_with = "ser_q")]
    pub theta: Q,
    pub branch: Branch,
}

/// Exponent θ of the assembled inequality, exact.
pub fn theta_for(n: u32, m: Q, p: Q, kappa: Q, alpha: Q) -> Result<ThetaExponent> {
    let window = gamma_window(n, m, p, kappa, alpha)?;
    if window.is_empty() {
        let why = window.reason.unwrap_or_else(|| "empty γ window".into());
        return domain(format!("parameters are not admissible: {why}"));
    }
    let nq = qi(n as i128);
    let common = qmax(
        qmax(qi(2) / nq, qi(2) - qi(2) / nq),
        qi(2) * p * kappa / nq - qi(2) * alpha / nq,
    );
    let theta = match window.branch {
        Branch::SmallM => qmax(qi(2) / nq + p * m / nq, common),
        _ => qmax(qi(4) / nq + qi(2) * p / nq * pos(m - qi(1)), common),
    };
    if !(theta > Q::zero() && theta < qi(2)) {
        return Err(Error::Domain(format!("θ = {theta} outside (0, 2)")));
    }
    Ok(ThetaExponent { theta, branch: window.branch })
}

/// `−coeff · s0^exponent`, times `√ψ` when flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerm {
    pub coeff: f64,
    pub exponent: f64,
    pub sqrt_psi: bool,
}

/// Lower bound `−Σ terms`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub terms: Vec<BoundTerm>,
}

impl LowerBound {
    pub fn value(&self, s0: f64, psi: f64) -> f64 {
        let root = psi.max(0.0).sqrt();
        -self
            .terms
            .iter()
            .map(|t| t.coeff * s0.powf(t.exponent) * if t.sqrt_psi { root } else { 1.0 })
            .sum::<f64>()
    }

    fn sqrt_terms(&self) -> usize {
        self.terms.iter().filter(|t| t.sqrt_psi).count()
    }
}

/// `μ₁√2((pκ/n − α/n)₊ + 1)/(1−γ) · B(α/n − pκ/n + γ/2, 1/2)`.
pub fn c_i4(n: u32, p: f64, kappa: f64, alpha: f64, gamma: f64, mu1: f64) -> Result<f64> {
    let nf = n as f64;
    let arg = alpha / nf - p * kappa / nf + gamma / 2.0;
    if !(arg > 0.0) {
        return domain(format!("I₄ estimate needs α/n − pκ/n + γ/2 > 0, got {arg}"));
    }
    let lift = (p * kappa / nf - alpha / nf).max(0.0) + 1.0;
    Ok(mu1 * std::f64::consts::SQRT_2 * lift / (1.0 - gamma) * beta(arg, 0.5))
}

/// `I₄ ≥ −K^κ C s0^{(3−γ)/2 − pκ/n + α/n} √ψ` for `u ≤ K r^{−p}`.
pub fn i4_bound(params: &ModelParams, p: f64, k: f64, gamma: f64) -> Result<LowerBound> {
    let nf = params.n as f64;
    let c = c_i4(params.n, p, params.kappa, params.alpha, gamma, params.mu1)?;
    Ok(LowerBound {
        terms: vec![BoundTerm {
            coeff: k.powf(params.kappa) * c,
            exponent: (3.0 - gamma) / 2.0 - p * params.kappa / nf + params.alpha / nf,
            sqrt_psi: true,
        }],
    })
}

/// `I₁` lower bound for `u ≤ K r^{−p}`; the branch follows the `m ≥ 2/p` rule.
pub fn i1_bound(n: u32, m: f64, p: f64, k: f64, gamma: f64) -> Result<(Branch, LowerBound)> {
    let nf = n as f64;
    let lead = 2.0 - 2.0 / nf - gamma;
    let tail = BoundTerm { coeff: nf / m, exponent: 3.0 - gamma - 2.0 / nf, sqrt_psi: false };
    if m >= 2.0 / p {
        let q = p / nf * (m - 1.0).max(0.0);
        let ok = m < 1.0 + (nf - 2.0) / p && 1.0 - 2.0 / nf - q < gamma && gamma < 2.0 - 4.0 / nf - 2.0 * q;
        if !ok {
            return domain("large-m I₁ estimate needs m < 1 + (n−2)/p and 1−2/n−q < γ < 2−4/n−2q");
        }
        let lift = 2f64.powf(m - 1.0);
        let c1 = nf.max(lift).max(lift * nf * k.powf((m - 1.0).max(0.0)));
        let c3 = std::f64::consts::SQRT_2 * beta(1.0 - 2.0 / nf - q - gamma / 2.0, 0.5);
        let main = BoundTerm {
            coeff: nf / m * c1 * lead * (gamma + 2.0 / nf + q) * c3,
            exponent: (3.0 - gamma) / 2.0 - 2.0 / nf - q,
            sqrt_psi: true,
        };
        Ok((Branch::LargeM, LowerBound { terms: vec![main, BoundTerm { coeff: nf / m * c1, ..tail }] }))
    } else {
        let cap = 2.0 - 2.0 / nf - p * m / nf;
        if !(m < 1f64.min(2.0 * (nf - 1.0) / p) && 0.0 < gamma && gamma < cap) {
            return domain("small-m I₁ estimate needs m < min{1, 2(n−1)/p} and γ < 2−2/n−pm/n");
        }
        let c4 = lead / (cap - gamma) * k.powf(m) * nf / m;
        let main = BoundTerm { coeff: c4, exponent: 3.0 - gamma - 2.0 / nf - p * m / nf, sqrt_psi: false };
        Ok((Branch::SmallM, LowerBound { terms: vec![main, tail] }))
    }
}

/// JL: `I₃ ≥ −√2 (M0 e^{λ₁t}/|Ω|) B(2−γ/2, 1/2) s0^{(3−γ)/2} √ψ`.
pub fn i3_bound_jl(params: &ModelParams, m0: f64, t: f64, gamma: f64) -> LowerBound {
    let mean = m0 * (params.lambda1() * t).exp() / params.ball_volume();
    LowerBound {
        terms: vec![BoundTerm {
            coeff: std::f64::consts::SQRT_2 * mean * beta(2.0 - gamma / 2.0, 0.5),
            exponent: (3.0 - gamma) / 2.0,
            sqrt_psi: true,
        }],
    }
}

/// JL pointwise constant `M0 n e^{λ₁T}/ω_{n−1}` for `u ≤ K r^{−n}`.
pub fn jl_envelope_constant(params: &ModelParams, t: f64) -> f64 {
    params.m0 * params.n as f64 * (params.lambda1() * t).exp() / params.omega()
}

/// Where `C1`, `C2` of `φ' ≥ C1 s0^{γ−3} φ² − C2 s0^{3−γ−θ}` come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantSource {
    Supplied { c1: f64, c2: f64 },
    /// JL only: explicit bounds combined with Young's inequality, parameter `eta`.
    ConservativeJl {
        #[serde(default = "default_eta")]
        eta: f64,
    },
    /// Least-squares fit from a calibration trajectory.
    Empirical { c1: f64, c2: f64 },
}

fn default_eta() -> f64 {
    0.5
}

impl Default for ConstantSource {
    fn default() -> Self {
        ConstantSource::ConservativeJl { eta: default_eta() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateConstants {
    /// `M1/(4ω_{n−1})`.
    pub c3: f64,
    pub c_i4: f64,
    pub c_phi_psi: f64,
    pub c_i2: f64,
    pub c1: f64,
    pub c2: f64,
    pub source: ConstantSource,
}

impl CertificateConstants {
    pub fn a(&self, s0: f64, gamma: f64) -> f64 {
        self.c1 * s0.powf(gamma - 3.0)
    }

    pub fn b(&self, s0: f64, gamma: f64, theta: f64) -> f64 {
        self.c2 * s0.powf(3.0 - gamma - theta)
    }

    pub fn phi0(&self, s0: f64, gamma: f64) -> f64 {
        self.c3 * s0.powf(2.0 - gamma)
    }

    /// `φ0² a / b`; proportional to `s0^{θ−2}`.
    pub fn feasibility_ratio(&self, s0: f64, gamma: f64, theta: f64) -> f64 {
        let phi0 = self.phi0(s0, gamma);
        phi0 * phi0 * self.a(s0, gamma) / self.b(s0, gamma, theta)
    }
}

/// Combines the JL bounds for `I₁`, `I₃`, `I₄` into `(C1, C2)`: each
/// `c s0^x √ψ` is split as `η ψ + c² s0^{2x}/(4η)`, the `ψ` parts are taken
/// from `I₂ = nψ`, and every remainder `s0^y` is dominated by
/// `(R^n)^{y−(3−γ−θ)} s0^{3−γ−θ}` on `s0 ≤ R^n`.
pub fn conservative_jl_constants(
    params: &ModelParams,
    gamma: f64,
    theta: f64,
    t_end: f64,
    eta: f64,
) -> Result<(f64, f64)> {
    if params.variant != Variant::JL {
        return domain("conservative constants are available for JL only; supply C1, C2 or fit them");
    }
    let nf = params.n as f64;
    let k = jl_envelope_constant(params, t_end);
    let (_, i1) = i1_bound(params.n, params.m, nf, k, gamma)?;
    let parts = [i1, i3_bound_jl(params, params.m0, t_end, gamma), i4_bound(params, nf, k, gamma)?];
    let roots: usize = parts.iter().map(LowerBound::sqrt_terms).sum();
    if !(eta > 0.0 && nf - roots as f64 * eta > 0.0) {
        return domain(format!("Young parameter η = {eta} must lie in (0, n/{roots})"));
    }
    let b = beta(1.0 - gamma / 2.0, 0.5);
    let c1 = (nf - roots as f64 * eta) / (2.0 * b * b);
    let rn = params.radius.powi(params.n as i32);
    let base = 3.0 - gamma - theta;
    let mut c2 = 0.0;
    for term in parts.iter().flat_map(|p| &p.terms) {
        let (coeff, y) = if term.sqrt_psi {
            (term.coeff * term.coeff / (4.0 * eta), 2.0 * term.exponent)
        } else {
            (term.coeff, term.exponent)
        };
        if y < base - 1e-12 {
            return domain(format!("remainder exponent {y} below 3−γ−θ = {base}"));
        }
        c2 += coeff * rn.powf((y - base).max(0.0));
    }
    Ok((c1, c2))
}

/// Least-squares fit of `φ' ≈ C1 s0^{γ−3} φ² − C2 s0^{3−γ−θ}` over the
/// interior samples of `series`, with central differences for `φ'`.
pub fn fit_empirical(series: &MomentSeries, cfg: &MomentConfig, theta: f64) -> Result<(f64, f64)> {
    let samples: Vec<(f64, f64)> = series
        .rows
        .iter()
        .filter_map(|r| r.moments.map(|m| (r.t, m.phi)))
        .collect();
    if samples.len() < 3 {
        return domain("empirical fit needs at least three moment samples");
    }
    let xa = cfg.s0.powf(cfg.gamma - 3.0);
    let xb = -cfg.s0.powf(3.0 - cfg.gamma - theta);
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for w in samples.windows(3) {
        let (t0, p0) = w[0];
        let (_, p1) = w[1];
        let (t2, p2) = w[2];
        let dphi = (p2 - p0) / (t2 - t0);
        let x1 = xa * p1 * p1;
        s11 += x1 * x1;
        s12 += x1 * xb;
        s22 += xb * xb;
        r1 += x1 * dphi;
        r2 += xb * dphi;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-14 * s11 * s22 {
        return Err(Error::Infeasible("calibration samples do not separate C1 from C2".into()));
    }
    let c1 = (r1 * s22 - r2 * s12) / det;
    let c2 = (s11 * r2 - s12 * r1) / det;
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Infeasible(format!("fitted constants are not positive: C1 = {c1}, C2 = {c2}")));
    }
    Ok((c1, c2))
}

/// Number of halvings tried by the dyadic search.
pub const MAX_HALVINGS: u32 = 60;

/// Result of the dyadic search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicChoice {
    pub j: u32,
    pub s0: f64,
}

/// Largest `s0 = R^n 2^{−j}`, `1 ≤ j ≤ 60`, with `ln 3/(2√(ab)) < T` and
/// `φ0 √(a/b) > 2`. Powers of `s0` are evaluated in base 2 with exact
/// rational exponents so that boundary cases are decided exactly.
pub fn dyadic_s0_search(
    c1: f64,
    c2: f64,
    c3: f64,
    theta: Q,
    t_end: f64,
    rn: f64,
) -> Option<DyadicChoice> {
    // log2 √(ab) = ½ log2(C1C2) − (θ/2) log2 s0
    // log2 φ0√(a/b) = log2 C3 + ½ log2(C1/C2) + (θ/2 − 1) log2 s0
    let half_theta = theta / qi(2);
    let e_rho = half_theta - qi(1);
    let lrn = rn.log2();
    let fixed_ab = 0.5 * (c1 * c2).log2();
    let fixed_rho = c3.log2() + 0.5 * (c1 / c2).log2();
    let lhs_time = (3f64.ln() / 2.0).log2();
    let lt = t_end.log2();
    for j in 1..=MAX_HALVINGS {
        let jq = qi(j as i128);
        // the rational parts are exact; with R = 1 and unit constants no rounding enters
        let log_root = fixed_ab - to_f64(half_theta) * lrn + to_f64(half_theta * jq);
        let log_rho = fixed_rho + to_f64(e_rho) * lrn - to_f64(e_rho * jq);
        if lhs_time - log_root < lt && log_rho > 1.0 {
            return Some(DyadicChoice { j, s0: rn * 2f64.powi(-(j as i32)) });
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub variant: Variant,
    pub gamma: f64,
    #[serde(serialize_with = "ser_q")]
    pub gamma_exact: Q,
    pub theta: f64,
    #[serde(serialize_with = "ser_q")]
    pub theta_exact: Q,
    pub branch: Branch,
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub feasible: bool,
    pub s0: Option<f64>,
    pub r1: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub phi0: Option<f64>,
    pub witness: Option<RiccatiWitness>,
    /// `ln 3/(2√(ab))`.
    pub blow_up_time_bound: Option<f64>,
    pub constants: CertificateConstants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Exact rational for a parameter value read from a config.
fn exact(x: f64) -> Result<Q> {
    q_from_f64(x)
}

/// Chooses γ (window midpoint by default) and θ, evaluates the constants and
/// runs the dyadic search. An empty search gives `feasible = false`.
pub fn assemble_certificate(
    params: &ModelParams,
    p: f64,
    k: f64,
    t_end: f64,
    gamma: Option<Q>,
    source: ConstantSource,
) -> Result<CertificateReport> {
    if !(t_end > 0.0) {
        return domain(format!("horizon T = {t_end} must be positive"));
    }
    let (m, pq, kappa, alpha) = (exact(params.m)?, exact(p)?, exact(params.kappa)?, exact(params.alpha)?);
    let window = gamma_window(params.n, m, pq, kappa, alpha)?;
    let th = theta_for(params.n, m, pq, kappa, alpha)?;
    let gamma_q = gamma.unwrap_or_else(|| window.midpoint());
    if !window.contains(gamma_q) {
        return domain(format!("γ = {gamma_q} outside ({}, {})", window.lower, window.upper));
    }
    let g = to_f64(gamma_q);
    let theta = to_f64(th.theta);
    let (c1, c2) = match source {
        ConstantSource::Supplied { c1, c2 } | ConstantSource::Empirical { c1, c2 } => (c1, c2),
        ConstantSource::ConservativeJl { eta } => conservative_jl_constants(params, g, theta, t_end, eta)?,
    };
    if !(c1 > 0.0 && c2 > 0.0) {
        return domain(format!("C1, C2 must be positive, got ({c1}, {c2})"));
    }
    let constants = CertificateConstants {
        c3: params.m1 / (4.0 * params.omega()),
        c_i4: c_i4(params.n, p, params.kappa, params.alpha, g, params.mu1)?,
        c_phi_psi: phi_psi_constant(g),
        c_i2: i2_constant(params.n, g),
        c1,
        c2,
        source,
    };
    let rn = params.radius.powi(params.n as i32);
    let mut report = CertificateReport {
        variant: params.variant,
        gamma: g,
        gamma_exact: gamma_q,
        theta,
        theta_exact: th.theta,
        branch: th.branch,
        p,
        k,
        t_end,
        feasible: false,
        s0: None,
        r1: None,
        a: None,
        b: None,
        phi0: None,
        witness: None,
        blow_up_time_bound: None,
        constants,
        reason: None,
    };
    match dyadic_s0_search(c1, c2, report.constants.c3, th.theta, t_end, rn) {
        Some(choice) => {
            let s0 = choice.s0;
            let c = &report.constants;
            let (a, b, phi0) = (c.a(s0, g), c.b(s0, g, theta), c.phi0(s0, g));
            let witness = riccati_blow_up_time(a, b, phi0)?;
            report.feasible = true;
            report.s0 = Some(s0);
            report.r1 = Some((s0 / 2.0).powf(1.0 / params.n as f64));
            report.a = Some(a);
            report.b = Some(b);
            report.phi0 = Some(phi0);
            report.blow_up_time_bound = Some(witness.bound_ln3);
            report.witness = Some(witness);
        }
        None => {
            report.reason = Some(format!(
                "no s0 ≥ 2^-{MAX_HALVINGS} R^n satisfies both conditions; C1/C2 too pessimistic"
            ));
        }
    }
    Ok(report)
}

/// Radial shape of a concentrated initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `min(A, L r^{−p})` times a smooth cutoff, 1 on `[0, 0.8 r1]`.
    CappedPower,
    /// `min(A, L r^{−p})` with `A ≤ max_height`, times a linear cutoff.
    PlateauTail { max_height: f64 },
}

fn smooth_taper(x: f64) -> f64 {
    if x <= 0.8 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let y = (1.0 - x) / 0.2;
        y * y * (3.0 - 2.0 * y)
    }
}

fn linear_taper(x: f64) -> f64 {
    ((1.0 - x) / 0.2).clamp(0.0, 1.0)
}

/// Radially nonincreasing datum supported in `B_{r1}`, below `L r^{−p}`,
/// with discrete mass `M0`. The amplitude is found by bisection.
pub fn build_initial_datum(
    params: &ModelParams,
    grid: Arc<RadialGrid>,
    r1: f64,
    p: f64,
    l: f64,
    profile: Profile,
) -> Result<RadialField> {
    if !(r1 > 0.0 && r1 < params.radius) {
        return domain(format!("r1 = {r1} must lie in (0, R)"));
    }
    if !(l > 0.0 && p > 0.0) {
        return domain("envelope needs L > 0 and p > 0");
    }
    let inside: Vec<usize> = (0..grid.cells()).filter(|&i| grid.faces[i + 1] <= r1).collect();
    if inside.is_empty() {
        return domain(format!("no cell lies inside r1 = {r1}; refine the grid"));
    }
    let taper: fn(f64) -> f64 = match profile {
        Profile::CappedPower => smooth_taper,
        Profile::PlateauTail { .. } => linear_taper,
    };
    let shape: Vec<(usize, f64, f64)> = inside
        .iter()
        .map(|&i| {
            let r = grid.centers[i];
            (i, l * r.powf(-p), taper(r / r1))
        })
        .collect();
    let build = |amp: f64| -> Vec<f64> {
        let mut u = vec![0.0; grid.cells()];
        for &(i, env, tp) in &shape {
            u[i] = amp.min(env) * tp;
        }
        u
    };
    let mass_of = |amp: f64| crate::grid::mass(&grid, &build(amp));
    let ceiling = shape.iter().map(|s| s.1).fold(0.0, f64::max);
    let top = match profile {
        Profile::CappedPower => ceiling,
        Profile::PlateauTail { max_height } => {
            if !(max_height > 0.0) {
                return domain("plateau height must be positive");
            }
            max_height.min(ceiling)
        }
    };
    let target = params.m0;
    let reachable = mass_of(top);
    if reachable < target {
        return domain(format!(
            "mass M0 = {target} is not reachable inside r1 = {r1}; maximal mass is {reachable}"
        ));
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_of(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (mass_of(hi) - target).abs() <= 1e-13 * target {
            break;
        }
    }
    let values = build(hi);
    RadialField::new(grid, values, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Phi0Bound {
    /// `φ(s0, 0)`.
    pub lhs: f64,
    /// `η² M1 s0^{2−γ} / ω_{n−1}`.
    pub rhs: f64,
    /// `((1−η) s0)^{1/n}`.
    pub r1: f64,
    /// `∫_{B_{r1}} u0`.
    pub inner_mass: f64,
    pub precondition: bool,
}

/// Evaluates both sides of the lower bound for `φ(s0, 0)`; `precondition`
/// records whether `∫_{B_{r1}} u0 ≥ M1`.
pub fn phi0_lower_bound(u0: &RadialField, m1: f64, s0: f64, gamma: f64, eta: f64) -> Result<Phi0Bound> {
    if !(eta > 0.0 && eta < 1.0) {
        return domain(format!("η = {eta} must lie in (0, 1)"));
    }
    let n = u0.grid.n;
    let omega = crate::params::sphere_area(n)?;
    let w = u0.to_mass_function();
    let s_eta = (1.0 - eta) * s0;
    let inner_mass = omega * w.eval(s_eta);
    let lhs = phi_at(&w, s0, gamma)?;
    let rhs = eta * eta * m1 * s0.powf(2.0 - gamma) / omega;
    Ok(Phi0Bound {
        lhs,
        rhs,
        r1: s_eta.powf(1.0 / n as f64),
        inner_mass,
        precondition: inner_mass >= m1,
    })
}

/// Outcome of sampling random admissible parameter tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub samples: usize,
    pub seed: u64,
    pub failures: usize,
    /// Up to five failing tuples `(n, m, p, κ, α)` with the reason.
    pub examples: Vec<String>,
}

/// Random admissible rational tuple: `n ∈ {3..8}`, `p = n + k/2`,
/// `α = j/4`, `m` strictly below `1 + (n−2)/p`, `κ` strictly below its
/// supremum. Resamples until the κ range is nonempty.
pub fn random_admissible(rng: &mut impl rand::Rng) -> (u32, Q, Q, Q, Q) {
    use crate::regions::{kappa_sup_main, q};
    loop {
        let n: u32 = rng.random_range(3..=8);
        let p = qi(n as i128) + q(rng.random_range(0..=4), 2);
        let alpha = q(rng.random_range(0..=4), 4);
        let cap = qi(1) + qi(n as i128 - 2) / p;
        let m = cap * q(rng.random_range(1..64), 64);
        let Ok(bound) = kappa_sup_main(n, m, p, alpha) else { continue };
        if bound.empty {
            continue;
        }
        let kappa = bound.sup_kappa * q(rng.random_range(0..64), 64);
        return (n, m, p, kappa, alpha);
    }
}

/// Checks that the γ window is nonempty and θ ∈ (0, 2) on `samples` random
/// admissible tuples.
pub fn feasibility_check(samples: usize, seed: u64) -> FeasibilityReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = FeasibilityReport { samples, seed, failures: 0, examples: Vec::new() };
    for _ in 0..samples {
        let (n, m, p, kappa, alpha) = random_admissible(&mut rng);
        let why = match (gamma_window(n, m, p, kappa, alpha), theta_for(n, m, p, kappa, alpha)) {
            (Ok(w), Ok(_)) if !w.is_empty() => continue,
            (Ok(_), Ok(_)) => "empty γ window".to_string(),
            (Err(e), _) | (_, Err(e)) => e.to_string(),
        };
        report.failures += 1;
        if report.examples.len() < 5 {
            report.examples.push(format!("n={n} m={m} p={p} κ={kappa} α={alpha}: {why}"));
        }
    }
    report
}
