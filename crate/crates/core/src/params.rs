//! Problem description: dimension, radius, exponents, coefficient functions
//! and the standing hypotheses on them.
//!
//! Hypotheses are checked on a uniform validation grid of
//! [`VALIDATION_POINTS`] points over `[0, R]`. Hölder regularity of the
//! coefficients is not decidable from samples and is not checked; tabulated
//! coefficients are piecewise linear and only approximate it.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Error, Result};

pub const VALIDATION_POINTS: usize = 1024;

/// Which of the two signal equations closes the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `0 = Δv − M̄(t) + u` with the spatial mean `M̄`.
    JL,
    /// `0 = Δv − v + u`.
    PE,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::JL => write!(f, "JL"),
            Variant::PE => write!(f, "PE"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "JL" => Ok(Variant::JL),
            "PE" => Ok(Variant::PE),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// A radial coefficient `r ↦ f(r)` on `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CoefficientFn {
    #[serde(rename = "constant")]
    Constant { c: f64 },
    /// `c · r^exponent`
    #[serde(rename = "power")]
    PowerLaw { c: f64, exponent: f64 },
    /// Piecewise linear through `(r[k], values[k])`, constant beyond the ends.
    #[serde(rename = "table")]
    Tabulated { r: Vec<f64>, values: Vec<f64> },
}

impl CoefficientFn {
    pub fn constant(c: f64) -> Self {
        CoefficientFn::Constant { c }
    }

    pub fn power(c: f64, exponent: f64) -> Self {
        CoefficientFn::PowerLaw { c, exponent }
    }

    pub fn table(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = CoefficientFn::Tabulated { r, values };
        f.check_table()?;
        Ok(f)
    }

    fn check_table(&self) -> Result<()> {
        if let CoefficientFn::Tabulated { r, values } = self {
            if r.len() != values.len() || r.is_empty() {
                return domain("tabulated coefficient needs equally many r and values (at least one)");
            }
            if r.iter().chain(values.iter()).any(|x| !x.is_finite()) {
                return domain("tabulated coefficient has non-finite samples");
            }
            if r.windows(2).any(|w| w[1] <= w[0]) {
                return domain("tabulated coefficient grid must be strictly increasing");
            }
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            CoefficientFn::Constant { c } => *c,
            CoefficientFn::PowerLaw { c, exponent } => {
                if *exponent == 0.0 {
                    *c
                } else {
                    c * r.powf(*exponent)
                }
            }
            CoefficientFn::Tabulated { r: grid, values } => {
                if r <= grid[0] {
                    return values[0];
                }
                let last = grid.len() - 1;
                if r >= grid[last] {
                    return values[last];
                }
                let k = grid.partition_point(|&g| g <= r) - 1;
                let t = (r - grid[k]) / (grid[k + 1] - grid[k]);
                values[k] + t * (values[k + 1] - values[k])
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoefficientFn::Constant { c } | CoefficientFn::PowerLaw { c, .. } => *c == 0.0,
            CoefficientFn::Tabulated { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }
}

/// Full problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    pub m: f64,
    pub kappa: f64,
    pub lambda: CoefficientFn,
    pub mu: CoefficientFn,
    #[serde(default)]
    pub alpha: f64,
    pub mu1: f64,
    /// Upper bound for `λ`; the grid maximum of `λ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(rename = "M0")]
    pub m0: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    pub variant: Variant,
}

/// One violated hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub hypothesis: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, hypothesis: &str) -> bool {
        self.violations.iter().any(|v| v.hypothesis == hypothesis)
    }

    fn push(&mut self, hypothesis: &'static str, detail: String) {
        self.violations.push(Violation { hypothesis, detail });
    }
}

pub const HYP_DIMENSION: &str = "n ≥ 3";
pub const HYP_RADIUS: &str = "R > 0";
pub const HYP_DIFFUSION: &str = "m > 0";
pub const HYP_KAPPA: &str = "κ ≥ 0";
pub const HYP_ALPHA: &str = "α ≥ 0";
pub const HYP_MU1: &str = "μ₁ > 0";
pub const HYP_MASSES: &str = "0 < M₁ < M₀";
pub const HYP_MU_BOUND: &str = "μ(r) ≤ μ₁ r^α";
pub const HYP_LAMBDA_BOUND: &str = "λ(r) ≤ λ₁";
pub const HYP_NONNEGATIVE: &str = "λ, μ ≥ 0";
pub const HYP_TABLE: &str = "tabulated coefficient well formed";

impl ModelParams {
    /// Uniform validation grid over `[0, R]`.
    pub fn validation_grid(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.radius / (VALIDATION_POINTS - 1) as f64;
        (0..VALIDATION_POINTS).map(move |k| k as f64 * h)
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1.unwrap_or_else(|| {
            self.validation_grid()
                .map(|r| self.lambda.eval(r))
                .fold(0.0, f64::max)
        })
    }

    pub fn omega(&self) -> f64 {
        sphere_area(self.n).expect("n ≥ 1 for a constructed ModelParams")
    }

    /// `|Ω| = ω_{n−1} R^n / n`.
    pub fn ball_volume(&self) -> f64 {
        self.omega() * self.radius.powi(self.n as i32) / self.n as f64
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.n < 3 {
            report.push(HYP_DIMENSION, format!("n = {}", self.n));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            report.push(HYP_RADIUS, format!("R = {}", self.radius));
        }
        if !(self.m > 0.0) {
            report.push(HYP_DIFFUSION, format!("m = {}", self.m));
        }
        if !(self.kappa >= 0.0) {
            report.push(HYP_KAPPA, format!("κ = {}", self.kappa));
        }
        if !(self.alpha >= 0.0) {
            report.push(HYP_ALPHA, format!("α = {}", self.alpha));
        }
        if !(self.mu1 > 0.0) {
            report.push(HYP_MU1, format!("μ₁ = {}", self.mu1));
        }
        if !(self.m1 > 0.0 && self.m1 < self.m0) {
            report.push(HYP_MASSES, format!("M₁ = {}, M₀ = {}", self.m1, self.m0));
        }
        for (name, f) in [("λ", &self.lambda), ("μ", &self.mu)] {
            if let Err(e) = f.check_table() {
                report.push(HYP_TABLE, format!("{name}: {e}"));
                return report;
            }
        }
        if !(self.radius > 0.0) {
            return report;
        }

        let lambda1 = self.lambda1();
        let mut negative = None;
        let mut mu_worst: Option<(f64, f64)> = None;
        let mut lambda_worst: Option<(f64, f64)> = None;
        for r in self.validation_grid() {
            let lam = self.lambda.eval(r);
            let mu = self.mu.eval(r);
            if !(lam >= 0.0 && mu >= 0.0) && negative.is_none() {
                negative = Some(r);
            }
            let cap = self.mu1 * r.powf(self.alpha);
            let excess = mu - cap;
            if excess > 1e-12 * cap.abs().max(1.0) && mu_worst.is_none_or(|(_, e)| excess > e) {
                mu_worst = Some((r, excess));
            }
            let excess = lam - lambda1;
            if excess > 1e-12 * lambda1.abs().max(1.0)
                && lambda_worst.is_none_or(|(_, e)| excess > e)
            {
                lambda_worst = Some((r, excess));
            }
        }
        if let Some(r) = negative {
            report.push(HYP_NONNEGATIVE, format!("negative coefficient at r = {r}"));
        }
        if let Some((r, e)) = mu_worst {
            report.push(HYP_MU_BOUND, format!("largest excess {e:.3e} at r = {r}"));
        }
        if let Some((r, e)) = lambda_worst {
            report.push(HYP_LAMBDA_BOUND, format!("largest excess {e:.3e} at r = {r}"));
        }
        report
    }

    /// `μ(r) ≤ μ₁ r^α` at a single radius.
    pub fn mu_bound_holds_at(&self, r: f64) -> bool {
        self.mu.eval(r) <= self.mu1 * r.powf(self.alpha)
    }

    /// `−λ' ≥ 0` and `μ' ≥ 0` on the validation grid.
    pub fn monotone_coefficients(&self) -> bool {
        let samples: Vec<(f64, f64)> = self
            .validation_grid()
            .map(|r| (self.lambda.eval(r), self.mu.eval(r)))
            .collect();
        samples.windows(2).all(|w| {
            let tol_l = 1e-12 * w[0].0.abs().max(1.0);
            let tol_m = 1e-12 * w[0].1.abs().max(1.0);
            w[1].0 <= w[0].0 + tol_l && w[1].1 + tol_m >= w[0].1
        })
    }
}

/// Surface measure `ω_{n−1} = n π^{n/2} / Γ(n/2 + 1)` of the unit sphere in `ℝ^n`.
pub fn sphere_area(n: u32) -> Result<f64> {
    if n < 1 {
        return domain("sphere_area needs n ≥ 1");
    }
    let half = n as f64 / 2.0;
    Ok(n as f64 * (half * PI.ln() - ln_gamma(half + 1.0)).exp())
}
