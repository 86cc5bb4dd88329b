//! JSON run configuration and construction of the initial datum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use crate::certificates::{
    assemble_certificate, build_initial_datum, jl_envelope_constant, CertificateReport, ConstantSource, Profile,
};
use crate::error::{domain, Error, Result};
use crate::functionals::MomentConfig;
use crate::grid::{GridKind, RadialField, RadialGrid};
use crate::monitor::MonitorConfig;
use crate::params::{ModelParams, Variant};
use crate::regions::{parse_q, pe_exponent_p0, q_from_f64, to_f64};
use crate::solver::{RunOptions, TimeStepper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cells: usize,
    /// Width ratio of neighbouring cells for a grid graded towards the
    /// origin; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<f64>,
}

impl GridSpec {
    pub fn kind(&self) -> GridKind {
        match self.grading {
            Some(ratio) => GridKind::GradedToOrigin { ratio },
            None => GridKind::Uniform,
        }
    }

    pub fn build(&self, params: &ModelParams) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::build(self.cells, params.radius, params.n, self.kind())?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Constant {
        value: f64,
    },
    /// `base + amplitude · cos(π r / R)`.
    CosineBump {
        base: f64,
        amplitude: f64,
    },
    /// Concentrated datum of mass `M0` in `B_{r1}` below `L r^{−p}`. Missing
    /// `r1` is taken from the certificate; `p` defaults to the certificate
    /// exponent and `L` to `n M0/ω_{n−1}`.
    Concentrated {
        #[serde(default)]
        r1: Option<f64>,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default, rename = "L")]
        l: Option<f64>,
        #[serde(default = "capped")]
        profile: Profile,
    },
    /// Snapshot file written by a previous run.
    Snapshot {
        path: String,
    },
}

fn capped() -> Profile {
    Profile::CappedPower
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSpec {
    /// Envelope exponent; `n` for JL and `p₀` for PE by default.
    #[serde(default)]
    pub p: Option<f64>,
    /// Envelope constant; JL defaults to `M0 n e^{λ₁T}/ω_{n−1}`.
    #[serde(default, rename = "K")]
    pub k: Option<f64>,
    /// Horizon; the run's `t_end` by default.
    #[serde(default, rename = "T")]
    pub horizon: Option<f64>,
    /// Exact rational, e.g. `"8/15"`; the window midpoint by default.
    #[serde(default)]
    pub gamma: Option<String>,
    #[serde(default)]
    pub constants: Option<ConstantSource>,
    /// Parameter of the initial moment lower bound.
    #[serde(default = "half")]
    pub eta: f64,
}

fn half() -> f64 {
    0.5
}

impl Default for CertificateSpec {
    fn default() -> Self {
        CertificateSpec { p: None, k: None, horizon: None, gamma: None, constants: None, eta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelParams,
    pub grid: GridSpec,
    #[serde(default)]
    pub stepper: TimeStepper,
    #[serde(default)]
    pub moments: Option<MomentConfig>,
    pub initial: InitialSpec,
    pub t_end: f64,
    pub output_every: f64,
    /// Seeds the optional multiplicative noise on the initial datum.
    #[serde(default)]
    pub seed: u64,
    /// Relative amplitude of uniform noise applied to `u0`.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub certificate: CertificateSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let report = self.model.validate();
        if !report.is_valid() {
            let list: Vec<String> = report.violations.iter().map(|v| format!("{} ({})", v.hypothesis, v.detail)).collect();
            return Err(Error::Config(format!("model violates: {}", list.join("; "))));
        }
        self.stepper.validate()?;
        if !(self.t_end > 0.0 && self.output_every > 0.0) {
            return Err(Error::Config("t_end and output_every must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::Config(format!("noise must lie in [0, 1), got {}", self.noise)));
        }
        if let Some(m) = &self.moments {
            MomentConfig::new(m.s0, m.gamma)?;
        }
        Ok(())
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions { t_end: self.t_end, output_every: self.output_every, moments: self.moments }
    }

    /// Envelope exponent used by certificates and concentrated data.
    pub fn envelope_p(&self) -> Result<f64> {
        if let Some(p) = self.certificate.p {
            return Ok(p);
        }
        match self.model.variant {
            Variant::JL => Ok(self.model.n as f64),
            Variant::PE => Ok(to_f64(pe_exponent_p0(self.model.n, q_from_f64(self.model.m)?)?)),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.certificate.horizon.unwrap_or(self.t_end)
    }

    /// Envelope constant: configured, or the JL formula at the horizon.
    pub fn envelope_k(&self) -> Result<f64> {
        match (self.certificate.k, self.model.variant) {
            (Some(k), _) => Ok(k),
            (None, Variant::JL) => Ok(jl_envelope_constant(&self.model, self.horizon())),
            (None, Variant::PE) => domain("PE certificates need the envelope constant K in the config"),
        }
    }

    pub fn certificate(&self) -> Result<CertificateReport> {
        self.certificate_with(self.certificate.constants.unwrap_or_default())
    }

    pub fn certificate_with(&self, source: ConstantSource) -> Result<CertificateReport> {
        let gamma = match &self.certificate.gamma {
            Some(text) => Some(parse_q(text)?),
            None => None,
        };
        assemble_certificate(&self.model, self.envelope_p()?, self.envelope_k()?, self.horizon(), gamma, source)
    }

    /// Builds `u0` on `grid`, applying seeded noise when configured.
    pub fn initial_field(&self, grid: Arc<RadialGrid>) -> Result<RadialField> {
        let radius = self.model.radius;
        let mut u = match &self.initial {
            InitialSpec::Constant { value } => RadialField::constant(grid, *value)?,
            InitialSpec::CosineBump { base, amplitude } => RadialField::from_fn(grid, |r| {
                base + amplitude * (std::f64::consts::PI * r / radius).cos()
            })?,
            InitialSpec::Concentrated { r1, p, l, profile } => {
                let r1 = match r1 {
                    Some(r) => *r,
                    None => self
                        .certificate()?
                        .r1
                        .ok_or_else(|| Error::Infeasible("certificate has no r1 to place the datum".into()))?,
                };
                let p = match p {
                    Some(p) => *p,
                    None => self.envelope_p()?,
                };
                let l = l.unwrap_or(self.model.m0 * self.model.n as f64 / self.model.omega());
                build_initial_datum(&self.model, grid, r1, p, l, *profile)?
            }
            InitialSpec::Snapshot { path } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open snapshot {path}: {e}")))?;
                let (_, field) = crate::grid::read_snapshot(std::io::BufReader::new(file))?;
                if field.grid.cells() != grid.cells() {
                    return Err(Error::Config("snapshot grid does not match the configured grid".into()));
                }
                RadialField::new(grid, field.values, 0.0)?
            }
        };
        if self.noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for v in &mut u.values {
                *v *= 1.0 + self.noise * rng.random_range(-1.0..1.0);
            }
        }
        Ok(u)
    }

    /// Sets a numeric field by name, for sweeps.
    pub fn set_axis(&mut self, axis: &str, value: f64) -> Result<()> {
        use crate::params::CoefficientFn;
        match axis {
            "kappa" => self.model.kappa = value,
            "m" => self.model.m = value,
            "alpha" => self.model.alpha = value,
            "mu1" => self.model.mu1 = value,
            "M0" => self.model.m0 = value,
            "M1" => self.model.m1 = value,
            "R" => self.model.radius = value,
            "lambda" => self.model.lambda = CoefficientFn::constant(value),
            "mu" => self.model.mu = CoefficientFn::constant(value),
            "t_end" => self.t_end = value,
            "dt_max" => self.stepper.dt_max = value,
            "cells" => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::Config(format!("cells must be a positive integer, got {value}")));
                }
                self.grid.cells = value as usize;
            }
            "noise" => self.noise = value,
            "s0" | "gamma" => {
                let m = self
                    .moments
                    .as_mut()
                    .ok_or_else(|| Error::Config(format!("axis {axis} needs a moments section")))?;
                if axis == "s0" {
                    m.s0 = value;
                } else {
                    m.gamma = value;
                }
            }
            other => {
                return Err(Error::Config(format!("unknown sweep axis '{other}'; expected one of {}", AXES.join(", "))))
            }
        }
        Ok(())
    }
}

pub const AXES: &[&str] = &[
    "kappa", "m", "alpha", "mu1", "M0", "M1", "R", "lambda", "mu", "t_end", "dt_max", "cells", "noise", "s0", "gamma",
];

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"n": 3, "R": 1.0, "m": 1.0, "kappa": 0.2,
                  "lambda": {"kind": "constant", "c": 0.0}, "mu": {"kind": "constant", "c": 0.0},
                  "mu1": 1.0, "M0": 1.0, "M1": 0.5, "variant": "JL"},
        "grid": {"cells": 32},
        "stepper": {"scheme": "rk2"},
        "initial": {"kind": "cosine_bump", "base": 1.0, "amplitude": 0.5},
        "t_end": 0.1, "output_every": 0.05
    }"#;

    #[test]
    fn minimal_config_round_trips() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.grid.kind(), GridKind::Uniform);
        let again = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, again);
        let u = cfg.initial_field(cfg.grid.build(&cfg.model).unwrap()).unwrap();
        assert!((u.values[0] - 1.5).abs() < 1e-3);
    }

    #[test]
    fn graded_grid_and_axes() {
        let text = MINIMAL.replace(r#""cells": 32"#, r#""cells": 32, "grading": 0.9"#);
        let mut cfg = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg.grid.kind(), GridKind::GradedToOrigin { ratio: 0.9 });
        cfg.set_axis("kappa", 0.3).unwrap();
        assert_eq!(cfg.model.kappa, 0.3);
        assert!(cfg.set_axis("bogus", 1.0).is_err());
        assert!(cfg.set_axis("s0", 0.5).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let mut cfg = RunConfig::from_json(MINIMAL).unwrap();
        cfg.noise = 0.1;
        let g = cfg.grid.build(&cfg.model).unwrap();
        let a = cfg.initial_field(g.clone()).unwrap();
        let b = cfg.initial_field(g.clone()).unwrap();
        assert_eq!(a.values, b.values);
        cfg.seed = 7;
        assert_ne!(cfg.initial_field(g).unwrap().values, a.values);
    }

    #[test]
    fn invalid_model_is_rejected() {
        let text = MINIMAL.replace(r#""M1": 0.5"#, r#""M1": 2.0"#);
        assert!(matches!(RunConfig::from_json(&text), Err(Error::Config(_))));
    }
}
