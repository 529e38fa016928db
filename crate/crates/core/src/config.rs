//! Experiment configuration files.
//!
//! TOML with sections `[gas]`, `[viscosity]`, `[grid]`, `[perturbation]`,
//! `[time]` and `[run]`; every key is optional and defaults to the weak-shock
//! acceptance configuration. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShockError};
use crate::gas::Shock;
use crate::grid::Grid3;
use crate::par::ExecPolicy;
use crate::profile::Viscosity;
use crate::sim::SimConfig;
use crate::state::{Perturbation, PerturbationShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Profile,
    Verify,
    Poincare,
    Accept,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Profile => "profile",
            Mode::Verify => "verify",
            Mode::Poincare => "poincare",
            Mode::Accept => "accept",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub u1_plus: f64,
}

impl Default for GasSection {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            v_minus: 1.0,
            v_plus: 1.1,
            u1_plus: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViscositySection {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for ViscositySection {
    fn default() -> Self {
        Self {
            mu: 1.0,
            lambda: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub half_length: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_length: 100.0,
            n1: 1024,
            n2: 16,
            n3: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSection {
    pub amplitude: f64,
    /// `gauss-transverse`, `gauss-planar` or `random-modes`.
    pub shape: String,
    pub seed: u64,
    pub center: f64,
    pub support: f64,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        let p = Perturbation::default();
        Self {
            amplitude: p.amplitude,
            shape: p.shape.name().into(),
            seed: 0,
            center: p.center,
            support: p.support,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub cfl: f64,
    pub t_end: f64,
    pub output_stride: Option<usize>,
    pub dt: Option<f64>,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            cfl: 0.9,
            t_end: 50.0,
            output_stride: None,
            dt: None,
        }
    }
}

/// Size of the stability run in `accept` mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityRun {
    /// `N1 = 1024`, `N2 = N3 = 16`, `t_end = 50`.
    Full,
    /// `N1 = 512`, `N2 = N3 = 8`, `t_end = 25`.
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub mode: Option<Mode>,
    pub threads: Option<usize>,
    /// `sequential` forces single-threaded grid loops.
    pub policy: String,
    /// Steps between snapshots; none when absent.
    pub snapshot_stride: Option<usize>,
    /// Initial transient excluded from the monotonicity fraction.
    pub transient: f64,
    pub verify_seed: u64,
    pub poincare_samples: usize,
    pub gn_samples: usize,
    pub stability_run: StabilityRun,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: None,
            threads: None,
            policy: "parallel".into(),
            snapshot_stride: None,
            transient: 5.0,
            verify_seed: 2024,
            poincare_samples: 500,
            gn_samples: 200,
            stability_run: StabilityRun::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gas: GasSection,
    pub viscosity: ViscositySection,
    pub grid: GridSection,
    pub perturbation: PerturbationSection,
    pub time: TimeSection,
    pub run: RunSection,
}

/// 1-based line of a byte offset.
fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the offending line.
    pub fn parse(src: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(src).map_err(|e| ShockError::Parse {
            line: e.span().map(|s| line_of(src, s.start)).unwrap_or(0),
            msg: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::parse(&src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn policy(&self) -> Result<ExecPolicy> {
        match self.run.policy.as_str() {
            "parallel" => Ok(ExecPolicy::Parallel),
            "sequential" => Ok(ExecPolicy::Sequential),
            other => Err(ShockError::config(format!("unknown policy {other:?}"))),
        }
    }

    pub fn shape(&self) -> Result<PerturbationShape> {
        PerturbationShape::parse(&self.perturbation.shape, self.perturbation.seed).ok_or_else(
            || {
                ShockError::config(format!(
                    "unknown perturbation shape {:?}",
                    self.perturbation.shape
                ))
            },
        )
    }

    pub fn shock(&self) -> Result<Shock> {
        let g = &self.gas;
        Shock::new(g.gamma, g.v_minus, g.v_plus, g.u1_plus)
    }

    pub fn viscosity(&self) -> Viscosity {
        Viscosity::new(self.viscosity.mu, self.viscosity.lambda)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let p = &self.perturbation;
        let t = &self.time;
        let g = &self.grid;
        Ok(SimConfig {
            gamma: self.gas.gamma,
            v_minus: self.gas.v_minus,
            v_plus: self.gas.v_plus,
            u1_plus: self.gas.u1_plus,
            viscosity: self.viscosity(),
            grid: Grid3 {
                half_length: g.half_length,
                n1: g.n1,
                n2: g.n2,
                n3: g.n3,
            },
            perturbation: Perturbation {
                amplitude: p.amplitude,
                shape: self.shape()?,
                center: p.center,
                support: p.support,
            },
            cfl: t.cfl,
            t_end: t.t_end,
            output_stride: t.output_stride,
            dt: t.dt,
            policy: self.policy()?,
        })
    }

    /// Re-validates every module-level precondition.
    pub fn validate(&self) -> Result<()> {
        self.shock()?;
        self.sim_config()?.validate()?;
        if self.run.threads == Some(0) {
            return Err(ShockError::config("threads must be at least 1"));
        }
        if self.run.snapshot_stride == Some(0) {
            return Err(ShockError::config("snapshot stride must be at least 1"));
        }
        if !(self.run.transient >= 0.0) {
            return Err(ShockError::config("transient must be non-negative"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_acceptance_default() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c.sim_config().unwrap(), SimConfig::default());
    }

    #[test]
    fn sections_parse() {
        let c = ExperimentConfig::parse(
            "[gas]\nv_plus = 2.0\n\n[grid]\nn1 = 256\nn2 = 4\nn3 = 4\n\n[perturbation]\nshape = \"random-modes\"\nseed = 9\n\n[run]\nmode = \"profile\"\nthreads = 2\n",
        )
        .unwrap();
        assert_eq!(c.gas.v_plus, 2.0);
        assert_eq!(c.run.mode, Some(Mode::Profile));
        assert_eq!(
            c.shape().unwrap(),
            PerturbationShape::RandomModes { seed: 9 }
        );
        let back = ExperimentConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_line() {
        let e = ExperimentConfig::parse("[gas]\ngamma = 2.0\nv_plus = \"x\"\n").unwrap_err();
        assert!(matches!(e, ShockError::Parse { line: 3, .. }), "{e}");
        let e = ExperimentConfig::parse("[grid]\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, ShockError::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ExperimentConfig::parse("[gas]\nv_plus = 0.5\n").is_err());
        assert!(ExperimentConfig::parse("[grid]\nn1 = 8\n").is_err());
        assert!(ExperimentConfig::parse("[perturbation]\nshape = \"square\"\n").is_err());
        assert!(ExperimentConfig::parse("[run]\npolicy = \"gpu\"\n").is_err());
        assert!(ExperimentConfig::parse("[viscosity]\nmu = -1.0\n").is_err());
    }
}
