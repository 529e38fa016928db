//! Run driver: profile, initial data, coupled flow/shift stepping, mass
//! accounting and periodic functional records.

use crate::diagnostics::{functional_suite, FunctionalRecord};
use crate::error::{Result, ShockError};
use crate::gas::Shock;
use crate::grid::Grid3;
use crate::par::ExecPolicy;
use crate::profile::{solve_profile, ProfileGrid, ProfileTable, Viscosity};
use crate::solver::{boundary_activity, cfl_dt, FlowModel, Stepper};
use crate::state::{init_state, FluidState, Perturbation};
use crate::weight::{shift_rhs, ShiftState, WeightFn};

/// Upper bound on records per run when no stride is given.
pub const MAX_RECORDS: usize = 10_000;

/// Safety factor applied to the CFL step of the initial state.
pub const DT_SAFETY: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub gamma: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub u1_plus: f64,
    pub viscosity: Viscosity,
    pub grid: Grid3,
    pub perturbation: Perturbation,
    pub cfl: f64,
    pub t_end: f64,
    /// Steps between records; `None` picks one giving at most [`MAX_RECORDS`].
    pub output_stride: Option<usize>,
    /// Fixed time step; `None` derives it from the CFL condition.
    pub dt: Option<f64>,
    pub policy: ExecPolicy,
}

impl Default for SimConfig {
    /// The weak-shock acceptance configuration.
    fn default() -> Self {
        Self {
            gamma: 2.0,
            v_minus: 1.0,
            v_plus: 1.1,
            u1_plus: 0.0,
            viscosity: Viscosity::new(1.0, 0.0),
            grid: Grid3 {
                half_length: 100.0,
                n1: 1024,
                n2: 16,
                n3: 16,
            },
            perturbation: Perturbation::default(),
            cfl: 0.9,
            t_end: 50.0,
            output_stride: None,
            dt: None,
            policy: ExecPolicy::Parallel,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.viscosity.validate_physical()?;
        self.grid.validate()?;
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(ShockError::config(format!(
                "cfl must be positive, got {}",
                self.cfl
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ShockError::config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.output_stride == Some(0) {
            return Err(ShockError::config("output stride must be at least 1"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ShockError::config(format!("dt must be positive, got {dt}")));
            }
        }
        let p = &self.perturbation;
        if !p.amplitude.is_finite() || !(p.support > 0.0) {
            return Err(ShockError::config(
                "perturbation amplitude must be finite and support positive",
            ));
        }
        Ok(())
    }
}

pub struct Simulation {
    pub config: SimConfig,
    pub shock: Shock,
    pub table: ProfileTable,
    pub weight: WeightFn,
    pub state: FluidState,
    pub initial: FluidState,
    pub shift: ShiftState,
    pub dt: f64,
    pub steps: usize,
    pub total_steps: usize,
    pub stride: usize,
    stepper: Stepper,
    mass0: f64,
    boundary_mass: f64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let shock = Shock::new(config.gamma, config.v_minus, config.v_plus, config.u1_plus)?;
        let table = solve_profile(&shock, config.viscosity, ProfileGrid::default())?;
        let weight = WeightFn::new(&shock);
        let state = init_state(&table, config.grid, &config.perturbation)?;
        let model = FlowModel {
            law: shock.law,
            viscosity: config.viscosity,
            sigma: shock.constants.sigma,
        };
        let dt_max = cfl_dt(&model, &state, config.cfl, config.policy);
        let dt_target = config.dt.unwrap_or(DT_SAFETY * dt_max);
        if dt_target > dt_max {
            return Err(ShockError::config(format!(
                "dt {dt_target} exceeds the CFL limit {dt_max}"
            )));
        }
        // Land exactly on t_end with a whole number of record intervals.
        // The tolerance keeps an exact divisor of t_end from gaining a step.
        let min_steps = ((config.t_end / dt_target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let stride = config
            .output_stride
            .unwrap_or_else(|| min_steps.div_ceil(MAX_RECORDS).max(1));
        let total_steps = min_steps.div_ceil(stride) * stride;
        let dt = config.t_end / total_steps as f64;
        let xdot = shift_rhs(&state, &table, &weight, 0.0, config.policy)?;
        let mass0 = state.total_mass();
        Ok(Self {
            stepper: Stepper::new(model, config.policy),
            shift: ShiftState {
                t: 0.0,
                x: 0.0,
                xdot,
            },
            initial: state.clone(),
            config,
            shock,
            table,
            weight,
            state,
            dt,
            steps: 0,
            total_steps,
            stride,
            mass0,
            boundary_mass: 0.0,
        })
    }

    pub fn model(&self) -> FlowModel {
        self.stepper.model
    }

    pub fn time(&self) -> f64 {
        self.shift.t
    }

    pub fn done(&self) -> bool {
        self.steps >= self.total_steps
    }

    /// One coupled SSP-RK3 step.
    pub fn step(&mut self) -> Result<()> {
        let (table, weight, policy) = (&self.table, &self.weight, self.config.policy);
        let t = self.shift.t;
        let mut x = self.shift.x;
        let rep = self.stepper.step(
            &mut self.state,
            t,
            self.dt,
            &mut x,
            |s, xx| shift_rhs(s, table, weight, xx, policy),
            None,
        )?;
        self.steps += 1;
        self.boundary_mass += rep.boundary_mass;
        let t_new = if self.steps == self.total_steps {
            self.config.t_end
        } else {
            self.steps as f64 * self.dt
        };
        let xdot = shift_rhs(&self.state, table, weight, x, policy).map_err(|e| {
            ShockError::Numerical {
                t: t_new,
                msg: e.to_string(),
            }
        })?;
        self.shift = ShiftState { t: t_new, x, xdot };
        Ok(())
    }

    /// Functionals at the current state.
    pub fn record(&self) -> FunctionalRecord {
        functional_suite(
            &self.state,
            &self.table,
            &self.weight,
            self.config.viscosity,
            self.shift,
            self.config.policy,
        )
    }

    /// `|M(t) − M(0) − ∫ boundary inflow|`.
    pub fn mass_balance_error(&self) -> f64 {
        (self.state.total_mass() - self.mass0 - self.boundary_mass).abs()
    }

    pub fn initial_mass(&self) -> f64 {
        self.mass0
    }

    pub fn boundary_activity(&self) -> f64 {
        boundary_activity(&self.state, &self.initial)
    }

    /// Rejects the fixed step once it exceeds the CFL limit of the current state.
    pub fn check_cfl(&self) -> Result<()> {
        let lim = cfl_dt(
            &self.stepper.model,
            &self.state,
            self.config.cfl,
            self.config.policy,
        );
        if self.dt > lim {
            return Err(ShockError::Numerical {
                t: self.time(),
                msg: format!("CFL violated: dt {} exceeds {}", self.dt, lim),
            });
        }
        Ok(())
    }

    /// Steps to `t_end`, recording every `stride` steps (and at the start and
    /// end). `on_record` sees each record as it is produced.
    pub fn run<F>(&mut self, mut on_record: F) -> Result<Vec<FunctionalRecord>>
    where
        F: FnMut(&Simulation, &FunctionalRecord) -> Result<()>,
    {
        let mut records = Vec::new();
        let r = self.record();
        on_record(self, &r)?;
        records.push(r);
        while !self.done() {
            self.step()?;
            if self.steps.is_multiple_of(self.stride) || self.done() {
                self.check_cfl()?;
                let r = self.record();
                on_record(self, &r)?;
                records.push(r);
            }
        }
        Ok(records)
    }
}

/// Max-norm distance between two states on the same grid.
pub fn max_difference(a: &FluidState, b: &FluidState) -> f64 {
    a.q.iter()
        .zip(&b.q)
        .map(|(x, y)| (0..4).map(|c| (x[c] - y[c]).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            grid: Grid3 {
                half_length: 100.0,
                n1: 128,
                n2: 4,
                n3: 4,
            },
            t_end: 0.5,
            policy: ExecPolicy::Sequential,
            ..SimConfig::default()
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Simulation::new(SimConfig {
            cfl: 0.0,
            ..small()
        })
        .is_err());
        assert!(Simulation::new(SimConfig {
            output_stride: Some(0),
            ..small()
        })
        .is_err());
        assert!(Simulation::new(SimConfig {
            viscosity: Viscosity::new(0.0, 0.0),
            ..small()
        })
        .is_err());
        assert!(Simulation::new(SimConfig {
            dt: Some(10.0),
            ..small()
        })
        .is_err());
    }

    #[test]
    fn lands_on_t_end_and_conserves_mass() {
        let mut sim = Simulation::new(small()).unwrap();
        let recs = sim.run(|_, _| Ok(())).unwrap();
        assert_eq!(sim.time(), 0.5);
        assert_eq!(recs.last().unwrap().t, 0.5);
        assert!(
            sim.mass_balance_error() < 1e-11,
            "{}",
            sim.mass_balance_error()
        );
        assert!(recs.iter().all(|r| r.sign_violations().is_empty()));
    }
}
