//! Weight `a(ξ₁) = 1 + (ν/δ)(p(v₋) − p(vˢ(ξ₁)))` and the shift ODE.

use crate::error::{Result, ShockError};
use crate::gas::{GasLaw, Shock};
use crate::grid::Grid3;
use crate::par::{slab_map, ExecPolicy};
use crate::profile::{ProfilePoint, ProfileTable};
use crate::state::FluidState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFn {
    pub nu: f64,
    pub delta: f64,
    p_minus: f64,
    law: GasLaw,
}

impl WeightFn {
    /// Weight with `ν = √δ`.
    pub fn new(shock: &Shock) -> Self {
        let c = shock.constants;
        Self {
            nu: c.nu,
            delta: c.delta,
            p_minus: shock.law.p(shock.states.v_minus),
            law: shock.law,
        }
    }

    /// `(a, a′)` at a profile point.
    #[inline]
    pub fn at(&self, p: &ProfilePoint) -> (f64, f64) {
        let r = self.nu / self.delta;
        (
            1.0 + r * (self.p_minus - self.law.p(p.v)),
            -r * self.law.dp(p.v) * p.dv,
        )
    }
}

/// `(a, a′)` evaluated at `ξ₁ − shift`.
pub fn weight_eval(w: &WeightFn, table: &ProfileTable, xi1: f64, shift: f64) -> (f64, f64) {
    w.at(&table.query_shifted(xi1, shift))
}

/// Profile and weight on one ξ₁-slab, at `ξ₁ − X`.
#[derive(Debug, Clone, Copy)]
pub struct SlabProfile {
    pub point: ProfilePoint,
    pub a: f64,
    pub da: f64,
    pub p: f64,
    pub dp: f64,
}

/// Shifted profile for every ξ₁-slab of the grid.
pub fn slab_profiles(
    grid: &Grid3,
    table: &ProfileTable,
    w: &WeightFn,
    shift: f64,
) -> Vec<SlabProfile> {
    let law = table.shock.law;
    (0..grid.nodes1())
        .map(|i| {
            let point = table.query_shifted(grid.xi1(i), shift);
            let (a, da) = w.at(&point);
            SlabProfile {
                point,
                a,
                da,
                p: law.p(point.v),
                dp: law.dp(point.v),
            }
        })
        .collect()
}

fn check_compatible(state: &FluidState, table: &ProfileTable) -> Result<()> {
    if state.q.len() != state.grid.len() {
        return Err(ShockError::config("state does not match its grid"));
    }
    // Profile derivatives must be negligible where the grid ends, otherwise the
    // localized integrands are cut off.
    let l = state.grid.half_length;
    let edge = table.eval(-l).dv.abs().max(table.eval(l).dv.abs());
    let peak = table.d1_v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if edge > 5e-2 * peak {
        return Err(ShockError::config(format!(
            "grid half-length {l} truncates the profile (|vˢ′| at the edge is {edge:e})"
        )));
    }
    Ok(())
}

/// `Ẋ = −(M/δ)[∫(a/σ*)ρ h₁ˢ′ (p(v) − p(vˢ)) − ∫a ρ p′(vˢ)(v − vˢ)vˢ′]`, all
/// profile quantities at `ξ₁ − X`, trapezoidal in ξ₁ and rectangle rule in ξ′.
pub fn shift_rhs(
    state: &FluidState,
    table: &ProfileTable,
    w: &WeightFn,
    shift: f64,
    policy: ExecPolicy,
) -> Result<f64> {
    check_compatible(state, table)?;
    let grid = state.grid;
    let law = table.shock.law;
    let c = table.shock.constants;
    let slab = grid.slab();
    let parts = slab_map(policy, grid.nodes1(), |i| {
        let pt = table.query_shifted(grid.xi1(i), shift);
        if pt.dv == 0.0 && pt.dh1 == 0.0 {
            return 0.0;
        }
        let (a, _) = w.at(&pt);
        let ps = law.p(pt.v);
        let c1 = a * pt.dh1 / c.sigma_star;
        let c2 = a * law.dp(pt.v) * pt.dv;
        let s: f64 = state.q[i * slab..(i + 1) * slab]
            .iter()
            .map(|q| {
                let rho = q[0];
                let v = 1.0 / rho;
                rho * (c1 * (law.p(v) - ps) - c2 * (v - pt.v))
            })
            .sum();
        grid.weight(i) * s
    });
    let total: f64 = parts.into_iter().sum();
    let xdot = -c.shift_gain / c.delta * total;
    if !xdot.is_finite() {
        return Err(ShockError::Numerical {
            t: f64::NAN,
            msg: "shift velocity is not finite".into(),
        });
    }
    Ok(xdot)
}

/// Shift trajectory point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftState {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
}

impl Default for ShiftState {
    fn default() -> Self {
        Self {
            t: 0.0,
            x: 0.0,
            xdot: 0.0,
        }
    }
}

/// SSP-RK3 step of `Ẋ = rhs(t, X)` alone, with the same stage structure as the
/// flow integrator; `xdot` is the rhs at the completed step.
pub fn shift_step<F>(s: ShiftState, mut rhs: F, dt: f64) -> Result<ShiftState>
where
    F: FnMut(f64, f64) -> f64,
{
    if !(dt > 0.0) {
        return Err(ShockError::config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let nan = |t: f64| ShockError::Numerical {
        t,
        msg: "shift rhs is NaN".into(),
    };
    let k0 = rhs(s.t, s.x);
    if k0.is_nan() {
        return Err(nan(s.t));
    }
    let x1 = s.x + dt * k0;
    let k1 = rhs(s.t + dt, x1);
    if k1.is_nan() {
        return Err(nan(s.t + dt));
    }
    let x2 = 0.75 * s.x + 0.25 * (x1 + dt * k1);
    let k2 = rhs(s.t + 0.5 * dt, x2);
    if k2.is_nan() {
        return Err(nan(s.t + 0.5 * dt));
    }
    let x = s.x / 3.0 + 2.0 / 3.0 * (x2 + dt * k2);
    let t = s.t + dt;
    let xdot = rhs(t, x);
    if xdot.is_nan() {
        return Err(nan(t));
    }
    Ok(ShiftState { t, x, xdot })
}
