//! Explicit finite-difference integration of the compressible Navier–Stokes
//! system in the frame moving with the shock speed σ:
//!
//! ```text
//! ∂ₜρ − σ∂₁ρ + div(ρu) = 0
//! ∂ₜ(ρu) − σ∂₁(ρu) + div(ρu⊗u) + ∇p = μΔu + (μ+λ)∇div u
//! ```
//!
//! Second-order central differences on the strip grid, SSP-RK3 in time, and
//! Dirichlet nodes at ξ₁ = ±L that keep their initial values.

use crate::error::{Result, ShockError};
use crate::gas::GasLaw;
use crate::par::{for_each_slab_mut, slab_map, zip_apply, ExecPolicy};
use crate::profile::Viscosity;
use crate::state::FluidState;

/// Coefficients of the moving-frame system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowModel {
    pub law: GasLaw,
    pub viscosity: Viscosity,
    /// Frame speed σ.
    pub sigma: f64,
}

/// Manufactured source `S(ξ, t)` added to the interior right-hand side.
pub type Source<'a> = &'a (dyn Fn([f64; 3], f64) -> [f64; 4] + Sync);

/// Scratch primitive fields `[u₁, u₂, u₃, p]` per node.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    prim: Vec<[f64; 4]>,
}

impl Workspace {
    fn fill(&mut self, model: &FlowModel, state: &FluidState, policy: ExecPolicy) {
        let law = model.law;
        self.prim.resize(state.q.len(), [0.0; 4]);
        zip_apply(policy, &mut self.prim, &state.q, &state.q, |q, _| {
            let v = 1.0 / q[0];
            [q[1] * v, q[2] * v, q[3] * v, law.pressure_of_density(q[0])]
        });
    }
}

/// Writes `∂ₜ(ρ, ρu)` into `out`; boundary slabs get zero rates.
pub fn rhs_eval(
    model: &FlowModel,
    state: &FluidState,
    ws: &mut Workspace,
    out: &mut [[f64; 4]],
    policy: ExecPolicy,
    source: Option<(Source, f64)>,
) {
    let grid = state.grid;
    ws.fill(model, state, policy);
    let w = &ws.prim[..];
    let q = &state.q[..];
    let st = grid.stencil();
    let [h0, h1, h2] = st.half_inv;
    let [s0, s1, s2] = st.inv_sq;
    let [m01, m02, m12] = st.quarter_inv;
    let sigma = model.sigma;
    let mu = model.viscosity.mu;
    let ml = model.viscosity.mu + model.viscosity.lambda;
    for_each_slab_mut(policy, out, grid.slab(), |i, out| {
        if grid.is_boundary(i) {
            out.fill([0.0; 4]);
            return;
        }
        for j in 0..grid.n2 {
            for k in 0..grid.n3 {
                let nb = grid.nbr(i, j, k);
                let (qxp, qxm, qyp, qym, qzp, qzm) =
                    (q[nb.xp], q[nb.xm], q[nb.yp], q[nb.ym], q[nb.zp], q[nb.zm]);
                let (wc, wxp, wxm, wyp, wym, wzp, wzm) = (
                    w[nb.c], w[nb.xp], w[nb.xm], w[nb.yp], w[nb.ym], w[nb.zp], w[nb.zm],
                );
                // Mixed differences of u₁, u₂, u₃ over the (1,2), (1,3), (2,3) planes.
                let (a, b, c, d) = (w[nb.xpyp], w[nb.xpym], w[nb.xmyp], w[nb.xmym]);
                let d12 = |m: usize| (a[m] - b[m] - c[m] + d[m]) * m01;
                let (a, b, c, d) = (w[nb.xpzp], w[nb.xpzm], w[nb.xmzp], w[nb.xmzm]);
                let d13 = |m: usize| (a[m] - b[m] - c[m] + d[m]) * m02;
                let (a, b, c, d) = (w[nb.ypzp], w[nb.ypzm], w[nb.ymzp], w[nb.ymzm]);
                let d23 = |m: usize| (a[m] - b[m] - c[m] + d[m]) * m12;
                let sec = |m: usize| {
                    let c2 = 2.0 * wc[m];
                    [
                        (wxp[m] - c2 + wxm[m]) * s0,
                        (wyp[m] - c2 + wym[m]) * s1,
                        (wzp[m] - c2 + wzm[m]) * s2,
                    ]
                };
                let (e0, e1, e2) = (sec(0), sec(1), sec(2));
                // μΔu + (μ+λ)∇div u, diagonal parts of ∇div u compact.
                let visc = [
                    mu * (e0[0] + e0[1] + e0[2]) + ml * (e0[0] + d12(1) + d13(2)),
                    mu * (e1[0] + e1[1] + e1[2]) + ml * (e1[1] + d12(0) + d23(2)),
                    mu * (e2[0] + e2[1] + e2[2]) + ml * (e2[2] + d13(0) + d23(1)),
                ];
                let grad_p = [
                    (wxp[3] - wxm[3]) * h0,
                    (wyp[3] - wym[3]) * h1,
                    (wzp[3] - wzm[3]) * h2,
                ];

                let mut r = [0.0; 4];
                r[0] = sigma * (qxp[0] - qxm[0]) * h0
                    - ((qxp[1] - qxm[1]) * h0 + (qyp[2] - qym[2]) * h1 + (qzp[3] - qzm[3]) * h2);
                for c in 1..4 {
                    let conv = (qxp[c] * wxp[0] - qxm[c] * wxm[0]) * h0
                        + (qyp[c] * wyp[1] - qym[c] * wym[1]) * h1
                        + (qzp[c] * wzp[2] - qzm[c] * wzm[2]) * h2;
                    r[c] = sigma * (qxp[c] - qxm[c]) * h0 - conv - grad_p[c - 1] + visc[c - 1];
                }
                if let Some((src, t)) = source {
                    let s = src([grid.xi1(i), grid.xi2(j), grid.xi3(k)], t);
                    for c in 0..4 {
                        r[c] += s[c];
                    }
                }
                out[j * grid.n3 + k] = r;
            }
        }
    });
}

/// Net mass inflow rate implied by the discrete scheme,
/// `−∫_{T²} [½(f_N + f_{N−1}) − ½(f_1 + f_0)]` with `f = ρu₁ − σρ`.
pub fn boundary_mass_flux(state: &FluidState, sigma: f64) -> f64 {
    let g = state.grid;
    let s = g.slab();
    let f = |i: usize| -> f64 {
        state.q[i * s..(i + 1) * s]
            .iter()
            .map(|q| q[1] - sigma * q[0])
            .sum()
    };
    let area = g.dx2() * g.dx3();
    -area * (0.5 * (f(g.n1) + f(g.n1 - 1)) - 0.5 * (f(1) + f(0)))
}

/// Continuum boundary flux `−∫_{T²} (ρu₁ − σρ)|_{−L}^{L}` from the end nodes only.
pub fn endpoint_mass_flux(state: &FluidState, sigma: f64) -> f64 {
    let g = state.grid;
    let s = g.slab();
    let f = |i: usize| -> f64 {
        state.q[i * s..(i + 1) * s]
            .iter()
            .map(|q| q[1] - sigma * q[0])
            .sum()
    };
    -g.dx2() * g.dx3() * (f(g.n1) - f(0))
}

/// `cfl · min(dx_a/(|u_a − σδ_{a1}| + c), dx_min² ρ_min / (2(2μ+λ)·3))`.
pub fn cfl_dt(model: &FlowModel, state: &FluidState, cfl: f64, policy: ExecPolicy) -> f64 {
    let g = state.grid;
    let dx = g.spacings();
    let slab = g.slab();
    let parts = slab_map(policy, g.nodes1(), |i| {
        let mut adv = f64::INFINITY;
        let mut rho_min = f64::INFINITY;
        for q in &state.q[i * slab..(i + 1) * slab] {
            let c = model.law.sound_speed(q[0]);
            let u = [q[1] / q[0] - model.sigma, q[2] / q[0], q[3] / q[0]];
            for a in 0..3 {
                adv = adv.min(dx[a] / (u[a].abs() + c));
            }
            rho_min = rho_min.min(q[0]);
        }
        (adv, rho_min)
    });
    let (adv, rho_min) = parts
        .into_iter()
        .fold((f64::INFINITY, f64::INFINITY), |a, b| {
            (a.0.min(b.0), a.1.min(b.1))
        });
    let dmin = dx[0].min(dx[1]).min(dx[2]);
    let visc = dmin * dmin * rho_min / (2.0 * model.viscosity.longitudinal() * 3.0);
    cfl * adv.min(visc)
}

/// `h = u − (2μ+λ)∇v` with central stencils; `∇v = 0` on the boundary slabs.
pub fn effective_velocity(
    state: &FluidState,
    viscosity: Viscosity,
    policy: ExecPolicy,
) -> Vec<[f64; 3]> {
    let g = state.grid;
    let k = viscosity.longitudinal();
    let st = g.stencil();
    let mut h = vec![[0.0; 3]; g.len()];
    let q = &state.q;
    for_each_slab_mut(policy, &mut h, g.slab(), |i, out| {
        for j in 0..g.n2 {
            for kk in 0..g.n3 {
                let n = g.index(i, j, kk);
                let u = state.u(n);
                let grad = if g.is_boundary(i) {
                    [0.0; 3]
                } else {
                    let nb = g.nbr(i, j, kk);
                    [
                        st.d_with(0, &nb, |m| 1.0 / q[m][0]),
                        st.d_with(1, &nb, |m| 1.0 / q[m][0]),
                        st.d_with(2, &nb, |m| 1.0 / q[m][0]),
                    ]
                };
                out[j * g.n3 + kk] = [u[0] - k * grad[0], u[1] - k * grad[1], u[2] - k * grad[2]];
            }
        }
    });
    h
}

/// SSP-RK3 integrator for the flow coupled to a scalar shift ODE.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub model: FlowModel,
    pub policy: ExecPolicy,
    ws: Workspace,
    stage: Vec<[f64; 4]>,
    rate: Vec<[f64; 4]>,
}

/// Bookkeeping of one completed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Mass entering through the ξ₁ boundaries during the step.
    pub boundary_mass: f64,
}

impl Stepper {
    pub fn new(model: FlowModel, policy: ExecPolicy) -> Self {
        Self {
            model,
            policy,
            ws: Workspace::default(),
            stage: Vec::new(),
            rate: Vec::new(),
        }
    }

    /// Right-hand side at `state`, for callers that need it directly.
    pub fn rhs(&mut self, state: &FluidState, source: Option<(Source, f64)>) -> Vec<[f64; 4]> {
        let mut out = vec![[0.0; 4]; state.q.len()];
        rhs_eval(
            &self.model,
            state,
            &mut self.ws,
            &mut out,
            self.policy,
            source,
        );
        out
    }

    /// Advances `state` and the shift `x` by `dt`.
    ///
    /// `shift_rhs(stage_state, stage_x)` is called once per stage; the
    /// shift is advanced with the same weights as the flow.
    pub fn step<F>(
        &mut self,
        state: &mut FluidState,
        t: f64,
        dt: f64,
        x: &mut f64,
        mut shift_rhs: F,
        source: Option<Source>,
    ) -> Result<StepReport>
    where
        F: FnMut(&FluidState, f64) -> Result<f64>,
    {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ShockError::config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let n = state.q.len();
        self.rate.resize(n, [0.0; 4]);
        let sigma = self.model.sigma;
        let policy = self.policy;
        let src = |s: f64| source.map(|f| (f, t + s * dt));

        // Stage 1: q1 = q + dt L(q)
        rhs_eval(
            &self.model,
            state,
            &mut self.ws,
            &mut self.rate,
            policy,
            src(0.0),
        );
        let f0 = boundary_mass_flux(state, sigma);
        let k0 = shift_rhs(state, *x)?;
        let x1 = *x + dt * k0;
        let mut stage = FluidState {
            grid: state.grid,
            q: std::mem::take(&mut self.stage),
        };
        stage.q.resize(n, [0.0; 4]);
        zip_apply(policy, &mut stage.q, &state.q, &self.rate, |q, r| {
            [
                q[0] + dt * r[0],
                q[1] + dt * r[1],
                q[2] + dt * r[2],
                q[3] + dt * r[3],
            ]
        });

        // Stage 2: q2 = 3/4 q + 1/4 (q1 + dt L(q1))
        rhs_eval(
            &self.model,
            &stage,
            &mut self.ws,
            &mut self.rate,
            policy,
            src(1.0),
        );
        let f1 = boundary_mass_flux(&stage, sigma);
        let k1 = shift_rhs(&stage, x1)?;
        let x2 = 0.75 * *x + 0.25 * (x1 + dt * k1);
        combine(policy, &mut stage.q, &state.q, &self.rate, 0.75, 0.25, dt);

        // Stage 3: q = 1/3 q + 2/3 (q2 + dt L(q2))
        rhs_eval(
            &self.model,
            &stage,
            &mut self.ws,
            &mut self.rate,
            policy,
            src(0.5),
        );
        let f2 = boundary_mass_flux(&stage, sigma);
        let k2 = shift_rhs(&stage, x2)?;
        let new_x = *x / 3.0 + 2.0 / 3.0 * (x2 + dt * k2);
        combine(
            policy,
            &mut stage.q,
            &state.q,
            &self.rate,
            1.0 / 3.0,
            2.0 / 3.0,
            dt,
        );

        std::mem::swap(&mut state.q, &mut stage.q);
        self.stage = stage.q;
        *x = new_x;

        let t_new = t + dt;
        if !new_x.is_finite() {
            return Err(ShockError::Numerical {
                t: t_new,
                msg: "shift became non-finite".into(),
            });
        }
        let rho_min = state.min_density();
        if !(rho_min > 0.0) || !rho_min.is_finite() {
            return Err(ShockError::Numerical {
                t: t_new,
                msg: format!("density lost positivity (min {rho_min})"),
            });
        }
        Ok(StepReport {
            boundary_mass: dt * (f0 / 6.0 + f1 / 6.0 + 2.0 / 3.0 * f2),
        })
    }
}

/// `s ← a·q + b·(s + dt·r)`.
fn combine(
    policy: ExecPolicy,
    s: &mut [[f64; 4]],
    q: &[[f64; 4]],
    r: &[[f64; 4]],
    a: f64,
    b: f64,
    dt: f64,
) {
    let slab = 4096;
    for_each_slab_mut(policy, s, slab, |c, out| {
        let off = c * slab;
        for (m, o) in out.iter_mut().enumerate() {
            let (qq, rr) = (q[off + m], r[off + m]);
            for l in 0..4 {
                o[l] = a * qq[l] + b * (o[l] + dt * rr[l]);
            }
        }
    });
}

/// Largest ξ₁ boundary-layer deviation from the initial data, over the outer
/// 5% of the domain on each side.
pub fn boundary_activity(state: &FluidState, initial: &FluidState) -> f64 {
    let g = state.grid;
    let s = g.slab();
    let band = (g.n1 / 20).max(1);
    (0..g.nodes1())
        .filter(|&i| i <= band || i + band >= g.n1)
        .flat_map(|i| i * s..(i + 1) * s)
        .map(|n| {
            let (a, b) = (state.q[n], initial.q[n]);
            (0..4).map(|c| (a[c] - b[c]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid3;

    fn model() -> FlowModel {
        FlowModel {
            law: GasLaw::new(2.0).unwrap(),
            viscosity: Viscosity::new(1.0, 0.0),
            sigma: 1.3,
        }
    }

    #[test]
    fn constant_state_has_zero_rhs() {
        let g = Grid3::new(10.0, 64, 4, 4).unwrap();
        let s = FluidState::uniform(g, 1.2, [0.3, -0.1, 0.2]);
        let mut st = Stepper::new(model(), ExecPolicy::Sequential);
        let r = st.rhs(&s, None);
        assert!(r.iter().flatten().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn policies_agree_bitwise() {
        let g = Grid3::new(10.0, 64, 4, 6).unwrap();
        let mut s = FluidState::uniform(g, 1.0, [0.0; 3]);
        for (n, q) in s.q.iter_mut().enumerate() {
            let x = n as f64 * 0.01;
            *q = [
                1.0 + 0.1 * x.sin(),
                0.2 * x.cos(),
                0.1 * (2.0 * x).sin(),
                0.05,
            ];
        }
        let a = Stepper::new(model(), ExecPolicy::Parallel).rhs(&s, None);
        let b = Stepper::new(model(), ExecPolicy::Sequential).rhs(&s, None);
        assert_eq!(a, b);
    }

    #[test]
    fn parabolic_dt_scaling() {
        let m = FlowModel {
            viscosity: Viscosity::new(50.0, 0.0),
            ..model()
        };
        let s1 = FluidState::uniform(Grid3::new(1.0, 64, 8, 8).unwrap(), 1.0, [0.0; 3]);
        let s2 = FluidState::uniform(Grid3::new(1.0, 128, 16, 16).unwrap(), 1.0, [0.0; 3]);
        let r = cfl_dt(&m, &s1, 0.5, ExecPolicy::Sequential)
            / cfl_dt(&m, &s2, 0.5, ExecPolicy::Sequential);
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn acoustic_limit() {
        let m = FlowModel {
            viscosity: Viscosity::new(1e-12, 0.0),
            sigma: 0.0,
            ..model()
        };
        let s = FluidState::uniform(Grid3::new(32.0, 64, 4, 4).unwrap(), 1.0, [0.0; 3]);
        let dt = cfl_dt(&m, &s, 0.8, ExecPolicy::Sequential);
        let c = 2.0f64.sqrt();
        assert!((dt - 0.8 * 0.25 / c).abs() < 1e-14);
    }

    #[test]
    fn uniform_state_h_equals_u() {
        let s = FluidState::uniform(Grid3::new(10.0, 64, 4, 4).unwrap(), 2.0, [0.5, 0.25, -1.0]);
        let h = effective_velocity(&s, Viscosity::new(1.0, 0.5), ExecPolicy::Sequential);
        assert!(h.iter().all(|h| (h[0] - 0.5).abs() < 1e-15
            && (h[1] - 0.25).abs() < 1e-15
            && (h[2] + 1.0).abs() < 1e-15));
    }
}
