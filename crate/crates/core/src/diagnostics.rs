//! a-contraction functionals, perturbation norms, and the weighted entropy
//! balance `dE/dt = ẊY + B − G − D` evaluated on grid states.
//!
//! All integrals use the trapezoidal rule in ξ₁ and the rectangle rule in
//! ξ₂, ξ₃, matching the shift ODE. Derivatives of the solution use the
//! solver's central stencils; derivatives of the shifted profile are analytic.
//! On the two boundary slabs solution gradients are taken as zero.

use std::io::Write;

use crate::error::{Result, ShockError};
use crate::grid::Grid3;
use crate::par::{for_each_slab_mut, slab_map, ExecPolicy};
use crate::profile::{ProfileTable, Viscosity};
use crate::state::FluidState;
use crate::weight::{slab_profiles, ShiftState, WeightFn};

/// `φ = v − vˢ`, `ψ = u − uˢ`, `η = h − hˢ`, `w = p(v) − p(vˢ)`, profile at `ξ₁ − X`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFields {
    pub grid: Grid3,
    pub phi: Vec<f64>,
    pub psi: Vec<[f64; 3]>,
    pub eta: Vec<[f64; 3]>,
    pub w: Vec<f64>,
}

pub fn perturbation_fields(
    state: &FluidState,
    table: &ProfileTable,
    viscosity: Viscosity,
    shift: f64,
    policy: ExecPolicy,
) -> PerturbationFields {
    let g = state.grid;
    let law = table.shock.law;
    let k = viscosity.longitudinal();
    let slab = g.slab();
    let prof: Vec<_> = (0..g.nodes1())
        .map(|i| table.query_shifted(g.xi1(i), shift))
        .collect();
    let phi: Vec<f64> = (0..g.len())
        .map(|n| state.v(n) - prof[n / slab].v)
        .collect();
    let st = g.stencil();
    let mut out = vec![([0.0; 3], [0.0; 3], 0.0); g.len()];
    for_each_slab_mut(policy, &mut out, slab, |i, o| {
        let pt = prof[i];
        for (m, o) in o.iter_mut().enumerate() {
            let n = i * slab + m;
            let v = state.v(n);
            let u = state.u(n);
            let psi = [u[0] - pt.u1, u[1], u[2]];
            let gphi = if g.is_boundary(i) {
                [0.0; 3]
            } else {
                st.grad(&phi, &g.nbr(i, m / g.n3, m % g.n3))
            };
            *o = (
                psi,
                [
                    psi[0] - k * gphi[0],
                    psi[1] - k * gphi[1],
                    psi[2] - k * gphi[2],
                ],
                law.p(v) - law.p(pt.v),
            );
        }
    });
    PerturbationFields {
        grid: g,
        phi,
        psi: out.iter().map(|o| o.0).collect(),
        eta: out.iter().map(|o| o.1).collect(),
        w: out.iter().map(|o| o.2).collect(),
    }
}

/// Discrete Sobolev norms of a multi-component field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SobolevNorms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub sup: f64,
    /// `‖∂₁f‖`, `‖∇f‖`, `‖∇²f‖` separately.
    pub d1: f64,
    pub grad: f64,
    pub hess: f64,
}

/// `‖f‖_{Hᵐ} = (Σ_{l≤m} ‖∇ˡf‖²)^{1/2}` summed over components, with the
/// solver's stencils; `∇²f` counts each mixed derivative twice.
pub fn sobolev_norms(components: &[&[f64]], grid: &Grid3, policy: ExecPolicy) -> SobolevNorms {
    let st = grid.stencil();
    let parts = slab_map(policy, grid.nodes1(), |i| {
        let mut acc = [0.0f64; 5];
        for j in 0..grid.n2 {
            for k in 0..grid.n3 {
                let n = grid.index(i, j, k);
                for f in components {
                    acc[0] += f[n] * f[n];
                    acc[4] = acc[4].max(f[n].abs());
                    if grid.is_boundary(i) {
                        continue;
                    }
                    let nb = grid.nbr(i, j, k);
                    let gr = st.grad(f, &nb);
                    let se = st.second(f, &nb);
                    let mx = st.mixed(f, &nb);
                    acc[1] += gr[0] * gr[0];
                    acc[2] += gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2];
                    acc[3] += se.iter().map(|x| x * x).sum::<f64>()
                        + 2.0 * mx.iter().map(|x| x * x).sum::<f64>();
                }
            }
        }
        let wq = grid.weight(i);
        [wq * acc[0], wq * acc[1], wq * acc[2], wq * acc[3], acc[4]]
    });
    let mut s = [0.0f64; 4];
    let mut sup = 0.0f64;
    for p in parts {
        for c in 0..4 {
            s[c] += p[c];
        }
        sup = sup.max(p[4]);
    }
    SobolevNorms {
        l2: s[0].sqrt(),
        h1: (s[0] + s[2]).sqrt(),
        h2: (s[0] + s[2] + s[3]).sqrt(),
        sup,
        d1: s[1].sqrt(),
        grad: s[2].sqrt(),
        hess: s[3].sqrt(),
    }
}

/// `∫∫ a^{−X} ρ [Q(v|vˢ) + ½|h − hˢ|²]`.
pub fn weighted_relative_entropy(
    state: &FluidState,
    table: &ProfileTable,
    weight: &WeightFn,
    viscosity: Viscosity,
    shift: f64,
    policy: ExecPolicy,
) -> f64 {
    let g = state.grid;
    let law = table.shock.law;
    let f = perturbation_fields(state, table, viscosity, shift, policy);
    let slab = g.slab();
    slab_map(policy, g.nodes1(), |i| {
        let pt = table.query_shifted(g.xi1(i), shift);
        let (a, _) = weight.at(&pt);
        let s: f64 = (i * slab..(i + 1) * slab)
            .map(|n| {
                let e = f.eta[n];
                state.rho(n)
                    * (law.q_rel(state.v(n), pt.v)
                        + 0.5 * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]))
            })
            .sum();
        g.weight(i) * a * s
    })
    .into_iter()
    .sum()
}

/// One output step of the functional suite.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FunctionalRecord {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub e_weighted: f64,
    pub y: [f64; 5],
    pub b: [f64; 9],
    pub g: [f64; 4],
    pub d: f64,
    /// `Ẋ·Y` with `Y = Y₁ + … + Y₅`.
    pub xdot_y: f64,
    pub g2_tilde: f64,
    pub g3_tilde: f64,
    pub g_s: f64,
    pub d_plain: f64,
    /// Part of `D` from the transverse gradient of `w`.
    pub d_transverse: f64,
    /// `−(M/δ)(Y₁ + Y₂)`.
    pub xdot_from_y: f64,
    /// `(M/δ)∫(|Y₁ integrand| + |Y₂ integrand|)`, the scale for the identity check.
    pub xdot_scale: f64,
    pub l2_phi: f64,
    pub l2_psi: f64,
    pub h1: f64,
    pub h2: f64,
    pub sup_norm: f64,
    /// `‖(φ,ψ)‖`, `‖∂₁(φ,ψ)‖`, `‖∇(φ,ψ)‖`, `‖∇²(φ,ψ)‖`.
    pub l2: f64,
    pub d1: f64,
    pub grad: f64,
    pub hess: f64,
    /// Filled by [`entropy_balance_residual`]; NaN where undefined.
    pub balance_residual: f64,
    pub balance_relative: f64,
}

impl FunctionalRecord {
    pub fn y_total(&self) -> f64 {
        self.y.iter().sum()
    }

    pub fn b_total(&self) -> f64 {
        self.b.iter().sum()
    }

    pub fn g_total(&self) -> f64 {
        self.g.iter().sum()
    }

    /// `ẊY + B − G − D`.
    pub fn balance_rhs(&self) -> f64 {
        self.xdot_y + self.b_total() - self.g_total() - self.d
    }

    /// `|Ẋ − (−(M/δ)(Y₁+Y₂))|` relative to the larger of both sides and the integrand scale.
    pub fn xdot_identity_error(&self) -> f64 {
        let scale = self
            .xdot
            .abs()
            .max(self.xdot_from_y.abs())
            .max(self.xdot_scale);
        if scale == 0.0 {
            0.0
        } else {
            (self.xdot - self.xdot_from_y).abs() / scale
        }
    }

    /// Signs that hold for every state.
    pub fn sign_violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let checks = [
            ("E_weighted", self.e_weighted),
            ("D", self.d),
            ("G_s", self.g_s),
            ("G2_tilde", self.g2_tilde),
            ("G3_tilde", self.g3_tilde),
            ("G1", self.g[0]),
            ("G2", self.g[1]),
            ("G3", self.g[2]),
            ("G4", self.g[3]),
        ];
        for (name, x) in checks {
            if x < 0.0 {
                v.push(name);
            }
        }
        v
    }

    pub const CSV_HEADER: &'static str =
        "t,X,Xdot,E_weighted,Y1,Y2,Y3,Y4,Y5,B1,B2,B3,B4,B5,B6,B7,B8,B9,\
G1,G2,G3,G4,D,XdotY,G2_tilde,G3_tilde,G_s,D_plain,D_transverse,Xdot_from_Y,Xdot_scale,\
L2_phi,L2_psi,H1,H2,sup_norm,balance_residual,balance_relative";

    pub fn csv_fields(&self) -> Vec<f64> {
        let mut f = vec![self.t, self.x, self.xdot, self.e_weighted];
        f.extend_from_slice(&self.y);
        f.extend_from_slice(&self.b);
        f.extend_from_slice(&self.g);
        f.extend_from_slice(&[
            self.d,
            self.xdot_y,
            self.g2_tilde,
            self.g3_tilde,
            self.g_s,
            self.d_plain,
            self.d_transverse,
            self.xdot_from_y,
            self.xdot_scale,
            self.l2_phi,
            self.l2_psi,
            self.h1,
            self.h2,
            self.sup_norm,
            self.balance_residual,
            self.balance_relative,
        ]);
        f
    }
}

/// Writes the header and one row per record; `{:e}` round-trips every f64.
pub fn write_csv<W: Write>(mut out: W, records: &[FunctionalRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", FunctionalRecord::CSV_HEADER)?;
    for r in records {
        let row: Vec<String> = r.csv_fields().iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

// Accumulator slots.
const E: usize = 0;
const Y0: usize = 1; // Y1..Y5 -> 1..=5
const B0: usize = 6; // B1..B9 -> 6..=14
const G0: usize = 15; // G1..G4 -> 15..=18
const DD: usize = 19;
const G2T: usize = 20;
const G3T: usize = 21;
const GS: usize = 22;
const DP: usize = 23;
const DT: usize = 24;
const YABS: usize = 25;
const NACC: usize = 26;

/// Evaluates every functional at the state and shift.
pub fn functional_suite(
    state: &FluidState,
    table: &ProfileTable,
    weight: &WeightFn,
    viscosity: Viscosity,
    shift: ShiftState,
    policy: ExecPolicy,
) -> FunctionalRecord {
    let g = state.grid;
    let n = g.len();
    let law = table.shock.law;
    let c = table.shock.constants;
    let (ss, sigma, delta, nu) = (c.sigma_star, c.sigma, c.delta, c.nu);
    let gamma = law.gamma();
    let kk = viscosity.longitudinal();
    let mu = viscosity.mu;
    let x = shift.x;

    // Solution fields in the layout the stencils expect.
    let v: Vec<f64> = state.q.iter().map(|q| 1.0 / q[0]).collect();
    let pv: Vec<f64> = v.iter().map(|&v| law.p(v)).collect();
    let u: [Vec<f64>; 3] = [
        state.q.iter().map(|q| q[1] / q[0]).collect(),
        state.q.iter().map(|q| q[2] / q[0]).collect(),
        state.q.iter().map(|q| q[3] / q[0]).collect(),
    ];
    debug_assert_eq!(v.len(), n);
    let prof = slab_profiles(&g, table, weight, x);
    let slab = g.slab();
    let phi: Vec<f64> = (0..n).map(|m| v[m] - prof[m / slab].point.v).collect();
    let wf: Vec<f64> = (0..n).map(|m| pv[m] - prof[m / slab].p).collect();
    let st = g.stencil();
    // γ⁻¹ P^{−1−1/γ}
    let pinv = |p: f64| p.powf(-1.0 - 1.0 / gamma) / gamma;

    let parts = slab_map(policy, g.nodes1(), |i| {
        let sp = prof[i];
        let pt = sp.point;
        let (a, da) = (sp.a, sp.da);
        let (vs, dvs) = (pt.v, pt.dv);
        let dps_x = sp.dp * dvs; // ∂₁p(vˢ)
        let boundary = g.is_boundary(i);
        let dh1s = pt.dh1;
        let pinv_s = pinv(sp.p);
        let mut acc = [0.0f64; NACC];
        for j in 0..g.n2 {
            for k in 0..g.n3 {
                let m = g.index(i, j, k);
                let rho = state.q[m][0];
                let vn = v[m];
                let un = [u[0][m], u[1][m], u[2][m]];
                let (grad_v, grad_phi, grad_w, ru, curlcurl) = if boundary {
                    ([0.0; 3], [0.0; 3], [0.0; 3], [[0.0; 3]; 3], [0.0; 3])
                } else {
                    let nb = g.nbr(i, j, k);
                    let gu = [
                        st.grad(&u[0], &nb),
                        st.grad(&u[1], &nb),
                        st.grad(&u[2], &nb),
                    ];
                    let (lap, gd) = st.viscous_parts([&u[0], &u[1], &u[2]], &nb);
                    (
                        st.grad(&v, &nb),
                        st.grad(&phi, &nb),
                        st.grad(&wf, &nb),
                        gu,
                        [gd[0] - lap[0], gd[1] - lap[1], gd[2] - lap[2]],
                    )
                };
                // η = ψ − (2μ+λ)∇φ, so hˢ is the stencil image of the sampled profile.
                let eta = [
                    un[0] - pt.u1 - kk * grad_phi[0],
                    un[1] - kk * grad_phi[1],
                    un[2] - kk * grad_phi[2],
                ];
                let h = eta;
                let eta2 = eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2];
                let phi = phi[m];
                let w = wf[m];
                let dphi1 = grad_phi[0];
                let qrel = law.q_rel(vn, vs);
                let prel = law.p_rel(vn, vs);
                let pinv_v = pinv(pv[m]);
                let mflux = state.q[m][1] - sigma * rho + ss; // F
                let ws = w / ss;
                let e1m = eta[0] - ws;

                // R = (2μ+λ)/v (∇u·∇v − div u ∇v) − μ∇×∇×u, (∇u·∇v)_i = Σ_j ∂_i u_j ∂_j v
                let div_u = ru[0][0] + ru[1][1] + ru[2][2];
                let mut r = [0.0; 3];
                for a_ in 0..3 {
                    let gg: f64 = (0..3).map(|b_| ru[b_][a_] * grad_v[b_]).sum();
                    r[a_] = kk / vn * (gg - div_u * grad_v[a_]) - mu * curlcurl[a_];
                }

                let y1i = a / ss * rho * dh1s * w;
                let y2i = -a * rho * sp.dp * phi * dvs;
                acc[E] += a * rho * (qrel + 0.5 * eta2);
                acc[Y0] += y1i;
                acc[Y0 + 1] += y2i;
                acc[Y0 + 2] += a * rho * dh1s * e1m;
                acc[Y0 + 3] += -0.5 * da * rho * e1m * (eta[0] + ws);
                acc[Y0 + 4] += -da * rho * (qrel + 0.5 * (h[1] * h[1] + h[2] * h[2]))
                    - da * rho * ws * ws * 0.5;
                acc[YABS] += y1i.abs() + y2i.abs();

                acc[B0] += da * w * w / (2.0 * ss);
                acc[B0 + 1] += ss * a * prel * dvs;
                acc[B0 + 2] += delta / nu * a / (ss * vn) * da * eta[0] * eta[0];
                acc[B0 + 3] += mflux * da * (qrel + 0.5 * eta2);
                acc[B0 + 4] += a * kk / vn * sp.dp * dvs * dphi1 * (phi - eta[0] / ss);
                acc[B0 + 5] += -kk * a * grad_w[0] * dps_x * (pinv_v - pinv_s);
                acc[B0 + 6] += -kk * da * pinv_v * w * grad_w[0];
                acc[B0 + 7] += -kk * da * w * dps_x * (pinv_v - pinv_s);
                acc[B0 + 8] += a * (eta[0] * r[0] + eta[1] * r[1] + eta[2] * r[2]);

                acc[G0] += ss * da * qrel;
                acc[G0 + 1] += ss * da * 0.5 * (h[1] * h[1] + h[2] * h[2]);
                acc[G0 + 2] += 0.5 * ss * da * e1m * e1m;
                acc[G0 + 3] += a * ss / vn * sp.dp.abs() * dvs * phi * phi;
                let gw_t = grad_w[1] * grad_w[1] + grad_w[2] * grad_w[2];
                let gw2 = grad_w[0] * grad_w[0] + gw_t;
                acc[DD] += kk * a * pinv_v * gw2;
                acc[DT] += kk * a * pinv_v * gw_t;
                acc[G2T] += nu / delta * dvs.abs() * (h[1] * h[1] + h[2] * h[2]);
                acc[G3T] += nu / delta * dvs.abs() * e1m * e1m;
                acc[GS] += dvs.abs() * w * w;
                acc[DP] += gw2;
            }
        }
        let wq = g.weight(i);
        acc.map(|s| wq * s)
    });
    let mut s = [0.0f64; NACC];
    for p in parts {
        for (t, x) in s.iter_mut().zip(p) {
            *t += x;
        }
    }

    let f = perturbation_fields(state, table, viscosity, x, policy);
    let psi: [Vec<f64>; 3] = [
        f.psi.iter().map(|p| p[0]).collect(),
        f.psi.iter().map(|p| p[1]).collect(),
        f.psi.iter().map(|p| p[2]).collect(),
    ];
    let n_phi = sobolev_norms(&[&f.phi], &g, policy);
    let n_psi = sobolev_norms(&[&psi[0], &psi[1], &psi[2]], &g, policy);
    let n_all = sobolev_norms(&[&f.phi, &psi[0], &psi[1], &psi[2]], &g, policy);

    let gain = c.shift_gain / delta;
    let mut y = [0.0; 5];
    y.copy_from_slice(&s[Y0..Y0 + 5]);
    let mut b = [0.0; 9];
    b.copy_from_slice(&s[B0..B0 + 9]);
    let mut gg = [0.0; 4];
    gg.copy_from_slice(&s[G0..G0 + 4]);
    FunctionalRecord {
        t: shift.t,
        x,
        xdot: shift.xdot,
        e_weighted: s[E],
        y,
        b,
        g: gg,
        d: s[DD],
        xdot_y: shift.xdot * y.iter().sum::<f64>(),
        g2_tilde: s[G2T],
        g3_tilde: s[G3T],
        g_s: s[GS],
        d_plain: s[DP],
        d_transverse: s[DT],
        xdot_from_y: -gain * (y[0] + y[1]),
        xdot_scale: gain * s[YABS],
        l2_phi: n_phi.l2,
        l2_psi: n_psi.l2,
        h1: n_all.h1,
        h2: n_all.h2,
        sup_norm: n_all.sup,
        l2: n_all.l2,
        d1: n_all.d1,
        grad: n_all.grad,
        hess: n_all.hess,
        balance_residual: f64::NAN,
        balance_relative: f64::NAN,
    }
}

/// Central-difference `dE/dt` minus `ẊY + B − G − D` at every interior
/// record; fills `balance_residual` (absolute) and `balance_relative`
/// (relative to the largest of `|dE/dt|, |ẊY|, |B|, |G|, |D|`).
pub fn entropy_balance_residual(records: &mut [FunctionalRecord]) -> Result<()> {
    if records.len() < 3 {
        return Err(ShockError::config(
            "balance residual needs at least three records",
        ));
    }
    let dt0 = records[1].t - records[0].t;
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) || (dt - dt0).abs() > 1e-9 * dt0 {
            return Err(ShockError::config(format!(
                "irregular record spacing: {dt} vs {dt0}"
            )));
        }
    }
    let n = records.len();
    for m in 1..n - 1 {
        let de = (records[m + 1].e_weighted - records[m - 1].e_weighted)
            / (records[m + 1].t - records[m - 1].t);
        let r = &mut records[m];
        let res = (de - r.balance_rhs()).abs();
        let scale = [de, r.xdot_y, r.b_total(), r.g_total(), r.d]
            .iter()
            .fold(0.0f64, |s, x| s.max(x.abs()));
        r.balance_residual = res;
        r.balance_relative = if scale > 0.0 { res / scale } else { 0.0 };
    }
    Ok(())
}

/// Large-time trends of a completed run and their pass/fail verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub t_end: f64,
    pub sup_initial: f64,
    pub sup_final: f64,
    pub h2_initial: f64,
    pub h2_final: f64,
    pub xdot_at_1: f64,
    pub xdot_final: f64,
    pub x_over_t_half: f64,
    pub x_over_t_final: f64,
    /// Fraction of consecutive record pairs after the transient with non-increasing E.
    pub monotone_fraction: f64,
    pub sup_pass: bool,
    pub xdot_pass: bool,
    pub shift_growth_pass: bool,
    pub monotone_pass: bool,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.sup_pass && self.xdot_pass && self.shift_growth_pass && self.monotone_pass
    }
}

/// Record closest in time to `t`.
fn at_time(records: &[FunctionalRecord], t: f64) -> &FunctionalRecord {
    records
        .iter()
        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        .expect("non-empty history")
}

/// Perturbation-linear quantities at or below this level count as zero: it
/// is the drift allowed for an unperturbed run, which only sees the steady
/// residual of the discrete profile.
pub const DECAY_NOISE_FLOOR: f64 = 1e-8;

/// `end < start`, or both at the noise floor.
fn decreased(end: f64, start: f64) -> bool {
    end < start || (end <= DECAY_NOISE_FLOOR && start <= DECAY_NOISE_FLOOR)
}

/// Evaluates the decay conditions on a history: `sup(T) ≤ ½ sup(0)`,
/// `|Ẋ(T)| < |Ẋ(1)|`, `|X(T)|/T < |X(T/2)|/(T/2)`, and E non-increasing on
/// at least 95% of record pairs after `transient`. A perturbation whose sup
/// norm is under [`DECAY_NOISE_FLOOR`] is treated as zero.
pub fn decay_report(records: &[FunctionalRecord], transient: f64) -> Result<DecayReport> {
    if records.len() < 2 {
        return Err(ShockError::config("decay report needs a run history"));
    }
    let first = &records[0];
    let last = records.last().unwrap();
    let t_end = last.t;
    let r1 = at_time(records, 1.0);
    let rh = at_time(records, 0.5 * t_end);
    let x_half = if rh.t > 0.0 { rh.x.abs() / rh.t } else { 0.0 };
    let x_end = last.x.abs() / t_end;
    let pairs: Vec<bool> = records
        .windows(2)
        .filter(|w| w[0].t >= transient)
        .map(|w| w[1].e_weighted <= w[0].e_weighted || w[1].sup_norm <= DECAY_NOISE_FLOOR)
        .collect();
    let monotone_fraction = if pairs.is_empty() {
        1.0
    } else {
        pairs.iter().filter(|&&b| b).count() as f64 / pairs.len() as f64
    };
    Ok(DecayReport {
        t_end,
        sup_initial: first.sup_norm,
        sup_final: last.sup_norm,
        h2_initial: first.h2,
        h2_final: last.h2,
        xdot_at_1: r1.xdot,
        xdot_final: last.xdot,
        x_over_t_half: x_half,
        x_over_t_final: x_end,
        monotone_fraction,
        sup_pass: last.sup_norm <= 0.5 * first.sup_norm || last.sup_norm <= DECAY_NOISE_FLOOR,
        xdot_pass: decreased(last.xdot.abs(), r1.xdot.abs()),
        shift_growth_pass: decreased(x_end, x_half),
        monotone_pass: monotone_fraction >= 0.95,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::Shock;
    use crate::profile::{solve_profile, ProfileGrid};
    use crate::state::{init_state, Perturbation, PerturbationShape};
    use crate::weight::shift_rhs;

    fn setup() -> (ProfileTable, WeightFn, Viscosity) {
        let shock = Shock::new(2.0, 1.0, 1.1, 0.0).unwrap();
        let visc = Viscosity::new(1.0, 0.0);
        let t = solve_profile(&shock, visc, ProfileGrid::default()).unwrap();
        (t, WeightFn::new(&shock), visc)
    }

    #[test]
    fn profile_state_functionals_vanish() {
        let (t, w, visc) = setup();
        let grid = Grid3::new(100.0, 256, 4, 4).unwrap();
        let s = init_state(&t, grid, &Perturbation::none()).unwrap();
        let r = functional_suite(
            &s,
            &t,
            &w,
            visc,
            ShiftState::default(),
            ExecPolicy::Sequential,
        );
        // v = 1/(1/vˢ) may differ from vˢ in the last bit.
        let all = r.y.iter().chain(&r.b).chain(&r.g).chain([
            &r.d,
            &r.e_weighted,
            &r.g_s,
            &r.sup_norm,
            &r.h2,
        ]);
        for x in all {
            assert!(x.abs() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn planar_state_has_no_transverse_terms() {
        let (t, w, visc) = setup();
        let grid = Grid3::new(100.0, 256, 4, 4).unwrap();
        let pert = Perturbation {
            shape: PerturbationShape::GaussPlanar,
            ..Perturbation::default()
        };
        let s = init_state(&t, grid, &pert).unwrap();
        let r = functional_suite(
            &s,
            &t,
            &w,
            visc,
            ShiftState::default(),
            ExecPolicy::Sequential,
        );
        assert_eq!(r.g[1], 0.0);
        assert_eq!(r.d_transverse, 0.0);
        assert!(r.e_weighted > 0.0 && r.d > 0.0);
        assert!(r.sign_violations().is_empty());
    }

    #[test]
    fn shift_identity_and_entropy_agree() {
        let (t, w, visc) = setup();
        let grid = Grid3::new(100.0, 256, 4, 4).unwrap();
        let s = init_state(&t, grid, &Perturbation::default()).unwrap();
        let x = 0.3;
        let xdot = shift_rhs(&s, &t, &w, x, ExecPolicy::Parallel).unwrap();
        let r = functional_suite(
            &s,
            &t,
            &w,
            visc,
            ShiftState { t: 0.0, x, xdot },
            ExecPolicy::Parallel,
        );
        assert!(
            r.xdot_identity_error() <= 1e-12,
            "{}",
            r.xdot_identity_error()
        );
        let e = weighted_relative_entropy(&s, &t, &w, visc, x, ExecPolicy::Sequential);
        assert!((e - r.e_weighted).abs() <= 1e-12 * e);
    }

    #[test]
    fn balance_needs_regular_records() {
        let mut recs: Vec<FunctionalRecord> = [0.0, 0.1, 0.2, 0.35]
            .iter()
            .map(|&t| FunctionalRecord {
                t,
                ..Default::default()
            })
            .collect();
        assert!(entropy_balance_residual(&mut recs).is_err());
        assert!(entropy_balance_residual(&mut recs[..3]).is_ok());
        assert_eq!(recs[1].balance_residual, 0.0);
    }

    #[test]
    fn zero_history_passes() {
        let recs: Vec<FunctionalRecord> = (0..20)
            .map(|k| FunctionalRecord {
                t: k as f64,
                ..Default::default()
            })
            .collect();
        assert!(decay_report(&recs, 5.0).unwrap().passed());
    }

    #[test]
    fn csv_header_matches_fields() {
        let r = FunctionalRecord::default();
        assert_eq!(
            FunctionalRecord::CSV_HEADER.split(',').count(),
            r.csv_fields().len()
        );
    }
}
