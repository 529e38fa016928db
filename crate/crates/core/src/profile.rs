//! Viscous shock profile: the traveling wave connecting the two end states.
//!
//! Integrating the momentum equation of the profile system once and
//! eliminating `u₁ˢ` through `u₁ˢ − u₁₋ = −σ*(vˢ − v₋)` leaves the scalar ODE
//!
//! ```text
//! (2μ+λ) σ* vˢ′ = g(vˢ),   g(v) = −σ*²(v − v₋) − (p(v) − p(v₋)),
//! ```
//!
//! which is integrated outward from `vˢ(0) = (v₋+v₊)/2`. Each side is
//! integrated in its deviation from the end state it approaches, so the
//! exponentially small tails keep full relative precision.

use std::io::Write;

use crate::error::{Result, ShockError};
use crate::gas::Shock;
use crate::ode::{dopri45, Tolerance};

/// Shear and bulk viscosity coefficients `(μ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viscosity {
    pub mu: f64,
    pub lambda: f64,
}

impl Viscosity {
    pub fn new(mu: f64, lambda: f64) -> Self {
        Self { mu, lambda }
    }

    /// `2μ + λ`.
    #[inline]
    pub fn longitudinal(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// `μ > 0` and `2μ + 3λ ≥ 0`.
    pub fn validate_physical(&self) -> Result<()> {
        if !(self.mu > 0.0) || !(2.0 * self.mu + 3.0 * self.lambda >= 0.0) {
            return Err(ShockError::config(format!(
                "viscosities violate mu > 0, 2mu + 3lambda >= 0: mu = {}, lambda = {}",
                self.mu, self.lambda
            )));
        }
        Ok(())
    }
}

/// Resolution of the profile table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub spacing: f64,
    /// Half-length of the table; `None` picks the default from the decay scale.
    pub half_length: Option<f64>,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        Self {
            spacing: 1.0 / 32.0,
            half_length: None,
        }
    }
}

/// Profile quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub v: f64,
    pub u1: f64,
    pub h1: f64,
    pub dv: f64,
    pub du1: f64,
    pub dh1: f64,
    pub d2v: f64,
}

/// Tabulated profile on a uniform grid over `[−L, L]`.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub shock: Shock,
    pub viscosity: Viscosity,
    pub xi_grid: Vec<f64>,
    pub v_s: Vec<f64>,
    pub u1_s: Vec<f64>,
    pub h1_s: Vec<f64>,
    pub d1_v: Vec<f64>,
    pub d2_v: Vec<f64>,
    pub d3_v: Vec<f64>,
    pub d1_u1: Vec<f64>,
    pub d2_u1: Vec<f64>,
    pub d3_u1: Vec<f64>,
    /// `v − v₋` left of the center node, `v₊ − v` from the center node on.
    pub tail_gap: Vec<f64>,
    pub normalization_point: f64,
    spacing: f64,
    half_length: f64,
    center: usize,
    /// Set when the tails are not resolved to the requested depth.
    pub tail_warning: Option<String>,
}

/// Reduced profile ODE written in the deviation from one end state.
#[derive(Debug, Clone, Copy)]
struct ReducedOde {
    gamma: f64,
    sigma_star_sq: f64,
    /// `(2μ+λ) σ*`.
    k: f64,
    v_minus: f64,
    v_plus: f64,
    p_minus: f64,
    p_plus: f64,
}

impl ReducedOde {
    fn new(shock: &Shock, visc: Viscosity) -> Self {
        let s = &shock.states;
        Self {
            gamma: shock.law.gamma(),
            sigma_star_sq: shock.constants.sigma_star.powi(2),
            k: visc.longitudinal() * shock.constants.sigma_star,
            v_minus: s.v_minus,
            v_plus: s.v_plus,
            p_minus: shock.law.p(s.v_minus),
            p_plus: shock.law.p(s.v_plus),
        }
    }

    /// `g` at `v = v₋ + y`.
    fn g_left(&self, y: f64) -> f64 {
        let dp = self.p_minus * (-self.gamma * (y / self.v_minus).ln_1p()).exp_m1();
        -self.sigma_star_sq * y - dp
    }

    /// `g` at `v = v₊ − y`, using the Rankine–Hugoniot relation to re-center.
    fn g_right(&self, y: f64) -> f64 {
        let dp = self.p_plus * (-self.gamma * (-y / self.v_plus).ln_1p()).exp_m1();
        self.sigma_star_sq * y - dp
    }

    fn g(&self, v: f64) -> f64 {
        let mid = 0.5 * (self.v_minus + self.v_plus);
        if v <= mid {
            self.g_left(v - self.v_minus)
        } else {
            self.g_right(self.v_plus - v)
        }
    }
}

/// Decay rates of the linearized reduced ODE at `v₋` and `v₊`.
pub fn linearized_decay_rates(shock: &Shock, visc: Viscosity) -> (f64, f64) {
    let law = &shock.law;
    let s = &shock.states;
    let ss = shock.constants.sigma_star;
    let k = visc.longitudinal() * ss;
    let left = (ss * ss + law.dp(s.v_minus)) / (-k);
    let right = (ss * ss + law.dp(s.v_plus)) / k;
    (left, right)
}

/// Default table half-length `40/(σ*δ/(2μ+λ))`, clamped to `[50, 5000]`.
pub fn default_half_length(shock: &Shock, visc: Viscosity) -> f64 {
    let scale = shock.constants.sigma_star * shock.constants.delta / visc.longitudinal();
    (40.0 / scale).clamp(50.0, 5000.0)
}

/// Solves the profile ODE and tabulates the profile with its derivatives.
pub fn solve_profile(
    shock: &Shock,
    viscosity: Viscosity,
    grid: ProfileGrid,
) -> Result<ProfileTable> {
    let bulk = viscosity.longitudinal();
    if !(bulk > 0.0) {
        return Err(ShockError::config(format!(
            "2mu + lambda must be positive, got {bulk}"
        )));
    }
    if !(grid.spacing > 0.0) {
        return Err(ShockError::config("profile spacing must be positive"));
    }
    let ode = ReducedOde::new(shock, viscosity);
    let requested = grid
        .half_length
        .unwrap_or_else(|| default_half_length(shock, viscosity));
    let n_half = (requested / grid.spacing).ceil() as usize;
    let h = grid.spacing;
    let half_length = n_half as f64 * h;
    let n = 2 * n_half + 1;

    let tol = Tolerance {
        rtol: 1e-12,
        atol: 1e-300,
    };
    let mut gap = vec![0.0; n];
    let y_mid = 0.5 * (ode.v_plus - ode.v_minus);

    // Left side: y = v − v₋, integrated toward ξ → −∞.
    gap[n_half] = y_mid;
    let mut y = y_mid;
    let mut h_hint = h;
    for i in (0..n_half).rev() {
        let x0 = (i + 1) as f64 * h - half_length;
        let x1 = i as f64 * h - half_length;
        y = dopri45(|_, y| ode.g_left(y) / ode.k, x0, y, x1, tol, &mut h_hint)?;
        if !(y > 0.0) || y >= 2.0 * y_mid {
            return Err(ShockError::ProfileSolver(format!(
                "left branch left (v-, v+) at xi = {x1}"
            )));
        }
        gap[i] = y;
    }
    // Right side: y = v₊ − v, integrated toward ξ → +∞.
    let mut y = y_mid;
    let mut h_hint = h;
    for i in n_half + 1..n {
        let x0 = (i - 1) as f64 * h - half_length;
        let x1 = i as f64 * h - half_length;
        y = dopri45(|_, y| -ode.g_right(y) / ode.k, x0, y, x1, tol, &mut h_hint)?;
        if !(y > 0.0) || y >= 2.0 * y_mid {
            return Err(ShockError::ProfileSolver(format!(
                "right branch left (v-, v+) at xi = {x1}"
            )));
        }
        gap[i] = y;
    }

    let law = shock.law;
    let st = shock.states;
    let ss = shock.constants.sigma_star;
    let mut table = ProfileTable {
        shock: *shock,
        viscosity,
        xi_grid: Vec::with_capacity(n),
        v_s: Vec::with_capacity(n),
        u1_s: Vec::with_capacity(n),
        h1_s: Vec::with_capacity(n),
        d1_v: Vec::with_capacity(n),
        d2_v: Vec::with_capacity(n),
        d3_v: Vec::with_capacity(n),
        d1_u1: Vec::with_capacity(n),
        d2_u1: Vec::with_capacity(n),
        d3_u1: Vec::with_capacity(n),
        tail_gap: gap,
        normalization_point: 0.0,
        spacing: h,
        half_length,
        center: n_half,
        tail_warning: None,
    };
    for i in 0..n {
        let y = table.tail_gap[i];
        let (v, g) = if i < n_half {
            (st.v_minus + y, ode.g_left(y))
        } else if i == n_half {
            (0.5 * (st.v_minus + st.v_plus), ode.g_right(y))
        } else {
            (st.v_plus - y, ode.g_right(y))
        };
        let d1 = g / ode.k;
        let gp = -ode.sigma_star_sq - law.dp(v);
        let gpp = -law.d2p(v);
        let d2 = gp * d1 / ode.k;
        let d3 = (gpp * d1 * d1 + gp * d2) / ode.k;
        let u1 = st.u1_minus - ss * (v - st.v_minus);
        table.xi_grid.push(i as f64 * h - half_length);
        table.v_s.push(v);
        table.u1_s.push(u1);
        table.h1_s.push(u1 - bulk * d1);
        table.d1_v.push(d1);
        table.d2_v.push(d2);
        table.d3_v.push(d3);
        table.d1_u1.push(-ss * d1);
        table.d2_u1.push(-ss * d2);
        table.d3_u1.push(-ss * d3);
    }

    let (left_rate, right_rate) = linearized_decay_rates(shock, viscosity);
    let depth = half_length * left_rate.min(right_rate);
    if depth < 20.0 {
        let end_gap = table.tail_gap[0].max(table.tail_gap[n - 1]);
        table.tail_warning = Some(format!(
            "profile tails unresolved: half-length x decay rate = {depth:.3} < 20, endpoint gap {end_gap:.3e}"
        ));
    }
    Ok(table)
}

#[inline]
fn hermite(t: f64, h: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
}

impl ProfileTable {
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.xi_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_grid.is_empty()
    }

    pub fn center_index(&self) -> usize {
        self.center
    }

    /// Strict monotonicity of `vˢ`, judged on the tail gaps where the stored
    /// values have already rounded to the end states.
    pub fn strictly_increasing(&self) -> bool {
        let c = self.center;
        let g = &self.tail_gap;
        let left = (1..c).all(|i| g[i] > g[i - 1]);
        let right = (c + 1..g.len()).all(|i| g[i] < g[i - 1]);
        let across = c == 0 || self.v_s[c] > self.v_s[c - 1];
        g.iter().all(|&x| x > 0.0) && left && right && across
    }

    /// Far-field value on the side of `x`, with zero derivatives.
    fn far_field(&self, left: bool) -> ProfilePoint {
        let s = &self.shock.states;
        let (v, u1) = if left {
            (s.v_minus, s.u1_minus)
        } else {
            (s.v_plus, s.u1_plus)
        };
        ProfilePoint {
            v,
            u1,
            h1: u1,
            dv: 0.0,
            du1: 0.0,
            dh1: 0.0,
            d2v: 0.0,
        }
    }

    /// Profile evaluated at `ξ₁ − X`.
    pub fn query_shifted(&self, xi1: f64, shift: f64) -> ProfilePoint {
        self.eval(xi1 - shift)
    }

    pub fn eval(&self, x: f64) -> ProfilePoint {
        if x <= -self.half_length {
            return self.far_field(true);
        }
        if x >= self.half_length {
            return self.far_field(false);
        }
        let pos = (x + self.half_length) / self.spacing;
        let i = (pos.floor() as usize).min(self.len() - 2);
        let t = pos - i as f64;
        let h = self.spacing;
        let v = hermite(
            t,
            h,
            self.v_s[i],
            self.v_s[i + 1],
            self.d1_v[i],
            self.d1_v[i + 1],
        );
        let dv = hermite(
            t,
            h,
            self.d1_v[i],
            self.d1_v[i + 1],
            self.d2_v[i],
            self.d2_v[i + 1],
        );
        let d2v = hermite(
            t,
            h,
            self.d2_v[i],
            self.d2_v[i + 1],
            self.d3_v[i],
            self.d3_v[i + 1],
        );
        self.point_from(v, dv, d2v)
    }

    fn point_from(&self, v: f64, dv: f64, d2v: f64) -> ProfilePoint {
        let s = &self.shock.states;
        let ss = self.shock.constants.sigma_star;
        let bulk = self.viscosity.longitudinal();
        let u1 = s.u1_minus - ss * (v - s.v_minus);
        let du1 = -ss * dv;
        ProfilePoint {
            v,
            u1,
            h1: u1 - bulk * dv,
            dv,
            du1,
            dh1: du1 - bulk * d2v,
            d2v,
        }
    }

    /// Stored values at node `i`.
    pub fn node(&self, i: usize) -> ProfilePoint {
        self.point_from(self.v_s[i], self.d1_v[i], self.d2_v[i])
    }

    /// Max over interior nodes of `|(2μ+λ)σ* D₆vˢ + σ*²(vˢ−v₋) + p(vˢ) − p(v₋)|`,
    /// where `D₆` is the sixth-order central difference of the tabulated values.
    pub fn ode_residual(&self) -> f64 {
        let ode = ReducedOde::new(&self.shock, self.viscosity);
        let h = self.spacing;
        let v = &self.v_s;
        (3..self.len() - 3)
            .map(|i| {
                let d6 = (-v[i - 3] + 9.0 * v[i - 2] - 45.0 * v[i - 1] + 45.0 * v[i + 1]
                    - 9.0 * v[i + 2]
                    + v[i + 3])
                    / (60.0 * h);
                (ode.k * d6 - ode.g(v[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Least-squares decay exponents of `|vˢ − v±|` over the outer half of each tail.
    pub fn decay_rate_fit(&self) -> (f64, f64) {
        let c = self.center;
        let n = self.len();
        let left: Vec<(f64, f64)> = (0..c / 2)
            .filter(|&i| self.tail_gap[i] > f64::MIN_POSITIVE)
            .map(|i| (-self.xi_grid[i], self.tail_gap[i].ln()))
            .collect();
        let right: Vec<(f64, f64)> = (c + (n - 1 - c) / 2 + 1..n)
            .filter(|&i| self.tail_gap[i] > f64::MIN_POSITIVE)
            .map(|i| (self.xi_grid[i], self.tail_gap[i].ln()))
            .collect();
        (-slope(&left), -slope(&right))
    }

    /// Writes `xi1,v_s,u1_s,h1_s,dv,du1` rows with round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "xi1,v_s,u1_s,h1_s,dv,du1")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                self.xi_grid[i],
                self.v_s[i],
                self.u1_s[i],
                self.h1_s[i],
                self.d1_v[i],
                self.d1_u1[i]
            )?;
        }
        Ok(())
    }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
