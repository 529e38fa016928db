//! Manufactured steady solution for convergence studies of the flow solver.
//!
//! `ρ = 1 + A G(ξ₁)(1 + ½cos2πξ₂ cos2πξ₃)`, `u₁ = U + B G sin2πξ₂`,
//! `u₂ = B G cos2πξ₃`, `u₃ = B G′ sin2πξ₂`, with `G = e^{−ξ₁²/2}`. The source
//! `S = −L(q*)` makes `q*` an exact steady state of `∂ₜq = L(q) + S`; it is
//! assembled by hand from values, gradients and Hessians of the fields.

use std::f64::consts::PI;

use crate::grid::Grid3;
use crate::solver::FlowModel;
use crate::state::FluidState;

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    fn constant(c: f64) -> Self {
        Self {
            v: c,
            ..Self::default()
        }
    }

    fn add(self, o: Jet) -> Jet {
        let mut r = self;
        r.v += o.v;
        for a in 0..3 {
            r.g[a] += o.g[a];
            for b in 0..3 {
                r.h[a][b] += o.h[a][b];
            }
        }
        r
    }
}

/// One-dimensional factor with its first two derivatives.
#[derive(Debug, Clone, Copy)]
enum Factor {
    One,
    /// `G = e^{−x²/2}`.
    Gauss,
    /// `G′ = −x e^{−x²/2}`.
    GaussPrime,
    Cos,
    Sin,
}

impl Factor {
    fn eval(self, x: f64) -> [f64; 3] {
        let w = 2.0 * PI;
        match self {
            Factor::One => [1.0, 0.0, 0.0],
            Factor::Gauss => {
                let g = (-0.5 * x * x).exp();
                [g, -x * g, (x * x - 1.0) * g]
            }
            Factor::GaussPrime => {
                let g = (-0.5 * x * x).exp();
                [-x * g, (x * x - 1.0) * g, (3.0 * x - x * x * x) * g]
            }
            Factor::Cos => [(w * x).cos(), -w * (w * x).sin(), -w * w * (w * x).cos()],
            Factor::Sin => [(w * x).sin(), w * (w * x).cos(), -w * w * (w * x).sin()],
        }
    }
}

/// `c · f₁(ξ₁) f₂(ξ₂) f₃(ξ₃)`.
fn separable(c: f64, f: [Factor; 3], x: [f64; 3]) -> Jet {
    let d = [f[0].eval(x[0]), f[1].eval(x[1]), f[2].eval(x[2])];
    let mut j = Jet {
        v: c * d[0][0] * d[1][0] * d[2][0],
        ..Jet::default()
    };
    for a in 0..3 {
        for b in 0..3 {
            // Derivative orders per axis.
            let mut ord = [0usize; 3];
            ord[a] += 1;
            ord[b] += 1;
            j.h[a][b] = c * d[0][ord[0]] * d[1][ord[1]] * d[2][ord[2]];
        }
        let mut ord = [0usize; 3];
        ord[a] = 1;
        j.g[a] = c * d[0][ord[0]] * d[1][ord[1]] * d[2][ord[2]];
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub rho_amp: f64,
    pub vel_amp: f64,
    pub u_background: f64,
}

impl Default for Manufactured {
    fn default() -> Self {
        Self {
            rho_amp: 0.2,
            vel_amp: 0.3,
            u_background: 0.1,
        }
    }
}

impl Manufactured {
    pub fn rho(&self, x: [f64; 3]) -> Jet {
        use Factor::*;
        Jet::constant(1.0)
            .add(separable(self.rho_amp, [Gauss, One, One], x))
            .add(separable(0.5 * self.rho_amp, [Gauss, Cos, Cos], x))
    }

    pub fn u(&self, x: [f64; 3]) -> [Jet; 3] {
        use Factor::*;
        let b = self.vel_amp;
        [
            Jet::constant(self.u_background).add(separable(b, [Gauss, Sin, One], x)),
            separable(b, [Gauss, One, Cos], x),
            separable(b, [GaussPrime, Sin, One], x),
        ]
    }

    /// Conservative variables at a point.
    pub fn q(&self, x: [f64; 3]) -> [f64; 4] {
        let r = self.rho(x).v;
        let u = self.u(x);
        [r, r * u[0].v, r * u[1].v, r * u[2].v]
    }

    pub fn state(&self, grid: Grid3) -> FluidState {
        let mut q = Vec::with_capacity(grid.len());
        for i in 0..grid.nodes1() {
            for j in 0..grid.n2 {
                for k in 0..grid.n3 {
                    q.push(self.q([grid.xi1(i), grid.xi2(j), grid.xi3(k)]));
                }
            }
        }
        FluidState { grid, q }
    }

    /// Continuous moving-frame right-hand side `L(q*)`.
    pub fn rhs(&self, model: &FlowModel, x: [f64; 3]) -> [f64; 4] {
        let r = self.rho(x);
        let u = self.u(x);
        let (mu, lam) = (model.viscosity.mu, model.viscosity.lambda);
        let gamma = model.law.gamma();
        let div_u = u[0].g[0] + u[1].g[1] + u[2].g[2];
        let u_grad_r: f64 = (0..3).map(|a| u[a].v * r.g[a]).sum();
        let div_m = u_grad_r + r.v * div_u;
        let mut out = [model.sigma * r.g[0] - div_m, 0.0, 0.0, 0.0];
        let dp = gamma * r.v.powf(gamma - 1.0);
        for i in 0..3 {
            let dm1 = r.g[0] * u[i].v + r.v * u[i].g[0];
            let u_grad_ui: f64 = (0..3).map(|a| u[a].v * u[i].g[a]).sum();
            let conv = u[i].v * div_m + r.v * u_grad_ui;
            let lap = u[i].h[0][0] + u[i].h[1][1] + u[i].h[2][2];
            let grad_div: f64 = (0..3).map(|j| u[j].h[i][j]).sum();
            out[i + 1] = model.sigma * dm1 - conv - dp * r.g[i] + mu * lap + (mu + lam) * grad_div;
        }
        out
    }

    /// `S = −L(q*)`.
    pub fn source(&self, model: &FlowModel, x: [f64; 3]) -> [f64; 4] {
        self.rhs(model, x).map(|c| -c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jets_match_differences() {
        let m = Manufactured::default();
        let x = [0.4, 0.15, 0.8];
        let h = 1e-5;
        let r = m.rho(x);
        for a in 0..3 {
            let mut p = x;
            let mut q = x;
            p[a] += h;
            q[a] -= h;
            let fd = (m.rho(p).v - m.rho(q).v) / (2.0 * h);
            assert!((fd - r.g[a]).abs() < 1e-8);
            let fd2 = (m.rho(p).g[a] - m.rho(q).g[a]) / (2.0 * h);
            assert!((fd2 - r.h[a][a]).abs() < 1e-7);
            for c in 0..3 {
                let fd = (m.u(p)[c].g[(a + 1) % 3] - m.u(q)[c].g[(a + 1) % 3]) / (2.0 * h);
                assert!((fd - m.u(x)[c].h[a][(a + 1) % 3]).abs() < 1e-7);
            }
        }
    }
}
