//! Truncated strip `[−L, L] × T²` with period-1 transverse directions, and
//! the second-order central stencils shared by the solver and diagnostics.
//!
//! Nodes are stored with ξ₁ slowest: `index = (i·N2 + j)·N3 + k`, with
//! `i = 0..=N1` (both ends are boundary nodes), `j < N2`, `k < N3`.

use crate::error::{Result, ShockError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub half_length: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Grid3 {
    pub fn new(half_length: f64, n1: usize, n2: usize, n3: usize) -> Result<Self> {
        let g = Self {
            half_length,
            n1,
            n2,
            n3,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0) || !self.half_length.is_finite() {
            return Err(ShockError::config(format!(
                "grid half-length must be positive, got {}",
                self.half_length
            )));
        }
        if self.n1 < 64 {
            return Err(ShockError::config(format!(
                "N1 must be at least 64, got {}",
                self.n1
            )));
        }
        if self.n2 < 4 || self.n3 < 4 {
            return Err(ShockError::config(format!(
                "N2 and N3 must be at least 4, got {} and {}",
                self.n2, self.n3
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dx1(&self) -> f64 {
        2.0 * self.half_length / self.n1 as f64
    }

    #[inline]
    pub fn dx2(&self) -> f64 {
        1.0 / self.n2 as f64
    }

    #[inline]
    pub fn dx3(&self) -> f64 {
        1.0 / self.n3 as f64
    }

    pub fn spacings(&self) -> [f64; 3] {
        [self.dx1(), self.dx2(), self.dx3()]
    }

    /// Number of ξ₁ nodes, `N1 + 1`.
    #[inline]
    pub fn nodes1(&self) -> usize {
        self.n1 + 1
    }

    /// Nodes per ξ₁-slab.
    #[inline]
    pub fn slab(&self) -> usize {
        self.n2 * self.n3
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes1() * self.slab()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n2 + j) * self.n3 + k
    }

    #[inline]
    pub fn xi1(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx1()
    }

    #[inline]
    pub fn xi2(&self, j: usize) -> f64 {
        j as f64 * self.dx2()
    }

    #[inline]
    pub fn xi3(&self, k: usize) -> f64 {
        k as f64 * self.dx3()
    }

    /// Trapezoidal weight in ξ₁ times the rectangle weight in ξ₂, ξ₃.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let w = self.dx1() * self.dx2() * self.dx3();
        if i == 0 || i == self.n1 {
            0.5 * w
        } else {
            w
        }
    }

    #[inline]
    pub fn is_boundary(&self, i: usize) -> bool {
        i == 0 || i == self.n1
    }

    /// Neighbour indices of an interior node.
    #[inline]
    pub fn nbr(&self, i: usize, j: usize, k: usize) -> Nbr {
        let jp = if j + 1 == self.n2 { 0 } else { j + 1 };
        let jm = if j == 0 { self.n2 - 1 } else { j - 1 };
        let kp = if k + 1 == self.n3 { 0 } else { k + 1 };
        let km = if k == 0 { self.n3 - 1 } else { k - 1 };
        let ip = i + 1;
        let im = i - 1;
        let ix = |i, j, k| self.index(i, j, k);
        Nbr {
            c: ix(i, j, k),
            xp: ix(ip, j, k),
            xm: ix(im, j, k),
            yp: ix(i, jp, k),
            ym: ix(i, jm, k),
            zp: ix(i, j, kp),
            zm: ix(i, j, km),
            xpyp: ix(ip, jp, k),
            xpym: ix(ip, jm, k),
            xmyp: ix(im, jp, k),
            xmym: ix(im, jm, k),
            xpzp: ix(ip, j, kp),
            xpzm: ix(ip, j, km),
            xmzp: ix(im, j, kp),
            xmzm: ix(im, j, km),
            ypzp: ix(i, jp, kp),
            ypzm: ix(i, jp, km),
            ymzp: ix(i, jm, kp),
            ymzm: ix(i, jm, km),
        }
    }

    pub fn stencil(&self) -> Stencil {
        let [d1, d2, d3] = self.spacings();
        Stencil {
            half_inv: [0.5 / d1, 0.5 / d2, 0.5 / d3],
            inv_sq: [1.0 / (d1 * d1), 1.0 / (d2 * d2), 1.0 / (d3 * d3)],
            quarter_inv: [0.25 / (d1 * d2), 0.25 / (d1 * d3), 0.25 / (d2 * d3)],
        }
    }
}

/// Flat indices of the 19-point neighbourhood of a node.
#[derive(Debug, Clone, Copy)]
pub struct Nbr {
    pub c: usize,
    pub xp: usize,
    pub xm: usize,
    pub yp: usize,
    pub ym: usize,
    pub zp: usize,
    pub zm: usize,
    pub xpyp: usize,
    pub xpym: usize,
    pub xmyp: usize,
    pub xmym: usize,
    pub xpzp: usize,
    pub xpzm: usize,
    pub xmzp: usize,
    pub xmzm: usize,
    pub ypzp: usize,
    pub ypzm: usize,
    pub ymzp: usize,
    pub ymzm: usize,
}

/// Precomputed stencil coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub(crate) half_inv: [f64; 3],
    pub(crate) inv_sq: [f64; 3],
    /// `1/(4 dx_a dx_b)` for the pairs (1,2), (1,3), (2,3).
    pub(crate) quarter_inv: [f64; 3],
}

impl Stencil {
    /// Central gradient `(D₁f, D₂f, D₃f)` of a scalar field.
    #[inline(always)]
    pub fn grad(&self, f: &[f64], n: &Nbr) -> [f64; 3] {
        [
            (f[n.xp] - f[n.xm]) * self.half_inv[0],
            (f[n.yp] - f[n.ym]) * self.half_inv[1],
            (f[n.zp] - f[n.zm]) * self.half_inv[2],
        ]
    }

    /// Central derivative along `axis` of values produced by `f(index)`.
    #[inline(always)]
    pub fn d_with(&self, axis: usize, n: &Nbr, f: impl Fn(usize) -> f64) -> f64 {
        match axis {
            0 => (f(n.xp) - f(n.xm)) * self.half_inv[0],
            1 => (f(n.yp) - f(n.ym)) * self.half_inv[1],
            _ => (f(n.zp) - f(n.zm)) * self.half_inv[2],
        }
    }

    /// Compact second derivatives `(D₁₁f, D₂₂f, D₃₃f)`.
    #[inline(always)]
    pub fn second(&self, f: &[f64], n: &Nbr) -> [f64; 3] {
        let c2 = 2.0 * f[n.c];
        [
            (f[n.xp] - c2 + f[n.xm]) * self.inv_sq[0],
            (f[n.yp] - c2 + f[n.ym]) * self.inv_sq[1],
            (f[n.zp] - c2 + f[n.zm]) * self.inv_sq[2],
        ]
    }

    #[inline(always)]
    pub fn laplacian(&self, f: &[f64], n: &Nbr) -> f64 {
        let s = self.second(f, n);
        s[0] + s[1] + s[2]
    }

    /// Mixed derivatives `(D₁D₂f, D₁D₃f, D₂D₃f)` as products of central differences.
    #[inline(always)]
    pub fn mixed(&self, f: &[f64], n: &Nbr) -> [f64; 3] {
        [
            (f[n.xpyp] - f[n.xpym] - f[n.xmyp] + f[n.xmym]) * self.quarter_inv[0],
            (f[n.xpzp] - f[n.xpzm] - f[n.xmzp] + f[n.xmzm]) * self.quarter_inv[1],
            (f[n.ypzp] - f[n.ypzm] - f[n.ymzp] + f[n.ymzm]) * self.quarter_inv[2],
        ]
    }

    /// `(Δu, ∇div u)` for a velocity field given component-wise.
    ///
    /// The diagonal parts of `∇div u` use the compact second difference, so
    /// `∇div u − Δu` is the discrete `∇×∇×u` by construction.
    #[inline(always)]
    pub fn viscous_parts(&self, u: [&[f64]; 3], n: &Nbr) -> ([f64; 3], [f64; 3]) {
        let s0 = self.second(u[0], n);
        let s1 = self.second(u[1], n);
        let s2 = self.second(u[2], n);
        let m0 = self.mixed(u[0], n);
        let m1 = self.mixed(u[1], n);
        let m2 = self.mixed(u[2], n);
        let lap = [
            s0[0] + s0[1] + s0[2],
            s1[0] + s1[1] + s1[2],
            s2[0] + s2[1] + s2[2],
        ];
        // (∇div u)_a = D_aa u_a + Σ_{b≠a} D_a D_b u_b
        let graddiv = [
            s0[0] + m1[0] + m2[1],
            s1[1] + m0[0] + m2[2],
            s2[2] + m0[1] + m1[2],
        ];
        (lap, graddiv)
    }
}
