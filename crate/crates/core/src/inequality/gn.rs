//! Gagliardo–Nirenberg bound on the strip `ℝ × T²`:
//! `‖g‖_∞ ≤ √2‖g‖^{1/2}‖∂₁g‖^{1/2} + C‖∇g‖^{1/2}‖∇²g‖^{1/2}`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Verdict;
use crate::diagnostics::sobolev_norms;
use crate::error::Result;
use crate::grid::Grid3;
use crate::par::{slab_map, ExecPolicy};

/// Calibrated constant of the second term; an artifact choice.
pub const GN_CONSTANT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnResult {
    /// Grid maximum of `|g|`.
    pub lhs: f64,
    /// `√2‖g‖^{1/2}‖∂₁g‖^{1/2}`.
    pub term1: f64,
    /// `‖∇g‖^{1/2}‖∇²g‖^{1/2}`.
    pub term2: f64,
    pub rhs: f64,
    pub margin: f64,
    /// `g` is not negligible on the truncation boundary.
    pub truncated: bool,
    pub verdict: Verdict,
}

/// Samples `g` on `grid` and evaluates both sides with the solver stencils.
pub fn gn_check(
    g: &(dyn Fn([f64; 3]) -> f64 + Sync),
    grid: &Grid3,
    policy: ExecPolicy,
) -> Result<GnResult> {
    grid.validate()?;
    let slab = grid.slab();
    let vals: Vec<f64> = slab_map(policy, grid.nodes1(), |i| {
        let mut s = Vec::with_capacity(slab);
        for j in 0..grid.n2 {
            for k in 0..grid.n3 {
                s.push(g([grid.xi1(i), grid.xi2(j), grid.xi3(k)]));
            }
        }
        s
    })
    .into_iter()
    .flatten()
    .collect();
    let n = sobolev_norms(&[&vals], grid, policy);
    let edge = vals[..slab]
        .iter()
        .chain(&vals[vals.len() - slab..])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let term1 = 2f64.sqrt() * (n.l2 * n.d1).sqrt();
    let term2 = (n.grad * n.hess).sqrt();
    let rhs = term1 + GN_CONSTANT * term2;
    let margin = rhs - n.sup;
    Ok(GnResult {
        lhs: n.sup,
        term1,
        term2,
        rhs,
        margin,
        truncated: edge > 1e-8 * n.sup.max(f64::MIN_POSITIVE),
        verdict: if margin >= 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

/// Random smooth field: a Gaussian window in `ξ₁` times a trigonometric
/// polynomial of degree ≤ 2 in `ξ′`, with an oscillation in `ξ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedTrig {
    pub center: f64,
    pub width: f64,
    pub omega: f64,
    pub phase: f64,
    /// `(k₂, k₃, amplitude, phase)`.
    pub modes: Vec<(i32, i32, f64, f64)>,
}

impl WindowedTrig {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.gen_range(1..=4);
        Self {
            center: rng.gen_range(-2.0..2.0),
            width: rng.gen_range(0.5..2.0),
            omega: rng.gen_range(0.0..3.0),
            phase: rng.gen_range(0.0..2.0 * PI),
            modes: (0..count)
                .map(|_| {
                    (
                        rng.gen_range(-2..=2),
                        rng.gen_range(-2..=2),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.0..2.0 * PI),
                    )
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let z = (x[0] - self.center) / self.width;
        let window = (-0.5 * z * z).exp() * (self.omega * x[0] + self.phase).cos();
        let trig: f64 = self
            .modes
            .iter()
            .map(|&(a, b, amp, ph)| {
                amp * (2.0 * PI * (a as f64 * x[1] + b as f64 * x[2]) + ph).cos()
            })
            .sum();
        window * trig
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid3 {
        Grid3::new(12.0, 480, 16, 16).unwrap()
    }

    #[test]
    fn gaussian_example() {
        let r = gn_check(
            &|x: [f64; 3]| (-0.5 * x[0] * x[0]).exp(),
            &grid(),
            ExecPolicy::Parallel,
        )
        .unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15);
        // √2 (√π)^{1/4} (√π/2)^{1/4} = 1.58321...
        let exact = 2f64.sqrt() * (PI.sqrt() * PI.sqrt() / 2.0).powf(0.25);
        assert!(
            (r.term1 - exact).abs() < 2e-3 * exact,
            "{} vs {exact}",
            r.term1
        );
        assert!(r.lhs <= r.term1);
        assert!(!r.truncated);
    }

    #[test]
    fn zero_field() {
        let r = gn_check(&|_| 0.0, &grid(), ExecPolicy::Sequential).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn truncation_flag() {
        let r = gn_check(
            &|_| 1.0,
            &Grid3::new(3.0, 64, 4, 4).unwrap(),
            ExecPolicy::Sequential,
        )
        .unwrap();
        assert!(r.truncated);
    }
}
