//! Weighted Poincaré inequality on `[0,1] × T²` and its Legendre machinery:
//!
//! `∫∫|f − f̄|² ≤ ½∫∫ y₁(1−y₁)|∂_{y₁}f|² + (1/16π²)∫∫ |∇_{y′}f|²/(y₁(1−y₁))`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::legendre::{orthonormal, GaussLegendre, GAUSS_NODES};
use super::Verdict;
use crate::error::{Result, ShockError};
use crate::par::{slab_map, ExecPolicy};

/// Default transverse points per direction of the periodic rule.
pub const TRANSVERSE_NODES: usize = 16;

/// A function on `[0,1] × T²` with its gradient.
pub trait TestFunction2p1: Sync {
    fn value(&self, y: [f64; 3]) -> f64;
    fn grad(&self, y: [f64; 3]) -> [f64; 3];
    /// Whether the caller asserts `∫∫|∇_{y′}f|²/(y₁(1−y₁)) < ∞`.
    fn transverse_integrable(&self) -> bool {
        true
    }
}

/// Closure-backed test function.
pub struct AnalyticFn<F, G> {
    pub f: F,
    pub g: G,
    pub integrable: bool,
}

impl<F, G> TestFunction2p1 for AnalyticFn<F, G>
where
    F: Fn([f64; 3]) -> f64 + Sync,
    G: Fn([f64; 3]) -> [f64; 3] + Sync,
{
    fn value(&self, y: [f64; 3]) -> f64 {
        (self.f)(y)
    }
    fn grad(&self, y: [f64; 3]) -> [f64; 3] {
        (self.g)(y)
    }
    fn transverse_integrable(&self) -> bool {
        self.integrable
    }
}

/// Quadrature resolution: Gauss nodes in `y₁`, uniform points per transverse axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub gauss: usize,
    pub transverse: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            gauss: GAUSS_NODES,
            transverse: TRANSVERSE_NODES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareResult {
    pub mean: f64,
    pub lhs: f64,
    /// `½∫∫ y₁(1−y₁)|∂_{y₁}f|²`.
    pub rhs_longitudinal: f64,
    /// `(1/16π²)∫∫ |∇_{y′}f|²/(y₁(1−y₁))`.
    pub rhs_transverse: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Quadrature error estimate from a rule with 1.5× the nodes.
    pub quad_error: f64,
    pub verdict: Verdict,
}

struct Sums {
    mean: f64,
    sq: f64,
    long: f64,
    trans: f64,
}

fn integrate(f: &dyn TestFunction2p1, res: Resolution) -> Result<Sums> {
    let rule = GaussLegendre::new(res.gauss)?.unit_interval();
    let m = res.transverse;
    if m < 2 {
        return Err(ShockError::config(
            "transverse rule needs at least two points",
        ));
    }
    let wt = 1.0 / (m * m) as f64;
    let points = |f: &mut dyn FnMut([f64; 3], f64)| {
        for &(y1, w1) in &rule {
            for j in 0..m {
                for k in 0..m {
                    f([y1, j as f64 / m as f64, k as f64 / m as f64], w1 * wt);
                }
            }
        }
    };
    // Two passes: the mean first, then the centred square.
    let mut mean = 0.0;
    points(&mut |y, w| mean += w * f.value(y));
    let (mut sq, mut sl, mut st) = (0.0, 0.0, 0.0);
    points(&mut |y, w| {
        let d = f.value(y) - mean;
        let g = f.grad(y);
        let deg = y[0] * (1.0 - y[0]);
        sq += w * d * d;
        sl += w * deg * g[0] * g[0];
        st += w * (g[1] * g[1] + g[2] * g[2]) / deg;
    });
    Ok(Sums {
        mean,
        sq,
        long: 0.5 * sl,
        trans: st / (16.0 * PI * PI),
    })
}

/// `∫_{T²}|∇_{y′}f|²` on the slices `y₁ = 0` and `y₁ = 1`; non-zero means
/// the transverse weighted integral diverges.
fn endpoint_transverse_energy(f: &dyn TestFunction2p1, m: usize) -> f64 {
    let mut e = 0.0f64;
    for y1 in [0.0, 1.0] {
        let mut s = 0.0;
        for j in 0..m {
            for k in 0..m {
                let g = f.grad([y1, j as f64 / m as f64, k as f64 / m as f64]);
                s += g[1] * g[1] + g[2] * g[2];
            }
        }
        e = e.max(s / (m * m) as f64);
    }
    e
}

/// Evaluates both sides of the inequality.
pub fn poincare_check(f: &dyn TestFunction2p1, res: Resolution) -> Result<PoincareResult> {
    let a = integrate(f, res)?;
    let fine = Resolution {
        gauss: res.gauss + res.gauss / 2,
        transverse: res.transverse,
    };
    let b = integrate(f, fine)?;
    let rhs = a.long + a.trans;
    // Rule-refinement difference plus worst-case floating-point summation
    // error over all quadrature points, for both sides and for the mean.
    let points = (res.gauss * res.transverse * res.transverse) as f64;
    let mean_err = points * f64::EPSILON * a.mean.abs();
    let quad_error = (a.sq - b.sq).abs()
        + (rhs - b.long - b.trans).abs()
        + points * f64::EPSILON * (a.sq.abs() + rhs.abs())
        + mean_err * mean_err;
    let scale = 1.0 + a.sq.abs() + rhs.abs();
    let divergent =
        !f.transverse_integrable() || endpoint_transverse_energy(f, res.transverse) > 1e-24 * scale;
    let margin = rhs - a.sq;
    let verdict = if divergent {
        Verdict::HypothesisViolated
    } else if margin >= -quad_error {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(PoincareResult {
        mean: a.mean,
        lhs: a.sq,
        rhs_longitudinal: a.long,
        rhs_transverse: a.trans,
        rhs,
        margin,
        quad_error,
        verdict,
    })
}

/// Random member of the hypothesis-satisfying family
/// `P₀(y₁) + y₁(1−y₁) Σ_m P_m(y₁)(a_m cos θ_m + b_m sin θ_m)`,
/// `θ_m = 2π(k₂y₂ + k₃y₃)`, `deg P₀ ≤ 6`, `deg P_m ≤ 4`, `|k| ≤ 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTrig {
    pub base: Vec<f64>,
    pub modes: Vec<TrigMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigMode {
    pub k: [i32; 2],
    pub poly: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

/// `(P(x), P′(x))` for ascending coefficients.
fn horner(c: &[f64], x: f64) -> (f64, f64) {
    c.iter()
        .rev()
        .fold((0.0, 0.0), |(p, d), &a| (p * x + a, d * x + p))
}

impl PolyTrig {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = |deg: usize, rng: &mut ChaCha8Rng| {
            (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let d0 = rng.gen_range(0..=6);
        let base = poly(d0, &mut rng);
        let count = rng.gen_range(0..=3);
        let modes = (0..count)
            .map(|_| {
                let k = loop {
                    let k = [rng.gen_range(-4..=4), rng.gen_range(-4..=4)];
                    if k != [0, 0] {
                        break k;
                    }
                };
                let d = rng.gen_range(0..=4);
                TrigMode {
                    k,
                    poly: poly(d, &mut rng),
                    a: rng.gen_range(-1.0..1.0),
                    b: rng.gen_range(-1.0..1.0),
                }
            })
            .collect();
        Self { base, modes }
    }
}

impl TestFunction2p1 for PolyTrig {
    fn value(&self, y: [f64; 3]) -> f64 {
        let damp = y[0] * (1.0 - y[0]);
        let mut s = horner(&self.base, y[0]).0;
        for m in &self.modes {
            let th = 2.0 * PI * (m.k[0] as f64 * y[1] + m.k[1] as f64 * y[2]);
            s += damp * horner(&m.poly, y[0]).0 * (m.a * th.cos() + m.b * th.sin());
        }
        s
    }

    fn grad(&self, y: [f64; 3]) -> [f64; 3] {
        let damp = y[0] * (1.0 - y[0]);
        let ddamp = 1.0 - 2.0 * y[0];
        let mut g = [horner(&self.base, y[0]).1, 0.0, 0.0];
        for m in &self.modes {
            let th = 2.0 * PI * (m.k[0] as f64 * y[1] + m.k[1] as f64 * y[2]);
            let (s, c) = th.sin_cos();
            let trig = m.a * c + m.b * s;
            let dtrig = 2.0 * PI * (m.b * c - m.a * s);
            let (p, dp) = horner(&m.poly, y[0]);
            g[0] += (ddamp * p + damp * dp) * trig;
            g[1] += damp * p * dtrig * m.k[0] as f64;
            g[2] += damp * p * dtrig * m.k[1] as f64;
        }
        g
    }
}

/// One member of the randomized suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteEntry {
    pub seed: u64,
    pub result: PoincareResult,
}

/// Checks `count` random [`PolyTrig`] functions with seeds `base_seed + i`.
pub fn random_poincare_suite(
    count: usize,
    base_seed: u64,
    res: Resolution,
    policy: ExecPolicy,
) -> Result<Vec<SuiteEntry>> {
    slab_map(policy, count, |i| {
        let seed = base_seed.wrapping_add(i as u64);
        poincare_check(&PolyTrig::random(seed), res).map(|result| SuiteEntry { seed, result })
    })
    .into_iter()
    .collect()
}

/// Legendre coefficients of `w(x, y′) = f((x+1)/2, y′)` per transverse node.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreDecomposition {
    /// `coeffs[i][j·m + k] = c_i(y′_{jk}) = ∫ w L_i dx`.
    pub coeffs: Vec<Vec<f64>>,
    pub transverse: usize,
    /// `∫_{T²}∫(1−x²)|∂_x w|²`.
    pub spectral_lhs: f64,
    /// `Σ i(i+1)‖c_i‖²_{L²(T²)}`.
    pub spectral_rhs: f64,
    /// Max Legendre ODE residual of the basis members used.
    pub ode_residual: f64,
}

impl LegendreDecomposition {
    /// `‖c_i‖_{L²(T²)}`.
    pub fn coeff_norm(&self, i: usize) -> f64 {
        let m2 = (self.transverse * self.transverse) as f64;
        (self.coeffs[i].iter().map(|c| c * c).sum::<f64>() / m2).sqrt()
    }
}

/// Projects `f` onto `L_0..L_order` with the Gauss rule of `res`.
pub fn legendre_decompose(
    f: &dyn TestFunction2p1,
    order: usize,
    res: Resolution,
) -> Result<LegendreDecomposition> {
    if order + 1 > res.gauss {
        return Err(ShockError::config(format!(
            "order {order} exceeds the degree supported by {} Gauss nodes",
            res.gauss
        )));
    }
    let rule = GaussLegendre::new(res.gauss)?;
    let m = res.transverse;
    let basis: Vec<Vec<f64>> = (0..=order)
        .map(|i| rule.nodes.iter().map(|&x| orthonormal(i, x).0).collect())
        .collect();
    let mut coeffs = vec![vec![0.0; m * m]; order + 1];
    let mut lhs = 0.0;
    for j in 0..m {
        for k in 0..m {
            let (y2, y3) = (j as f64 / m as f64, k as f64 / m as f64);
            for (q, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let y = [0.5 * (x + 1.0), y2, y3];
                let val = f.value(y);
                let dx = 0.5 * f.grad(y)[0];
                lhs += w * (1.0 - x * x) * dx * dx;
                for (i, b) in basis.iter().enumerate() {
                    coeffs[i][j * m + k] += w * val * b[q];
                }
            }
        }
    }
    let m2 = (m * m) as f64;
    let rhs = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| (i * (i + 1)) as f64 * c.iter().map(|c| c * c).sum::<f64>() / m2)
        .sum();
    let ode_residual = (0..=order)
        .map(|n| super::legendre::ode_residual(n, 1001))
        .fold(0.0, f64::max);
    Ok(LegendreDecomposition {
        coeffs,
        transverse: m,
        spectral_lhs: lhs / m2,
        spectral_rhs: rhs,
        ode_residual,
    })
}

/// Mapped orthonormal Legendre function `L_n(2y₁ − 1)` as a test function.
pub fn mapped_legendre(n: usize) -> impl TestFunction2p1 {
    AnalyticFn {
        f: move |y: [f64; 3]| orthonormal(n, 2.0 * y[0] - 1.0).0,
        g: move |y: [f64; 3]| [2.0 * orthonormal(n, 2.0 * y[0] - 1.0).1, 0.0, 0.0],
        integrable: true,
    }
}

/// Random polynomial of degree `deg` in `x ∈ [−1,1]` with trig transverse
/// factors, for the spectral identity.
pub fn random_polynomial_data(deg: usize, seed: u64) -> impl TestFunction2p1 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let k = rng.gen_range(1..=3) as f64;
    let eval = move |y: [f64; 3]| {
        let x = 2.0 * y[0] - 1.0;
        let (pa, da) = horner(&a, x);
        let (pb, db) = horner(&b, x);
        let th = 2.0 * PI * k * y[1];
        (
            pa + pb * th.cos(),
            2.0 * (da + db * th.cos()),
            -2.0 * PI * k * pb * th.sin(),
        )
    };
    let value = eval.clone();
    AnalyticFn {
        f: move |y| value(y).0,
        g: move |y| {
            let (_, d1, d2) = eval(y);
            [d1, d2, 0.0]
        },
        integrable: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res() -> Resolution {
        Resolution::default()
    }

    #[test]
    fn constant_function() {
        let f = AnalyticFn {
            f: |_| 3.0,
            g: |_| [0.0; 3],
            integrable: true,
        };
        let r = poincare_check(&f, res()).unwrap();
        assert!(r.lhs.abs() < 1e-13 && r.rhs == 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn sharpness_witness() {
        let f = AnalyticFn {
            f: |y: [f64; 3]| y[0],
            g: |_| [1.0, 0.0, 0.0],
            integrable: true,
        };
        let r = poincare_check(&f, res()).unwrap();
        assert!((r.lhs - 1.0 / 12.0).abs() < 1e-14);
        assert!((r.rhs - 1.0 / 12.0).abs() < 1e-14);
        assert!(r.margin.abs() <= 1e-10);
    }

    #[test]
    fn transverse_example() {
        let f = AnalyticFn {
            f: |y: [f64; 3]| y[0] * (1.0 - y[0]) * (2.0 * PI * y[1]).cos(),
            g: |y: [f64; 3]| {
                let c = (2.0 * PI * y[1]).cos();
                let s = (2.0 * PI * y[1]).sin();
                [
                    (1.0 - 2.0 * y[0]) * c,
                    -2.0 * PI * y[0] * (1.0 - y[0]) * s,
                    0.0,
                ]
            },
            integrable: true,
        };
        let r = poincare_check(&f, res()).unwrap();
        assert!((r.lhs - 1.0 / 60.0).abs() < 1e-14);
        assert!((r.rhs_longitudinal - 1.0 / 120.0).abs() < 1e-14);
        assert!((r.rhs_transverse - 1.0 / 48.0).abs() < 1e-14);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn divergent_weight_flagged() {
        let f = AnalyticFn {
            f: |y: [f64; 3]| (2.0 * PI * y[1]).cos(),
            g: |y: [f64; 3]| [0.0, -2.0 * PI * (2.0 * PI * y[1]).sin(), 0.0],
            integrable: true,
        };
        assert_eq!(
            poincare_check(&f, res()).unwrap().verdict,
            Verdict::HypothesisViolated
        );
    }

    #[test]
    fn random_family_gradients_match_differences() {
        let f = PolyTrig::random(7);
        let y = [0.3, 0.2, 0.7];
        let g = f.grad(y);
        let h = 1e-6;
        for a in 0..3 {
            let mut p = y;
            let mut m = y;
            p[a] += h;
            m[a] -= h;
            let fd = (f.value(p) - f.value(m)) / (2.0 * h);
            assert!((fd - g[a]).abs() < 1e-6 * (1.0 + g[a].abs()), "axis {a}");
        }
    }

    #[test]
    fn decomposition_of_basis_member() {
        let d = legendre_decompose(
            &mapped_legendre(1),
            10,
            Resolution {
                gauss: 64,
                transverse: 4,
            },
        )
        .unwrap();
        assert!((d.coeff_norm(1) - 1.0).abs() < 1e-12);
        for i in (0..=10).filter(|&i| i != 1) {
            assert!(d.coeff_norm(i) <= 1e-12, "c_{i}");
        }
        assert!(d.ode_residual <= 1e-10);
        assert!(legendre_decompose(&mapped_legendre(1), 64, res()).is_err());
    }

    #[test]
    fn spectral_identity() {
        let f = random_polynomial_data(8, 42);
        let d = legendre_decompose(
            &f,
            8,
            Resolution {
                gauss: 64,
                transverse: 16,
            },
        )
        .unwrap();
        assert!((d.spectral_lhs - d.spectral_rhs).abs() <= 1e-8 * (1.0 + d.spectral_lhs));
    }
}
