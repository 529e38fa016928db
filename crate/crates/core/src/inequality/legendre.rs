//! Gauss–Legendre quadrature and the Legendre basis on `[−1, 1]`.

use crate::error::{Result, ShockError};

/// Default number of Gauss–Legendre nodes.
pub const GAUSS_NODES: usize = 64;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(ShockError::config(
                "Gauss–Legendre rule needs at least one node",
            ));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton from the asymptotic root estimate.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_pair(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_pair(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// The rule mapped to `[0, 1]` as `(y, weight)` pairs.
    pub fn unit_interval(&self) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect()
    }
}

/// `(P_n(x), P_n′(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let d = legendre_derivatives(n, x, 1);
    (d[0], d[1])
}

/// `[P_n, P_n′, …, P_n^{(k)}]` at `x`, obtained by differentiating the
/// recurrence `(m+1)P_{m+1} = (2m+1)x P_m − m P_{m−1}` term by term.
pub fn legendre_derivatives(n: usize, x: f64, k: usize) -> Vec<f64> {
    let mut prev = vec![0.0; k + 1];
    let mut cur = vec![0.0; k + 1];
    cur[0] = 1.0;
    for m in 0..n {
        let mf = m as f64;
        let mut next = vec![0.0; k + 1];
        for j in 0..=k {
            let lower = if j > 0 { j as f64 * cur[j - 1] } else { 0.0 };
            next[j] = ((2.0 * mf + 1.0) * (x * cur[j] + lower) - mf * prev[j]) / (mf + 1.0);
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal Legendre function `L_n = √((2n+1)/2) P_n` and its derivative.
pub fn orthonormal(n: usize, x: f64) -> (f64, f64) {
    let s = ((2 * n + 1) as f64 / 2.0).sqrt();
    let (p, d) = legendre_pair(n, x);
    (s * p, s * d)
}

/// Max over `samples` equispaced points of `|((1−x²)P_n′)′ + n(n+1)P_n|`.
pub fn ode_residual(n: usize, samples: usize) -> f64 {
    let nn = (n * (n + 1)) as f64;
    (0..samples)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            let d = legendre_derivatives(n, x, 2);
            ((1.0 - x * x) * d[2] - 2.0 * x * d[1] + nn * d[0]).abs()
        })
        .fold(0.0, f64::max)
}

/// Max deviation from the identity of the Gram matrix of `L_0..L_{count−1}`.
pub fn gram_deviation(count: usize, rule: &GaussLegendre) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..count {
        for b in 0..count {
            let g = rule.integrate(|x| orthonormal(a, x).0 * orthonormal(b, x).0);
            let id = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - id).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_monomials() {
        let r = GaussLegendre::new(GAUSS_NODES).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for k in [0, 2, 10, 64, 126] {
            let exact = 2.0 / (k as f64 + 1.0);
            assert!((r.integrate(|x| x.powi(k)) - exact).abs() < 1e-13, "x^{k}");
        }
        assert!(r.integrate(|x| x.powi(127)).abs() < 1e-14);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(GaussLegendre::new(0).is_err());
    }

    #[test]
    fn low_order_closed_forms() {
        let x = 0.3;
        let d = legendre_derivatives(3, x, 2);
        // P₃ = (5x³ − 3x)/2.
        assert!((d[0] - (5.0 * x * x * x - 3.0 * x) / 2.0).abs() < 1e-15);
        assert!((d[1] - (15.0 * x * x - 3.0) / 2.0).abs() < 1e-15);
        assert!((d[2] - 15.0 * x).abs() < 1e-14);
    }

    #[test]
    fn ode_and_gram() {
        for n in 0..=10 {
            assert!(ode_residual(n, 2001) <= 1e-10, "n = {n}");
        }
        let r = GaussLegendre::new(GAUSS_NODES).unwrap();
        assert!(gram_deviation(11, &r) <= 1e-10);
    }
}
