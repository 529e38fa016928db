//! Relative-quantity bounds for `p(v) = v^{−γ}`, `Q(v) = v^{1−γ}/(γ−1)` and
//! the inverse-pressure estimate, checked by sampling.
//!
//! Relative quantities are evaluated here from binomial series in
//! `r = (v − w)/w` near the diagonal, independently of [`GasLaw::p_rel`],
//! so tiny differences do not cancel catastrophically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Verdict;
use crate::error::{Result, ShockError};
use crate::gas::GasLaw;

const SERIES_RADIUS: f64 = 0.05;

/// `Σ_{k≥2} C(a, k) r^k`, i.e. `(1+r)^a − 1 − a r`.
fn binomial_tail(a: f64, r: f64) -> f64 {
    if r.abs() >= SERIES_RADIUS {
        return (1.0 + r).powf(a) - 1.0 - a * r;
    }
    let mut c = a * (a - 1.0) / 2.0;
    let mut rk = r * r;
    let mut s = 0.0;
    for k in 2..60 {
        let t = c * rk;
        s += t;
        if t.abs() <= 1e-18 * s.abs() {
            break;
        }
        c *= (a - k as f64) / (k as f64 + 1.0);
        rk *= r;
    }
    s
}

/// `p(v|w)`.
pub fn rel_pressure(law: &GasLaw, v: f64, w: f64) -> f64 {
    let g = law.gamma();
    w.powf(-g) * binomial_tail(-g, (v - w) / w)
}

/// `Q(v|w)`.
pub fn rel_energy(law: &GasLaw, v: f64, w: f64) -> f64 {
    let g = law.gamma();
    w.powf(1.0 - g) / (g - 1.0) * binomial_tail(1.0 - g, (v - w) / w)
}

/// `p(v) − p(w)` without cancellation.
pub fn pressure_jump(law: &GasLaw, v: f64, w: f64) -> f64 {
    let g = law.gamma();
    w.powf(-g) * (-g * ((v - w) / w).ln_1p()).exp_m1()
}

/// Inverse pressure `v = p^{−1/γ}`.
fn volume_of_pressure(law: &GasLaw, p: f64) -> f64 {
    p.powf(-1.0 / law.gamma())
}

/// Per-δ results of the relative-quantity suite.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub delta: f64,
    pub samples: usize,
    pub skipped: usize,
    /// Smallest `K` with `p(v|w) ≤ ((γ+1)/(2γ p(w)) + Kδ)|Δp|²` on the samples.
    pub k_pressure: f64,
    /// Smallest `K` with `Q(v|w) ≤ (1/(2γ p(w)^{1+1/γ}) + Kδ)|Δp|²`.
    pub k_energy: f64,
    /// Min over samples of `(Q(v|w) − lower bound)/|Δp|²`.
    pub lower_margin: f64,
    pub lower_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeReport {
    pub gamma: f64,
    pub v_minus: f64,
    /// Max of `|v−w|²/Q(v|w)` and `|v−w|²/p(v|w)` on `0 < w < 2v₋`, `0 < v ≤ 3v₋`.
    pub c_energy: f64,
    pub c_pressure: f64,
    pub rows: Vec<DeltaRow>,
    /// `Q(v|w)/|Δp|²` at `w = v₋`, `v = 1.001 v₋`, and its leading-order value.
    pub leading_ratio: f64,
    pub leading_expected: f64,
    pub seed: u64,
}

impl RelativeReport {
    pub fn leading_error(&self) -> f64 {
        (self.leading_ratio / self.leading_expected - 1.0).abs()
    }

    /// Fitted constants do not grow as δ decreases: each is at most twice
    /// its value at the largest δ.
    pub fn k_bounded(&self) -> bool {
        let Some(first) = self.rows.first() else {
            return false;
        };
        let ok = |k: f64, k0: f64| k.is_finite() && k.abs() <= 2.0 * k0.abs().max(1e-12);
        self.rows
            .iter()
            .all(|r| ok(r.k_pressure, first.k_pressure) && ok(r.k_energy, first.k_energy))
    }

    pub fn verdict(&self) -> Verdict {
        let ok = self.c_energy.is_finite()
            && self.c_pressure.is_finite()
            && self.rows.iter().all(|r| r.lower_violations == 0)
            && self.k_bounded()
            && self.leading_error() <= 0.01;
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Sampled checks of the relative-quantity bounds for each δ in `deltas`.
pub fn relative_inequality_suite(
    law: &GasLaw,
    v_minus: f64,
    deltas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<RelativeReport> {
    if !(v_minus > 0.0) {
        return Err(ShockError::domain(format!(
            "v_minus must be positive, got {v_minus}"
        )));
    }
    let g = law.gamma();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut c_energy, mut c_pressure) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let w = rng.gen_range(0.05..2.0) * v_minus;
        let v = rng.gen_range(0.05..3.0) * v_minus;
        if (v - w).abs() < 1e-9 * v_minus {
            continue;
        }
        let d2 = (v - w) * (v - w);
        c_energy = c_energy.max(d2 / rel_energy(law, v, w));
        c_pressure = c_pressure.max(d2 / rel_pressure(law, v, w));
    }

    let p_minus = law.p(v_minus);
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if !(delta > 0.0) {
            return Err(ShockError::domain(format!(
                "δ must be positive, got {delta}"
            )));
        }
        let mut row = DeltaRow {
            delta,
            samples: 0,
            skipped: 0,
            k_pressure: f64::NEG_INFINITY,
            k_energy: f64::NEG_INFINITY,
            lower_margin: f64::INFINITY,
            lower_violations: 0,
        };
        for _ in 0..samples {
            // Box slightly larger than the hypotheses, so some samples are skipped.
            let pw = p_minus + 1.2 * delta * rng.gen_range(-1.0..1.0);
            let pv = pw + 1.2 * delta * rng.gen_range(-1.0..1.0);
            if pw <= 0.0 || pv <= 0.0 || (pw - p_minus).abs() >= delta || (pv - pw).abs() >= delta {
                row.skipped += 1;
                continue;
            }
            let (w, v) = (volume_of_pressure(law, pw), volume_of_pressure(law, pv));
            let dp = pressure_jump(law, v, w);
            if dp.abs() < 1e-6 * delta {
                row.skipped += 1;
                continue;
            }
            row.samples += 1;
            let d2 = dp * dp;
            let lead_p = (g + 1.0) / (2.0 * g * pw);
            let lead_q = 1.0 / (2.0 * g * pw.powf(1.0 + 1.0 / g));
            let q = rel_energy(law, v, w);
            row.k_pressure = row
                .k_pressure
                .max((rel_pressure(law, v, w) / d2 - lead_p) / delta);
            row.k_energy = row.k_energy.max((q / d2 - lead_q) / delta);
            let lower = lead_q * d2 - (1.0 + g) / (3.0 * g * g) * dp * d2 / pw.powf(2.0 + 1.0 / g);
            let m = (q - lower) / d2;
            row.lower_margin = row.lower_margin.min(m);
            if m < -1e-12 {
                row.lower_violations += 1;
            }
        }
        rows.push(row);
    }

    let (w, v) = (v_minus, 1.001 * v_minus);
    let dp = pressure_jump(law, v, w);
    Ok(RelativeReport {
        gamma: g,
        v_minus,
        c_energy,
        c_pressure,
        rows,
        leading_ratio: rel_energy(law, v, w) / (dp * dp),
        leading_expected: 1.0 / (2.0 * g * law.p(w).powf(1.0 + 1.0 / g)),
        seed,
    })
}

/// Inverse-pressure bracket and its δ-scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct InversePressureReport {
    pub deltas: Vec<f64>,
    /// Max of the bracket over `[v₋, v₊]` for each δ.
    pub maxima: Vec<f64>,
    /// Least-squares slope of `log max` against `log δ`.
    pub slope: f64,
}

/// `(v − a)/(p(v) − p(a))`, with a Taylor patch near `v = a`.
fn secant_inverse(law: &GasLaw, v: f64, a: f64) -> f64 {
    let h = v - a;
    if h.abs() < 1e-3 * a {
        1.0 / (law.dp(a) + 0.5 * law.d2p(a) * h + law.d3p(a) * h * h / 6.0)
    } else {
        h / (law.p(v) - law.p(a))
    }
}

/// `(v−v₋)/(p(v)−p(v₋)) + (v−v₊)/(p(v₊)−p(v)) + ½ p″(v₋)/p′(v₋)² (v₋−v₊)`.
pub fn inverse_pressure_bracket(law: &GasLaw, v_minus: f64, v_plus: f64, v: f64) -> f64 {
    let c = 0.5 * law.d2p(v_minus) / (law.dp(v_minus) * law.dp(v_minus));
    secant_inverse(law, v, v_minus) - secant_inverse(law, v, v_plus) + c * (v_minus - v_plus)
}

/// `v₊` with `p(v₋) − p(v₊) = δ`.
pub fn v_plus_for(law: &GasLaw, v_minus: f64, delta: f64) -> Result<f64> {
    let target = law.p(v_minus) - delta;
    if !(delta > 0.0) || !(target > 0.0) {
        return Err(ShockError::domain(format!(
            "no v₊ with p(v₋) − p(v₊) = {delta}"
        )));
    }
    Ok(volume_of_pressure(law, target))
}

pub fn inverse_pressure_scaling(
    law: &GasLaw,
    v_minus: f64,
    deltas: &[f64],
    samples: usize,
) -> Result<InversePressureReport> {
    if deltas.len() < 2 || samples < 2 {
        return Err(ShockError::config(
            "scaling fit needs at least two δ values and two samples",
        ));
    }
    let mut maxima = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let vp = v_plus_for(law, v_minus, d)?;
        let m = (0..samples)
            .map(|i| {
                let v = v_minus + (vp - v_minus) * i as f64 / (samples - 1) as f64;
                inverse_pressure_bracket(law, v_minus, vp, v).abs()
            })
            .fold(0.0f64, f64::max);
        if !m.is_finite() {
            return Err(ShockError::Numerical {
                t: 0.0,
                msg: format!("bracket not finite at δ = {d}"),
            });
        }
        maxima.push(m);
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = maxima.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(InversePressureReport {
        deltas: deltas.to_vec(),
        maxima,
        slope: sxy / sxx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> GasLaw {
        GasLaw::new(2.0).unwrap()
    }

    #[test]
    fn series_matches_direct_evaluation() {
        let l = law();
        for (v, w) in [(1.3, 1.0), (1.02, 1.0), (0.97, 1.1)] {
            assert!((rel_energy(&l, v, w) - l.q_rel(v, w)).abs() < 1e-13);
            assert!((rel_pressure(&l, v, w) - l.p_rel(v, w)).abs() < 1e-13);
            assert!((pressure_jump(&l, v, w) - (l.p(v) - l.p(w))).abs() < 1e-14);
        }
        assert_eq!(rel_energy(&l, 1.0, 1.0), 0.0);
        assert_eq!(rel_pressure(&l, 1.0, 1.0), 0.0);
    }

    #[test]
    fn leading_coefficient() {
        let r = relative_inequality_suite(&law(), 1.0, &[0.1, 0.05, 0.025], 20_000, 3).unwrap();
        assert_eq!(r.leading_expected, 0.25);
        assert!(r.leading_error() < 0.01, "{}", r.leading_ratio);
        assert!(r.k_bounded(), "{:?}", r.rows);
        assert!(r
            .rows
            .iter()
            .all(|row| row.skipped > 0 && row.lower_violations == 0));
        assert_eq!(r.verdict(), Verdict::Pass);
    }

    #[test]
    fn endpoint_limit() {
        let l = law();
        assert!((secant_inverse(&l, 1.0, 1.0) - 1.0 / l.dp(1.0)).abs() < 1e-15);
        let h = 1e-7;
        assert!((secant_inverse(&l, 1.0 + h, 1.0) - 1.0 / l.dp(1.0)).abs() < 1e-6);
    }

    #[test]
    fn inverse_pressure_slope() {
        let l = law();
        let r = inverse_pressure_scaling(&l, 1.0, &[0.1, 0.05, 0.025, 0.0125], 10_000).unwrap();
        assert!((1.8..=2.2).contains(&r.slope), "{}", r.slope);
        assert!(v_plus_for(&l, 1.0, 1.5).is_err());
    }
}
