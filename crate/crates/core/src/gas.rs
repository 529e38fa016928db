//! γ-law thermodynamics and the algebra of planar 2-shocks.
//!
//! Everything here is written in terms of the specific volume `v = 1/ρ`,
//! with pressure `p(v) = v^(-γ)` and internal energy `Q(v) = v^(1-γ)/(γ-1)`.
//! The checked accessors (`pressure`, `internal_energy`, ...) validate their
//! input; the short unchecked ones (`p`, `dp`, ...) are meant for inner loops
//! where positivity is already an invariant of the caller.

use crate::error::{Result, ShockError};

/// Pressure law `p(v) = b v^(-γ)` with `b` normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasLaw {
    gamma: f64,
    pressure_scale: f64,
}

/// `(1+r)^a − 1 − a r`; a Taylor sum for small `|r|` avoids the
/// cancellation of the direct form.
fn power_remainder(a: f64, r: f64) -> f64 {
    if r.abs() > 0.1 {
        return (1.0 + r).powf(a) - 1.0 - a * r;
    }
    let mut term = 0.5 * a * (a - 1.0) * r * r;
    let mut sum = term;
    let mut k = 2.0;
    while term.abs() > 1e-17 * sum.abs() && k < 40.0 {
        term *= (a - k) / (k + 1.0) * r;
        sum += term;
        k += 1.0;
    }
    sum
}

/// Scalar functions for which relative quantities are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarFn {
    Pressure,
    InternalEnergy,
}

impl GasLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(ShockError::domain(format!(
                "adiabatic exponent must exceed 1, got {gamma}"
            )));
        }
        Ok(Self {
            gamma,
            pressure_scale: 1.0,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure_scale(&self) -> f64 {
        self.pressure_scale
    }

    fn check(v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ShockError::domain(format!(
                "specific volume must be positive, got {v}"
            )))
        }
    }

    pub fn pressure(&self, v: f64) -> Result<f64> {
        Self::check(v)?;
        Ok(self.p(v))
    }

    /// `p'(v) = -γ v^(-γ-1)`.
    pub fn pressure_derivative(&self, v: f64) -> Result<f64> {
        Self::check(v)?;
        Ok(self.dp(v))
    }

    /// `p''(v) = γ(γ+1) v^(-γ-2)`.
    pub fn pressure_second_derivative(&self, v: f64) -> Result<f64> {
        Self::check(v)?;
        Ok(self.d2p(v))
    }

    pub fn internal_energy(&self, v: f64) -> Result<f64> {
        Self::check(v)?;
        Ok(self.q(v))
    }

    /// `F(v|w) = F(v) - F(w) - F'(w)(v - w)`.
    pub fn relative_quantity(&self, f: ScalarFn, v: f64, w: f64) -> Result<f64> {
        Self::check(v)?;
        Self::check(w)?;
        Ok(match f {
            ScalarFn::Pressure => self.p_rel(v, w),
            ScalarFn::InternalEnergy => self.q_rel(v, w),
        })
    }

    #[inline]
    pub fn p(&self, v: f64) -> f64 {
        self.pressure_scale * v.powf(-self.gamma)
    }

    #[inline]
    pub fn dp(&self, v: f64) -> f64 {
        -self.gamma * self.p(v) / v
    }

    #[inline]
    pub fn d2p(&self, v: f64) -> f64 {
        self.gamma * (self.gamma + 1.0) * self.p(v) / (v * v)
    }

    #[inline]
    pub fn d3p(&self, v: f64) -> f64 {
        -self.gamma * (self.gamma + 1.0) * (self.gamma + 2.0) * self.p(v) / (v * v * v)
    }

    #[inline]
    pub fn q(&self, v: f64) -> f64 {
        self.pressure_scale * v.powf(1.0 - self.gamma) / (self.gamma - 1.0)
    }

    /// `Q'(v) = -p(v)`.
    #[inline]
    pub fn dq(&self, v: f64) -> f64 {
        -self.p(v)
    }

    /// `p(v|w)`, nonnegative without cancellation near `v = w`.
    #[inline]
    pub fn p_rel(&self, v: f64, w: f64) -> f64 {
        self.p(w) * power_remainder(-self.gamma, (v - w) / w)
    }

    /// `Q(v|w)`, nonnegative without cancellation near `v = w`.
    #[inline]
    pub fn q_rel(&self, v: f64, w: f64) -> f64 {
        self.q(w) * power_remainder(1.0 - self.gamma, (v - w) / w)
    }

    /// Pressure as a function of density, `p(ρ) = ρ^γ`.
    #[inline]
    pub fn pressure_of_density(&self, rho: f64) -> f64 {
        if self.gamma == 2.0 {
            return self.pressure_scale * rho * rho;
        }
        self.pressure_scale * rho.powf(self.gamma)
    }

    /// Sound speed `c = sqrt(γ ρ^(γ-1))`.
    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.gamma * self.pressure_scale * rho.powf(self.gamma - 1.0)).sqrt()
    }

    /// Second characteristic speed `Λ₂(ρ, u₁) = u₁ + sqrt(p'(ρ))` in density form.
    pub fn lambda2(&self, rho: f64, u1: f64) -> f64 {
        u1 + self.sound_speed(rho)
    }
}

/// Far-field states of a planar 2-shock. Transverse velocities are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndStates {
    pub v_minus: f64,
    pub v_plus: f64,
    pub u1_minus: f64,
    pub u1_plus: f64,
}

impl EndStates {
    pub fn rho_minus(&self) -> f64 {
        1.0 / self.v_minus
    }

    pub fn rho_plus(&self) -> f64 {
        1.0 / self.v_plus
    }
}

/// Constants derived from the end states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockConstants {
    /// Shock speed σ.
    pub sigma: f64,
    /// Mass flux σ* through the shock.
    pub sigma_star: f64,
    /// Strength δ = p(v₋) − p(v₊).
    pub delta: f64,
    /// Weight amplitude ν = √δ.
    pub nu: f64,
    /// σ₋ = √(−p′(v₋)).
    pub sigma_minus: f64,
    /// α₋ = (γ+1)/(2γ σ₋ p(v₋)).
    pub alpha_minus: f64,
    /// Gain M in the shift ODE.
    pub shift_gain: f64,
}

/// Planar 2-shock: gas law, end states, and derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shock {
    pub law: GasLaw,
    pub states: EndStates,
    pub constants: ShockConstants,
}

/// Builds the 2-shock with the given right state and left specific volume.
pub fn solve_rankine_hugoniot(
    v_minus: f64,
    v_plus: f64,
    u1_plus: f64,
    law: GasLaw,
) -> Result<Shock> {
    GasLaw::check(v_minus)?;
    GasLaw::check(v_plus)?;
    if !u1_plus.is_finite() {
        return Err(ShockError::domain("u1_plus must be finite"));
    }
    if v_minus >= v_plus {
        return Err(ShockError::NotTwoShock { v_minus, v_plus });
    }
    let p_minus = law.p(v_minus);
    let p_plus = law.p(v_plus);
    let sigma_star = (-(p_plus - p_minus) / (v_plus - v_minus)).sqrt();
    let u1_minus = u1_plus + sigma_star * (v_plus - v_minus);
    let sigma = u1_minus + sigma_star * v_minus;
    let delta = p_minus - p_plus;
    let states = EndStates {
        v_minus,
        v_plus,
        u1_minus,
        u1_plus,
    };

    let lam_minus = law.lambda2(1.0 / v_minus, u1_minus);
    let lam_plus = law.lambda2(1.0 / v_plus, u1_plus);
    if !(lam_plus < sigma && sigma < lam_minus) {
        return Err(ShockError::Consistency(format!(
            "Lax condition violated: Λ₂₊ = {lam_plus}, σ = {sigma}, Λ₂₋ = {lam_minus}"
        )));
    }

    let sigma_minus = (-law.dp(v_minus)).sqrt();
    let alpha_minus = (law.gamma + 1.0) / (2.0 * law.gamma * sigma_minus * p_minus);
    let constants = ShockConstants {
        sigma,
        sigma_star,
        delta,
        nu: delta.sqrt(),
        sigma_minus,
        alpha_minus,
        shift_gain: shift_gain_constant(&states, &law),
    };
    Ok(Shock {
        law,
        states,
        constants,
    })
}

/// `M = (5/4)·((γ+1)/(2γ))·σ₋³v₋²/p(v₋)`.
pub fn shift_gain_constant(states: &EndStates, law: &GasLaw) -> f64 {
    let g = law.gamma();
    let vm = states.v_minus;
    let sigma_minus = (-law.dp(vm)).sqrt();
    1.25 * (g + 1.0) / (2.0 * g) * sigma_minus.powi(3) * vm * vm / law.p(vm)
}

/// The same constant written as `(5/4)·α₋·σ₋⁴·v₋²`.
pub fn shift_gain_from_alpha(states: &EndStates, law: &GasLaw) -> f64 {
    let g = law.gamma();
    let vm = states.v_minus;
    let sigma_minus = (-law.dp(vm)).sqrt();
    let alpha = (g + 1.0) / (2.0 * g * sigma_minus * law.p(vm));
    1.25 * alpha * sigma_minus.powi(4) * vm * vm
}

impl Shock {
    /// Convenience constructor from `(γ, v₋, v₊, u₁₊)`.
    pub fn new(gamma: f64, v_minus: f64, v_plus: f64, u1_plus: f64) -> Result<Self> {
        solve_rankine_hugoniot(v_minus, v_plus, u1_plus, GasLaw::new(gamma)?)
    }

    /// Residuals of the two jump conditions, relative to the size of their terms.
    pub fn rankine_hugoniot_residuals(&self) -> (f64, f64) {
        let s = &self.states;
        let c = &self.constants;
        let dv = s.v_plus - s.v_minus;
        let du = s.u1_plus - s.u1_minus;
        let r1 = (-c.sigma_star * dv - du).abs() / (c.sigma_star * dv).abs().max(du.abs());
        let dp = self.law.p(s.v_plus) - self.law.p(s.v_minus);
        let r2 = (-c.sigma_star * du + dp).abs() / (c.sigma_star * du).abs().max(dp.abs());
        (r1, r2)
    }

    /// Relative disagreement of σ computed from the left and right states.
    pub fn sigma_mismatch(&self) -> f64 {
        let s = &self.states;
        let c = &self.constants;
        let left = s.u1_minus + c.sigma_star * s.v_minus;
        let right = s.u1_plus + c.sigma_star * s.v_plus;
        (left - right).abs() / left.abs().max(right.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn law2() -> GasLaw {
        GasLaw::new(2.0).unwrap()
    }

    #[test]
    fn pressure_values() {
        let law = law2();
        assert_eq!(law.pressure(1.0).unwrap(), 1.0);
        assert_relative_eq!(law.pressure(2.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(
            law.pressure_derivative(1.0).unwrap(),
            -2.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            law.pressure_second_derivative(1.0).unwrap(),
            6.0,
            max_relative = 1e-15
        );
        assert!(law.pressure(0.0).is_err());
        assert!(law.pressure(-1.0).is_err());
    }

    #[test]
    fn internal_energy_values() {
        let law = law2();
        assert_relative_eq!(law.internal_energy(1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(law.internal_energy(2.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(
            law.internal_energy(4.0).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        assert!(law.internal_energy(0.0).is_err());
    }

    #[test]
    fn relative_quantities() {
        let law = law2();
        for v in [0.3, 1.0, 7.0] {
            assert_eq!(
                law.relative_quantity(ScalarFn::Pressure, v, v).unwrap(),
                0.0
            );
        }
        assert_relative_eq!(
            law.relative_quantity(ScalarFn::Pressure, 1.0, 2.0).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            law.relative_quantity(ScalarFn::InternalEnergy, 1.0, 2.0)
                .unwrap(),
            0.25,
            max_relative = 1e-14
        );
        assert!(law
            .relative_quantity(ScalarFn::Pressure, 1.0, -2.0)
            .is_err());
    }

    #[test]
    fn bad_gamma() {
        assert!(GasLaw::new(1.0).is_err());
        assert!(GasLaw::new(f64::NAN).is_err());
    }

    #[test]
    fn rankine_hugoniot_example() {
        let shock = Shock::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let c = shock.constants;
        let s = shock.states;
        assert_relative_eq!(c.sigma_star, 0.75f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.u1_minus, 0.75f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.sigma, 3.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.delta, 0.75, max_relative = 1e-14);
        assert_relative_eq!(c.nu, 0.75f64.sqrt(), max_relative = 1e-14);

        let lm = shock.law.lambda2(1.0, s.u1_minus);
        let lp = shock.law.lambda2(0.5, s.u1_plus);
        assert!((lm - 2.280).abs() < 1e-3);
        assert_relative_eq!(lp, 1.0, max_relative = 1e-14);
        assert!(lp < c.sigma && c.sigma < lm);
    }

    #[test]
    fn degenerate_and_reversed_rejected() {
        assert!(matches!(
            Shock::new(2.0, 1.0, 1.0, 0.3),
            Err(ShockError::NotTwoShock { .. })
        ));
        assert!(matches!(
            Shock::new(2.0, 2.0, 1.0, 0.0),
            Err(ShockError::NotTwoShock { .. })
        ));
    }

    #[test]
    fn shift_gain() {
        let shock = Shock::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let m = shock.constants.shift_gain;
        assert_relative_eq!(m, 1.25 * 0.75 * 2f64.sqrt().powi(3), max_relative = 1e-14);
        assert!((m - 2.651650).abs() < 1e-6);
        let alt = shift_gain_from_alpha(&shock.states, &shock.law);
        assert!((m - alt).abs() / m <= 1e-12);

        let shock = Shock::new(1.4, 1.0, 1.3, 0.2).unwrap();
        let m = shift_gain_constant(&shock.states, &shock.law);
        let alt = shift_gain_from_alpha(&shock.states, &shock.law);
        assert!((m - alt).abs() / m <= 1e-12);
        let c = shock.constants;
        let direct = 1.25 * c.alpha_minus * c.sigma_minus.powi(4);
        assert!((m - direct).abs() / m <= 1e-12);
    }

    proptest! {
        #[test]
        fn relative_quantities_positive(v in 0.1f64..10.0, w in 0.1f64..10.0, gamma in 1.05f64..3.0) {
            prop_assume!((v - w).abs() > 1e-3);
            let law = GasLaw::new(gamma).unwrap();
            prop_assert!(law.p_rel(v, w) > 0.0);
            prop_assert!(law.q_rel(v, w) > 0.0);
        }

        #[test]
        fn relative_quantities_match_direct_form(v in 0.1f64..10.0, w in 0.1f64..10.0, gamma in 1.05f64..3.0) {
            let law = GasLaw::new(gamma).unwrap();
            let direct_p = law.p(v) - law.p(w) - law.dp(w) * (v - w);
            let direct_q = law.q(v) - law.q(w) - law.dq(w) * (v - w);
            let slack = 1e-13 * (law.p(v) + law.p(w) + law.q(v) + law.q(w)) * (1.0 + (v - w).abs());
            prop_assert!((law.p_rel(v, w) - direct_p).abs() <= slack);
            prop_assert!((law.q_rel(v, w) - direct_q).abs() <= slack);
        }

        #[test]
        fn relative_quantities_positive_near_diagonal(w in 0.1f64..10.0, r in -1e-7f64..1e-7) {
            prop_assume!(r != 0.0);
            let law = law2();
            let v = w * (1.0 + r);
            prop_assume!(v != w);
            prop_assert!(law.p_rel(v, w) > 0.0);
            prop_assert!(law.q_rel(v, w) > 0.0);
        }

        #[test]
        fn q_rel_quadratic_leading_order(w in 0.6f64..10.0, dv in -1e-3f64..1e-3) {
            let law = law2();
            let v = w + dv;
            prop_assume!(v > 0.0);
            let lead = 0.5 * (-law.dp(w)) * dv * dv;
            prop_assert!((law.q_rel(v, w) - lead).abs() <= 10.0 * dv.abs().powi(3) + 1e-15);
        }

        #[test]
        fn rankine_hugoniot_consistent(
            gamma in 1.1f64..3.0,
            v_minus in 0.2f64..3.0,
            ratio in 1.01f64..3.0,
            u1_plus in -2.0f64..2.0,
        ) {
            let shock = Shock::new(gamma, v_minus, v_minus * ratio, u1_plus).unwrap();
            let (r1, r2) = shock.rankine_hugoniot_residuals();
            prop_assert!(r1 <= 1e-12 && r2 <= 1e-12, "{r1} {r2}");
            prop_assert!(shock.sigma_mismatch() <= 1e-12);
            prop_assert!(shock.constants.delta > 0.0);
        }
    }
}
