use shocklab::gas::Shock;
use shocklab::profile::{
    linearized_decay_rates, solve_profile, ProfileGrid, ProfileTable, Viscosity,
};

fn table(v_plus: f64, grid: ProfileGrid) -> ProfileTable {
    let shock = Shock::new(2.0, 1.0, v_plus, 0.0).unwrap();
    solve_profile(&shock, Viscosity::new(1.0, 0.0), grid).unwrap()
}

/// Gauss–Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let dp = {
                    let (mut p0, mut p1) = (1.0, z);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    n as f64 * (z * p1 - p0) / (z * z - 1.0)
                };
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Position where the profile takes the value `v`, from the implicit form
/// `ξ(v) = ∫_{v_mid}^{v} k/g(s) ds`, by composite Gauss–Legendre quadrature.
fn implicit_position(t: &ProfileTable, v: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let s = t.shock.states;
    let ss = t.shock.constants.sigma_star;
    let k = t.viscosity.longitudinal() * ss;
    let law = t.shock.law;
    let g = |x: f64| -ss * ss * (x - s.v_minus) - (law.p(x) - law.p(s.v_minus));
    let mid = 0.5 * (s.v_minus + s.v_plus);
    // Geometric panels toward the singular endpoint.
    let (end, target) = if v < mid {
        (s.v_minus, v)
    } else {
        (s.v_plus, v)
    };
    let total = (mid - end).abs();
    let remaining = (target - end).abs();
    let mut edges = vec![mid];
    let mut dist = total;
    while dist * 0.5 > remaining {
        dist *= 0.5;
        edges.push(end + (mid - end).signum() * dist);
    }
    edges.push(target);
    let mut xi = 0.0;
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for (z, w) in gl.0.iter().zip(&gl.1) {
            let x = 0.5 * (a + b) + 0.5 * (b - a) * z;
            xi += 0.5 * (b - a) * w * k / g(x);
        }
    }
    xi
}

#[test]
fn residual_and_independent_implicit_solution() {
    let t = table(2.0, ProfileGrid::default());
    let res = t.ode_residual();
    println!("ode residual {res:e}");
    assert!(res <= 1e-10);

    let gl = gauss_legendre(40);
    let mut worst: f64 = 0.0;
    for i in (0..t.len()).step_by(7) {
        if t.tail_gap[i] < 1e-8 {
            continue;
        }
        let xi = implicit_position(&t, t.v_s[i], &gl);
        // Convert the position error into a value error along the profile.
        worst = worst.max((xi - t.xi_grid[i]).abs() * t.d1_v[i]);
    }
    println!("implicit-form value error {worst:e}");
    assert!(worst <= 1e-10);
}

#[test]
fn decay_rates_match_linearization() {
    let t = table(2.0, ProfileGrid::default());
    let (fit_l, fit_r) = t.decay_rate_fit();
    let (lin_l, lin_r) = linearized_decay_rates(&t.shock, t.viscosity);
    println!("left {fit_l} vs {lin_l}, right {fit_r} vs {lin_r}");
    assert!(fit_l > 0.0 && fit_r > 0.0);
    assert!((fit_l - lin_l).abs() / lin_l <= 0.05);
    assert!((fit_r - lin_r).abs() / lin_r <= 0.05);
}

fn v_plus_for_delta(delta: f64) -> f64 {
    // p(v₋) − p(v₊) = δ with v₋ = 1, γ = 2
    (1.0 - delta).powf(-0.5)
}

#[test]
fn decay_exponent_scales_with_strength() {
    let deltas = [0.2, 0.1, 0.05];
    let rates: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| table(v_plus_for_delta(d), ProfileGrid::default()).decay_rate_fit())
        .collect();
    for w in rates.windows(2) {
        // halving δ should halve both exponents
        let (l0, r0) = w[0];
        let (l1, r1) = w[1];
        assert!(((l0 / l1) / 2.0 - 1.0).abs() <= 0.2, "{l0} {l1}");
        assert!(((r0 / r1) / 2.0 - 1.0).abs() <= 0.2, "{r0} {r1}");
    }
}

#[test]
fn derivative_bounds_scale_with_strength() {
    let mut k2 = Vec::new();
    let mut k3 = Vec::new();
    for d in [0.2, 0.1, 0.05] {
        let t = table(v_plus_for_delta(d), ProfileGrid::default());
        let delta = t.shock.constants.delta;
        let mut m2: f64 = 0.0;
        let mut m3: f64 = 0.0;
        for i in 0..t.len() {
            m2 = m2.max(t.d2_v[i].abs() / (delta * t.d1_v[i]));
            m3 = m3.max(t.d3_v[i].abs() / (delta * delta * t.d1_v[i]));
        }
        k2.push(m2);
        k3.push(m3);
    }
    println!("K2 {k2:?} K3 {k3:?}");
    for k in [&k2, &k3] {
        let max = k.iter().cloned().fold(0.0, f64::max);
        let min = k.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max.is_finite() && max / min < 2.0);
    }
}

#[test]
fn interpolation_refinement_is_third_order_or_better() {
    let coarse = table(
        2.0,
        ProfileGrid {
            spacing: 0.2,
            half_length: Some(60.0),
        },
    );
    let medium = table(
        2.0,
        ProfileGrid {
            spacing: 0.1,
            half_length: Some(60.0),
        },
    );
    let fine = table(
        2.0,
        ProfileGrid {
            spacing: 0.05,
            half_length: Some(60.0),
        },
    );
    let err = |a: &ProfileTable, b: &ProfileTable| {
        (0..4000)
            .map(|j| -20.0 + 40.0 * (j as f64 + 0.37) / 4000.0)
            .map(|x| (a.eval(x).v - b.eval(x).v).abs())
            .fold(0.0, f64::max)
    };
    let e_coarse = err(&coarse, &fine);
    let e_medium = err(&medium, &fine);
    let order = (e_coarse / e_medium).log2();
    println!("interp errors {e_coarse:e} {e_medium:e} order {order}");
    assert!(order >= 2.8);
    assert!(e_coarse <= 0.2f64.powi(3));
}
