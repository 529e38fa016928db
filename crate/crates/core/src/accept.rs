//! Acceptance suite: one pass/fail outcome per criterion, shared by the
//! `accept` mode and the acceptance test target.

use std::time::Instant;

use crate::config::StabilityRun;
use crate::diagnostics::{decay_report, entropy_balance_residual, DecayReport, FunctionalRecord};
use crate::error::Result;
use crate::gas::Shock;
use crate::grid::Grid3;
use crate::inequality::legendre::ode_residual;
use crate::inequality::poincare::{poincare_check, random_poincare_suite, AnalyticFn, Resolution};
use crate::inequality::relative::{inverse_pressure_scaling, relative_inequality_suite};
use crate::inequality::Verdict;
use crate::mms::Manufactured;
use crate::par::ExecPolicy;
use crate::profile::{linearized_decay_rates, solve_profile, ProfileGrid, Viscosity};
use crate::sim::{max_difference, SimConfig, Simulation};
use crate::solver::{cfl_dt, FlowModel, Stepper};
use crate::state::Perturbation;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// `criterion N PASS|FAIL title: detail (t s)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {} {} {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.seconds
        )
    }
}

fn timed(
    id: u32,
    title: &'static str,
    f: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionOutcome {
    let tic = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome {
        id,
        title,
        passed,
        detail,
        seconds: tic.elapsed().as_secs_f64(),
    }
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// 1: profile for `γ = 2, v₋ = 1, v₊ = 2, μ = 1, λ = 0`.
pub fn profile_correctness() -> CriterionOutcome {
    timed(1, "profile correctness", || {
        let shock = Shock::new(2.0, 1.0, 2.0, 0.0)?;
        let visc = Viscosity::new(1.0, 0.0);
        let t = solve_profile(&shock, visc, ProfileGrid::default())?;
        let res = t.ode_residual();
        let increasing = t.strictly_increasing();
        let (fl, fr) = t.decay_rate_fit();
        let (el, er) = linearized_decay_rates(&shock, visc);
        let (dl, dr) = (((fl - el) / el).abs(), ((fr - er) / er).abs());
        let passed = res <= 1e-10 && increasing && dl <= 0.05 && dr <= 0.05;
        Ok((
            passed,
            format!(
                "residual {res:.2e}, increasing {increasing}, decay rates {fl:.4}/{fr:.4} vs {el:.4}/{er:.4} ({:.2}%/{:.2}%)",
                100.0 * dl,
                100.0 * dr
            ),
        ))
    })
}

/// 2: unperturbed profile on `grid` for `steps` steps.
pub fn steady_state(grid: Grid3, steps: usize) -> CriterionOutcome {
    timed(2, "steady-state preservation", || {
        let cfg = SimConfig {
            grid,
            perturbation: Perturbation::none(),
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg)?;
        for _ in 0..steps {
            sim.step()?;
        }
        let drift = max_difference(&sim.state, &sim.initial);
        Ok((
            drift <= 1e-8,
            format!(
                "max drift {drift:.2e} after {steps} steps, dt {:.3e}",
                sim.dt
            ),
        ))
    })
}

/// Max-norm error of the manufactured solution after integrating to `t_end`
/// with a common step `dt` on a grid of `levels`.
pub fn manufactured_errors(
    levels: &[(usize, usize)],
    half_length: f64,
    t_end: f64,
) -> Result<Vec<f64>> {
    let shock = Shock::new(2.0, 1.0, 1.1, 0.0)?;
    let model = FlowModel {
        law: shock.law,
        viscosity: Viscosity::new(1.0, 0.0),
        sigma: shock.constants.sigma,
    };
    let m = Manufactured::default();
    let src = |x: [f64; 3], _t: f64| m.source(&model, x);
    let &(n1, n2) = levels.last().expect("at least one level");
    let finest = Grid3::new(half_length, n1, n2, n2)?;
    let dt0 = cfl_dt(&model, &m.state(finest), 0.5, ExecPolicy::Parallel);
    let steps = (t_end / dt0).ceil() as usize;
    let dt = t_end / steps as f64;
    let mut errors = Vec::new();
    for &(n1, n2) in levels {
        let grid = Grid3::new(half_length, n1, n2, n2)?;
        let exact = m.state(grid);
        let mut s = exact.clone();
        let mut stepper = Stepper::new(model, ExecPolicy::Parallel);
        let mut x = 0.0;
        for k in 0..steps {
            stepper.step(
                &mut s,
                k as f64 * dt,
                dt,
                &mut x,
                |_, _| Ok(0.0),
                Some(&src),
            )?;
        }
        errors.push(max_difference(&s, &exact));
    }
    Ok(errors)
}

/// Differences between successive halvings of `dt` on a short perturbed run
/// (state and shift), giving the temporal self-convergence order.
pub fn richardson_time_errors(grid: Grid3, t_end: f64, base_steps: usize) -> Result<Vec<f64>> {
    let mut finals = Vec::new();
    for level in 0..3 {
        let steps = base_steps << level;
        let cfg = SimConfig {
            grid,
            t_end,
            dt: Some(t_end / steps as f64),
            output_stride: Some(steps),
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg)?;
        while !sim.done() {
            sim.step()?;
        }
        finals.push((sim.state.clone(), sim.shift.x));
    }
    Ok(finals
        .windows(2)
        .map(|w| max_difference(&w[0].0, &w[1].0).max((w[0].1 - w[1].1).abs()))
        .collect())
}

/// 3: space order by manufactured solution, time order by Richardson.
pub fn scheme_order() -> CriterionOutcome {
    timed(3, "scheme order", || {
        let e = manufactured_errors(&[(64, 8), (128, 16), (256, 32)], 6.0, 0.02)?;
        let space = order(e[1], e[2]);
        let grid = Grid3::new(60.0, 240, 4, 4)?;
        let r = richardson_time_errors(grid, 0.2, 50)?;
        let time = order(r[0], r[1]);
        let passed = (space - 2.0).abs() <= 0.2 && (time - 3.0).abs() <= 0.3;
        Ok((
            passed,
            format!(
                "space errors {:.2e} {:.2e} {:.2e} order {space:.3} (coarse pair {:.3}); time differences {:.2e} {:.2e} order {time:.3}",
                e[0],
                e[1],
                e[2],
                order(e[0], e[1]),
                r[0],
                r[1]
            ),
        ))
    })
}

/// Balance residual at the record nearest `probe` of a short default run.
pub fn balance_residual_at(
    grid: Grid3,
    dt: f64,
    stride: usize,
    t_end: f64,
    probe: f64,
) -> Result<(f64, Vec<FunctionalRecord>)> {
    let cfg = SimConfig {
        grid,
        t_end,
        dt: Some(dt),
        output_stride: Some(stride),
        ..SimConfig::default()
    };
    let mut sim = Simulation::new(cfg)?;
    let mut recs = sim.run(|_, _| Ok(()))?;
    entropy_balance_residual(&mut recs)?;
    let r = recs[1..recs.len() - 1]
        .iter()
        .min_by(|a, b| (a.t - probe).abs().total_cmp(&(b.t - probe).abs()))
        .expect("interior record");
    Ok((r.balance_residual, recs))
}

/// 4: balance residual refinement and the independent-path shift identity.
pub fn entropy_balance() -> CriterionOutcome {
    timed(4, "entropy balance identity", || {
        let mut worst_identity = 0.0f64;
        // Space: all three directions refined together, common dt and spacing.
        let mut space = Vec::new();
        for (n1, n2) in [(240, 8), (480, 16), (960, 32)] {
            let (r, recs) =
                balance_residual_at(Grid3::new(60.0, n1, n2, n2)?, 5e-5, 10, 0.02, 0.01)?;
            worst_identity = recs
                .iter()
                .map(|r| r.xdot_identity_error())
                .fold(worst_identity, f64::max);
            space.push(r);
        }
        let space_order = order(space[1], space[2]);
        // Record spacing: the spatial part cancels in successive differences.
        let mut spacing = Vec::new();
        for stride in [40, 20, 10] {
            let (r, recs) =
                balance_residual_at(Grid3::new(60.0, 240, 4, 4)?, 1e-3, stride, 0.4, 0.2)?;
            worst_identity = recs
                .iter()
                .map(|r| r.xdot_identity_error())
                .fold(worst_identity, f64::max);
            spacing.push(r);
        }
        let time_order = order(
            (spacing[0] - spacing[1]).abs(),
            (spacing[1] - spacing[2]).abs(),
        );
        let passed = space_order >= 1.8 && time_order >= 1.0 && worst_identity <= 1e-12;
        Ok((
            passed,
            format!(
                "residual {:.2e} {:.2e} {:.2e} space order {space_order:.3} (coarse pair {:.3}); spacing order {time_order:.3}; shift identity {worst_identity:.1e}",
                space[0],
                space[1],
                space[2],
                order(space[0], space[1])
            ),
        ))
    })
}

/// Outcome of the long perturbed run behind criteria 5 and 8.
#[derive(Debug, Clone)]
pub struct StabilityOutcome {
    pub config: SimConfig,
    pub report: DecayReport,
    pub mass_error: f64,
    pub identity_error: f64,
    pub boundary_activity: f64,
    pub records: Vec<FunctionalRecord>,
    pub seconds: f64,
}

pub fn stability_config(run: StabilityRun) -> SimConfig {
    match run {
        StabilityRun::Full => SimConfig::default(),
        StabilityRun::Reduced => SimConfig {
            grid: Grid3 {
                half_length: 100.0,
                n1: 512,
                n2: 8,
                n3: 8,
            },
            t_end: 25.0,
            ..SimConfig::default()
        },
    }
}

pub fn stability_run(config: SimConfig, transient: f64) -> Result<StabilityOutcome> {
    let tic = Instant::now();
    let mut sim = Simulation::new(config.clone())?;
    let records = sim.run(|_, _| Ok(()))?;
    let report = decay_report(&records, transient)?;
    Ok(StabilityOutcome {
        config,
        report,
        mass_error: sim.mass_balance_error(),
        identity_error: records
            .iter()
            .map(|r| r.xdot_identity_error())
            .fold(0.0, f64::max),
        boundary_activity: sim.boundary_activity(),
        records,
        seconds: tic.elapsed().as_secs_f64(),
    })
}

/// 5: large-time trends of the perturbed run.
pub fn stability(run: &Result<StabilityOutcome>) -> CriterionOutcome {
    let mut c = timed(5, "stability at desk scale", || {
        let o = run
            .as_ref()
            .map_err(|e| crate::ShockError::config(e.to_string()))?;
        let r = &o.report;
        Ok((
            r.passed(),
            format!(
                "grid {}x{}x{} t_end {}: sup {:.3e} -> {:.3e} [{}]; |Xdot(1)| {:.3e} -> |Xdot(T)| {:.3e} [{}]; |X|/t {:.3e} -> {:.3e} [{}]; monotone {:.2}% [{}]",
                o.config.grid.n1,
                o.config.grid.n2,
                o.config.grid.n3,
                o.config.t_end,
                r.sup_initial,
                r.sup_final,
                r.sup_pass,
                r.xdot_at_1.abs(),
                r.xdot_final.abs(),
                r.xdot_pass,
                r.x_over_t_half,
                r.x_over_t_final,
                r.shift_growth_pass,
                100.0 * r.monotone_fraction,
                r.monotone_pass
            ),
        ))
    });
    if let Ok(o) = run {
        c.seconds = o.seconds;
    }
    c
}

/// 6: Poincaré sharpness, randomized suite and Legendre residuals.
pub fn poincare_suite(count: usize, seed: u64) -> CriterionOutcome {
    timed(6, "Poincaré suite", || {
        let f = AnalyticFn {
            f: |y: [f64; 3]| y[0],
            g: |_| [1.0, 0.0, 0.0],
            integrable: true,
        };
        let sharp = poincare_check(&f, Resolution::default())?;
        let suite =
            random_poincare_suite(count, seed, Resolution::default(), ExecPolicy::Parallel)?;
        let failures = suite
            .iter()
            .filter(|e| e.result.verdict != Verdict::Pass)
            .count();
        let legendre = (0..=10).map(|n| ode_residual(n, 2001)).fold(0.0, f64::max);
        let passed = sharp.margin.abs() <= 1e-10 && failures == 0 && legendre <= 1e-10;
        Ok((
            passed,
            format!(
                "sharpness margin {:.1e}; {failures}/{count} random failures (seeds {seed}..); Legendre residual {legendre:.1e}",
                sharp.margin
            ),
        ))
    })
}

/// 7: relative-quantity coefficient and inverse-pressure exponent.
pub fn relative_suite() -> CriterionOutcome {
    timed(7, "relative-quantity and inverse-pressure suites", || {
        let law = crate::gas::GasLaw::new(2.0)?;
        let rel = relative_inequality_suite(&law, 1.0, &[0.1, 0.05, 0.025], 20_000, 7)?;
        let inv = inverse_pressure_scaling(&law, 1.0, &[0.1, 0.05, 0.025, 0.0125], 10_000)?;
        let passed = rel.leading_error() <= 0.01 && (1.8..=2.2).contains(&inv.slope);
        Ok((
            passed,
            format!(
                "Q(v|w)/|dp|^2 = {:.5} vs {:.5} ({:.3}%); inverse-pressure slope {:.3}",
                rel.leading_ratio,
                rel.leading_expected,
                100.0 * rel.leading_error(),
                inv.slope
            ),
        ))
    })
}

/// 8: mass balance over the stability run.
pub fn conservation(run: &Result<StabilityOutcome>) -> CriterionOutcome {
    timed(8, "conservation", || {
        let o = run
            .as_ref()
            .map_err(|e| crate::ShockError::config(e.to_string()))?;
        Ok((
            o.mass_error <= 1e-9,
            format!(
                "mass balance error {:.2e} over t = {} (boundary activity {:.1e})",
                o.mass_error, o.config.t_end, o.boundary_activity
            ),
        ))
    })
}

/// Runs criteria 1 to 8 in order.
pub fn run_suite(
    run: StabilityRun,
    transient: f64,
    poincare_count: usize,
    seed: u64,
) -> Vec<CriterionOutcome> {
    let mut out = vec![
        profile_correctness(),
        steady_state(SimConfig::default().grid, 1000),
        scheme_order(),
        entropy_balance(),
    ];
    let stab = stability_run(stability_config(run), transient);
    out.push(stability(&stab));
    out.push(poincare_suite(poincare_count, seed));
    out.push(relative_suite());
    out.push(conservation(&stab));
    out
}
