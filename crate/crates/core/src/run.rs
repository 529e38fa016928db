//! Run lifecycle for the command-line modes: per-run output directory,
//! artifacts, and a manifest that is written whatever the outcome.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::accept::{run_suite, CriterionOutcome};
use crate::config::{ExperimentConfig, Mode};
use crate::diagnostics::{decay_report, entropy_balance_residual, write_csv, FunctionalRecord};
use crate::error::{Result, ShockError};
use crate::grid::Grid3;
use crate::inequality::gn::{gn_check, WindowedTrig};
use crate::inequality::legendre::{gram_deviation, ode_residual, GaussLegendre, GAUSS_NODES};
use crate::inequality::poincare::{
    legendre_decompose, mapped_legendre, poincare_check, random_poincare_suite,
    random_polynomial_data, AnalyticFn, Resolution,
};
use crate::inequality::relative::{inverse_pressure_scaling, relative_inequality_suite};
use crate::inequality::report::{write_report, CheckRow};
use crate::inequality::Verdict;
use crate::par::{with_threads, ExecPolicy};
use crate::profile::{linearized_decay_rates, solve_profile, ProfileGrid};
use crate::sim::Simulation;

/// Final state of a run, with its process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Usage,
    NumericalFailure,
    AcceptanceFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Usage => 1,
            Status::NumericalFailure => 2,
            Status::AcceptanceFailure => 3,
        }
    }

    fn of_error(e: &ShockError) -> Self {
        match e {
            ShockError::Config(_)
            | ShockError::Parse { .. }
            | ShockError::Domain(_)
            | ShockError::NotTwoShock { .. }
            | ShockError::InvalidPerturbation(_) => Status::Usage,
            _ => Status::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub mode: Mode,
    pub config: ExperimentConfig,
    pub out_root: PathBuf,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: Status,
    pub dir: PathBuf,
    pub message: String,
    pub summary: Value,
}

#[derive(Serialize)]
struct Manifest<'a> {
    mode: &'static str,
    status: Status,
    exit_code: i32,
    message: &'a str,
    version: &'static str,
    config_hash: &'a str,
    config: Option<&'a ExperimentConfig>,
    threads: Option<usize>,
    started_unix_ms: u128,
    wall_seconds: f64,
    artifacts: &'a [String],
    summary: &'a Value,
}

/// SHA-256 of the mode and the canonical configuration.
pub fn config_hash(mode: Mode, config: &ExperimentConfig) -> String {
    let mut h = Sha256::new();
    h.update(mode.name().as_bytes());
    h.update(config.to_toml().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn run_dir(root: &Path, started_ms: u128, hash: &str) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    let base = format!("{started_ms}-{}", &hash[..12]);
    let mut dir = root.join(&base);
    let mut k = 1;
    while dir.exists() {
        dir = root.join(format!("{base}-{k}"));
        k += 1;
    }
    fs::create_dir(&dir)?;
    Ok(dir)
}

/// Artifact bookkeeping for one run directory.
struct Artifacts {
    dir: PathBuf,
    names: Vec<String>,
}

impl Artifacts {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.names.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }
}

/// Executes `req`; only a failure to create the run directory is an `Err`.
pub fn execute(req: &RunRequest) -> Result<RunOutcome> {
    let started = unix_ms();
    let hash = config_hash(req.mode, &req.config);
    let dir = run_dir(&req.out_root, started, &hash)?;
    let tic = Instant::now();
    let mut art = Artifacts {
        dir: dir.clone(),
        names: Vec::new(),
    };
    let threads = req.threads.or(req.config.run.threads);
    let (status, message, summary) = with_threads(threads, || match dispatch(req, &mut art) {
        Ok((status, message, summary)) => (status, message, summary),
        Err(e) => (Status::of_error(&e), e.to_string(), Value::Null),
    });
    let manifest = Manifest {
        mode: req.mode.name(),
        status,
        exit_code: status.exit_code(),
        message: &message,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        config: Some(&req.config),
        threads,
        started_unix_ms: started,
        wall_seconds: tic.elapsed().as_secs_f64(),
        artifacts: &art.names,
        summary: &summary,
    };
    write_manifest(&dir, &manifest)?;
    Ok(RunOutcome {
        status,
        dir,
        message,
        summary,
    })
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let text =
        serde_json::to_string_pretty(manifest).map_err(|e| ShockError::config(e.to_string()))?;
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Records a run that could not start because its configuration was
/// rejected; the directory hash covers the raw file text.
pub fn reject_config(
    out_root: &Path,
    mode: Mode,
    raw: &str,
    err: &ShockError,
) -> Result<RunOutcome> {
    let started = unix_ms();
    let mut h = Sha256::new();
    h.update(mode.name().as_bytes());
    h.update(raw.as_bytes());
    let hash: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    let dir = run_dir(out_root, started, &hash)?;
    let message = err.to_string();
    let status = Status::Usage;
    let manifest = Manifest {
        mode: mode.name(),
        status,
        exit_code: status.exit_code(),
        message: &message,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        config: None,
        threads: None,
        started_unix_ms: started,
        wall_seconds: 0.0,
        artifacts: &[],
        summary: &Value::Null,
    };
    write_manifest(&dir, &manifest)?;
    Ok(RunOutcome {
        status,
        dir,
        message,
        summary: Value::Null,
    })
}

type Dispatch = Result<(Status, String, Value)>;

fn dispatch(req: &RunRequest, art: &mut Artifacts) -> Dispatch {
    let cfg = &req.config;
    match req.mode {
        Mode::Simulate => simulate(cfg, art),
        Mode::Profile => profile(cfg, art),
        Mode::Verify => verify(cfg, art, true),
        Mode::Poincare => verify(cfg, art, false),
        Mode::Accept => accept(cfg, art),
    }
}

fn simulate(cfg: &ExperimentConfig, art: &mut Artifacts) -> Dispatch {
    let mut sim = Simulation::new(cfg.sim_config()?)?;
    let mut shift = art.create("shift.csv")?;
    writeln!(shift, "t,X,Xdot")?;
    let mut records: Vec<FunctionalRecord> = Vec::new();
    let outcome = advance(&mut sim, cfg, art, &mut shift, &mut records);
    shift.flush()?;
    let balance_ok = entropy_balance_residual(&mut records).is_ok();
    write_csv(art.create("diagnostics.csv")?, &records)?;
    if let Err(e) = outcome {
        let mut snap = art.create("abort.snap")?;
        sim.state
            .write_snapshot(&mut snap, sim.time(), sim.shift.x)?;
        snap.flush()?;
        return Ok((
            Status::of_error(&e).max_numerical(),
            e.to_string(),
            json!({ "steps": sim.steps, "t": sim.time() }),
        ));
    }
    let report = decay_report(&records, cfg.run.transient)?;
    let sign_violations: usize = records.iter().map(|r| r.sign_violations().len()).sum();
    let summary = json!({
        "steps": sim.steps,
        "dt": sim.dt,
        "records": records.len(),
        "t_end": sim.time(),
        "shift": sim.shift.x,
        "mass_balance_error": sim.mass_balance_error(),
        "boundary_activity": sim.boundary_activity(),
        "max_shift_identity_error": records.iter().map(|r| r.xdot_identity_error()).fold(0.0, f64::max),
        "max_balance_residual": if balance_ok { records.iter().map(|r| r.balance_residual).fold(0.0, f64::max) } else { f64::NAN },
        "sign_violations": sign_violations,
        "decay": {
            "sup_initial": report.sup_initial,
            "sup_final": report.sup_final,
            "h2_initial": report.h2_initial,
            "h2_final": report.h2_final,
            "xdot_at_1": report.xdot_at_1,
            "xdot_final": report.xdot_final,
            "x_over_t_half": report.x_over_t_half,
            "x_over_t_final": report.x_over_t_final,
            "monotone_fraction": report.monotone_fraction,
            "passed": report.passed(),
        },
    });
    Ok((Status::Ok, "run completed".into(), summary))
}

impl Status {
    /// Runtime aborts are numerical failures even when caused by bad input.
    fn max_numerical(self) -> Self {
        if self == Status::Usage {
            Status::NumericalFailure
        } else {
            self
        }
    }
}

fn advance(
    sim: &mut Simulation,
    cfg: &ExperimentConfig,
    art: &mut Artifacts,
    shift: &mut impl Write,
    records: &mut Vec<FunctionalRecord>,
) -> Result<()> {
    let snap_every = cfg.run.snapshot_stride;
    let write_shift = |w: &mut dyn Write, s: &Simulation| {
        writeln!(w, "{:e},{:e},{:e}", s.shift.t, s.shift.x, s.shift.xdot)
    };
    write_shift(shift, sim)?;
    records.push(sim.record());
    while !sim.done() {
        sim.step()?;
        write_shift(shift, sim)?;
        if sim.steps.is_multiple_of(sim.stride) || sim.done() {
            sim.check_cfl()?;
            records.push(sim.record());
        }
        if let Some(k) = snap_every {
            if sim.steps.is_multiple_of(k) {
                let mut w = art.create(&format!("step{:08}.snap", sim.steps))?;
                sim.state.write_snapshot(&mut w, sim.time(), sim.shift.x)?;
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn profile(cfg: &ExperimentConfig, art: &mut Artifacts) -> Dispatch {
    let shock = cfg.shock()?;
    let visc = cfg.viscosity();
    let table = solve_profile(&shock, visc, ProfileGrid::default())?;
    let mut w = art.create("profile.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let (fl, fr) = table.decay_rate_fit();
    let (el, er) = linearized_decay_rates(&shock, visc);
    let c = shock.constants;
    let residual = table.ode_residual();
    Ok((
        Status::Ok,
        format!("profile residual {residual:e}"),
        json!({
            "ode_residual": residual,
            "residual_within_1e-10": residual <= 1e-10,
            "sigma": c.sigma, "sigma_star": c.sigma_star, "delta": c.delta, "nu": c.nu, "shift_gain": c.shift_gain,
            "decay_fit": [fl, fr], "decay_linearized": [el, er],
            "half_length": table.half_length(), "nodes": table.len(),
        }),
    ))
}

/// Inequality checks; `full` adds Gagliardo–Nirenberg, relative-quantity
/// and inverse-pressure rows to the Poincaré and Legendre ones.
pub fn inequality_rows(cfg: &ExperimentConfig, full: bool) -> Result<Vec<CheckRow>> {
    let seed = cfg.run.verify_seed;
    let res = Resolution::default();
    let mut rows = Vec::new();
    let pv = |r: &crate::inequality::poincare::PoincareResult| r.verdict;

    let c = poincare_check(
        &AnalyticFn {
            f: |_| 1.0,
            g: |_| [0.0; 3],
            integrable: true,
        },
        res,
    )?;
    rows.push(CheckRow::new(
        "poincare/constant",
        c.lhs,
        c.rhs,
        pv(&c),
        None,
    ));
    let s = poincare_check(
        &AnalyticFn {
            f: |y: [f64; 3]| y[0],
            g: |_| [1.0, 0.0, 0.0],
            integrable: true,
        },
        res,
    )?;
    let sharp = if s.margin.abs() <= 1e-10 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rows.push(CheckRow::new(
        "poincare/sharpness",
        s.lhs,
        s.rhs,
        sharp,
        None,
    ));
    let tau = 2.0 * std::f64::consts::PI;
    let t = poincare_check(
        &AnalyticFn {
            f: move |y: [f64; 3]| y[0] * (1.0 - y[0]) * (tau * y[1]).cos(),
            g: move |y: [f64; 3]| {
                [
                    (1.0 - 2.0 * y[0]) * (tau * y[1]).cos(),
                    -tau * y[0] * (1.0 - y[0]) * (tau * y[1]).sin(),
                    0.0,
                ]
            },
            integrable: true,
        },
        res,
    )?;
    rows.push(CheckRow::new(
        "poincare/transverse-example",
        t.lhs,
        t.rhs,
        pv(&t),
        None,
    ));
    for e in random_poincare_suite(cfg.run.poincare_samples, seed, res, ExecPolicy::Parallel)? {
        rows.push(CheckRow::new(
            "poincare/random",
            e.result.lhs,
            e.result.rhs,
            e.result.verdict,
            Some(e.seed),
        ));
    }
    let tol = |x: f64, t: f64| if x <= t { Verdict::Pass } else { Verdict::Fail };
    for n in 0..=10 {
        let r = ode_residual(n, 2001);
        rows.push(CheckRow::new(
            format!("legendre/ode-{n}"),
            r,
            1e-10,
            tol(r, 1e-10),
            None,
        ));
    }
    let gram = gram_deviation(11, &GaussLegendre::new(GAUSS_NODES)?);
    rows.push(CheckRow::new(
        "legendre/gram",
        gram,
        1e-10,
        tol(gram, 1e-10),
        None,
    ));
    let d = legendre_decompose(
        &mapped_legendre(1),
        10,
        Resolution {
            gauss: GAUSS_NODES,
            transverse: 4,
        },
    )?;
    let off = (0..=10)
        .filter(|&i| i != 1)
        .map(|i| d.coeff_norm(i))
        .fold(0.0, f64::max);
    rows.push(CheckRow::new(
        "legendre/basis-projection",
        off,
        1e-12,
        tol(off, 1e-12),
        None,
    ));
    let d = legendre_decompose(
        &random_polynomial_data(8, seed),
        8,
        Resolution {
            gauss: GAUSS_NODES,
            transverse: 16,
        },
    )?;
    let gap = (d.spectral_lhs - d.spectral_rhs).abs();
    rows.push(CheckRow::new(
        "legendre/spectral-identity",
        d.spectral_lhs,
        d.spectral_rhs,
        tol(gap, 1e-8 * (1.0 + d.spectral_lhs)),
        Some(seed),
    ));
    if !full {
        return Ok(rows);
    }

    let grid = Grid3::new(12.0, 480, 16, 16)?;
    let gv = |r: &crate::inequality::gn::GnResult| {
        if r.truncated {
            Verdict::HypothesisViolated
        } else {
            r.verdict
        }
    };
    let g = gn_check(
        &|x: [f64; 3]| (-0.5 * x[0] * x[0]).exp(),
        &grid,
        ExecPolicy::Parallel,
    )?;
    rows.push(CheckRow::new("gn/gaussian", g.lhs, g.rhs, gv(&g), None));
    let z = gn_check(&|_| 0.0, &grid, ExecPolicy::Parallel)?;
    rows.push(CheckRow::new("gn/zero", z.lhs, z.rhs, gv(&z), None));
    let rgrid = Grid3::new(15.0, 600, 16, 16)?;
    for k in 0..cfg.run.gn_samples as u64 {
        let f = WindowedTrig::random(seed.wrapping_add(k));
        let r = gn_check(&|x| f.eval(x), &rgrid, ExecPolicy::Parallel)?;
        rows.push(CheckRow::new(
            "gn/random",
            r.lhs,
            r.rhs,
            gv(&r),
            Some(seed.wrapping_add(k)),
        ));
    }

    let law = crate::gas::GasLaw::new(cfg.gas.gamma)?;
    let v_minus = cfg.gas.v_minus;
    let rel = relative_inequality_suite(&law, v_minus, &[0.1, 0.05, 0.025], 20_000, seed)?;
    rows.push(CheckRow::new(
        "relative/leading-coefficient",
        rel.leading_error(),
        0.01,
        tol(rel.leading_error(), 0.01),
        Some(seed),
    ));
    let finite = |x: f64| {
        if x.is_finite() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    rows.push(CheckRow::new(
        "relative/uniform-c-energy",
        rel.c_energy,
        f64::INFINITY,
        finite(rel.c_energy),
        Some(seed),
    ));
    rows.push(CheckRow::new(
        "relative/uniform-c-pressure",
        rel.c_pressure,
        f64::INFINITY,
        finite(rel.c_pressure),
        Some(seed),
    ));
    let k0 = rel.rows[0].clone();
    for r in &rel.rows {
        let bound_p = 2.0 * k0.k_pressure.abs().max(1e-12);
        let bound_q = 2.0 * k0.k_energy.abs().max(1e-12);
        rows.push(CheckRow::new(
            format!("relative/k-pressure-delta-{}", r.delta),
            r.k_pressure,
            bound_p,
            tol(r.k_pressure, bound_p),
            Some(seed),
        ));
        rows.push(CheckRow::new(
            format!("relative/k-energy-delta-{}", r.delta),
            r.k_energy,
            bound_q,
            tol(r.k_energy, bound_q),
            Some(seed),
        ));
        let lv = if r.lower_violations == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        rows.push(CheckRow::new(
            format!("relative/lower-bound-delta-{}", r.delta),
            -r.lower_margin,
            0.0,
            lv,
            Some(seed),
        ));
    }
    let inv = inverse_pressure_scaling(&law, v_minus, &[0.1, 0.05, 0.025, 0.0125], 10_000)?;
    let slope_err = (inv.slope - 2.0).abs();
    rows.push(CheckRow::new(
        "inverse-pressure/slope",
        slope_err,
        0.2,
        tol(slope_err, 0.2),
        None,
    ));
    for (d, m) in inv.deltas.iter().zip(&inv.maxima) {
        rows.push(CheckRow::new(
            format!("inverse-pressure/max-delta-{d}"),
            *m,
            f64::INFINITY,
            finite(*m),
            None,
        ));
    }
    Ok(rows)
}

fn verify(cfg: &ExperimentConfig, art: &mut Artifacts, full: bool) -> Dispatch {
    let rows = inequality_rows(cfg, full)?;
    let name = if full { "verify.csv" } else { "poincare.csv" };
    write_report(art.create(name)?, &rows).map_err(|e| ShockError::config(e.to_string()))?;
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| r.failed())
        .map(|r| r.name.as_str())
        .collect();
    let status = if failed.is_empty() {
        Status::Ok
    } else {
        Status::AcceptanceFailure
    };
    let message = format!("{} checks, {} failed", rows.len(), failed.len());
    Ok((
        status,
        message,
        json!({ "checks": rows.len(), "failed": failed }),
    ))
}

fn accept(cfg: &ExperimentConfig, art: &mut Artifacts) -> Dispatch {
    let outcomes = run_suite(
        cfg.run.stability_run,
        cfg.run.transient,
        cfg.run.poincare_samples,
        cfg.run.verify_seed,
    );
    let mut w = art.create("acceptance.txt")?;
    for o in &outcomes {
        writeln!(w, "{}", o.line())?;
        println!("{}", o.line());
    }
    w.flush()?;
    let passed = outcomes.iter().all(|o| o.passed);
    let status = if passed {
        Status::Ok
    } else {
        Status::AcceptanceFailure
    };
    let summary: Vec<Value> = outcomes.iter().map(criterion_json).collect();
    let n_pass = outcomes.iter().filter(|o| o.passed).count();
    Ok((
        status,
        format!("{n_pass}/{} criteria passed", outcomes.len()),
        Value::Array(summary),
    ))
}

fn criterion_json(o: &CriterionOutcome) -> Value {
    json!({ "id": o.id, "title": o.title, "passed": o.passed, "detail": o.detail, "seconds": o.seconds })
}
