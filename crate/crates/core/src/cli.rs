//! Command-line front end: `design`, `simulate`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 certificate or
//! feasibility failure, 3 simulation blow-up.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::analysis::{
    check_theorem1_band, fit_decay, sample_sector_lemma1, sample_sector_lemma4, sup_deviation, tail_residuals,
    BandConstants, Signal,
};
use crate::config::{fmt_vector, ControllerMode, ExperimentConfig, SweepParameter, SynthesisKind};
use crate::error::{EscError, Result};
use crate::io::{write_atomic, Design};
use crate::plant::{AwController, GradSatController};
use crate::signals::DitherSpec;
use crate::sim::{simulate, Controller, Scenario, SimConfig, Trajectory};
use crate::synthesis::{aw_vertex_checks, design_aw_gains, design_gradsat_gain, verify_gradsat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CERTIFICATE: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;

/// Environment variable capping the sweep's worker threads.
pub const THREADS_ENV: &str = "ESC_SAT_THREADS";
/// Samples drawn by `verify` for each sector condition.
pub const SECTOR_TRIALS: usize = 100_000;
/// Largest sampled sector form accepted as non-positive.
pub const SECTOR_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "esc-sat",
    version,
    about = "Extremum seeking under saturation: synthesis, simulation and checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize gains from the config's [synthesis] section.
    Design(CommonArgs),
    /// Simulate the configured scenario.
    Simulate(CommonArgs),
    /// Run the [sweep] values, true loop against its average.
    Sweep(CommonArgs),
    /// Re-check a design file by substitution and sampling.
    Verify(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config file.
    pub config: PathBuf,
    /// Output directory (overrides [outputs] dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
    /// Keep every Nth sample in CSV output.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: Option<u64>,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Design file to use instead of the config's controller section.
    #[arg(long)]
    pub design: Option<PathBuf>,
}

pub fn exit_code(err: &EscError) -> i32 {
    match err {
        EscError::Infeasible { .. } | EscError::Numerical(_) | EscError::OutsideRegion { .. } => EXIT_CERTIFICATE,
        EscError::BlowUp { .. } => EXIT_BLOW_UP,
        _ => EXIT_USAGE,
    }
}

/// Ordered `key = value` records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report(pub Vec<(String, String)>);

impl Report {
    pub fn add(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

// ---------------------------------------------------------------------------
// building blocks shared by the commands

/// Runs the synthesis named in the config.
pub fn synthesize(cfg: &ExperimentConfig) -> Result<Design> {
    let syn = cfg
        .synthesis
        .as_ref()
        .ok_or_else(|| EscError::InvalidArgument("config has no [synthesis] section".into()))?;
    let poly = cfg.polytope()?;
    match syn.kind {
        SynthesisKind::AntiWindup => {
            let bounds = cfg
                .input_bounds()?
                .ok_or_else(|| EscError::InvalidArgument("anti-windup synthesis needs [map] input_bounds".into()))?;
            design_aw_gains(&poly, syn.eta, &bounds).map(Design::Aw)
        }
        SynthesisKind::GradientSaturation => {
            let bounds = cfg.rate_bounds()?.ok_or_else(|| {
                EscError::InvalidArgument("gradient-saturation synthesis needs [controller] rate_bounds".into())
            })?;
            let eps = syn.epsilon.ok_or_else(|| {
                EscError::InvalidArgument("gradient-saturation synthesis needs [synthesis] epsilon".into())
            })?;
            design_gradsat_gain(&poly, syn.eta, eps, &bounds).map(Design::GradSat)
        }
    }
}

/// The design the controller section refers to, if any. An explicit
/// `override_path` wins over the config.
pub fn resolve_design(cfg: &ExperimentConfig, override_path: Option<&Path>) -> Result<Option<Design>> {
    if let Some(p) = override_path {
        return Design::load(p).map(Some);
    }
    match &cfg.controller.mode {
        ControllerMode::Explicit => Ok(None),
        ControllerMode::Designed => synthesize(cfg).map(Some),
        ControllerMode::File(p) => Design::load(p).map(Some),
    }
}

fn wants_aw(scenario: Scenario) -> bool {
    matches!(scenario, Scenario::InputSaturation | Scenario::AverageAw)
}

pub fn build_controller(cfg: &ExperimentConfig, design: Option<&Design>) -> Result<Controller> {
    let n = cfg.dim();
    let scenario = cfg.sim.scenario;
    match (wants_aw(scenario), design) {
        (true, Some(Design::Aw(d))) => {
            let bounds = cfg
                .input_bounds()?
                .ok_or_else(|| EscError::InvalidArgument("anti-windup loops need [map] input_bounds".into()))?;
            Ok(Controller::Aw(AwController::new(d.k.clone(), d.k_aw.clone(), bounds)?))
        }
        (false, Some(Design::GradSat(d))) => Ok(Controller::GradSat(GradSatController::new(
            d.k.clone(),
            crate::plant::SaturationBounds::new(d.bounds.clone())?,
        )?)),
        (_, Some(d)) => Err(EscError::InvalidArgument(format!(
            "a {} design cannot drive scenario {scenario}",
            d.kind().name()
        ))),
        (aw, None) => {
            let k = cfg
                .controller
                .k
                .clone()
                .ok_or_else(|| EscError::InvalidArgument("controller has no gains".into()))?;
            if aw {
                let bounds = cfg
                    .input_bounds()?
                    .ok_or_else(|| EscError::InvalidArgument("anti-windup loops need [map] input_bounds".into()))?;
                let k_aw = cfg.controller.k_aw.clone().unwrap_or_else(|| DMatrix::zeros(n, n));
                Ok(Controller::Aw(AwController::new(k, k_aw, bounds)?))
            } else {
                let bounds = cfg.rate_bounds()?.ok_or_else(|| {
                    EscError::InvalidArgument("gradient-saturation loops need [controller] rate_bounds".into())
                })?;
                Ok(Controller::GradSat(GradSatController::new(k, bounds)?))
            }
        }
    }
}

fn sim_config_with(
    cfg: &ExperimentConfig,
    scenario: Scenario,
    dither: DitherSpec,
    controller: Controller,
    design: Option<&Design>,
) -> Result<SimConfig> {
    let theta0 = DVector::from_vec(cfg.sim.theta0.clone());
    let mut sc = SimConfig::new(
        scenario,
        cfg.quadratic_map()?,
        dither,
        controller,
        theta0,
        cfg.sim.t_end,
    );
    if let Some(dt) = cfg.sim.dt {
        sc = sc.with_dt(dt);
    }
    match design {
        Some(Design::Aw(d)) => sc = sc.with_lyapunov(d.p.clone(), false),
        Some(Design::GradSat(d)) => sc = sc.with_lyapunov(d.p.clone(), scenario == Scenario::AverageGradSat),
        None => {}
    }
    sc.validate()?;
    Ok(sc)
}

pub fn sim_config(cfg: &ExperimentConfig, design: Option<&Design>) -> Result<SimConfig> {
    let controller = build_controller(cfg, design)?;
    sim_config_with(cfg, cfg.sim.scenario, cfg.dither_spec()?, controller, design)
}

fn design_eta(cfg: &ExperimentConfig, design: Option<&Design>) -> Option<f64> {
    match design {
        Some(Design::Aw(d)) => Some(d.eta),
        Some(Design::GradSat(d)) => Some(d.eta),
        None => cfg.synthesis.as_ref().map(|s| s.eta),
    }
}

// ---------------------------------------------------------------------------
// reports

/// Substitution checks of a design against the config's polytope, plus
/// seeded sector sampling.
pub fn verify_report(cfg: &ExperimentConfig, design: &Design, seed: u64) -> Result<(Report, bool)> {
    let poly = cfg.polytope()?;
    let mut r = Report::default();
    r.add("kind", design.kind().name());
    let mut ok = true;
    match design {
        Design::Aw(d) => {
            for c in aw_vertex_checks(d, &poly)? {
                r.add(format!("vertex_{}_lambda_max", c.vertex + 1), sci(c.lambda_max));
                r.add(format!("vertex_{}_margin", c.vertex + 1), sci(c.margin));
                ok &= c.passes();
            }
            let bounds = cfg
                .input_bounds()?
                .ok_or_else(|| EscError::InvalidArgument("anti-windup checks need [map] input_bounds".into()))?;
            let theta_star = DVector::from_vec(cfg.map.theta_star.clone());
            let sector = sample_sector_lemma1(&bounds, &theta_star, SECTOR_TRIALS, seed)?;
            r.add("sector_max", sci(sector));
            ok &= sector <= SECTOR_TOL;
            r.add("kappa", d.kappa);
        }
        Design::GradSat(d) => {
            let rep = verify_gradsat(d, &poly)?;
            for c in &rep.lmi_vertices {
                r.add(format!("vertex_{}_lambda_max", c.vertex + 1), sci(c.lambda_max));
                r.add(format!("vertex_{}_margin", c.vertex + 1), sci(c.margin));
            }
            for c in &rep.lyapunov_vertices {
                r.add(format!("lyapunov_{}_lambda_max", c.vertex + 1), sci(c.lambda_max));
            }
            for (l, v) in rep.rows.iter().enumerate() {
                r.add(format!("row_{}_lambda_min", l + 1), sci(*v));
            }
            for (l, v) in rep.ellipsoid.iter().enumerate() {
                r.add(format!("ellipsoid_{}_residual", l + 1), sci(*v));
            }
            ok &= rep.passes();
            let sector = sample_sector_lemma4(d, SECTOR_TRIALS, seed)?;
            r.add("sector_max", sci(sector));
            ok &= sector <= SECTOR_TOL;
            r.add("kappa_g", d.kappa_g);
        }
    }
    r.add("seed", seed);
    r.add("certificate", if ok { "pass" } else { "fail" });
    Ok((r, ok))
}

pub fn design_report(cfg: &ExperimentConfig, design: &Design, seconds: f64) -> Result<Report> {
    let mut r = Report::default();
    r.add("kind", design.kind().name());
    let (slack, iterations, warnings) = match design {
        Design::Aw(d) => (d.slack, d.iterations, &d.warnings),
        Design::GradSat(d) => (d.slack, d.iterations, &d.warnings),
    };
    r.add("slack", sci(slack));
    r.add("iterations", iterations);
    r.add("runtime_s", format!("{seconds:.4}"));
    let k = design.k();
    for i in 0..k.nrows() {
        r.add(
            format!("k_row_{}", i + 1),
            fmt_vector(&k.row(i).iter().copied().collect::<Vec<_>>()),
        );
    }
    if let Design::Aw(d) = design {
        for i in 0..d.k_aw.nrows() {
            r.add(
                format!("k_aw_row_{}", i + 1),
                fmt_vector(&d.k_aw.row(i).iter().copied().collect::<Vec<_>>()),
            );
        }
    }
    let poly = cfg.polytope()?;
    match design {
        Design::Aw(d) => {
            for c in aw_vertex_checks(d, &poly)? {
                r.add(format!("vertex_{}_lambda_max", c.vertex + 1), sci(c.lambda_max));
            }
            r.add("kappa", d.kappa);
        }
        Design::GradSat(d) => {
            let rep = verify_gradsat(d, &poly)?;
            for c in &rep.lmi_vertices {
                r.add(format!("vertex_{}_lambda_max", c.vertex + 1), sci(c.lambda_max));
            }
            for (l, v) in rep.ellipsoid.iter().enumerate() {
                r.add(format!("ellipsoid_{}_residual", l + 1), sci(*v));
            }
            r.add("kappa_g", d.kappa_g);
        }
    }
    for w in warnings {
        r.add("warning", w);
    }
    Ok(r)
}

pub fn simulation_report(
    cfg: &ExperimentConfig,
    sc: &SimConfig,
    traj: &Trajectory,
    eta: Option<f64>,
) -> Result<Report> {
    let mut r = Report::default();
    for key in ["scenario", "dt", "steps", "period", "clock"] {
        if let Some(v) = traj.meta(key) {
            r.add(key, v);
        }
    }
    let last = traj.len() - 1;
    r.add("t_end", traj.times[last]);
    r.add(
        "theta_final",
        fmt_vector(&traj.theta.row(last).iter().copied().collect::<Vec<_>>()),
    );
    let (rt, ry) = tail_residuals(traj, &sc.map);
    r.add("tail_theta_residual", sci(rt));
    r.add("tail_output_residual", sci(ry));
    match fit_decay(traj, Signal::ThetaTilde, None) {
        Ok(fit) => r.add("fitted_decay", sci(fit.eta_hat)),
        Err(e) => r.add("fitted_decay", format!("unavailable ({e})")),
    }
    if !sc.scenario.is_average() {
        if let Some(eta) = eta {
            let consts = BandConstants {
                c_theta: cfg.analysis.c_theta,
                c_y: cfg.analysis.c_y,
                eta,
            };
            match check_theorem1_band(traj, &sc.map, &sc.dither, consts) {
                Ok(b) => {
                    r.add("theta_band", sci(b.theta_band));
                    r.add("output_band", sci(b.y_band));
                    r.add("theta_band_ok", b.theta_band_ok);
                    r.add("output_band_ok", b.y_band_ok);
                }
                Err(e) => r.add("band_check", format!("skipped ({e})")),
            }
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// `sup_t ‖θ̃(t) - θ̃_av(t)‖`
    pub sup_deviation: f64,
    pub r_theta: f64,
    pub r_y: f64,
    /// Fitted decay of `‖θ̃‖` on the true loop.
    pub eta_hat: f64,
}

fn sweep_dither(base: &DitherSpec, parameter: SweepParameter, value: f64) -> Result<DitherSpec> {
    match parameter {
        SweepParameter::OmegaScale => base.with_frequency_scale(value),
        SweepParameter::Amplitude => {
            DitherSpec::new(vec![value; base.dim()], base.multipliers().to_vec(), base.base_omega())
        }
    }
}

/// Worker count from `ESC_SAT_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(EscError::InvalidArgument(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
    }
}

fn sweep_point(
    cfg: &ExperimentConfig,
    controller: &Controller,
    parameter: SweepParameter,
    value: f64,
) -> Result<(SweepRow, Trajectory)> {
    let dither = sweep_dither(&cfg.dither_spec()?, parameter, value)?;
    let mut local = cfg.clone();
    // a configured step only applies while it resolves the variant's period
    if let Some(dt) = cfg.sim.dt {
        if dt > dither.period() / crate::sim::MIN_STEPS_PER_PERIOD {
            local.sim.dt = None;
        }
    }
    let true_cfg = sim_config_with(&local, cfg.sim.scenario, dither.clone(), controller.clone(), None)?;
    let avg_cfg = true_cfg.clone().with_scenario(cfg.sim.scenario.averaged());
    let truth = simulate(&true_cfg)?;
    let avg = simulate(&avg_cfg)?;
    let (r_theta, r_y) = tail_residuals(&truth, &true_cfg.map);
    let eta_hat = fit_decay(&truth, Signal::ThetaTilde, None)
        .map(|f| f.eta_hat)
        .unwrap_or(f64::NAN);
    Ok((
        SweepRow {
            value,
            sup_deviation: sup_deviation(&truth, &avg, Signal::ThetaTilde)?,
            r_theta,
            r_y,
            eta_hat,
        },
        truth,
    ))
}

/// Runs every sweep value in parallel; rows keep the config's order.
pub fn run_sweep(cfg: &ExperimentConfig, design: Option<&Design>) -> Result<Vec<(SweepRow, Trajectory)>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| EscError::InvalidArgument("config has no [sweep] section".into()))?;
    if cfg.sim.scenario.is_average() {
        return Err(EscError::InvalidArgument(
            "sweeps compare a true loop with its average; pick a true scenario".into(),
        ));
    }
    let controller = build_controller(cfg, design)?;
    let work = || -> Result<Vec<_>> {
        sweep
            .values
            .par_iter()
            .map(|&v| sweep_point(cfg, &controller, sweep.parameter, v))
            .collect()
    };
    match thread_cap()? {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| EscError::InvalidArgument(e.to_string()))?
            .install(work),
    }
}

pub fn sweep_csv(parameter: SweepParameter, rows: &[SweepRow]) -> String {
    let mut s = format!(
        "{},sup_deviation,r_theta,r_y,eta_hat\n",
        parameter.name().replace('-', "_")
    );
    for r in rows {
        s.push_str(&format!(
            "{},{:e},{:e},{:e},{:e}\n",
            r.value, r.sup_deviation, r.r_theta, r.r_y, r.eta_hat
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// commands

struct Context {
    cfg: ExperimentConfig,
    out: PathBuf,
    stride: usize,
    plot: bool,
    seed: u64,
    design: Option<PathBuf>,
}

impl Context {
    fn new(args: CommonArgs) -> Result<Self> {
        let cfg = ExperimentConfig::load(&args.config)?;
        let out = args
            .out
            .or_else(|| cfg.outputs.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self {
            stride: args.stride.map(|s| s as usize).unwrap_or(cfg.outputs.stride),
            plot: args.plot || cfg.outputs.plot,
            seed: args.seed,
            design: args.design,
            out,
            cfg,
        })
    }
}

fn print_report(r: &Report) {
    print!("{r}");
}

fn cmd_design(ctx: &Context) -> Result<i32> {
    let start = Instant::now();
    let design = match synthesize(&ctx.cfg) {
        Ok(d) => d,
        Err(EscError::Infeasible { slack, worst_block }) => {
            let mut r = Report::default();
            r.add("status", "infeasible");
            r.add("slack", sci(slack));
            r.add("worst_block", worst_block);
            print_report(&r);
            write_atomic(&ctx.out.join("design_report.txt"), r.to_string().as_bytes())?;
            return Ok(EXIT_CERTIFICATE);
        }
        Err(e) => return Err(e),
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut r = design_report(&ctx.cfg, &design, seconds)?;
    r.0.insert(0, ("status".into(), "feasible".into()));
    let path = ctx.out.join("design.txt");
    design.save(&path)?;
    r.add("design_file", path.display());
    write_atomic(&ctx.out.join("design_report.txt"), r.to_string().as_bytes())?;
    print_report(&r);
    Ok(EXIT_OK)
}

fn cmd_simulate(ctx: &Context) -> Result<i32> {
    let design = resolve_design(&ctx.cfg, ctx.design.as_deref())?;
    let sc = sim_config(&ctx.cfg, design.as_ref())?;
    let traj = simulate(&sc)?;
    let mut r = simulation_report(&ctx.cfg, &sc, &traj, design_eta(&ctx.cfg, design.as_ref()))?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv, ctx.stride)?;
    let path = ctx.out.join("trajectory.csv");
    write_atomic(&path, &csv)?;
    r.add("csv", path.display());
    if ctx.plot {
        let path = ctx.out.join("trajectory.svg");
        write_atomic(&path, crate::svg::trajectory_plot(&traj).as_bytes())?;
        r.add("plot", path.display());
    }
    write_atomic(&ctx.out.join("simulation_report.txt"), r.to_string().as_bytes())?;
    print_report(&r);
    Ok(EXIT_OK)
}

fn cmd_sweep(ctx: &Context) -> Result<i32> {
    let design = resolve_design(&ctx.cfg, ctx.design.as_deref())?;
    let results = run_sweep(&ctx.cfg, design.as_ref())?;
    let parameter = ctx
        .cfg
        .sweep
        .as_ref()
        .map(|s| s.parameter)
        .unwrap_or(SweepParameter::OmegaScale);
    let rows: Vec<SweepRow> = results.iter().map(|(r, _)| r.clone()).collect();
    let path = ctx.out.join("sweep.csv");
    write_atomic(&path, sweep_csv(parameter, &rows).as_bytes())?;
    let mut r = Report::default();
    r.add("parameter", parameter.name());
    for (i, row) in rows.iter().enumerate() {
        r.add(
            format!("row_{}", i + 1),
            format!(
                "value={} sup_deviation={} r_theta={} r_y={} eta_hat={}",
                row.value,
                sci(row.sup_deviation),
                sci(row.r_theta),
                sci(row.r_y),
                sci(row.eta_hat)
            ),
        );
    }
    for w in rows.windows(2) {
        r.add(
            format!("ratio_{}_{}", w[0].value, w[1].value),
            format!(
                "deviation={:.4} output={:.4}",
                w[0].sup_deviation / w[1].sup_deviation,
                w[1].r_y / w[0].r_y
            ),
        );
    }
    r.add("csv", path.display());
    if ctx.plot {
        for (i, (_, traj)) in results.iter().enumerate() {
            let p = ctx.out.join(format!("sweep_{}.svg", i + 1));
            write_atomic(&p, crate::svg::trajectory_plot(traj).as_bytes())?;
        }
    }
    print_report(&r);
    Ok(EXIT_OK)
}

fn cmd_verify(ctx: &Context) -> Result<i32> {
    let path = match (&ctx.design, &ctx.cfg.controller.mode) {
        (Some(p), _) => p.clone(),
        (None, ControllerMode::File(p)) => p.clone(),
        (None, _) => ctx.out.join("design.txt"),
    };
    let design = Design::load(&path).map_err(|e| match e {
        EscError::Io(io) => EscError::InvalidArgument(format!("cannot read design file '{}': {io}", path.display())),
        other => other,
    })?;
    let (r, ok) = verify_report(&ctx.cfg, &design, ctx.seed)?;
    print_report(&r);
    Ok(if ok { EXIT_OK } else { EXIT_CERTIFICATE })
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (args, cmd): (CommonArgs, fn(&Context) -> Result<i32>) = match cli.command {
        Command::Design(a) => (a, cmd_design),
        Command::Simulate(a) => (a, cmd_simulate),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Verify(a) => (a, cmd_verify),
    };
    match Context::new(args).and_then(|ctx| cmd(&ctx)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("esc-sat: {e}");
            exit_code(&e)
        }
    }
}
