//! Designs a gain for the three-input example and runs the true and
//! averaged rate-saturated loops with it.

use std::path::PathBuf;

use esc_sat::analysis::{fit_decay, tail_residuals, Signal};
use esc_sat::cli::{sim_config, synthesize};
use esc_sat::config::ExperimentConfig;
use esc_sat::sim::{simulate, Scenario};

fn main() -> esc_sat::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/example2.cfg");
    let mut cfg = ExperimentConfig::load(&path)?;
    let design = synthesize(&cfg)?;

    let sc = sim_config(&cfg, Some(&design))?;
    let tr = simulate(&sc)?;
    let (rt, ry) = tail_residuals(&tr, &sc.map);
    let umax = tr.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("true loop: max |u| {umax:.3}, tail |theta - theta*| {rt:.3}, tail |y - Q*| {ry:.3}");

    // the average run is certified only inside the design's ellipsoid
    cfg.sim.scenario = Scenario::AverageGradSat;
    cfg.sim.theta0 = vec![-0.95, -2.0, -3.02];
    let tr = simulate(&sim_config(&cfg, Some(&design))?)?;
    let fit = fit_decay(&tr, Signal::SqrtLyapunov, None)?;
    println!(
        "average loop: V(0) = {:.3}, fitted decay {:.3}",
        tr.lyapunov.as_ref().unwrap()[0],
        fit.eta_hat
    );
    Ok(())
}
