//! Simulates the two-input loop with and without the anti-windup term and
//! compares it with its average system.

use std::path::PathBuf;

use esc_sat::analysis::{sup_deviation, tail_residuals, Signal};
use esc_sat::cli::sim_config;
use esc_sat::config::ExperimentConfig;
use esc_sat::sim::simulate;

fn main() -> esc_sat::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for name in ["example1.cfg", "example1_no_aw.cfg"] {
        let cfg = ExperimentConfig::load(&dir.join(name))?;
        let sc = sim_config(&cfg, None)?;
        let truth = simulate(&sc)?;
        let avg = simulate(&sc.clone().with_scenario(sc.scenario.averaged()))?;
        let (rt, ry) = tail_residuals(&truth, &sc.map);
        println!(
            "{name}: tail |theta - theta*| {rt:.3}, tail |y - Q*| {ry:.2}, sup deviation from average {:.3}",
            sup_deviation(&truth, &avg, Signal::ThetaTilde)?
        );
    }
    Ok(())
}
