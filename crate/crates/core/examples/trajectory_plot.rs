//! Writes the CSV and SVG outputs of a short run into a temp folder.

use std::path::PathBuf;

use esc_sat::cli::sim_config;
use esc_sat::config::ExperimentConfig;
use esc_sat::io::write_atomic;
use esc_sat::sim::simulate;
use esc_sat::svg::trajectory_plot;

fn main() -> esc_sat::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/example1.cfg");
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.sim.t_end = 3.0;
    let tr = simulate(&sim_config(&cfg, None)?)?;

    let out = std::env::temp_dir().join("esc-sat-plot");
    let mut csv = Vec::new();
    tr.write_csv(&mut csv, 20)?;
    write_atomic(&out.join("trajectory.csv"), &csv)?;
    write_atomic(&out.join("trajectory.svg"), trajectory_plot(&tr).as_bytes())?;
    println!("wrote {} samples to {}", tr.len(), out.display());
    Ok(())
}
