//! Doubles the dither frequencies of the two-input example and reports the
//! distance between the true loop and its average.
//!
//! The worker count can be capped with `ESC_SAT_THREADS`.

use std::path::PathBuf;

use esc_sat::cli::{run_sweep, sweep_csv};
use esc_sat::config::{ExperimentConfig, SweepParameter, SweepSection};

fn main() -> esc_sat::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/example1.cfg");
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.sim.t_end = 5.0;
    cfg.sweep = Some(SweepSection {
        parameter: SweepParameter::OmegaScale,
        values: vec![1.0, 2.0, 4.0, 8.0],
    });
    let rows: Vec<_> = run_sweep(&cfg, None)?.into_iter().map(|(r, _)| r).collect();
    print!("{}", sweep_csv(SweepParameter::OmegaScale, &rows));
    for w in rows.windows(2) {
        println!(
            "x{} -> x{}: deviation ratio {:.3}",
            w[0].value,
            w[1].value,
            w[0].sup_deviation / w[1].sup_deviation
        );
    }
    Ok(())
}
