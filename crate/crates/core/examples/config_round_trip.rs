//! Parses a bundled config, prints it back and shows a positioned error.

use std::path::PathBuf;

use esc_sat::config::ExperimentConfig;

fn main() -> esc_sat::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/example2.cfg");
    let cfg = ExperimentConfig::load(&path)?;
    let text = cfg.to_string();
    print!("{text}");
    assert_eq!(ExperimentConfig::parse(&text)?, cfg);

    let broken = text.replace("eta = 1", "eta = fast");
    if let Err(e) = ExperimentConfig::parse(&broken) {
        println!("\n{e}");
    }
    Ok(())
}
