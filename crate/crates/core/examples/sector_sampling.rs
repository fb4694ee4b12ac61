//! Samples the global dead-zone sector condition and the regional one of
//! a synthesized rate-saturated design.

use esc_sat::analysis::{sample_sector_lemma1, sample_sector_lemma4};
use esc_sat::plant::SaturationBounds;
use esc_sat::polytope::HessianPolytope;
use esc_sat::synthesis::design_gradsat_gain;
use nalgebra::DVector;

fn main() -> esc_sat::Result<()> {
    let b = SaturationBounds::uniform(5.0, 2)?;
    let worst = sample_sector_lemma1(&b, &DVector::from_vec(vec![2.0, 4.0]), 10_000, 7)?;
    println!("global sector form, max over 10^4 samples: {worst:.3e}");

    let poly = HessianPolytope::from_eigen_interval(-3.0, -1.0, 2)?;
    let d = design_gradsat_gain(&poly, 0.5, 0.5, &SaturationBounds::uniform(1.0, 2)?)?;
    let worst = sample_sector_lemma4(&d, 10_000, 7)?;
    println!("regional sector form, max over 10^4 samples: {worst:.3e}");
    Ok(())
}
