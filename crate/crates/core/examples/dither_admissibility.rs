//! Checks dither frequency sets and prints their common period.

use esc_sat::signals::DitherSpec;
use num_rational::Rational64;

fn main() -> esc_sat::Result<()> {
    for mult in [vec![1, 7], vec![1, 3, 7], vec![2, 3, 5]] {
        let m: Vec<Rational64> = mult.iter().map(|&k| Rational64::from_integer(k)).collect();
        let spec = DitherSpec::new(vec![0.1; m.len()], m, 10.0)?;
        let adm = spec.admissibility()?;
        println!(
            "omega = {:?} rad/s  T = {:.4} s  admissible = {}",
            spec.frequencies(),
            spec.period(),
            adm.is_valid()
        );
        for v in &adm.violations {
            println!("    {v:?}");
        }
    }
    // rational multipliers stretch the common period
    let spec = DitherSpec::new(vec![0.1, 0.1], vec![Rational64::new(3, 2), Rational64::new(5, 3)], 10.0)?;
    println!("omega = {:?}  T = {:.4} s", spec.frequencies(), spec.period());
    Ok(())
}
