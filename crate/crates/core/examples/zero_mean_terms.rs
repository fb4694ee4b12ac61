//! Period means of the dither-driven terms and of the averaged gradient
//! law.

use esc_sat::analysis::{averaged_rhs_errors, linear_region_states, zero_mean_report};
use esc_sat::plant::{QuadraticMap, SaturationBounds};
use esc_sat::signals::DitherSpec;
use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;

fn main() -> esc_sat::Result<()> {
    let h = DMatrix::from_row_slice(2, 2, &[100.0, 30.0, 30.0, 20.0]);
    let bounds = SaturationBounds::uniform(5.0, 2)?;
    let map = QuadraticMap::new(10.0, DVector::from_vec(vec![2.0, 4.0]), h.clone(), Some(bounds))?;
    let spec = DitherSpec::new(
        vec![0.1, 0.1],
        vec![Rational64::from_integer(1), Rational64::from_integer(7)],
        10.0,
    )?;

    let r = zero_mean_report(&spec, &map, &DVector::from_vec(vec![0.3, -0.2]))?;
    for t in &r.terms {
        println!("{:<12} mean {:+.2e}  sup {:.2e}", t.name, t.mean, t.sup);
    }
    println!("1 - cos diagonal means {:?}", r.delta_diag_unshifted);

    let k = -h.try_inverse().unwrap();
    let states = linear_region_states(&map, 0.2, 1.0, 20, 1);
    let worst = averaged_rhs_errors(&spec, &map, &k, &states)?
        .into_iter()
        .fold(0.0, f64::max);
    println!("averaged right-hand side, worst relative error {worst:.2e}");
    Ok(())
}
