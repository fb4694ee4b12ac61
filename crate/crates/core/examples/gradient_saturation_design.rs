//! Synthesizes a rate-saturated gradient gain for a three-input concave
//! polytope and prints the certificate report.

use esc_sat::plant::SaturationBounds;
use esc_sat::polytope::HessianPolytope;
use esc_sat::synthesis::{design_gradsat_gain, verify_gradsat};
use nalgebra::DMatrix;

fn main() -> esc_sat::Result<()> {
    let v = |d: [f64; 9]| DMatrix::from_row_slice(3, 3, &d);
    let poly = HessianPolytope::new(vec![
        v([
            -6.7828, 0.8480, -1.3462, 0.8480, -6.0017, -0.7825, -1.3462, -0.7825, -3.2421,
        ]),
        v([
            -3.9159, -0.8122, 1.4150, -0.8122, -5.7484, -0.0047, 1.4150, -0.0047, -4.6956,
        ]),
        v([
            -3.9141, -0.3951, 0.5802, -0.3951, -3.6059, 1.0325, 0.5802, 1.0325, -4.0962,
        ]),
        v([
            -6.1443, 0.0911, -0.7984, 0.0911, -5.9879, -2.3066, -0.7984, -2.3066, -3.9025,
        ]),
    ])?;
    let d = design_gradsat_gain(&poly, 1.0, 0.5, &SaturationBounds::uniform(2.0, 3)?)?;
    println!("K = {}L = {}kappa_g = {:.4}", d.k, d.l, d.kappa_g);
    let r = verify_gradsat(&d, &poly)?;
    for c in &r.lmi_vertices {
        println!("vertex {}: lambda_max {:.4e}", c.vertex + 1, c.lambda_max);
    }
    println!("row lambda_min {:?}", r.rows);
    println!("ellipsoid residuals {:?}", r.ellipsoid);
    println!("passes: {}", r.passes());
    Ok(())
}
