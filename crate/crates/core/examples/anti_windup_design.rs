//! Synthesizes anti-windup gains for the two-input example polytope and
//! re-checks every vertex block.

use esc_sat::plant::SaturationBounds;
use esc_sat::polytope::HessianPolytope;
use esc_sat::synthesis::{aw_vertex_checks, design_aw_gains};
use nalgebra::DMatrix;

fn main() -> esc_sat::Result<()> {
    let h0 = DMatrix::from_row_slice(2, 2, &[100.0, 30.0, 30.0, 20.0]);
    let poly = HessianPolytope::from_scaled_nominal(&h0, 0.1)?;
    let d = design_aw_gains(&poly, 1.0, &SaturationBounds::uniform(5.0, 2)?)?;
    println!(
        "K = {}K_aw = {}kappa = {:.4}, slack {:.4e}, {} iterations",
        d.k, d.k_aw, d.kappa, d.slack, d.iterations
    );
    for c in aw_vertex_checks(&d, &poly)? {
        println!(
            "vertex {}: lambda_max {:.4e} (margin {:.2e}) {}",
            c.vertex + 1,
            c.lambda_max,
            c.margin,
            c.passes()
        );
    }
    Ok(())
}
