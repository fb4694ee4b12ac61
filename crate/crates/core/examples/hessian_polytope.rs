//! Builds Hessian polytopes from a nominal matrix, an eigenvalue interval
//! and an affine parameterization.

use esc_sat::polytope::HessianPolytope;
use nalgebra::DMatrix;

fn main() -> esc_sat::Result<()> {
    let h0 = DMatrix::from_row_slice(2, 2, &[100.0, 30.0, 30.0, 20.0]);
    let poly = HessianPolytope::from_scaled_nominal(&h0, 0.1)?;
    for (i, v) in poly.vertices().iter().enumerate() {
        println!("H_{} = {v}", i + 1);
    }
    println!("mixture at (0.6822, 0.3178) = {}", poly.evaluate(&[0.6822, 0.3178])?);

    let interval = HessianPolytope::from_eigen_interval(-4.0, -1.0, 3)?;
    println!("eigen interval: {} vertices of size {}", interval.len(), interval.dim());

    // symmetric 2x2 with three uncertain entries around h0
    let e = |r, c| {
        let mut m = DMatrix::zeros(2, 2);
        m[(r, c)] = 1.0;
        m[(c, r)] = 1.0;
        m
    };
    let affine = HessianPolytope::from_affine(&h0, &[e(0, 0), e(0, 1), e(1, 1)], &[5.0, 2.0, 1.0])?;
    println!("affine: {} vertices", affine.len());
    Ok(())
}
