//! Polytopic embeddings of an uncertain Hessian.

use nalgebra::DMatrix;

use crate::error::{EscError, Result};

/// Tolerance on `Σ α_i = 1` for simplex membership.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;
/// Tolerance on `α_i >= 0` for simplex membership.
pub const SIMPLEX_SIGN_TOL: f64 = 1e-15;

/// Largest number of affine uncertain parameters accepted by
/// [`HessianPolytope::from_affine`].
pub const MAX_AFFINE_PARAMS: usize = 20;

/// Convex hull of symmetric vertex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianPolytope {
    vertices: Vec<DMatrix<f64>>,
}

fn check_symmetric(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(EscError::Dimension(format!("{name} is not square")));
    }
    if (m - m.transpose()).amax() != 0.0 {
        return Err(EscError::InvalidArgument(format!("{name} is not symmetric")));
    }
    Ok(())
}

/// Checks `α ∈ Ξ`: non-negative weights summing to one.
pub fn check_simplex(alpha: &[f64]) -> Result<()> {
    if let Some((i, a)) = alpha
        .iter()
        .enumerate()
        .find(|(_, a)| **a < -SIMPLEX_SIGN_TOL || !a.is_finite())
    {
        return Err(EscError::Simplex(format!("weight alpha_{} = {a} is negative", i + 1)));
    }
    let sum: f64 = alpha.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
        return Err(EscError::Simplex(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Membership predicate for the unit simplex.
pub fn in_simplex(alpha: &[f64]) -> bool {
    check_simplex(alpha).is_ok()
}

impl HessianPolytope {
    pub fn new(vertices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| EscError::InvalidArgument("a polytope needs at least one vertex".into()))?;
        let shape = first.shape();
        for (i, v) in vertices.iter().enumerate() {
            check_symmetric(&format!("vertex {}", i + 1), v)?;
            if v.shape() != shape {
                return Err(EscError::Dimension(format!(
                    "vertex {} is {:?}, vertex 1 is {shape:?}",
                    i + 1,
                    v.shape()
                )));
            }
        }
        Ok(Self { vertices })
    }

    /// `{λ₁ I, λ₂ I}` for `λ₁ I <= H <= λ₂ I`.
    pub fn from_eigen_interval(lambda1: f64, lambda2: f64, n: usize) -> Result<Self> {
        if lambda1 > lambda2 {
            return Err(EscError::InvalidArgument(format!(
                "eigenvalue interval [{lambda1}, {lambda2}] is empty"
            )));
        }
        if n == 0 {
            return Err(EscError::Dimension("zero dimension".into()));
        }
        let id = DMatrix::<f64>::identity(n, n);
        Self::new(vec![&id * lambda1, &id * lambda2])
    }

    /// `{(1-δ̄) H₀, (1+δ̄) H₀}` for `H = (1+δ) H₀`, `|δ| <= δ̄`.
    pub fn from_scaled_nominal(h0: &DMatrix<f64>, delta_bar: f64) -> Result<Self> {
        check_symmetric("nominal hessian", h0)?;
        if !(delta_bar >= 0.0) {
            return Err(EscError::InvalidArgument(format!(
                "uncertainty level {delta_bar} is negative"
            )));
        }
        Self::new(vec![h0 * (1.0 - delta_bar), h0 * (1.0 + delta_bar)])
    }

    /// All `2^p` sign combinations of `Γ₀ + Σ δ_i Γ_i`, `|δ_i| <= δ̄_i`.
    ///
    /// Vertex `v` takes `δ_i = +δ̄_i` when bit `i` of `v` is set and `-δ̄_i`
    /// otherwise, so the first parameter toggles fastest.
    pub fn from_affine(gamma0: &DMatrix<f64>, gammas: &[DMatrix<f64>], delta_bars: &[f64]) -> Result<Self> {
        if gammas.len() != delta_bars.len() {
            return Err(EscError::Dimension(format!(
                "{} basis matrices for {} bounds",
                gammas.len(),
                delta_bars.len()
            )));
        }
        let p = gammas.len();
        if p > MAX_AFFINE_PARAMS {
            return Err(EscError::InvalidArgument(format!(
                "{p} uncertain parameters would give 2^{p} vertices (limit {MAX_AFFINE_PARAMS})"
            )));
        }
        check_symmetric("Γ0", gamma0)?;
        for (i, (g, d)) in gammas.iter().zip(delta_bars).enumerate() {
            check_symmetric(&format!("Γ{}", i + 1), g)?;
            if g.shape() != gamma0.shape() {
                return Err(EscError::Dimension(format!("Γ{} has a different shape", i + 1)));
            }
            if !(*d > 0.0) {
                return Err(EscError::InvalidArgument(format!(
                    "bound δ̄{} = {d} is not positive",
                    i + 1
                )));
            }
        }
        let vertices = (0..1usize << p)
            .map(|pattern| {
                let mut h = gamma0.clone();
                for (i, (g, d)) in gammas.iter().zip(delta_bars).enumerate() {
                    let sign = if pattern >> i & 1 == 1 { 1.0 } else { -1.0 };
                    h += g * (sign * d);
                }
                h
            })
            .collect();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[DMatrix<f64>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].nrows()
    }

    /// `H(α) = Σ α_i H_i` for `α` in the unit simplex.
    pub fn evaluate(&self, alpha: &[f64]) -> Result<DMatrix<f64>> {
        if alpha.len() != self.len() {
            return Err(EscError::Dimension(format!(
                "{} weights for {} vertices",
                alpha.len(),
                self.len()
            )));
        }
        check_simplex(alpha)?;
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for (a, v) in alpha.iter().zip(&self.vertices) {
            h += v * *a;
        }
        // exact symmetry for downstream checks
        Ok((&h + h.transpose()) * 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h0() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[100.0, 30.0, 30.0, 20.0])
    }

    #[test]
    fn eigen_interval() {
        let p = HessianPolytope::from_eigen_interval(-2.0, -1.0, 2).unwrap();
        assert_eq!(p.vertices()[0], DMatrix::identity(2, 2) * -2.0);
        assert_eq!(p.vertices()[1], DMatrix::identity(2, 2) * -1.0);
        let p = HessianPolytope::from_eigen_interval(3.0, 3.0, 1).unwrap();
        assert_eq!(p.vertices()[0], p.vertices()[1]);
        assert!(HessianPolytope::from_eigen_interval(1.0, 0.0, 2).is_err());
        let p = HessianPolytope::from_eigen_interval(-2.0, -1.0, 2).unwrap();
        assert_eq!(p.evaluate(&[0.5, 0.5]).unwrap(), DMatrix::identity(2, 2) * -1.5);
    }

    #[test]
    fn scaled_nominal_example_vertices() {
        let p = HessianPolytope::from_scaled_nominal(&h0(), 0.1).unwrap();
        let lo = DMatrix::from_row_slice(2, 2, &[90.0, 27.0, 27.0, 18.0]);
        let hi = DMatrix::from_row_slice(2, 2, &[110.0, 33.0, 33.0, 22.0]);
        assert!((&p.vertices()[0] - lo).amax() < 1e-12);
        assert!((&p.vertices()[1] - hi).amax() < 1e-12);
        assert!((p.evaluate(&[1.0, 0.0]).unwrap() - &p.vertices()[0]).amax() == 0.0);

        let same = HessianPolytope::from_scaled_nominal(&h0(), 0.0).unwrap();
        assert_eq!(same.vertices()[0], h0());
        assert_eq!(same.vertices()[1], h0());

        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(HessianPolytope::from_scaled_nominal(&asym, 0.1).is_err());
    }

    #[test]
    fn example_mixing_weights() {
        let p = HessianPolytope::from_scaled_nominal(&h0(), 0.1).unwrap();
        let h = p.evaluate(&[0.6822, 0.3178]).unwrap();
        // 0.6822 * 0.9 + 0.3178 * 1.1 = 0.96356
        assert!((h - h0() * 0.96356).amax() < 1e-10);
    }

    #[test]
    fn affine_order_two_example_has_eight_vertices() {
        let z = DMatrix::zeros(2, 2);
        let g1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let g2 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let g3 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let p = HessianPolytope::from_affine(&z, &[g1, g2, g3], &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.len(), 8);
        // first parameter toggles fastest
        assert_eq!(
            p.vertices()[0],
            DMatrix::from_row_slice(2, 2, &[-3.0, -1.0, -1.0, -2.0])
        );
        assert_eq!(p.vertices()[1], DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, -2.0]));
        assert_eq!(p.vertices()[7], DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]));
        for i in 0..8 {
            for j in 0..i {
                assert_ne!(p.vertices()[i], p.vertices()[j]);
            }
        }
    }

    #[test]
    fn affine_edge_cases() {
        let g0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let p = HessianPolytope::from_affine(&g0, &[], &[]).unwrap();
        assert_eq!(p.vertices(), &[g0]);

        let z = DMatrix::zeros(2, 2);
        let p = HessianPolytope::from_affine(&z, &[DMatrix::identity(2, 2)], &[1.0]).unwrap();
        assert_eq!(p.vertices()[0], -DMatrix::<f64>::identity(2, 2));
        assert_eq!(p.vertices()[1], DMatrix::<f64>::identity(2, 2));

        let many = vec![DMatrix::identity(1, 1); 21];
        let z1 = DMatrix::zeros(1, 1);
        assert!(HessianPolytope::from_affine(&z1, &many, &[1.0; 21]).is_err());
    }

    #[test]
    fn simplex_errors() {
        let p = HessianPolytope::from_scaled_nominal(&h0(), 0.1).unwrap();
        assert!(matches!(p.evaluate(&[0.7, 0.4]), Err(EscError::Simplex(_))));
        assert!(matches!(p.evaluate(&[1.1, -0.1]), Err(EscError::Simplex(_))));
        assert!(p.evaluate(&[1.0]).is_err());
        assert!(in_simplex(&[1.0 - 1e-13, 1e-13]));
        assert!(in_simplex(&[1.0 + 1e-15, -1e-16]));
        assert!(!in_simplex(&[1.0 + 1e-11, 0.0]));
        assert!(!in_simplex(&[1.0, -1e-14]));
    }

    #[test]
    fn uniform_over_identical_vertices() {
        let p = HessianPolytope::new(vec![h0(), h0(), h0()]).unwrap();
        let h = p.evaluate(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((h - h0()).amax() < 1e-12);
    }

    proptest! {
        #[test]
        fn evaluate_is_linear_and_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0, s in 0.0f64..1.0) {
            let v1 = DMatrix::from_row_slice(2, 2, &[-6.0, 0.8, 0.8, -6.0]);
            let v2 = DMatrix::from_row_slice(2, 2, &[-3.0, -0.8, -0.8, -5.0]);
            let p = HessianPolytope::new(vec![v1, v2]).unwrap();
            let ea = p.evaluate(&[a, 1.0 - a]).unwrap();
            let eb = p.evaluate(&[b, 1.0 - b]).unwrap();
            let mix = s * a + (1.0 - s) * b;
            let em = p.evaluate(&[mix, 1.0 - mix]).unwrap();
            prop_assert!((em.clone() - (ea * s + eb * (1.0 - s))).amax() < 1e-12);
            prop_assert_eq!(em.transpose(), em);
        }
    }
}
