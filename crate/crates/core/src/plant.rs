//! The saturating quadratic map, saturation and dead-zone primitives, the
//! demodulated gradient estimate, and the two control laws.

use nalgebra::{DMatrix, DVector};

use crate::error::{EscError, Result};
use crate::signals::DitherSpec;

/// Element-wise limits of a saturated signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationBounds(Vec<f64>);

impl SaturationBounds {
    pub fn new(limits: Vec<f64>) -> Result<Self> {
        if limits.is_empty() {
            return Err(EscError::InvalidArgument("empty saturation bounds".into()));
        }
        if let Some(l) = limits.iter().find(|l| !(**l > 0.0)) {
            return Err(EscError::InvalidArgument(format!(
                "saturation limit {l} is not strictly positive"
            )));
        }
        Ok(Self(limits))
    }

    /// The same limit on every channel.
    pub fn uniform(limit: f64, n: usize) -> Result<Self> {
        Self::new(vec![limit; n])
    }

    pub fn limits(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(EscError::Dimension(format!(
                "vector of length {} against {} saturation limits",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Clamps each component to `[-limit, +limit]`.
pub fn saturate(v: &DVector<f64>, bounds: &SaturationBounds) -> Result<DVector<f64>> {
    bounds.check(v)?;
    Ok(v.zip_map(&DVector::from_column_slice(bounds.limits()), |x, l| x.clamp(-l, l)))
}

/// Dead-zone `ψ(v) = v - sat(v)`. Zero on the closed linear region.
pub fn deadzone(v: &DVector<f64>, bounds: &SaturationBounds) -> Result<DVector<f64>> {
    Ok(v - saturate(v, bounds)?)
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square() && (m - m.transpose()).amax() == 0.0
}

/// `Q(v) = Q* + ½ (v - θ*)ᵀ H (v - θ*)`, optionally composed with input
/// saturation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMap {
    q_star: f64,
    theta_star: DVector<f64>,
    hessian: DMatrix<f64>,
    input_bounds: Option<SaturationBounds>,
}

impl QuadraticMap {
    pub fn new(
        q_star: f64,
        theta_star: DVector<f64>,
        hessian: DMatrix<f64>,
        input_bounds: Option<SaturationBounds>,
    ) -> Result<Self> {
        let n = theta_star.len();
        if hessian.shape() != (n, n) {
            return Err(EscError::Dimension(format!(
                "hessian is {:?} for an optimizer of length {n}",
                hessian.shape()
            )));
        }
        if !is_symmetric(&hessian) {
            return Err(EscError::InvalidArgument("hessian is not symmetric".into()));
        }
        if let Some(b) = &input_bounds {
            b.check(&theta_star)?;
            for (l, (t, lim)) in theta_star.iter().zip(b.limits()).enumerate() {
                if t.abs() >= *lim {
                    return Err(EscError::InvalidArgument(format!(
                        "optimizer component {} = {t} is not strictly inside the bound {lim}",
                        l + 1
                    )));
                }
            }
        }
        Ok(Self {
            q_star,
            theta_star,
            hessian,
            input_bounds,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    pub fn theta_star(&self) -> &DVector<f64> {
        &self.theta_star
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn input_bounds(&self) -> Option<&SaturationBounds> {
        self.input_bounds.as_ref()
    }

    /// Copy of this map with a different Hessian.
    pub fn with_hessian(&self, hessian: DMatrix<f64>) -> Result<Self> {
        Self::new(self.q_star, self.theta_star.clone(), hessian, self.input_bounds.clone())
    }

    /// Map output at `theta`. With `apply_input_sat` the input is clamped
    /// first, which requires input bounds.
    pub fn output(&self, theta: &DVector<f64>, apply_input_sat: bool) -> Result<f64> {
        if theta.len() != self.dim() {
            return Err(EscError::Dimension(format!(
                "input of length {} for a map of dimension {}",
                theta.len(),
                self.dim()
            )));
        }
        let v = if apply_input_sat {
            let b = self.input_bounds.as_ref().ok_or_else(|| {
                EscError::InvalidArgument("input saturation requested but the map has no bounds".into())
            })?;
            saturate(theta, b)?
        } else {
            theta.clone()
        };
        let e = v - &self.theta_star;
        Ok(self.q_star + 0.5 * e.dot(&(&self.hessian * &e)))
    }

    /// Dead-zone of the input, zero when the map has no input bounds.
    pub fn input_deadzone(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.input_bounds {
            Some(b) => deadzone(theta, b),
            None => Ok(DVector::zeros(theta.len())),
        }
    }
}

/// `Ĝ(t) = M(t) y(t)`.
pub fn gradient_estimate(y: f64, m: &DVector<f64>) -> DVector<f64> {
    m * y
}

fn check_square(name: &str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(EscError::Dimension(format!(
            "{name} is {:?}, expected {n}x{n}",
            m.shape()
        )));
    }
    Ok(())
}

/// Gradient law with anti-windup feedback of the input dead-zone.
#[derive(Debug, Clone, PartialEq)]
pub struct AwController {
    pub k: DMatrix<f64>,
    pub k_aw: DMatrix<f64>,
    pub bounds: SaturationBounds,
}

impl AwController {
    pub fn new(k: DMatrix<f64>, k_aw: DMatrix<f64>, bounds: SaturationBounds) -> Result<Self> {
        let n = bounds.dim();
        check_square("K", &k, n)?;
        check_square("K_aw", &k_aw, n)?;
        Ok(Self { k, k_aw, bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// `u = K Ĝ - K_aw ψ(θ)`.
    pub fn control(&self, g_hat: &DVector<f64>, theta: &DVector<f64>) -> Result<DVector<f64>> {
        if g_hat.len() != self.dim() {
            return Err(EscError::Dimension("gradient estimate length".into()));
        }
        let psi = deadzone(theta, &self.bounds)?;
        Ok(&self.k * g_hat - &self.k_aw * psi)
    }
}

/// Gradient law with a saturated update rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GradSatController {
    pub k: DMatrix<f64>,
    pub bounds: SaturationBounds,
}

impl GradSatController {
    pub fn new(k: DMatrix<f64>, bounds: SaturationBounds) -> Result<Self> {
        check_square("K", &k, bounds.dim())?;
        Ok(Self { k, bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// `u = sat(K Ĝ)`.
    pub fn control(&self, g_hat: &DVector<f64>) -> Result<DVector<f64>> {
        if g_hat.len() != self.dim() {
            return Err(EscError::Dimension("gradient estimate length".into()));
        }
        saturate(&(&self.k * g_hat), &self.bounds)
    }
}

/// Periodic terms of the closed loop written around the average dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationTerms {
    /// Zero-mean matrix with `M Sᵀ = I + Δ`.
    pub delta: DMatrix<f64>,
    /// `Ω = (I + Δ) H`.
    pub omega_mat: DMatrix<f64>,
    /// Residual of the gradient estimate after the `Ω θ̃` and `Ω ψ` terms.
    pub w: DVector<f64>,
    /// Residual of the differentiated gradient estimate.
    pub varsigma: DVector<f64>,
}

/// Zero-mean dither coupling matrix: `Δ_ii = -cos(2ω_i t)`,
/// `Δ_ij = (a_j/a_i)(cos((ω_i-ω_j)t) - cos((ω_i+ω_j)t))`.
pub fn delta_matrix(spec: &DitherSpec, t: f64) -> DMatrix<f64> {
    let a = spec.amplitudes();
    let w = spec.frequencies();
    DMatrix::from_fn(spec.dim(), spec.dim(), |i, j| {
        if i == j {
            -(2.0 * w[i] * t).cos()
        } else {
            a[j] / a[i] * (((w[i] - w[j]) * t).cos() - ((w[i] + w[j]) * t).cos())
        }
    })
}

/// The diagonal written as `1 - cos(2ω_i t)`, which is the diagonal of
/// `M Sᵀ` itself rather than of `M Sᵀ - I`. Kept for the mean report.
pub fn delta_matrix_unshifted(spec: &DitherSpec, t: f64) -> DMatrix<f64> {
    let mut d = delta_matrix(spec, t);
    for i in 0..spec.dim() {
        d[(i, i)] += 1.0;
    }
    d
}

/// Analytic time derivative of [`delta_matrix`].
pub fn delta_rate(spec: &DitherSpec, t: f64) -> DMatrix<f64> {
    let a = spec.amplitudes();
    let w = spec.frequencies();
    DMatrix::from_fn(spec.dim(), spec.dim(), |i, j| {
        if i == j {
            2.0 * w[i] * (2.0 * w[i] * t).sin()
        } else {
            let (d, s) = (w[i] - w[j], w[i] + w[j]);
            a[j] / a[i] * (-d * (d * t).sin() + s * (s * t).sin())
        }
    })
}

/// Evaluates `Δ`, `Ω`, `w` and `ς` at time `t` for a frozen estimation error
/// `theta_tilde`. The dead-zone in `w` is evaluated along
/// `θ = θ̃ + S(t) + θ*`; it vanishes for maps without input bounds.
pub fn perturbation_terms(
    spec: &DitherSpec,
    map: &QuadraticMap,
    theta_tilde: &DVector<f64>,
    t: f64,
) -> Result<PerturbationTerms> {
    let n = map.dim();
    if spec.dim() != n || theta_tilde.len() != n {
        return Err(EscError::Dimension("dither, map and state dimensions differ".into()));
    }
    let h = map.hessian();
    let s = spec.probing(t);
    let m = spec.demodulation(t);
    let s_dot = spec.probing_rate(t);
    let m_dot = spec.demodulation_rate(t);
    let delta = delta_matrix(spec, t);
    let delta_dot = delta_rate(spec, t);
    let omega_mat = (DMatrix::identity(n, n) + &delta) * h;

    let theta = theta_tilde + &s + map.theta_star();
    let psi = map.input_deadzone(&theta)?;
    let q_tt = theta_tilde.dot(&(h * theta_tilde));
    let q_tp = theta_tilde.dot(&(h * &psi));
    let q_pp = psi.dot(&(h * &psi));
    let w = &m * map.q_star() + 0.5 * (&omega_mat * &s) + &m * (0.5 * q_tt - q_tp + 0.5 * q_pp);

    let varsigma = &m_dot * map.q_star()
        + &delta_dot * (h * theta_tilde)
        + 0.5 * (h * &s_dot)
        + 0.5 * (&delta_dot * (h * &s))
        + 0.5 * (&delta * (h * &s_dot));

    Ok(PerturbationTerms {
        delta,
        omega_mat,
        w,
        varsigma,
    })
}
