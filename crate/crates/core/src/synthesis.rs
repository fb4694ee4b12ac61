//! Gain synthesis for the two saturated loops.
//!
//! Input saturation with anti-windup: find `P ≻ 0`, diagonal `Λ ≻ 0` and
//! full `Z`, `Z_aw` such that, at every Hessian vertex,
//!
//! ```text
//! [ ZH + HZᵀ + 2ηP        ⋆  ]
//! [ Λ - Z_awᵀ - HZᵀ     -2Λ  ]  ≺ 0
//! ```
//!
//! and recover `K = P⁻¹Z`, `K_aw = P⁻¹Z_aw`.
//!
//! Gradient saturation: find `W ≻ 0`, diagonal `Υ̃ ≻ 0` and full `X`, `Y`,
//! `Z` such that at every vertex
//!
//! ```text
//! [ HZ + ZᵀH + 2ηW          ⋆             ⋆   ]
//! [ W - Xᵀ + εHZ      -ε(Xᵀ + X)          ⋆   ]
//! [ Y - Υ̃H                -εΥ̃H         -2Υ̃  ]  ≺ 0
//! ```
//!
//! and for every row `ℓ`, `[W, (Z - Y)_ℓᵀ; ⋆, ū_ℓ²] ⪰ 0`. Then `K = ZX⁻¹`,
//! `L = YX⁻¹`, `P = X⁻ᵀWX⁻¹` and `Υ = Υ̃⁻¹`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{EscError, Result};
use crate::plant::SaturationBounds;
use crate::polytope::HessianPolytope;
use crate::sdp::{check_solution, LmiBlock, LmiProblem, SdpStatus, Solver, SolverOptions, STRICT_MARGIN};

/// Lower bound used by the normalizing blocks `P ⪰ cI`, `Λ ⪰ cI`, ....
pub const SHAPING_FLOOR: f64 = 1e-4;
/// Condition number above which a recovered Lyapunov matrix is flagged.
pub const CONDITION_WARNING: f64 = 1e10;
/// Condition number above which `X` is treated as singular.
pub const X_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy)]
enum Shape {
    Symmetric(usize),
    Diagonal(usize),
    Full(usize, usize),
}

/// A matrix-valued decision variable stored at `offset` in the flat vector.
#[derive(Debug, Clone, Copy)]
struct MatVar {
    offset: usize,
    shape: Shape,
}

impl MatVar {
    fn len(&self) -> usize {
        match self.shape {
            Shape::Symmetric(n) => n * (n + 1) / 2,
            Shape::Diagonal(n) => n,
            Shape::Full(r, c) => r * c,
        }
    }

    fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let x = &x[self.offset..self.offset + self.len()];
        match self.shape {
            Shape::Symmetric(n) => {
                let mut m = DMatrix::zeros(n, n);
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        m[(i, j)] = x[k];
                        m[(j, i)] = x[k];
                        k += 1;
                    }
                }
                m
            }
            Shape::Diagonal(_) => DMatrix::from_diagonal(&DVector::from_column_slice(x)),
            Shape::Full(r, c) => DMatrix::from_row_slice(r, c, x),
        }
    }

    fn pack(&self, m: &DMatrix<f64>, x: &mut [f64]) {
        let x = &mut x[self.offset..self.offset + self.len()];
        match self.shape {
            Shape::Symmetric(n) => {
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        x[k] = 0.5 * (m[(i, j)] + m[(j, i)]);
                        k += 1;
                    }
                }
            }
            Shape::Diagonal(n) => {
                for i in 0..n {
                    x[i] = m[(i, i)];
                }
            }
            Shape::Full(r, c) => {
                for i in 0..r {
                    for j in 0..c {
                        x[i * c + j] = m[(i, j)];
                    }
                }
            }
        }
    }
}

#[derive(Debug, Default)]
struct Layout {
    len: usize,
}

impl Layout {
    fn add(&mut self, shape: Shape) -> MatVar {
        let v = MatVar {
            offset: self.len,
            shape,
        };
        self.len += v.len();
        v
    }
}

/// Vectorizes an affine symmetric map by probing it at the origin and at
/// every basis vector.
fn affine_coefficients<F>(num_vars: usize, f: F) -> (DMatrix<f64>, Vec<DMatrix<f64>>)
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let mut x = vec![0.0; num_vars];
    let base = sym(f(&x));
    let coeffs = (0..num_vars)
        .map(|j| {
            x[j] = 1.0;
            let c = sym(f(&x)) - &base;
            x[j] = 0.0;
            c
        })
        .collect();
    (base, coeffs)
}

fn strict_block<F: Fn(&[f64]) -> DMatrix<f64>>(label: &str, num_vars: usize, f: F) -> LmiBlock {
    let (base, coeffs) = affine_coefficients(num_vars, f);
    LmiBlock::negative_definite(label, base, coeffs)
}

fn psd_block<F: Fn(&[f64]) -> DMatrix<f64>>(label: &str, num_vars: usize, f: F) -> LmiBlock {
    let (base, coeffs) = affine_coefficients(num_vars, f);
    LmiBlock::positive_semidefinite(label, base, coeffs)
}

/// `[[a, bᵀ], [b, c]]`
fn blocks2(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (a.nrows(), c.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, 0), (m, n)).copy_from(b);
    out.view_mut((0, n), (n, m)).copy_from(&b.transpose());
    out.view_mut((n, n), (m, m)).copy_from(c);
    out
}

/// Symmetric 3×3 block matrix from its lower triangle.
fn blocks3(
    a11: &DMatrix<f64>,
    a21: &DMatrix<f64>,
    a22: &DMatrix<f64>,
    a31: &DMatrix<f64>,
    a32: &DMatrix<f64>,
    a33: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = a11.nrows();
    let mut out = DMatrix::zeros(3 * n, 3 * n);
    let lower = [((1, 0), a21), ((2, 0), a31), ((2, 1), a32)];
    for ((i, j), m) in lower {
        out.view_mut((i * n, j * n), (n, n)).copy_from(m);
        out.view_mut((j * n, i * n), (n, n)).copy_from(&m.transpose());
    }
    for (i, m) in [(0, a11), (1, a22), (2, a33)] {
        out.view_mut((i * n, i * n), (n, n)).copy_from(m);
    }
    out
}

fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.max()
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.min()
}

/// `sqrt(λ_max(P) / λ_min(P))`
pub fn conditioning(p: &DMatrix<f64>) -> f64 {
    let ev = SymmetricEigen::new((p + p.transpose()) * 0.5).eigenvalues;
    (ev.max() / ev.min()).sqrt()
}

/// Strict-block check used by the verifiers: `λ_max ≤ -1e-7 · ‖F‖_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCheck {
    pub vertex: usize,
    pub lambda_max: f64,
    pub margin: f64,
}

impl VertexCheck {
    fn of(vertex: usize, block: &DMatrix<f64>) -> Self {
        Self {
            vertex,
            lambda_max: max_eigenvalue(block),
            margin: STRICT_MARGIN * block.norm(),
        }
    }

    pub fn passes(&self) -> bool {
        self.lambda_max <= -self.margin
    }
}

fn check_dims(poly: &HessianPolytope, bounds: &SaturationBounds, eta: f64) -> Result<usize> {
    if poly.is_empty() {
        return Err(EscError::InvalidArgument("empty Hessian polytope".into()));
    }
    let n = poly.dim();
    if bounds.dim() != n {
        return Err(EscError::Dimension(format!(
            "{} saturation levels for a {n}-dimensional polytope",
            bounds.dim()
        )));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(EscError::InvalidArgument(format!(
            "decay rate must be positive, got {eta}"
        )));
    }
    Ok(n)
}

fn run_solver(problem: &LmiProblem, options: &SolverOptions) -> Result<crate::sdp::SdpSolution> {
    let mut solver = Solver::new(options.clone());
    let sol = solver.solve(problem)?;
    match sol.status {
        SdpStatus::Feasible => Ok(sol),
        SdpStatus::Infeasible => Err(EscError::Infeasible {
            slack: sol.slack,
            worst_block: sol.worst_block,
        }),
        SdpStatus::NumericalFailure => Err(EscError::Numerical(
            sol.message.unwrap_or_else(|| "solver failure".into()),
        )),
    }
}

/// Solves `A X = B` for symmetric positive definite `A`.
fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| EscError::Numerical(format!("{what} is not positive definite")))?;
    Ok(chol.solve(b))
}

// ---------------------------------------------------------------------------
// anti-windup design

#[derive(Debug, Clone, PartialEq)]
pub struct AwDesign {
    pub k: DMatrix<f64>,
    pub k_aw: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub eta: f64,
    pub kappa: f64,
    /// Solver slack at the returned point.
    pub slack: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

struct AwVars {
    p: MatVar,
    lambda: MatVar,
    z: MatVar,
    z_aw: MatVar,
    len: usize,
}

impl AwVars {
    fn new(n: usize) -> Self {
        let mut lay = Layout::default();
        let p = lay.add(Shape::Symmetric(n));
        let lambda = lay.add(Shape::Diagonal(n));
        let z = lay.add(Shape::Full(n, n));
        let z_aw = lay.add(Shape::Full(n, n));
        Self {
            p,
            lambda,
            z,
            z_aw,
            len: lay.len,
        }
    }
}

fn aw_block(
    h: &DMatrix<f64>,
    eta: f64,
    p: &DMatrix<f64>,
    lambda: &DMatrix<f64>,
    z: &DMatrix<f64>,
    z_aw: &DMatrix<f64>,
) -> DMatrix<f64> {
    let a = z * h + h * z.transpose() + p * (2.0 * eta);
    let b = lambda - z_aw.transpose() - h * z.transpose();
    blocks2(&a, &b, &(lambda * -2.0))
}

fn aw_problem(poly: &HessianPolytope, eta: f64) -> Result<(LmiProblem, AwVars)> {
    let n = poly.dim();
    let v = AwVars::new(n);
    let mut pb = LmiProblem::new(v.len);
    for (i, h) in poly.vertices().iter().enumerate() {
        pb.add_block(strict_block(&format!("vertex {}", i + 1), v.len, |x| {
            aw_block(
                h,
                eta,
                &v.p.value(x),
                &v.lambda.value(x),
                &v.z.value(x),
                &v.z_aw.value(x),
            )
        }))?;
    }
    let floor = DMatrix::identity(n, n) * SHAPING_FLOOR;
    pb.add_block(psd_block("P floor", v.len, |x| v.p.value(x) - &floor))?;
    pb.add_block(psd_block("Lambda floor", v.len, |x| v.lambda.value(x) - &floor))?;
    Ok((pb, v))
}

pub fn design_aw_gains(poly: &HessianPolytope, eta: f64, bounds: &SaturationBounds) -> Result<AwDesign> {
    design_aw_gains_with(poly, eta, bounds, &SolverOptions::default())
}

pub fn design_aw_gains_with(
    poly: &HessianPolytope,
    eta: f64,
    bounds: &SaturationBounds,
    options: &SolverOptions,
) -> Result<AwDesign> {
    check_dims(poly, bounds, eta)?;
    let (pb, v) = aw_problem(poly, eta)?;
    let sol = run_solver(&pb, options)?;
    let p = v.p.value(&sol.x);
    let lambda = v.lambda.value(&sol.x);
    let k = spd_solve(&p, &v.z.value(&sol.x), "P")?;
    let k_aw = spd_solve(&p, &v.z_aw.value(&sol.x), "P")?;
    let mut warnings = Vec::new();
    let kappa = conditioning(&p);
    if kappa * kappa > CONDITION_WARNING {
        warnings.push(format!("P is ill-conditioned (condition number {:.3e})", kappa * kappa));
    }
    let design = AwDesign {
        k,
        k_aw,
        p,
        lambda,
        eta,
        kappa,
        slack: sol.slack,
        iterations: sol.iterations,
        warnings,
    };
    let checks = aw_vertex_checks(&design, poly)?;
    if let Some(bad) = checks.iter().find(|c| !c.passes()) {
        return Err(EscError::Infeasible {
            slack: bad.lambda_max,
            worst_block: format!("vertex {} after gain recovery", bad.vertex + 1),
        });
    }
    Ok(design)
}

/// Blocks `[[PKH + HKᵀP + 2ηP, ⋆], [Λ - K_awᵀP - HKᵀP, -2Λ]]` per vertex.
pub fn aw_vertex_blocks(design: &AwDesign, poly: &HessianPolytope) -> Result<Vec<DMatrix<f64>>> {
    let n = design.p.nrows();
    if poly.dim() != n || design.k.shape() != (n, n) || design.k_aw.shape() != (n, n) {
        return Err(EscError::Dimension("design and polytope disagree in size".into()));
    }
    let z = &design.p * &design.k;
    let z_aw = &design.p * &design.k_aw;
    Ok(poly
        .vertices()
        .iter()
        .map(|h| aw_block(h, design.eta, &design.p, &design.lambda, &z, &z_aw))
        .collect())
}

pub fn aw_vertex_checks(design: &AwDesign, poly: &HessianPolytope) -> Result<Vec<VertexCheck>> {
    Ok(aw_vertex_blocks(design, poly)?
        .iter()
        .enumerate()
        .map(|(i, b)| VertexCheck::of(i, b))
        .collect())
}

/// Largest eigenvalue over all vertex blocks; negative certifies the design.
pub fn verify_aw_design(design: &AwDesign, poly: &HessianPolytope) -> Result<f64> {
    Ok(aw_vertex_checks(design, poly)?
        .iter()
        .map(|c| c.lambda_max)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Slack of the vectorized problem at the design's variables, evaluated by
/// the sdp module's eigenvalue check.
pub fn aw_substitution_slack(design: &AwDesign, poly: &HessianPolytope) -> Result<f64> {
    let (pb, v) = aw_problem(poly, design.eta)?;
    let mut x = vec![0.0; v.len];
    v.p.pack(&design.p, &mut x);
    v.lambda.pack(&design.lambda, &mut x);
    v.z.pack(&(&design.p * &design.k), &mut x);
    v.z_aw.pack(&(&design.p * &design.k_aw), &mut x);
    Ok(check_solution(&pb, &x)?
        .iter()
        .map(|c| c.slack())
        .fold(f64::NEG_INFINITY, f64::max))
}

// ---------------------------------------------------------------------------
// gradient-saturation design

#[derive(Debug, Clone, PartialEq)]
pub struct GradSatDesign {
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub upsilon_tilde: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub eta: f64,
    pub epsilon: f64,
    pub bounds: Vec<f64>,
    pub kappa_g: f64,
    pub slack: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl GradSatDesign {
    /// `Υ = Υ̃⁻¹` (diagonal).
    pub fn upsilon(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.upsilon_tilde.diagonal().map(|d| 1.0 / d))
    }

    /// `Z = KX`
    pub fn z(&self) -> DMatrix<f64> {
        &self.k * &self.x
    }

    /// Value of `ĜᵀPĜ`; the certified region is `V <= 1`.
    pub fn lyapunov(&self, g: &DVector<f64>) -> f64 {
        g.dot(&(&self.p * g))
    }
}

struct GsVars {
    w: MatVar,
    ut: MatVar,
    x: MatVar,
    y: MatVar,
    z: MatVar,
    len: usize,
}

impl GsVars {
    fn new(n: usize) -> Self {
        let mut lay = Layout::default();
        let w = lay.add(Shape::Symmetric(n));
        let ut = lay.add(Shape::Diagonal(n));
        let x = lay.add(Shape::Full(n, n));
        let y = lay.add(Shape::Full(n, n));
        let z = lay.add(Shape::Full(n, n));
        Self {
            w,
            ut,
            x,
            y,
            z,
            len: lay.len,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn gs_block(
    h: &DMatrix<f64>,
    eta: f64,
    eps: f64,
    w: &DMatrix<f64>,
    ut: &DMatrix<f64>,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    z: &DMatrix<f64>,
) -> DMatrix<f64> {
    let hz = h * z;
    let a11 = &hz + hz.transpose() + w * (2.0 * eta);
    let a21 = w - x.transpose() + &hz * eps;
    let a22 = (x.transpose() + x) * -eps;
    let uh = ut * h;
    let a31 = y - &uh;
    let a32 = &uh * -eps;
    let a33 = ut * -2.0;
    blocks3(&a11, &a21, &a22, &a31, &a32, &a33)
}

fn gs_row_block(w: &DMatrix<f64>, y: &DMatrix<f64>, z: &DMatrix<f64>, row: usize, ubar: f64) -> DMatrix<f64> {
    let d = (z.row(row) - y.row(row)).transpose();
    let d = DMatrix::from_row_slice(1, d.nrows(), d.as_slice());
    blocks2(w, &d, &DMatrix::from_element(1, 1, ubar * ubar))
}

fn gs_problem(poly: &HessianPolytope, eta: f64, eps: f64, ubar: &[f64]) -> Result<(LmiProblem, GsVars)> {
    let n = poly.dim();
    let v = GsVars::new(n);
    let mut pb = LmiProblem::new(v.len);
    for (i, h) in poly.vertices().iter().enumerate() {
        pb.add_block(strict_block(&format!("vertex {}", i + 1), v.len, |x| {
            gs_block(
                h,
                eta,
                eps,
                &v.w.value(x),
                &v.ut.value(x),
                &v.x.value(x),
                &v.y.value(x),
                &v.z.value(x),
            )
        }))?;
    }
    for (l, &u) in ubar.iter().enumerate() {
        pb.add_block(psd_block(&format!("row {}", l + 1), v.len, |x| {
            gs_row_block(&v.w.value(x), &v.y.value(x), &v.z.value(x), l, u)
        }))?;
    }
    let floor = DMatrix::identity(n, n) * SHAPING_FLOOR;
    pb.add_block(psd_block("W floor", v.len, |x| v.w.value(x) - &floor))?;
    pb.add_block(psd_block("Upsilon floor", v.len, |x| v.ut.value(x) - &floor))?;
    pb.add_block(psd_block("X floor", v.len, |x| {
        let xm = v.x.value(x);
        &xm + xm.transpose() - &floor
    }))?;
    Ok((pb, v))
}

fn x_condition(x: &DMatrix<f64>) -> f64 {
    let sv = x.clone().svd(false, false).singular_values;
    sv.max() / sv.min()
}

pub fn design_gradsat_gain(
    poly: &HessianPolytope,
    eta: f64,
    epsilon: f64,
    bounds: &SaturationBounds,
) -> Result<GradSatDesign> {
    design_gradsat_gain_with(poly, eta, epsilon, bounds, &SolverOptions::default())
}

pub fn design_gradsat_gain_with(
    poly: &HessianPolytope,
    eta: f64,
    epsilon: f64,
    bounds: &SaturationBounds,
    options: &SolverOptions,
) -> Result<GradSatDesign> {
    let n = check_dims(poly, bounds, eta)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(EscError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let (pb, v) = gs_problem(poly, eta, epsilon, bounds.limits())?;
    let sol = run_solver(&pb, options)?;
    let w = v.w.value(&sol.x);
    let ut = v.ut.value(&sol.x);
    let x = v.x.value(&sol.x);
    let y = v.y.value(&sol.x);
    let z = v.z.value(&sol.x);
    let cond = x_condition(&x);
    if !(cond < X_CONDITION_LIMIT) {
        return Err(EscError::Numerical(format!(
            "X is near singular (condition number {cond:.3e})"
        )));
    }
    let lu = x.transpose().lu();
    let solve_xt = |b: &DMatrix<f64>| lu.solve(b).ok_or_else(|| EscError::Numerical("X is singular".into()));
    // Kᵀ = X⁻ᵀZᵀ, Lᵀ = X⁻ᵀYᵀ, P = X⁻ᵀ (X⁻ᵀ W)ᵀ
    let k = solve_xt(&z.transpose())?.transpose();
    let l = solve_xt(&y.transpose())?.transpose();
    let a = solve_xt(&w)?;
    let p = solve_xt(&a.transpose())?;
    let p = (&p + p.transpose()) * 0.5;
    let mut warnings = Vec::new();
    if min_eigenvalue(&p) <= 0.0 {
        return Err(EscError::Numerical("recovered P is not positive definite".into()));
    }
    let kappa_g = conditioning(&p);
    if kappa_g * kappa_g > CONDITION_WARNING {
        warnings.push(format!(
            "P is ill-conditioned (condition number {:.3e})",
            kappa_g * kappa_g
        ));
    }
    if cond > CONDITION_WARNING {
        warnings.push(format!("X is ill-conditioned (condition number {cond:.3e})"));
    }
    debug_assert_eq!(k.shape(), (n, n));
    let design = GradSatDesign {
        k,
        l,
        w,
        x,
        y,
        upsilon_tilde: ut,
        p,
        eta,
        epsilon,
        bounds: bounds.limits().to_vec(),
        kappa_g,
        slack: sol.slack,
        iterations: sol.iterations,
        warnings,
    };
    let report = verify_gradsat(&design, poly)?;
    if let Some(bad) = report.lmi_vertices.iter().find(|c| !c.passes()) {
        return Err(EscError::Infeasible {
            slack: bad.lambda_max,
            worst_block: format!("vertex {} after gain recovery", bad.vertex + 1),
        });
    }
    Ok(design)
}

/// Substitution checks of a gradient-saturation design.
#[derive(Debug, Clone, PartialEq)]
pub struct GradSatReport {
    /// Strict `3n` blocks with `Z = KX`, `Y = LX`.
    pub lmi_vertices: Vec<VertexCheck>,
    /// `λ_min` of the row blocks.
    pub rows: Vec<f64>,
    /// Strict `2n` Lyapunov blocks in the recovered `P`, `K`, `L`, `Υ`.
    pub lyapunov_vertices: Vec<VertexCheck>,
    /// `λ_min(P - (K - L)_ℓᵀ(K - L)_ℓ / ū_ℓ²)`.
    pub ellipsoid: Vec<f64>,
}

/// Tolerance for the non-strict checks.
pub const PSD_TOL: f64 = 1e-9;

impl GradSatReport {
    pub fn passes(&self) -> bool {
        self.lmi_vertices.iter().all(VertexCheck::passes)
            && self.lyapunov_vertices.iter().all(VertexCheck::passes)
            && self.rows.iter().all(|r| *r >= -PSD_TOL)
            && self.ellipsoid.iter().all(|r| *r >= -PSD_TOL)
    }
}

/// `[[PHK + KᵀHP + 2ηP, ⋆], [ΥL - HP, -2Υ]]` per vertex.
pub fn gradsat_lyapunov_blocks(design: &GradSatDesign, poly: &HessianPolytope) -> Result<Vec<DMatrix<f64>>> {
    let n = design.p.nrows();
    if poly.dim() != n {
        return Err(EscError::Dimension("design and polytope disagree in size".into()));
    }
    let ups = design.upsilon();
    let p = &design.p;
    Ok(poly
        .vertices()
        .iter()
        .map(|h| {
            let phk = p * h * &design.k;
            let a = &phk + phk.transpose() + p * (2.0 * design.eta);
            let b = &ups * &design.l - h * p;
            blocks2(&a, &b, &(&ups * -2.0))
        })
        .collect())
}

pub fn verify_gradsat(design: &GradSatDesign, poly: &HessianPolytope) -> Result<GradSatReport> {
    let n = design.p.nrows();
    if poly.dim() != n || design.bounds.len() != n {
        return Err(EscError::Dimension("design and polytope disagree in size".into()));
    }
    let z = design.z();
    let y = &design.l * &design.x;
    let lmi_vertices = poly
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let b = gs_block(
                h,
                design.eta,
                design.epsilon,
                &design.w,
                &design.upsilon_tilde,
                &design.x,
                &y,
                &z,
            );
            VertexCheck::of(i, &b)
        })
        .collect();
    let rows = design
        .bounds
        .iter()
        .enumerate()
        .map(|(l, &u)| min_eigenvalue(&gs_row_block(&design.w, &y, &z, l, u)))
        .collect();
    let lyapunov_vertices = gradsat_lyapunov_blocks(design, poly)?
        .iter()
        .enumerate()
        .map(|(i, b)| VertexCheck::of(i, b))
        .collect();
    Ok(GradSatReport {
        lmi_vertices,
        rows,
        lyapunov_vertices,
        ellipsoid: verify_ellipsoid_inclusion(design),
    })
}

/// Per-row residual `λ_min(P - d dᵀ / ū_ℓ²)` with `d = (K - L)_ℓᵀ`; all
/// residuals `>= -1e-9` place the ellipsoid `ĜᵀPĜ <= 1` inside the region
/// where the regional sector condition holds.
pub fn verify_ellipsoid_inclusion(design: &GradSatDesign) -> Vec<f64> {
    let diff = &design.k - &design.l;
    design
        .bounds
        .iter()
        .enumerate()
        .map(|(l, &u)| {
            let d = diff.row(l).transpose();
            min_eigenvalue(&(&design.p - &d * d.transpose() / (u * u)))
        })
        .collect()
}

/// Slack of the vectorized problem at the design's variables, evaluated by
/// the sdp module's eigenvalue check.
pub fn gradsat_substitution_slack(design: &GradSatDesign, poly: &HessianPolytope) -> Result<f64> {
    let (pb, v) = gs_problem(poly, design.eta, design.epsilon, &design.bounds)?;
    let mut x = vec![0.0; v.len];
    v.w.pack(&design.w, &mut x);
    v.ut.pack(&design.upsilon_tilde, &mut x);
    v.x.pack(&design.x, &mut x);
    v.y.pack(&(&design.l * &design.x), &mut x);
    v.z.pack(&design.z(), &mut x);
    Ok(check_solution(&pb, &x)?
        .iter()
        .map(|c| c.slack())
        .fold(f64::NEG_INFINITY, f64::max))
}
