//! Dense feasibility solver for small systems of linear matrix inequalities.
//!
//! Each block is an affine symmetric map `F(x) = F₀ + Σ x_j F_j` that must be
//! negative definite (with margin `μ`, i.e. `λ_max(F) <= -μ`) or positive
//! semidefinite (up to `μ`, i.e. `λ_min(F) >= -μ`). Writing the requirement
//! as `λ_max(S(x)) <= 0` with `S = F + μI` or `S = -(F + μI)`, the solver
//! minimizes the epigraph slack `t` subject to `S_k(x) ⪯ t I` for all blocks
//! and `‖x‖ <= R`, tracing the central path of
//!
//! ```text
//! c·t - Σ log det(t I - S_k(x)) - log(R² - ‖x‖²)
//! ```
//!
//! with damped Newton steps. The system is declared feasible when the
//! slack is negative; the verdict is always re-derived from a symmetric
//! eigendecomposition of the assembled blocks.

use std::fmt;
use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{EscError, Result};

/// Relative margin for strict blocks: `λ_max <= -STRICT_MARGIN · scale`.
pub const STRICT_MARGIN: f64 = 1e-7;
/// Absolute tolerance for semidefinite blocks: `λ_min >= -PSD_MARGIN`.
pub const PSD_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `F(x) ≺ 0`
    NegativeDefinite,
    /// `F(x) ⪰ 0`
    PositiveSemidefinite,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::NegativeDefinite => 1.0,
            Sense::PositiveSemidefinite => -1.0,
        }
    }
}

/// One affine matrix inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub label: String,
    pub base: DMatrix<f64>,
    /// One coefficient per decision variable; `None` where the variable does
    /// not enter the block.
    pub coeffs: Vec<Option<DMatrix<f64>>>,
    pub sense: Sense,
    pub margin: f64,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

impl LmiBlock {
    fn build(label: &str, base: DMatrix<f64>, coeffs: Vec<DMatrix<f64>>, sense: Sense) -> Self {
        let coeffs = coeffs
            .into_iter()
            .map(|c| if c.iter().all(|v| *v == 0.0) { None } else { Some(c) })
            .collect();
        let mut block = Self {
            label: label.to_owned(),
            base,
            coeffs,
            sense,
            margin: 0.0,
        };
        block.margin = match sense {
            Sense::NegativeDefinite => STRICT_MARGIN * block.scale(),
            Sense::PositiveSemidefinite => PSD_MARGIN,
        };
        block
    }

    /// Strict block `F(x) ≺ 0` with the default relative margin.
    pub fn negative_definite(label: &str, base: DMatrix<f64>, coeffs: Vec<DMatrix<f64>>) -> Self {
        Self::build(label, base, coeffs, Sense::NegativeDefinite)
    }

    /// Non-strict block `F(x) ⪰ 0` with the default tolerance.
    pub fn positive_semidefinite(label: &str, base: DMatrix<f64>, coeffs: Vec<DMatrix<f64>>) -> Self {
        Self::build(label, base, coeffs, Sense::PositiveSemidefinite)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    /// Largest Frobenius norm among the base and coefficient matrices.
    pub fn scale(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .chain(std::iter::once(&self.base))
            .map(|m| m.norm())
            .fold(0.0, f64::max)
    }

    /// `F(x)`, symmetrized.
    pub fn assemble(&self, x: &[f64]) -> DMatrix<f64> {
        let mut f = self.base.clone();
        for (c, xj) in self.coeffs.iter().zip(x) {
            if let Some(c) = c {
                f += c * *xj;
            }
        }
        symmetrize(&f)
    }

    fn shifted(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        (self.assemble(x) + DMatrix::identity(n, n) * self.margin) * self.sense.sign()
    }

    /// Every coefficient multiplied by `factor`, margin rescaled for strict
    /// blocks.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut b = self.clone();
        b.base *= factor;
        for c in b.coeffs.iter_mut().flatten() {
            *c *= factor;
        }
        if b.sense == Sense::NegativeDefinite {
            b.margin *= factor.abs();
        }
        b
    }
}

/// A feasibility problem in `num_vars` scalar decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    num_vars: usize,
    blocks: Vec<LmiBlock>,
}

impl LmiProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            blocks: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    pub fn add_block(&mut self, block: LmiBlock) -> Result<()> {
        let d = block.dim();
        if !block.base.is_square() || d == 0 {
            return Err(EscError::Dimension(format!("block {} is not square", block.label)));
        }
        if block.coeffs.len() != self.num_vars {
            return Err(EscError::Dimension(format!(
                "block {} has {} coefficients for {} variables",
                block.label,
                block.coeffs.len(),
                self.num_vars
            )));
        }
        let sym_tol = |m: &DMatrix<f64>| 1e-12 * (1.0 + m.amax());
        for m in block.coeffs.iter().flatten().chain(std::iter::once(&block.base)) {
            if m.shape() != (d, d) {
                return Err(EscError::Dimension(format!("block {} mixes shapes", block.label)));
            }
            if (m - m.transpose()).amax() > sym_tol(m) {
                return Err(EscError::InvalidArgument(format!(
                    "block {} has a non-symmetric coefficient",
                    block.label
                )));
            }
        }
        if !(block.margin >= 0.0) {
            return Err(EscError::InvalidArgument(format!(
                "block {} has a negative margin",
                block.label
            )));
        }
        self.blocks.push(block);
        Ok(())
    }

    /// Copy with every block multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            num_vars: self.num_vars,
            blocks: self.blocks.iter().map(|b| b.scaled(factor)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Feasible,
    Infeasible,
    NumericalFailure,
}

impl fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SdpStatus::Feasible => "feasible",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::NumericalFailure => "numerical-failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: Vec<f64>,
    /// Largest shifted eigenvalue over all blocks at `x`; negative iff every
    /// block meets its margin.
    pub slack: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Label of the block attaining `slack`.
    pub worst_block: String,
    /// Reason attached to a numerical failure.
    pub message: Option<String>,
}

/// Eigenvalue recheck of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub label: String,
    pub sense: Sense,
    /// `λ_max` for strict blocks, `λ_min` for semidefinite blocks.
    pub extreme: f64,
    pub margin: f64,
}

impl BlockCheck {
    /// Largest eigenvalue of the shifted block; `<= 0` when satisfied.
    pub fn slack(&self) -> f64 {
        match self.sense {
            Sense::NegativeDefinite => self.extreme + self.margin,
            Sense::PositiveSemidefinite => -self.extreme - self.margin,
        }
    }

    pub fn satisfied(&self) -> bool {
        match self.sense {
            Sense::NegativeDefinite => self.extreme <= -self.margin,
            Sense::PositiveSemidefinite => self.extreme >= -self.margin,
        }
    }
}

fn eigenvalues(m: DMatrix<f64>) -> DVector<f64> {
    SymmetricEigen::new(m).eigenvalues
}

/// Extreme eigenvalue of every assembled block at `x`, by symmetric
/// eigendecomposition.
pub fn check_solution(problem: &LmiProblem, x: &[f64]) -> Result<Vec<BlockCheck>> {
    if x.len() != problem.num_vars {
        return Err(EscError::Dimension(format!(
            "{} values for {} variables",
            x.len(),
            problem.num_vars
        )));
    }
    Ok(problem
        .blocks
        .iter()
        .map(|b| {
            let ev = eigenvalues(b.assemble(x));
            let extreme = match b.sense {
                Sense::NegativeDefinite => ev.max(),
                Sense::PositiveSemidefinite => ev.min(),
            };
            BlockCheck {
                label: b.label.clone(),
                sense: b.sense,
                extreme,
                margin: b.margin,
            }
        })
        .collect())
}

fn worst(checks: &[BlockCheck]) -> (f64, String) {
    checks
        .iter()
        .map(|c| (c.slack(), c.label.clone()))
        .fold((f64::NEG_INFINITY, String::new()), |a, b| if b.0 > a.0 { b } else { a })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stop when the barrier gap bound `ν / c` falls below
    /// `tol · max(1, |t|)`.
    pub tol: f64,
    /// Total Newton iteration budget.
    pub max_iter: usize,
    /// Radius of the ball bounding the decision vector.
    pub radius: f64,
    /// Factor by which the barrier weight grows per outer iteration.
    pub growth: f64,
    /// Stop early once the verified slack drops to `-depth` or below.
    pub depth: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 1000,
            radius: 1e4,
            growth: 10.0,
            depth: None,
        }
    }
}

/// One Newton iteration of the solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub t: f64,
    pub decrement: f64,
    pub step: f64,
}

const ARMIJO_SLOPE: f64 = 0.01;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-14;
const CENTERING_TOL: f64 = 1e-10;
/// Accepted steps shorter than this mean the iterate cannot move at
/// working precision.
const STALL_STEP: f64 = 1e-6;

struct Prepared {
    dim: usize,
    /// `-σ(F₀ + μI)`
    c0: DMatrix<f64>,
    /// `(variable, -σ F_j)` for the variables entering the block
    terms: Vec<(usize, DMatrix<f64>)>,
}

impl Prepared {
    fn new(b: &LmiBlock) -> Self {
        let s = b.sense.sign();
        let n = b.dim();
        let c0 = -(symmetrize(&b.base) + DMatrix::identity(n, n) * b.margin) * s;
        let terms = b
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.as_ref().map(|c| (j, -symmetrize(c) * s)))
            .collect();
        Self { dim: n, c0, terms }
    }

    /// `G(z) = t I - S(x)`.
    fn gap_matrix(&self, x: &[f64], t: f64) -> DMatrix<f64> {
        let mut g = self.c0.clone();
        for (j, a) in &self.terms {
            g += a * x[*j];
        }
        for i in 0..self.dim {
            g[(i, i)] += t;
        }
        g
    }
}

/// Stateful solver; keeps the iteration trace of the last solve.
#[derive(Debug, Clone, Default)]
pub struct Solver {
    pub options: SolverOptions,
    trace: Vec<IterRecord>,
}

impl Solver {
    pub fn new(options: SolverOptions) -> Self {
        Self {
            options,
            trace: Vec::new(),
        }
    }

    pub fn trace(&self) -> &[IterRecord] {
        &self.trace
    }

    /// Iteration log as CSV with header `iter,t,newton_decrement,step`.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,t,newton_decrement,step")?;
        for r in &self.trace {
            writeln!(out, "{},{:.12e},{:.6e},{:.6e}", r.iter, r.t, r.decrement, r.step)?;
        }
        Ok(())
    }

    pub fn solve(&mut self, problem: &LmiProblem) -> Result<SdpSolution> {
        let opts = &self.options;
        if !(opts.tol > 0.0) {
            return Err(EscError::InvalidArgument("solver tolerance must be positive".into()));
        }
        if !(opts.radius > 0.0 && opts.growth > 1.0) {
            return Err(EscError::InvalidArgument("bad solver radius or growth factor".into()));
        }
        if problem.blocks.is_empty() {
            return Err(EscError::InvalidArgument("problem has no blocks".into()));
        }
        self.trace.clear();
        let m = problem.num_vars;
        let prepared: Vec<Prepared> = problem.blocks.iter().map(Prepared::new).collect();
        let nu = prepared.iter().map(|p| p.dim).sum::<usize>() as f64 + 1.0;
        let r2 = opts.radius * opts.radius;

        let mut x = vec![0.0; m];
        let t0 = problem
            .blocks
            .iter()
            .map(|b| eigenvalues(b.shifted(&x)).max())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut t = t0 + 1.0;
        let mut c = 1.0 / (1.0 + t0.abs());
        let mut iterations = 0usize;
        let mut outer = 0usize;

        let barrier = |x: &[f64], t: f64, c: f64| -> Option<f64> {
            let ball = r2 - x.iter().map(|v| v * v).sum::<f64>();
            if !(ball > 0.0) {
                return None;
            }
            let mut val = c * t - ball.ln();
            for p in &prepared {
                let chol = Cholesky::new(p.gap_matrix(x, t))?;
                let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
                val -= logdet;
            }
            Some(val)
        };

        let finish = |x: Vec<f64>, status: SdpStatus, iterations: usize, message: Option<String>| {
            let checks = check_solution(problem, &x)?;
            let (slack, worst_block) = worst(&checks);
            let status = match status {
                SdpStatus::Feasible if slack >= 0.0 => SdpStatus::Infeasible,
                s => s,
            };
            Ok(SdpSolution {
                x,
                slack,
                status,
                iterations,
                worst_block,
                message,
            })
        };

        loop {
            let mut stalled = false;
            // centering at weight c
            loop {
                if iterations >= opts.max_iter {
                    return finish(
                        x,
                        SdpStatus::NumericalFailure,
                        iterations,
                        Some(format!("iteration budget {} exhausted", opts.max_iter)),
                    );
                }
                iterations += 1;
                let n = m + 1;
                let mut grad = DVector::<f64>::zeros(n);
                let mut hess = DMatrix::<f64>::zeros(n, n);
                grad[m] = c;
                let ball = r2 - x.iter().map(|v| v * v).sum::<f64>();
                for j in 0..m {
                    grad[j] += 2.0 * x[j] / ball;
                    hess[(j, j)] += 2.0 / ball;
                    for i in 0..m {
                        hess[(i, j)] += 4.0 * x[i] * x[j] / (ball * ball);
                    }
                }
                for p in &prepared {
                    let chol = match Cholesky::new(p.gap_matrix(&x, t)) {
                        Some(ch) => ch,
                        None => {
                            return finish(
                                x,
                                SdpStatus::NumericalFailure,
                                iterations,
                                Some("iterate left the barrier domain".into()),
                            )
                        }
                    };
                    let l = chol.l();
                    // B = L⁻¹ A L⁻ᵀ for every direction entering the block,
                    // with the slack direction (A = I) last
                    let mut dirs: Vec<(usize, DMatrix<f64>)> = Vec::with_capacity(p.terms.len() + 1);
                    for (j, a) in &p.terms {
                        dirs.push((*j, whiten(&l, a)));
                    }
                    let l_inv = l
                        .clone()
                        .solve_lower_triangular(&DMatrix::identity(p.dim, p.dim))
                        .ok_or_else(|| EscError::Numerical("singular Cholesky factor".into()))?;
                    dirs.push((m, &l_inv * l_inv.transpose()));
                    for (a_idx, (ja, ba)) in dirs.iter().enumerate() {
                        grad[*ja] -= ba.trace();
                        for (jb, bb) in dirs.iter().skip(a_idx) {
                            let v = ba.dot(bb);
                            hess[(*ja, *jb)] += v;
                            if ja != jb {
                                hess[(*jb, *ja)] += v;
                            }
                        }
                    }
                }
                let chol = match Cholesky::<f64, Dyn>::new(hess) {
                    Some(ch) => ch,
                    None if outer > 0 => {
                        // curvature lost to roundoff along a converged path
                        stalled = true;
                        break;
                    }
                    None => {
                        return finish(
                            x,
                            SdpStatus::NumericalFailure,
                            iterations,
                            Some(format!(
                                "barrier Hessian not positive definite at iteration {iterations}"
                            )),
                        )
                    }
                };
                let dir = -chol.solve(&grad);
                let dec2 = -grad.dot(&dir);
                if !dec2.is_finite() {
                    return finish(
                        x,
                        SdpStatus::NumericalFailure,
                        iterations,
                        Some("non-finite Newton step".into()),
                    );
                }
                if dec2 / 2.0 <= CENTERING_TOL {
                    self.trace.push(IterRecord {
                        iter: iterations,
                        t,
                        decrement: dec2.max(0.0).sqrt(),
                        step: 0.0,
                    });
                    break;
                }
                let phi0 = barrier(&x, t, c).ok_or_else(|| EscError::Numerical("barrier undefined".into()))?;
                let mut step = 1.0;
                let accepted = loop {
                    let xs: Vec<f64> = (0..m).map(|j| x[j] + step * dir[j]).collect();
                    let ts = t + step * dir[m];
                    if let Some(phi) = barrier(&xs, ts, c) {
                        if phi <= phi0 - ARMIJO_SLOPE * step * dec2 {
                            break Some((xs, ts, phi));
                        }
                    }
                    step *= BACKTRACK;
                    if step < MIN_STEP {
                        break None;
                    }
                };
                self.trace.push(IterRecord {
                    iter: iterations,
                    t,
                    decrement: dec2.sqrt(),
                    step,
                });
                match accepted {
                    Some((xs, ts, phi)) => {
                        x = xs;
                        t = ts;
                        if step < STALL_STEP || phi0 - phi <= 1e-13 * (1.0 + phi0.abs()) {
                            stalled = true;
                            break;
                        }
                    }
                    None => {
                        stalled = true;
                        break;
                    }
                }
            }

            let checks = check_solution(problem, &x)?;
            let (slack, _) = worst(&checks);
            let gap = nu / c;
            if let Some(depth) = opts.depth {
                if slack <= -depth {
                    return finish(x, SdpStatus::Feasible, iterations, None);
                }
            }
            if t - gap > 0.0 {
                return finish(x, SdpStatus::Infeasible, iterations, None);
            }
            if stalled || gap <= opts.tol * t.abs().max(1.0) {
                let status = if slack < 0.0 {
                    SdpStatus::Feasible
                } else {
                    SdpStatus::Infeasible
                };
                return finish(x, status, iterations, None);
            }
            c *= opts.growth;
            outer += 1;
        }
    }
}

/// `L⁻¹ A L⁻ᵀ` for symmetric `A`.
fn whiten(l: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let y = l.solve_lower_triangular(a).expect("triangular factor has a zero pivot");
    let z = l
        .solve_lower_triangular(&y.transpose())
        .expect("triangular factor has a zero pivot");
    symmetrize(&z)
}

/// Solves with default options apart from `tol` and `max_iter`.
pub fn solve_feasibility(problem: &LmiProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    let mut solver = Solver::new(SolverOptions {
        tol,
        max_iter,
        ..SolverOptions::default()
    });
    solver.solve(problem)
}
