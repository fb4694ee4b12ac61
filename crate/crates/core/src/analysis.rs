//! Post-hoc checks on trajectories and dither signals: decay fitting,
//! averaging error, tail bands, sector-condition sampling and period means.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EscError, Result};
use crate::plant::{
    deadzone, delta_matrix, delta_matrix_unshifted, perturbation_terms, QuadraticMap, SaturationBounds,
};
use crate::signals::DitherSpec;
use crate::sim::Trajectory;
use crate::synthesis::GradSatDesign;

/// Intervals of the composite Simpson rule used for period means.
pub const QUADRATURE_INTERVALS: usize = 20_000;
/// Fraction of the horizon treated as the tail.
pub const TAIL_FRACTION: f64 = 0.2;

/// Trajectory signal used by the fitting and deviation routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    ThetaTilde,
    Theta,
    Output,
    Rate,
    GHat,
    /// `sqrt(V)` from the recorded Lyapunov values.
    SqrtLyapunov,
}

impl Signal {
    fn row(self, traj: &Trajectory, k: usize) -> Result<DVector<f64>> {
        Ok(match self {
            Signal::ThetaTilde => traj.theta_tilde.row(k).transpose(),
            Signal::Theta => traj.theta.row(k).transpose(),
            Signal::Output => DVector::from_element(1, traj.y[k]),
            Signal::Rate => traj.u.row(k).transpose(),
            Signal::GHat => traj.g_hat.row(k).transpose(),
            Signal::SqrtLyapunov => {
                let v = traj
                    .lyapunov
                    .as_ref()
                    .ok_or_else(|| EscError::InvalidArgument("trajectory has no Lyapunov record".into()))?;
                DVector::from_element(1, v[k].max(0.0).sqrt())
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub eta_hat: f64,
    /// Prefactor relative to the signal's norm at the window start, so that
    /// `‖x(t)‖ ≈ kappa_hat · ‖x(t₀)‖ · e^(-eta_hat (t - t₀))`.
    pub kappa_hat: f64,
    pub window: (f64, f64),
    /// RMS error of the fit in the log domain.
    pub residual: f64,
    /// Set when the window was cut short at a sample with zero norm.
    pub truncated: bool,
}

/// Least-squares fit of `log‖x(t)‖` against `t` over `window` (whole
/// trajectory when `None`).
pub fn fit_decay(traj: &Trajectory, signal: Signal, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let (t0, t1) = window.unwrap_or((
        *traj
            .times
            .first()
            .ok_or_else(|| EscError::InvalidArgument("empty trajectory".into()))?,
        *traj.times.last().expect("nonempty"),
    ));
    if !(t1 > t0) {
        return Err(EscError::InvalidArgument(format!("empty fit window ({t0}, {t1})")));
    }
    let mut ts = Vec::new();
    let mut ls = Vec::new();
    let mut truncated = false;
    for (k, &t) in traj.times.iter().enumerate() {
        if t < t0 || t > t1 {
            continue;
        }
        let v = signal.row(traj, k)?.norm();
        if !(v > 0.0) {
            truncated = true;
            break;
        }
        ts.push(t);
        ls.push(v.ln());
    }
    if ts.len() < 2 {
        return Err(EscError::InvalidArgument(
            "fewer than two positive samples in the fit window".into(),
        ));
    }
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let lm = ls.iter().sum::<f64>() / n;
    let sxx: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    let sxy: f64 = ts.iter().zip(&ls).map(|(t, l)| (t - tm) * (l - lm)).sum();
    let slope = sxy / sxx;
    let start = ts[0];
    let intercept = lm - slope * (tm - start);
    let residual = (ts
        .iter()
        .zip(&ls)
        .map(|(t, l)| {
            let e = l - (intercept + slope * (t - start));
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        eta_hat: -slope,
        kappa_hat: (intercept - ls[0]).exp(),
        window: (start, *ts.last().expect("nonempty")),
        residual,
        truncated,
    })
}

fn interpolate(traj: &Trajectory, signal: Signal, t: f64) -> Result<DVector<f64>> {
    let times = &traj.times;
    let idx = times.partition_point(|s| *s <= t);
    if idx == 0 {
        return signal.row(traj, 0);
    }
    if idx >= times.len() {
        return signal.row(traj, times.len() - 1);
    }
    let (ta, tb) = (times[idx - 1], times[idx]);
    let w = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
    let a = signal.row(traj, idx - 1)?;
    let b = signal.row(traj, idx)?;
    Ok(&a * (1.0 - w) + &b * w)
}

/// `max_k ‖a(t_k) - b(t_k)‖` over `a`'s samples within `b`'s span, with
/// `b` linearly interpolated when the time bases differ.
pub fn sup_deviation(a: &Trajectory, b: &Trajectory, signal: Signal) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(EscError::InvalidArgument("empty trajectory".into()));
    }
    let same = a.times.len() == b.times.len()
        && a.times
            .iter()
            .zip(&b.times)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    let (lo, hi) = (b.times[0], *b.times.last().expect("nonempty"));
    let mut best = f64::NEG_INFINITY;
    for k in 0..a.len() {
        let t = a.times[k];
        let d = if same {
            signal.row(a, k)? - signal.row(b, k)?
        } else {
            if t < lo || t > hi {
                continue;
            }
            signal.row(a, k)? - interpolate(b, signal, t)?
        };
        best = best.max(d.norm());
    }
    if best == f64::NEG_INFINITY {
        return Err(EscError::InvalidArgument(
            "trajectories have disjoint time spans".into(),
        ));
    }
    Ok(best)
}

/// Index of the first sample in the last `TAIL_FRACTION` of the horizon.
pub fn tail_start(traj: &Trajectory) -> usize {
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    let cut = t_end * (1.0 - TAIL_FRACTION);
    traj.times.partition_point(|t| *t < cut)
}

/// `(max ‖θ - θ*‖, max |y - Q*|)` over the tail.
pub fn tail_residuals(traj: &Trajectory, map: &QuadraticMap) -> (f64, f64) {
    let ts = map.theta_star();
    let mut r_theta: f64 = 0.0;
    let mut r_y: f64 = 0.0;
    for k in tail_start(traj)..traj.len() {
        r_theta = r_theta.max((traj.theta.row(k).transpose() - ts).norm());
        r_y = r_y.max((traj.y[k] - map.q_star()).abs());
    }
    (r_theta, r_y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandConstants {
    pub c_theta: f64,
    pub c_y: f64,
    /// Decay rate used for the horizon precondition `e^(-η t_end) <= 0.01`.
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    pub r_theta: f64,
    pub r_y: f64,
    /// `c_θ (‖a‖ + 1/ω)`
    pub theta_band: f64,
    /// `c_y (‖a‖² + 1/ω²)`
    pub y_band: f64,
    pub theta_band_ok: bool,
    pub y_band_ok: bool,
}

/// Tail residuals against the order bands `c_θ(a + 1/ω)` and
/// `c_y(a² + 1/ω²)`, with `ω = 2π/T`.
pub fn check_theorem1_band(
    traj: &Trajectory,
    map: &QuadraticMap,
    dither: &DitherSpec,
    constants: BandConstants,
) -> Result<BandReport> {
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    if (-constants.eta * t_end).exp() > 0.01 {
        return Err(EscError::InvalidArgument(format!(
            "horizon {t_end} is too short for decay rate {}",
            constants.eta
        )));
    }
    let (r_theta, r_y) = tail_residuals(traj, map);
    let a = dither.amplitude_norm();
    let inv_w = 1.0 / dither.averaging_omega();
    let theta_band = constants.c_theta * (a + inv_w);
    let y_band = constants.c_y * (a * a + inv_w * inv_w);
    Ok(BandReport {
        r_theta,
        r_y,
        theta_band,
        y_band,
        theta_band_ok: r_theta <= theta_band,
        y_band_ok: r_y <= y_band,
    })
}

fn random_diagonal(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| 10f64.powf(rng.random_range(-2.0..1.0)))
}

/// Maximum over `trials` seeded samples of `ψ(θ)ᵀΛ(ψ(θ) - (θ - θ*))` with
/// random inputs and random diagonal `Λ ≻ 0`. A third of the inputs are
/// drawn close to the saturation corners.
pub fn sample_sector_lemma1(
    bounds: &SaturationBounds,
    theta_star: &DVector<f64>,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let n = bounds.dim();
    if theta_star.len() != n {
        return Err(EscError::Dimension("optimum and bounds differ in length".into()));
    }
    let lim = bounds.limits();
    if let Some(i) = (0..n).find(|&i| !(theta_star[i].abs() < lim[i])) {
        return Err(EscError::InvalidArgument(format!(
            "optimum component {i} is not strictly inside the saturation bounds"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..trials {
        let theta = DVector::from_fn(n, |i, _| {
            if k % 3 == 2 {
                let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                side * lim[i] * (1.0 + rng.random_range(-0.01..0.01))
            } else {
                rng.random_range(-3.0 * lim[i]..3.0 * lim[i])
            }
        });
        let lambda = random_diagonal(&mut rng, n);
        let psi = deadzone(&theta, bounds)?;
        let tt = &theta - theta_star;
        let form = psi.component_mul(&lambda).dot(&(&psi - tt));
        worst = worst.max(form);
    }
    Ok(worst)
}

/// Maximum over accepted seeded samples of
/// `ψ(KĜ)ᵀΥ(ψ(KĜ) - LĜ)` with `Ĝ` restricted to
/// `|(K - L)_ℓ Ĝ| <= ū_ℓ` and random diagonal `Υ ≻ 0`.
pub fn sample_sector_lemma4(design: &GradSatDesign, trials: usize, seed: u64) -> Result<f64> {
    let n = design.k.nrows();
    let bounds = SaturationBounds::new(design.bounds.clone())?;
    let diff = &design.k - &design.l;
    let radius = (0..n)
        .filter_map(|l| {
            let r = diff.row(l).norm();
            (r > 0.0).then(|| design.bounds[l] / r)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let radius = if radius.is_finite() {
        2.0 * radius
    } else {
        10.0 * design.bounds.iter().cloned().fold(0.0, f64::max) / design.k.norm().max(1e-12)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut accepted = 0usize;
    let mut drawn = 0usize;
    while accepted < trials {
        drawn += 1;
        if drawn > 1000 && accepted * 1000 < drawn {
            return Err(EscError::InvalidArgument(
                "more than 99.9% of samples fall outside the sector region".into(),
            ));
        }
        let g = DVector::from_fn(n, |_, _| rng.random_range(-radius..radius));
        let d = &diff * &g;
        if (0..n).any(|l| d[l].abs() > design.bounds[l]) {
            continue;
        }
        accepted += 1;
        let ups = random_diagonal(&mut rng, n);
        let kg = &design.k * &g;
        let psi = deadzone(&kg, &bounds)?;
        let form = psi.component_mul(&ups).dot(&(&psi - &design.l * &g));
        worst = worst.max(form);
    }
    Ok(worst)
}

/// Composite Simpson mean of `f` over one period of the dither.
pub fn period_mean<F>(spec: &DitherSpec, f: F) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let (mean, _) = period_mean_and_sup(spec, f)?;
    Ok(mean)
}

/// Period mean and componentwise sup norm over the quadrature nodes.
fn period_mean_and_sup<F>(spec: &DitherSpec, f: F) -> Result<(DVector<f64>, DVector<f64>)>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let period = spec.period();
    let n = QUADRATURE_INTERVALS;
    let h = period / n as f64;
    let first = f(0.0)?;
    let mut acc = DVector::zeros(first.len());
    let mut sup = first.abs();
    for k in 0..=n {
        let v = if k == 0 { first.clone() } else { f(k as f64 * h)? };
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += &v * w;
        sup = sup.sup(&v.abs());
    }
    Ok((acc * (h / 3.0) / period, sup))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermMean {
    pub name: String,
    pub mean: f64,
    pub sup: f64,
}

impl TermMean {
    pub fn relative(&self) -> f64 {
        if self.sup > 0.0 {
            self.mean.abs() / self.sup
        } else {
            self.mean.abs()
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.relative() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroMeanReport {
    /// Means of `M_i`, `S_i`, `Δ_ij` (i ≠ j), `Δ_ii` (mean-free form),
    /// `w_i` and `ς_i`.
    pub terms: Vec<TermMean>,
    /// Period means of the diagonal written as `1 - cos(2ω_i t)`.
    pub delta_diag_unshifted: Vec<f64>,
    /// Period means of the diagonal written as `-cos(2ω_i t)`.
    pub delta_diag_mean_free: Vec<f64>,
}

impl ZeroMeanReport {
    pub fn worst_relative(&self) -> f64 {
        self.terms.iter().map(TermMean::relative).fold(0.0, f64::max)
    }
}

/// Period means of the dither-driven terms of the closed loop at a frozen
/// estimation error.
pub fn zero_mean_report(spec: &DitherSpec, map: &QuadraticMap, frozen: &DVector<f64>) -> Result<ZeroMeanReport> {
    let n = map.dim();
    if spec.dim() != n || frozen.len() != n {
        return Err(EscError::Dimension("dither, map and state dimensions differ".into()));
    }
    // layout: M (n), S (n), Δ (n²), w (n), ς (n), unshifted Δ diagonal (n)
    let len = 5 * n + n * n;
    let (mean, sup) = period_mean_and_sup(spec, |t| {
        let terms = perturbation_terms(spec, map, frozen, t)?;
        let mut v = DVector::zeros(len);
        v.rows_mut(0, n).copy_from(&spec.demodulation(t));
        v.rows_mut(n, n).copy_from(&spec.probing(t));
        let d = delta_matrix(spec, t);
        for i in 0..n {
            for j in 0..n {
                v[2 * n + i * n + j] = d[(i, j)];
            }
        }
        v.rows_mut(2 * n + n * n, n).copy_from(&terms.w);
        v.rows_mut(3 * n + n * n, n).copy_from(&terms.varsigma);
        let du = delta_matrix_unshifted(spec, t);
        for i in 0..n {
            v[4 * n + n * n + i] = du[(i, i)];
        }
        Ok(v)
    })?;
    let mut terms = Vec::new();
    let mut push = |name: String, idx: usize| {
        terms.push(TermMean {
            name,
            mean: mean[idx],
            sup: sup[idx],
        })
    };
    for i in 0..n {
        push(format!("M_{}", i + 1), i);
    }
    for i in 0..n {
        push(format!("S_{}", i + 1), n + i);
    }
    for i in 0..n {
        for j in 0..n {
            push(format!("Delta_{}{}", i + 1, j + 1), 2 * n + i * n + j);
        }
    }
    for i in 0..n {
        push(format!("w_{}", i + 1), 2 * n + n * n + i);
    }
    for i in 0..n {
        push(format!("varsigma_{}", i + 1), 3 * n + n * n + i);
    }
    let delta_diag_unshifted = (0..n).map(|i| mean[4 * n + n * n + i]).collect();
    let delta_diag_mean_free = (0..n).map(|i| mean[2 * n + i * n + i]).collect();
    Ok(ZeroMeanReport {
        terms,
        delta_diag_unshifted,
        delta_diag_mean_free,
    })
}

/// Relative error `‖avg_T[K M(t) Q(θ* + θ̃ + S(t))] - KHθ̃‖ / ‖KHθ̃‖` of the
/// averaged gradient law at each frozen state. The map is evaluated with
/// input saturation when it has bounds, so states should be taken inside
/// the linear region shrunk by the dither amplitude.
pub fn averaged_rhs_errors(
    spec: &DitherSpec,
    map: &QuadraticMap,
    k: &DMatrix<f64>,
    states: &[DVector<f64>],
) -> Result<Vec<f64>> {
    let sat = map.input_bounds().is_some();
    let h = map.hessian();
    states
        .iter()
        .map(|x| {
            let target = k * (h * x);
            let mean = period_mean(spec, |t| {
                let theta = map.theta_star() + x + spec.probing(t);
                Ok(k * (spec.demodulation(t) * map.output(&theta, sat)?))
            })?;
            let scale = target.norm();
            Ok((mean - &target).norm() / if scale > 0.0 { scale } else { 1.0 })
        })
        .collect()
}

/// Seeded states `θ̃` with `θ* + θ̃` inside the box `|θ_ℓ| <= θ̄_ℓ - margin`
/// (or inside `|θ̃_ℓ| <= radius` when the map has no bounds).
pub fn linear_region_states(
    map: &QuadraticMap,
    margin: f64,
    radius: f64,
    count: usize,
    seed: u64,
) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts = map.theta_star();
    (0..count)
        .map(|_| match map.input_bounds() {
            Some(b) => DVector::from_fn(map.dim(), |i, _| {
                let lim = (b.limits()[i] - margin).max(0.0);
                rng.random_range(-lim..=lim) - ts[i]
            }),
            None => DVector::from_fn(map.dim(), |_, _| rng.random_range(-radius..=radius)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Scenario;
    use num_rational::Rational64;

    fn synthetic(values: impl Fn(f64) -> Vec<f64>, n: usize, t_end: f64, samples: usize) -> Trajectory {
        let times: Vec<f64> = (0..samples).map(|k| t_end * k as f64 / (samples - 1) as f64).collect();
        let data: Vec<f64> = times.iter().flat_map(|t| values(*t)).collect();
        let m = DMatrix::from_row_slice(samples, n, &data);
        Trajectory {
            scenario: Scenario::AverageAw,
            times,
            theta: m.clone(),
            theta_tilde: m.clone(),
            y: vec![0.0; samples],
            u: m.clone(),
            g_hat: m,
            lyapunov: None,
            metadata: vec![],
        }
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let tr = synthetic(|t| vec![3.0 * (-2.0 * t).exp(), 0.0], 2, 3.0, 301);
        let fit = fit_decay(&tr, Signal::ThetaTilde, None).unwrap();
        assert!((fit.eta_hat - 2.0).abs() < 1e-10);
        assert!((fit.kappa_hat * 3.0 - 3.0).abs() < 1e-9);
        assert!(fit.residual < 1e-10);
        assert!(!fit.truncated);
    }

    #[test]
    fn constant_signal_has_zero_rate() {
        let tr = synthetic(|_| vec![1.5], 1, 1.0, 11);
        assert!(fit_decay(&tr, Signal::ThetaTilde, None).unwrap().eta_hat.abs() < 1e-12);
    }

    #[test]
    fn fit_is_scale_invariant_in_rate() {
        let a = synthetic(|t| vec![(-t).exp() * (1.0 + 0.1 * (5.0 * t).sin())], 1, 4.0, 401);
        let b = synthetic(|t| vec![7.0 * (-t).exp() * (1.0 + 0.1 * (5.0 * t).sin())], 1, 4.0, 401);
        let fa = fit_decay(&a, Signal::ThetaTilde, None).unwrap();
        let fb = fit_decay(&b, Signal::ThetaTilde, None).unwrap();
        assert!((fa.eta_hat - fb.eta_hat).abs() < 1e-10);
        assert!((fa.kappa_hat - fb.kappa_hat).abs() < 1e-10);
    }

    #[test]
    fn zero_sample_truncates_window() {
        let tr = synthetic(|t| vec![if t < 0.5 { (-t).exp() } else { 0.0 }], 1, 1.0, 101);
        let fit = fit_decay(&tr, Signal::ThetaTilde, None).unwrap();
        assert!(fit.truncated);
        assert!(fit.window.1 < 0.5);
        assert!((fit.eta_hat - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sup_deviation_basics() {
        let a = synthetic(|t| vec![5.0 * (3.0 * t).sin(), 0.0], 2, 1.0, 1001);
        let z = synthetic(|_| vec![0.0, 0.0], 2, 1.0, 1001);
        assert_eq!(sup_deviation(&a, &a, Signal::ThetaTilde).unwrap(), 0.0);
        let d = sup_deviation(&a, &z, Signal::ThetaTilde).unwrap();
        assert!((d - 5.0).abs() < 1e-4);
        // different base: interpolation onto a's grid
        let zc = synthetic(|_| vec![0.0, 0.0], 2, 1.0, 7);
        assert!((sup_deviation(&a, &zc, Signal::ThetaTilde).unwrap() - d).abs() < 1e-12);
        let mut far = zc.clone();
        far.times.iter_mut().for_each(|t| *t += 10.0);
        assert!(sup_deviation(&a, &far, Signal::ThetaTilde).is_err());
    }

    #[test]
    fn sup_deviation_metric_properties() {
        let a = synthetic(|t| vec![t.sin(), t.cos()], 2, 2.0, 201);
        let b = synthetic(|t| vec![t, 1.0], 2, 2.0, 201);
        let c = synthetic(|t| vec![0.3 * t * t, -t], 2, 2.0, 201);
        let d = |x: &Trajectory, y: &Trajectory| sup_deviation(x, y, Signal::ThetaTilde).unwrap();
        assert_eq!(d(&a, &b), d(&b, &a));
        assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15);
    }

    #[test]
    fn global_sector_form_is_nonpositive() {
        let b = SaturationBounds::uniform(5.0, 2).unwrap();
        let ts = DVector::from_vec(vec![2.0, 4.0]);
        assert!(sample_sector_lemma1(&b, &ts, 10_000, 7).unwrap() <= 1e-12);
        assert_eq!(
            sample_sector_lemma1(&b, &ts, 500, 3).unwrap(),
            sample_sector_lemma1(&b, &ts, 500, 3).unwrap()
        );
        let edge = DVector::from_vec(vec![5.0, 0.0]);
        assert!(sample_sector_lemma1(&b, &edge, 10, 1).is_err());
    }

    #[test]
    fn gradient_sector_holds_at_the_gain() {
        let k = DMatrix::from_row_slice(2, 2, &[0.6, 0.1, -0.2, 0.9]);
        let design = GradSatDesign {
            k: k.clone(),
            l: k,
            w: DMatrix::identity(2, 2),
            x: DMatrix::identity(2, 2),
            y: DMatrix::identity(2, 2),
            upsilon_tilde: DMatrix::identity(2, 2),
            p: DMatrix::identity(2, 2),
            eta: 1.0,
            epsilon: 0.5,
            bounds: vec![1.0, 2.0],
            kappa_g: 1.0,
            slack: -1.0,
            iterations: 0,
            warnings: vec![],
        };
        assert!(sample_sector_lemma4(&design, 5000, 11).unwrap() <= 1e-12);
    }

    fn example1_dither() -> DitherSpec {
        DitherSpec::new(
            vec![0.1, 0.1],
            vec![Rational64::from_integer(1), Rational64::from_integer(7)],
            10.0,
        )
        .unwrap()
    }

    fn example1_map() -> QuadraticMap {
        let h = DMatrix::from_row_slice(2, 2, &[100.0, 30.0, 30.0, 20.0]);
        QuadraticMap::new(
            10.0,
            DVector::from_vec(vec![2.0, 4.0]),
            h,
            Some(SaturationBounds::uniform(5.0, 2).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn period_means_of_dither_terms_vanish() {
        let spec = example1_dither();
        let map = example1_map();
        let rep = zero_mean_report(&spec, &map, &DVector::from_vec(vec![0.3, -0.4])).unwrap();
        assert!(rep.worst_relative() <= 1e-6, "{:?}", rep.terms);
        for (u, f) in rep.delta_diag_unshifted.iter().zip(&rep.delta_diag_mean_free) {
            assert!((u - 1.0).abs() < 1e-9);
            assert!(f.abs() < 1e-9);
        }
    }

    #[test]
    fn averaged_law_matches_linear_gradient() {
        let spec = example1_dither();
        let map = example1_map();
        let k = DMatrix::from_row_slice(2, 2, &[-0.0270, 0.0361, 0.0456, -0.1492]);
        let states = linear_region_states(&map, 0.2, 1.0, 20, 5);
        for e in averaged_rhs_errors(&spec, &map, &k, &states).unwrap() {
            assert!(e <= 1e-6, "{e}");
        }
    }

    #[test]
    fn band_check_collapses_without_dither() {
        let map = example1_map();
        let tr = synthetic(|t| vec![2.0 + (-t).exp() * 1e-3, 4.0], 2, 10.0, 1001);
        let mut tr = tr;
        tr.y = tr
            .times
            .iter()
            .enumerate()
            .map(|(k, _)| map.output(&tr.theta.row(k).transpose(), true).unwrap())
            .collect();
        let rep = check_theorem1_band(
            &tr,
            &map,
            &example1_dither(),
            BandConstants {
                c_theta: 10.0,
                c_y: 100.0,
                eta: 1.0,
            },
        )
        .unwrap();
        assert!(rep.r_theta < 1e-6 && rep.theta_band_ok && rep.y_band_ok);
    }
}
