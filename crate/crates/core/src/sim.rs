//! Fixed-step RK4 integration of the true closed loops and their averages.
//!
//! All four systems are integrated in the original time `t`. The true loops
//! carry the full dither and demodulation signals; the average systems are
//! autonomous.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{EscError, Result};
use crate::plant::{deadzone, saturate, AwController, GradSatController, QuadraticMap};
use crate::signals::DitherSpec;

/// Default number of steps per dither period.
pub const STEPS_PER_PERIOD: f64 = 1000.0;
/// Coarsest admissible step, as a fraction of the dither period.
pub const MIN_STEPS_PER_PERIOD: f64 = 200.0;
/// Abort once `‖θ̂‖ > BLOW_UP_FACTOR · (1 + ‖θ(0)‖)`.
pub const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    InputSaturation,
    GradientSaturation,
    AverageAw,
    AverageGradSat,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::InputSaturation => "input-saturation",
            Scenario::GradientSaturation => "gradient-saturation",
            Scenario::AverageAw => "average-aw",
            Scenario::AverageGradSat => "average-gradsat",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        [
            Scenario::InputSaturation,
            Scenario::GradientSaturation,
            Scenario::AverageAw,
            Scenario::AverageGradSat,
        ]
        .into_iter()
        .find(|s| s.name() == text)
    }

    /// The average counterpart of a true loop (identity on average systems).
    pub fn averaged(self) -> Self {
        match self {
            Scenario::InputSaturation | Scenario::AverageAw => Scenario::AverageAw,
            Scenario::GradientSaturation | Scenario::AverageGradSat => Scenario::AverageGradSat,
        }
    }

    pub fn is_average(self) -> bool {
        matches!(self, Scenario::AverageAw | Scenario::AverageGradSat)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Aw(AwController),
    GradSat(GradSatController),
}

impl Controller {
    pub fn k(&self) -> &DMatrix<f64> {
        match self {
            Controller::Aw(c) => &c.k,
            Controller::GradSat(c) => &c.k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    /// The true map; its Hessian is the plant's actual `H`.
    pub map: QuadraticMap,
    pub dither: DitherSpec,
    pub controller: Controller,
    /// Initial input `θ(0)`; with sine dithers `S(0) = 0`, so `θ̂(0) = θ(0)`.
    pub theta0: DVector<f64>,
    pub t_end: f64,
    pub dt: f64,
    /// Lyapunov matrix used to record `V(t)`: of `θ̃` for the anti-windup
    /// loops, of `Ĝ` for the gradient-saturation loops.
    pub lyapunov: Option<DMatrix<f64>>,
    /// Reject average gradient runs starting outside `ĜᵀPĜ <= 1`.
    pub certify_region: bool,
}

impl SimConfig {
    /// Config with the default step `T / 1000`.
    pub fn new(
        scenario: Scenario,
        map: QuadraticMap,
        dither: DitherSpec,
        controller: Controller,
        theta0: DVector<f64>,
        t_end: f64,
    ) -> Self {
        let dt = dither.period() / STEPS_PER_PERIOD;
        Self {
            scenario,
            map,
            dither,
            controller,
            theta0,
            t_end,
            dt,
            lyapunov: None,
            certify_region: false,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_lyapunov(mut self, p: DMatrix<f64>, certify_region: bool) -> Self {
        self.lyapunov = Some(p);
        self.certify_region = certify_region;
        self
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.map.dim();
        if self.dither.dim() != n || self.theta0.len() != n {
            return Err(EscError::Dimension(format!(
                "map has dimension {n}, dither {} and initial state {}",
                self.dither.dim(),
                self.theta0.len()
            )));
        }
        let cn = match &self.controller {
            Controller::Aw(c) => c.dim(),
            Controller::GradSat(c) => c.dim(),
        };
        if cn != n {
            return Err(EscError::Dimension(format!("controller has dimension {cn}, map {n}")));
        }
        match (self.scenario, &self.controller) {
            (Scenario::InputSaturation | Scenario::AverageAw, Controller::Aw(_))
            | (Scenario::GradientSaturation | Scenario::AverageGradSat, Controller::GradSat(_)) => {}
            (s, _) => {
                return Err(EscError::InvalidArgument(format!(
                    "scenario {s} does not match the controller type"
                )))
            }
        }
        if matches!(self.scenario, Scenario::InputSaturation | Scenario::AverageAw) && self.map.input_bounds().is_none()
        {
            return Err(EscError::InvalidArgument(
                "the anti-windup scenarios need input saturation bounds on the map".into(),
            ));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(EscError::InvalidArgument(format!("step {} is not positive", self.dt)));
        }
        let max_dt = self.dither.period() / MIN_STEPS_PER_PERIOD;
        if self.dt > max_dt * (1.0 + 1e-12) {
            return Err(EscError::InvalidArgument(format!(
                "step {} exceeds T/{MIN_STEPS_PER_PERIOD} = {max_dt}",
                self.dt
            )));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(EscError::InvalidArgument(format!(
                "horizon {} is not positive",
                self.t_end
            )));
        }
        if let Some(p) = &self.lyapunov {
            if p.shape() != (n, n) {
                return Err(EscError::Dimension("Lyapunov matrix size".into()));
            }
        }
        if self.theta0.iter().any(|v| !v.is_finite()) {
            return Err(EscError::InvalidArgument("initial state is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub times: Vec<f64>,
    /// Applied input `θ = θ̂ + S` (average systems: `θ̃_av + θ*`), one row
    /// per sample.
    pub theta: DMatrix<f64>,
    pub theta_tilde: DMatrix<f64>,
    pub y: Vec<f64>,
    /// Integrator input `θ̂̇`.
    pub u: DMatrix<f64>,
    pub g_hat: DMatrix<f64>,
    /// `V(t)` when a Lyapunov matrix was supplied.
    pub lyapunov: Option<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.theta.ncols()
    }

    /// Writes the CSV `t,theta_1..,y,u_1..,ghat_1..`, keeping every
    /// `stride`-th sample starting with the first.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> std::io::Result<()> {
        let stride = stride.max(1);
        let n = self.dim();
        let mut header = vec!["t".to_owned()];
        header.extend((1..=n).map(|i| format!("theta_{i}")));
        header.push("y".into());
        header.extend((1..=n).map(|i| format!("u_{i}")));
        header.extend((1..=n).map(|i| format!("ghat_{i}")));
        writeln!(out, "{}", header.join(","))?;
        for k in (0..self.len()).step_by(stride) {
            let mut row = vec![format!("{}", self.times[k])];
            row.extend((0..n).map(|i| format!("{}", self.theta[(k, i)])));
            row.push(format!("{}", self.y[k]));
            row.extend((0..n).map(|i| format!("{}", self.u[(k, i)])));
            row.extend((0..n).map(|i| format!("{}", self.g_hat[(k, i)])));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

struct Recorder {
    times: Vec<f64>,
    theta: Vec<f64>,
    theta_tilde: Vec<f64>,
    y: Vec<f64>,
    u: Vec<f64>,
    g_hat: Vec<f64>,
}

impl Recorder {
    fn with_capacity(samples: usize, n: usize) -> Self {
        Self {
            times: Vec::with_capacity(samples),
            theta: Vec::with_capacity(samples * n),
            theta_tilde: Vec::with_capacity(samples * n),
            y: Vec::with_capacity(samples),
            u: Vec::with_capacity(samples * n),
            g_hat: Vec::with_capacity(samples * n),
        }
    }

    fn push(&mut self, s: Sample) {
        self.times.push(s.t);
        self.theta.extend(s.theta.iter());
        self.theta_tilde.extend(s.theta_tilde.iter());
        self.y.push(s.y);
        self.u.extend(s.u.iter());
        self.g_hat.extend(s.g_hat.iter());
    }

    fn finish(
        self,
        scenario: Scenario,
        n: usize,
        lyapunov: Option<&DMatrix<f64>>,
        metadata: Vec<(String, String)>,
    ) -> Trajectory {
        let rows = self.times.len();
        let m = |v: Vec<f64>| DMatrix::from_row_slice(rows, n, &v);
        let theta_tilde = m(self.theta_tilde);
        let g_hat = m(self.g_hat);
        let lyap = lyapunov.map(|p| {
            let src = match scenario {
                Scenario::InputSaturation | Scenario::AverageAw => &theta_tilde,
                _ => &g_hat,
            };
            (0..rows)
                .map(|k| {
                    let x = src.row(k).transpose();
                    x.dot(&(p * &x))
                })
                .collect()
        });
        Trajectory {
            scenario,
            times: self.times,
            theta: m(self.theta),
            theta_tilde,
            y: self.y,
            u: m(self.u),
            g_hat,
            lyapunov: lyap,
            metadata,
        }
    }
}

struct Sample {
    t: f64,
    theta: DVector<f64>,
    theta_tilde: DVector<f64>,
    y: f64,
    u: DVector<f64>,
    g_hat: DVector<f64>,
}

fn rk4_step<F>(f: &F, t: f64, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * h, &(x + &k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(x + &k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(x + &k3 * h))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrates `ẋ = f(t, x)` on `[0, t_end]`, calling `observe` at every
/// grid point. The guard applies to the first `guard_dims` components.
fn integrate<F, O>(
    cfg: &SimConfig,
    x0: DVector<f64>,
    guard_scale: f64,
    guard_dims: usize,
    f: F,
    mut observe: O,
) -> Result<(usize, f64)>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
    O: FnMut(f64, &DVector<f64>) -> Result<()>,
{
    let steps = ((cfg.t_end / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let h = cfg.t_end / steps as f64;
    let limit = BLOW_UP_FACTOR * (1.0 + guard_scale);
    let mut x = x0;
    observe(0.0, &x)?;
    for k in 0..steps {
        let t = k as f64 * h;
        x = rk4_step(&f, t, &x, h)?;
        let t_next = (k + 1) as f64 * h;
        let head = x.rows(0, guard_dims);
        if head.iter().any(|v| !v.is_finite()) || head.norm() > limit {
            return Err(EscError::BlowUp { time: t_next });
        }
        observe(t_next, &x)?;
    }
    Ok((steps, h))
}

fn base_metadata(cfg: &SimConfig, steps: usize, h: f64) -> Vec<(String, String)> {
    vec![
        ("scenario".into(), cfg.scenario.name().into()),
        ("dt".into(), format!("{h}")),
        ("steps".into(), steps.to_string()),
        ("t_end".into(), format!("{}", cfg.t_end)),
        ("period".into(), format!("{}", cfg.dither.period())),
        ("clock".into(), "t".into()),
    ]
}

fn expect(cfg: &SimConfig, scenario: Scenario) -> Result<()> {
    cfg.validate()?;
    if cfg.scenario != scenario {
        return Err(EscError::InvalidArgument(format!(
            "config is for {}, not {scenario}",
            cfg.scenario
        )));
    }
    Ok(())
}

/// `(θ, y, u, Ĝ)` at one instant of a true loop.
type LoopEval = (DVector<f64>, f64, DVector<f64>, DVector<f64>);

/// True input-saturated loop: `θ̂̇ = K M(t) Q(sat(θ̂ + S(t))) - K_aw ψ(θ̂ + S(t))`.
pub fn simulate_input_sat(cfg: &SimConfig) -> Result<Trajectory> {
    expect(cfg, Scenario::InputSaturation)?;
    let ctrl = match &cfg.controller {
        Controller::Aw(c) => c,
        Controller::GradSat(_) => unreachable!("checked by validate"),
    };
    let n = cfg.map.dim();
    let ts = cfg.map.theta_star().clone();
    let eval = |t: f64, theta_hat: &DVector<f64>| -> Result<LoopEval> {
        let theta = theta_hat + cfg.dither.probing(t);
        let y = cfg.map.output(&theta, true)?;
        let g = cfg.dither.demodulation(t) * y;
        let u = ctrl.control(&g, &theta)?;
        Ok((theta, y, g, u))
    };
    let steps_hint = (cfg.t_end / cfg.dt).ceil() as usize + 1;
    let mut rec = Recorder::with_capacity(steps_hint, n);
    let (steps, h) = integrate(
        cfg,
        cfg.theta0.clone(),
        cfg.theta0.norm(),
        n,
        |t, x| Ok(eval(t, x)?.3),
        |t, x| {
            let (theta, y, g_hat, u) = eval(t, x)?;
            rec.push(Sample {
                t,
                theta,
                theta_tilde: x - &ts,
                y,
                u,
                g_hat,
            });
            Ok(())
        },
    )?;
    let meta = base_metadata(cfg, steps, h);
    Ok(rec.finish(cfg.scenario, n, cfg.lyapunov.as_ref(), meta))
}

/// True gradient-saturated loop: `θ̂̇ = sat(K M(t) Q(θ̂ + S(t)))`.
pub fn simulate_gradient_sat(cfg: &SimConfig) -> Result<Trajectory> {
    expect(cfg, Scenario::GradientSaturation)?;
    let ctrl = match &cfg.controller {
        Controller::GradSat(c) => c,
        Controller::Aw(_) => unreachable!("checked by validate"),
    };
    let n = cfg.map.dim();
    let ts = cfg.map.theta_star().clone();
    let sat_input = cfg.map.input_bounds().is_some();
    let eval = |t: f64, theta_hat: &DVector<f64>| -> Result<LoopEval> {
        let theta = theta_hat + cfg.dither.probing(t);
        let y = cfg.map.output(&theta, sat_input)?;
        let g = cfg.dither.demodulation(t) * y;
        let u = ctrl.control(&g)?;
        Ok((theta, y, g, u))
    };
    let steps_hint = (cfg.t_end / cfg.dt).ceil() as usize + 1;
    let mut rec = Recorder::with_capacity(steps_hint, n);
    let (steps, h) = integrate(
        cfg,
        cfg.theta0.clone(),
        cfg.theta0.norm(),
        n,
        |t, x| Ok(eval(t, x)?.3),
        |t, x| {
            let (theta, y, g_hat, u) = eval(t, x)?;
            rec.push(Sample {
                t,
                theta,
                theta_tilde: x - &ts,
                y,
                u,
                g_hat,
            });
            Ok(())
        },
    )?;
    let meta = base_metadata(cfg, steps, h);
    Ok(rec.finish(cfg.scenario, n, cfg.lyapunov.as_ref(), meta))
}

/// Average anti-windup loop:
/// `θ̃̇ = KHθ̃ - (KH + K_aw) ψ(θ̃ + θ*)`.
pub fn simulate_average_aw(cfg: &SimConfig) -> Result<Trajectory> {
    expect(cfg, Scenario::AverageAw)?;
    let ctrl = match &cfg.controller {
        Controller::Aw(c) => c,
        Controller::GradSat(_) => unreachable!("checked by validate"),
    };
    let n = cfg.map.dim();
    let ts = cfg.map.theta_star().clone();
    let h = cfg.map.hessian().clone();
    let kh = &ctrl.k * &h;
    let kh_aw = &kh + &ctrl.k_aw;
    let field = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let psi = deadzone(&(x + &ts), &ctrl.bounds)?;
        Ok(&kh * x - &kh_aw * psi)
    };
    let x0 = &cfg.theta0 - &ts;
    let steps_hint = (cfg.t_end / cfg.dt).ceil() as usize + 1;
    let mut rec = Recorder::with_capacity(steps_hint, n);
    let (steps, hstep) = integrate(
        cfg,
        x0,
        cfg.theta0.norm(),
        n,
        |_, x| field(x),
        |t, x| {
            let theta = x + &ts;
            rec.push(Sample {
                t,
                y: cfg.map.output(&theta, true)?,
                theta,
                theta_tilde: x.clone(),
                u: field(x)?,
                g_hat: &h * x,
            });
            Ok(())
        },
    )?;
    let meta = base_metadata(cfg, steps, hstep);
    Ok(rec.finish(cfg.scenario, n, cfg.lyapunov.as_ref(), meta))
}

/// Average gradient-saturation loop on the state `(θ̃, Ĝ)`:
/// `θ̃̇ = sat(KĜ)`, `Ĝ̇ = H sat(KĜ) = HKĜ - Hψ(KĜ)`, with `Ĝ(0) = Hθ̃(0)`.
pub fn simulate_average_gradsat(cfg: &SimConfig) -> Result<Trajectory> {
    expect(cfg, Scenario::AverageGradSat)?;
    let ctrl = match &cfg.controller {
        Controller::GradSat(c) => c,
        Controller::Aw(_) => unreachable!("checked by validate"),
    };
    let n = cfg.map.dim();
    let ts = cfg.map.theta_star().clone();
    let h = cfg.map.hessian().clone();
    let x0 = &cfg.theta0 - &ts;
    let g0 = &h * &x0;
    if let (Some(p), true) = (&cfg.lyapunov, cfg.certify_region) {
        let v0 = g0.dot(&(p * &g0));
        if v0 > 1.0 {
            return Err(EscError::OutsideRegion { value: v0 });
        }
    }
    let rate = |g: &DVector<f64>| saturate(&(&ctrl.k * g), &ctrl.bounds);
    let mut z0 = DVector::zeros(2 * n);
    z0.rows_mut(0, n).copy_from(&x0);
    z0.rows_mut(n, n).copy_from(&g0);
    let sat_input = cfg.map.input_bounds().is_some();
    let steps_hint = (cfg.t_end / cfg.dt).ceil() as usize + 1;
    let mut rec = Recorder::with_capacity(steps_hint, n);
    let (steps, hstep) = integrate(
        cfg,
        z0,
        cfg.theta0.norm(),
        n,
        |_, z| {
            let u = rate(&z.rows(n, n).into_owned())?;
            let mut dz = DVector::zeros(2 * n);
            dz.rows_mut(n, n).copy_from(&(&h * &u));
            dz.rows_mut(0, n).copy_from(&u);
            Ok(dz)
        },
        |t, z| {
            let x = z.rows(0, n).into_owned();
            let g = z.rows(n, n).into_owned();
            let theta = &x + &ts;
            rec.push(Sample {
                t,
                y: cfg.map.output(&theta, sat_input)?,
                theta,
                theta_tilde: x,
                u: rate(&g)?,
                g_hat: g,
            });
            Ok(())
        },
    )?;
    let mut meta = base_metadata(cfg, steps, hstep);
    meta.push((
        "time_scale".into(),
        "the 1/omega factor of the scaled average gradient dynamics is dropped".into(),
    ));
    Ok(rec.finish(cfg.scenario, n, cfg.lyapunov.as_ref(), meta))
}

/// Runs whichever system `cfg.scenario` names.
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory> {
    match cfg.scenario {
        Scenario::InputSaturation => simulate_input_sat(cfg),
        Scenario::GradientSaturation => simulate_gradient_sat(cfg),
        Scenario::AverageAw => simulate_average_aw(cfg),
        Scenario::AverageGradSat => simulate_average_gradsat(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::SaturationBounds;
    use num_rational::Rational64;

    fn dither(a: f64) -> DitherSpec {
        DitherSpec::new(
            vec![a, a],
            vec![Rational64::from_integer(1), Rational64::from_integer(7)],
            10.0,
        )
        .unwrap()
    }

    fn aw_cfg(scenario: Scenario, theta0: [f64; 2], a: f64, t_end: f64) -> SimConfig {
        let b = SaturationBounds::uniform(5.0, 2).unwrap();
        let h = DMatrix::from_row_slice(2, 2, &[100.0, 30.0, 30.0, 20.0]);
        let map = QuadraticMap::new(10.0, DVector::from_vec(vec![2.0, 4.0]), h.clone(), Some(b.clone())).unwrap();
        // K = -H⁻¹ gives KH = -I
        let k = -h.try_inverse().unwrap();
        let c = Controller::Aw(AwController::new(k, DMatrix::identity(2, 2) * 2.0, b).unwrap());
        SimConfig::new(scenario, map, dither(a), c, DVector::from_vec(theta0.to_vec()), t_end)
    }

    fn gs_cfg(scenario: Scenario, theta0: [f64; 2], t_end: f64) -> SimConfig {
        let h = -DMatrix::<f64>::identity(2, 2) * 2.0;
        let map = QuadraticMap::new(1.0, DVector::from_vec(vec![0.5, -0.5]), h, None).unwrap();
        let c = Controller::GradSat(
            GradSatController::new(
                DMatrix::identity(2, 2) * 0.5,
                SaturationBounds::uniform(0.3, 2).unwrap(),
            )
            .unwrap(),
        );
        SimConfig::new(scenario, map, dither(0.1), c, DVector::from_vec(theta0.to_vec()), t_end)
    }

    #[test]
    fn equilibrium_without_dither_amplitude() {
        // M Q* grows like 1/a, so the limit is taken on a map with Q* = 0
        let mut cfg = aw_cfg(Scenario::InputSaturation, [2.0, 4.0], 1e-6, 1.0);
        cfg.map = QuadraticMap::new(
            0.0,
            cfg.map.theta_star().clone(),
            cfg.map.hessian().clone(),
            cfg.map.input_bounds().cloned(),
        )
        .unwrap();
        let tr = simulate(&cfg).unwrap();
        let k = tr.len() - 1;
        assert!((tr.theta.row(k).transpose() - DVector::from_vec(vec![2.0, 4.0])).norm() < 1e-5);
        assert!(tr.y[k].abs() < 1e-9);
    }

    #[test]
    fn average_aw_rests_at_the_optimum() {
        let tr = simulate(&aw_cfg(Scenario::AverageAw, [2.0, 4.0], 0.1, 1.0)).unwrap();
        assert!(tr.theta_tilde.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn average_aw_linear_region_matches_exponential() {
        // inside the linear region with KH = -I: θ̃(t) = θ̃(0) e^{-t}
        let tr = simulate(&aw_cfg(Scenario::AverageAw, [2.5, 4.5], 0.1, 2.0)).unwrap();
        let k = tr.len() - 1;
        let expect = DVector::from_vec(vec![0.5, 0.5]) * (-tr.times[k]).exp();
        assert!((tr.theta_tilde.row(k).transpose() - expect).norm() < 1e-10);
    }

    #[test]
    fn theta_tilde_is_offset_of_estimate() {
        let tr = simulate(&aw_cfg(Scenario::InputSaturation, [2.5, 6.0], 0.1, 0.5)).unwrap();
        let cfg = aw_cfg(Scenario::InputSaturation, [2.5, 6.0], 0.1, 0.5);
        for k in (0..tr.len()).step_by(97) {
            let s = cfg.dither.probing(tr.times[k]);
            let hat = tr.theta.row(k).transpose() - s;
            let tt = tr.theta_tilde.row(k).transpose();
            assert!((hat - DVector::from_vec(vec![2.0, 4.0]) - tt).norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_rate_respects_bounds() {
        let tr = simulate(&gs_cfg(Scenario::GradientSaturation, [2.0, 1.0], 2.0)).unwrap();
        assert!(tr.u.iter().all(|v| v.abs() <= 0.3));
    }

    #[test]
    fn average_gradsat_at_rest_and_region_check() {
        let tr = simulate(&gs_cfg(Scenario::AverageGradSat, [0.5, -0.5], 1.0)).unwrap();
        assert!(tr.g_hat.iter().all(|v| *v == 0.0));
        let err =
            simulate(&gs_cfg(Scenario::AverageGradSat, [5.0, 5.0], 1.0).with_lyapunov(DMatrix::identity(2, 2), true));
        assert!(matches!(err, Err(EscError::OutsideRegion { .. })));
    }

    #[test]
    fn runs_are_bitwise_repeatable() {
        let cfg = aw_cfg(Scenario::InputSaturation, [2.5, 6.0], 0.1, 0.3);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_halving_shows_fourth_order() {
        let base = aw_cfg(Scenario::AverageAw, [2.5, 4.5], 0.1, 1.0);
        let end = |dt: f64| {
            let tr = simulate(&base.clone().with_dt(dt)).unwrap();
            tr.theta_tilde.row(tr.len() - 1).transpose()
        };
        let dt = base.dither.period() / 200.0;
        let (e1, e2, e4) = (end(dt), end(dt / 2.0), end(dt / 4.0));
        let r = (&e1 - &e2).norm() / (&e2 - &e4).norm();
        assert!(r > 12.0, "ratio {r}");
    }

    #[test]
    fn blow_up_is_reported() {
        let mut cfg = aw_cfg(Scenario::AverageAw, [2.5, 4.5], 0.1, 50.0);
        if let Controller::Aw(c) = &mut cfg.controller {
            c.k = -c.k.clone();
            c.k_aw = -c.k_aw.clone();
        }
        assert!(matches!(simulate(&cfg), Err(EscError::BlowUp { .. })));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let cfg = aw_cfg(Scenario::InputSaturation, [2.5, 6.0], 0.1, 1.0);
        let coarse = cfg.dither.period() / 100.0;
        assert!(simulate(&cfg.clone().with_dt(coarse)).is_err());
        assert!(simulate(&cfg.clone().with_scenario(Scenario::GradientSaturation)).is_err());
        assert!(simulate_average_aw(&cfg).is_err());
    }

    #[test]
    fn csv_stride_keeps_every_nth_row() {
        let tr = simulate(&aw_cfg(Scenario::AverageAw, [2.5, 4.5], 0.1, 0.2)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, 10).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,theta_1,theta_2,y,u_1,u_2,ghat_1,ghat_2");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), tr.len().div_ceil(10));
        let t10: f64 = rows[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(t10, tr.times[10]);
    }
}
