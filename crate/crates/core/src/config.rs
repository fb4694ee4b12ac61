//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! [map]
//! q_star = 10
//! theta_star = 2, 4
//! nominal = 100, 30; 30, 20
//! ```
//!
//! Vectors are comma-separated; matrix rows are separated by `;`. A
//! [`Document`] keeps the raw text entries with their positions, and
//! [`ExperimentConfig`] is the typed view with unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;

use crate::error::{EscError, Result};
use crate::plant::{QuadraticMap, SaturationBounds};
use crate::polytope::HessianPolytope;
use crate::signals::{parse_rational, DitherSpec};
use crate::sim::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// Column of the first character of the value.
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_owned(),
            line: 0,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.push(Entry {
            key: key.to_owned(),
            value: value.to_string(),
            line: 0,
            column: 0,
        });
    }
}

/// Sections of `key = value` entries in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> EscError {
    EscError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, indent + trimmed.len(), "missing ']'"))?
                    .trim();
                if !is_identifier(name) {
                    return Err(parse_err(line, indent + 2, format!("bad section name '{name}'")));
                }
                doc.sections.push(Section {
                    name: name.to_owned(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let eq = content
                .find('=')
                .ok_or_else(|| parse_err(line, indent + 1, "expected 'key = value'"))?;
            let key = content[..eq].trim();
            if !is_identifier(key) {
                return Err(parse_err(line, indent + 1, format!("bad key '{key}'")));
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let column = eq + 2 + (after.len() - after.trim_start().len());
            let section = doc
                .sections
                .last_mut()
                .ok_or_else(|| parse_err(line, indent + 1, "entry outside of any section"))?;
            section.entries.push(Entry {
                key: key.to_owned(),
                value: value.to_owned(),
                line,
                column,
            });
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "[{}]", s.name)?;
            for e in &s.entries {
                writeln!(f, "{} = {}", e.key, e.value)?;
            }
        }
        Ok(())
    }
}

/// Typed access to one section's entries; tracks which keys were consumed.
pub struct Reader<'a> {
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Reader<'a> {
    pub fn new(section: &'a Section) -> Self {
        Self {
            section,
            used: vec![false; section.entries.len()],
        }
    }

    fn find(&mut self, key: &str) -> Result<Option<&'a Entry>> {
        let mut hit = None;
        for (i, e) in self.section.entries.iter().enumerate() {
            if e.key == key {
                if hit.is_some() {
                    return Err(parse_err(e.line, 1, format!("duplicate key '{key}'")));
                }
                self.used[i] = true;
                hit = Some(e);
            }
        }
        Ok(hit)
    }

    fn all(&mut self, key: &str) -> Vec<&'a Entry> {
        let mut out = Vec::new();
        for (i, e) in self.section.entries.iter().enumerate() {
            if e.key == key {
                self.used[i] = true;
                out.push(e);
            }
        }
        out
    }

    fn missing(&self, key: &str) -> EscError {
        parse_err(
            self.section.line,
            1,
            format!("section [{}] needs '{key}'", self.section.name),
        )
    }

    pub fn opt<T>(&mut self, key: &str, conv: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.find(key)? {
            None => Ok(None),
            Some(e) => conv(&e.value)
                .map(Some)
                .map_err(|m| parse_err(e.line, e.column, format!("{key}: {m}"))),
        }
    }

    pub fn req<T>(&mut self, key: &str, conv: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        self.opt(key, conv)?.ok_or_else(|| self.missing(key))
    }

    pub fn many<T>(&mut self, key: &str, conv: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
        self.all(key)
            .into_iter()
            .map(|e| conv(&e.value).map_err(|m| parse_err(e.line, e.column, format!("{key}: {m}"))))
            .collect()
    }

    /// Errors on the first entry no accessor asked for.
    pub fn finish(self) -> Result<()> {
        for (e, used) in self.section.entries.iter().zip(&self.used) {
            if !used {
                return Err(parse_err(
                    e.line,
                    1,
                    format!("unknown key '{}' in [{}]", e.key, self.section.name),
                ));
            }
        }
        Ok(())
    }
}

pub fn scalar(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{}' is not finite", s.trim()))
    }
}

pub fn vector(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(scalar).collect()
}

pub fn matrix(s: &str) -> std::result::Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = s.split(';').map(vector).collect::<std::result::Result<_, _>>()?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err("matrix rows differ in length".into());
    }
    let flat: Vec<f64> = rows.concat();
    Ok(DMatrix::from_row_slice(rows.len(), cols, &flat))
}

pub fn rationals(s: &str) -> std::result::Result<Vec<Rational64>, String> {
    s.split(',')
        .map(|p| parse_rational(p.trim()).map_err(|e| e.to_string()))
        .collect()
}

pub fn boolean(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

pub fn count(s: &str) -> std::result::Result<usize, String> {
    s.trim().parse().map_err(|_| format!("'{}' is not a count", s.trim()))
}

pub fn text(s: &str) -> std::result::Result<String, String> {
    Ok(s.trim().to_owned())
}

pub fn fmt_vector(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn fmt_matrix(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| fmt_vector(&m.row(i).iter().copied().collect::<Vec<_>>()))
        .collect::<Vec<_>>()
        .join("; ")
}

fn fmt_rationals(v: &[Rational64]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum HessianSource {
    /// A single known Hessian.
    Direct(DMatrix<f64>),
    /// Explicit polytope vertices.
    Vertices(Vec<DMatrix<f64>>),
    /// `{(1 - δ̄)H₀, (1 + δ̄)H₀}`.
    Scaled { nominal: DMatrix<f64>, delta_bar: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSection {
    pub q_star: f64,
    pub theta_star: Vec<f64>,
    pub hessian: HessianSource,
    /// Mixture weights selecting the plant's Hessian; uniform when absent.
    pub alpha: Option<Vec<f64>>,
    pub input_bounds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DitherSection {
    pub amplitudes: Vec<f64>,
    pub multipliers: Vec<Rational64>,
    pub base_omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerMode {
    /// Gains given in the config.
    Explicit,
    /// Gains synthesized from the [synthesis] section at run time.
    Designed,
    /// Gains read from a design file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSection {
    pub mode: ControllerMode,
    pub k: Option<DMatrix<f64>>,
    pub k_aw: Option<DMatrix<f64>>,
    /// Update-rate limits `ū` of the gradient-saturation law.
    pub rate_bounds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisKind {
    AntiWindup,
    GradientSaturation,
}

impl SynthesisKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthesisKind::AntiWindup => "anti-windup",
            SynthesisKind::GradientSaturation => "gradient-saturation",
        }
    }

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "anti-windup" => Ok(SynthesisKind::AntiWindup),
            "gradient-saturation" => Ok(SynthesisKind::GradientSaturation),
            other => Err(format!("unknown synthesis kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSection {
    pub kind: SynthesisKind,
    pub eta: f64,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub scenario: Scenario,
    pub theta0: Vec<f64>,
    pub t_end: f64,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub stride: usize,
    pub plot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            stride: 1,
            plot: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    OmegaScale,
    Amplitude,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::OmegaScale => "omega-scale",
            SweepParameter::Amplitude => "amplitude",
        }
    }

    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "omega-scale" => Ok(SweepParameter::OmegaScale),
            "amplitude" => Ok(SweepParameter::Amplitude),
            other => Err(format!("unknown sweep parameter '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSection {
    pub c_theta: f64,
    pub c_y: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            c_theta: 10.0,
            c_y: 100.0,
        }
    }
}

const SECTIONS: [&str; 8] = [
    "map",
    "dither",
    "controller",
    "synthesis",
    "sim",
    "outputs",
    "sweep",
    "analysis",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub map: MapSection,
    pub dither: DitherSection,
    pub controller: ControllerSection,
    pub synthesis: Option<SynthesisSection>,
    pub sim: SimSection,
    pub outputs: OutputSection,
    pub sweep: Option<SweepSection>,
    pub analysis: AnalysisSection,
}

fn check_len(what: &str, got: usize, n: usize, line: usize) -> Result<()> {
    if got != n {
        return Err(parse_err(line, 1, format!("{what} has length {got}, expected {n}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(&Document::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        // relative file references are resolved against the config's folder
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        if let ControllerMode::File(p) = &cfg.controller.mode {
            if p.is_relative() {
                cfg.controller.mode = ControllerMode::File(base.join(p));
            }
        }
        if let Some(d) = &cfg.outputs.dir {
            if d.is_relative() {
                cfg.outputs.dir = Some(base.join(d));
            }
        }
        Ok(cfg)
    }

    pub fn from_document(doc: &Document) -> Result<Self> {
        for (i, s) in doc.sections.iter().enumerate() {
            if !SECTIONS.contains(&s.name.as_str()) {
                return Err(parse_err(s.line, 1, format!("unknown section [{}]", s.name)));
            }
            if doc.sections[..i].iter().any(|o| o.name == s.name) {
                return Err(parse_err(s.line, 1, format!("duplicate section [{}]", s.name)));
            }
        }
        let need = |name: &str| {
            doc.section(name)
                .ok_or_else(|| parse_err(1, 1, format!("missing section [{name}]")))
        };

        let sec = need("map")?;
        let mut r = Reader::new(sec);
        let q_star = r.req("q_star", scalar)?;
        let theta_star = r.req("theta_star", vector)?;
        let direct = r.opt("hessian", matrix)?;
        let vertices = r.many("vertex", matrix)?;
        let nominal = r.opt("nominal", matrix)?;
        let delta_bar = r.opt("delta_bar", scalar)?;
        let alpha = r.opt("alpha", vector)?;
        let input_bounds = r.opt("input_bounds", vector)?;
        r.finish()?;
        let hessian = match (direct, vertices.is_empty(), nominal, delta_bar) {
            (Some(h), true, None, None) => HessianSource::Direct(h),
            (None, false, None, None) => HessianSource::Vertices(vertices),
            (None, true, Some(nominal), Some(delta_bar)) => HessianSource::Scaled { nominal, delta_bar },
            _ => {
                return Err(parse_err(
                    sec.line,
                    1,
                    "[map] needs exactly one of 'hessian', 'vertex' lines, or 'nominal' with 'delta_bar'",
                ))
            }
        };
        let map = MapSection {
            q_star,
            theta_star,
            hessian,
            alpha,
            input_bounds,
        };
        let n = map.theta_star.len();

        let sec = need("dither")?;
        let mut r = Reader::new(sec);
        let dither = DitherSection {
            amplitudes: r.req("amplitudes", vector)?,
            multipliers: r.req("multipliers", rationals)?,
            base_omega: r.req("base_omega", scalar)?,
        };
        r.finish()?;
        check_len("amplitudes", dither.amplitudes.len(), n, sec.line)?;
        check_len("multipliers", dither.multipliers.len(), n, sec.line)?;

        let sec = need("controller")?;
        let mut r = Reader::new(sec);
        let mode = r.req("mode", text)?;
        let design = r.opt("design", text)?;
        let line = sec.line;
        let mode = match (mode.as_str(), design) {
            ("explicit", None) => ControllerMode::Explicit,
            ("designed", None) => ControllerMode::Designed,
            ("file", Some(p)) => ControllerMode::File(PathBuf::from(p)),
            ("file", None) => return Err(parse_err(line, 1, "mode 'file' needs 'design = PATH'")),
            (m @ ("explicit" | "designed"), Some(_)) => {
                return Err(parse_err(
                    line,
                    1,
                    format!("'design' is only used with mode 'file', not '{m}'"),
                ))
            }
            (other, _) => return Err(parse_err(line, 1, format!("unknown controller mode '{other}'"))),
        };
        let controller = ControllerSection {
            mode,
            k: r.opt("k", matrix)?,
            k_aw: r.opt("k_aw", matrix)?,
            rate_bounds: r.opt("rate_bounds", vector)?,
        };
        r.finish()?;
        if controller.mode == ControllerMode::Explicit && controller.k.is_none() {
            return Err(parse_err(line, 1, "mode 'explicit' needs 'k'"));
        }

        let synthesis = match doc.section("synthesis") {
            None => None,
            Some(sec) => {
                let mut r = Reader::new(sec);
                let s = SynthesisSection {
                    kind: r.req("kind", SynthesisKind::parse)?,
                    eta: r.req("eta", scalar)?,
                    epsilon: r.opt("epsilon", scalar)?,
                };
                r.finish()?;
                Some(s)
            }
        };

        let sec = need("sim")?;
        let mut r = Reader::new(sec);
        let sim = SimSection {
            scenario: r.req("scenario", |s| {
                Scenario::parse(s.trim()).ok_or_else(|| format!("unknown scenario '{}'", s.trim()))
            })?,
            theta0: r.req("theta0", vector)?,
            t_end: r.req("t_end", scalar)?,
            dt: r.opt("dt", scalar)?,
        };
        r.finish()?;
        check_len("theta0", sim.theta0.len(), n, sec.line)?;

        let outputs = match doc.section("outputs") {
            None => OutputSection::default(),
            Some(sec) => {
                let mut r = Reader::new(sec);
                let o = OutputSection {
                    dir: r.opt("dir", text)?.map(PathBuf::from),
                    stride: r.opt("stride", count)?.unwrap_or(1),
                    plot: r.opt("plot", boolean)?.unwrap_or(false),
                };
                r.finish()?;
                if o.stride == 0 {
                    return Err(parse_err(sec.line, 1, "stride must be at least 1"));
                }
                o
            }
        };

        let sweep = match doc.section("sweep") {
            None => None,
            Some(sec) => {
                let mut r = Reader::new(sec);
                let s = SweepSection {
                    parameter: r.req("parameter", SweepParameter::parse)?,
                    values: r.req("values", vector)?,
                };
                r.finish()?;
                Some(s)
            }
        };

        let analysis = match doc.section("analysis") {
            None => AnalysisSection::default(),
            Some(sec) => {
                let mut r = Reader::new(sec);
                let d = AnalysisSection::default();
                let a = AnalysisSection {
                    c_theta: r.opt("c_theta", scalar)?.unwrap_or(d.c_theta),
                    c_y: r.opt("c_y", scalar)?.unwrap_or(d.c_y),
                };
                r.finish()?;
                a
            }
        };

        let cfg = Self {
            map,
            dither,
            controller,
            synthesis,
            sim,
            outputs,
            sweep,
            analysis,
        };
        // surface semantic problems (sizes, symmetry, simplex) at load time
        cfg.polytope()?;
        cfg.quadratic_map()?;
        cfg.dither_spec()?;
        Ok(cfg)
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::default();
        let mut s = Section::new("map");
        s.push("q_star", self.map.q_star);
        s.push("theta_star", fmt_vector(&self.map.theta_star));
        match &self.map.hessian {
            HessianSource::Direct(h) => s.push("hessian", fmt_matrix(h)),
            HessianSource::Vertices(vs) => vs.iter().for_each(|v| s.push("vertex", fmt_matrix(v))),
            HessianSource::Scaled { nominal, delta_bar } => {
                s.push("nominal", fmt_matrix(nominal));
                s.push("delta_bar", delta_bar);
            }
        }
        if let Some(a) = &self.map.alpha {
            s.push("alpha", fmt_vector(a));
        }
        if let Some(b) = &self.map.input_bounds {
            s.push("input_bounds", fmt_vector(b));
        }
        doc.sections.push(s);

        let mut s = Section::new("dither");
        s.push("amplitudes", fmt_vector(&self.dither.amplitudes));
        s.push("multipliers", fmt_rationals(&self.dither.multipliers));
        s.push("base_omega", self.dither.base_omega);
        doc.sections.push(s);

        let mut s = Section::new("controller");
        match &self.controller.mode {
            ControllerMode::Explicit => s.push("mode", "explicit"),
            ControllerMode::Designed => s.push("mode", "designed"),
            ControllerMode::File(p) => {
                s.push("mode", "file");
                s.push("design", p.display());
            }
        }
        if let Some(k) = &self.controller.k {
            s.push("k", fmt_matrix(k));
        }
        if let Some(k) = &self.controller.k_aw {
            s.push("k_aw", fmt_matrix(k));
        }
        if let Some(b) = &self.controller.rate_bounds {
            s.push("rate_bounds", fmt_vector(b));
        }
        doc.sections.push(s);

        if let Some(syn) = &self.synthesis {
            let mut s = Section::new("synthesis");
            s.push("kind", syn.kind.name());
            s.push("eta", syn.eta);
            if let Some(e) = syn.epsilon {
                s.push("epsilon", e);
            }
            doc.sections.push(s);
        }

        let mut s = Section::new("sim");
        s.push("scenario", self.sim.scenario.name());
        s.push("theta0", fmt_vector(&self.sim.theta0));
        s.push("t_end", self.sim.t_end);
        if let Some(dt) = self.sim.dt {
            s.push("dt", dt);
        }
        doc.sections.push(s);

        let mut s = Section::new("outputs");
        if let Some(d) = &self.outputs.dir {
            s.push("dir", d.display());
        }
        s.push("stride", self.outputs.stride);
        s.push("plot", self.outputs.plot);
        doc.sections.push(s);

        if let Some(sw) = &self.sweep {
            let mut s = Section::new("sweep");
            s.push("parameter", sw.parameter.name());
            s.push("values", fmt_vector(&sw.values));
            doc.sections.push(s);
        }

        let mut s = Section::new("analysis");
        s.push("c_theta", self.analysis.c_theta);
        s.push("c_y", self.analysis.c_y);
        doc.sections.push(s);
        doc
    }

    pub fn dim(&self) -> usize {
        self.map.theta_star.len()
    }

    pub fn polytope(&self) -> Result<HessianPolytope> {
        match &self.map.hessian {
            HessianSource::Direct(h) => HessianPolytope::new(vec![h.clone()]),
            HessianSource::Vertices(vs) => HessianPolytope::new(vs.clone()),
            HessianSource::Scaled { nominal, delta_bar } => HessianPolytope::from_scaled_nominal(nominal, *delta_bar),
        }
    }

    /// The plant's Hessian: the mixture `Σ α_i H_i` (uniform weights when
    /// none are given).
    pub fn true_hessian(&self) -> Result<DMatrix<f64>> {
        let poly = self.polytope()?;
        let alpha = match &self.map.alpha {
            Some(a) => a.clone(),
            None => vec![1.0 / poly.len() as f64; poly.len()],
        };
        poly.evaluate(&alpha)
    }

    pub fn input_bounds(&self) -> Result<Option<SaturationBounds>> {
        self.map
            .input_bounds
            .as_ref()
            .map(|b| SaturationBounds::new(b.clone()))
            .transpose()
    }

    pub fn rate_bounds(&self) -> Result<Option<SaturationBounds>> {
        self.controller
            .rate_bounds
            .as_ref()
            .map(|b| SaturationBounds::new(b.clone()))
            .transpose()
    }

    pub fn quadratic_map(&self) -> Result<QuadraticMap> {
        QuadraticMap::new(
            self.map.q_star,
            DVector::from_vec(self.map.theta_star.clone()),
            self.true_hessian()?,
            self.input_bounds()?,
        )
    }

    pub fn dither_spec(&self) -> Result<DitherSpec> {
        DitherSpec::new(
            self.dither.amplitudes.clone(),
            self.dither.multipliers.clone(),
            self.dither.base_omega,
        )
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_document())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two-input example
[map]
q_star = 10
theta_star = 2, 4
nominal = 100, 30; 30, 20
delta_bar = 0.1
alpha = 0.6822, 0.3178
input_bounds = 5, 5

[dither]
amplitudes = 0.1, 0.1
multipliers = 1, 7
base_omega = 10

[controller]
mode = explicit
k = -0.0270, 0.0361; 0.0456, -0.1492   # printed gains
k_aw = 2.2794, 0.0824; -0.0865, 2.2804

[synthesis]
kind = anti-windup
eta = 1

[sim]
scenario = input-saturation
theta0 = 2.5, 6
t_end = 5
";

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.map.q_star, 10.0);
        assert_eq!(cfg.controller.k.as_ref().unwrap()[(1, 1)], -0.1492);
        assert_eq!(cfg.sim.scenario, Scenario::InputSaturation);
        let h = cfg.true_hessian().unwrap();
        let s = 0.6822 * 0.9 + 0.3178 * 1.1;
        assert!((h[(0, 0)] - 100.0 * s).abs() < 1e-12);
        assert_eq!(cfg.outputs.stride, 1);
    }

    #[test]
    fn round_trip_is_stable() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let text = cfg.to_string();
        let again = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_string());
    }

    #[test]
    fn unknown_key_reports_position() {
        let bad = SAMPLE.replace("base_omega = 10", "base_omega = 10\nspeed = 3");
        match ExperimentConfig::parse(&bad) {
            Err(EscError::Parse { line, column, message }) => {
                assert_eq!(line, 14);
                assert_eq!(column, 1);
                assert!(message.contains("speed"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_value_reports_value_column() {
        let bad = SAMPLE.replace("q_star = 10", "q_star = ten");
        match ExperimentConfig::parse(&bad) {
            Err(EscError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 10)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(Document::parse("x = 1"), Err(EscError::Parse { line: 1, .. })));
        assert!(matches!(
            Document::parse("[map\n"),
            Err(EscError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Document::parse("[map]\nnot a pair"),
            Err(EscError::Parse { line: 2, .. })
        ));
        let dup = SAMPLE.replace("eta = 1", "eta = 1\neta = 2");
        assert!(matches!(ExperimentConfig::parse(&dup), Err(EscError::Parse { .. })));
        let ragged = SAMPLE.replace("nominal = 100, 30; 30, 20", "nominal = 100, 30; 30");
        assert!(matches!(
            ExperimentConfig::parse(&ragged),
            Err(EscError::Parse { line: 5, .. })
        ));
        let extra = format!("{SAMPLE}\n[plots]\nx = 1\n");
        assert!(ExperimentConfig::parse(&extra).is_err());
    }

    #[test]
    fn vertex_lists_keep_order() {
        let text = SAMPLE.replace(
            "nominal = 100, 30; 30, 20\ndelta_bar = 0.1\nalpha = 0.6822, 0.3178",
            "vertex = 1, 0; 0, 1\nvertex = 2, 0; 0, 2\nvertex = 3, 0; 0, 3",
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let poly = cfg.polytope().unwrap();
        assert_eq!(poly.len(), 3);
        assert_eq!(poly.vertices()[2][(0, 0)], 3.0);
        // uniform mixture
        assert!((cfg.true_hessian().unwrap()[(0, 0)] - 2.0).abs() < 1e-15);
    }
}
