//! Probing and demodulation dithers.
//!
//! Frequencies are carried as exact rationals `ω'_i` scaled by a real base
//! frequency, so the common period of all dither components (and of every
//! product of two of them) is computed without floating point drift.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Zero};

use crate::error::{EscError, Result};

/// One combination that makes a multiplier inadmissible.
///
/// Indices are zero based and refer to positions in the multiplier list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exclusion {
    /// `ω'_i = ω'_j`
    Equal { j: usize },
    /// `ω'_i = (ω'_j + ω'_k) / 2`, with `j <= k`
    HalfSum { j: usize, k: usize },
    /// `ω'_i = ω'_j + 2 ω'_k`
    SumTwice { j: usize, k: usize },
    /// `ω'_i = ω'_k + ω'_l`, with `k <= l`
    Sum { k: usize, l: usize },
    /// `ω'_i = ω'_k - ω'_l`
    Difference { k: usize, l: usize },
}

/// A violated exclusion for multiplier `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Violation {
    pub target: usize,
    pub exclusion: Exclusion,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = self.target + 1;
        match self.exclusion {
            Exclusion::Equal { j } => write!(f, "w'{i} = w'{}", j + 1),
            Exclusion::HalfSum { j, k } => write!(f, "w'{i} = (w'{} + w'{})/2", j + 1, k + 1),
            Exclusion::SumTwice { j, k } => write!(f, "w'{i} = w'{} + 2 w'{}", j + 1, k + 1),
            Exclusion::Sum { k, l } => write!(f, "w'{i} = w'{} + w'{}", k + 1, l + 1),
            Exclusion::Difference { k, l } => write!(f, "w'{i} = w'{} - w'{}", k + 1, l + 1),
        }
    }
}

/// Result of checking a multiplier set against the frequency exclusions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admissibility {
    pub violations: Vec<Violation>,
}

impl Admissibility {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn overflow(a: &Rational64, b: &Rational64) -> EscError {
    EscError::RationalOverflow(a.to_string(), b.to_string())
}

/// Checks every exclusion combination for every multiplier.
///
/// A tuple whose indices all coincide with the target is skipped: read
/// literally it would reject every multiplier (`ω'_i = ω'_i`).
pub fn validate_frequencies(multipliers: &[Rational64]) -> Result<Admissibility> {
    if multipliers.is_empty() {
        return Err(EscError::InvalidArgument("no dither multipliers given".into()));
    }
    if let Some(bad) = multipliers.iter().find(|w| **w <= Rational64::zero()) {
        return Err(EscError::InvalidArgument(format!(
            "dither multiplier {bad} is not positive"
        )));
    }
    let n = multipliers.len();
    let w = multipliers;
    let two = Rational64::from_integer(2);
    let mut violations = Vec::new();
    let mut push = |target, exclusion| violations.push(Violation { target, exclusion });

    for i in 0..n {
        for j in 0..n {
            if j != i && w[i] == w[j] {
                push(i, Exclusion::Equal { j });
            }
            for k in 0..n {
                let trivial = i == j && j == k;
                if trivial {
                    continue;
                }
                if j <= k {
                    let sum = w[j].checked_add(&w[k]).ok_or_else(|| overflow(&w[j], &w[k]))?;
                    let lhs = w[i].checked_mul(&two).ok_or_else(|| overflow(&w[i], &two))?;
                    if lhs == sum {
                        push(i, Exclusion::HalfSum { j, k });
                    }
                }
                let twice = w[k].checked_mul(&two).ok_or_else(|| overflow(&w[k], &two))?;
                let rhs = w[j].checked_add(&twice).ok_or_else(|| overflow(&w[j], &w[k]))?;
                if w[i] == rhs {
                    push(i, Exclusion::SumTwice { j, k });
                }
            }
        }
        for k in 0..n {
            for l in 0..n {
                if i == k && k == l {
                    continue;
                }
                if k <= l {
                    let s = w[k].checked_add(&w[l]).ok_or_else(|| overflow(&w[k], &w[l]))?;
                    if w[i] == s {
                        push(i, Exclusion::Sum { k, l });
                    }
                }
                if k != l {
                    let d = w[k].checked_sub(&w[l]).ok_or_else(|| overflow(&w[k], &w[l]))?;
                    if w[i] == d {
                        push(i, Exclusion::Difference { k, l });
                    }
                }
            }
        }
    }
    Ok(Admissibility { violations })
}

/// Exact least common multiple of `1/ω'_i`, i.e. the common period in units
/// of `1/base_omega` radians.
pub fn reciprocal_lcm(multipliers: &[Rational64]) -> Result<Rational64> {
    let mut acc: Option<Rational64> = None;
    for w in multipliers {
        if *w <= Rational64::zero() {
            return Err(EscError::InvalidArgument(format!(
                "dither multiplier {w} is not positive"
            )));
        }
        let r = w.recip();
        acc = Some(match acc {
            None => r,
            Some(a) => {
                // lcm(p/q, r/s) = lcm(p, r) / gcd(q, s) for reduced fractions
                let g = a.numer().gcd(r.numer());
                let num = (a.numer() / g)
                    .checked_mul(*r.numer())
                    .ok_or_else(|| overflow(&a, &r))?;
                let den = a.denom().gcd(r.denom());
                Rational64::new(num, den)
            }
        });
    }
    acc.ok_or_else(|| EscError::InvalidArgument("no dither multipliers given".into()))
}

/// `T = 2π · LCM{1/ω_i}` with `ω_i = ω'_i · base_omega`.
pub fn common_period(multipliers: &[Rational64], base_omega: f64) -> Result<f64> {
    if !(base_omega > 0.0 && base_omega.is_finite()) {
        return Err(EscError::InvalidArgument(format!(
            "base frequency must be positive, got {base_omega}"
        )));
    }
    let l = reciprocal_lcm(multipliers)?;
    Ok(2.0 * PI * (*l.numer() as f64) / (*l.denom() as f64) / base_omega)
}

/// Parses a multiplier written as an integer, a fraction `p/q`, or a finite
/// decimal such as `1.25`.
pub fn parse_rational(text: &str) -> Result<Rational64> {
    let s = text.trim();
    let bad = || EscError::InvalidArgument(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac_part: i64 = frac.parse().map_err(|_| bad())?;
        let mag = int_part
            .abs()
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac_part))
            .ok_or_else(bad)?;
        return Ok(Rational64::new(if negative { -mag } else { mag }, scale));
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}

/// Dither amplitudes and frequencies with their common period.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherSpec {
    amplitudes: Vec<f64>,
    multipliers: Vec<Rational64>,
    base_omega: f64,
    period: f64,
    frequencies: Vec<f64>,
}

impl DitherSpec {
    /// Builds a dither set. Admissibility of the multipliers is not enforced
    /// here; see [`DitherSpec::admissibility`].
    pub fn new(amplitudes: Vec<f64>, multipliers: Vec<Rational64>, base_omega: f64) -> Result<Self> {
        if amplitudes.len() != multipliers.len() {
            return Err(EscError::Dimension(format!(
                "{} amplitudes for {} multipliers",
                amplitudes.len(),
                multipliers.len()
            )));
        }
        if let Some(a) = amplitudes.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(EscError::InvalidArgument(format!(
                "dither amplitude {a} is not positive"
            )));
        }
        let period = common_period(&multipliers, base_omega)?;
        let frequencies = multipliers
            .iter()
            .map(|w| (*w.numer() as f64) / (*w.denom() as f64) * base_omega)
            .collect();
        Ok(Self {
            amplitudes,
            multipliers,
            base_omega,
            period,
            frequencies,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn multipliers(&self) -> &[Rational64] {
        &self.multipliers
    }

    pub fn base_omega(&self) -> f64 {
        self.base_omega
    }

    /// Common period `T` in seconds.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// `2π / T`, the frequency used for the averaging time scale.
    pub fn averaging_omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Angular frequencies `ω_i` in rad/s.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Euclidean norm of the amplitude vector.
    pub fn amplitude_norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn admissibility(&self) -> Result<Admissibility> {
        validate_frequencies(&self.multipliers)
    }

    /// Same multipliers with every frequency scaled by `factor`.
    pub fn with_frequency_scale(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.amplitudes.clone(),
            self.multipliers.clone(),
            self.base_omega * factor,
        )
    }

    /// Same frequencies with every amplitude scaled by `factor`.
    pub fn with_amplitude_scale(&self, factor: f64) -> Result<Self> {
        let amplitudes = self.amplitudes.iter().map(|a| a * factor).collect();
        Self::new(amplitudes, self.multipliers.clone(), self.base_omega)
    }

    /// Probing signal `S_i(t) = a_i sin(ω_i t)`.
    pub fn probing(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.amplitudes
                .iter()
                .zip(&self.frequencies)
                .map(|(a, w)| a * (w * t).sin()),
        )
    }

    /// Demodulation signal `M_i(t) = (2/a_i) sin(ω_i t)`.
    pub fn demodulation(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.amplitudes
                .iter()
                .zip(&self.frequencies)
                .map(|(a, w)| 2.0 / a * (w * t).sin()),
        )
    }

    /// Time derivative of [`DitherSpec::probing`].
    pub fn probing_rate(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.amplitudes
                .iter()
                .zip(&self.frequencies)
                .map(|(a, w)| a * w * (w * t).cos()),
        )
    }

    /// Time derivative of [`DitherSpec::demodulation`].
    pub fn demodulation_rate(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.amplitudes
                .iter()
                .zip(&self.frequencies)
                .map(|(a, w)| 2.0 / a * w * (w * t).cos()),
        )
    }
}
