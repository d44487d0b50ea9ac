//! Circle arithmetic shared by every stage: the mod-1 map, the wrap-around
//! metric, the embedding of `[0, 1)` onto the unit circle and back, and the
//! centered-modulo folding used by self-reset ADCs.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for unit-modulus checks.
pub const UNIT_TOL: f64 = 1e-12;

/// Tolerance accepted when wrapping externally supplied complex values.
const SIGNAL_TOL: f64 = 1e-9;

const TWO_PI: f64 = 2.0 * PI;

/// A real number in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mod1Value(f64);

impl Mod1Value {
    pub const ZERO: Mod1Value = Mod1Value(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..1.0).contains(&value) {
            Ok(Mod1Value(value))
        } else {
            Err(Error::invalid(format!("{value} is not in [0, 1)")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Mod1Value {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Mod1Value::new(value)
    }
}

impl From<Mod1Value> for f64 {
    fn from(v: Mod1Value) -> f64 {
        v.0
    }
}

impl fmt::Display for Mod1Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A complex number of unit modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitComplex(Complex64);

impl UnitComplex {
    pub const ONE: UnitComplex = UnitComplex(Complex64 { re: 1.0, im: 0.0 });

    /// Wraps `re + ι im`, which must already have unit modulus.
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let w = Complex64::new(re, im);
        if !(re.is_finite() && im.is_finite()) || (w.norm_sqr() - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("{w} does not have unit modulus")));
        }
        Ok(UnitComplex(w))
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.0.re
    }

    #[inline]
    pub fn im(self) -> f64 {
        self.0.im
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }
}

impl From<UnitComplex> for Complex64 {
    fn from(u: UnitComplex) -> Complex64 {
        u.0
    }
}

/// Fractional part `t - floor(t)`, always in `[0, 1)`.
pub fn mod1(t: f64) -> Result<Mod1Value> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("mod1 of non-finite value {t}")));
    }
    Ok(Mod1Value(frac(t)))
}

/// Unchecked fractional part for internal use on values known to be finite.
#[inline]
pub(crate) fn frac(t: f64) -> f64 {
    let r = t - t.floor();
    // tiny negative inputs round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Wrap-around distance on `[0, 1)`, with values in `[0, 1/2]`.
///
/// This is `min(|a - b|, 1 - |a - b|)`. Some texts print the formula with
/// `max`, which cannot have `[0, 1/2]` as its range; the standard metric is
/// the one implemented here.
pub fn wrap_distance(a: Mod1Value, b: Mod1Value) -> f64 {
    wrap_distance_raw(a.0, b.0)
}

#[inline]
pub(crate) fn wrap_distance_raw(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    diff.min(1.0 - diff)
}

/// `y ↦ exp(ι 2π y)`.
pub fn circle_embed(y: Mod1Value) -> UnitComplex {
    UnitComplex(embed_raw(y.0))
}

#[inline]
pub(crate) fn embed_raw(y: f64) -> Complex64 {
    let (s, c) = (TWO_PI * y).sin_cos();
    Complex64::new(c, s)
}

/// `arg(u) / 2π` with `arg` taken on the branch `[0, 2π)`.
pub fn circle_arg(u: UnitComplex) -> Mod1Value {
    Mod1Value(arg_raw(u.0))
}

/// Angle of any nonzero complex number, scaled to `[0, 1)`.
#[inline]
pub(crate) fn arg_raw(w: Complex64) -> f64 {
    let mut a = w.im.atan2(w.re);
    if a < 0.0 {
        a += TWO_PI;
    }
    if a >= TWO_PI - 1e-15 {
        a = 0.0;
    }
    let v = a / TWO_PI;
    if v >= 1.0 {
        0.0
    } else {
        v
    }
}

/// Metric projection onto the unit circle; the origin maps to `1`.
pub fn project_to_circle(w: Complex64) -> UnitComplex {
    UnitComplex(project_raw(w))
}

#[inline]
pub(crate) fn project_raw(w: Complex64) -> Complex64 {
    let r = w.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        w / r
    }
}

/// Chord length `2 sin(π d_w)` between two circle points at wrap distance `dw`.
pub fn chord_from_wrap(dw: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&dw) {
        return Err(Error::invalid(format!("wrap distance {dw} outside [0, 1/2]")));
    }
    Ok(2.0 * (PI * dw).sin())
}

/// Upper bound `eps / 4` on the wrap distance between the arguments of two
/// unit complex numbers whose chord distance is at most `eps`.
pub fn wrap_bound_from_chord(eps: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(Error::invalid(format!("chord distance {eps} outside [0, 2]")));
    }
    Ok(eps / 4.0)
}

/// Centered modulo `w_γ(t) = 2γ([t/2γ + 1/2] - 1/2)`, valued in `[-γ, γ)`.
pub fn centered_wrap(t: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("threshold gamma = {gamma} must be positive")));
    }
    if !t.is_finite() {
        return Err(Error::invalid(format!("non-finite input {t}")));
    }
    let two_gamma = 2.0 * gamma;
    Ok(two_gamma * (frac(t / two_gamma + 0.5) - 0.5))
}

/// The jump map `[0, 1) → [-1/2, 1/2)` linking mod-1 values to centered folding.
pub fn h_map(x: Mod1Value) -> f64 {
    if x.0 < 0.5 {
        x.0
    } else {
        x.0 - 1.0
    }
}

/// Inverse of [`h_map`].
pub fn h_inv(x: f64) -> Result<Mod1Value> {
    if !(-0.5..0.5).contains(&x) {
        return Err(Error::invalid(format!("{x} outside [-1/2, 1/2)")));
    }
    let v = if x < 0.0 { x + 1.0 } else { x };
    // x + 1 can round to exactly 1.0 for tiny negative x
    Ok(Mod1Value(if v >= 1.0 { 0.0 } else { v }))
}

/// A point of the torus `𝕋ₙ`: `n` unit complex numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CircleSignal(Vec<Complex64>);

impl CircleSignal {
    /// Wraps values that must have unit modulus (to within `1e-9`).
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        for (i, w) in values.iter().enumerate() {
            if !(w.re.is_finite() && w.im.is_finite()) || (w.norm() - 1.0).abs() > SIGNAL_TOL {
                return Err(Error::invalid(format!(
                    "entry {i} = {w} is not on the unit circle"
                )));
            }
        }
        Ok(CircleSignal(values))
    }

    /// Componentwise projection of arbitrary complex values onto the torus.
    pub fn project(values: &[Complex64]) -> Self {
        CircleSignal(values.iter().map(|&w| project_raw(w)).collect())
    }

    pub fn from_mod1(values: &[Mod1Value]) -> Self {
        CircleSignal(values.iter().map(|y| embed_raw(y.0)).collect())
    }

    /// `exp(ι θ_i)` for angles given in radians.
    pub fn from_angles(angles: &[f64]) -> Self {
        CircleSignal(
            angles
                .iter()
                .map(|&t| {
                    let (s, c) = t.sin_cos();
                    Complex64::new(c, s)
                })
                .collect(),
        )
    }

    pub fn to_mod1(&self) -> Vec<Mod1Value> {
        self.0.iter().map(|&w| Mod1Value(arg_raw(w))).collect()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}
