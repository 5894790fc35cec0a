//! Log-sum-exp and softmax evaluation algorithms.
//!
//! Four variants are provided, each runnable in any [`ArithmeticContext`]:
//!
//! * [`lse_softmax_basic`]: exponentiate, sum, take the log, divide.
//! * [`lse_softmax_shifted`]: shift by the maximum entry so every exponent
//!   is nonpositive, sum the terms other than the pivot, use `log1p`.
//! * [`softmax_alt`]: the division-free form `exp(x_j - y)` fed by either
//!   of the two log-sum-exp results.
//!
//! Sums are accumulated left to right in index order with no compensation.
//! Numerical pathologies are not errors: they propagate with IEEE semantics
//! and are recorded in [`Flags`].

use std::fmt;
use std::ops::{BitOr, BitOrAssign};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::precision::{round_to_format, ArithmeticContext, FloatFormat};

/// A nonempty vector of finite inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector(Vec<f64>);

impl InputVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index, value });
        }
        Ok(Self(values))
    }

    /// Round every entry to `fmt`. Fails if an entry overflows the format.
    pub fn rounded_to(&self, fmt: &FloatFormat) -> Result<Self> {
        Self::new(self.0.iter().map(|&v| round_to_format(v, fmt)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First index attaining the maximum.
    pub fn argmax(&self) -> usize {
        let mut k = 0;
        for (i, &v) in self.0.iter().enumerate().skip(1) {
            if v > self.0[k] {
                k = i;
            }
        }
        k
    }

    pub fn x_max(&self) -> f64 {
        self.0[self.argmax()]
    }

    pub fn x_min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl TryFrom<Vec<f64>> for InputVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl std::ops::Deref for InputVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Set of numerical events observed during one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Flags(u8);

impl Flags {
    pub const NONE: Flags = Flags(0);
    /// An exponential or the running sum overflowed from finite operands.
    pub const OVERFLOWED: Flags = Flags(1);
    /// y or some g_j is infinite.
    pub const PRODUCED_INF: Flags = Flags(1 << 1);
    /// y or some g_j is NaN.
    pub const PRODUCED_NAN: Flags = Flags(1 << 2);
    /// Every exponential underflowed and the sum is zero.
    pub const SUM_UNDERFLOWED_TO_ZERO: Flags = Flags(1 << 3);

    const NAMES: [(Flags, &'static str); 4] = [
        (Flags::OVERFLOWED, "overflowed"),
        (Flags::PRODUCED_INF, "produced_inf"),
        (Flags::PRODUCED_NAN, "produced_nan"),
        (Flags::SUM_UNDERFLOWED_TO_ZERO, "sum_underflowed_to_zero"),
    ];

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, other: Flags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: Flags) {
        self.0 |= other.0;
    }

    pub fn names(self) -> impl Iterator<Item = &'static str> {
        Self::NAMES
            .into_iter()
            .filter(move |(f, _)| self.contains(*f))
            .map(|(_, n)| n)
    }
}

impl BitOr for Flags {
    type Output = Flags;

    fn bitor(self, rhs: Flags) -> Flags {
        Flags(self.0 | rhs.0)
    }
}

impl BitOrAssign for Flags {
    fn bitor_assign(&mut self, rhs: Flags) {
        self.0 |= rhs.0;
    }
}

/// `|`-separated flag names; empty string for no flags.
impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.names().collect();
        f.write_str(&names.join("|"))
    }
}

impl FromStr for Flags {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut flags = Flags::NONE;
        for part in s.split('|').map(str::trim).filter(|p| !p.is_empty()) {
            let (flag, _) = Self::NAMES
                .iter()
                .find(|(_, n)| *n == part)
                .ok_or_else(|| Error::MalformedRecords(format!("unknown flag {part:?}")))?;
            flags |= *flag;
        }
        Ok(flags)
    }
}

impl Serialize for Flags {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.names())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Basic,
    Shifted,
    AltBasic,
    AltShifted,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Basic,
        Algorithm::Shifted,
        Algorithm::AltBasic,
        Algorithm::AltShifted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Basic => "basic",
            Algorithm::Shifted => "shifted",
            Algorithm::AltBasic => "alt-basic",
            Algorithm::AltShifted => "alt-shifted",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "basic" => Ok(Algorithm::Basic),
            "shifted" | "shift" => Ok(Algorithm::Shifted),
            "alt-basic" | "alt_basic" | "alt" => Ok(Algorithm::AltBasic),
            "alt-shifted" | "alt_shifted" | "altshift" => Ok(Algorithm::AltShifted),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Which log-sum-exp algorithm produced the `y` handed to [`softmax_alt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LseSource {
    Basic,
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub algorithm: Algorithm,
    pub y: f64,
    pub g: Vec<f64>,
    pub flags: Flags,
}

impl EvalResult {
    fn finish(algorithm: Algorithm, y: f64, g: Vec<f64>, mut flags: Flags) -> Self {
        let values = std::iter::once(y).chain(g.iter().copied());
        for v in values {
            if v.is_nan() {
                flags |= Flags::PRODUCED_NAN;
            } else if v.is_infinite() {
                flags |= Flags::PRODUCED_INF;
            }
        }
        Self { algorithm, y, g, flags }
    }
}

/// Unshifted evaluation: `s = sum exp(x_i)`, `y = log s`, `g_i = exp(x_i) / s`.
pub fn lse_softmax_basic(x: &InputVector, ctx: &ArithmeticContext) -> EvalResult {
    let mut flags = Flags::NONE;
    let w: Vec<f64> = x.iter().map(|&xi| ctx.exp(xi)).collect();
    if w.iter().any(|wi| wi.is_infinite()) {
        flags |= Flags::OVERFLOWED;
    }
    let s = w.iter().fold(0.0, |s, &wi| ctx.add(s, wi));
    if s.is_infinite() {
        flags |= Flags::OVERFLOWED;
    }
    if s == 0.0 {
        flags |= Flags::SUM_UNDERFLOWED_TO_ZERO;
    }
    let y = ctx.ln(s);
    let g = w.iter().map(|&wi| ctx.div(wi, s)).collect();
    EvalResult::finish(Algorithm::Basic, y, g, flags)
}

/// Shifted evaluation with `a = x_k = max x_i`:
/// `s = sum_{i != k} exp(x_i - a)`, `y = a + log1p(s)`, `g_i = exp(x_i - a) / (1 + s)`.
pub fn lse_softmax_shifted(x: &InputVector, ctx: &ArithmeticContext) -> EvalResult {
    let mut flags = Flags::NONE;
    let k = x.argmax();
    let a = x[k];
    let w: Vec<f64> = x.iter().map(|&xi| ctx.exp(ctx.sub(xi, a))).collect();
    if w.iter().any(|wi| wi.is_infinite()) {
        flags |= Flags::OVERFLOWED;
    }
    let s = w
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .fold(0.0, |s, (_, &wi)| ctx.add(s, wi));
    if s.is_infinite() {
        flags |= Flags::OVERFLOWED;
    }
    let y = ctx.add(a, ctx.ln_1p(s));
    let denom = ctx.add(1.0, s);
    let g = w.iter().map(|&wi| ctx.div(wi, denom)).collect();
    EvalResult::finish(Algorithm::Shifted, y, g, flags)
}

/// Division-free softmax `g_j = exp(x_j - y)` from a precomputed log-sum-exp.
///
/// The returned result carries `y` unchanged.
pub fn softmax_alt(x: &InputVector, y: f64, source: LseSource, ctx: &ArithmeticContext) -> EvalResult {
    let algorithm = match source {
        LseSource::Basic => Algorithm::AltBasic,
        LseSource::Shifted => Algorithm::AltShifted,
    };
    let mut flags = Flags::NONE;
    let g: Vec<f64> = x.iter().map(|&xj| ctx.exp(ctx.sub(xj, y))).collect();
    if y.is_finite() && g.iter().any(|v| v.is_infinite()) {
        flags |= Flags::OVERFLOWED;
    }
    EvalResult::finish(algorithm, y, g, flags)
}

/// Run one of the four algorithms end to end.
///
/// The alternative variants first compute `y` with the matching log-sum-exp
/// algorithm in the same context; flags from that step carry over.
pub fn evaluate(algorithm: Algorithm, x: &InputVector, ctx: &ArithmeticContext) -> EvalResult {
    match algorithm {
        Algorithm::Basic => lse_softmax_basic(x, ctx),
        Algorithm::Shifted => lse_softmax_shifted(x, ctx),
        Algorithm::AltBasic => {
            let lse = lse_softmax_basic(x, ctx);
            let mut r = softmax_alt(x, lse.y, LseSource::Basic, ctx);
            r.flags |= lse.flags;
            r
        }
        Algorithm::AltShifted => {
            let lse = lse_softmax_shifted(x, ctx);
            let mut r = softmax_alt(x, lse.y, LseSource::Shifted, ctx);
            r.flags |= lse.flags;
            r
        }
    }
}
