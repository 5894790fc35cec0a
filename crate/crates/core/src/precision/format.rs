use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest significand width accepted for custom formats.
///
/// Operate-then-round in binary64 (53 bits) is free of double-rounding
/// error for all four basic operations only when `53 >= 2t + 2`.
pub const MAX_CUSTOM_PRECISION: u32 = 25;

/// Which named format a [`FloatFormat`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatName {
    Fp16,
    Bfloat16,
    Fp32,
    Fp64,
    Custom,
}

impl FormatName {
    pub fn as_str(self) -> &'static str {
        match self {
            FormatName::Fp16 => "fp16",
            FormatName::Bfloat16 => "bfloat16",
            FormatName::Fp32 => "fp32",
            FormatName::Fp64 => "fp64",
            FormatName::Custom => "custom",
        }
    }
}

/// Parameters of a binary floating-point format.
///
/// A normalized value is `m * 2^(e - t + 1)` with `2^(t-1) <= m < 2^t` and
/// `emin <= e <= emax`. When subnormals are enabled, values below `2^emin`
/// are spaced by `2^(emin - t + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FloatFormat {
    pub name: FormatName,
    /// Significand bits including the implicit leading bit.
    pub precision_bits: u32,
    pub emin: i32,
    pub emax: i32,
    pub subnormals: bool,
}

/// `2^k` for `k` in the normal binary64 exponent range.
pub(crate) fn exp2i(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k), "exponent {k} out of range");
    f64::from_bits(((k + 1023) as u64) << 52)
}

impl FloatFormat {
    pub const fn fp16() -> Self {
        Self {
            name: FormatName::Fp16,
            precision_bits: 11,
            emin: -14,
            emax: 15,
            subnormals: true,
        }
    }

    /// bfloat16 with subnormals disabled, as in Intel's specification.
    pub const fn bfloat16() -> Self {
        Self {
            name: FormatName::Bfloat16,
            precision_bits: 8,
            emin: -126,
            emax: 127,
            subnormals: false,
        }
    }

    pub const fn fp32() -> Self {
        Self {
            name: FormatName::Fp32,
            precision_bits: 24,
            emin: -126,
            emax: 127,
            subnormals: true,
        }
    }

    pub const fn fp64() -> Self {
        Self {
            name: FormatName::Fp64,
            precision_bits: 53,
            emin: -1022,
            emax: 1023,
            subnormals: true,
        }
    }

    /// The four named formats in table order.
    pub fn named() -> [FloatFormat; 4] {
        [Self::bfloat16(), Self::fp16(), Self::fp32(), Self::fp64()]
    }

    pub fn custom(precision_bits: u32, emin: i32, emax: i32, subnormals: bool) -> Result<Self> {
        if precision_bits < 2 {
            return Err(Error::InvalidFormat(format!(
                "precision must be at least 2 bits, got {precision_bits}"
            )));
        }
        if precision_bits > MAX_CUSTOM_PRECISION {
            return Err(Error::InvalidFormat(format!(
                "precision above {MAX_CUSTOM_PRECISION} bits cannot be simulated exactly in binary64, got {precision_bits}"
            )));
        }
        if emin >= emax {
            return Err(Error::InvalidFormat(format!(
                "emin ({emin}) must be less than emax ({emax})"
            )));
        }
        if emax > 1023 || emin - (precision_bits as i32) < -1022 {
            return Err(Error::InvalidFormat(format!(
                "exponent range [{emin}, {emax}] does not fit inside binary64"
            )));
        }
        Ok(Self {
            name: FormatName::Custom,
            precision_bits,
            emin,
            emax,
            subnormals,
        })
    }

    /// Same format with the subnormal policy overridden.
    pub fn with_subnormals(mut self, enabled: bool) -> Self {
        self.subnormals = enabled;
        self
    }

    pub(crate) fn is_binary64(&self) -> bool {
        self.precision_bits == 53 && self.emin == -1022 && self.emax == 1023 && self.subnormals
    }

    /// u = 2^(-t).
    pub fn unit_roundoff(&self) -> f64 {
        exp2i(-(self.precision_bits as i32))
    }

    pub fn r_min(&self) -> f64 {
        exp2i(self.emin)
    }

    pub fn r_max(&self) -> f64 {
        exp2i(self.emax) * (2.0 - exp2i(1 - self.precision_bits as i32))
    }

    /// Smallest positive subnormal the encoding can hold, regardless of
    /// whether the arithmetic produces subnormals.
    pub fn encoding_min_subnormal(&self) -> f64 {
        let k = self.emin + 1 - self.precision_bits as i32;
        if k >= -1022 {
            exp2i(k)
        } else {
            // binary64's own subnormal range
            exp2i(-1022) * exp2i(k + 1022)
        }
    }

    /// Smallest positive value the arithmetic can produce.
    pub fn r_min_subnormal(&self) -> f64 {
        if self.subnormals {
            self.encoding_min_subnormal()
        } else {
            self.r_min()
        }
    }

    /// Magnitudes at or above this round to infinity.
    pub fn overflow_threshold(&self) -> f64 {
        if self.is_binary64() {
            return f64::INFINITY;
        }
        exp2i(self.emax) * (2.0 - exp2i(-(self.precision_bits as i32)))
    }

    /// Arguments strictly above this make a correctly rounded `exp` overflow.
    pub fn exp_overflow_threshold(&self) -> f64 {
        if self.is_binary64() {
            // log(r_max) plus the half-ulp margin, below binary64 resolution
            return f64::MAX.ln();
        }
        self.overflow_threshold().ln()
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name {
            FormatName::Custom => write!(
                f,
                "custom:t={},emin={},emax={},subnormals={}",
                self.precision_bits,
                self.emin,
                self.emax,
                u8::from(self.subnormals)
            ),
            name => f.write_str(name.as_str()),
        }
    }
}

impl FromStr for FloatFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fp16" => Ok(Self::fp16()),
            "bfloat16" => Ok(Self::bfloat16()),
            "fp32" => Ok(Self::fp32()),
            "fp64" => Ok(Self::fp64()),
            other => match other.strip_prefix("custom:") {
                Some(params) => parse_custom(params),
                None => Err(Error::UnknownFormat(other.to_string())),
            },
        }
    }
}

fn parse_custom(params: &str) -> Result<FloatFormat> {
    let mut t = None;
    let mut emin = None;
    let mut emax = None;
    let mut subnormals = None;
    for field in params.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::InvalidFormat(format!("expected key=value, got {field:?}")))?;
        let bad = || Error::InvalidFormat(format!("bad value for {}: {value:?}", key.trim()));
        let value = value.trim();
        match key.trim() {
            "t" => t = Some(value.parse::<u32>().map_err(|_| bad())?),
            "emin" => emin = Some(value.parse::<i32>().map_err(|_| bad())?),
            "emax" => emax = Some(value.parse::<i32>().map_err(|_| bad())?),
            "subnormals" => {
                subnormals = Some(match value {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad()),
                })
            }
            other => return Err(Error::InvalidFormat(format!("unknown key {other:?}"))),
        }
    }
    let missing = |k: &str| Error::InvalidFormat(format!("custom format is missing {k}"));
    FloatFormat::custom(
        t.ok_or_else(|| missing("t"))?,
        emin.ok_or_else(|| missing("emin"))?,
        emax.ok_or_else(|| missing("emax"))?,
        subnormals.ok_or_else(|| missing("subnormals"))?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig3(v: f64) -> String {
        format!("{v:.2e}")
    }

    #[test]
    fn fp16_parameters() {
        let f: FloatFormat = "fp16".parse().unwrap();
        assert_eq!(sig3(f.unit_roundoff()), "4.88e-4");
        assert_eq!(sig3(f.r_min()), "6.10e-5");
        assert_eq!(sig3(f.r_max()), "6.55e4");
        assert_eq!(sig3(f.r_min_subnormal()), "5.96e-8");
        assert_eq!(f.r_max(), 65504.0);
    }

    #[test]
    fn bfloat16_has_no_subnormals_by_default() {
        let f: FloatFormat = "bfloat16".parse().unwrap();
        assert_eq!(sig3(f.unit_roundoff()), "3.91e-3");
        assert_eq!(sig3(f.r_max()), "3.39e38");
        assert!(!f.subnormals);
        assert_eq!(f.r_min_subnormal(), f.r_min());
        assert_eq!(sig3(f.r_min()), "1.18e-38");
        assert_eq!(sig3(f.encoding_min_subnormal()), "9.18e-41");
        assert_eq!(sig3(f.with_subnormals(true).r_min_subnormal()), "9.18e-41");
    }

    #[test]
    fn fp32_and_fp64_match_hardware() {
        let s = FloatFormat::fp32();
        assert_eq!(s.unit_roundoff(), f32::EPSILON as f64 / 2.0);
        assert_eq!(s.r_min(), f32::MIN_POSITIVE as f64);
        assert_eq!(s.r_max(), f32::MAX as f64);
        assert_eq!(s.encoding_min_subnormal(), f32::from_bits(1) as f64);
        let d = FloatFormat::fp64();
        assert_eq!(d.unit_roundoff(), f64::EPSILON / 2.0);
        assert_eq!(d.r_min(), f64::MIN_POSITIVE);
        assert_eq!(d.r_max(), f64::MAX);
        assert_eq!(d.encoding_min_subnormal(), f64::from_bits(1));
        assert_eq!(sig3(d.unit_roundoff()), "1.11e-16");
        assert_eq!(sig3(d.r_max()), "1.80e308");
    }

    #[test]
    fn parses_custom_formats() {
        let f: FloatFormat = "custom:t=4,emin=-6,emax=7,subnormals=0".parse().unwrap();
        assert_eq!(f.precision_bits, 4);
        assert_eq!(f.emin, -6);
        assert_eq!(f.emax, 7);
        assert!(!f.subnormals);
        assert_eq!(f.to_string(), "custom:t=4,emin=-6,emax=7,subnormals=0");
        assert_eq!(f.r_max(), 240.0);
    }

    #[test]
    fn rejects_bad_formats() {
        assert!(matches!("fp8".parse::<FloatFormat>(), Err(Error::UnknownFormat(_))));
        for bad in [
            "custom:t=1,emin=-6,emax=7,subnormals=0",
            "custom:t=8,emin=7,emax=7,subnormals=0",
            "custom:t=8,emin=8,emax=7,subnormals=1",
            "custom:t=30,emin=-6,emax=7,subnormals=1",
            "custom:t=8,emin=-6,subnormals=1",
            "custom:t=8,emin=-6,emax=7,subnormals=2",
            "custom:t=8,emin=-6,emax=2000,subnormals=1",
        ] {
            assert!(
                matches!(bad.parse::<FloatFormat>(), Err(Error::InvalidFormat(_))),
                "{bad} should be rejected"
            );
        }
    }

    #[test]
    fn exp_overflow_threshold_fp16() {
        let f = FloatFormat::fp16();
        assert!((f.exp_overflow_threshold() - 11.090110718526951).abs() < 1e-12);
    }
}
