//! Reference values of log-sum-exp and softmax, and scaled-error measurement.
//!
//! The reference runs the shifted algorithm in binary64 and accumulates the
//! exponential terms with compensated summation. Its accuracy is limited by
//! the binary64 `exp` and `log1p`, leaving at least 2^20 of headroom over
//! every format measured against it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::InputVector;
use crate::precision::FloatFormat;

/// Formats with a unit roundoff below this are too close to binary64 to be
/// measured against the reference.
pub const MIN_MEASURABLE_ROUNDOFF: f64 = 1.0 / (1u64 << 33) as f64;

/// Neumaier's variant of compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    CompensatedShifted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub y_ref: f64,
    pub g_ref: Vec<f64>,
    pub method: ReferenceMethod,
}

pub fn lse_softmax_reference(x: &InputVector) -> Reference {
    let k = x.argmax();
    let a = x[k];
    let w: Vec<f64> = x.iter().map(|&xi| (xi - a).exp()).collect();
    let s: CompensatedSum = w
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &wi)| wi)
        .collect();
    let s = s.value();
    let y_ref = a + s.ln_1p();
    let denom = 1.0 + s;
    let g_ref = w.iter().map(|wi| wi / denom).collect();
    Reference {
        y_ref,
        g_ref,
        method: ReferenceMethod::CompensatedShifted,
    }
}

/// `Err` unless `fmt` is coarse enough to be measured against the reference.
pub fn check_measurable(fmt: &FloatFormat) -> Result<()> {
    if fmt.unit_roundoff() >= MIN_MEASURABLE_ROUNDOFF {
        Ok(())
    } else {
        Err(Error::UnmeasurableFormat(fmt.to_string()))
    }
}

/// `|computed - reference| / (u |reference|)`; infinite when `computed` is
/// not finite.
pub fn scaled_error(computed: f64, reference: f64, fmt: &FloatFormat) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    if !computed.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok((computed - reference).abs() / (fmt.unit_roundoff() * reference.abs()))
}

/// Infinity-norm analogue of [`scaled_error`].
pub fn scaled_error_vec(computed: &[f64], reference: &[f64], fmt: &FloatFormat) -> Result<f64> {
    if computed.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: computed.len(),
            right: reference.len(),
        });
    }
    let ref_norm = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ref_norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    if computed.iter().any(|c| !c.is_finite()) {
        return Ok(f64::INFINITY);
    }
    let diff_norm = computed
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (c, r)| m.max((c - r).abs()));
    Ok(diff_norm / (fmt.unit_roundoff() * ref_norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> InputVector {
        InputVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn reference_examples() {
        let r = lse_softmax_reference(&v(&[0.0, 0.0]));
        assert_eq!(r.y_ref, std::f64::consts::LN_2);
        assert_eq!(r.g_ref, vec![0.5, 0.5]);

        // 50-digit values, computed offline
        let r = lse_softmax_reference(&v(&[1.0, 2.0, 3.0]));
        assert!((r.y_ref - 3.407_605_964_444_38).abs() <= 2.0 * f64::EPSILON * 3.5);
        let g = [0.090_030_573_170_380_46, 0.24472847105479765, 0.665_240_955_774_821_9];
        for (a, b) in r.g_ref.iter().zip(g) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b);
        }

        let r = lse_softmax_reference(&v(&[-800.0]));
        assert_eq!(r.y_ref, -800.0);
        assert_eq!(r.g_ref, vec![1.0]);
    }

    #[test]
    fn compensated_sum_recovers_lost_bits() {
        let s: CompensatedSum = [1.0, 1e-16, 1e-16, 1e-16, 1e-16].into_iter().collect();
        assert_eq!(s.value(), 1.0 + 4e-16);
        let s: CompensatedSum = [1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn scaled_error_examples() {
        let h = FloatFormat::fp16();
        assert_eq!(scaled_error(2.5, 2.5, &h).unwrap(), 0.0);
        assert_eq!(scaled_error(1.0 + 2f64.powi(-11), 1.0, &h).unwrap(), 1.0);
        assert_eq!(scaled_error(f64::INFINITY, 5.0, &h).unwrap(), f64::INFINITY);
        assert_eq!(scaled_error(f64::NAN, 5.0, &h).unwrap(), f64::INFINITY);
        assert!(matches!(scaled_error(1.0, 0.0, &h), Err(Error::ZeroReference)));
    }

    #[test]
    fn scaled_error_vec_examples() {
        let h = FloatFormat::fp16();
        assert_eq!(scaled_error_vec(&[0.5, 0.5], &[0.5, 0.5], &h).unwrap(), 0.0);
        let bumped = 0.5 + 2f64.powi(-11) * 0.5;
        assert_eq!(scaled_error_vec(&[bumped, 0.5], &[0.5, 0.5], &h).unwrap(), 1.0);
        assert_eq!(
            scaled_error_vec(&[f64::NAN, 0.5], &[0.5, 0.5], &h).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            scaled_error_vec(&[1.0], &[0.5, 0.5], &h),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            scaled_error_vec(&[1.0], &[0.0], &h),
            Err(Error::ZeroReference)
        ));
    }

    #[test]
    fn measurable_formats() {
        assert!(check_measurable(&FloatFormat::fp16()).is_ok());
        assert!(check_measurable(&FloatFormat::bfloat16()).is_ok());
        assert!(check_measurable(&FloatFormat::fp32()).is_ok());
        assert!(check_measurable(&FloatFormat::fp64()).is_err());
    }
}
