use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{bound_from_ingredients, BoundAlgorithm, BoundIngredients};
use crate::error::{Error, Result};
use crate::kernels::{lse_softmax_basic, lse_softmax_shifted, softmax_alt, Algorithm, Flags, InputVector, LseSource};
use crate::oracle::{check_measurable, lse_softmax_reference, scaled_error, scaled_error_vec, CompensatedSum};
use crate::precision::{ArithmeticContext, FloatFormat};

/// Scaled error of one algorithm on one trial, next to its bound factor.
///
/// `err` is NaN when the reference is zero and the relative error is
/// undefined, and `+∞` when the computed result is not finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub err: f64,
    pub bnd: f64,
}

impl Measurement {
    fn same_bits(&self, other: &Self) -> bool {
        self.err.to_bits() == other.err.to_bits() && self.bnd.to_bits() == other.bnd.to_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub n: usize,
    pub x_max: f64,
    pub x_min: f64,
    pub y_ref: f64,
    pub lse_basic: Measurement,
    pub lse_shift: Measurement,
    pub sm_basic: Measurement,
    pub sm_shift: Measurement,
    pub sm_alt: Measurement,
    pub sm_altshift: Measurement,
    /// `|Σ ĝ - 1| / u` per kernel, in [`Algorithm::ALL`] order.
    pub sum_dev: [f64; 4],
    /// Flags per kernel, in [`Algorithm::ALL`] order.
    pub flags: [Flags; 4],
}

fn kernel_index(a: Algorithm) -> usize {
    match a {
        Algorithm::Basic => 0,
        Algorithm::Shifted => 1,
        Algorithm::AltBasic => 2,
        Algorithm::AltShifted => 3,
    }
}

/// Kernel whose output a bound describes.
pub fn kernel_of(b: BoundAlgorithm) -> Algorithm {
    match b {
        BoundAlgorithm::BasicLse | BoundAlgorithm::BasicSoftmax => Algorithm::Basic,
        BoundAlgorithm::ShiftedLse | BoundAlgorithm::ShiftedSoftmax => Algorithm::Shifted,
        BoundAlgorithm::AltSoftmax => Algorithm::AltBasic,
        BoundAlgorithm::AltShiftedSoftmax => Algorithm::AltShifted,
    }
}

impl TrialRecord {
    pub fn measurement(&self, b: BoundAlgorithm) -> Measurement {
        match b {
            BoundAlgorithm::BasicLse => self.lse_basic,
            BoundAlgorithm::ShiftedLse => self.lse_shift,
            BoundAlgorithm::BasicSoftmax => self.sm_basic,
            BoundAlgorithm::ShiftedSoftmax => self.sm_shift,
            BoundAlgorithm::AltSoftmax => self.sm_alt,
            BoundAlgorithm::AltShiftedSoftmax => self.sm_altshift,
        }
    }

    pub fn kernel_flags(&self, a: Algorithm) -> Flags {
        self.flags[kernel_index(a)]
    }

    pub fn sum_deviation(&self, a: Algorithm) -> f64 {
        self.sum_dev[kernel_index(a)]
    }

    /// Whether the measurement takes part in bound conformance: the kernel
    /// raised no flags and the scaled error is finite.
    pub fn is_conforming_candidate(&self, b: BoundAlgorithm) -> bool {
        self.kernel_flags(kernel_of(b)).is_empty() && self.measurement(b).err.is_finite()
    }

    pub fn violates(&self, b: BoundAlgorithm) -> bool {
        let m = self.measurement(b);
        self.is_conforming_candidate(b) && m.err > m.bnd
    }

    /// Equality on the bit patterns of every float, so NaN fields compare equal.
    pub fn same_bits(&self, other: &Self) -> bool {
        let f = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.trial_id == other.trial_id
            && self.n == other.n
            && f(self.x_max, other.x_max)
            && f(self.x_min, other.x_min)
            && f(self.y_ref, other.y_ref)
            && BoundAlgorithm::ALL
                .iter()
                .all(|&b| self.measurement(b).same_bits(&other.measurement(b)))
            && self.sum_dev.iter().zip(&other.sum_dev).all(|(a, b)| f(*a, *b))
            && self.flags == other.flags
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExperimentOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

/// Run every algorithm on every vector in simulated `fmt` arithmetic.
pub fn run_experiment(data: &[InputVector], fmt: &FloatFormat) -> Result<Vec<TrialRecord>> {
    run_experiment_with(data, fmt, ExperimentOptions::default())
}

pub fn run_experiment_with(
    data: &[InputVector],
    fmt: &FloatFormat,
    opts: ExperimentOptions,
) -> Result<Vec<TrialRecord>> {
    if data.is_empty() {
        return Err(Error::InvalidDataSpec("no input vectors".into()));
    }
    check_measurable(fmt)?;
    let job = || {
        data.par_iter()
            .enumerate()
            .map(|(id, x)| run_trial(id, x, fmt))
            .collect::<Result<Vec<_>>>()
    };
    match opts.threads {
        None => job(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()?
            .install(job),
    }
}

fn sum_deviation(g: &[f64], u: f64) -> f64 {
    if g.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let total: CompensatedSum = g.iter().copied().collect();
    (total.value() - 1.0).abs() / u
}

/// One trial: reference, four kernels, scaled errors and bound factors.
pub fn run_trial(trial_id: usize, x: &InputVector, fmt: &FloatFormat) -> Result<TrialRecord> {
    let x = x.rounded_to(fmt)?;
    let ctx = ArithmeticContext::simulated(*fmt);
    let u = fmt.unit_roundoff();
    let reference = lse_softmax_reference(&x);
    let ing = BoundIngredients::new(&x, reference.y_ref);

    let basic = lse_softmax_basic(&x, &ctx);
    let shifted = lse_softmax_shifted(&x, &ctx);
    let mut alt = softmax_alt(&x, basic.y, LseSource::Basic, &ctx);
    alt.flags |= basic.flags;
    let mut altshift = softmax_alt(&x, shifted.y, LseSource::Shifted, &ctx);
    altshift.flags |= shifted.flags;

    let lse = |y: f64| scaled_error(y, reference.y_ref, fmt).unwrap_or(f64::NAN);
    let sm = |g: &[f64]| scaled_error_vec(g, &reference.g_ref, fmt).unwrap_or(f64::NAN);
    let m = |b: BoundAlgorithm, err: f64| Measurement {
        err,
        bnd: bound_from_ingredients(b, ing).leading_factor,
    };

    Ok(TrialRecord {
        trial_id,
        n: x.len(),
        x_max: ing.x_max,
        x_min: ing.x_min,
        y_ref: reference.y_ref,
        lse_basic: m(BoundAlgorithm::BasicLse, lse(basic.y)),
        lse_shift: m(BoundAlgorithm::ShiftedLse, lse(shifted.y)),
        sm_basic: m(BoundAlgorithm::BasicSoftmax, sm(&basic.g)),
        sm_shift: m(BoundAlgorithm::ShiftedSoftmax, sm(&shifted.g)),
        sm_alt: m(BoundAlgorithm::AltSoftmax, sm(&alt.g)),
        sm_altshift: m(BoundAlgorithm::AltShiftedSoftmax, sm(&altshift.g)),
        sum_dev: [
            sum_deviation(&basic.g, u),
            sum_deviation(&shifted.g, u),
            sum_deviation(&alt.g, u),
            sum_deviation(&altshift.g, u),
        ],
        flags: [basic.flags, shifted.flags, alt.flags, altshift.flags],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> InputVector {
        InputVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_pair_in_fp16() {
        let recs = run_experiment(&[v(&[0.0, 0.0])], &FloatFormat::fp16()).unwrap();
        let r = &recs[0];
        assert_eq!(r.y_ref, std::f64::consts::LN_2);
        for b in BoundAlgorithm::ALL {
            let m = r.measurement(b);
            assert!(m.err.is_finite(), "{b}");
            assert!(m.err <= m.bnd, "{b}: {} > {}", m.err, m.bnd);
            assert!(!r.violates(b));
        }
    }

    #[test]
    fn fp16_overflow_is_recorded_for_basic_only() {
        let mut x = vec![0.0; 10];
        x[0] = 12.0;
        let recs = run_experiment(&[v(&x)], &FloatFormat::fp16()).unwrap();
        let r = &recs[0];
        assert!(r.kernel_flags(Algorithm::Basic).contains(Flags::OVERFLOWED));
        assert!(r.kernel_flags(Algorithm::AltBasic).contains(Flags::OVERFLOWED));
        assert!(r.kernel_flags(Algorithm::Shifted).is_empty());
        assert!(r.kernel_flags(Algorithm::AltShifted).is_empty());
        assert_eq!(r.lse_basic.err, f64::INFINITY);
        assert!(!r.is_conforming_candidate(BoundAlgorithm::BasicLse));
        assert!(!r.is_conforming_candidate(BoundAlgorithm::AltSoftmax));
        assert!(r.is_conforming_candidate(BoundAlgorithm::ShiftedLse));
    }

    #[test]
    fn constant_vector_sum_deviation_within_basic_bound() {
        for fmt in [FloatFormat::fp16(), FloatFormat::bfloat16(), FloatFormat::fp32()] {
            for c in [-3.0, 0.0, 0.7, 5.0] {
                let n = 7;
                let r = &run_experiment(&[v(&vec![c; n])], &fmt).unwrap()[0];
                assert!(r.sum_deviation(Algorithm::Basic) <= (n + 3) as f64, "{fmt} c={c}");
            }
        }
    }

    #[test]
    fn zero_reference_leaves_lse_error_undefined() {
        let r = run_trial(0, &v(&[0.0]), &FloatFormat::fp16()).unwrap();
        assert_eq!(r.y_ref, 0.0);
        assert!(r.lse_basic.err.is_nan());
        assert_eq!(r.lse_basic.bnd, f64::INFINITY);
        assert!(!r.is_conforming_candidate(BoundAlgorithm::BasicLse));
        assert_eq!(r.sm_shift.err, 0.0);
    }

    #[test]
    fn rejects_empty_data_and_binary64() {
        assert!(run_experiment(&[], &FloatFormat::fp16()).is_err());
        assert!(matches!(
            run_experiment(&[v(&[1.0])], &FloatFormat::fp64()),
            Err(Error::UnmeasurableFormat(_))
        ));
    }

    #[test]
    fn thread_count_does_not_change_records() {
        let data: Vec<_> = (0..64)
            .map(|i| v(&[i as f64 * 0.37 - 9.0, 1.5, -(i as f64) * 0.11, 3.0]))
            .collect();
        let h = FloatFormat::fp16();
        let one = run_experiment_with(&data, &h, ExperimentOptions { threads: Some(1) }).unwrap();
        let four = run_experiment_with(&data, &h, ExperimentOptions { threads: Some(4) }).unwrap();
        assert!(one.iter().zip(&four).all(|(a, b)| a.same_bits(b)));
        assert!(one.iter().enumerate().all(|(i, r)| r.trial_id == i));
    }
}
