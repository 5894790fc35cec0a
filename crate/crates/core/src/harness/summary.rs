use std::fmt;

use serde::Serialize;

use super::experiment::{kernel_of, TrialRecord};
use crate::analysis::BoundAlgorithm;
use crate::kernels::{Algorithm, Flags};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmStats {
    pub algorithm: BoundAlgorithm,
    /// Trials taking part in bound conformance.
    pub evaluated: usize,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub violations: usize,
    /// Trials where the kernel behind this output overflowed.
    pub overflows: usize,
}

/// Statistics of `err(numerator) / err(denominator)` over trials where both
/// errors are finite and nonzero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub numerator: BoundAlgorithm,
    pub denominator: BoundAlgorithm,
    pub count: usize,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub geometric_mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumDeviationStats {
    pub algorithm: Algorithm,
    pub evaluated: usize,
    pub median: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub algorithms: Vec<AlgorithmStats>,
    /// Fraction of trials (both log-sum-exp results usable) where the basic
    /// and shifted errors are identical.
    pub identical_lse_fraction: Option<f64>,
    pub ratios: Vec<RatioStats>,
    pub sum_deviation: Vec<SumDeviationStats>,
}

impl Summary {
    pub fn total_violations(&self) -> usize {
        self.algorithms.iter().map(|a| a.violations).sum()
    }

    pub fn stats(&self, b: BoundAlgorithm) -> &AlgorithmStats {
        self.algorithms
            .iter()
            .find(|s| s.algorithm == b)
            .expect("summary covers every algorithm")
    }

    pub fn ratio(&self, numerator: BoundAlgorithm, denominator: BoundAlgorithm) -> Option<&RatioStats> {
        self.ratios
            .iter()
            .find(|r| r.numerator == numerator && r.denominator == denominator)
    }
}

/// Pairs compared against each other in the summary.
pub const RATIO_PAIRS: [(BoundAlgorithm, BoundAlgorithm); 4] = [
    (BoundAlgorithm::BasicLse, BoundAlgorithm::ShiftedLse),
    (BoundAlgorithm::BasicSoftmax, BoundAlgorithm::ShiftedSoftmax),
    (BoundAlgorithm::AltSoftmax, BoundAlgorithm::ShiftedSoftmax),
    (BoundAlgorithm::AltShiftedSoftmax, BoundAlgorithm::ShiftedSoftmax),
];

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn algorithm_stats(records: &[TrialRecord], b: BoundAlgorithm) -> AlgorithmStats {
    let mut errs: Vec<f64> = records
        .iter()
        .filter(|r| r.is_conforming_candidate(b))
        .map(|r| r.measurement(b).err)
        .collect();
    AlgorithmStats {
        algorithm: b,
        evaluated: errs.len(),
        max: errs.iter().copied().reduce(f64::max),
        mean: mean(&errs),
        median: median(&mut errs),
        violations: records.iter().filter(|r| r.violates(b)).count(),
        overflows: records
            .iter()
            .filter(|r| r.kernel_flags(kernel_of(b)).contains(Flags::OVERFLOWED))
            .count(),
    }
}

fn ratio_stats(records: &[TrialRecord], numerator: BoundAlgorithm, denominator: BoundAlgorithm) -> RatioStats {
    let usable = |r: &TrialRecord, b: BoundAlgorithm| {
        let e = r.measurement(b).err;
        r.is_conforming_candidate(b) && e != 0.0
    };
    let ratios: Vec<f64> = records
        .iter()
        .filter(|r| usable(r, numerator) && usable(r, denominator))
        .map(|r| r.measurement(numerator).err / r.measurement(denominator).err)
        .collect();
    let m = mean(&ratios);
    let std_error = match (m, ratios.len()) {
        (Some(m), k) if k > 1 => {
            let var = ratios.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (k - 1) as f64;
            Some((var / k as f64).sqrt())
        }
        _ => None,
    };
    let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    RatioStats {
        numerator,
        denominator,
        count: ratios.len(),
        mean: m,
        std_error,
        geometric_mean: mean(&logs).map(f64::exp),
        min: ratios.iter().copied().reduce(f64::min),
        max: ratios.iter().copied().reduce(f64::max),
    }
}

fn sum_deviation_stats(records: &[TrialRecord], a: Algorithm) -> SumDeviationStats {
    let mut devs: Vec<f64> = records
        .iter()
        .filter(|r| r.kernel_flags(a).is_empty())
        .map(|r| r.sum_deviation(a))
        .filter(|d| d.is_finite())
        .collect();
    SumDeviationStats {
        algorithm: a,
        evaluated: devs.len(),
        max: devs.iter().copied().reduce(f64::max),
        median: median(&mut devs),
    }
}

pub fn summarize(records: &[TrialRecord]) -> Summary {
    let both: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| {
            r.is_conforming_candidate(BoundAlgorithm::BasicLse) && r.is_conforming_candidate(BoundAlgorithm::ShiftedLse)
        })
        .collect();
    let identical = both.iter().filter(|r| r.lse_basic.err == r.lse_shift.err).count();
    Summary {
        trials: records.len(),
        algorithms: BoundAlgorithm::ALL
            .iter()
            .map(|&b| algorithm_stats(records, b))
            .collect(),
        identical_lse_fraction: (!both.is_empty()).then(|| identical as f64 / both.len() as f64),
        ratios: RATIO_PAIRS.iter().map(|&(a, b)| ratio_stats(records, a, b)).collect(),
        sum_deviation: Algorithm::ALL
            .iter()
            .map(|&a| sum_deviation_stats(records, a))
            .collect(),
    }
}

struct Opt(Option<f64>);

impl fmt::Display for Opt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v:.4}"),
            None => f.write_str("n/a"),
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(
            f,
            "{:<20} {:>9} {:>12} {:>12} {:>12} {:>10} {:>9}",
            "algorithm", "evaluated", "max", "mean", "median", "violations", "overflows"
        )?;
        for a in &self.algorithms {
            writeln!(
                f,
                "{:<20} {:>9} {:>12} {:>12} {:>12} {:>10} {:>9}",
                a.algorithm.as_str(),
                a.evaluated,
                Opt(a.max).to_string(),
                Opt(a.mean).to_string(),
                Opt(a.median).to_string(),
                a.violations,
                a.overflows
            )?;
        }
        writeln!(
            f,
            "identical basic/shifted lse errors: {}",
            Opt(self.identical_lse_fraction)
        )?;
        for r in &self.ratios {
            writeln!(
                f,
                "ratio {}/{}: count {} mean {} (se {}) geomean {} min {} max {}",
                r.numerator,
                r.denominator,
                r.count,
                Opt(r.mean),
                Opt(r.std_error),
                Opt(r.geometric_mean),
                Opt(r.min),
                Opt(r.max)
            )?;
        }
        for s in &self.sum_deviation {
            writeln!(
                f,
                "softmax sum deviation / u, {}: median {} max {}",
                s.algorithm,
                Opt(s.median),
                Opt(s.max)
            )?;
        }
        write!(f, "bound violations: {}", self.total_violations())
    }
}
