#![allow(dead_code)]

use lse::oracle::CompensatedSum;

/// Central-difference step.
pub const FD_STEP: f64 = 1.0 / (1u64 << 20) as f64;

/// Central difference `(f(x + h e_j) - f(x - h e_j)) / 2h` of log-sum-exp.
///
/// The difference of the two logarithms is `log1p(2 w_j sinh(h) / S_-)`,
/// which is formed directly so the quotient carries no cancellation error.
pub fn central_difference(x: &[f64], j: usize, h: f64) -> f64 {
    let a = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = x.iter().map(|v| (v - a).exp()).collect();
    let s_minus: CompensatedSum = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| if i == j { wi * (-h).exp() } else { wi })
        .collect();
    (2.0 * w[j] * h.sinh() / s_minus.value()).ln_1p() / (2.0 * h)
}

/// The same quotient from two evaluations of `f`, for comparison.
pub fn naive_central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], j: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[j] += h;
    m[j] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}
