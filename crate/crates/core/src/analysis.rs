//! Condition numbers, the softmax Jacobian and first-order error bounds.
//!
//! All quantities are evaluated in binary64 from the reference values of
//! [`crate::oracle`]. Norms are infinity norms throughout.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::InputVector;
use crate::oracle::lse_softmax_reference;

/// `‖x‖∞ / |f(x)|`, or `+∞` when `f(x) = 0`.
pub fn cond_lse(x: &InputVector) -> f64 {
    cond_lse_with_y(x, lse_softmax_reference(x).y_ref)
}

fn cond_lse_with_y(x: &InputVector, y: f64) -> f64 {
    if y == 0.0 {
        f64::INFINITY
    } else {
        x.norm_inf() / y.abs()
    }
}

/// Dense symmetric `n × n` matrix, row major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jacobian {
    n: usize,
    data: Vec<f64>,
}

impl Jacobian {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Jacobian of softmax: `G_ij = -g_i g_j` for `i != j`, `G_ii = g_i - g_i²`.
pub fn softmax_jacobian(x: &InputVector) -> Jacobian {
    jacobian_from_softmax(&lse_softmax_reference(x).g_ref)
}

fn jacobian_from_softmax(g: &[f64]) -> Jacobian {
    let n = g.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = if i == j { g[i] - g[i] * g[i] } else { -(g[i] * g[j]) };
        }
    }
    Jacobian { n, data }
}

/// Condition number of softmax: `(‖G‖∞ ‖x‖∞ / ‖g‖∞, n ‖x‖∞)`.
pub fn cond_softmax(x: &InputVector) -> (f64, f64) {
    let g = lse_softmax_reference(x).g_ref;
    cond_softmax_with_g(x, &g, &jacobian_from_softmax(&g))
}

fn cond_softmax_with_g(x: &InputVector, g: &[f64], jac: &Jacobian) -> (f64, f64) {
    let xn = x.norm_inf();
    let gn = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let exact = if xn == 0.0 { 0.0 } else { jac.norm_inf() * xn / gn };
    (exact, x.len() as f64 * xn)
}

/// `(x_max, x_max + log n)`, the interval containing log-sum-exp.
pub fn y_range(x: &InputVector) -> (f64, f64) {
    let hi = x.x_max() + (x.len() as f64).ln();
    (x.x_max(), hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub cond_f: f64,
    pub cond_g_exact: f64,
    pub cond_g_upper: f64,
    pub jacobian: Jacobian,
}

pub fn condition_report(x: &InputVector) -> ConditionReport {
    let r = lse_softmax_reference(x);
    let jacobian = jacobian_from_softmax(&r.g_ref);
    let (cond_g_exact, cond_g_upper) = cond_softmax_with_g(x, &r.g_ref, &jacobian);
    ConditionReport {
        cond_f: cond_lse_with_y(x, r.y_ref),
        cond_g_exact,
        cond_g_upper,
        jacobian,
    }
}

/// The six analysed algorithm/output pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundAlgorithm {
    BasicLse,
    BasicSoftmax,
    AltSoftmax,
    ShiftedLse,
    ShiftedSoftmax,
    AltShiftedSoftmax,
}

impl BoundAlgorithm {
    pub const ALL: [BoundAlgorithm; 6] = [
        BoundAlgorithm::BasicLse,
        BoundAlgorithm::BasicSoftmax,
        BoundAlgorithm::AltSoftmax,
        BoundAlgorithm::ShiftedLse,
        BoundAlgorithm::ShiftedSoftmax,
        BoundAlgorithm::AltShiftedSoftmax,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundAlgorithm::BasicLse => "basic_lse",
            BoundAlgorithm::BasicSoftmax => "basic_softmax",
            BoundAlgorithm::AltSoftmax => "alt_softmax",
            BoundAlgorithm::ShiftedLse => "shifted_lse",
            BoundAlgorithm::ShiftedSoftmax => "shifted_softmax",
            BoundAlgorithm::AltShiftedSoftmax => "alt_shifted_softmax",
        }
    }

    pub fn is_softmax(self) -> bool {
        !matches!(self, BoundAlgorithm::BasicLse | BoundAlgorithm::ShiftedLse)
    }
}

impl fmt::Display for BoundAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundAlgorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Quantities the bound formulas are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundIngredients {
    pub n: usize,
    pub y: f64,
    pub x_max: f64,
    pub x_min: f64,
    /// max_j |x_j - y|
    pub max_dev: f64,
}

impl BoundIngredients {
    pub fn new(x: &InputVector, y: f64) -> Self {
        Self {
            n: x.len(),
            y,
            x_max: x.x_max(),
            x_min: x.x_min(),
            max_dev: x.iter().fold(0.0f64, |m, xj| m.max((xj - y).abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub algorithm: BoundAlgorithm,
    /// Coefficient of u in the first-order relative error bound.
    pub leading_factor: f64,
    pub ingredients: BoundIngredients,
}

/// First-order bound factor for `algorithm` on `x`, using the reference y.
pub fn bound_leading_term(algorithm: BoundAlgorithm, x: &InputVector) -> BoundReport {
    let y = lse_softmax_reference(x).y_ref;
    bound_from_ingredients(algorithm, BoundIngredients::new(x, y))
}

pub fn bound_from_ingredients(algorithm: BoundAlgorithm, ing: BoundIngredients) -> BoundReport {
    let n = ing.n as f64;
    let y = ing.y;
    let lse = |num: f64| if y == 0.0 { f64::INFINITY } else { num / y.abs() };
    let leading_factor = match algorithm {
        BoundAlgorithm::BasicLse => lse(y.abs() + n + 1.0),
        BoundAlgorithm::BasicSoftmax => n + 3.0,
        BoundAlgorithm::AltSoftmax => y.abs() + ing.max_dev + n + 2.0,
        BoundAlgorithm::ShiftedLse => lse((y + n - ing.x_min).abs()),
        BoundAlgorithm::ShiftedSoftmax => n + 2.0 + 2.0 * (ing.x_max - ing.x_min),
        BoundAlgorithm::AltShiftedSoftmax => 1.0 + ing.max_dev + (y + n - ing.x_min).abs(),
    };
    BoundReport {
        algorithm,
        leading_factor,
        ingredients: ing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> InputVector {
        InputVector::new(x.to_vec()).unwrap()
    }

    // log(e + 1/e) and e/(e + 1/e) to 17 digits
    const Y: f64 = 1.1269280110429725;
    const G1G2: f64 = 0.10499358540350652;

    #[test]
    fn cond_lse_examples() {
        let c = -(4f64.ln());
        assert_eq!(cond_lse(&v(&[c, c, c, c])), f64::INFINITY);
        assert!((cond_lse(&v(&[1.0, -1.0])) - 0.887_368_128_399_346).abs() < 1e-15);
        assert!(cond_lse(&v(&[3.0, 1.0])) <= 1.0);
        assert_eq!(cond_lse(&v(&[0.0])), f64::INFINITY);
    }

    #[test]
    fn jacobian_examples() {
        let j = softmax_jacobian(&v(&[0.0, 0.0]));
        assert_eq!(j.row(0), &[0.25, -0.25]);
        assert_eq!(j.row(1), &[-0.25, 0.25]);

        let j = softmax_jacobian(&v(&[1.0, -1.0]));
        assert!((j.get(0, 1) + G1G2).abs() < 1e-16);
        assert!((j.get(0, 0) - G1G2).abs() < 1e-16);
        assert!((j.get(1, 1) - G1G2).abs() < 1e-16);
        assert_eq!(j.get(0, 1), j.get(1, 0));

        let j = softmax_jacobian(&v(&[42.0]));
        assert_eq!(j.dim(), 1);
        assert_eq!(j.get(0, 0), 0.0);
    }

    #[test]
    fn cond_softmax_examples() {
        assert_eq!(cond_softmax(&v(&[0.0, 0.0])), (0.0, 0.0));
        let (exact, upper) = cond_softmax(&v(&[1.0, -1.0]));
        assert!((exact - 0.23840584404423511).abs() < 1e-15);
        assert_eq!(upper, 2.0);
        assert_eq!(cond_softmax(&v(&[7.0])), (0.0, 7.0));
    }

    #[test]
    fn y_range_examples() {
        let (lo, hi) = y_range(&v(&[1.0, -1.0]));
        assert_eq!(lo, 1.0);
        assert!((hi - 1.6931471805599453).abs() < 1e-15);
        assert_eq!(y_range(&v(&[-3.5])), (-3.5, -3.5));
        assert_eq!(y_range(&v(&[0.0; 4])), (0.0, 4f64.ln()));
    }

    #[test]
    fn bound_examples() {
        let x = v(&[1.0, -1.0]);
        let b = bound_leading_term(BoundAlgorithm::BasicLse, &x);
        assert!((b.leading_factor - (1.0 + 3.0 / Y)).abs() < 1e-14);
        assert!((b.leading_factor - 3.6621043851980379).abs() < 1e-14);
        let s = bound_leading_term(BoundAlgorithm::ShiftedLse, &x);
        assert!((s.leading_factor - (Y + 3.0) / Y).abs() < 1e-14);
        assert_eq!(s.ingredients.x_min, -1.0);
        assert_eq!(s.ingredients.x_max, 1.0);

        let alt = bound_leading_term(BoundAlgorithm::AltSoftmax, &x).leading_factor;
        let alt_shift = bound_leading_term(BoundAlgorithm::AltShiftedSoftmax, &x).leading_factor;
        assert!((alt - 7.253856022085945).abs() < 1e-14);
        assert!((alt_shift - 7.253856022085945).abs() < 1e-14);

        let ten = v(&[0.5; 10]);
        assert_eq!(
            bound_leading_term(BoundAlgorithm::BasicSoftmax, &ten).leading_factor,
            13.0
        );
        assert_eq!(
            bound_leading_term(BoundAlgorithm::ShiftedSoftmax, &ten).leading_factor,
            12.0
        );
    }

    #[test]
    fn lse_bounds_infinite_at_zero_y() {
        let c = -(4f64.ln());
        let x = v(&[c; 4]);
        for alg in [BoundAlgorithm::BasicLse, BoundAlgorithm::ShiftedLse] {
            assert_eq!(bound_leading_term(alg, &x).leading_factor, f64::INFINITY);
        }
        for alg in BoundAlgorithm::ALL.into_iter().filter(|a| a.is_softmax()) {
            let f = bound_leading_term(alg, &x).leading_factor;
            assert!(f.is_finite() && f >= 1.0);
        }
    }

    #[test]
    fn bound_algorithm_names() {
        for a in BoundAlgorithm::ALL {
            assert_eq!(a.as_str().parse::<BoundAlgorithm>().unwrap(), a);
        }
        assert!(matches!(
            "kahan_lse".parse::<BoundAlgorithm>(),
            Err(Error::UnknownAlgorithm(_))
        ));
    }
}
