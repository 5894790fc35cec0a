//! Log-sum-exp and softmax under simulated reduced-precision arithmetic.
//!
//! * [`precision`] rounds binary64 results into fp16, bfloat16, fp32 or a
//!   custom binary format.
//! * [`kernels`] holds the basic, shifted and division-free evaluation
//!   algorithms.
//! * [`oracle`] computes reference values and scaled errors.
//! * [`analysis`] evaluates condition numbers and first-order error bounds.
//! * [`harness`] runs seeded experiments and writes CSV and SVG output.
//! * [`cli`] is the command-line front end.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod oracle;
pub mod precision;

pub use error::{Error, Result};
pub use kernels::{Algorithm, EvalResult, Flags, InputVector};
pub use precision::{ArithmeticContext, FloatFormat};
