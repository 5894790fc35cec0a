//! Reduced-precision binary floating-point arithmetic simulated on binary64.
//!
//! Every operation is evaluated in binary64 and its result is rounded to
//! the target format with round-to-nearest, ties to even. For formats of at
//! most 25 significand bits this gives correctly rounded `+ - * /`. The
//! elementary functions inherit the binary64 library's accuracy and then
//! take one rounding, so their relative error stays within the target
//! unit roundoff.
//!
//! | format   | t  | emin  | emax | subnormals |
//! |----------|----|-------|------|------------|
//! | fp16     | 11 | -14   | 15   | yes        |
//! | bfloat16 | 8  | -126  | 127  | no         |
//! | fp32     | 24 | -126  | 127  | yes        |
//! | fp64     | 53 | -1022 | 1023 | yes        |

mod context;
mod format;
mod round;

pub use context::{ArithmeticContext, BinOp, UnaryFn};
pub use format::{FloatFormat, FormatName, MAX_CUSTOM_PRECISION};
pub use round::round_to_format;
