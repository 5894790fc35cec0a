use std::fmt;

use super::format::FloatFormat;
use super::round::round_to_format;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Exp,
    Log,
    Log1p,
}

/// Arithmetic in which the kernels run.
///
/// `Native` uses the hardware binary64 operations. `Simulated` computes each
/// operation in binary64 and rounds the result to the target format, so
/// every value it produces is representable in that format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticContext {
    Native,
    Simulated(FloatFormat),
}

impl ArithmeticContext {
    pub fn simulated(fmt: FloatFormat) -> Self {
        ArithmeticContext::Simulated(fmt)
    }

    /// The format whose values this context produces.
    pub fn format(&self) -> FloatFormat {
        match self {
            ArithmeticContext::Native => FloatFormat::fp64(),
            ArithmeticContext::Simulated(f) => *f,
        }
    }

    pub fn unit_roundoff(&self) -> f64 {
        self.format().unit_roundoff()
    }

    #[inline]
    pub fn round(&self, x: f64) -> f64 {
        match self {
            ArithmeticContext::Native => x,
            ArithmeticContext::Simulated(f) => round_to_format(x, f),
        }
    }

    #[inline]
    pub fn binop(&self, op: BinOp, a: f64, b: f64) -> f64 {
        let exact = match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        };
        self.round(exact)
    }

    #[inline]
    pub fn unary(&self, func: UnaryFn, a: f64) -> f64 {
        let v = match func {
            UnaryFn::Exp => a.exp(),
            UnaryFn::Log => a.ln(),
            UnaryFn::Log1p => a.ln_1p(),
        };
        self.round(v)
    }

    pub fn add(&self, a: f64, b: f64) -> f64 {
        self.binop(BinOp::Add, a, b)
    }

    pub fn sub(&self, a: f64, b: f64) -> f64 {
        self.binop(BinOp::Sub, a, b)
    }

    pub fn mul(&self, a: f64, b: f64) -> f64 {
        self.binop(BinOp::Mul, a, b)
    }

    pub fn div(&self, a: f64, b: f64) -> f64 {
        self.binop(BinOp::Div, a, b)
    }

    pub fn exp(&self, a: f64) -> f64 {
        self.unary(UnaryFn::Exp, a)
    }

    pub fn ln(&self, a: f64) -> f64 {
        self.unary(UnaryFn::Log, a)
    }

    pub fn ln_1p(&self, a: f64) -> f64 {
        self.unary(UnaryFn::Log1p, a)
    }
}

impl fmt::Display for ArithmeticContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticContext::Native => f.write_str("native"),
            ArithmeticContext::Simulated(fmt) => write!(f, "{fmt}"),
        }
    }
}
