use super::format::{exp2i, FloatFormat};

/// floor(log2 |x|) for finite nonzero binary64; binary64 subnormals report
/// an exponent below every supported format.
fn binary64_exponent(mag: f64) -> i32 {
    let biased = ((mag.to_bits() >> 52) & 0x7ff) as i32;
    if biased == 0 {
        -1075
    } else {
        biased - 1023
    }
}

/// Round a binary64 value to the nearest value of `fmt`, ties to even.
///
/// The result is carried in binary64. Magnitudes at or above the overflow
/// threshold become infinite. Below `r_min`, values land on the subnormal
/// grid when the format has one and are otherwise rounded at full precision
/// and flushed to zero if they end up below `r_min`.
pub fn round_to_format(x: f64, fmt: &FloatFormat) -> f64 {
    if fmt.is_binary64() || !x.is_finite() || x == 0.0 {
        return x;
    }
    let mag = x.abs();
    let t = fmt.precision_bits as i32;
    let mut exp = binary64_exponent(mag);
    if exp < fmt.emin {
        if fmt.subnormals {
            exp = fmt.emin;
        } else if exp < fmt.emin - 1 {
            // rounds to less than r_min even after carry
            return 0.0f64.copysign(x);
        }
    }
    let quantum = exp2i(exp - t + 1);
    let mut r = (mag / quantum).round_ties_even() * quantum;
    if r > fmt.r_max() {
        r = f64::INFINITY;
    } else if !fmt.subnormals && r < fmt.r_min() {
        r = 0.0;
    }
    r.copysign(x)
}
