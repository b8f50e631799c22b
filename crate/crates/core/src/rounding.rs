//! One-sided floating point arithmetic.
//!
//! Every helper returns a machine number on the requested side of the exact
//! real result. Exactness is detected with error-free transformations
//! (`TwoSum`, fused multiply-add), so exactly representable results are
//! returned unchanged and inexact ones move by one ulp.

/// Results below this magnitude skip the fma remainder test, whose own
/// rounding is unreliable in the subnormal range.
const TINY: f64 = 1e-290;

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Lower bound on `a * b` for non-negative operands, clamped at zero.
#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p < TINY {
        return if p == 0.0 { 0.0 } else { p.next_down().max(0.0) };
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

/// Upper bound on `a * b` for non-negative operands.
#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p < TINY {
        return if a == 0.0 || b == 0.0 { 0.0 } else { p.next_up() };
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

pub fn sum_down<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, add_down)
}

pub fn sum_up<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, add_up)
}

/// Machine numbers `(lo, hi)` with `lo² ≤ x ≤ hi²` exactly.
pub fn sqrt_bounds(x: f64) -> (f64, f64) {
    let s = x.sqrt();
    let mut lo = s;
    let mut hi = s;
    // sqrt is correctly rounded, so one ulp on either side always suffices.
    if mul_up(lo, lo) > x {
        lo = lo.next_down();
    }
    if mul_down(hi, hi) < x {
        hi = hi.next_up();
    }
    (lo, hi)
}
