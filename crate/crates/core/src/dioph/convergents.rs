//! Continued fractions of doubles, computed exactly on the dyadic value.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// Largest denominator the rationality probe accepts as "low height".
pub const PROBE_MAX_DENOMINATOR: i128 = 1_000_000;
/// Deepest expansion ever computed.
pub const MAX_DEPTH: usize = 64;

/// Exact value of a finite double as `num / den` with `den` a power of two.
fn dyadic(x: f64) -> (BigInt, BigInt) {
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let mut num = BigInt::from(mantissa);
    let mut den = BigInt::from(1u8);
    if e >= 0 {
        num <<= e as usize;
    } else {
        den <<= (-e) as usize;
    }
    if negative {
        num = -num;
    }
    (num, den)
}

/// Convergents `p_i / q_i` of `x`, at most `depth` of them (capped at 64).
///
/// The expansion is that of the exact binary value of `x`, so it
/// terminates for every double; it also stops early once a convergent no
/// longer fits `i128`.
pub fn convergents(x: f64, depth: usize) -> Vec<(i128, i128)> {
    if !x.is_finite() || depth == 0 {
        return Vec::new();
    }
    let depth = depth.min(MAX_DEPTH);
    let (mut num, mut den) = dyadic(x);
    // (p_prev, p) = (p_{-2}, p_{-1}), likewise for q.
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::from(1u8));
    let (mut q_prev, mut q) = (BigInt::from(1u8), BigInt::zero());
    let mut out = Vec::new();
    while out.len() < depth && !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        match (p_next.to_i128(), q_next.to_i128()) {
            (Some(pn), Some(qn)) => out.push((pn, qn)),
            _ => break,
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        num = std::mem::replace(&mut den, r);
    }
    out
}

/// A low-height rational `p / q` (q <= 10^6) reproducing `x` to within
/// four ulps, if one exists.
pub fn detect_rational(x: f64) -> Option<(i128, i128)> {
    if !x.is_finite() {
        return None;
    }
    let tol = 4.0 * ulp(x);
    convergents(x, MAX_DEPTH)
        .into_iter()
        .take_while(|&(_, q)| q <= PROBE_MAX_DENOMINATOR)
        .find(|&(p, q)| (p as f64 / q as f64 - x).abs() <= tol)
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return f64::from_bits(1);
    }
    f64::from_bits(a.to_bits() + 1) - a
}

/// Partial quotients of `x`; convenience for diagnostics.
pub fn partial_quotients(x: f64, depth: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut num, mut den) = dyadic(x);
    while out.len() < depth.min(MAX_DEPTH) && !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        num = std::mem::replace(&mut den, r);
    }
    out
}

/// Whether `p/q` is in lowest terms with positive denominator.
pub fn is_reduced(p: i128, q: i128) -> bool {
    q > 0 && BigInt::from(p).gcd(&BigInt::from(q)).abs() == BigInt::from(1u8)
}
