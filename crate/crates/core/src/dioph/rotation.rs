//! Irrational rotations and the complex construction built on them.

use std::f64::consts::{LN_2, PI, TAU};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};

use super::convergents::convergents;
use crate::error::{Error, Result};
use crate::lognum::{biguint_from_ln, reduce_arg, Exponent, LogArgScalar, LogScalar};

/// Fallback scan length when no convergent bounds the search.
const DEFAULT_WINDOW: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationHit {
    pub k: u64,
    pub distance: f64,
    pub exhausted: bool,
}

/// `|e^{-ik theta} - e^{i phi}|`.
pub fn rotation_distance(theta: f64, phi: f64, k: u64) -> f64 {
    let angle = reduce_arg(reduce_arg(k as f64 * theta) + phi);
    2.0 * (angle / 2.0).sin().abs()
}

/// Scan length that provably contains a hit: if `q_m` is the first
/// convergent denominator of `theta / 2 pi` with `2 pi / q_m < epsilon`,
/// any `q_m + q_{m-1}` consecutive multiples of `theta` leave gaps below
/// `2 pi / q_m` on the circle.
pub fn rotation_window(theta: f64, epsilon: f64) -> Option<u64> {
    let cf = convergents(theta / TAU, 64);
    let m = cf.iter().position(|&(_, q)| TAU / (q as f64) < epsilon)?;
    let q_prev = if m == 0 { 0 } else { cf[m - 1].1 };
    u64::try_from(cf[m].1 + q_prev).ok()
}

/// Smallest `k` in `[k_min, k_max]` with `|e^{-ik theta} - e^{i phi}| < epsilon`.
///
/// Without `k_max` the scan is bounded by [`rotation_window`]. On
/// exhaustion the closest `k` is returned with `exhausted = true`.
pub fn rotation_solve(theta: f64, phi: f64, epsilon: f64, k_min: u64, k_max: Option<u64>) -> Result<RotationHit> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::invalid("theta and phi must be finite"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("need epsilon > 0, got {epsilon}")));
    }
    let window = rotation_window(theta, epsilon).unwrap_or(DEFAULT_WINDOW);
    let last = k_max.unwrap_or_else(|| k_min.saturating_add(window));
    let mut best = RotationHit {
        k: k_min,
        distance: f64::INFINITY,
        exhausted: true,
    };
    for k in k_min..=last {
        let d = rotation_distance(theta, phi, k);
        if d < epsilon {
            return Ok(RotationHit {
                k,
                distance: d,
                exhausted: false,
            });
        }
        if d < best.distance {
            best.k = k;
            best.distance = d;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma55Witness {
    pub k: u64,
    pub l: BigUint,
    pub value: LogArgScalar,
    pub target: Complex64,
    pub error: f64,
}

impl Serialize for Lemma55Witness {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("Lemma55Witness", 5)?;
        st.serialize_field("k", &self.k)?;
        match self.l.to_u64() {
            Some(l) => st.serialize_field("l", &l)?,
            None => st.serialize_field("l", &self.l.to_string())?,
        }
        st.serialize_field("value", &self.value.to_value())?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("error", &self.error)?;
        st.end()
    }
}

/// `(k/(a e^{i theta}) - l) / (a^k e^{ik theta} (-1)^l)` in the log domain.
pub fn lemma55_value(a: f64, theta: f64, k: u64, l: &BigUint) -> Result<LogArgScalar> {
    let a1 = LogArgScalar::from_polar_log(a.ln(), theta)?;
    let minus_one = LogArgScalar::from_polar_log(0.0, PI)?;
    let num = LogArgScalar::from_integer(&k)
        .mul(a1.recip()?)
        .sub(LogArgScalar::from_integer(l));
    let den = a1.pow(&k)?.mul(minus_one.pow(l)?);
    num.div(den)
}

/// `(k, l)` with the value above within `epsilon` of `w`, built by
/// choosing `k` with `|e^{-ik theta} - e^{i arg w}| < epsilon/(4|w|)` and
/// `k / a^{k-1} < epsilon/4`, then the odd `l = 2s - 1` with `s` nearest
/// to `(|w| a^k + 1)/2`.
pub fn lemma55_witness(a: f64, theta: f64, w: Complex64, epsilon: f64) -> Result<Lemma55Witness> {
    lemma55_witness_from(a, theta, w, epsilon, 1)
}

/// As [`lemma55_witness`] with `k >= k_floor`.
pub fn lemma55_witness_from(a: f64, theta: f64, w: Complex64, epsilon: f64, k_floor: u64) -> Result<Lemma55Witness> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::invalid(format!("need a > 1, got {a}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("need epsilon > 0, got {epsilon}")));
    }
    if !(w.norm() > 0.0) || !w.norm().is_finite() {
        return Err(Error::invalid("need a finite target w != 0"));
    }
    let la = a.ln();
    let modulus = w.norm();
    let tol = epsilon / (4.0 * modulus);
    let bound = (epsilon / 4.0).ln();
    let mut k_min = k_floor.max(1);
    let k = loop {
        let hit = rotation_solve(theta, w.arg(), tol, k_min, None)?;
        if hit.exhausted {
            return Err(Error::invalid(format!(
                "no rotation within {tol:e} of arg w from k = {k_min}"
            )));
        }
        // k / a^{k-1} < epsilon / 4, compared in logs
        if (hit.k as f64).ln() - (hit.k - 1) as f64 * la < bound {
            break hit.k;
        }
        k_min = hit.k + 1;
    };
    let ln_half = modulus.ln() + k as f64 * la - LN_2;
    let s = if ln_half < 50.0 {
        let ak = a.powi(k as i32);
        BigUint::from(((modulus * ak + 1.0) / 2.0).round().max(1.0) as u64)
    } else {
        // the +1 is far below the precision of the logarithm here
        biguint_from_ln(ln_half)
    };
    let l = (s << 1u8) - BigUint::one();
    debug_assert!(l.is_odd());
    let value = lemma55_value(a, theta, k, &l)?;
    let error = (value.to_value() - w).norm();
    Ok(Lemma55Witness {
        k,
        l,
        value,
        target: w,
        error,
    })
}
