//! Density of `(k/a - l) / (a^k (-1)^l)` in the reals, constructively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Beyond this, `l` and `a^k` no longer sit exactly in a double.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma51Witness {
    pub k: u64,
    pub l: u64,
    pub value: f64,
    pub target: f64,
    pub error: f64,
}

/// `(k/a - l) / (a^k (-1)^l)`.
pub fn lemma51_value(a: f64, k: u64, l: u64) -> f64 {
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    (k as f64 / a - l as f64) / (a.powi(k as i32) * sign)
}

/// Smallest `k >= floor` with `a^{-k} < epsilon / 2`.
pub fn lemma51_k(a: f64, epsilon: f64, floor: u64) -> u64 {
    let half = epsilon / 2.0;
    let guess = ((2.0 / epsilon).ln() / a.ln()).floor().max(1.0) as u64;
    let mut k = guess.max(1);
    while k > 1 && a.powi(-((k - 1) as i32)) < half {
        k -= 1;
    }
    while a.powi(-(k as i32)) >= half {
        k += 1;
    }
    k.max(floor).max(1)
}

fn check(a: f64, epsilon: f64) -> Result<()> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::invalid(format!("need a > 1, got {a}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("need epsilon > 0, got {epsilon}")));
    }
    Ok(())
}

fn witness(a: f64, x: f64, k: u64, l: u64) -> Lemma51Witness {
    let value = lemma51_value(a, k, l);
    Lemma51Witness {
        k,
        l,
        value,
        target: x,
        error: (value - x).abs(),
    }
}

/// `(k, l)` with `(k/a - l)/(a^k (-1)^l)` within `epsilon` of `x`.
///
/// `k` is the smallest integer with `a^{-k} < epsilon/2`; `l` is odd for
/// `x > 0` and even for `x < 0`, chosen as near as the parity allows. For
/// `x = 0`, `l = 1` is fixed and `k` is the smallest with `|value| < epsilon`.
pub fn lemma51_witness(a: f64, x: f64, epsilon: f64) -> Result<Lemma51Witness> {
    lemma51_witness_from(a, x, epsilon, 1)
}

/// As [`lemma51_witness`] with `k >= k_floor`.
pub fn lemma51_witness_from(a: f64, x: f64, epsilon: f64, k_floor: u64) -> Result<Lemma51Witness> {
    check(a, epsilon)?;
    if !x.is_finite() {
        return Err(Error::invalid("target must be finite"));
    }
    if x == 0.0 {
        let mut k = k_floor.max(1);
        loop {
            let w = witness(a, x, k, 1);
            if w.error < epsilon {
                return Ok(w);
            }
            k += 1;
        }
    }
    let mut k = lemma51_k(a, epsilon, k_floor);
    loop {
        let ak = a.powi(k as i32);
        if ak * (x.abs() + 1.0) + k as f64 > EXACT_LIMIT {
            return Err(Error::invalid(format!(
                "construction needs a^k = {ak:e} beyond exact double range"
            )));
        }
        let l = if x > 0.0 {
            let s = ((x + 1.0 / ak + k as f64 / (ak * a)) * ak / 2.0).round().max(1.0) as u64;
            2 * s - 1
        } else {
            let s = ((k as f64 / a - x * ak) / 2.0).round().max(1.0) as u64;
            2 * s
        };
        let w = witness(a, x, k, l);
        if w.error < epsilon {
            return Ok(w);
        }
        // only reachable when the clamp s >= 1 binds for |x| tiny
        k += 1;
    }
}

/// Witnesses for a strictly decreasing schedule, with `k` strictly
/// increasing along the sequence.
pub fn lemma51_sequence(a: f64, x: f64, schedule: &[f64]) -> Result<Vec<Lemma51Witness>> {
    if x == 0.0 {
        return Err(Error::invalid("sequence construction needs x != 0"));
    }
    check_schedule(schedule)?;
    let mut out: Vec<Lemma51Witness> = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let floor = out.last().map_or(1, |w| w.k + 1);
        out.push(lemma51_witness_from(a, x, eps, floor)?);
    }
    Ok(out)
}

pub(crate) fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::invalid("schedule is empty"));
    }
    if schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid("schedule tolerances must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("schedule must be strictly decreasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{Signed, ToPrimitive};

    fn exact_value(a: f64, k: u64, l: u64) -> BigRational {
        let a = BigRational::from_float(a).unwrap();
        let num = BigRational::from_integer(k.into()) / a.clone() - BigRational::from_integer(l.into());
        let mut den = num_traits::pow(a, k as usize);
        if l % 2 == 1 {
            den = -den;
        }
        num / den
    }

    #[test]
    fn pinned_examples() {
        let w = lemma51_witness(2.0, 1.0, 0.1).unwrap();
        assert_eq!((w.k, w.l, w.value), (5, 35, 1.015625));
        let w = lemma51_witness(2.0, -1.0, 0.1).unwrap();
        assert_eq!((w.k, w.l, w.value), (5, 34, -0.984375));
        let w = lemma51_witness(2.0, 0.0, 0.1).unwrap();
        assert_eq!((w.k, w.l, w.value), (2, 1, 0.0));
    }

    #[test]
    fn pinned_example_is_nearest_odd_l() {
        let target = BigRational::from_integer(1.into());
        let best = (1..=100u64)
            .step_by(2)
            .min_by_key(|&l| {
                let e = (exact_value(2.0, 5, l) - &target).abs();
                (e * BigRational::from_integer(1_000_000_000i64.into())).to_integer()
            })
            .unwrap();
        assert_eq!(best, 35);
    }

    #[test]
    fn k_is_minimal() {
        assert_eq!(lemma51_k(2.0, 0.1, 1), 5);
        assert_eq!(lemma51_k(2.0, 10.0, 1), 1);
        assert_eq!(lemma51_k(1.5, 1e-6, 1), 36);
        for &(a, eps) in &[(1.5, 1e-3), (std::f64::consts::E, 1e-6), (2.0, 1e-1)] {
            let k = lemma51_k(a, eps, 1);
            assert!(a.powi(-(k as i32)) < eps / 2.0);
            assert!(k == 1 || a.powi(-((k - 1) as i32)) >= eps / 2.0);
        }
    }

    #[test]
    fn values_agree_with_exact_rationals() {
        for &x in &[3.7, -9.2, 0.01, -0.4] {
            for &eps in &[1e-1, 1e-3, 1e-6] {
                let w = lemma51_witness(1.5, x, eps).unwrap();
                let exact = exact_value(1.5, w.k, w.l);
                let err = (exact - BigRational::from_float(x).unwrap()).abs().to_f64().unwrap();
                assert!(err < eps, "x={x} eps={eps}: {w:?}");
                assert_eq!(w.l % 2 == 1, x > 0.0);
            }
        }
    }

    #[test]
    fn sequences_increase() {
        let seq = lemma51_sequence(2.0, 1.0, &[0.1, 0.01, 0.001]).unwrap();
        assert_eq!(seq.len(), 3);
        assert!(seq[0].k < seq[1].k && seq[1].k < seq[2].k);
        for (w, eps) in seq.iter().zip([0.1, 0.01, 0.001]) {
            assert!(w.error < eps);
            // numerator grows like |x| a^k
            assert!((w.k as f64 / 2.0 - w.l as f64).abs() >= 2f64.powi(w.k as i32) / 2.0);
        }
        assert_eq!(lemma51_sequence(2.0, 5.0, &[10.0]).unwrap()[0].k, 1);
        assert_eq!(lemma51_sequence(2.0, 1.0, &[0.1]).unwrap()[0], lemma51_witness(2.0, 1.0, 0.1).unwrap());
        assert!(lemma51_sequence(2.0, 0.0, &[0.1]).is_err());
        assert!(lemma51_sequence(2.0, 1.0, &[0.1, 0.2]).is_err());
    }
}
