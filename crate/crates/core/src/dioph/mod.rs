//! Exponent approximation solvers.
//!
//! Every solver scans exponents in a fixed ascending order and compares
//! errors strictly, so the first best candidate wins and results are
//! deterministic. Exhausting a budget is reported through
//! `exhausted = true` together with the best candidate seen.

pub mod convergents;
pub mod kronecker;
pub mod lemma51;
pub mod rotation;
pub mod two_gen;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lognum::{FieldValue, LogScalar};
use crate::tuples::ExponentVector;

pub use convergents::{convergents, detect_rational};
pub use kronecker::kronecker_solve;
pub use lemma51::{lemma51_sequence, lemma51_witness, lemma51_witness_from, Lemma51Witness};
pub use rotation::{lemma55_witness, lemma55_witness_from, rotation_solve, Lemma55Witness, RotationHit};
pub use two_gen::{two_gen_solve, two_gen_solve_complex};

/// Default budget for one-dimensional scans.
pub const DEFAULT_K_MAX: u64 = 1_000_000;
/// Default budget for simultaneous (Kronecker) scans.
pub const DEFAULT_KRONECKER_K_MAX: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub epsilon: f64,
    pub k_max: u64,
    pub min_k: u64,
    pub min_l: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            epsilon: 1e-3,
            k_max: DEFAULT_K_MAX,
            min_k: 1,
            min_l: 1,
        }
    }
}

impl SearchConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        SearchConfig {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.k_max < 1 {
            return Err(Error::invalid("k_max must be at least 1"));
        }
        Ok(())
    }
}

/// An exponent vector together with the value it achieves.
///
/// `achieved` and `target` have one entry per approximated coordinate
/// (one for scalar problems). `abs_error` is the sup-norm distance between
/// the decoded achieved values and the target; `log_error` is the
/// corresponding error of the log-moduli.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentWitness<S: LogScalar> {
    pub exponents: ExponentVector,
    pub achieved: Vec<S>,
    pub target: Vec<S::Value>,
    pub abs_error: f64,
    pub log_error: f64,
    pub exhausted: bool,
}

impl<S: LogScalar> ExponentWitness<S> {
    pub fn new(exponents: ExponentVector, achieved: Vec<S>, target: Vec<S::Value>, exhausted: bool) -> Self {
        let abs_error = sup_error(&achieved, &target);
        let log_error = achieved
            .iter()
            .zip(&target)
            .map(|(a, t)| (a.log_mag() - t.modulus().ln()).abs())
            .fold(0.0, f64::max);
        ExponentWitness {
            exponents,
            achieved,
            target,
            abs_error,
            log_error,
            exhausted,
        }
    }

    /// The error recomputed from the stored values.
    pub fn recompute_error(&self) -> f64 {
        sup_error(&self.achieved, &self.target)
    }

    pub fn values(&self) -> Vec<S::Value> {
        self.achieved.iter().map(|a| a.to_value()).collect()
    }
}

fn sup_error<S: LogScalar>(achieved: &[S], target: &[S::Value]) -> f64 {
    achieved
        .iter()
        .zip(target)
        .map(|(a, t)| (a.to_value() - *t).modulus())
        .fold(0.0, f64::max)
}

/// Serialized as `{exponents, value, target, abs_error, exhausted}` with
/// decoded values; scalars appear unwrapped.
impl<S: LogScalar> Serialize for ExponentWitness<S>
where
    S::Value: Serialize,
{
    fn serialize<Z: Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = ser.serialize_struct("ExponentWitness", 5)?;
        st.serialize_field("exponents", &self.exponents)?;
        let values = self.values();
        if values.len() == 1 {
            st.serialize_field("value", &values[0])?;
            st.serialize_field("target", &self.target[0])?;
        } else {
            st.serialize_field("value", &values)?;
            st.serialize_field("target", &self.target)?;
        }
        st.serialize_field("abs_error", &self.abs_error)?;
        st.serialize_field("exhausted", &self.exhausted)?;
        st.end()
    }
}

/// Nearest integer to `t` with the given parity; ties go to the smaller.
pub(crate) fn nearest_with_parity(t: f64, odd: bool) -> f64 {
    let p = if odd { 1.0 } else { 0.0 };
    let half = (t - p) / 2.0;
    2.0 * (half - 0.5).ceil() + p
}

/// Reject non-finite inputs by name.
pub(crate) fn require_finite<V: FieldValue>(name: &str, v: V) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be finite")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_rounding() {
        assert_eq!(nearest_with_parity(24.01, false), 24.0);
        assert_eq!(nearest_with_parity(24.01, true), 25.0);
        assert_eq!(nearest_with_parity(24.0, true), 23.0);
        assert_eq!(nearest_with_parity(25.9, true), 25.0);
        assert_eq!(nearest_with_parity(26.1, true), 27.0);
        assert_eq!(nearest_with_parity(-0.4, false), 0.0);
        assert_eq!(nearest_with_parity(1.0, false), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::with_epsilon(0.0).validate().is_err());
        assert!(SearchConfig::with_epsilon(f64::NAN).validate().is_err());
        let mut c = SearchConfig::default();
        c.k_max = 0;
        assert!(c.validate().is_err());
        assert!(SearchConfig::default().validate().is_ok());
    }
}
