use serde::Serialize;

use super::orbit::exponents_with_total;
use super::sup_distance;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::lognum::{DecodePolicy, FieldValue, LogScalar};
use crate::tuples::{ExponentVector, MatrixTuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MembershipStatus {
    Confirmed,
    NotFoundWithinBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipHit<V> {
    pub exponents: ExponentVector,
    pub preimage: Vec<V>,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipVerdict<V> {
    pub status: MembershipStatus,
    pub witness: Option<MembershipHit<V>>,
    pub min_distance_found: f64,
    /// Exponent vectors examined.
    pub budget_used: u64,
}

impl<V> MembershipVerdict<V> {
    pub fn is_confirmed(&self) -> bool {
        self.status == MembershipStatus::Confirmed
    }
}

/// Probe `y` in `J(x)` through inverse orbits: scan `K` with
/// `growth_floor <= sum K <= budget` by ascending total, lexicographically
/// within a total, and confirm on the first `|T^{-K} y - x|_inf < delta`.
pub fn jset_membership<S: LogScalar>(
    tuple: &MatrixTuple<S>,
    x: &[S::Value],
    y: &[S::Value],
    delta: f64,
    growth_floor: u64,
    budget: u64,
    exec: Execution,
) -> Result<MembershipVerdict<S::Value>> {
    let n = tuple.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::invalid(format!("x and y need {n} coordinates")));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("need delta > 0, got {delta}")));
    }
    if !tuple.is_invertible() {
        return Err(Error::invalid(format!(
            "{} tuple has a singular member; inverse orbits are undefined",
            tuple.recipe().kind()
        )));
    }
    let y_log = crate::tuples::encode_vec::<S>(y)?;
    let policy = DecodePolicy::saturate();
    let distance = |k: &ExponentVector| -> (f64, Vec<S::Value>) {
        let pre = tuple
            .inverse_apply_log(k, &y_log)
            .and_then(|v| crate::tuples::decode_vec(&v, &policy));
        match pre {
            Ok(p) if p.iter().all(|v| v.is_finite()) => (sup_distance(&p, x), p),
            Ok(p) => (f64::INFINITY, p),
            Err(_) => (f64::INFINITY, Vec::new()),
        }
    };
    let mut min_distance = f64::INFINITY;
    let mut used = 0u64;
    for total in growth_floor..=budget {
        let level = exponents_with_total(tuple.len(), total);
        let results = exec::map(exec, &level, &distance);
        if let Some(pos) = exec::position_first(exec, &results, |(d, _)| *d < delta) {
            used += pos as u64 + 1;
            min_distance = results[..=pos].iter().map(|(d, _)| *d).fold(min_distance, f64::min);
            let (d, pre) = results[pos].clone();
            return Ok(MembershipVerdict {
                status: MembershipStatus::Confirmed,
                witness: Some(MembershipHit {
                    exponents: level[pos].clone(),
                    preimage: pre,
                    distance: d,
                }),
                min_distance_found: min_distance,
                budget_used: used,
            });
        }
        used += level.len() as u64;
        min_distance = results.iter().map(|(d, _)| *d).fold(min_distance, f64::min);
    }
    Ok(MembershipVerdict {
        status: MembershipStatus::NotFoundWithinBudget,
        witness: None,
        min_distance_found: min_distance,
        budget_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lognum::LogSignScalar;
    use crate::tuples::TupleRecipe;

    fn pair() -> MatrixTuple<LogSignScalar> {
        MatrixTuple::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap()
    }

    #[test]
    fn first_axis_reaches_the_target() {
        let v = jset_membership(&pair(), &[1.0, 0.0], &[1.0, 5.0], 0.05, 10, 80, Execution::Parallel).unwrap();
        assert!(v.is_confirmed());
        let w = v.witness.unwrap();
        assert!(w.distance < 0.05);
        assert!(w.exponents.total() >= 10u32.into());
    }

    #[test]
    fn planted_preimage() {
        let t = pair();
        let k0 = ExponentVector::from([7, 4]);
        let x = [0.6, -1.1];
        let y = t.power_product_apply(&k0, &x, &DecodePolicy::default()).unwrap();
        let v = jset_membership(&t, &x, &y, 1e-9, 11, 11, Execution::Sequential).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.exponents, k0);
        assert!(w.distance < 1e-12);
    }

    #[test]
    fn second_axis_stays_away() {
        let v = jset_membership(&pair(), &[0.0, 1.0], &[0.0, 0.0], 0.5, 1, 60, Execution::Parallel).unwrap();
        assert_eq!(v.status, MembershipStatus::NotFoundWithinBudget);
        assert!(v.min_distance_found >= 1.0);
        assert_eq!(v.budget_used, (2..=61).sum::<u64>());
    }

    #[test]
    fn modes_agree() {
        let t = pair();
        let a = jset_membership(&t, &[1.0, 0.0], &[-2.3, 0.7], 0.05, 1, 120, Execution::Sequential).unwrap();
        let b = jset_membership(&t, &[1.0, 0.0], &[-2.3, 0.7], 0.05, 1, 120, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singular_members_are_rejected() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::zero_pair(vec![1.5, 2.0])).unwrap();
        let r = jset_membership(&t, &[1.0, 0.0], &[1.0, 0.0], 0.1, 1, 5, Execution::Sequential);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
