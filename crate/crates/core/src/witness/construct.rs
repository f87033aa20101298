use num_bigint::BigUint;
use num_complex::Complex64;

use super::{sup_distance, Construction, Substitution, WitnessRecord, WitnessSequence};
use crate::dioph::lemma51::check_schedule;
use crate::dioph::{
    lemma51_witness_from, lemma55_witness_from, two_gen_solve, two_gen_solve_complex, SearchConfig, DEFAULT_K_MAX,
};
use crate::error::{Error, Result};
use crate::lognum::{DecodePolicy, FieldValue, LogScalar};
use crate::tuples::{decode_vec, encode_vec, ExponentVector, MatrixTuple, RecipeParams};

/// Witness sequence for `y` in `J(x)` with `x = (x1, 0, ..., 0)`, one
/// record per schedule entry.
///
/// Diagonal pairs take `(k, l)` from the two-generator solver aimed at
/// `y_1 / x1` and put `y_j / (a_j^k b_j^l)` in the tail. Perturbed-scalar
/// pairs aim the one-dimensional constructions at `-x1 / w_n` and perturb
/// every coordinate by the explicit formulas. A zero in the coordinate the
/// formulas divide by is replaced by half the last tolerance and reported
/// as a [`Substitution`]; targets on the orbit of `x` under a perturbed
/// -scalar pair are witnessed by `x` itself.
pub fn jset_witness<S: LogScalar>(
    tuple: &MatrixTuple<S>,
    x1: S::Value,
    target: &[S::Value],
    schedule: &[f64],
) -> Result<WitnessSequence<S>> {
    check_schedule(schedule)?;
    let n = tuple.dim();
    if target.len() != n {
        return Err(Error::invalid(format!("target needs {n} coordinates, got {}", target.len())));
    }
    if x1.modulus() == 0.0 {
        return Err(Error::invalid("x1 = 0: witnesses for the zero base follow by scaling"));
    }
    if !x1.is_finite() || target.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("base and target must be finite"));
    }
    let mut base = vec![S::Value::zero(); n];
    base[0] = x1;
    let ctx = Ctx {
        tuple,
        x1,
        base,
        target: target.to_vec(),
        schedule,
    };
    match tuple.recipe().params {
        RecipeParams::DiagReal { a, b, .. } => ctx.diagonal(Solver2::Real(a, b)),
        RecipeParams::DiagComplex { a, b, .. } => ctx.diagonal(Solver2::Complex(a, b)),
        RecipeParams::TriReal { a1, .. } => ctx.triangular(Solver1::Real(a1)),
        RecipeParams::TriComplex { a, theta, .. } => ctx.triangular(Solver1::Complex(a, theta)),
        _ => Err(Error::invalid(format!(
            "witness sequences need a DiagReal, DiagComplex, TriReal or TriComplex tuple, got {}",
            tuple.recipe().kind()
        ))),
    }
}

enum Solver2 {
    Real(f64, f64),
    Complex(Complex64, Complex64),
}

enum Solver1 {
    Real(f64),
    Complex(f64, f64),
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im != 0.0 {
        return Err(Error::invalid(format!("{what} must be real for a real tuple")));
    }
    Ok(z.re)
}

struct Ctx<'a, S: LogScalar> {
    tuple: &'a MatrixTuple<S>,
    x1: S::Value,
    base: Vec<S::Value>,
    target: Vec<S::Value>,
    schedule: &'a [f64],
}

impl<S: LogScalar> Ctx<'_, S> {
    fn last_tolerance(&self) -> f64 {
        *self.schedule.last().expect("schedule checked nonempty")
    }

    fn finish(self, substitution: Option<Substitution<S::Value>>, records: Vec<WitnessRecord<S>>) -> WitnessSequence<S> {
        WitnessSequence {
            kind: self.tuple.recipe().kind().to_string(),
            base: self.base,
            target: self.target,
            schedule: self.schedule.to_vec(),
            substitution,
            records,
        }
    }

    /// Replace a zero target coordinate by half the last tolerance.
    fn substitute(&self, coordinate: usize) -> (Vec<S::Value>, Option<Substitution<S::Value>>, f64) {
        let mut w = self.target.clone();
        if w[coordinate].modulus() != 0.0 {
            return (w, None, 1.0);
        }
        let delta = S::Value::from_real(self.last_tolerance() / 2.0);
        w[coordinate] = delta;
        let sub = Substitution {
            coordinate: coordinate + 1,
            original: S::Value::zero(),
            replacement: delta,
        };
        (w, Some(sub), 0.5)
    }

    fn diagonal(self, solver: Solver2) -> Result<WitnessSequence<S>> {
        let (w, substitution, shrink) = self.substitute(0);
        let ratio = (w[0] / self.x1).to_complex();
        let x1_mod = self.x1.modulus();
        let x1 = S::encode(self.x1)?;
        let tail = encode_vec::<S>(&self.target[1..])?;
        let policy = DecodePolicy::saturate();
        let mut records: Vec<WitnessRecord<S>> = Vec::with_capacity(self.schedule.len());
        let mut prev: Option<(u64, BigUint)> = None;
        for (i, &eps) in self.schedule.iter().enumerate() {
            let mut min_k = prev.as_ref().map_or(1, |(k, _)| k + 1);
            let record = loop {
                let cfg = SearchConfig {
                    epsilon: shrink * eps / x1_mod,
                    k_max: DEFAULT_K_MAX,
                    min_k,
                    min_l: 1,
                };
                let (exponents, exhausted) = match solver {
                    Solver2::Real(a, b) => {
                        let hit = two_gen_solve(a, b, real_part(ratio, "y_1 / x_1")?, &cfg)?;
                        (hit.exponents, hit.exhausted)
                    }
                    Solver2::Complex(a, b) => {
                        let hit = two_gen_solve_complex(a, b, ratio, &cfg)?;
                        (hit.exponents, hit.exhausted)
                    }
                };
                if exhausted {
                    return Err(Error::Exhausted(format!(
                        "no (k, l) with k in [{min_k}, {DEFAULT_K_MAX}] meets tolerance {eps:e} at step {}",
                        i + 1
                    )));
                }
                let k = exponents.to_u64s().expect("solver exponents are u64")[0];
                let power = self.tuple.power_product_entries(&exponents)?;
                let mut point = vec![x1];
                for (y, d) in tail.iter().zip(&power.diag[1..]) {
                    point.push(y.div(*d)?);
                }
                let image = power.apply_log(&point)?;
                let image_error = sup_distance(&decode_vec(&image, &policy)?, &self.target);
                let base_error = sup_distance(&decode_vec(&point, &policy)?, &self.base);
                let total = exponents.total();
                let grows = prev.as_ref().is_none_or(|(_, t)| &total > t);
                if grows && image_error <= eps && base_error <= eps {
                    prev = Some((k, total));
                    break WitnessRecord {
                        index: i + 1,
                        point,
                        exponents,
                        image,
                        image_error,
                        base_error,
                        construction: Construction::Diagonal,
                    };
                }
                min_k = k + 1;
            };
            records.push(record);
        }
        Ok(self.finish(substitution, records))
    }

    /// `T^{(k, l + 2i)} x = T^{(k, l)} x` when `x` lies on the first axis.
    fn orbit_point_records(&self) -> Result<Option<Vec<WitnessRecord<S>>>> {
        if self.target[1..].iter().any(|v| v.modulus() != 0.0) || self.target[0].modulus() == 0.0 {
            return Ok(None);
        }
        let (a1, _) = super::perturbed_values(self.tuple).expect("triangular tuple");
        let guess = ((self.target[0] / self.x1).modulus().ln() / a1.norm().ln()).round();
        let eps = self.last_tolerance();
        let base = encode_vec::<S>(&self.base)?;
        let policy = DecodePolicy::saturate();
        let k0 = guess.max(0.0) as u64;
        for k in [k0, k0 + 1, k0.saturating_sub(1)] {
            for l in [0u64, 1] {
                let image = self.tuple.apply_log(&ExponentVector::from([k, l]), &base)?;
                let err = sup_distance(&decode_vec(&image, &policy)?, &self.target);
                if err < eps {
                    let mut records = Vec::with_capacity(self.schedule.len());
                    for i in 0..self.schedule.len() {
                        let exponents = ExponentVector::from([k, l + 2 * i as u64]);
                        let image = self.tuple.apply_log(&exponents, &base)?;
                        records.push(WitnessRecord {
                            index: i + 1,
                            point: base.clone(),
                            exponents,
                            image_error: sup_distance(&decode_vec(&image, &policy)?, &self.target),
                            image,
                            base_error: 0.0,
                            construction: Construction::OrbitPoint,
                        });
                    }
                    return Ok(Some(records));
                }
            }
        }
        Ok(None)
    }

    fn triangular(self, solver: Solver1) -> Result<WitnessSequence<S>> {
        if let Some(records) = self.orbit_point_records()? {
            return Ok(self.finish(None, records));
        }
        let n = self.base.len();
        let (w, substitution, shrink) = self.substitute(n - 1);
        let t = (-self.x1 / w[n - 1]).to_complex();
        let w_norm = w.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        let ln_a = match solver {
            Solver1::Real(a1) => a1.ln(),
            Solver1::Complex(a, _) => a.ln(),
        };
        let x1 = S::encode(self.x1)?;
        let wl = encode_vec::<S>(&w)?;
        let policy = DecodePolicy::saturate();
        let mut records: Vec<WitnessRecord<S>> = Vec::with_capacity(self.schedule.len());
        let mut prev: Option<(u64, BigUint)> = None;
        for (i, &eps) in self.schedule.iter().enumerate() {
            let e = shrink * eps;
            // |F/d - t| < tau keeps every image coordinate within e
            let tau = e * t.norm() / (2.0 * w_norm + 2.0 * e);
            // a^k >= 2 |w| / e keeps the perturbations within e
            let size_floor = ((2.0 * w_norm / e).ln() / ln_a).ceil().max(1.0) as u64;
            let mut floor = size_floor.max(prev.as_ref().map_or(1, |(k, _)| k + 1));
            let record = loop {
                let (k, l) = match solver {
                    Solver1::Real(a1) => {
                        let hit = lemma51_witness_from(a1, real_part(t, "-x_1 / w_n")?, tau, floor)?;
                        (hit.k, BigUint::from(hit.l))
                    }
                    Solver1::Complex(a, theta) => {
                        let hit = lemma55_witness_from(a, theta, t, tau, floor)?;
                        (hit.k, hit.l)
                    }
                };
                let exponents = ExponentVector::new(vec![BigUint::from(k), l]);
                let power = self.tuple.power_product_entries(&exponents)?;
                let d = power.diag[0];
                let f = power
                    .corner_factor
                    .expect("perturbed-scalar products carry a corner")
                    .to_log()?;
                let q = x1.div(wl[n - 1].mul(f))?;
                let mut point = Vec::with_capacity(n);
                point.push(x1.sub(wl[0].mul(q)));
                for wj in &wl[1..n - 1] {
                    point.push(wj.mul(q).neg());
                }
                let last = x1.div(f)?.neg();
                point.push(last);
                let c = d.mul(q).neg();
                let image: Vec<S> = wl.iter().map(|wj| c.mul(*wj)).collect();
                let image_error = sup_distance(&decode_vec(&image, &policy)?, &self.target);
                // perturbations directly: x_i1 - x1 cancels in doubles
                let base_error = wl[..n - 1]
                    .iter()
                    .map(|wj| wj.mul(q))
                    .chain([last])
                    .map(|p| if p.is_zero() { 0.0 } else { p.log_mag().exp() })
                    .fold(0.0, f64::max);
                let total = exponents.total();
                let grows = prev.as_ref().is_none_or(|(_, t)| &total > t);
                if grows && image_error <= eps && base_error <= eps {
                    prev = Some((k, total));
                    break WitnessRecord {
                        index: i + 1,
                        point,
                        exponents,
                        image,
                        image_error,
                        base_error,
                        construction: Construction::Triangular {
                            x1: self.x1,
                            w: w.clone(),
                        },
                    };
                }
                floor = k + 1;
            };
            records.push(record);
        }
        Ok(self.finish(substitution, records))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lognum::{LogArgScalar, LogSignScalar};
    use crate::tuples::{TupleRecipe, DEFAULT_THETA};

    #[test]
    fn tri_real_displayed_limits() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::tri_real(2, 2.0)).unwrap();
        let seq = jset_witness(&t, 1.0, &[0.0, 1.0], &[0.1, 0.01, 0.001]).unwrap();
        seq.validate(&t).unwrap();
        for r in &seq.records {
            let ks = r.exponents.to_u64s().unwrap();
            let f = ks[0] as f64 / 2.0 - ks[1] as f64;
            let x = r.point_values();
            assert_eq!(x[0], 1.0);
            assert!((x[1] + 1.0 / f).abs() < 1e-15 * x[1].abs().max(1.0));
        }
        assert!(seq.substitution.is_none());
        let last = seq.records.last().unwrap().image_values();
        assert!(last[0].abs() < 1e-3 && (last[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_last_coordinate_is_substituted() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::tri_real(3, 2.0)).unwrap();
        let seq = jset_witness(&t, 1.0, &[0.5, 2.0, 0.0], &[0.1, 0.01]).unwrap();
        let sub = seq.substitution.unwrap();
        assert_eq!((sub.coordinate, sub.original, sub.replacement), (3, 0.0, 0.005));
        seq.validate(&t).unwrap();
    }

    #[test]
    fn orbit_targets_need_no_perturbation() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::tri_real(2, 2.0)).unwrap();
        let seq = jset_witness(&t, 1.0, &[-2.0, 0.0], &[1e-12, 1e-13]).unwrap();
        for (i, r) in seq.records.iter().enumerate() {
            assert_eq!(r.point_values(), vec![1.0, 0.0]);
            assert_eq!(r.exponents, ExponentVector::from([1, 1 + 2 * i as u64]));
            assert_eq!(r.base_error, 0.0);
        }
        seq.validate(&t).unwrap();

        let d = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        let seq = jset_witness(&d, 1.0, &[-1.5, 0.0], &[1e-12]).unwrap();
        assert_eq!(seq.records[0].exponents, ExponentVector::from([1, 1]));
        assert_eq!(seq.records[0].point_values(), vec![1.0, 0.0]);
    }

    #[test]
    fn tri_complex_sequence_validates() {
        let t = MatrixTuple::<LogArgScalar>::build(&TupleRecipe::tri_complex(2, 2.0, DEFAULT_THETA)).unwrap();
        let y = [Complex64::new(0.3, -0.4), Complex64::new(-1.2, 0.7)];
        let seq = jset_witness(&t, Complex64::new(1.0, 0.0), &y, &[0.1, 0.01]).unwrap();
        seq.validate(&t).unwrap();
        assert!(seq.records[1].exponents.get(1).bits() > 64);
    }

    #[test]
    fn mismatched_inputs() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::kronecker(1)).unwrap();
        assert!(matches!(jset_witness(&t, 1.0, &[1.0], &[0.1]), Err(Error::InvalidArgument(_))));
        let d = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        assert!(jset_witness(&d, 0.0, &[1.0, 1.0], &[0.1]).is_err());
        assert!(jset_witness(&d, 1.0, &[1.0], &[0.1]).is_err());
        assert!(jset_witness(&d, 1.0, &[1.0, 1.0], &[0.1, 0.2]).is_err());
    }
}
