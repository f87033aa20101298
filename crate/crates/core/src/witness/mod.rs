//! J-set witnesses, membership probes, certificates and orbits.
//!
//! A [`WitnessSequence`] records points `x_i -> x` and exponent vectors
//! `K_i` with strictly increasing totals such that `T^{K_i} x_i -> y`. Every
//! record stores its points in the log domain together with the data it
//! was derived from, so [`WitnessSequence::validate`] can re-check it
//! independently of the construction.

mod certificate;
mod construct;
mod membership;
mod orbit;
mod verify;

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::dioph::lemma51::check_schedule;
use crate::error::{Error, Result};
use crate::lognum::{FieldValue, LogScalar};
use crate::tuples::{decode_vec, ExponentVector, MatrixTuple, Member};
use crate::lognum::DecodePolicy;

pub use certificate::{non_hc_certificate, Certificate, CertificateVerdict, Obstruction, ObstructionReason};
pub use construct::jset_witness;
pub use membership::{jset_membership, MembershipHit, MembershipStatus, MembershipVerdict};
pub use orbit::{exponents_with_total, orbit_points, Orbit, OrbitPoint};

/// Relative tolerance for re-evaluated points and images.
pub const REVERIFY_RTOL: f64 = 1e-9;

/// How a record's point was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction<V> {
    /// Tail coordinates are the target divided by the diagonal powers.
    Diagonal,
    /// The point is the base and the image an exact orbit point.
    OrbitPoint,
    /// Perturbed-scalar formulas from the first coordinate `x1` and the
    /// target `w` actually aimed at.
    Triangular { x1: V, w: Vec<V> },
}

/// A target coordinate replaced before construction (a zero where the
/// formulas divide by it). The limit set is closed, so witnesses for the
/// replacement are within the schedule of the original target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Substitution<V> {
    /// 1-based.
    pub coordinate: usize,
    pub original: V,
    pub replacement: V,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessRecord<S: LogScalar> {
    /// 1-based position in the schedule.
    pub index: usize,
    pub point: Vec<S>,
    pub exponents: ExponentVector,
    pub image: Vec<S>,
    /// `|image - y|_inf`.
    pub image_error: f64,
    /// `|point - x|_inf`.
    pub base_error: f64,
    pub construction: Construction<S::Value>,
}

impl<S: LogScalar> WitnessRecord<S> {
    pub fn point_values(&self) -> Vec<S::Value> {
        self.point.iter().map(|s| s.to_value()).collect()
    }

    pub fn image_values(&self) -> Vec<S::Value> {
        self.image.iter().map(|s| s.to_value()).collect()
    }
}

impl<S: LogScalar> Serialize for WitnessRecord<S>
where
    S::Value: Serialize,
{
    fn serialize<Z: Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = ser.serialize_struct("WitnessRecord", 8)?;
        st.serialize_field("i", &self.index)?;
        st.serialize_field("x_i", &self.point_values())?;
        st.serialize_field("x_i_log", &self.point)?;
        st.serialize_field("K_i", &self.exponents)?;
        st.serialize_field("image", &self.image_values())?;
        st.serialize_field("image_error", &self.image_error)?;
        st.serialize_field("base_error", &self.base_error)?;
        st.serialize_field("construction", &self.construction)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSequence<S: LogScalar> {
    pub kind: String,
    pub base: Vec<S::Value>,
    pub target: Vec<S::Value>,
    pub schedule: Vec<f64>,
    pub substitution: Option<Substitution<S::Value>>,
    pub records: Vec<WitnessRecord<S>>,
}

impl<S: LogScalar> Serialize for WitnessSequence<S>
where
    S::Value: Serialize,
{
    fn serialize<Z: Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = ser.serialize_struct("WitnessSequence", 6)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("base", &self.base)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("schedule", &self.schedule)?;
        st.serialize_field("substitution", &self.substitution)?;
        st.serialize_field("records", &self.records)?;
        st.end()
    }
}

fn sup_distance<V: FieldValue>(a: &[V], b: &[V]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x - *y).modulus()).fold(0.0, f64::max)
}

/// `|a / b - 1|` for log-domain scalars; two zeros agree.
fn log_relative_gap<S: LogScalar>(a: &S, b: &S) -> f64 {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        (false, false) => {
            let dl = a.log_mag() - b.log_mag();
            let da = crate::lognum::reduce_arg(a.phase() - b.phase());
            (Complex64::new(dl, da).exp() - 1.0).norm()
        }
    }
}

fn perturbed_values<S: LogScalar>(tuple: &MatrixTuple<S>) -> Option<(Complex64, Complex64)> {
    match tuple.members() {
        [Member::PerturbedScalar { value: a1, .. }, Member::PerturbedScalar { value: a2, .. }] => {
            Some((a1.to_complex(), a2.to_complex()))
        }
        _ => None,
    }
}

impl<S: LogScalar> WitnessSequence<S> {
    pub fn totals(&self) -> Vec<BigUint> {
        self.records.iter().map(|r| r.exponents.total()).collect()
    }

    /// Re-check every invariant from the stored records: exponent totals
    /// strictly increase, each image is the power product of its point to
    /// relative error [`REVERIFY_RTOL`], and both errors stay within the
    /// schedule.
    pub fn validate(&self, tuple: &MatrixTuple<S>) -> Result<()> {
        check_schedule(&self.schedule)?;
        let n = tuple.dim();
        if self.base.len() != n || self.target.len() != n {
            return Err(Error::witness(format!("base and target need dimension {n}")));
        }
        if self.records.len() != self.schedule.len() {
            return Err(Error::witness(format!(
                "{} records for a schedule of {}",
                self.records.len(),
                self.schedule.len()
            )));
        }
        let mut previous: Option<BigUint> = None;
        for (rec, &eps) in self.records.iter().zip(&self.schedule) {
            let i = rec.index;
            let fail = |what: String| Err(Error::witness(format!("record {i}: {what}")));
            let total = rec.exponents.total();
            if previous.as_ref().is_some_and(|p| &total <= p) {
                return fail(format!("exponent total {total} does not increase"));
            }
            previous = Some(total);
            if rec.point.len() != n || rec.image.len() != n {
                return fail(format!("point and image need dimension {n}"));
            }
            if !(rec.image_error <= eps) || !(rec.base_error <= eps) {
                return fail(format!(
                    "stored errors ({:e}, {:e}) exceed schedule {eps:e}",
                    rec.image_error, rec.base_error
                ));
            }
            let (image_error, base_error) = match &rec.construction {
                Construction::Triangular { x1, w } => {
                    let (a1, a2) = perturbed_values(tuple)
                        .ok_or_else(|| Error::witness("triangular record on a non-triangular tuple"))?;
                    let w: Vec<Complex64> = w.iter().map(|v| v.to_complex()).collect();
                    let case = verify::TriangularCase {
                        a1,
                        a2,
                        k: rec.exponents.get(0),
                        l: rec.exponents.get(1),
                        x1: x1.to_complex(),
                        w: &w,
                        base: &self.base,
                        target: &self.target,
                    };
                    let hp = verify::check_triangular(&case, &rec.point, &rec.image);
                    if !(hp.point_gap <= REVERIFY_RTOL) {
                        return fail(format!("stored point is off by relative {:e}", hp.point_gap));
                    }
                    if !(hp.image_gap <= REVERIFY_RTOL) {
                        return fail(format!("stored image is off by relative {:e}", hp.image_gap));
                    }
                    (hp.image_error, hp.base_error)
                }
                Construction::Diagonal | Construction::OrbitPoint => {
                    let recomputed = tuple.apply_log(&rec.exponents, &rec.point)?;
                    let gap = recomputed
                        .iter()
                        .zip(&rec.image)
                        .map(|(a, b)| log_relative_gap(a, b))
                        .fold(0.0, f64::max);
                    if !(gap <= REVERIFY_RTOL) {
                        return fail(format!("image differs from T^K x_i by relative {gap:e}"));
                    }
                    let policy = DecodePolicy::saturate();
                    let image = decode_vec(&recomputed, &policy)?;
                    let point = decode_vec(&rec.point, &policy)?;
                    if matches!(rec.construction, Construction::OrbitPoint) && point != self.base {
                        return fail("orbit-point record does not sit at the base".into());
                    }
                    (sup_distance(&image, &self.target), sup_distance(&point, &self.base))
                }
            };
            if !(image_error <= eps) {
                return fail(format!("image error {image_error:e} exceeds {eps:e}"));
            }
            if !(base_error <= eps) {
                return fail(format!("base error {base_error:e} exceeds {eps:e}"));
            }
        }
        Ok(())
    }

    /// The sequence for base `lambda x` and target `lambda y`: points and
    /// images are multiplied by `lambda`, errors and schedule by `|lambda|`.
    pub fn scaled(&self, lambda: S::Value) -> Result<Self> {
        if lambda.modulus() == 0.0 || !lambda.is_finite() {
            return Err(Error::invalid("scaling factor must be finite and nonzero"));
        }
        let l = S::encode(lambda)?;
        let m = lambda.modulus();
        let scale_vec = |v: &[S]| v.iter().map(|s| s.mul(l)).collect::<Vec<_>>();
        let scale_vals = |v: &[S::Value]| v.iter().map(|&s| s * lambda).collect::<Vec<_>>();
        let records = self
            .records
            .iter()
            .map(|r| WitnessRecord {
                index: r.index,
                point: scale_vec(&r.point),
                exponents: r.exponents.clone(),
                image: scale_vec(&r.image),
                image_error: r.image_error * m,
                base_error: r.base_error * m,
                construction: match &r.construction {
                    Construction::Triangular { x1, w } => Construction::Triangular {
                        x1: *x1 * lambda,
                        w: scale_vals(w),
                    },
                    other => other.clone(),
                },
            })
            .collect();
        Ok(WitnessSequence {
            kind: self.kind.clone(),
            base: scale_vals(&self.base),
            target: scale_vals(&self.target),
            schedule: self.schedule.iter().map(|e| e * m).collect(),
            substitution: self.substitution.map(|s| Substitution {
                replacement: s.replacement * lambda,
                original: s.original * lambda,
                ..s
            }),
            records,
        })
    }
}

/// Diagonal extraction: from sequence `m`, witnessing `y` in `J(x^(m))`,
/// take the first record whose total exceeds the previous pick and whose
/// image and base errors, measured against `y` and the new `base`, are
/// below `tolerances[m]`. The picks witness `y` in `J(base)` under the
/// schedule `tolerances`.
pub fn diagonal_extraction<S: LogScalar>(
    sequences: &[WitnessSequence<S>],
    base: &[S::Value],
    tolerances: &[f64],
) -> Result<WitnessSequence<S>> {
    check_schedule(tolerances)?;
    if sequences.len() != tolerances.len() {
        return Err(Error::invalid(format!(
            "{} sequences for {} tolerances",
            sequences.len(),
            tolerances.len()
        )));
    }
    let first = &sequences[0];
    if sequences.iter().any(|s| s.target != first.target || s.kind != first.kind) {
        return Err(Error::invalid("sequences must share tuple kind and target"));
    }
    if base.len() != first.base.len() {
        return Err(Error::invalid("base dimension differs from the sequences"));
    }
    let policy = DecodePolicy::saturate();
    let mut records = Vec::with_capacity(sequences.len());
    let mut previous: Option<BigUint> = None;
    for (m, (seq, &tol)) in sequences.iter().zip(tolerances).enumerate() {
        let mut pick = None;
        for rec in &seq.records {
            let total = rec.exponents.total();
            if previous.as_ref().is_some_and(|p| &total <= p) {
                continue;
            }
            let base_error = sup_distance(&decode_vec(&rec.point, &policy)?, base);
            if rec.image_error < tol && base_error < tol {
                pick = Some((rec, base_error, total));
                break;
            }
        }
        let (rec, base_error, total) = pick.ok_or_else(|| {
            Error::invalid(format!("sequence {} has no record within {tol:e}", m + 1))
        })?;
        previous = Some(total);
        records.push(WitnessRecord {
            index: m + 1,
            base_error,
            ..rec.clone()
        });
    }
    Ok(WitnessSequence {
        kind: first.kind.clone(),
        base: base.to_vec(),
        target: first.target.clone(),
        schedule: tolerances.to_vec(),
        substitution: None,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lognum::LogSignScalar;
    use crate::tuples::TupleRecipe;

    type Real = MatrixTuple<LogSignScalar>;

    fn diag_pair() -> Real {
        MatrixTuple::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap()
    }

    #[test]
    fn pinned_diagonal_record_validates() {
        let t = diag_pair();
        let seq = jset_witness(&t, 1.0, &[1.0, 5.0], &[0.05]).unwrap();
        let r = &seq.records[0];
        assert_eq!(r.exponents, ExponentVector::from([38, 24]));
        let x = r.point_values();
        let expected = 5.0 / (2f64.powi(38) * 3f64.powi(24));
        assert!((x[1] / expected - 1.0).abs() < 1e-12);
        let img = r.image_values();
        assert!((img[0] - 1.027_472_668_214_614).abs() < 1e-12);
        assert!((img[1] - 5.0).abs() < 1e-12);
        assert!((r.image_error - 0.027_472_668_214_614).abs() < 1e-12);
        seq.validate(&t).unwrap();
    }

    #[test]
    fn tampering_is_detected() {
        let t = diag_pair();
        let seq = jset_witness(&t, 1.0, &[1.0, 5.0], &[0.05, 0.01]).unwrap();
        seq.validate(&t).unwrap();

        let mut bad = seq.clone();
        bad.records[1].image[1] = bad.records[1].image[1].scale_log(1e-6);
        assert!(matches!(bad.validate(&t), Err(Error::WitnessCheck(_))));

        let mut bad = seq.clone();
        bad.records[1].exponents = bad.records[0].exponents.clone();
        assert!(bad.validate(&t).is_err());

        let mut bad = seq.clone();
        bad.schedule = vec![0.05, 1e-9];
        assert!(bad.validate(&t).is_err());
    }

    #[test]
    fn scaling_keeps_validity() {
        let t = diag_pair();
        let seq = jset_witness(&t, 1.0, &[0.3, -2.0], &[0.1, 0.01]).unwrap();
        let scaled = seq.scaled(-2.5).unwrap();
        scaled.validate(&t).unwrap();
        assert_eq!(scaled.base, vec![-2.5, 0.0]);
        assert!(seq.scaled(0.0).is_err());
    }

    #[test]
    fn extraction_from_converging_bases() {
        let t = diag_pair();
        let y = [0.8, 1.5];
        let tolerances = [0.5, 0.25, 0.125];
        let sequences: Vec<_> = (1..=3)
            .map(|m| {
                let x1 = 1.0 + 0.1 / m as f64;
                let eps = tolerances[m - 1] / 4.0;
                jset_witness(&t, x1, &y, &[eps, eps / 2.0]).unwrap()
            })
            .collect();
        let picked = diagonal_extraction(&sequences, &[1.0, 0.0], &tolerances).unwrap();
        picked.validate(&t).unwrap();
        assert_eq!(picked.records.len(), 3);
        assert!(diagonal_extraction(&sequences, &[1.0, 0.0], &[1e-6, 1e-7, 1e-8]).is_err());
    }

    #[test]
    fn json_shape() {
        let t = diag_pair();
        let seq = jset_witness(&t, 1.0, &[1.0, 5.0], &[0.05]).unwrap();
        let v = serde_json::to_value(&seq).unwrap();
        assert_eq!(v["kind"], "DiagReal");
        let rec = &v["records"][0];
        for key in ["i", "x_i", "K_i", "image", "image_error", "base_error"] {
            assert!(rec.get(key).is_some(), "{key}");
        }
        assert_eq!(rec["K_i"], serde_json::json!([38, 24]));
        assert_eq!(rec["construction"]["kind"], "diagonal");
    }
}
