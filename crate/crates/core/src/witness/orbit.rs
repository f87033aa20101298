use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::lognum::{DecodePolicy, FieldValue, LogScalar};
use crate::tuples::{decode_vec, encode_vec, ExponentVector, MatrixTuple};

/// All exponent vectors of length `m` with the given total, in
/// lexicographic order.
pub fn exponents_with_total(m: usize, total: u64) -> Vec<ExponentVector> {
    fn fill(prefix: &mut Vec<u64>, m: usize, left: u64, out: &mut Vec<ExponentVector>) {
        if prefix.len() + 1 == m {
            prefix.push(left);
            out.push(ExponentVector::from(prefix.as_slice()));
            prefix.pop();
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            fill(prefix, m, left - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        if total == 0 {
            out.push(ExponentVector::from(Vec::new()));
        }
        return out;
    }
    fill(&mut Vec::with_capacity(m), m, total, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitPoint<V> {
    pub exponents: ExponentVector,
    pub point: Vec<V>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Orbit<V> {
    pub points: Vec<OrbitPoint<V>>,
    /// Points with a coordinate beyond the decodable range.
    pub dropped_overflow: u64,
    /// Finite points outside the box.
    pub dropped_outside: u64,
}

/// `T^K x` for every `K` with `sum K <= max_total`, by ascending total,
/// keeping the points whose real coordinates all lie in
/// `[-box_halfwidth, box_halfwidth]`.
pub fn orbit_points<S: LogScalar>(
    tuple: &MatrixTuple<S>,
    x: &[S::Value],
    max_total: u64,
    box_halfwidth: f64,
    exec: Execution,
) -> Result<Orbit<S::Value>> {
    if x.len() != tuple.dim() {
        return Err(Error::invalid(format!("x needs {} coordinates", tuple.dim())));
    }
    let x_log = encode_vec::<S>(x)?;
    let policy = DecodePolicy::saturate();
    let mut orbit = Orbit {
        points: Vec::new(),
        dropped_overflow: 0,
        dropped_outside: 0,
    };
    for total in 0..=max_total {
        let level = exponents_with_total(tuple.len(), total);
        let images = exec::map(exec, &level, |k| {
            tuple
                .apply_log(k, &x_log)
                .and_then(|v| decode_vec(&v, &policy))
        });
        for (k, image) in level.into_iter().zip(images) {
            let image = image?;
            if image.iter().any(|v| !v.is_finite()) {
                orbit.dropped_overflow += 1;
                continue;
            }
            let mut coords = Vec::with_capacity(image.len() * 2);
            for v in &image {
                v.push_real_coords(&mut coords);
            }
            if coords.iter().all(|c| c.abs() <= box_halfwidth) {
                orbit.points.push(OrbitPoint {
                    exponents: k,
                    point: image,
                });
            } else {
                orbit.dropped_outside += 1;
            }
        }
    }
    Ok(orbit)
}
