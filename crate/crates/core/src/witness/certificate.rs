use serde::Serialize;

use crate::dioph::detect_rational;
use crate::lognum::LogScalar;
use crate::tuples::{MatrixTuple, Member};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateVerdict {
    NotHypercyclic,
    Inconclusive,
}

/// Necessary condition for a dense modulus orbit that fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum ObstructionReason {
    /// Every generator has the same sign, so `sum k_i g_i` is one-sided.
    OneSided { nonnegative: bool },
    /// All nonzero generators are rational multiples of one of them, so
    /// `sum k_i g_i` lies in a discrete subgroup.
    RationalRatio { p: i128, q: i128 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Obstruction {
    /// `ln |entry|` of each member in this coordinate.
    pub generators: Vec<f64>,
    #[serde(flatten)]
    pub reason: ObstructionReason,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub verdict: CertificateVerdict,
    /// 1-based coordinate carrying the obstruction.
    pub coordinate: Option<usize>,
    pub reason: Option<Obstruction>,
}

fn generators<S: LogScalar>(tuple: &MatrixTuple<S>, j: usize) -> Vec<f64> {
    tuple
        .members()
        .iter()
        .map(|m| {
            let e = match m {
                Member::Diagonal(d) => d[j],
                Member::PerturbedScalar { diag, .. } => *diag,
            };
            if e.is_zero() {
                f64::NEG_INFINITY
            } else {
                e.log_mag()
            }
        })
        .collect()
}

fn obstruction(g: &[f64]) -> Option<ObstructionReason> {
    let nonzero: Vec<f64> = g.iter().copied().filter(|&x| x != 0.0).collect();
    let first = *nonzero.first()?;
    if nonzero.iter().all(|&x| x > 0.0) {
        return Some(ObstructionReason::OneSided { nonnegative: true });
    }
    if nonzero.iter().all(|&x| x < 0.0) {
        return Some(ObstructionReason::OneSided { nonnegative: false });
    }
    if nonzero.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut witness = None;
    for &x in &nonzero[1..] {
        let (p, q) = detect_rational(x / first)?;
        witness.get_or_insert((p, q));
    }
    witness.map(|(p, q)| ObstructionReason::RationalRatio { p, q })
}

/// Look for a coordinate whose modulus orbit cannot be dense, scanning
/// from the last coordinate down. The first row of a perturbed-scalar
/// tuple mixes in the corner entry and is never used.
pub fn non_hc_certificate<S: LogScalar>(tuple: &MatrixTuple<S>) -> Certificate {
    let lowest = if tuple.is_triangular() { 1 } else { 0 };
    for j in (lowest..tuple.dim()).rev() {
        let g = generators(tuple, j);
        if let Some(reason) = obstruction(&g) {
            return Certificate {
                verdict: CertificateVerdict::NotHypercyclic,
                coordinate: Some(j + 1),
                reason: Some(Obstruction { generators: g, reason }),
            };
        }
    }
    Certificate {
        verdict: CertificateVerdict::Inconclusive,
        coordinate: None,
        reason: None,
    }
}
