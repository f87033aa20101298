//! Simultaneous approximation `k a_j + s_j / 2 ~ ln|y_j|`.

use super::{nearest_with_parity, ExponentWitness};
use crate::error::{Error, Result};
use crate::lognum::LogSignScalar;
use crate::tuples::ExponentVector;

fn witness(alphas: &[f64], y: &[f64], k: u64, s: &[u64], exhausted: bool) -> Result<ExponentWitness<LogSignScalar>> {
    let achieved = alphas
        .iter()
        .zip(s)
        .map(|(&a, &sj)| {
            let sign = if sj % 2 == 0 { 1 } else { -1 };
            LogSignScalar::from_parts(sign, k as f64 * a + sj as f64 / 2.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut exps = vec![k];
    exps.extend_from_slice(s);
    Ok(ExponentWitness::new(ExponentVector::from(exps), achieved, y.to_vec(), exhausted))
}

/// `(k, s_1, ..., s_n)` with `s_j >= 0` of parity `sgn y_j` and
/// `|k a_j + s_j/2 - ln|y_j|| < epsilon` for every `j`, scanning
/// `k = 0..=k_max`. The value `(e^{a_j})^k (-sqrt e)^{s_j}` then lies
/// within `(e^epsilon - 1)|y_j|` of `y_j`.
pub fn kronecker_solve(alphas: &[f64], y: &[f64], epsilon: f64, k_max: u64) -> Result<ExponentWitness<LogSignScalar>> {
    if alphas.is_empty() || alphas.len() != y.len() {
        return Err(Error::invalid(format!(
            "need one target per exponent ({} exponents, {} targets)",
            alphas.len(),
            y.len()
        )));
    }
    if alphas.iter().any(|&a| !(a < 0.0) || !a.is_finite()) {
        return Err(Error::invalid("exponents must be negative reals"));
    }
    if let Some(j) = y.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::invalid(format!("target coordinate {} must be finite and nonzero", j + 1)));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("need epsilon > 0, got {epsilon}")));
    }
    let logs: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = alphas.len();
    let mut s = vec![0u64; n];
    let mut best: Option<(f64, u64, Vec<u64>)> = None;
    'scan: for k in 0..=k_max {
        let mut worst = 0f64;
        for j in 0..n {
            let t = 2.0 * (logs[j] - k as f64 * alphas[j]);
            let sj = nearest_with_parity(t, y[j] < 0.0);
            if sj < 0.0 {
                continue 'scan;
            }
            s[j] = sj as u64;
            worst = worst.max((k as f64 * alphas[j] + sj / 2.0 - logs[j]).abs());
        }
        if worst < epsilon {
            return witness(alphas, y, k, &s, false);
        }
        if best.as_ref().is_none_or(|(e, _, _)| worst < *e) {
            best = Some((worst, k, s.clone()));
        }
    }
    match best {
        Some((_, k, s)) => witness(alphas, y, k, &s, true),
        None => Err(Error::invalid(format!("no admissible k <= {k_max}"))),
    }
}
