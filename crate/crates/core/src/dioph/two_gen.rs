//! Approximating a target by `a^k b^l`.

use num_complex::Complex64;

use super::{detect_rational, require_finite, ExponentWitness, SearchConfig};
use crate::error::{Error, Result};
use crate::lognum::{mul_pow, reduce_arg, LogArgScalar, LogScalar, LogSignScalar};
use crate::tuples::ExponentVector;

fn real_witness(a: f64, b: f64, y: f64, k: u64, l: u64, exhausted: bool) -> Result<ExponentWitness<LogSignScalar>> {
    let value = mul_pow(&[(LogSignScalar::encode(a)?, k), (LogSignScalar::encode(b)?, l)])?;
    Ok(ExponentWitness::new(ExponentVector::from([k, l]), vec![value], vec![y], exhausted))
}

/// `(k, l)` with `k >= min_k`, `l >= min_l` and `|a^k b^l - y| < epsilon`,
/// for `-1 < a < 0 < 1 < b` with `ln|a| / ln b` irrational.
///
/// Only `k` of the parity matching `sgn y` is scanned; `l` is the nearest
/// integer to the real solution of `k ln|a| + l ln b = ln|y|`.
pub fn two_gen_solve(a: f64, b: f64, y: f64, cfg: &SearchConfig) -> Result<ExponentWitness<LogSignScalar>> {
    cfg.validate()?;
    require_finite("a", a)?;
    require_finite("b", b)?;
    require_finite("y", y)?;
    if !(-1.0 < a && a < 0.0) {
        return Err(Error::invalid(format!("need -1 < a < 0, got a = {a}")));
    }
    if !(b > 1.0) {
        return Err(Error::invalid(format!("need b > 1, got b = {b}")));
    }
    if y == 0.0 {
        return Err(Error::invalid("target 0 is not attained by a^k b^l"));
    }
    let la = (-a).ln();
    let lb = b.ln();
    if let Some((p, q)) = detect_rational(la / lb) {
        return Err(Error::invalid(format!("ln|a|/ln b is the rational {p}/{q}")));
    }
    let ly = y.abs().ln();
    let odd = y < 0.0;
    let mut k = cfg.min_k + u64::from((cfg.min_k % 2 == 1) != odd);
    let mut best: Option<(f64, u64, u64)> = None;
    while k <= cfg.k_max {
        let l_real = (ly - k as f64 * la) / lb;
        let l = l_real.round().max(cfg.min_l as f64) as u64;
        let u = k as f64 * la + l as f64 * lb - ly;
        let err = y.abs() * u.exp_m1().abs();
        if err < 2.0 * cfg.epsilon {
            let w = real_witness(a, b, y, k, l, false)?;
            if w.abs_error < cfg.epsilon {
                return Ok(w);
            }
        }
        if best.is_none_or(|(e, _, _)| err < e) {
            best = Some((err, k, l));
        }
        k += 2;
    }
    match best {
        Some((_, k, l)) => real_witness(a, b, y, k, l, true),
        None => Err(Error::invalid(format!(
            "empty search range: min_k = {} exceeds k_max = {}",
            cfg.min_k, cfg.k_max
        ))),
    }
}

fn complex_witness(
    a: Complex64,
    b: Complex64,
    y: Complex64,
    k: u64,
    l: u64,
    exhausted: bool,
) -> Result<ExponentWitness<LogArgScalar>> {
    let value = mul_pow(&[(LogArgScalar::encode(a)?, k), (LogArgScalar::encode(b)?, l)])?;
    Ok(ExponentWitness::new(ExponentVector::from([k, l]), vec![value], vec![y], exhausted))
}

/// Complex analogue of [`two_gen_solve`]: both the modulus and the
/// argument of `a^k b^l` must match. For each `k` the two integers around
/// the real solution for `l` are tried, smaller first.
pub fn two_gen_solve_complex(
    a: Complex64,
    b: Complex64,
    y: Complex64,
    cfg: &SearchConfig,
) -> Result<ExponentWitness<LogArgScalar>> {
    cfg.validate()?;
    for (name, v) in [("a", a), ("b", b), ("y", y)] {
        require_finite(name, v)?;
    }
    if y.norm() == 0.0 {
        return Err(Error::invalid("target 0 is not attained by a^k b^l"));
    }
    let (la, lb, ly) = (a.norm().ln(), b.norm().ln(), y.norm().ln());
    if !la.is_finite() || !lb.is_finite() || lb == 0.0 {
        return Err(Error::invalid("need a != 0 and |b| not in {0, 1}"));
    }
    let (pa, pb, py) = (a.arg(), b.arg(), y.arg());
    let mut best: Option<(f64, u64, u64)> = None;
    for k in cfg.min_k..=cfg.k_max {
        let l_real = ((ly - k as f64 * la) / lb).max(cfg.min_l as f64);
        let lo = l_real.floor() as u64;
        let hi = l_real.ceil() as u64;
        for l in if lo == hi { vec![lo] } else { vec![lo, hi] } {
            let u = k as f64 * la + l as f64 * lb - ly;
            let phi = reduce_arg(reduce_arg(k as f64 * pa) + reduce_arg(l as f64 * pb) - py);
            let err = y.norm() * (Complex64::new(u, phi).exp() - 1.0).norm();
            if err < 2.0 * cfg.epsilon {
                let w = complex_witness(a, b, y, k, l, false)?;
                if w.abs_error < cfg.epsilon {
                    return Ok(w);
                }
            }
            if best.is_none_or(|(e, _, _)| err < e) {
                best = Some((err, k, l));
            }
        }
    }
    match best {
        Some((_, k, l)) => complex_witness(a, b, y, k, l, true),
        None => Err(Error::invalid("empty search range")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{Signed, ToPrimitive};

    fn exact_error(a: f64, b: f64, y: f64, k: u64, l: u64) -> f64 {
        let a = BigRational::from_float(a).unwrap();
        let b = BigRational::from_float(b).unwrap();
        let y = BigRational::from_float(y).unwrap();
        let v = num_traits::pow(a, k as usize) * num_traits::pow(b, l as usize);
        (v - y).abs().to_f64().unwrap()
    }

    #[test]
    fn first_even_hit_for_one() {
        let w = two_gen_solve(-0.5, 3.0, 1.0, &SearchConfig::with_epsilon(0.05)).unwrap();
        assert_eq!(w.exponents, ExponentVector::from([38, 24]));
        assert!(!w.exhausted);
        assert!((w.values()[0] - 1.027_472_668_214_614).abs() < 1e-12);
        assert!((w.abs_error - exact_error(-0.5, 3.0, 1.0, 38, 24)).abs() < 1e-12);
        // brute force: no smaller even k has any l >= 1 within tolerance
        for k in (2..38).step_by(2) {
            for l in 1..120 {
                assert!(exact_error(-0.5, 3.0, 1.0, k, l) >= 0.05, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn exact_orbit_points() {
        let w = two_gen_solve(-0.5, 3.0, -1.5, &SearchConfig::with_epsilon(1e-12)).unwrap();
        assert_eq!(w.exponents, ExponentVector::from([1, 1]));
        assert!(w.abs_error < 1e-12);
        let w = two_gen_solve(-0.5, 3.0, 0.75, &SearchConfig::with_epsilon(1e-12)).unwrap();
        assert_eq!(w.exponents, ExponentVector::from([2, 1]));
    }

    #[test]
    fn floors_force_later_witnesses() {
        let cfg = SearchConfig {
            min_k: 40,
            ..SearchConfig::with_epsilon(0.05)
        };
        let w = two_gen_solve(-0.5, 3.0, 1.0, &cfg).unwrap();
        let k = w.exponents.to_u64s().unwrap()[0];
        assert!(k >= 40 && k % 2 == 0 && w.abs_error < 0.05);
    }

    #[test]
    fn parity_follows_sign() {
        for y in [-7.0, -0.3, 0.2, 4.5] {
            let w = two_gen_solve(-0.5, 3.0, y, &SearchConfig::with_epsilon(1e-3)).unwrap();
            let k = w.exponents.to_u64s().unwrap()[0];
            assert_eq!(k % 2 == 1, y < 0.0);
            assert!(w.abs_error < 1e-3);
            let l = w.exponents.to_u64s().unwrap()[1];
            let exact = exact_error(-0.5, 3.0, y, k, l);
            // the log-domain sum k ln 2 + l ln 3 carries its own rounding
            let rounding = y.abs() * (k as f64 * 2f64.ln() + l as f64 * 3f64.ln()) * 4.0 * f64::EPSILON;
            assert!((exact - w.abs_error).abs() < rounding, "y={y}");
        }
    }

    #[test]
    fn exhaustion_is_a_value() {
        let cfg = SearchConfig {
            k_max: 10,
            ..SearchConfig::with_epsilon(1e-9)
        };
        let w = two_gen_solve(-0.5, 3.0, 1.0, &cfg).unwrap();
        assert!(w.exhausted);
        let bigger = SearchConfig { k_max: 30, ..cfg };
        assert!(two_gen_solve(-0.5, 3.0, 1.0, &bigger).unwrap().abs_error <= w.abs_error);
    }

    #[test]
    fn invalid_inputs() {
        let cfg = SearchConfig::default();
        assert!(matches!(two_gen_solve(-0.5, 3.0, 0.0, &cfg), Err(Error::InvalidArgument(_))));
        assert!(two_gen_solve(-1.5, 3.0, 1.0, &cfg).is_err());
        assert!(two_gen_solve(-0.5, 4.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn complex_solver_meets_tolerance() {
        let a = Complex64::from_polar(1.5, crate::tuples::DEFAULT_THETA);
        let b = Complex64::from_polar(0.75, std::f64::consts::TAU * (3f64.sqrt() - 1.0));
        let y = Complex64::new(0.4, -1.3);
        let w = two_gen_solve_complex(a, b, y, &SearchConfig::with_epsilon(0.05)).unwrap();
        assert!(!w.exhausted);
        let ks = w.exponents.to_u64s().unwrap();
        let direct = a.powu(ks[0] as u32) * b.powu(ks[1] as u32);
        assert!((direct - y).norm() < 0.05 + 1e-9);
    }
}
