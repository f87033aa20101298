//! Multi-precision re-evaluation of perturbed-scalar witnesses.
//!
//! For `T^K = d (I + F E_{1n})` with `d` of size `a^k`, the first image
//! coordinate `d (x_1 + F x_n)` cancels about `log2 d` bits, so doubles
//! cannot re-check it literally. Here every quantity is recomputed from the
//! construction data at a precision wide enough to absorb the cancellation.

use std::f64::consts::LN_2;

use astro_float::{BigFloat, RoundingMode, Sign};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::lognum::{FieldValue, LogScalar};

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Clone, Debug)]
struct Hp {
    re: BigFloat,
    im: BigFloat,
}

#[derive(Clone, Copy)]
struct Ctx {
    p: usize,
}

impl Ctx {
    fn real(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    fn c(&self, z: Complex64) -> Hp {
        Hp {
            re: self.real(z.re),
            im: self.real(z.im),
        }
    }

    fn int(&self, n: &BigUint) -> Hp {
        let digits = n.to_u64_digits();
        let re = if digits.is_empty() {
            BigFloat::from_word(0, self.p)
        } else {
            let e = (64 * digits.len()) as i32;
            let mut v = BigFloat::from_words(&digits, Sign::Pos, e);
            v.set_precision(self.p, RM).expect("precision is positive");
            v
        };
        Hp {
            re,
            im: BigFloat::from_word(0, self.p),
        }
    }

    fn add(&self, x: &Hp, y: &Hp) -> Hp {
        Hp {
            re: x.re.add(&y.re, self.p, RM),
            im: x.im.add(&y.im, self.p, RM),
        }
    }

    fn sub(&self, x: &Hp, y: &Hp) -> Hp {
        Hp {
            re: x.re.sub(&y.re, self.p, RM),
            im: x.im.sub(&y.im, self.p, RM),
        }
    }

    fn mul(&self, x: &Hp, y: &Hp) -> Hp {
        let p = self.p;
        Hp {
            re: x.re.mul(&y.re, p, RM).sub(&x.im.mul(&y.im, p, RM), p, RM),
            im: x.re.mul(&y.im, p, RM).add(&x.im.mul(&y.re, p, RM), p, RM),
        }
    }

    fn div(&self, x: &Hp, y: &Hp) -> Hp {
        let p = self.p;
        let den = y.re.mul(&y.re, p, RM).add(&y.im.mul(&y.im, p, RM), p, RM);
        let re = x.re.mul(&y.re, p, RM).add(&x.im.mul(&y.im, p, RM), p, RM);
        let im = x.im.mul(&y.re, p, RM).sub(&x.re.mul(&y.im, p, RM), p, RM);
        Hp {
            re: re.div(&den, p, RM),
            im: im.div(&den, p, RM),
        }
    }

    fn neg(&self, x: &Hp) -> Hp {
        Hp {
            re: x.re.neg(),
            im: x.im.neg(),
        }
    }

    fn pow(&self, x: &Hp, e: &BigUint) -> Hp {
        let mut acc = self.c(Complex64::new(1.0, 0.0));
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, x);
            }
        }
        acc
    }
}

/// `(mantissa in [1/2, 1), binary exponent)` of a finite value, or `None` for 0.
fn split(x: &BigFloat) -> Option<(f64, i64)> {
    if x.is_zero() {
        return None;
    }
    let (words, _, sign, e, _) = x.as_raw_parts()?;
    let top = *words.last()? as f64 / 2f64.powi(64);
    let m = if sign == Sign::Neg { -top } else { top };
    Some((m, e as i64))
}

/// `(ln |z|, arg z)`, or `None` for zero.
fn log_polar(z: &Hp) -> Option<(f64, f64)> {
    let (re, im) = (split(&z.re), split(&z.im));
    let e = match (re, im) {
        (None, None) => return None,
        (Some((_, a)), None) | (None, Some((_, a))) => a,
        (Some((_, a)), Some((_, b))) => a.max(b),
    };
    let rebase = |part: Option<(f64, i64)>| match part {
        Some((m, pe)) if e - pe < 1000 => m * 2f64.powi((pe - e) as i32),
        _ => 0.0,
    };
    let (x, y) = (rebase(re), rebase(im));
    Some((x.hypot(y).ln() + e as f64 * LN_2, y.atan2(x)))
}

fn modulus(z: &Hp) -> f64 {
    match log_polar(z) {
        None => 0.0,
        Some((l, _)) => l.exp(),
    }
}

/// `|stored / exact - 1|`, with two zeros agreeing exactly.
fn relative_gap<S: LogScalar>(stored: &S, exact: &Hp) -> f64 {
    match (stored.is_zero(), log_polar(exact)) {
        (true, None) => 0.0,
        (true, Some(_)) | (false, None) => f64::INFINITY,
        (false, Some((l, a))) => {
            let dl = stored.log_mag() - l;
            let da = stored.phase() - a;
            (Complex64::new(dl, da).exp() - 1.0).norm()
        }
    }
}

/// Inputs of one perturbed-scalar record.
pub(crate) struct TriangularCase<'a, V> {
    pub a1: Complex64,
    pub a2: Complex64,
    pub k: &'a BigUint,
    pub l: &'a BigUint,
    /// First coordinate of the base the point was derived from.
    pub x1: Complex64,
    /// Target used by the construction (after any substitution).
    pub w: &'a [Complex64],
    /// Base and target the record is checked against.
    pub base: &'a [V],
    pub target: &'a [V],
}

/// Outcome of a multi-precision check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct HpCheck {
    pub point_gap: f64,
    pub image_gap: f64,
    pub image_error: f64,
    pub base_error: f64,
}

fn precision(a1: Complex64, k: &BigUint, l: &BigUint) -> usize {
    let kf = k.to_f64().unwrap_or(f64::MAX);
    let d_bits = kf * a1.norm().log2().abs();
    let bits = 2.0 * (d_bits + (l.bits() + k.bits()) as f64) + 256.0;
    (bits as usize).div_ceil(64) * 64
}

pub(crate) fn check_triangular<S: LogScalar>(
    case: &TriangularCase<'_, S::Value>,
    point: &[S],
    image: &[S],
) -> HpCheck {
    let n = case.w.len();
    let ctx = Ctx {
        p: precision(case.a1, case.k, case.l),
    };
    let a1 = ctx.c(case.a1);
    let a2 = ctx.c(case.a2);
    let (k, l) = (ctx.int(case.k), ctx.int(case.l));
    let d = if case.a2 == Complex64::new(-1.0, 0.0) {
        let sign = if case.l.bit(0) { -1.0 } else { 1.0 };
        ctx.mul(&ctx.pow(&a1, case.k), &ctx.c(Complex64::new(sign, 0.0)))
    } else {
        ctx.mul(&ctx.pow(&a1, case.k), &ctx.pow(&a2, case.l))
    };
    let f = ctx.add(&ctx.div(&k, &a1), &ctx.div(&l, &a2));
    let x1 = ctx.c(case.x1);
    let w: Vec<Hp> = case.w.iter().map(|&z| ctx.c(z)).collect();
    let q = ctx.div(&x1, &ctx.mul(&w[n - 1], &f));

    let mut xs = Vec::with_capacity(n);
    xs.push(ctx.sub(&x1, &ctx.mul(&w[0], &q)));
    for wj in &w[1..n - 1] {
        xs.push(ctx.neg(&ctx.mul(wj, &q)));
    }
    xs.push(ctx.neg(&ctx.div(&x1, &f)));

    let mut img = Vec::with_capacity(n);
    img.push(ctx.mul(&d, &ctx.add(&xs[0], &ctx.mul(&f, &xs[n - 1]))));
    for x in &xs[1..] {
        img.push(ctx.mul(&d, x));
    }

    let point_gap = point
        .iter()
        .zip(&xs)
        .map(|(s, e)| relative_gap(s, e))
        .fold(0.0, f64::max);
    let scale = img.iter().map(modulus).fold(0.0, f64::max);
    let image_gap = image
        .iter()
        .zip(&img)
        .map(|(s, e)| {
            let stored = Complex64::from_polar(s.log_mag().exp(), s.phase());
            let stored = if s.is_zero() { Complex64::new(0.0, 0.0) } else { stored };
            modulus(&ctx.sub(&ctx.c(stored), e))
        })
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE);
    let sup_dist = |xs: &[Hp], ref_pts: &[S::Value]| {
        xs.iter()
            .zip(ref_pts)
            .map(|(x, r)| modulus(&ctx.sub(x, &ctx.c(r.to_complex()))))
            .fold(0.0, f64::max)
    };
    HpCheck {
        point_gap,
        image_gap,
        image_error: sup_dist(&img, case.target),
        base_error: sup_dist(&xs, case.base),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lognum::LogSignScalar;

    #[test]
    fn split_recovers_doubles() {
        let ctx = Ctx { p: 128 };
        for v in [3.0, -0.75, 1e-300, 12345.678, 1e300] {
            let (l, a) = log_polar(&ctx.c(Complex64::new(v, 0.0))).unwrap();
            assert!((l - v.abs().ln()).abs() < 1e-15 * v.abs().ln().abs().max(1.0));
            assert_eq!(a, if v < 0.0 { std::f64::consts::PI } else { 0.0 });
        }
        assert!(log_polar(&ctx.c(Complex64::new(0.0, 0.0))).is_none());
        let z = Complex64::new(-1.5, 2.0);
        let (l, a) = log_polar(&ctx.c(z)).unwrap();
        assert!((l - z.norm().ln()).abs() < 1e-15 && (a - z.arg()).abs() < 1e-15);
    }

    #[test]
    fn big_integers_are_exact() {
        let ctx = Ctx { p: 512 };
        let n = BigUint::from(3u32).pow(200);
        let x = ctx.int(&n);
        let (l, _) = log_polar(&x).unwrap();
        assert!((l - 200.0 * 3f64.ln()).abs() < 1e-12);
        let back = ctx.sub(&x, &ctx.mul(&ctx.int(&BigUint::from(3u32).pow(100)), &ctx.int(&BigUint::from(3u32).pow(100))));
        assert!(back.re.is_zero());
    }

    #[test]
    fn power_matches_doubles() {
        let ctx = Ctx { p: 256 };
        let z = Complex64::from_polar(2.0, 0.7);
        let (l, a) = log_polar(&ctx.pow(&ctx.c(z), &BigUint::from(13u32))).unwrap();
        let direct = z.powu(13);
        assert!((l - direct.norm().ln()).abs() < 1e-13);
        assert!((a - direct.arg()).abs() < 1e-12);
    }

    #[test]
    fn exact_two_by_two_record() {
        // T = 2I + E with T^(3,0): d = 8, F = 3/2; x = (1, -2/3) maps to (0, -16/3)
        let k = BigUint::from(3u32);
        let l = BigUint::from(0u32);
        let w = [Complex64::new(0.0, 0.0), Complex64::new(-16.0 / 3.0, 0.0)];
        let case = TriangularCase::<f64> {
            a1: Complex64::new(2.0, 0.0),
            a2: Complex64::new(-1.0, 0.0),
            k: &k,
            l: &l,
            x1: Complex64::new(1.0, 0.0),
            w: &w,
            base: &[1.0, 0.0],
            target: &[0.0, -16.0 / 3.0],
        };
        let point = [LogSignScalar::encode(1.0).unwrap(), LogSignScalar::encode(-2.0 / 3.0).unwrap()];
        let image = [LogSignScalar::zero(), LogSignScalar::encode(-16.0 / 3.0).unwrap()];
        let c = check_triangular(&case, &point, &image);
        assert!(c.point_gap < 1e-15 && c.image_gap < 1e-15, "{c:?}");
        assert!(c.image_error < 1e-15);
        assert!((c.base_error - 2.0 / 3.0).abs() < 1e-15);
    }
}
