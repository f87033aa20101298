//! Log-domain scalars.
//!
//! A nonzero value is stored as a sign (reals) or a reduced argument
//! (complex numbers) together with the natural logarithm of its modulus.
//! Power products with exponents far beyond the range of `f64` powers stay
//! exact in structure: signs follow the parity of the exponent, magnitudes
//! are sums of `exponent * log_mag`, and arguments are reduced to
//! `(-pi, pi]` after every accumulation.

use std::f64::consts::{LN_2, PI, TAU};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on `|log_mag|` for decoding into a double.
pub const DECODE_THRESHOLD: f64 = 700.0;

/// Largest integer magnitude representable exactly in an `f64`.
const EXACT_F64_INT: f64 = 9_007_199_254_740_992.0;

/// The scalar field a tuple acts over: `f64` for real tuples,
/// `Complex64` for complex ones.
pub trait FieldValue:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// Number of real coordinates per value (1 or 2).
    const REAL_DIM: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// `None` when the complex number has no counterpart in this field.
    fn from_complex(c: Complex64) -> Option<Self>;
    fn to_complex(self) -> Complex64;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
    /// Value of the given unit direction sent to infinity.
    fn saturate_overflow(direction: Self) -> Self;
    fn push_real_coords(self, out: &mut Vec<f64>);
    fn sample_box<R: Rng + ?Sized>(rng: &mut R, halfwidth: f64) -> Self;
    /// 17 significant digits; complex values as `re+imi`.
    fn fmt17(self) -> String;
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl FieldValue for f64 {
    const REAL_DIM: usize = 1;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn from_complex(c: Complex64) -> Option<Self> {
        (c.im == 0.0).then_some(c.re)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn saturate_overflow(direction: Self) -> Self {
        direction.signum() * f64::INFINITY
    }
    fn push_real_coords(self, out: &mut Vec<f64>) {
        out.push(self);
    }
    fn sample_box<R: Rng + ?Sized>(rng: &mut R, halfwidth: f64) -> Self {
        rng.random_range(-halfwidth..halfwidth)
    }
    fn fmt17(self) -> String {
        fmt_f64(self)
    }
}

impl FieldValue for Complex64 {
    const REAL_DIM: usize = 2;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_complex(c: Complex64) -> Option<Self> {
        Some(c)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn saturate_overflow(direction: Self) -> Self {
        let part = |c: f64| if c == 0.0 { 0.0 } else { c.signum() * f64::INFINITY };
        Complex64::new(part(direction.re), part(direction.im))
    }
    fn push_real_coords(self, out: &mut Vec<f64>) {
        out.push(self.re);
        out.push(self.im);
    }
    fn sample_box<R: Rng + ?Sized>(rng: &mut R, halfwidth: f64) -> Self {
        let re = rng.random_range(-halfwidth..halfwidth);
        let im = rng.random_range(-halfwidth..halfwidth);
        Complex64::new(re, im)
    }
    fn fmt17(self) -> String {
        format!("{:.16e}{:+.16e}i", self.re, self.im)
    }
}

/// Integer exponent accepted by [`LogScalar::pow`].
pub trait Exponent {
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_odd(&self) -> bool;
    /// Nearest double; infinite when out of range.
    fn to_f64(&self) -> f64;
    /// `ln |e|`; `-inf` for zero.
    fn ln_abs(&self) -> f64;
}

impl Exponent for i64 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn is_odd(&self) -> bool {
        self & 1 == 1
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn ln_abs(&self) -> f64 {
        (self.unsigned_abs() as f64).ln()
    }
}

impl Exponent for u64 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        false
    }
    fn is_odd(&self) -> bool {
        self & 1 == 1
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn ln_abs(&self) -> f64 {
        (*self as f64).ln()
    }
}

impl Exponent for BigUint {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        false
    }
    fn is_odd(&self) -> bool {
        self.bit(0)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::INFINITY)
    }
    fn ln_abs(&self) -> f64 {
        ln_biguint(self)
    }
}

impl Exponent for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        self.sign() == Sign::Minus
    }
    fn is_odd(&self) -> bool {
        self.magnitude().bit(0)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(if self.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }
    fn ln_abs(&self) -> f64 {
        ln_biguint(self.magnitude())
    }
}

/// Natural log of a big integer, accurate to a few ulps at any size.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return ToPrimitive::to_f64(x).map(f64::ln).unwrap_or(f64::INFINITY);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    top.ln() + shift as f64 * LN_2
}

/// Integer nearest to `exp(ln_x)`. Exact rounding while the value fits
/// the 53-bit mantissa; beyond that the result carries the relative
/// precision of `ln_x` (about 1e-13 for values near `2^3000`).
pub fn biguint_from_ln(ln_x: f64) -> BigUint {
    if !ln_x.is_finite() || ln_x < -1.0 {
        return BigUint::zero();
    }
    let x = ln_x.exp();
    if x < EXACT_F64_INT {
        return BigUint::from(x.round() as u64);
    }
    let log2 = ln_x / LN_2;
    let whole = log2.floor();
    let mantissa = (2f64.powf(log2 - whole) * 2f64.powi(52)).round() as u64;
    BigUint::from(mantissa) << (whole as u64 - 52)
}

/// Reduce an angle to `(-pi, pi]`. Values already in range are returned
/// unchanged, so reduction is idempotent.
pub fn reduce_arg(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(TAU);
    let r = if r > PI { r - TAU } else { r };
    if r <= -PI {
        PI
    } else {
        r
    }
}

/// What to do when `|log_mag|` exceeds the decode threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnOutOfRange {
    #[default]
    Saturate,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodePolicy {
    pub threshold: f64,
    pub on_out_of_range: OnOutOfRange,
}

impl Default for DecodePolicy {
    fn default() -> Self {
        DecodePolicy {
            threshold: DECODE_THRESHOLD,
            on_out_of_range: OnOutOfRange::Saturate,
        }
    }
}

impl DecodePolicy {
    pub fn saturate() -> Self {
        Self::default()
    }

    pub fn error() -> Self {
        DecodePolicy {
            on_out_of_range: OnOutOfRange::Error,
            ..Self::default()
        }
    }
}

/// Result of decoding a log-domain scalar. Overflow and underflow tokens
/// carry the unit direction of the value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decoded<V> {
    Value(V),
    Overflow(V),
    Underflow(V),
}

impl<V: FieldValue> Decoded<V> {
    pub fn value(self) -> Option<V> {
        match self {
            Decoded::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Overflow becomes a signed infinity, underflow a signed zero.
    pub fn saturated(self) -> V {
        match self {
            Decoded::Value(v) => v,
            Decoded::Overflow(d) => V::saturate_overflow(d),
            Decoded::Underflow(d) => d * V::zero(),
        }
    }

    pub fn is_overflow(self) -> bool {
        matches!(self, Decoded::Overflow(_))
    }
}

/// Common interface of [`LogSignScalar`] and [`LogArgScalar`].
pub trait LogScalar:
    Copy + Debug + PartialEq + Send + Sync + Serialize + for<'de> Deserialize<'de> + 'static
{
    type Value: FieldValue;

    fn encode(v: Self::Value) -> Result<Self>;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// Natural log of the modulus; 0 for the zero representative.
    fn log_mag(&self) -> f64;
    /// The value divided by its modulus (1 for zero).
    fn direction(&self) -> Self::Value;
    /// Argument in `(-pi, pi]`: 0 or pi for reals, 0 for zero.
    fn phase(&self) -> f64;
    /// Nonzero value `exp(log_mag + i arg)`. Real scalars accept only
    /// `arg` of 0 or pi.
    fn from_log_polar(log_mag: f64, arg: f64) -> Result<Self>;
    /// Multiply the modulus by `exp(delta)`.
    fn scale_log(self, delta: f64) -> Self;
    fn mul(self, rhs: Self) -> Self;
    fn neg(self) -> Self;
    fn recip(self) -> Result<Self>;
    fn pow<E: Exponent>(self, e: &E) -> Result<Self>;
    /// Log-sum-exp addition.
    fn add(self, rhs: Self) -> Self;
    /// Product of many factors, with contributions accumulated in a
    /// canonical order so the result does not depend on factor order.
    fn product(factors: &[Self]) -> Self;
    fn from_integer<E: Exponent>(e: &E) -> Self;
    fn decode(self, policy: &DecodePolicy) -> Result<Decoded<Self::Value>>;

    fn div(self, rhs: Self) -> Result<Self> {
        Ok(self.mul(rhs.recip()?))
    }

    fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    fn from_real(x: f64) -> Result<Self> {
        Self::encode(Self::Value::from_real(x))
    }

    /// Decode with saturation at the default threshold.
    fn to_value(self) -> Self::Value {
        self.decode(&DecodePolicy::default())
            .map(Decoded::saturated)
            .unwrap_or_else(|_| unreachable!("saturating decode is total"))
    }
}

/// `prod factor_i ^ e_i` in the log domain.
pub fn mul_pow<S: LogScalar, E: Exponent>(factors: &[(S, E)]) -> Result<S> {
    if factors.is_empty() {
        return Err(Error::invalid("mul_pow needs at least one factor"));
    }
    let powered = factors
        .iter()
        .map(|(s, e)| s.pow(e))
        .collect::<Result<Vec<_>>>()?;
    Ok(S::product(&powered))
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().fold(0.0, |acc, t| acc + t)
}

fn scaled_log(e: &impl Exponent, log_mag: f64) -> Result<f64> {
    if log_mag == 0.0 || e.is_zero() {
        return Ok(0.0);
    }
    let v = e.to_f64() * log_mag;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range {
            log_mag: v,
            phase: 0.0,
            coordinate: None,
        })
    }
}

fn pow_of_zero<E: Exponent, S: LogScalar>(e: &E) -> Result<S> {
    if e.is_negative() {
        Err(Error::Singular("negative power of zero".into()))
    } else if e.is_zero() {
        Ok(S::one())
    } else {
        Ok(S::zero())
    }
}

/// Real log-domain scalar: `sign * exp(log_mag)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLogSign")]
pub struct LogSignScalar {
    sign: i8,
    log_mag: f64,
}

#[derive(Deserialize)]
struct RawLogSign {
    sign: i8,
    log_mag: f64,
}

impl TryFrom<RawLogSign> for LogSignScalar {
    type Error = Error;
    fn try_from(raw: RawLogSign) -> Result<Self> {
        LogSignScalar::from_parts(raw.sign, raw.log_mag)
    }
}

impl LogSignScalar {
    /// Build from a sign in `{-1, 0, 1}` and a finite log magnitude.
    pub fn from_parts(sign: i8, log_mag: f64) -> Result<Self> {
        if !(-1..=1).contains(&sign) {
            return Err(Error::invalid(format!("sign {sign} not in {{-1, 0, 1}}")));
        }
        if !log_mag.is_finite() {
            return Err(Error::invalid("log magnitude must be finite"));
        }
        Ok(Self::canonical(sign, log_mag))
    }

    fn canonical(sign: i8, log_mag: f64) -> Self {
        if sign == 0 {
            LogSignScalar { sign: 0, log_mag: 0.0 }
        } else {
            LogSignScalar { sign, log_mag }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }
}

impl LogScalar for LogSignScalar {
    type Value = f64;

    fn encode(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::invalid(format!("cannot encode non-finite value {v}")));
        }
        if v == 0.0 {
            return Ok(Self::zero());
        }
        Ok(LogSignScalar {
            sign: if v < 0.0 { -1 } else { 1 },
            log_mag: v.abs().ln(),
        })
    }

    fn zero() -> Self {
        LogSignScalar { sign: 0, log_mag: 0.0 }
    }

    fn one() -> Self {
        LogSignScalar { sign: 1, log_mag: 0.0 }
    }

    fn is_zero(&self) -> bool {
        self.sign == 0
    }

    fn log_mag(&self) -> f64 {
        self.log_mag
    }

    fn direction(&self) -> f64 {
        if self.sign < 0 {
            -1.0
        } else {
            1.0
        }
    }

    fn phase(&self) -> f64 {
        if self.sign < 0 {
            PI
        } else {
            0.0
        }
    }

    fn from_log_polar(log_mag: f64, arg: f64) -> Result<Self> {
        let sign = match reduce_arg(arg) {
            a if a == 0.0 => 1,
            a if a == PI => -1,
            a => return Err(Error::invalid(format!("real scalar cannot carry argument {a}"))),
        };
        Self::from_parts(sign, log_mag)
    }

    fn scale_log(self, delta: f64) -> Self {
        Self::canonical(self.sign, self.log_mag + delta)
    }

    fn mul(self, rhs: Self) -> Self {
        Self::canonical(self.sign * rhs.sign, self.log_mag + rhs.log_mag)
    }

    fn neg(self) -> Self {
        Self::canonical(-self.sign, self.log_mag)
    }

    fn recip(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Singular("reciprocal of zero".into()));
        }
        Ok(Self::canonical(self.sign, -self.log_mag))
    }

    fn pow<E: Exponent>(self, e: &E) -> Result<Self> {
        if self.is_zero() {
            return pow_of_zero(e);
        }
        let sign = if self.sign < 0 && e.is_odd() { -1 } else { 1 };
        Ok(Self::canonical(sign, scaled_log(e, self.log_mag)?))
    }

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.log_mag >= rhs.log_mag { (self, rhs) } else { (rhs, self) };
        let ratio = (small.log_mag - big.log_mag).exp();
        if big.sign == small.sign {
            Self::canonical(big.sign, big.log_mag + ratio.ln_1p())
        } else if ratio == 1.0 {
            Self::zero()
        } else {
            Self::canonical(big.sign, big.log_mag + (-ratio).ln_1p())
        }
    }

    fn product(factors: &[Self]) -> Self {
        if factors.iter().any(|f| f.is_zero()) {
            return Self::zero();
        }
        let sign = factors.iter().fold(1i8, |s, f| s * f.sign);
        let log_mag = sorted_sum(factors.iter().map(|f| f.log_mag).collect());
        Self::canonical(sign, log_mag)
    }

    fn from_integer<E: Exponent>(e: &E) -> Self {
        if e.is_zero() {
            return Self::zero();
        }
        Self::canonical(if e.is_negative() { -1 } else { 1 }, e.ln_abs())
    }

    fn decode(self, policy: &DecodePolicy) -> Result<Decoded<f64>> {
        if self.is_zero() {
            return Ok(Decoded::Value(0.0));
        }
        let dir = self.direction();
        if self.log_mag.abs() <= policy.threshold {
            return Ok(Decoded::Value(dir * self.log_mag.exp()));
        }
        match policy.on_out_of_range {
            OnOutOfRange::Error => Err(Error::Range {
                log_mag: self.log_mag,
                phase: if dir < 0.0 { PI } else { 0.0 },
                coordinate: None,
            }),
            OnOutOfRange::Saturate if self.log_mag > 0.0 => Ok(Decoded::Overflow(dir)),
            OnOutOfRange::Saturate => Ok(Decoded::Underflow(dir)),
        }
    }
}

/// Complex log-domain scalar: `exp(log_mag) * exp(i * arg)`, with `arg`
/// always in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLogArg")]
pub struct LogArgScalar {
    is_zero: bool,
    log_mag: f64,
    arg: f64,
}

#[derive(Deserialize)]
struct RawLogArg {
    is_zero: bool,
    log_mag: f64,
    arg: f64,
}

impl TryFrom<RawLogArg> for LogArgScalar {
    type Error = Error;
    fn try_from(raw: RawLogArg) -> Result<Self> {
        if raw.is_zero {
            return Ok(LogArgScalar::zero());
        }
        LogArgScalar::from_polar_log(raw.log_mag, raw.arg)
    }
}

impl LogArgScalar {
    /// Nonzero value `exp(log_mag + i arg)`; the argument is reduced.
    pub fn from_polar_log(log_mag: f64, arg: f64) -> Result<Self> {
        if !log_mag.is_finite() || !arg.is_finite() {
            return Err(Error::invalid("log magnitude and argument must be finite"));
        }
        Ok(Self::nonzero(log_mag, arg))
    }

    fn nonzero(log_mag: f64, arg: f64) -> Self {
        LogArgScalar {
            is_zero: false,
            log_mag,
            arg: reduce_arg(arg),
        }
    }

    pub fn arg(&self) -> f64 {
        self.arg
    }
}

fn arg_times(e: &impl Exponent, arg: f64) -> Result<f64> {
    if arg == 0.0 || e.is_zero() {
        return Ok(0.0);
    }
    if arg == PI {
        return Ok(if e.is_odd() { PI } else { 0.0 });
    }
    let ef = e.to_f64();
    if ef.abs() > EXACT_F64_INT {
        return Err(Error::invalid(
            "exponent too large to accumulate a general complex argument",
        ));
    }
    Ok(reduce_arg(ef * arg))
}

fn sorted_arg_sum(mut args: Vec<f64>) -> f64 {
    args.sort_by(f64::total_cmp);
    args.into_iter().fold(0.0, |acc, a| reduce_arg(acc + a))
}

impl LogScalar for LogArgScalar {
    type Value = Complex64;

    fn encode(v: Complex64) -> Result<Self> {
        if !FieldValue::is_finite(v) {
            return Err(Error::invalid(format!("cannot encode non-finite value {v}")));
        }
        if v.re == 0.0 && v.im == 0.0 {
            return Ok(Self::zero());
        }
        Ok(Self::nonzero(v.norm().ln(), v.im.atan2(v.re)))
    }

    fn zero() -> Self {
        LogArgScalar {
            is_zero: true,
            log_mag: 0.0,
            arg: 0.0,
        }
    }

    fn one() -> Self {
        Self::nonzero(0.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.is_zero
    }

    fn log_mag(&self) -> f64 {
        self.log_mag
    }

    fn direction(&self) -> Complex64 {
        if self.is_zero {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, self.arg)
        }
    }

    fn phase(&self) -> f64 {
        self.arg
    }

    fn from_log_polar(log_mag: f64, arg: f64) -> Result<Self> {
        Self::from_polar_log(log_mag, arg)
    }

    fn scale_log(self, delta: f64) -> Self {
        if self.is_zero {
            self
        } else {
            Self::nonzero(self.log_mag + delta, self.arg)
        }
    }

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero || rhs.is_zero {
            return Self::zero();
        }
        Self::nonzero(self.log_mag + rhs.log_mag, self.arg + rhs.arg)
    }

    fn neg(self) -> Self {
        if self.is_zero {
            return self;
        }
        Self::nonzero(self.log_mag, self.arg + PI)
    }

    fn recip(self) -> Result<Self> {
        if self.is_zero {
            return Err(Error::Singular("reciprocal of zero".into()));
        }
        Ok(Self::nonzero(-self.log_mag, -self.arg))
    }

    fn pow<E: Exponent>(self, e: &E) -> Result<Self> {
        if self.is_zero {
            return pow_of_zero(e);
        }
        Ok(Self::nonzero(scaled_log(e, self.log_mag)?, arg_times(e, self.arg)?))
    }

    fn add(self, rhs: Self) -> Self {
        if self.is_zero {
            return rhs;
        }
        if rhs.is_zero {
            return self;
        }
        let (big, small) = if self.log_mag >= rhs.log_mag { (self, rhs) } else { (rhs, self) };
        let ratio = Complex64::from_polar((small.log_mag - big.log_mag).exp(), small.arg - big.arg);
        let sum = Complex64::new(1.0, 0.0) + ratio;
        // stored arguments carry one ulp, so a smaller residue is noise
        if sum.norm() <= 4.0 * f64::EPSILON {
            return Self::zero();
        }
        Self::nonzero(big.log_mag + sum.norm().ln(), big.arg + sum.im.atan2(sum.re))
    }

    fn product(factors: &[Self]) -> Self {
        if factors.iter().any(|f| f.is_zero) {
            return Self::zero();
        }
        let log_mag = sorted_sum(factors.iter().map(|f| f.log_mag).collect());
        let arg = sorted_arg_sum(factors.iter().map(|f| f.arg).collect());
        Self::nonzero(log_mag, arg)
    }

    fn from_integer<E: Exponent>(e: &E) -> Self {
        if e.is_zero() {
            return Self::zero();
        }
        Self::nonzero(e.ln_abs(), if e.is_negative() { PI } else { 0.0 })
    }

    fn decode(self, policy: &DecodePolicy) -> Result<Decoded<Complex64>> {
        if self.is_zero {
            return Ok(Decoded::Value(Complex64::new(0.0, 0.0)));
        }
        let dir = self.direction();
        if self.log_mag.abs() <= policy.threshold {
            return Ok(Decoded::Value(Complex64::from_polar(self.log_mag.exp(), self.arg)));
        }
        match policy.on_out_of_range {
            OnOutOfRange::Error => Err(Error::Range {
                log_mag: self.log_mag,
                phase: self.arg,
                coordinate: None,
            }),
            OnOutOfRange::Saturate if self.log_mag > 0.0 => Ok(Decoded::Overflow(dir)),
            OnOutOfRange::Saturate => Ok(Decoded::Underflow(dir)),
        }
    }
}
