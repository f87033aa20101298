//! Named commuting matrix tuples and their power products.
//!
//! Members are structured: either diagonal, or a perturbed scalar
//! `a I + E_{1n}`. For perturbed scalars `E_{1n}^2 = 0`, so
//! `prod_i (a_i I + E)^{k_i} = (prod_i a_i^{k_i}) (I + (sum_i k_i / a_i) E)`,
//! which holds for negative exponents too. Everything here evaluates that
//! closed form; dense matrices only appear in [`oracle`].

pub mod oracle;

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::dioph::convergents::detect_rational;
use crate::error::{Error, Result};
use crate::lognum::{DecodePolicy, Exponent, FieldValue, LogScalar};

/// Default rotation angle of the complex triangular pair, `2 pi (sqrt 2 - 1)`.
pub const DEFAULT_THETA: f64 = TAU * (std::f64::consts::SQRT_2 - 1.0);

/// Largest exponent magnitude for which closed forms stay in plain `f64`.
const EXACT_EXPONENT: u64 = 1 << 53;

fn minus_one() -> f64 {
    -1.0
}

fn default_theta() -> f64 {
    DEFAULT_THETA
}

/// Scalar field a recipe lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    Real,
    Complex,
}

/// Canonical JSON form: `{"kind": ..., "dim": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleRecipe {
    pub dim: usize,
    #[serde(flatten)]
    pub params: RecipeParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum RecipeParams {
    /// `A = diag(a, a_2..a_n)`, `B = diag(b, b_2..b_n)`; empty tails
    /// default to `a_j = 2`, `b_j = 3`.
    DiagReal {
        a: f64,
        b: f64,
        #[serde(default)]
        a_tail: Vec<f64>,
        #[serde(default)]
        b_tail: Vec<f64>,
    },
    /// Complex analogue; density of `{a^k b^l}` is the caller's claim.
    DiagComplex {
        a: Complex64,
        b: Complex64,
        #[serde(default)]
        a_tail: Vec<Complex64>,
        #[serde(default)]
        b_tail: Vec<Complex64>,
    },
    /// `A = diag(e^{alpha_j})` and `B_j` with `-sqrt(e)` in slot `j`.
    /// Empty `alphas` means `alpha_j = -sqrt(p_j)` for the first primes.
    Kronecker {
        #[serde(default)]
        alphas: Vec<f64>,
    },
    /// `A_j = a_j I + E_{1n}` with `a_1 > 1`, `a_2 = -1`.
    TriReal {
        a1: f64,
        #[serde(default = "minus_one")]
        a2: f64,
    },
    /// `a_1 = a e^{i theta}`, `a_2 = -1`.
    TriComplex {
        a: f64,
        #[serde(default = "default_theta")]
        theta: f64,
        #[serde(default = "minus_one")]
        a2: f64,
    },
    /// A diagonal member paired with the zero operator.
    ZeroPair { member: Vec<f64> },
}

const FIRST_PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

pub fn default_kronecker_alphas(n: usize) -> Vec<f64> {
    let mut primes: Vec<u32> = FIRST_PRIMES.to_vec();
    let mut candidate = 54u32;
    while primes.len() < n {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes[..n].iter().map(|&p| -(p as f64).sqrt()).collect()
}

impl TupleRecipe {
    pub fn diag_real(dim: usize, a: f64, b: f64) -> Self {
        TupleRecipe {
            dim,
            params: RecipeParams::DiagReal {
                a,
                b,
                a_tail: Vec::new(),
                b_tail: Vec::new(),
            },
        }
        .canonical()
    }

    pub fn diag_real_with_tails(a: f64, b: f64, a_tail: Vec<f64>, b_tail: Vec<f64>) -> Self {
        TupleRecipe {
            dim: a_tail.len() + 1,
            params: RecipeParams::DiagReal { a, b, a_tail, b_tail },
        }
    }

    pub fn diag_complex(dim: usize, a: Complex64, b: Complex64) -> Self {
        TupleRecipe {
            dim,
            params: RecipeParams::DiagComplex {
                a,
                b,
                a_tail: Vec::new(),
                b_tail: Vec::new(),
            },
        }
        .canonical()
    }

    pub fn kronecker(dim: usize) -> Self {
        TupleRecipe {
            dim,
            params: RecipeParams::Kronecker { alphas: Vec::new() },
        }
        .canonical()
    }

    pub fn tri_real(dim: usize, a1: f64) -> Self {
        TupleRecipe {
            dim,
            params: RecipeParams::TriReal { a1, a2: -1.0 },
        }
    }

    pub fn tri_complex(dim: usize, a: f64, theta: f64) -> Self {
        TupleRecipe {
            dim,
            params: RecipeParams::TriComplex { a, theta, a2: -1.0 },
        }
    }

    pub fn zero_pair(member: Vec<f64>) -> Self {
        TupleRecipe {
            dim: member.len(),
            params: RecipeParams::ZeroPair { member },
        }
    }

    /// The shipped default of every kind at dimension `dim`.
    pub fn catalog(dim: usize) -> Vec<TupleRecipe> {
        let theta2 = TAU * (3f64.sqrt() - 1.0);
        let mut member = vec![2.0; dim];
        if let Some(first) = member.first_mut() {
            *first = 1.5;
        }
        vec![
            TupleRecipe::diag_real(dim, -0.5, 3.0),
            TupleRecipe::diag_complex(
                dim,
                Complex64::from_polar(1.5, DEFAULT_THETA),
                Complex64::from_polar(0.75, theta2),
            ),
            TupleRecipe::kronecker(dim),
            TupleRecipe::tri_real(dim, 2.0),
            TupleRecipe::tri_complex(dim, 2.0, DEFAULT_THETA),
            TupleRecipe::zero_pair(member),
        ]
    }

    pub fn kind(&self) -> &'static str {
        match self.params {
            RecipeParams::DiagReal { .. } => "DiagReal",
            RecipeParams::DiagComplex { .. } => "DiagComplex",
            RecipeParams::Kronecker { .. } => "Kronecker",
            RecipeParams::TriReal { .. } => "TriReal",
            RecipeParams::TriComplex { .. } => "TriComplex",
            RecipeParams::ZeroPair { .. } => "ZeroPair",
        }
    }

    pub fn field(&self) -> Field {
        match self.params {
            RecipeParams::DiagComplex { .. } | RecipeParams::TriComplex { .. } => Field::Complex,
            _ => Field::Real,
        }
    }

    /// Fill defaulted parameters (tails, Kronecker exponents).
    pub fn canonical(mut self) -> Self {
        let tail = self.dim.saturating_sub(1);
        match &mut self.params {
            RecipeParams::DiagReal { a_tail, b_tail, .. } => {
                if a_tail.is_empty() {
                    *a_tail = vec![2.0; tail];
                }
                if b_tail.is_empty() {
                    *b_tail = vec![3.0; tail];
                }
            }
            RecipeParams::DiagComplex { a_tail, b_tail, .. } => {
                if a_tail.is_empty() {
                    *a_tail = vec![Complex64::new(2.0, 0.0); tail];
                }
                if b_tail.is_empty() {
                    *b_tail = vec![Complex64::new(3.0, 0.0); tail];
                }
            }
            RecipeParams::Kronecker { alphas } if alphas.is_empty() => {
                *alphas = default_kronecker_alphas(self.dim);
            }
            _ => {}
        }
        self
    }

    /// Check the parameter domain of the recipe's kind.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::validation("dim must be at least 1"));
        }
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match &self.params {
            RecipeParams::DiagReal { a, b, a_tail, b_tail } => {
                if !finite(&[*a, *b]) || !finite(a_tail) || !finite(b_tail) {
                    return Err(Error::validation("DiagReal parameters must be finite"));
                }
                if !(-1.0 < *a && *a < 0.0) {
                    return Err(Error::validation(format!("DiagReal needs -1 < a < 0, got a = {a}")));
                }
                if *b <= 1.0 {
                    return Err(Error::validation(format!("DiagReal needs b > 1, got b = {b}")));
                }
                check_tails(n, a_tail.len(), b_tail.len())?;
                if let Some((i, v)) = a_tail.iter().chain(b_tail).enumerate().find(|(_, v)| v.abs() <= 1.0) {
                    return Err(Error::validation(format!(
                        "DiagReal tail entries need modulus > 1 (entry {i} is {v})"
                    )));
                }
                let ratio = a.abs().ln() / b.ln();
                if let Some((p, q)) = detect_rational(ratio) {
                    return Err(Error::validation(format!(
                        "ln|a|/ln b = {ratio} is the rational {p}/{q}"
                    )));
                }
            }
            RecipeParams::DiagComplex { a, b, a_tail, b_tail } => {
                let all = [*a, *b];
                if all.iter().chain(a_tail).chain(b_tail).any(|z| !FieldValue::is_finite(*z)) {
                    return Err(Error::validation("DiagComplex parameters must be finite"));
                }
                if a.norm() == 0.0 || b.norm() == 0.0 {
                    return Err(Error::validation("DiagComplex needs nonzero a and b"));
                }
                check_tails(n, a_tail.len(), b_tail.len())?;
                if a_tail.iter().chain(b_tail).any(|z| z.norm() <= 1.0) {
                    return Err(Error::validation("DiagComplex tail entries need modulus > 1"));
                }
            }
            RecipeParams::Kronecker { alphas } => {
                if alphas.len() != n {
                    return Err(Error::validation(format!(
                        "Kronecker needs {n} exponents, got {}",
                        alphas.len()
                    )));
                }
                if alphas.iter().any(|&x| !(x < 0.0) || !x.is_finite()) {
                    return Err(Error::validation("Kronecker exponents must be negative reals"));
                }
                for (i, x) in alphas.iter().enumerate() {
                    if alphas[..i].contains(x) {
                        return Err(Error::validation("Kronecker exponents must be pairwise distinct"));
                    }
                }
            }
            RecipeParams::TriReal { a1, a2 } => {
                if n < 2 {
                    return Err(Error::validation("TriReal needs dim >= 2"));
                }
                if !(*a1 > 1.0) || !a1.is_finite() {
                    return Err(Error::validation(format!("TriReal needs a1 > 1, got {a1}")));
                }
                if *a2 != -1.0 {
                    return Err(Error::validation(format!("TriReal needs a2 = -1 exactly, got {a2}")));
                }
            }
            RecipeParams::TriComplex { a, theta, a2 } => {
                if n < 2 {
                    return Err(Error::validation("TriComplex needs dim >= 2"));
                }
                if !(*a > 1.0) || !a.is_finite() {
                    return Err(Error::validation(format!("TriComplex needs a > 1, got {a}")));
                }
                if !theta.is_finite() {
                    return Err(Error::validation("TriComplex theta must be finite"));
                }
                if *a2 != -1.0 {
                    return Err(Error::validation(format!("TriComplex needs a2 = -1 exactly, got {a2}")));
                }
                if let Some((p, q)) = detect_rational(theta / PI) {
                    return Err(Error::validation(format!("theta is the rational multiple {p}/{q} of pi")));
                }
            }
            RecipeParams::ZeroPair { member } => {
                if member.len() != n {
                    return Err(Error::validation(format!(
                        "ZeroPair member needs {n} diagonal entries, got {}",
                        member.len()
                    )));
                }
                if !finite(member) {
                    return Err(Error::validation("ZeroPair member entries must be finite"));
                }
            }
        }
        Ok(())
    }
}

fn check_tails(n: usize, a_len: usize, b_len: usize) -> Result<()> {
    if a_len != n - 1 || b_len != n - 1 {
        return Err(Error::validation(format!(
            "tails must have dim - 1 = {} entries (got {a_len} and {b_len})",
            n - 1
        )));
    }
    Ok(())
}

/// Nonnegative exponents `(k_1, ..., k_m)`, one per tuple member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExponentVector {
    exps: Vec<BigUint>,
}

impl ExponentVector {
    pub fn new(exps: Vec<BigUint>) -> Self {
        ExponentVector { exps }
    }

    pub fn zeros(len: usize) -> Self {
        ExponentVector {
            exps: vec![BigUint::zero(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exps(&self) -> &[BigUint] {
        &self.exps
    }

    pub fn get(&self, i: usize) -> &BigUint {
        &self.exps[i]
    }

    /// Sum of the exponents; condition (1) drives this to infinity.
    pub fn total(&self) -> BigUint {
        self.exps.iter().sum()
    }

    pub fn to_u64s(&self) -> Option<Vec<u64>> {
        self.exps.iter().map(ToPrimitive::to_u64).collect()
    }

    pub fn to_signed(&self) -> Vec<BigInt> {
        self.exps.iter().map(|e| BigInt::from(e.clone())).collect()
    }

    pub fn negated(&self) -> Vec<BigInt> {
        self.exps.iter().map(|e| -BigInt::from(e.clone())).collect()
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl From<Vec<u64>> for ExponentVector {
    fn from(v: Vec<u64>) -> Self {
        ExponentVector {
            exps: v.into_iter().map(BigUint::from).collect(),
        }
    }
}

impl From<&[u64]> for ExponentVector {
    fn from(v: &[u64]) -> Self {
        v.to_vec().into()
    }
}

impl<const N: usize> From<[u64; N]> for ExponentVector {
    fn from(v: [u64; N]) -> Self {
        v.to_vec().into()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Exponents serialize as JSON numbers when they fit `u64`, otherwise as
/// decimal strings.
impl Serialize for ExponentVector {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(self.exps.len()))?;
        for e in &self.exps {
            match e.to_u64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&e.to_string())?,
            }
        }
        seq.end()
    }
}

/// One structured member of a tuple.
#[derive(Clone, Debug, PartialEq)]
pub enum Member<S: LogScalar> {
    Diagonal(Vec<S>),
    /// `value * I + E_{1n}`.
    PerturbedScalar { diag: S, value: S::Value },
}

/// `sum_i k_i / a_i` for perturbed-scalar products; kept as a plain value
/// whenever every exponent is exactly representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CornerFactor<S: LogScalar> {
    Exact(S::Value),
    Log(S),
}

impl<S: LogScalar> CornerFactor<S> {
    pub fn to_log(self) -> Result<S> {
        match self {
            CornerFactor::Exact(v) => S::encode(v),
            CornerFactor::Log(s) => Ok(s),
        }
    }

    pub fn to_value(self) -> S::Value {
        match self {
            CornerFactor::Exact(v) => v,
            CornerFactor::Log(s) => s.to_value(),
        }
    }
}

/// Closed form of `T_1^{k_1} ... T_m^{k_m}`: diagonal entries, plus the
/// `(1, n)` corner `diag * factor` for perturbed-scalar tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredPower<S: LogScalar> {
    pub diag: Vec<S>,
    pub corner_factor: Option<CornerFactor<S>>,
}

impl<S: LogScalar> StructuredPower<S> {
    pub fn corner(&self) -> Result<Option<S>> {
        match self.corner_factor {
            None => Ok(None),
            Some(f) => Ok(Some(self.diag[0].mul(f.to_log()?))),
        }
    }

    pub fn apply_log(&self, v: &[S]) -> Result<Vec<S>> {
        let n = self.diag.len();
        if v.len() != n {
            return Err(Error::invalid(format!("vector has length {}, tuple dimension is {n}", v.len())));
        }
        let mut out: Vec<S> = self.diag.iter().zip(v).map(|(d, x)| d.mul(*x)).collect();
        if let Some(f) = self.corner_factor {
            // row 1: d (v_1 + factor * v_n)
            let inner = v[0].add(f.to_log()?.mul(v[n - 1]));
            out[0] = self.diag[0].mul(inner);
        }
        Ok(out)
    }
}

/// A validated tuple of pairwise commuting structured matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple<S: LogScalar> {
    recipe: TupleRecipe,
    members: Vec<Member<S>>,
}

impl<S: LogScalar> MatrixTuple<S> {
    /// Build and validate; members are checked to commute by dense
    /// multiplication at dimension `min(n, 4)`.
    pub fn build(recipe: &TupleRecipe) -> Result<Self> {
        let recipe = recipe.clone().canonical();
        recipe.validate()?;
        if recipe.field() == Field::Complex && S::Value::REAL_DIM == 1 {
            return Err(Error::validation(format!(
                "{} is a complex recipe and needs complex scalars",
                recipe.kind()
            )));
        }
        let members = build_members::<S>(&recipe)?;
        let tuple = MatrixTuple { recipe, members };
        tuple.check_commuting()?;
        Ok(tuple)
    }

    pub fn recipe(&self) -> &TupleRecipe {
        &self.recipe
    }

    pub fn dim(&self) -> usize {
        self.recipe.dim
    }

    pub fn members(&self) -> &[Member<S>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_triangular(&self) -> bool {
        matches!(self.members.first(), Some(Member::PerturbedScalar { .. }))
    }

    pub fn is_invertible(&self) -> bool {
        self.members.iter().all(|m| match m {
            Member::Diagonal(d) => d.iter().all(|x| !x.is_zero()),
            Member::PerturbedScalar { diag, .. } => !diag.is_zero(),
        })
    }

    /// Entry `(row, col)` of member `i` as a plain value, for dense checks.
    pub fn dense_member(&self, i: usize, dim: usize) -> oracle::DenseMatrix<S::Value> {
        oracle::DenseMatrix::from_member(&self.members[i], dim)
    }

    fn check_commuting(&self) -> Result<()> {
        let m = self.dim().min(4);
        let dense: Vec<_> = (0..self.len()).map(|i| self.dense_member(i, m)).collect();
        for i in 0..dense.len() {
            for j in i + 1..dense.len() {
                let ab = dense[i].mul(&dense[j]);
                let ba = dense[j].mul(&dense[i]);
                if ab.max_abs_diff(&ba) > 1e-12 {
                    return Err(Error::validation(format!("members {i} and {j} do not commute")));
                }
            }
        }
        Ok(())
    }

    fn check_len<E>(&self, exps: &[E]) -> Result<()> {
        if exps.len() != self.len() {
            return Err(Error::invalid(format!(
                "tuple has {} members, got {} exponents",
                self.len(),
                exps.len()
            )));
        }
        Ok(())
    }

    /// `sum_i e_i / a_i` for perturbed-scalar members.
    pub fn corner_factor<E: Exponent>(&self, exps: &[E]) -> Result<Option<CornerFactor<S>>> {
        self.check_len(exps)?;
        if !self.is_triangular() {
            return Ok(None);
        }
        let values: Vec<S::Value> = self
            .members
            .iter()
            .map(|m| match m {
                Member::PerturbedScalar { value, .. } => *value,
                Member::Diagonal(_) => unreachable!("recipes never mix member shapes"),
            })
            .collect();
        let exact = exps.iter().all(|e| e.to_f64().abs() <= EXACT_EXPONENT as f64);
        if exact {
            let mut terms: Vec<S::Value> = exps
                .iter()
                .zip(&values)
                .filter(|(e, _)| !e.is_zero())
                .map(|(e, a)| S::Value::from_real(e.to_f64()) / *a)
                .collect();
            terms.sort_by(|x, y| {
                let (x, y) = (x.to_complex(), y.to_complex());
                x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
            });
            let sum = terms.into_iter().fold(S::Value::zero(), |acc, t| acc + t);
            return Ok(Some(CornerFactor::Exact(sum)));
        }
        let mut terms = Vec::with_capacity(exps.len());
        for (e, m) in exps.iter().zip(&self.members) {
            if e.is_zero() {
                continue;
            }
            let Member::PerturbedScalar { diag, .. } = m else { unreachable!() };
            terms.push(S::from_integer(e).mul(diag.recip()?));
        }
        terms.sort_by(|x, y| {
            x.log_mag()
                .total_cmp(&y.log_mag())
                .then(x.phase().total_cmp(&y.phase()))
        });
        let sum = terms.into_iter().fold(S::zero(), |acc, t| acc.add(t));
        Ok(Some(CornerFactor::Log(sum)))
    }

    /// Closed form of the power product for signed exponents.
    pub fn entries_signed<E: Exponent>(&self, exps: &[E]) -> Result<StructuredPower<S>> {
        self.check_len(exps)?;
        let n = self.dim();
        let singular = |i: usize| Error::Singular(format!("negative power of non-invertible member {i}"));
        if self.is_triangular() {
            let mut factors = Vec::with_capacity(exps.len());
            for (i, (m, e)) in self.members.iter().zip(exps).enumerate() {
                let Member::PerturbedScalar { diag, .. } = m else { unreachable!() };
                factors.push(diag.pow(e).map_err(|err| match err {
                    Error::Singular(_) => singular(i),
                    other => other,
                })?);
            }
            let d = S::product(&factors);
            return Ok(StructuredPower {
                diag: vec![d; n],
                corner_factor: self.corner_factor(exps)?,
            });
        }
        let mut diag = Vec::with_capacity(n);
        let mut factors = Vec::with_capacity(exps.len());
        for j in 0..n {
            factors.clear();
            for (i, (m, e)) in self.members.iter().zip(exps).enumerate() {
                let Member::Diagonal(entries) = m else { unreachable!() };
                factors.push(entries[j].pow(e).map_err(|err| match err {
                    Error::Singular(_) => singular(i),
                    other => other,
                })?);
            }
            diag.push(S::product(&factors));
        }
        Ok(StructuredPower {
            diag,
            corner_factor: None,
        })
    }

    pub fn power_product_entries(&self, k: &ExponentVector) -> Result<StructuredPower<S>> {
        self.entries_signed(k.exps())
    }

    /// `T^K v` entirely in the log domain.
    pub fn apply_log(&self, k: &ExponentVector, v: &[S]) -> Result<Vec<S>> {
        self.power_product_entries(k)?.apply_log(v)
    }

    /// `T^{-K} v` entirely in the log domain.
    pub fn inverse_apply_log(&self, k: &ExponentVector, v: &[S]) -> Result<Vec<S>> {
        if !self.is_invertible() {
            return Err(Error::Singular(format!("{} tuple has a singular member", self.recipe.kind())));
        }
        self.entries_signed(&k.negated())?.apply_log(v)
    }

    pub fn power_product_apply(
        &self,
        k: &ExponentVector,
        v: &[S::Value],
        policy: &DecodePolicy,
    ) -> Result<Vec<S::Value>> {
        let out = self.apply_log(k, &encode_vec::<S>(v)?)?;
        decode_vec(&out, policy)
    }

    pub fn inverse_power_product_apply(
        &self,
        k: &ExponentVector,
        v: &[S::Value],
        policy: &DecodePolicy,
    ) -> Result<Vec<S::Value>> {
        let out = self.inverse_apply_log(k, &encode_vec::<S>(v)?)?;
        decode_vec(&out, policy)
    }
}

pub fn encode_vec<S: LogScalar>(v: &[S::Value]) -> Result<Vec<S>> {
    v.iter().map(|&x| S::encode(x)).collect()
}

/// Decode coordinate-wise; range errors name the offending coordinate.
pub fn decode_vec<S: LogScalar>(v: &[S], policy: &DecodePolicy) -> Result<Vec<S::Value>> {
    v.iter()
        .enumerate()
        .map(|(i, s)| {
            s.decode(policy)
                .map(|d| d.saturated())
                .map_err(|e| e.at_coordinate(i))
        })
        .collect()
}

fn value_of<S: LogScalar>(x: f64) -> Result<S> {
    S::from_real(x)
}

fn complex_of<S: LogScalar>(z: Complex64) -> Result<S> {
    let v = S::Value::from_complex(z)
        .ok_or_else(|| Error::validation("complex parameter in a real tuple"))?;
    S::encode(v)
}

fn build_members<S: LogScalar>(recipe: &TupleRecipe) -> Result<Vec<Member<S>>> {
    let n = recipe.dim;
    let diag = |first: S, rest: Vec<S>| {
        let mut d = vec![first];
        d.extend(rest);
        Member::Diagonal(d)
    };
    Ok(match &recipe.params {
        RecipeParams::DiagReal { a, b, a_tail, b_tail } => {
            let at = a_tail.iter().map(|&x| value_of(x)).collect::<Result<_>>()?;
            let bt = b_tail.iter().map(|&x| value_of(x)).collect::<Result<_>>()?;
            vec![diag(value_of(*a)?, at), diag(value_of(*b)?, bt)]
        }
        RecipeParams::DiagComplex { a, b, a_tail, b_tail } => {
            let at = a_tail.iter().map(|&x| complex_of(x)).collect::<Result<_>>()?;
            let bt = b_tail.iter().map(|&x| complex_of(x)).collect::<Result<_>>()?;
            vec![diag(complex_of(*a)?, at), diag(complex_of(*b)?, bt)]
        }
        RecipeParams::Kronecker { alphas } => {
            // e^{alpha_j} and -sqrt(e) are stored by their exact logarithms.
            let a = alphas.iter().map(|&x| S::from_log_polar(x, 0.0)).collect::<Result<Vec<_>>>()?;
            let minus_root_e = S::from_log_polar(0.5, PI)?;
            let mut members = vec![Member::Diagonal(a)];
            for j in 0..n {
                let mut d = vec![S::one(); n];
                d[j] = minus_root_e;
                members.push(Member::Diagonal(d));
            }
            members
        }
        RecipeParams::TriReal { a1, a2 } => vec![
            Member::PerturbedScalar {
                diag: value_of(*a1)?,
                value: S::Value::from_real(*a1),
            },
            Member::PerturbedScalar {
                diag: value_of(*a2)?,
                value: S::Value::from_real(*a2),
            },
        ],
        RecipeParams::TriComplex { a, theta, a2 } => {
            let value = S::Value::from_complex(Complex64::from_polar(*a, *theta))
                .ok_or_else(|| Error::validation("TriComplex needs complex scalars"))?;
            vec![
                Member::PerturbedScalar {
                    diag: S::from_log_polar(a.ln(), *theta)?,
                    value,
                },
                Member::PerturbedScalar {
                    diag: value_of(*a2)?,
                    value: S::Value::from_real(*a2),
                },
            ]
        }
        RecipeParams::ZeroPair { member } => {
            let d = member.iter().map(|&x| value_of(x)).collect::<Result<Vec<_>>>()?;
            vec![Member::Diagonal(d), Member::Diagonal(vec![S::zero(); n])]
        }
    })
}

/// A tuple over whichever field its recipe needs.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTuple {
    Real(MatrixTuple<crate::lognum::LogSignScalar>),
    Complex(MatrixTuple<crate::lognum::LogArgScalar>),
}

impl AnyTuple {
    pub fn build(recipe: &TupleRecipe) -> Result<Self> {
        match recipe.field() {
            Field::Real => MatrixTuple::build(recipe).map(AnyTuple::Real),
            Field::Complex => MatrixTuple::build(recipe).map(AnyTuple::Complex),
        }
    }

    pub fn recipe(&self) -> &TupleRecipe {
        match self {
            AnyTuple::Real(t) => t.recipe(),
            AnyTuple::Complex(t) => t.recipe(),
        }
    }
}

/// `build_tuple` entry point: the recipe decides the field.
pub fn build_tuple(recipe: &TupleRecipe) -> Result<AnyTuple> {
    AnyTuple::build(recipe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lognum::{LogArgScalar, LogSignScalar};

    type RealTuple = MatrixTuple<LogSignScalar>;

    fn diag_values(t: &RealTuple, i: usize) -> Vec<f64> {
        match &t.members()[i] {
            Member::Diagonal(d) => d.iter().map(|x| x.to_value()).collect(),
            _ => panic!("not diagonal"),
        }
    }

    #[test]
    fn diag_real_example_pair() {
        let t = RealTuple::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(diag_values(&t, 0), vec![-0.5, 2.0]);
        let b = diag_values(&t, 1);
        assert!((b[0] - 3.0).abs() < 1e-15 && (b[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn tri_real_dense_form() {
        let t = RealTuple::build(&TupleRecipe::tri_real(2, 2.0)).unwrap();
        assert_eq!(t.dense_member(0, 2).rows(), vec![vec![2.0, 1.0], vec![0.0, 2.0]]);
        assert_eq!(t.dense_member(1, 2).rows(), vec![vec![-1.0, 1.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn kronecker_one_dimensional() {
        let t = RealTuple::build(&TupleRecipe::kronecker(1)).unwrap();
        let a = diag_values(&t, 0)[0];
        let b = diag_values(&t, 1)[0];
        assert!((a - (-(2f64.sqrt())).exp()).abs() < 1e-15);
        assert!((b + 1f64.exp().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn validation_names_the_constraint() {
        let err = RealTuple::build(&TupleRecipe::diag_real(2, -1.5, 3.0)).unwrap_err();
        assert!(err.to_string().contains("-1 < a < 0"), "{err}");
        let err = RealTuple::build(&TupleRecipe::diag_real(2, -0.5, 0.5)).unwrap_err();
        assert!(err.to_string().contains("b > 1"));
        // ln(1/3) / ln 9 = -1/2
        let err = RealTuple::build(&TupleRecipe::diag_real(2, -1.0 / 3.0, 9.0)).unwrap_err();
        assert!(err.to_string().contains("rational"), "{err}");
        let err = RealTuple::build(&TupleRecipe::diag_real(2, -0.5, 4.0)).unwrap_err();
        assert!(err.to_string().contains("rational"), "{err}");
        let bad_tail = TupleRecipe::diag_real_with_tails(-0.5, 3.0, vec![0.5], vec![3.0]);
        assert!(RealTuple::build(&bad_tail).is_err());
        assert!(RealTuple::build(&TupleRecipe::tri_real(1, 2.0)).is_err());
        let mut r = TupleRecipe::tri_real(2, 2.0);
        r.params = RecipeParams::TriReal { a1: 2.0, a2: -1.0000001 };
        assert!(RealTuple::build(&r).is_err());
        assert!(RealTuple::build(&TupleRecipe::tri_complex(2, 2.0, DEFAULT_THETA)).is_err());
        assert!(MatrixTuple::<LogArgScalar>::build(&TupleRecipe::tri_complex(2, 2.0, PI / 4.0)).is_err());
    }

    #[test]
    fn every_catalog_recipe_builds() {
        for n in [2, 3, 5] {
            for r in TupleRecipe::catalog(n) {
                build_tuple(&r).unwrap_or_else(|e| panic!("{} at n={n}: {e}", r.kind()));
            }
        }
    }

    #[test]
    fn recipe_json_shape() {
        let r = TupleRecipe::tri_real(2, 2.0);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "TriReal");
        assert_eq!(v["dim"], 2);
        assert_eq!(v["params"]["a1"], 2.0);
        let back: TupleRecipe = serde_json::from_str(r#"{"kind":"Kronecker","dim":2,"params":{}}"#).unwrap();
        assert_eq!(back.canonical(), TupleRecipe::kronecker(2));
        let c: TupleRecipe =
            serde_json::from_str(r#"{"kind":"TriComplex","dim":2,"params":{"a":2.0}}"#).unwrap();
        assert_eq!(c, TupleRecipe::tri_complex(2, 2.0, DEFAULT_THETA));
    }

    #[test]
    fn tri_real_product_and_corner() {
        let t = RealTuple::build(&TupleRecipe::tri_real(2, 2.0)).unwrap();
        let p = t.power_product_entries(&[1, 1].into()).unwrap();
        assert_eq!(p.diag[0].to_value(), -2.0);
        assert_eq!(p.corner_factor.unwrap().to_value(), -0.5);
        assert!((p.corner().unwrap().unwrap().to_value() - 1.0).abs() < 1e-15);
        let v = t.power_product_apply(&[1, 1].into(), &[1.0, 1.0], &DecodePolicy::default()).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_exponents_give_identity() {
        for r in TupleRecipe::catalog(3) {
            match build_tuple(&r).unwrap() {
                AnyTuple::Real(t) => {
                    let k = ExponentVector::zeros(t.len());
                    let v = [0.3, -1.7, 4.0];
                    assert_eq!(t.power_product_apply(&k, &v, &DecodePolicy::default()).unwrap(), v);
                    let p = t.power_product_entries(&k).unwrap();
                    assert!(p.diag.iter().all(|d| *d == LogSignScalar::one()));
                    if let Some(c) = p.corner_factor {
                        assert_eq!(c.to_value(), 0.0);
                    }
                }
                AnyTuple::Complex(t) => {
                    let k = ExponentVector::zeros(t.len());
                    let v = [Complex64::new(0.3, 1.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 0.5)];
                    let out = t.power_product_apply(&k, &v, &DecodePolicy::default()).unwrap();
                    for (a, b) in out.iter().zip(&v) {
                        assert!((a - b).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn diag_real_large_exponents() {
        let t = RealTuple::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        let p = t.power_product_entries(&[38, 24].into()).unwrap();
        assert!((p.diag[0].to_value() - 1.027_472_668_214_614).abs() < 1e-12);
        assert_eq!(p.diag[1].sign(), 1);
        assert!((p.diag[1].log_mag() - (38.0 * 2f64.ln() + 24.0 * 3f64.ln())).abs() < 1e-12);
        let v = t.power_product_apply(&[38, 24].into(), &[1.0, 0.0], &DecodePolicy::default()).unwrap();
        assert!((v[0] - 1.027_472_668_214_614).abs() < 1e-12);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn inverse_examples() {
        let t = RealTuple::build(&TupleRecipe::tri_real(2, 2.0)).unwrap();
        let v = t
            .inverse_power_product_apply(&[1, 0].into(), &[1.0, 2.0], &DecodePolicy::default())
            .unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        let d = RealTuple::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        let k = ExponentVector::from([5, 7]);
        let x = [0.37, -2.2];
        let fwd = d.power_product_apply(&k, &x, &DecodePolicy::default()).unwrap();
        let back = d.inverse_power_product_apply(&k, &fwd, &DecodePolicy::default()).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() <= 1e-9 * b.abs());
        }
        let z = RealTuple::build(&TupleRecipe::zero_pair(vec![2.0, 3.0])).unwrap();
        assert!(matches!(
            z.inverse_power_product_apply(&[1, 0].into(), &[1.0, 1.0], &DecodePolicy::default()),
            Err(Error::Singular(_))
        ));
        assert!(matches!(z.entries_signed(&[0i64, -1]), Err(Error::Singular(_))));
    }

    #[test]
    fn overflow_error_names_coordinate() {
        let t = RealTuple::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        let err = t
            .power_product_apply(&[0, 1000].into(), &[1.0, 1.0], &DecodePolicy::error())
            .unwrap_err();
        assert!(matches!(err, Error::Range { coordinate: Some(0), .. }), "{err:?}");
    }

    #[test]
    fn corner_formula_at_large_exponents() {
        let t = RealTuple::build(&TupleRecipe::tri_real(3, 2.0)).unwrap();
        let p = t.power_product_entries(&[999_999, 123_457].into()).unwrap();
        let want = 999_999.0 / 2.0 + 123_457.0 / -1.0;
        assert_eq!(p.corner_factor.unwrap().to_value(), want);
        // beyond 2^53 the factor falls back to the log domain
        let huge = ExponentVector::new(vec![BigUint::from(3u8), BigUint::from(1u8) << 200]);
        let f = t.power_product_entries(&huge).unwrap().corner_factor.unwrap();
        assert!(matches!(f, CornerFactor::Log(_)));
        let s = f.to_log().unwrap();
        assert_eq!(s.sign(), -1);
        assert!((s.log_mag() - 200.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exponent_vector_json() {
        let k = ExponentVector::new(vec![BigUint::from(3u8), BigUint::from(1u8) << 70]);
        assert_eq!(serde_json::to_string(&k).unwrap(), r#"[3,"1180591620717411303424"]"#);
        assert_eq!(k.total(), BigUint::from(3u8) + (BigUint::from(1u8) << 70));
        assert_eq!(ExponentVector::from([38, 24]).to_string(), "(38, 24)");
    }
}
