//! Literal dense matrices, used only to cross-check the closed forms.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lognum::{FieldValue, LogScalar};

use super::{Member, MatrixTuple};

/// Largest `sum |k_i|` the oracle multiplies out.
pub const ORACLE_MAX_TOTAL: u64 = 64;
/// Largest entry modulus the oracle accepts.
pub const ORACLE_MAX_ENTRY: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<V> {
    n: usize,
    data: Vec<V>,
}

impl<V: FieldValue> DenseMatrix<V> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![V::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = V::one();
        }
        DenseMatrix { n, data }
    }

    /// The member truncated (or padded) to an `n x n` matrix.
    pub fn from_member<S: LogScalar<Value = V>>(member: &Member<S>, n: usize) -> Self {
        let mut m = DenseMatrix {
            n,
            data: vec![V::zero(); n * n],
        };
        match member {
            Member::Diagonal(d) => {
                for i in 0..n {
                    m.data[i * n + i] = d[i].to_value();
                }
            }
            Member::PerturbedScalar { value, .. } => {
                for i in 0..n {
                    m.data[i * n + i] = *value;
                }
                m.data[n - 1] = m.data[n - 1] + V::one();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> V {
        self.data[row * self.n + col]
    }

    pub fn rows(&self) -> Vec<Vec<V>> {
        self.data.chunks(self.n).map(<[V]>::to_vec).collect()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut data = vec![V::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == V::zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        DenseMatrix { n, data }
    }

    pub fn apply(&self, v: &[V]) -> Vec<V> {
        (0..self.n)
            .map(|i| (0..self.n).fold(V::zero(), |acc, j| acc + self.data[i * self.n + j] * v[j]))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).modulus())
            .fold(0.0, f64::max)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].modulus().total_cmp(&a[s * n + col].modulus()))
                .filter(|&r| a[r * n + col].modulus() > 0.0)
                .ok_or_else(|| Error::Singular("dense matrix is singular".into()))?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[col * n + col];
            for j in 0..n {
                a[col * n + j] = a[col * n + j] / p;
                inv[col * n + j] = inv[col * n + j] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == V::zero() {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] = a[r * n + j] - f * a[col * n + j];
                    inv[r * n + j] = inv[r * n + j] - f * inv[col * n + j];
                }
            }
        }
        Ok(DenseMatrix { n, data: inv })
    }

    /// `self^e` by repeated multiplication; negative powers invert first.
    pub fn power(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut out = Self::identity(self.n);
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }
}

fn check_preconditions<S: LogScalar>(tuple: &MatrixTuple<S>, k: &[i64]) -> Result<()> {
    if k.len() != tuple.len() {
        return Err(Error::invalid(format!(
            "tuple has {} members, got {} exponents",
            tuple.len(),
            k.len()
        )));
    }
    let total: u64 = k.iter().map(|e| e.unsigned_abs()).sum();
    if total > ORACLE_MAX_TOTAL {
        return Err(Error::OutOfRange(format!(
            "dense oracle needs sum |k_i| <= {ORACLE_MAX_TOTAL}, got {total}"
        )));
    }
    Ok(())
}

fn dense_members<S: LogScalar>(tuple: &MatrixTuple<S>) -> Result<Vec<DenseMatrix<S::Value>>> {
    let n = tuple.dim();
    let members: Vec<_> = (0..tuple.len()).map(|i| tuple.dense_member(i, n)).collect();
    if let Some(big) = members.iter().map(DenseMatrix::max_entry).find(|&m| m > ORACLE_MAX_ENTRY) {
        return Err(Error::OutOfRange(format!(
            "dense oracle needs entries of modulus <= {ORACLE_MAX_ENTRY}, got {big}"
        )));
    }
    Ok(members)
}

/// `T_1^{k_1} ... T_m^{k_m} v` by literal matrix multiplication.
pub fn dense_oracle_apply<S: LogScalar>(tuple: &MatrixTuple<S>, k: &[i64], v: &[S::Value]) -> Result<Vec<S::Value>> {
    check_preconditions(tuple, k)?;
    let members = dense_members(tuple)?;
    let mut product = DenseMatrix::identity(tuple.dim());
    for (m, &e) in members.iter().zip(k) {
        product = product.mul(&m.power(e)?);
    }
    Ok(product.apply(v))
}

/// Dense oracle with memoized member powers, for exhaustive sweeps.
pub struct DenseOracle<V> {
    members: Vec<DenseMatrix<V>>,
    powers: Vec<HashMap<i64, DenseMatrix<V>>>,
}

impl<V: FieldValue> DenseOracle<V> {
    pub fn new<S: LogScalar<Value = V>>(tuple: &MatrixTuple<S>) -> Result<Self> {
        let members = dense_members(tuple)?;
        let powers = vec![HashMap::new(); members.len()];
        Ok(DenseOracle { members, powers })
    }

    /// Precompute member powers for exponents `0..=max`.
    pub fn with_powers(mut self, max: i64) -> Result<Self> {
        for (m, cache) in self.members.iter().zip(&mut self.powers) {
            let mut p = DenseMatrix::identity(m.dim());
            for e in 0..=max {
                cache.insert(e, p.clone());
                p = p.mul(m);
            }
        }
        Ok(self)
    }

    pub fn product(&self, k: &[i64]) -> Result<DenseMatrix<V>> {
        let total: u64 = k.iter().map(|e| e.unsigned_abs()).sum();
        if total > ORACLE_MAX_TOTAL {
            return Err(Error::OutOfRange(format!(
                "dense oracle needs sum |k_i| <= {ORACLE_MAX_TOTAL}, got {total}"
            )));
        }
        let n = self.members[0].dim();
        let mut product = DenseMatrix::identity(n);
        for ((m, cache), &e) in self.members.iter().zip(&self.powers).zip(k) {
            if e == 0 {
                continue;
            }
            match cache.get(&e) {
                Some(p) => product = product.mul(p),
                None => product = product.mul(&m.power(e)?),
            }
        }
        Ok(product)
    }
}
