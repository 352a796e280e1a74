//! Dense matrices over the integers with exact arithmetic.
//!
//! Entries are arbitrary-precision ([`BigInt`]); intermediate values in exact
//! elimination routinely exceed 64 bits even for small inputs, so there is no
//! fixed-width fast path. JSON serialization writes every entry as a decimal
//! string for the same reason.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("minor order {order} out of range 1..={max}")]
    MinorOrderOutOfRange { order: usize, max: usize },
    #[error("matrix exceeds the configured oracle bound ({min_dim} > {bound})")]
    OracleBoundExceeded { min_dim: usize, bound: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("entry grid is ragged or does not match rows x cols")]
    ShapeMismatch,
}

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, entries }
    }

    /// Builds a matrix from row slices of machine integers. Panics on ragged input.
    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn diagonal(values: &[i64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                BigInt::from(values[i])
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> IntMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    /// `self + k*I`; panics if not square.
    pub fn add_scalar_identity(&self, k: &BigInt) -> IntMatrix {
        assert!(self.is_square(), "shift requires a square matrix");
        let mut m = self.clone();
        for i in 0..self.rows {
            let v = &m[(i, i)] + k;
            m[(i, i)] = v;
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            // Skipping zero multipliers keeps products of the sparse 0/1
            // operator matrices cheap despite dense storage.
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let v = &out[(i, j)] + a * b;
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    /// Gram matrix `self^t * self`, exploiting row sparsity.
    pub fn gram_ata(&self) -> IntMatrix {
        let mut out = IntMatrix::zero(self.cols, self.cols);
        let mut nz: Vec<(usize, BigInt)> = Vec::new();
        for i in 0..self.rows {
            nz.clear();
            for j in 0..self.cols {
                if !self[(i, j)].is_zero() {
                    nz.push((j, self[(i, j)].clone()));
                }
            }
            for (a, va) in &nz {
                for (b, vb) in &nz {
                    let v = &out[(*a, *b)] + va * vb;
                    out[(*a, *b)] = v;
                }
            }
        }
        out
    }

    /// Gram matrix `self * self^t`, exploiting row sparsity.
    pub fn gram_aat(&self) -> IntMatrix {
        self.transpose().gram_ata()
    }

    /// Sparse-aware `self^t * other` for matrices with equal row counts.
    pub fn transposed_mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zero(self.cols, other.cols);
        for r in 0..self.rows {
            for i in 0..self.cols {
                let a = &self[(r, i)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(r, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let v = &out[(i, j)] + a * b;
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    /// Exact determinant via fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)].clone()).collect())
            .collect();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                    m[i][j] = v;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        Ok(if sign < 0 { -d } else { d })
    }

    /// Coefficients of det(xI - A), constant term first, via the
    /// Faddeev-LeVerrier recurrence (all divisions are exact over Z).
    pub fn char_poly(&self) -> Result<Vec<BigInt>, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = IntMatrix::identity(n);
        for k in 1..=n {
            let am = self.mul(&m);
            let tr: BigInt = (0..n).map(|i| am[(i, i)].clone()).sum();
            let c = -tr / BigInt::from(k as u64);
            coeffs[n - k] = c.clone();
            if k < n {
                m = am.add_scalar_identity(&c);
            }
        }
        Ok(coeffs)
    }

    /// Rank over the prime field F_p.
    pub fn rank_mod_p(&self, p: u64) -> Result<usize, MatrixError> {
        if !is_prime_u64(p) {
            return Err(MatrixError::NotPrime(p));
        }
        let pb = BigInt::from(p);
        let mut m: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let r = self[(i, j)].mod_floor(&pb);
                        u64::try_from(r).expect("residue fits u64")
                    })
                    .collect()
            })
            .collect();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..self.cols {
            let Some(piv) = (row..self.rows).find(|&i| m[i][col] != 0) else {
                continue;
            };
            m.swap(row, piv);
            let inv = mod_inverse(m[row][col], p);
            for j in col..self.cols {
                m[row][j] = mulmod(m[row][j], inv, p);
            }
            for i in 0..self.rows {
                if i != row && m[i][col] != 0 {
                    let f = m[i][col];
                    for j in col..self.cols {
                        let sub = mulmod(f, m[row][j], p);
                        m[i][j] = (m[i][j] + p - sub) % p;
                    }
                }
            }
            rank += 1;
            row += 1;
            if row == self.rows {
                break;
            }
        }
        Ok(rank)
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Multiset of integer roots of a monic polynomial (constant term first),
/// or None if the polynomial does not split over Z.
pub fn integer_roots(coeffs: &[BigInt]) -> Option<Vec<(BigInt, usize)>> {
    let mut poly: Vec<BigInt> = coeffs.to_vec();
    assert!(poly.last().map(|c| c.is_one()).unwrap_or(false), "not monic");
    let mut roots: Vec<(BigInt, usize)> = Vec::new();
    while poly.len() > 1 {
        let root = find_integer_root(&poly)?;
        let mut mult = 0;
        while let Some(q) = synthetic_divide(&poly, &root) {
            poly = q;
            mult += 1;
            if poly.len() == 1 {
                break;
            }
        }
        roots.push((root, mult));
    }
    roots.sort();
    Some(roots)
}

fn find_integer_root(poly: &[BigInt]) -> Option<BigInt> {
    if poly[0].is_zero() {
        return Some(BigInt::zero());
    }
    let c0 = poly[0].abs();
    // Trial roots are divisors of the constant term; fall back to a direct
    // scan if the constant term is too large to factor by trial division.
    let mut candidates: Vec<BigInt> = Vec::new();
    if let Ok(c) = u64::try_from(&c0) {
        let mut d = 1u64;
        while (d as u128) * (d as u128) <= c as u128 {
            if c % d == 0 {
                candidates.push(BigInt::from(d));
                candidates.push(BigInt::from(c / d));
            }
            d += 1;
        }
    } else {
        return None;
    }
    for c in candidates {
        for r in [c.clone(), -c] {
            if eval_poly(poly, &r).is_zero() {
                return Some(r);
            }
        }
    }
    None
}

fn eval_poly(poly: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in poly.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn synthetic_divide(poly: &[BigInt], root: &BigInt) -> Option<Vec<BigInt>> {
    if !eval_poly(poly, root).is_zero() {
        return None;
    }
    let n = poly.len();
    let mut q = vec![BigInt::zero(); n - 1];
    let mut carry = BigInt::zero();
    for i in (0..n - 1).rev() {
        let c = &poly[i + 1] + &carry;
        carry = &c * root;
        q[i] = c;
    }
    Some(q)
}

/// Serde adapters writing big integers as decimal strings.
pub mod bigint_string {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse()
            .map_err(|_| D::Error::custom(format!("bad integer literal {raw:?}")))
    }
}

/// Serde adapters for vectors of big integers as decimal strings.
pub mod bigint_vec_string {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| D::Error::custom(format!("bad integer literal {s:?}")))
            })
            .collect()
    }
}

// JSON form: {"rows": m, "cols": n, "entries": [[row...], ...]} with entries
// as decimal strings (plain numbers are accepted on input).
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<EntryJson>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Text(String),
    Number(i64),
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| EntryJson::Text(self[(i, j)].to_string()))
                    .collect()
            })
            .collect();
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        if raw.entries.len() != raw.rows || raw.entries.iter().any(|r| r.len() != raw.cols) {
            return Err(D::Error::custom("entry grid does not match rows x cols"));
        }
        let mut entries = Vec::with_capacity(raw.rows * raw.cols);
        for row in &raw.entries {
            for e in row {
                let v = match e {
                    EntryJson::Number(n) => BigInt::from(*n),
                    EntryJson::Text(s) => s
                        .parse::<BigInt>()
                        .map_err(|_| D::Error::custom(format!("bad integer literal {s:?}")))?,
                };
                entries.push(v);
            }
        }
        Ok(IntMatrix {
            rows: raw.rows,
            cols: raw.cols,
            entries,
        })
    }
}
