//! Exact arithmetic on ±1 matrices.
//!
//! An order-`n` sign matrix `H` is an `m`-modular Hadamard matrix, written
//! `MH(n, m)`, when `H Hᵀ ≡ n I (mod m)`; the modulus `0` stands for exact
//! (real Hadamard) arithmetic. Since every row dotted with itself gives
//! exactly `n`, only the off-diagonal Gram entries carry information, and
//! the dot product of two ±1 rows is `n − 2·popcount(xor)` on the packed
//! representation.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::bits;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix must be normalized first (first row and column all +1)")]
    NotNormalized,
    #[error("order {order} is too small: this operation needs order >= {min}")]
    OrderTooSmall { order: usize, min: usize },
    #[error("row {row} has length {len}, expected {expected}")]
    RaggedRow {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("entry ({row}, {col}) is {value}, expected +1 or -1")]
    BadEntry { row: usize, col: usize, value: i32 },
    #[error("matrix must have at least one row")]
    Empty,
}

/// Residue modulus. `0` selects exact integer arithmetic, any `m >= 2`
/// selects arithmetic mod `m`. The value `1` can arise from
/// [`combined_modulus`] and makes every congruence vacuously true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Modulus(u64);

impl Modulus {
    pub const EXACT: Modulus = Modulus(0);

    pub fn new(value: u64) -> Modulus {
        Modulus(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_exact(self) -> bool {
        self.0 == 0
    }

    /// Canonical residue of a signed value: the value itself under exact
    /// arithmetic, otherwise its representative in `[0, m)`.
    pub fn residue(self, value: i64) -> i64 {
        if self.0 == 0 {
            value
        } else {
            value.rem_euclid(self.0 as i64)
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Square ±1 matrix with rows packed one sign bit per entry (set bit = −1).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl SignMatrix {
    /// Builds an order-`n` matrix from an entry function returning +1 or −1.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i32) -> SignMatrix {
        assert!(n >= 1, "sign matrices have order >= 1");
        let words = bits::words_for(n);
        let mut rows = vec![0u64; n * words];
        for i in 0..n {
            let row = &mut rows[i * words..(i + 1) * words];
            for j in 0..n {
                match f(i, j) {
                    1 => {}
                    -1 => bits::set(row, j, true),
                    other => panic!("entry ({i}, {j}) is {other}, expected +1 or -1"),
                }
            }
        }
        SignMatrix { n, words, rows }
    }

    pub fn from_rows(entries: &[Vec<i32>]) -> Result<SignMatrix, MatrixError> {
        let n = entries.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::RaggedRow {
                    row: i,
                    len: row.len(),
                    expected: n,
                });
            }
            for (j, &value) in row.iter().enumerate() {
                if value != 1 && value != -1 {
                    return Err(MatrixError::BadEntry {
                        row: i,
                        col: j,
                        value,
                    });
                }
            }
        }
        Ok(SignMatrix::from_fn(n, |i, j| entries[i][j]))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Entry at (`i`, `j`) as +1 or −1.
    pub fn entry(&self, i: usize, j: usize) -> i32 {
        assert!(
            i < self.n && j < self.n,
            "entry ({i}, {j}) out of range for order {}",
            self.n
        );
        if bits::get(self.row(i), j) {
            -1
        } else {
            1
        }
    }

    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub(crate) fn packed_rows(&self) -> &[u64] {
        &self.rows
    }

    /// Builds a matrix directly from packed rows (set bit = −1); bits past
    /// the row length must be zero.
    pub(crate) fn from_packed(n: usize, rows: Vec<u64>) -> SignMatrix {
        let words = bits::words_for(n);
        debug_assert_eq!(rows.len(), n * words);
        SignMatrix { n, words, rows }
    }

    /// Integer dot product of rows `i` and `j`.
    pub fn row_dot(&self, i: usize, j: usize) -> i64 {
        let mut p = 0u32;
        for (x, y) in self.row(i).iter().zip(self.row(j).iter()) {
            p += (x ^ y).count_ones();
        }
        self.n as i64 - 2 * p as i64
    }

    /// Sum of the entries of row `i`.
    pub fn row_sum(&self, i: usize) -> i64 {
        self.n as i64 - 2 * bits::popcount(self.row(i)) as i64
    }

    /// Sum of the entries of column `j`.
    pub fn col_sum(&self, j: usize) -> i64 {
        let negatives = (0..self.n).filter(|&i| bits::get(self.row(i), j)).count();
        self.n as i64 - 2 * negatives as i64
    }

    pub fn is_normalized(&self) -> bool {
        bits::popcount(self.row(0)) == 0 && (0..self.n).all(|i| !bits::get(self.row(i), 0))
    }

    /// Off-diagonal Gram residues of `H Hᵀ` mod `m` (exact integers when
    /// `m = 0`).
    pub fn gram_offdiag(&self, m: Modulus) -> GramResidues {
        let mut entries = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                entries.push(m.residue(self.row_dot(i, j)));
            }
        }
        GramResidues {
            order: self.n,
            modulus: m,
            entries,
        }
    }

    /// True when `H Hᵀ ≡ n I (mod m)`; order-1 matrices always pass.
    pub fn is_modular_hadamard(&self, m: Modulus) -> bool {
        self.first_gram_violation(m).is_none()
    }

    /// First off-diagonal Gram entry (in row-major pair order) that is not
    /// divisible by `m`, if any.
    pub fn first_gram_violation(&self, m: Modulus) -> Option<GramViolation> {
        let ok = dot_ok_table(self.n, m);
        let hit = bits::first_bad_pair_xor(&self.rows, self.words, self.n, &ok)?;
        let dot = self.n as i64 - 2 * hit.popcount as i64;
        Some(GramViolation {
            row_a: hit.row_a,
            row_b: hit.row_b,
            residue: m.residue(dot),
        })
    }

    /// Negates every column whose first entry is −1, then every row whose
    /// first entry is −1. The result has an all-+1 first row and column and
    /// is `MH(n, m)` exactly when the input is, for every `m` at once.
    pub fn normalize(&self) -> SignMatrix {
        let words = self.words;
        let col_mask = self.row(0).to_vec();
        let mut full = vec![!0u64; words];
        full[words - 1] = bits::low_mask(self.n - (words - 1) * bits::WORD_BITS);
        let mut rows = self.rows.clone();
        for i in 0..self.n {
            let row = &mut rows[i * words..(i + 1) * words];
            for (w, m) in row.iter_mut().zip(col_mask.iter()) {
                *w ^= m;
            }
            if bits::get(row, 0) {
                for (w, m) in row.iter_mut().zip(full.iter()) {
                    *w ^= m;
                }
            }
        }
        SignMatrix {
            n: self.n,
            words,
            rows,
        }
    }

    /// Drops the first row and column of a normalized matrix, leaving its
    /// core.
    pub fn extract_core(&self) -> Result<SignMatrix, MatrixError> {
        if self.n < 2 {
            return Err(MatrixError::OrderTooSmall {
                order: self.n,
                min: 2,
            });
        }
        if !self.is_normalized() {
            return Err(MatrixError::NotNormalized);
        }
        let n = self.n - 1;
        let words = bits::words_for(n);
        let mut rows = vec![0u64; n * words];
        for i in 0..n {
            let src = self.row(i + 1);
            let dst = &mut rows[i * words..(i + 1) * words];
            // copy bits 1..=n of the source row
            let mut done = 0;
            while done < n {
                let len = (n - done).min(bits::WORD_BITS);
                let chunk = bits::read_chunk(src, done + 1, len);
                bits::write_chunk(dst, done, len, chunk);
                done += len;
            }
        }
        Ok(SignMatrix { n, words, rows })
    }
}

impl fmt::Debug for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SignMatrix(order {})", self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                f.write_str(if self.entry(i, j) == 1 { "+" } else { "-" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Off-diagonal entries of `H Hᵀ` reduced mod `m`; the diagonal is always
/// exactly `n` and is not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramResidues {
    order: usize,
    modulus: Modulus,
    entries: Vec<i64>,
}

impl GramResidues {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Residue of the Gram entry at (`i`, `j`), `i != j`.
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        assert!(i != j && i < self.order && j < self.order);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // index of (a, b) in the row-major upper triangle
        let before = a * self.order - a * (a + 1) / 2;
        self.entries[before + (b - a - 1)]
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.iter().copied()
    }

    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|&r| r == 0)
    }
}

/// A Gram entry that breaks the modular Hadamard condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramViolation {
    pub row_a: usize,
    pub row_b: usize,
    /// Residue of `row_a · row_b` mod `m` (the exact dot product when
    /// `m = 0`); nonzero by construction.
    pub residue: i64,
}

/// Lookup table over popcount values: `ok[p]` says whether a row pair with
/// `popcount(xor) = p` satisfies the Gram condition at order `n`.
fn dot_ok_table(n: usize, m: Modulus) -> Vec<bool> {
    (0..=n as i64)
        .map(|p| m.residue(n as i64 - 2 * p) == 0)
        .collect()
}

/// The named base matrices: `J` (all ones), `J − 2I`, the 2×2 and 1×1
/// Hadamard matrices, and an order-12 real Hadamard matrix built from the
/// quadratic residues mod 11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalKind {
    AllOnes,
    JMinusTwoI,
    F2,
    F1,
    H12,
}

/// Builds a named matrix. `n` is the order for `AllOnes` and `JMinusTwoI`
/// and is ignored for `F1`, `F2` and `H12` (orders 1, 2 and 12).
pub fn canonical(kind: CanonicalKind, n: usize) -> SignMatrix {
    match kind {
        CanonicalKind::AllOnes => {
            assert!(n >= 1, "AllOnes needs order >= 1");
            SignMatrix::from_fn(n, |_, _| 1)
        }
        CanonicalKind::JMinusTwoI => {
            assert!(n >= 1, "JMinusTwoI needs order >= 1");
            SignMatrix::from_fn(n, |i, j| if i == j { -1 } else { 1 })
        }
        CanonicalKind::F1 => SignMatrix::from_fn(1, |_, _| 1),
        CanonicalKind::F2 => SignMatrix::from_fn(2, |i, j| if i == 1 && j == 1 { -1 } else { 1 }),
        CanonicalKind::H12 => paley_order_12(),
    }
}

/// Order-12 real Hadamard matrix `I + S`, where `S` borders the circulant
/// of the quadratic-residue character mod 11 with a ±1 rim. Checked for
/// `H Hᵀ = 12 I` exactly on every construction.
fn paley_order_12() -> SignMatrix {
    const Q: u64 = 11;
    let mut is_square = [false; Q as usize];
    for x in 1..Q {
        is_square[(x * x % Q) as usize] = true;
    }
    let chi = |d: usize| -> i32 {
        let d = d % Q as usize;
        if d == 0 {
            0
        } else if is_square[d] {
            1
        } else {
            -1
        }
    };
    let h = SignMatrix::from_fn(12, |i, j| {
        if i == j || i == 0 {
            // identity on the diagonal (chi(0) = 0 contributes nothing),
            // all-ones rim on the first row
            1
        } else if j == 0 {
            -1
        } else {
            chi((j + Q as usize - i) % Q as usize)
        }
    });
    assert!(
        h.is_modular_hadamard(Modulus::EXACT),
        "order-12 base matrix failed its exact Gram check"
    );
    h
}

/// Kronecker product; entry `((i1, i2), (j1, j2))` is `a[i1, j1] * b[i2, j2]`
/// and the order is the product of orders.
pub fn kronecker(a: &SignMatrix, b: &SignMatrix) -> SignMatrix {
    let (na, nb) = (a.order(), b.order());
    let n = na * nb;
    let words = bits::words_for(n);
    let mut rows = vec![0u64; n * words];
    for ia in 0..na {
        for ib in 0..nb {
            let dst = &mut rows[(ia * nb + ib) * words..(ia * nb + ib + 1) * words];
            let src = b.row(ib);
            for ja in 0..na {
                let negate = bits::get(a.row(ia), ja);
                bits::splice(dst, ja * nb, src, nb, negate);
            }
        }
    }
    SignMatrix { n, words, rows }
}

/// Modulus guaranteed for the Kronecker product of an `MH(n1, m1)` with an
/// `MH(n2, m2)`: `gcd(m1·m2, m1·n2, m2·n1)` with the convention
/// `gcd(0, x) = x`. A result of 0 means the product is exactly Hadamard.
pub fn combined_modulus(m1: Modulus, n1: usize, m2: Modulus, n2: usize) -> Modulus {
    assert!(n1 >= 1 && n2 >= 1);
    let (m1, m2) = (m1.value(), m2.value());
    let g = gcd(gcd(m1 * m2, m1 * n2 as u64), m2 * n1 as u64);
    Modulus(g)
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
