//! Modular symmetric designs.
//!
//! A `(v, k, λ; m)` design is a `v × v` 0/1 matrix whose row and column
//! sums are all `≡ k (mod m)` and whose distinct rows meet in `≡ λ (mod m)`
//! positions, i.e. `D Dᵀ ≡ (k − λ) I + λ J (mod m)` together with
//! `D J ≡ J D ≡ k J (mod m)`. Every exact symmetric `(v, k, λ)` design is a
//! `(v, k, λ; m)` design for all `m ≥ 2`; the converse fails, and the
//! relaxation is what the direct-sum lift feeds on.
//!
//! The module also houses the small catalog of base designs everything
//! else is built from, each re-verified on construction.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::bits;
use crate::matrix::{Modulus, SignMatrix};
use crate::solver::euler_phi;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignError {
    #[error("matrix order {matrix} does not match the parameter v = {params}")]
    DimensionMismatch { matrix: usize, params: usize },
    #[error("design parameters need v >= 2 and m >= 2 (got v = {v}, m = {m})")]
    InvalidParams { v: usize, m: u64 },
    #[error("matrix is not a ({v},{k},{lambda};{m}) design: {check}")]
    NotADesign {
        v: usize,
        k: u64,
        lambda: u64,
        m: u64,
        check: String,
    },
    #[error("difference set elements must be distinct values in 0..{v}")]
    InvalidDifferenceSet { v: usize },
    #[error(
        "not a difference set: residue {residue_a} arises {count_a} times as a difference \
         but residue {residue_b} arises {count_b} times"
    )]
    NotADifferenceSet {
        residue_a: usize,
        count_a: usize,
        residue_b: usize,
        count_b: usize,
    },
    #[error("core designs need an odd modulus >= 3 (got m = {0})")]
    NeedOddModulus(u64),
    #[error("core designs need gcd(m, n) = 1 (got n = {n}, m = {m})")]
    NotCoprime { n: usize, m: u64 },
    #[error("core designs need order >= 3 (got n = {0})")]
    CoreOrderTooSmall(usize),
    #[error("matrix must be normalized before taking its core")]
    NotNormalized,
    #[error("matrix is not an MH({n},{m}): rows {row_a} and {row_b} have Gram residue {residue}")]
    NotModularHadamard {
        n: usize,
        m: u64,
        row_a: usize,
        row_b: usize,
        residue: i64,
    },
    #[error("expected an exact ({v},{k},{lambda}) design as input")]
    WrongExampleInput { v: usize, k: usize, lambda: usize },
}

/// Square 0/1 incidence matrix, rows packed one bit per entry.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    v: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BinaryMatrix {
    /// Builds an order-`v` matrix from an entry function returning 0 or 1.
    pub fn from_fn(v: usize, mut f: impl FnMut(usize, usize) -> u8) -> BinaryMatrix {
        assert!(v >= 1, "incidence matrices have order >= 1");
        let words = bits::words_for(v);
        let mut rows = vec![0u64; v * words];
        for i in 0..v {
            let row = &mut rows[i * words..(i + 1) * words];
            for j in 0..v {
                match f(i, j) {
                    0 => {}
                    1 => bits::set(row, j, true),
                    other => panic!("entry ({i}, {j}) is {other}, expected 0 or 1"),
                }
            }
        }
        BinaryMatrix { v, words, rows }
    }

    pub fn order(&self) -> usize {
        self.v
    }

    /// Entry at (`i`, `j`) as 0 or 1.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        assert!(i < self.v && j < self.v);
        bits::get(self.row(i), j) as u8
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        bits::popcount(self.row(i)) as u64
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.v).filter(|&i| bits::get(self.row(i), j)).count() as u64
    }

    /// Number of positions where rows `i` and `j` are both 1.
    pub fn row_intersection(&self, i: usize, j: usize) -> u64 {
        let mut p = 0u32;
        for (x, y) in self.row(i).iter().zip(self.row(j).iter()) {
            p += (x & y).count_ones();
        }
        p as u64
    }

    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.words
    }

    pub(crate) fn packed_rows(&self) -> &[u64] {
        &self.rows
    }

    pub(crate) fn from_packed(v: usize, rows: Vec<u64>) -> BinaryMatrix {
        let words = bits::words_for(v);
        debug_assert_eq!(rows.len(), v * words);
        BinaryMatrix { v, words, rows }
    }

    /// The 0/1 matrix marking the −1 entries of a sign matrix.
    pub(crate) fn negatives_of(h: &SignMatrix) -> BinaryMatrix {
        BinaryMatrix::from_packed(h.order(), h.packed_rows().to_vec())
    }

    /// Entrywise complement `J − D`.
    pub fn complement_matrix(&self) -> BinaryMatrix {
        let mut rows = self.rows.clone();
        let tail = bits::low_mask(self.v - (self.words - 1) * bits::WORD_BITS);
        for i in 0..self.v {
            let row = &mut rows[i * self.words..(i + 1) * self.words];
            for w in row.iter_mut() {
                *w = !*w;
            }
            row[self.words - 1] &= tail;
        }
        BinaryMatrix {
            v: self.v,
            words: self.words,
            rows,
        }
    }

    /// The ±1 matrix `2D − J` (1 ↦ +1, 0 ↦ −1).
    pub fn to_sign_matrix(&self) -> SignMatrix {
        SignMatrix::from_packed(self.v, self.complement_matrix().rows)
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix(order {})", self.v)?;
        for i in 0..self.v {
            for j in 0..self.v {
                f.write_str(if self.entry(i, j) == 1 { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parameters of a `(v, k, λ; m)` design; `k` and `lambda` are stored as
/// canonical residues in `[0, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignParams {
    pub v: usize,
    pub k: u64,
    pub lambda: u64,
    pub m: u64,
}

impl DesignParams {
    /// Validates `v >= 2`, `m >= 2` and reduces `k`, `lambda` mod `m`.
    pub fn new(v: usize, k: u64, lambda: u64, m: u64) -> Result<DesignParams, DesignError> {
        if v < 2 || m < 2 {
            return Err(DesignError::InvalidParams { v, m });
        }
        Ok(DesignParams {
            v,
            k: k % m,
            lambda: lambda % m,
            m,
        })
    }
}

impl fmt::Display for DesignParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{};{})", self.v, self.k, self.lambda, self.m)
    }
}

/// A verified modular symmetric design: the pair of an incidence matrix
/// and parameters that [`verify_design`] accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularDesign {
    matrix: BinaryMatrix,
    params: DesignParams,
}

impl ModularDesign {
    /// Checks `verify_design` and wraps the pair; the failing condition is
    /// reported on rejection.
    pub fn new(matrix: BinaryMatrix, params: DesignParams) -> Result<ModularDesign, DesignError> {
        if matrix.order() != params.v {
            return Err(DesignError::DimensionMismatch {
                matrix: matrix.order(),
                params: params.v,
            });
        }
        if let Some(check) = design_check(&matrix, params) {
            return Err(DesignError::NotADesign {
                v: params.v,
                k: params.k,
                lambda: params.lambda,
                m: params.m,
                check,
            });
        }
        Ok(ModularDesign { matrix, params })
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    pub fn params(&self) -> DesignParams {
        self.params
    }

    pub fn complement(&self) -> ModularDesign {
        complement(self)
    }
}

/// Cyclic-group difference set data: a subset of `Z_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceSetSpec {
    v: usize,
    elements: Vec<usize>,
}

impl DifferenceSetSpec {
    /// Elements must be distinct members of `0..v`.
    pub fn new(
        v: usize,
        elements: impl Into<Vec<usize>>,
    ) -> Result<DifferenceSetSpec, DesignError> {
        let mut elements = elements.into();
        elements.sort_unstable();
        if v == 0 || elements.iter().any(|&e| e >= v) || elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(DesignError::InvalidDifferenceSet { v });
        }
        Ok(DifferenceSetSpec { v, elements })
    }

    pub fn group_order(&self) -> usize {
        self.v
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }
}

/// An exact symmetric `(v, k, λ)` design: constant integer row and column
/// sums `k`, every pair of distinct rows meeting in exactly `λ` points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDesign {
    matrix: BinaryMatrix,
    k: usize,
    lambda: usize,
}

impl ExactDesign {
    fn checked(matrix: BinaryMatrix, k: usize, lambda: usize) -> ExactDesign {
        assert!(
            verify_exact(&matrix, matrix.order(), k, lambda),
            "exact ({},{},{}) design failed verification",
            matrix.order(),
            k,
            lambda
        );
        ExactDesign { matrix, k, lambda }
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    /// Exact `(v, k, λ)` parameters.
    pub fn parameters(&self) -> (usize, usize, usize) {
        (self.matrix.order(), self.k, self.lambda)
    }

    /// The same incidence matrix viewed as a `(v, k mod m, λ mod m; m)`
    /// modular design.
    pub fn at_modulus(&self, m: u64) -> Result<ModularDesign, DesignError> {
        let params = DesignParams::new(self.matrix.order(), self.k as u64, self.lambda as u64, m)?;
        ModularDesign::new(self.matrix.clone(), params)
    }

    /// Exact complement `(v, v − k, v − 2k + λ)`.
    pub fn complement(&self) -> ExactDesign {
        let v = self.matrix.order();
        ExactDesign::checked(
            self.matrix.complement_matrix(),
            v - self.k,
            v - 2 * self.k + self.lambda,
        )
    }
}

/// First violated design condition, rendered for diagnostics; `None` means
/// the matrix is a `(v, k, λ; m)` design.
fn design_check(d: &BinaryMatrix, p: DesignParams) -> Option<String> {
    let v = p.v;
    for i in 0..v {
        let s = d.row_sum(i) % p.m;
        if s != p.k {
            return Some(format!(
                "row {i} has sum {s} (mod {}), expected {}",
                p.m, p.k
            ));
        }
    }
    for j in 0..v {
        let s = d.col_sum(j) % p.m;
        if s != p.k {
            return Some(format!(
                "column {j} has sum {s} (mod {}), expected {}",
                p.m, p.k
            ));
        }
    }
    // row sums ≡ k already force the diagonal of DDᵀ ≡ k; the off-diagonal
    // entries must be ≡ λ
    let ok: Vec<bool> = (0..=v as u64).map(|c| c % p.m == p.lambda).collect();
    if let Some(hit) = bits::first_bad_pair_and(d.packed_rows(), d.words_per_row(), v, &ok) {
        return Some(format!(
            "rows {} and {} meet in {} points, {} (mod {}), expected {}",
            hit.row_a,
            hit.row_b,
            hit.popcount,
            hit.popcount as u64 % p.m,
            p.m,
            p.lambda
        ));
    }
    None
}

/// True when `D` is a `(v, k, λ; m)` design; errors on order mismatch.
pub fn verify_design(d: &BinaryMatrix, p: DesignParams) -> Result<bool, DesignError> {
    if d.order() != p.v {
        return Err(DesignError::DimensionMismatch {
            matrix: d.order(),
            params: p.v,
        });
    }
    Ok(design_check(d, p).is_none())
}

/// True when `D` is an exact symmetric `(v, k, λ)` design.
pub fn verify_exact(d: &BinaryMatrix, v: usize, k: usize, lambda: usize) -> bool {
    if d.order() != v {
        return false;
    }
    if (0..v).any(|i| d.row_sum(i) != k as u64) || (0..v).any(|j| d.col_sum(j) != k as u64) {
        return false;
    }
    let ok: Vec<bool> = (0..=v).map(|c| c == lambda).collect();
    bits::first_bad_pair_and(d.packed_rows(), d.words_per_row(), v, &ok).is_none()
}

/// The unique `(k, λ)` residues making `D` a `(v, k, λ; m)` design, if any.
/// Uniqueness holds for `v >= 2` because `I` and `J` are linearly
/// independent there.
pub fn infer_params(d: &BinaryMatrix, m: u64) -> Option<DesignParams> {
    let v = d.order();
    if v < 2 || m < 2 {
        return None;
    }
    let k = d.row_sum(0) % m;
    if (1..v).any(|i| d.row_sum(i) % m != k) || (0..v).any(|j| d.col_sum(j) % m != k) {
        return None;
    }
    let lambda = d.row_intersection(0, 1) % m;
    let ok: Vec<bool> = (0..=v as u64).map(|c| c % m == lambda).collect();
    if bits::first_bad_pair_and(d.packed_rows(), d.words_per_row(), v, &ok).is_some() {
        return None;
    }
    Some(DesignParams { v, k, lambda, m })
}

/// Circulant matrix whose row `i` is `first_row` cyclically shifted right
/// by `i` positions.
pub fn circulant(first_row: &[u8]) -> BinaryMatrix {
    assert!(
        !first_row.is_empty(),
        "circulant needs a nonempty first row"
    );
    let v = first_row.len();
    BinaryMatrix::from_fn(v, |i, j| first_row[(j + v - i) % v])
}

/// Circulant incidence matrix of a difference set, with parameters found
/// by brute-force difference counting: the set is a `(v, |S|, λ)` design
/// exactly when every nonzero residue arises as a difference `a − b` of
/// set elements the same number `λ` of times.
pub fn from_difference_set(s: &DifferenceSetSpec) -> Result<ExactDesign, DesignError> {
    let v = s.group_order();
    let mut counts = vec![0usize; v];
    for &a in s.elements() {
        for &b in s.elements() {
            if a != b {
                counts[(a + v - b) % v] += 1;
            }
        }
    }
    if v > 1 {
        let lambda = counts[1];
        for (residue, &count) in counts.iter().enumerate().skip(2) {
            if count != lambda {
                return Err(DesignError::NotADifferenceSet {
                    residue_a: 1,
                    count_a: lambda,
                    residue_b: residue,
                    count_b: count,
                });
            }
        }
    }
    let mut row = vec![0u8; v];
    for &e in s.elements() {
        row[e] = 1;
    }
    let lambda = if v > 1 { counts[1] } else { 0 };
    Ok(ExactDesign::checked(
        circulant(&row),
        s.elements().len(),
        lambda,
    ))
}

/// Complement `J − D`, a `(v, v − k, v − 2k + λ; m)` design.
pub fn complement(d: &ModularDesign) -> ModularDesign {
    let p = d.params();
    let m = p.m as i64;
    let k = (p.v as i64 - p.k as i64).rem_euclid(m) as u64;
    let lambda = (p.v as i64 - 2 * p.k as i64 + p.lambda as i64).rem_euclid(m) as u64;
    let params = DesignParams {
        v: p.v,
        k,
        lambda,
        m: p.m,
    };
    ModularDesign::new(d.matrix().complement_matrix(), params)
        .expect("the complement of a verified design verifies")
}

/// The design `D = (C + J) / 2` read off the core `C` of a normalized
/// `MH(n, m)`, with parameters
/// `(n − 1, 2^(φ(m)−1)(n − 2), 2^(φ(m)−2)(n − 4); m)`. Needs `m >= 3` odd,
/// `n >= 3` and `gcd(m, n) = 1`.
pub fn core_to_design(h: &SignMatrix, m: u64) -> Result<ModularDesign, DesignError> {
    if m < 3 || m % 2 == 0 {
        return Err(DesignError::NeedOddModulus(m));
    }
    let n = h.order();
    if n < 3 {
        return Err(DesignError::CoreOrderTooSmall(n));
    }
    if crate::matrix::gcd(m, n as u64) != 1 {
        return Err(DesignError::NotCoprime { n, m });
    }
    if !h.is_normalized() {
        return Err(DesignError::NotNormalized);
    }
    if let Some(viol) = h.first_gram_violation(Modulus::new(m)) {
        return Err(DesignError::NotModularHadamard {
            n,
            m,
            row_a: viol.row_a,
            row_b: viol.row_b,
            residue: viol.residue,
        });
    }
    let core = h
        .extract_core()
        .expect("normalized matrix of order >= 3 has a core");
    // (C + J)/2 marks the +1 entries of the core
    let matrix = BinaryMatrix::negatives_of(&core).complement_matrix();
    let phi = euler_phi(m);
    let k = pow_mod(2, phi - 1, m) * ((n as u64 - 2) % m) % m;
    let lambda = pow_mod(2, phi - 2, m) as i64 * (n as i64 - 4) % m as i64;
    let params = DesignParams {
        v: n - 1,
        k,
        lambda: lambda.rem_euclid(m as i64) as u64,
        m,
    };
    ModularDesign::new(matrix, params)
}

pub(crate) fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1u64 % m;
    let mut base = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    result
}

/// The block matrix `[[R, J − I], [J − I, J − Rᵀ]]`, a `(26, 1, 2; 5)`
/// design whenever `R` is an exact `(13, 4, 1)` design.
pub fn example_block_26(r: &ModularDesign) -> Result<ModularDesign, DesignError> {
    if !verify_exact(r.matrix(), 13, 4, 1) {
        return Err(DesignError::WrongExampleInput {
            v: 13,
            k: 4,
            lambda: 1,
        });
    }
    let rm = r.matrix();
    let matrix = BinaryMatrix::from_fn(26, |i, j| match (i < 13, j < 13) {
        (true, true) => rm.entry(i, j),
        (true, false) => u8::from(i != j - 13),
        (false, true) => u8::from(i - 13 != j),
        (false, false) => 1 - rm.entry(j - 13, i - 13),
    });
    ModularDesign::new(
        matrix,
        DesignParams {
            v: 26,
            k: 1,
            lambda: 2,
            m: 5,
        },
    )
}

/// Base designs used by the solver's recipe tables. Every entry is
/// re-verified each time it is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogName {
    /// Cyclic `(13, 4, 1)` design from the difference set `{0, 2, 3, 7}`.
    R13,
    /// The `(26, 1, 2; 5)` block design built from `R13`.
    D26,
    /// Cyclic `(21, 5, 1)` design (projective plane of order 4) from the
    /// difference set `{3, 6, 7, 12, 14}`.
    D21,
    /// `(16, 6, 2)` Menon design cut from the regular order-16 Hadamard
    /// matrix `(J − 2I)₄ ⊗ (J − 2I)₄`.
    D16,
    /// Cyclic `(11, 5, 2)` design from the quadratic residues mod 11.
    B11,
    /// The `(11, 6, 3)` complement of `B11`.
    B11C,
}

impl CatalogName {
    pub const ALL: [CatalogName; 6] = [
        CatalogName::R13,
        CatalogName::D26,
        CatalogName::D21,
        CatalogName::D16,
        CatalogName::B11,
        CatalogName::B11C,
    ];
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CatalogName::R13 => "R13",
            CatalogName::D26 => "D26",
            CatalogName::D21 => "D21",
            CatalogName::D16 => "D16",
            CatalogName::B11 => "B11",
            CatalogName::B11C => "B11C",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for CatalogName {
    type Err = String;

    fn from_str(s: &str) -> Result<CatalogName, String> {
        match s.to_ascii_lowercase().as_str() {
            "r13" => Ok(CatalogName::R13),
            "d26" => Ok(CatalogName::D26),
            "d21" => Ok(CatalogName::D21),
            "d16" => Ok(CatalogName::D16),
            "b11" => Ok(CatalogName::B11),
            "b11c" => Ok(CatalogName::B11C),
            _ => Err(format!(
                "unknown catalog design {s:?} (expected one of r13, d26, d21, d16, b11, b11c)"
            )),
        }
    }
}

/// The named design at modulus 5 (the modulus all recipe tables use).
pub fn catalog(name: CatalogName) -> ModularDesign {
    match name {
        CatalogName::D26 => example_block_26(&catalog(CatalogName::R13))
            .expect("the block construction on R13 verifies"),
        CatalogName::B11C => catalog(CatalogName::B11).complement(),
        _ => catalog_exact(name)
            .expect("all remaining catalog entries are exact")
            .at_modulus(5)
            .expect("exact designs verify at every modulus"),
    }
}

/// The exact design behind a catalog entry, for the entries that are exact
/// symmetric designs (`D26` is genuinely modular and has none).
pub fn catalog_exact(name: CatalogName) -> Option<ExactDesign> {
    match name {
        CatalogName::R13 => Some(difference_set_design(13, &[0, 2, 3, 7])),
        CatalogName::D21 => Some(difference_set_design(21, &[3, 6, 7, 12, 14])),
        CatalogName::B11 => Some(difference_set_design(11, &[1, 3, 4, 5, 9])),
        CatalogName::B11C => Some(catalog_exact(CatalogName::B11)?.complement()),
        CatalogName::D16 => Some(menon_16()),
        CatalogName::D26 => None,
    }
}

fn difference_set_design(v: usize, elements: &[usize]) -> ExactDesign {
    let spec = DifferenceSetSpec::new(v, elements).expect("catalog difference sets are valid");
    from_difference_set(&spec).expect("catalog difference sets have constant difference counts")
}

/// `(16, 6, 2)` Menon design `D = (J − H)/2` for the regular Hadamard
/// matrix `H = (J − 2I)₄ ⊗ (J − 2I)₄`.
fn menon_16() -> ExactDesign {
    let block = crate::matrix::canonical(crate::matrix::CanonicalKind::JMinusTwoI, 4);
    let h = crate::matrix::kronecker(&block, &block);
    ExactDesign::checked(BinaryMatrix::negatives_of(&h), 6, 2)
}
