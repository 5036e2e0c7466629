//! Modular Hadamard matrices and modular symmetric designs.
//!
//! An `m`-modular Hadamard matrix `MH(n, m)` is an `n × n` ±1 matrix `H`
//! with `H Hᵀ ≡ n I (mod m)`; `m = 0` denotes a real Hadamard matrix. This
//! crate provides:
//!
//! - exact bit-packed ±1 matrix arithmetic ([`matrix`]): modular Gram
//!   verification, normalization, core extraction, Kronecker products and
//!   the canonical base matrices;
//! - modular symmetric designs ([`design`]): verification, parameter
//!   inference, circulant and difference-set generation, complementation,
//!   core-to-design extraction and a small verified catalog;
//! - the two lifts from designs to modular Hadamard matrices
//!   ([`construct`]): `2D − J` and the compatible direct sum
//!   `2(D1 ⊕ D2) − J`;
//! - a certificate-producing decision procedure ([`solver`]) for
//!   `m ∈ {2, 3, 4, 5, 6}`: for every order it returns either a
//!   construction recipe that materializes to a verified matrix, or a
//!   nonexistence obstruction;
//! - an independent exhaustive search oracle ([`search`]) over all
//!   normalized candidates of small order, used to cross-validate the
//!   solver;
//! - bit-exact text formats and certificate JSON ([`io`]).
//!
//! ```
//! use modhad::{decide, materialize, Modulus};
//!
//! // MH(n, 5) exists iff n is not 3 or 7 mod 10 and n is neither 6 nor 11
//! let cert = decide(46, 5)?;
//! let h = materialize(cert.recipe().unwrap(), 5)?;
//! assert!(h.is_modular_hadamard(Modulus::new(5)));
//!
//! assert!(!decide(6, 5)?.exists());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

// `x % m == 0` is the natural spelling in residue arithmetic
#![allow(clippy::manual_is_multiple_of)]

mod bits;

pub mod construct;
pub mod design;
pub mod io;
pub mod matrix;
pub mod search;
pub mod solver;

pub use construct::{
    check_compatible, direct_sum, direct_sum_hadamard, two_design_hadamard, CompatibilityReport,
    Congruence, LiftError,
};
pub use design::{
    catalog, catalog_exact, circulant, complement, core_to_design, example_block_26,
    from_difference_set, infer_params, verify_design, verify_exact, BinaryMatrix, CatalogName,
    DesignError, DesignParams, DifferenceSetSpec, ExactDesign, ModularDesign,
};
pub use io::{
    parse_certificate, parse_design, parse_matrix, write_certificate, write_design, write_matrix,
    ParseError,
};
pub use matrix::{
    canonical, combined_modulus, kronecker, CanonicalKind, GramResidues, GramViolation,
    MatrixError, Modulus, SignMatrix,
};
pub use search::{
    cross_check, exhaustive, format_ledger_entry, parse_ledger, CrossCheckReport, Disagreement,
    LedgerEntry, SearchError, SearchMode, SearchOutcome, SearchSpec, ShardSpec,
};
pub use solver::{
    counting_obstruction, decide, euler_phi, explain, materialize, parity_obstruction,
    quadratic_obstruction, Certificate, DesignSource, MaterializeError, Obstruction, Outcome,
    Recipe, SolveError,
};
