//! Lifts from modular symmetric designs to modular Hadamard matrices.
//!
//! Two mechanisms, both entrywise `0 ↦ −1`, `1 ↦ +1`:
//!
//! - `2D − J` is an `MH(v, m)` exactly when `v ≡ 4(k − λ) (mod m)`;
//! - for two designs, `2(D₁ ⊕ D₂) − J` (where `D₁ ⊕ D₂` is the block
//!   matrix `[[D₁, J], [Jᵀ, D₂]]`) is an `MH(v₁ + v₂, m)` exactly when
//!   three congruences between the parameter tuples hold.
//!
//! The congruences are evaluated as written, without dividing by 2 or 4,
//! so even moduli need no special casing.

use thiserror::Error;

use crate::bits;
use crate::design::{BinaryMatrix, DesignParams, ModularDesign};
use crate::matrix::{Modulus, SignMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error(
        "2D - J needs v ≡ 4(k − λ) (mod m): v = {v} gives {lhs} but 4(k − λ) gives {rhs} (mod {m})"
    )]
    CongruenceFailed {
        v: usize,
        lhs: u64,
        rhs: u64,
        m: u64,
    },
    #[error("designs have different moduli: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("direct sum is not compatible: {0}")]
    Incompatible(CompatibilityReport),
}

/// One congruence with both sides reduced mod `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Congruence {
    pub lhs: u64,
    pub rhs: u64,
}

impl Congruence {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// The three congruences governing the direct-sum lift:
///
/// 1. `v₂ ≡ −v₁ + 4k₁ − 4λ₁`  (orthogonality of rows from different blocks)
/// 2. `2k₂ ≡ 2k₁ − 4λ₁`        (matching row sums across blocks)
/// 3. `4λ₂ ≡ −4λ₁`             (matching intersections)
///
/// all mod `m`. The system is symmetric in the two designs even though it
/// is written one-sidedly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub modulus: u64,
    pub order: Congruence,
    pub row_sum: Congruence,
    pub intersection: Congruence,
}

impl CompatibilityReport {
    pub fn overall(&self) -> bool {
        self.order.holds() && self.row_sum.holds() && self.intersection.holds()
    }
}

impl std::fmt::Display for CompatibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "mod {}: v2 = {} vs -v1+4k1-4l1 = {}; 2k2 = {} vs 2k1-4l1 = {}; 4l2 = {} vs -4l1 = {}",
            self.modulus,
            self.order.lhs,
            self.order.rhs,
            self.row_sum.lhs,
            self.row_sum.rhs,
            self.intersection.lhs,
            self.intersection.rhs,
        )
    }
}

/// Evaluates the direct-sum compatibility congruences for two parameter
/// tuples over a common modulus.
pub fn check_compatible(
    p1: DesignParams,
    p2: DesignParams,
) -> Result<CompatibilityReport, LiftError> {
    if p1.m != p2.m {
        return Err(LiftError::ModulusMismatch(p1.m, p2.m));
    }
    let m = p1.m as i64;
    let reduce = |x: i64| x.rem_euclid(m) as u64;
    Ok(CompatibilityReport {
        modulus: p1.m,
        order: Congruence {
            lhs: reduce(p2.v as i64),
            rhs: reduce(-(p1.v as i64) + 4 * p1.k as i64 - 4 * p1.lambda as i64),
        },
        row_sum: Congruence {
            lhs: reduce(2 * p2.k as i64),
            rhs: reduce(2 * p1.k as i64 - 4 * p1.lambda as i64),
        },
        intersection: Congruence {
            lhs: reduce(4 * p2.lambda as i64),
            rhs: reduce(-4 * (p1.lambda as i64)),
        },
    })
}

/// The lift `2D − J`; requires `v ≡ 4(k − λ) (mod m)` and returns a
/// verified `MH(v, m)`.
pub fn two_design_hadamard(d: &ModularDesign) -> Result<SignMatrix, LiftError> {
    let p = d.params();
    let m = p.m as i64;
    let lhs = (p.v as i64).rem_euclid(m) as u64;
    let rhs = (4 * (p.k as i64 - p.lambda as i64)).rem_euclid(m) as u64;
    if lhs != rhs {
        return Err(LiftError::CongruenceFailed {
            v: p.v,
            lhs,
            rhs,
            m: p.m,
        });
    }
    let h = d.matrix().to_sign_matrix();
    assert!(
        h.is_modular_hadamard(Modulus::new(p.m)),
        "2D - J of a verified design satisfying the congruence is an MH(v, m)"
    );
    Ok(h)
}

/// The direct sum `D₁ ⊕ D₂ = [[D₁, J], [Jᵀ, D₂]]` of order `v₁ + v₂`.
pub fn direct_sum(d1: &ModularDesign, d2: &ModularDesign) -> BinaryMatrix {
    let (a, b) = (d1.matrix(), d2.matrix());
    let (v1, v2) = (a.order(), b.order());
    let v = v1 + v2;
    let words = bits::words_for(v);
    let mut rows = vec![0u64; v * words];
    for i in 0..v1 {
        let dst = &mut rows[i * words..(i + 1) * words];
        bits::splice(dst, 0, a.row(i), v1, false);
        bits::fill_run(dst, v1, v2, true);
    }
    for i in 0..v2 {
        let dst = &mut rows[(v1 + i) * words..(v1 + i + 1) * words];
        bits::fill_run(dst, 0, v1, true);
        bits::splice(dst, v1, b.row(i), v2, false);
    }
    BinaryMatrix::from_packed(v, rows)
}

/// The lift `2(D₁ ⊕ D₂) − J`; requires the compatibility congruences and
/// returns a verified `MH(v₁ + v₂, m)`.
pub fn direct_sum_hadamard(
    d1: &ModularDesign,
    d2: &ModularDesign,
) -> Result<SignMatrix, LiftError> {
    let report = check_compatible(d1.params(), d2.params())?;
    if !report.overall() {
        return Err(LiftError::Incompatible(report));
    }
    let h = direct_sum(d1, d2).to_sign_matrix();
    assert!(
        h.is_modular_hadamard(Modulus::new(d1.params().m)),
        "2(D1 ⊕ D2) - J of compatible designs is an MH(v1 + v2, m)"
    );
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{catalog, core_to_design, infer_params, CatalogName, DifferenceSetSpec};
    use crate::matrix::{canonical, kronecker, CanonicalKind};

    #[test]
    fn two_design_examples() {
        // (21,5,1) at m = 5: 21 ≡ 1 and 4(5−1) = 16 ≡ 1
        let h21 = two_design_hadamard(&catalog(CatalogName::D21)).unwrap();
        assert_eq!(h21.order(), 21);
        assert!(h21.is_modular_hadamard(Modulus::new(5)));

        // (26,1,2;5): 26 ≡ 1 and 4(1−2) ≡ 1
        let h26 = two_design_hadamard(&catalog(CatalogName::D26)).unwrap();
        assert!(h26.is_modular_hadamard(Modulus::new(5)));

        // Fano plane at m = 5: 7 ≡ 2 but 4(3−1) = 8 ≡ 3
        let fano =
            crate::design::from_difference_set(&DifferenceSetSpec::new(7, vec![1, 2, 4]).unwrap())
                .unwrap()
                .at_modulus(5)
                .unwrap();
        assert_eq!(
            two_design_hadamard(&fano),
            Err(LiftError::CongruenceFailed {
                v: 7,
                lhs: 2,
                rhs: 3,
                m: 5
            })
        );
    }

    #[test]
    fn two_design_lift_maps_entries() {
        let d = catalog(CatalogName::B11);
        let h = d.matrix().to_sign_matrix();
        for i in 0..11 {
            for j in 0..11 {
                let expect = if d.matrix().entry(i, j) == 1 { 1 } else { -1 };
                assert_eq!(h.entry(i, j), expect);
            }
        }
    }

    #[test]
    fn direct_sum_block_structure() {
        let d16 = catalog(CatalogName::D16);
        let core15 = {
            let f2 = canonical(CanonicalKind::F2, 0);
            let b4 = canonical(CanonicalKind::JMinusTwoI, 4);
            let h16 = kronecker(&f2, &kronecker(&f2, &b4)).normalize();
            core_to_design(&h16, 5).unwrap()
        };
        let s = direct_sum(&d16, &core15);
        assert_eq!(s.order(), 31);
        // off-diagonal blocks are all ones
        for i in 0..16 {
            for j in 16..31 {
                assert_eq!(s.entry(i, j), 1);
                assert_eq!(s.entry(j, i), 1);
            }
        }
        // diagonal blocks are the designs
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(s.entry(i, j), d16.matrix().entry(i, j));
            }
        }
        for i in 0..15 {
            for j in 0..15 {
                assert_eq!(s.entry(16 + i, 16 + j), core15.matrix().entry(i, j));
            }
        }
    }

    #[test]
    fn compatibility_examples() {
        let p = |v, k, l| DesignParams {
            v,
            k,
            lambda: l,
            m: 5,
        };
        // (26,1,2;5) with (20,2,3;5)
        assert!(check_compatible(p(26, 1, 2), p(20, 2, 3))
            .unwrap()
            .overall());
        // (16,6,2;5) with (15,2,3;5)
        assert!(check_compatible(p(16, 6 % 5, 2), p(15, 2, 3))
            .unwrap()
            .overall());
        // (16,6,2;5) with (26,1,2;5): the row-sum congruence gives 2 vs 4
        let r = check_compatible(p(16, 1, 2), p(26, 1, 2)).unwrap();
        assert!(!r.overall());
        assert_eq!((r.row_sum.lhs, r.row_sum.rhs), (2, 4));

        assert_eq!(
            check_compatible(
                p(26, 1, 2),
                DesignParams {
                    v: 20,
                    k: 2,
                    lambda: 3,
                    m: 7
                }
            ),
            Err(LiftError::ModulusMismatch(5, 7))
        );
    }

    #[test]
    fn compatibility_is_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..2000 {
            let m = rng.gen_range(2..=12u64);
            let a = DesignParams {
                v: rng.gen_range(2..40),
                k: rng.gen_range(0..m),
                lambda: rng.gen_range(0..m),
                m,
            };
            let b = DesignParams {
                v: rng.gen_range(2..40),
                k: rng.gen_range(0..m),
                lambda: rng.gen_range(0..m),
                m,
            };
            assert_eq!(
                check_compatible(a, b).unwrap().overall(),
                check_compatible(b, a).unwrap().overall(),
                "{a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn direct_sum_hadamard_examples() {
        // D26 ⊕ core(MH(21,5)) gives the classic order-46 construction
        let h21 = two_design_hadamard(&catalog(CatalogName::D21)).unwrap();
        let core20 = core_to_design(&h21.normalize(), 5).unwrap();
        let h46 = direct_sum_hadamard(&catalog(CatalogName::D26), &core20).unwrap();
        assert_eq!(h46.order(), 46);
        assert!(h46.is_modular_hadamard(Modulus::new(5)));

        // B11 ⊕ B11C is an MH(22, 5)
        let h22 =
            direct_sum_hadamard(&catalog(CatalogName::B11), &catalog(CatalogName::B11C)).unwrap();
        assert!(h22.is_modular_hadamard(Modulus::new(5)));

        // D16 ⊕ (15,2,3;5) is an MH(31, 5)
        let f2 = canonical(CanonicalKind::F2, 0);
        let b4 = canonical(CanonicalKind::JMinusTwoI, 4);
        let h16 = kronecker(&f2, &kronecker(&f2, &b4)).normalize();
        let core15 = core_to_design(&h16, 5).unwrap();
        let h31 = direct_sum_hadamard(&catalog(CatalogName::D16), &core15).unwrap();
        assert!(h31.is_modular_hadamard(Modulus::new(5)));

        // incompatible pair is rejected with the report attached
        let err = direct_sum_hadamard(&catalog(CatalogName::D16), &catalog(CatalogName::D26));
        assert!(matches!(err, Err(LiftError::Incompatible(r)) if !r.overall()));
    }

    #[test]
    fn two_design_iff_over_catalog() {
        // soundness both ways: the lift is an MH(v, m) exactly when the
        // congruence holds, across every modulus where the matrix is a design
        for name in CatalogName::ALL {
            let matrix = catalog(name).matrix().clone();
            for m in 2..=12u64 {
                let Some(p) = infer_params(&matrix, m) else {
                    continue;
                };
                let lifted = matrix.to_sign_matrix();
                let lhs = (p.v as u64) % m;
                let rhs = (4 * (p.k as i64 - p.lambda as i64)).rem_euclid(m as i64) as u64;
                assert_eq!(
                    lifted.is_modular_hadamard(Modulus::new(m)),
                    lhs == rhs,
                    "{name} at m = {m}"
                );
            }
        }
    }
}
