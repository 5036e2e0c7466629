//! Bit-packed row storage shared by the sign-matrix and incidence-matrix types.
//!
//! A row of `n` entries occupies `n.div_ceil(64)` little-endian words. Bits
//! past the logical row length are kept at zero, so popcounts over whole
//! words need no masking. Row inner products reduce to popcounts of XOR
//! (for ±1 rows) or AND (for 0/1 rows), which is what makes the all-pairs
//! Gram scans cheap.
//!
//! The all-pairs scan is tiled in blocks of rows so each block pair stays
//! cache-resident (an untiled scan of an order-2000 matrix streams a
//! gigabyte), and on x86_64 it dispatches to a `popcnt` build or an AVX2
//! nibble-LUT popcount when the CPU supports them. Tiles are scanned out
//! of row-major pair order, so a hit triggers one ordered rescan to report
//! the canonical first violation.

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
pub(crate) fn get(row: &[u64], j: usize) -> bool {
    row[j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
}

#[inline]
pub(crate) fn set(row: &mut [u64], j: usize, value: bool) {
    let mask = 1u64 << (j % WORD_BITS);
    if value {
        row[j / WORD_BITS] |= mask;
    } else {
        row[j / WORD_BITS] &= !mask;
    }
}

/// Mask selecting the `len` low bits of a word (`len` in 1..=64).
#[inline]
pub(crate) fn low_mask(len: usize) -> u64 {
    debug_assert!((1..=64).contains(&len));
    if len == WORD_BITS {
        !0
    } else {
        (1u64 << len) - 1
    }
}

/// Reads `len <= 64` bits starting at bit `start` of a packed row.
#[inline]
pub(crate) fn read_chunk(src: &[u64], start: usize, len: usize) -> u64 {
    debug_assert!((1..=64).contains(&len));
    let w = start / WORD_BITS;
    let off = start % WORD_BITS;
    let mut value = src[w] >> off;
    if off != 0 && w + 1 < src.len() {
        value |= src[w + 1] << (WORD_BITS - off);
    }
    value & low_mask(len)
}

/// Writes the `len <= 64` low bits of `value` at bit `start` of a packed row.
#[inline]
pub(crate) fn write_chunk(dst: &mut [u64], start: usize, len: usize, value: u64) {
    debug_assert!((1..=64).contains(&len));
    let value = value & low_mask(len);
    let w = start / WORD_BITS;
    let off = start % WORD_BITS;
    let low_len = (WORD_BITS - off).min(len);
    let low_mask_shifted = low_mask(low_len) << off;
    dst[w] = (dst[w] & !low_mask_shifted) | (value << off);
    if len > low_len {
        let high_len = len - low_len;
        dst[w + 1] = (dst[w + 1] & !low_mask(high_len)) | (value >> low_len);
    }
}

/// Copies `src_bits` bits of `src` into `dst` starting at bit `at`,
/// inverting them when `negate` is set.
pub(crate) fn splice(dst: &mut [u64], at: usize, src: &[u64], src_bits: usize, negate: bool) {
    let mut done = 0;
    while done < src_bits {
        let len = (src_bits - done).min(WORD_BITS);
        let mut chunk = read_chunk(src, done, len);
        if negate {
            chunk = !chunk & low_mask(len);
        }
        write_chunk(dst, at + done, len, chunk);
        done += len;
    }
}

/// Sets `len_bits` consecutive bits starting at `at` to `value`.
pub(crate) fn fill_run(dst: &mut [u64], at: usize, len_bits: usize, value: bool) {
    let mut done = 0;
    while done < len_bits {
        let len = (len_bits - done).min(WORD_BITS);
        write_chunk(dst, at + done, len, if value { !0 } else { 0 });
        done += len;
    }
}

#[inline]
pub(crate) fn popcount(row: &[u64]) -> u32 {
    row.iter().map(|w| w.count_ones()).sum()
}

/// Location of the first row pair whose inner product fails a residue test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PairHit {
    pub row_a: usize,
    pub row_b: usize,
    pub popcount: u32,
}

/// Scans pairs (i, j) with `i0 <= i < i1`, `max(j0, i + 1) <= j < j1`, in
/// row-major pair order within the block. The dot loop is unrolled four
/// wide with two accumulators to keep the popcount unit busy.
macro_rules! pair_scan_body {
    ($name:ident, $op:tt) => {
        #[inline(always)]
        #[allow(clippy::too_many_arguments)]
        fn $name(
            rows: &[u64],
            words: usize,
            ok: &[bool],
            i0: usize,
            i1: usize,
            j0: usize,
            j1: usize,
        ) -> Option<PairHit> {
            for i in i0..i1 {
                let ri = &rows[i * words..(i + 1) * words];
                for j in j0.max(i + 1)..j1 {
                    let rj = &rows[j * words..(j + 1) * words];
                    let mut quads_a = ri.chunks_exact(4);
                    let mut quads_b = rj.chunks_exact(4);
                    let mut p0 = 0u32;
                    let mut p1 = 0u32;
                    for (a, b) in quads_a.by_ref().zip(quads_b.by_ref()) {
                        p0 += (a[0] $op b[0]).count_ones() + (a[2] $op b[2]).count_ones();
                        p1 += (a[1] $op b[1]).count_ones() + (a[3] $op b[3]).count_ones();
                    }
                    for (x, y) in quads_a.remainder().iter().zip(quads_b.remainder()) {
                        p0 += (x $op y).count_ones();
                    }
                    let p = p0 + p1;
                    if !ok[p as usize] {
                        return Some(PairHit { row_a: i, row_b: j, popcount: p });
                    }
                }
            }
            None
        }
    };
}

pair_scan_body!(scan_block_xor_generic, ^);
pair_scan_body!(scan_block_and_generic, &);

#[cfg(target_arch = "x86_64")]
mod dispatch {
    use super::{scan_block_and_generic, scan_block_xor_generic, PairHit};

    #[target_feature(enable = "popcnt")]
    #[allow(clippy::too_many_arguments)]
    unsafe fn scan_block_xor_popcnt(
        rows: &[u64],
        words: usize,
        ok: &[bool],
        i0: usize,
        i1: usize,
        j0: usize,
        j1: usize,
    ) -> Option<PairHit> {
        scan_block_xor_generic(rows, words, ok, i0, i1, j0, j1)
    }

    #[target_feature(enable = "popcnt")]
    #[allow(clippy::too_many_arguments)]
    unsafe fn scan_block_and_popcnt(
        rows: &[u64],
        words: usize,
        ok: &[bool],
        i0: usize,
        i1: usize,
        j0: usize,
        j1: usize,
    ) -> Option<PairHit> {
        scan_block_and_generic(rows, words, ok, i0, i1, j0, j1)
    }

    fn popcnt_available() -> bool {
        use std::sync::OnceLock;
        static AVAILABLE: OnceLock<bool> = OnceLock::new();
        *AVAILABLE.get_or_init(|| std::arch::is_x86_feature_detected!("popcnt"))
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn scan_block_xor(
        rows: &[u64],
        words: usize,
        ok: &[bool],
        i0: usize,
        i1: usize,
        j0: usize,
        j1: usize,
    ) -> Option<PairHit> {
        if popcnt_available() {
            // Safety: guarded by the runtime feature check.
            unsafe { scan_block_xor_popcnt(rows, words, ok, i0, i1, j0, j1) }
        } else {
            scan_block_xor_generic(rows, words, ok, i0, i1, j0, j1)
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn scan_block_and(
        rows: &[u64],
        words: usize,
        ok: &[bool],
        i0: usize,
        i1: usize,
        j0: usize,
        j1: usize,
    ) -> Option<PairHit> {
        if popcnt_available() {
            // Safety: guarded by the runtime feature check.
            unsafe { scan_block_and_popcnt(rows, words, ok, i0, i1, j0, j1) }
        } else {
            scan_block_and_generic(rows, words, ok, i0, i1, j0, j1)
        }
    }
}

#[cfg(not(target_arch = "x86_64"))]
mod dispatch {
    use super::{scan_block_and_generic, scan_block_xor_generic, PairHit};

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn scan_block_xor(
        rows: &[u64],
        words: usize,
        ok: &[bool],
        i0: usize,
        i1: usize,
        j0: usize,
        j1: usize,
    ) -> Option<PairHit> {
        scan_block_xor_generic(rows, words, ok, i0, i1, j0, j1)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn scan_block_and(
        rows: &[u64],
        words: usize,
        ok: &[bool],
        i0: usize,
        i1: usize,
        j0: usize,
        j1: usize,
    ) -> Option<PairHit> {
        scan_block_and_generic(rows, words, ok, i0, i1, j0, j1)
    }
}

/// Rows per tile: two tiles of an order-2000 matrix stay within 32 KiB.
const TILE: usize = 64;

type BlockScan = fn(&[u64], usize, &[bool], usize, usize, usize, usize) -> Option<PairHit>;

fn scan_all_pairs(
    rows: &[u64],
    words: usize,
    n: usize,
    ok: &[bool],
    scan: BlockScan,
) -> Option<PairHit> {
    if n <= 2 * TILE {
        return scan(rows, words, ok, 0, n, 0, n);
    }
    let mut found = false;
    'tiles: for ib in (0..n).step_by(TILE) {
        let ie = (ib + TILE).min(n);
        for jb in (ib..n).step_by(TILE) {
            let je = (jb + TILE).min(n);
            if scan(rows, words, ok, ib, ie, jb, je).is_some() {
                found = true;
                break 'tiles;
            }
        }
    }
    if found {
        // rescan in row-major pair order so the reported violation is the
        // canonical first one
        scan(rows, words, ok, 0, n, 0, n)
    } else {
        None
    }
}

/// First row pair (i < j, row-major pair order) with
/// `!ok[popcount(row_i ^ row_j)]`.
pub(crate) fn first_bad_pair_xor(
    rows: &[u64],
    words: usize,
    n: usize,
    ok: &[bool],
) -> Option<PairHit> {
    scan_all_pairs(rows, words, n, ok, dispatch::scan_block_xor)
}

/// First row pair (i < j, row-major pair order) with
/// `!ok[popcount(row_i & row_j)]`.
pub(crate) fn first_bad_pair_and(
    rows: &[u64],
    words: usize,
    n: usize,
    ok: &[bool],
) -> Option<PairHit> {
    scan_all_pairs(rows, words, n, ok, dispatch::scan_block_and)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_roundtrip_across_word_boundaries() {
        let mut buf = vec![0u64; 4];
        write_chunk(&mut buf, 60, 10, 0b10_1101_0110);
        assert_eq!(read_chunk(&buf, 60, 10), 0b10_1101_0110);
        // neighbouring bits untouched
        assert_eq!(read_chunk(&buf, 0, 60), 0);
        assert_eq!(read_chunk(&buf, 70, 64), 0);
    }

    #[test]
    fn splice_negated() {
        let src = vec![0b1010u64];
        let mut dst = vec![0u64; 2];
        splice(&mut dst, 62, &src, 4, true);
        for (bit, expect) in [(62, true), (63, false), (64, true), (65, false)] {
            assert_eq!(get(&dst, bit), expect, "bit {bit}");
        }
    }

    #[test]
    fn fill_and_popcount() {
        let mut dst = vec![0u64; 3];
        fill_run(&mut dst, 5, 130, true);
        assert_eq!(popcount(&dst), 130);
        fill_run(&mut dst, 6, 128, false);
        assert_eq!(popcount(&dst), 2);
        assert!(get(&dst, 5) && get(&dst, 134));
    }

    #[test]
    fn dispatched_scans_match_generic_on_wide_rows() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let n = rng.gen_range(2..20);
            let bits_per_row = rng.gen_range(512..700); // words >= 8
            let words = words_for(bits_per_row);
            let mut rows = vec![0u64; n * words];
            for row in rows.chunks_exact_mut(words) {
                for w in row.iter_mut() {
                    *w = rng.gen();
                }
                row[words - 1] &= low_mask(bits_per_row - (words - 1) * WORD_BITS);
            }
            let ok: Vec<bool> = (0..=bits_per_row).map(|_| rng.gen_bool(0.9)).collect();
            assert_eq!(
                first_bad_pair_xor(&rows, words, n, &ok),
                scan_block_xor_generic(&rows, words, &ok, 0, n, 0, n)
            );
            assert_eq!(
                first_bad_pair_and(&rows, words, n, &ok),
                scan_block_and_generic(&rows, words, &ok, 0, n, 0, n)
            );
        }
    }

    #[test]
    fn tiled_scan_reports_the_canonical_first_violation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        // order large enough to tile, one word per row
        for _ in 0..20 {
            let n = rng.gen_range(150..200);
            let words = 1;
            let rows: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & 0xffff).collect();
            let ok: Vec<bool> = (0..=16).map(|p| p % 2 == 0).collect();
            let tiled = first_bad_pair_xor(&rows, words, n, &ok);
            let ordered = scan_block_xor_generic(&rows, words, &ok, 0, n, 0, n);
            assert_eq!(tiled, ordered);
        }
    }

    #[test]
    fn pair_scan_finds_first_violation() {
        // three 4-bit rows packed one word each
        let rows = vec![0b0000u64, 0b0011, 0b0111];
        // accept only even popcounts
        let ok: Vec<bool> = (0..=4).map(|p| p % 2 == 0).collect();
        let hit = first_bad_pair_xor(&rows, 1, 3, &ok).unwrap();
        assert_eq!((hit.row_a, hit.row_b, hit.popcount), (0, 2, 3));
        assert!(first_bad_pair_and(&rows, 1, 3, &[true; 5]).is_none());
    }
}
