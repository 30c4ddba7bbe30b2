//! Word-level data-parallel primitives: XOR scan, stream compaction, XOR reduction and
//! the w x w bit transpose.

use rayon::prelude::*;
use thiserror::Error;

use crate::word::Word;

/// Below this many elements the primitives run on the calling thread.
pub(crate) const PAR_MIN: usize = 1 << 14;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("tile has {got} words, expected {expected}")]
pub struct TileSizeError {
    pub got: usize,
    pub expected: usize,
}

/// Exclusive XOR scan: `prefixes[i]` is the XOR of `values[..i]`.
pub fn exclusive_scan_xor<W: Word>(values: &[W]) -> (Vec<W>, W) {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = W::ZERO;
    for &v in values {
        out.push(acc);
        acc ^= v;
    }
    (out, acc)
}

/// Same result as [`exclusive_scan_xor`], computed in three passes over blocks:
/// per-block scans, a scan of the block sums, then a merge.
pub fn exclusive_scan_xor_blocked<W: Word>(values: &[W], block: usize) -> (Vec<W>, W) {
    assert!(block > 0, "block size must be positive");
    let mut prefixes = vec![W::ZERO; values.len()];
    let mut sums: Vec<W> = prefixes
        .par_chunks_mut(block)
        .zip(values.par_chunks(block))
        .map(|(out, vals)| {
            let mut acc = W::ZERO;
            for (o, &v) in out.iter_mut().zip(vals) {
                *o = acc;
                acc ^= v;
            }
            acc
        })
        .collect();
    let mut acc = W::ZERO;
    for s in sums.iter_mut() {
        let t = *s;
        *s = acc;
        acc ^= t;
    }
    prefixes
        .par_chunks_mut(block)
        .zip(sums.par_iter())
        .for_each(|(out, &base)| {
            if base != W::ZERO {
                for o in out {
                    *o ^= base;
                }
            }
        });
    (prefixes, acc)
}

/// Stable in-place compaction: entries that are not `sentinel` move to the front in their
/// original order, the tail is filled with `sentinel`. Returns the number kept.
pub fn compact_select(values: &mut [i32], sentinel: i32) -> usize {
    debug_assert!(sentinel < 0);
    if values.len() < PAR_MIN {
        let mut n = 0;
        for i in 0..values.len() {
            let v = values[i];
            if v != sentinel {
                values[n] = v;
                n += 1;
            }
        }
        values[n..].fill(sentinel);
        return n;
    }
    compact_select_blocked(values, sentinel, 4096)
}

/// Block-parallel compaction: count per block, exclusive-scan the counts, scatter.
pub fn compact_select_blocked(values: &mut [i32], sentinel: i32, block: usize) -> usize {
    assert!(block > 0, "block size must be positive");
    let counts: Vec<usize> = values
        .par_chunks(block)
        .map(|c| c.iter().filter(|&&v| v != sentinel).count())
        .collect();
    let mut offsets = Vec::with_capacity(counts.len());
    let mut total = 0;
    for c in &counts {
        offsets.push(total);
        total += c;
    }
    let mut out = vec![sentinel; values.len()];
    {
        // Each block writes a disjoint range [offset, offset + count) of `out`.
        let mut rest: &mut [i32] = &mut out[..total];
        let mut dests = Vec::with_capacity(counts.len());
        for &c in &counts {
            let (head, tail) = rest.split_at_mut(c);
            dests.push(head);
            rest = tail;
        }
        values
            .par_chunks(block)
            .zip(dests.into_par_iter())
            .for_each(|(src, dst)| {
                let mut i = 0;
                for &v in src {
                    if v != sentinel {
                        dst[i] = v;
                        i += 1;
                    }
                }
            });
    }
    values.copy_from_slice(&out);
    total
}

/// XOR of all words, combined as a halving tree.
pub fn reduce_xor<W: Word>(values: &[W]) -> W {
    match values.len() {
        0 => W::ZERO,
        1 => values[0],
        len if len <= 64 => {
            let mut buf = [W::ZERO; 64];
            buf[..len].copy_from_slice(values);
            let mut b = len;
            while b > 1 {
                let half = b / 2;
                for i in 0..half {
                    buf[i] ^= buf[i + b - half];
                }
                b -= half;
            }
            buf[0]
        }
        len => {
            let (l, r) = values.split_at(len / 2);
            if len >= PAR_MIN {
                let (a, b) = rayon::join(|| reduce_xor(l), || reduce_xor(r));
                a ^ b
            } else {
                reduce_xor(l) ^ reduce_xor(r)
            }
        }
    }
}

/// Transpose a w x w bit matrix in place (word = row, bit = column, LSB first).
pub fn bit_transpose_tile<W: Word>(tile: &mut [W]) -> Result<(), TileSizeError> {
    let w = W::BITS as usize;
    if tile.len() != w {
        return Err(TileSizeError { got: tile.len(), expected: w });
    }
    transpose_unchecked(tile);
    Ok(())
}

#[inline]
pub(crate) fn transpose_unchecked<W: Word>(tile: &mut [W]) {
    let w = W::BITS as usize;
    for l in 0..W::LOG_BITS {
        let off = 1usize << l;
        let mask = W::mask(l);
        for t in 0..w {
            if t & off != 0 {
                continue;
            }
            let x = tile[t];
            let y = tile[t + off];
            tile[t] = (x & mask) | ((y & mask) << off as u32);
            tile[t + off] = ((x & !mask) >> off as u32) | (y & !mask);
        }
    }
}
