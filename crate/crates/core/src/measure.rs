//! Single-shot Z measurements on a row-major tableau: nondeterminism scan, pivot
//! compaction, three-pass prefix-XOR elimination, swap, X injection and the
//! destabilizer-product readout for deterministic outcomes.
//!
//! Eliminating target `t` against control `c` multiplies stabilizer `t` by stabilizer `c`
//! and destabilizer `c` by destabilizer `t`. The control destabilizer seen by target `l` is
//! the control's initial row XOR the exclusive prefix of the earlier targets' rows, so
//! every target's sign term can be computed independently once the prefixes are known.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::bitplane::{compact_select, PAR_MIN};
use crate::rng::BitStream;
use crate::scheduler::Window;
use crate::simulator::PhaseTimes;
use crate::tableau::{Layout, Tableau, TableauError};
use crate::word::Word;

pub const DEFAULT_BLOCK: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("pivot list is empty")]
    EmptyPivots,
    #[error("stabilizer {p} does not anticommute with Z on qubit {q}")]
    NotAnticommuting { p: usize, q: usize },
    #[error("measurement of qubit {0} is not deterministic")]
    NotDeterministic(usize),
    #[error("destabilizer product for qubit {0} is not +-Z (corrupted tableau)")]
    Corrupted(usize),
    #[error("window contains a unitary gate")]
    NotMeasurementWindow,
    #[error("qubit {0} measured twice in one window")]
    DuplicateQubit(usize),
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
}

/// Stabilizer indices anticommuting with the observable, ascending, padded with `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotList {
    pub entries: Vec<i32>,
    pub count: usize,
}

impl PivotList {
    pub fn pivots(&self) -> &[i32] {
        &self.entries[..self.count]
    }
}

/// Exclusive XOR prefixes of the target destabilizer rows. Cell `(t, j)` holds the Z word
/// then the X word.
#[derive(Clone, Debug, Default)]
pub struct PrefixPlanes<W> {
    pub prefixes: Vec<W>,
    pub blocksums: Vec<W>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub qubit: usize,
    pub bit: bool,
    pub deterministic: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub outcomes: Vec<Outcome>,
}

impl MeasurementRecord {
    pub fn bits(&self) -> Vec<bool> {
        self.outcomes.iter().map(|o| o.bit).collect()
    }
}

/// Exponent of `i` (mod 4) in the product of the Hermitian Pauli rows `(x1, z1) * (x2, z2)`.
#[inline]
pub(crate) fn product_phase<W: Word>(x1: &[W], z1: &[W], x2: &[W], z2: &[W]) -> u32 {
    let mut plus = 0u32;
    let mut anti_total = 0u32;
    for j in 0..x1.len() {
        let (a, b, c, d) = (x1[j], z1[j], x2[j], z2[j]);
        let anti = (a & d) ^ (b & c);
        let p = anti & ((a & !b & c) | (!a & b & !d) | (a & b & !c));
        plus += p.count_ones();
        anti_total += anti.count_ones();
    }
    (2 * plus).wrapping_sub(anti_total) & 3
}

/// Sign bit contributed by multiplying two commuting rows.
#[inline]
fn commuting_sign<W: Word>(x1: &[W], z1: &[W], x2: &[W], z2: &[W]) -> bool {
    let e = product_phase(x1, z1, x2, z2);
    debug_assert_eq!(e & 1, 0, "rows anticommute");
    e == 2
}

#[inline]
fn bit_of<W: Word>(v: W, b: usize) -> bool {
    v.bit(b)
}

/// For each measured qubit: the qubit if some stabilizer has an X or Y on it, else -1.
pub fn find_probabilistic<W: Word>(tableau: &Tableau<W>, window: &Window) -> Result<Vec<i64>, MeasureError> {
    tableau.expect_layout(Layout::RowMajor)?;
    let qs = window_qubits(tableau, window)?;
    let scan = |&q: &usize| -> i64 {
        if stab_column_any(tableau, q) {
            q as i64
        } else {
            -1
        }
    };
    Ok(if qs.len() > 1 && qs.len() * tableau.num_qubits() >= PAR_MIN {
        qs.par_iter().map(scan).collect()
    } else {
        qs.iter().map(scan).collect()
    })
}

fn window_qubits<W: Word>(tableau: &Tableau<W>, window: &Window) -> Result<Vec<usize>, MeasureError> {
    let n = tableau.num_qubits();
    let mut seen = vec![false; n];
    let mut qs = Vec::with_capacity(window.gates.len());
    for g in &window.gates {
        if !g.kind.is_measure() {
            return Err(MeasureError::NotMeasurementWindow);
        }
        let q = g.q0();
        if q >= n {
            return Err(MeasureError::OutOfRange(q));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(MeasureError::DuplicateQubit(q));
        }
        qs.push(q);
    }
    Ok(qs)
}

fn stab_column_any<W: Word>(t: &Tableau<W>, q: usize) -> bool {
    let k = t.words();
    let w = W::BITS as usize;
    let (off, b) = (k + q / w, q % w);
    (0..t.num_qubits()).any(|g| bit_of(t.x[g * 2 * k + off], b))
}

/// Scatter `t` or -1 for every stabilizer, then compact.
pub fn find_and_compact_pivots<W: Word>(tableau: &Tableau<W>, q: usize) -> Result<PivotList, MeasureError> {
    tableau.expect_layout(Layout::RowMajor)?;
    let n = tableau.num_qubits();
    if q >= n {
        return Err(MeasureError::OutOfRange(q));
    }
    let k = tableau.words();
    let w = W::BITS as usize;
    let (off, b) = (k + q / w, q % w);
    let x = &tableau.x;
    let flag = |t: usize| if bit_of(x[t * 2 * k + off], b) { t as i32 } else { -1 };
    let mut entries: Vec<i32> = if n >= PAR_MIN {
        (0..n).into_par_iter().map(flag).collect()
    } else {
        (0..n).map(flag).collect()
    };
    let count = compact_select(&mut entries, -1);
    Ok(PivotList { entries, count })
}

/// Eliminate every target against the first pivot with the default block size.
pub fn parallel_ge<W: Word>(tableau: &mut Tableau<W>, pivots: &PivotList) -> Result<(), MeasureError> {
    parallel_ge_with_block(tableau, pivots, DEFAULT_BLOCK).map(|_| ())
}

/// Three passes over blocks of `block` targets: block-local exclusive prefixes and block
/// sums, a scan of the block sums, then per-target updates and sign histories.
pub fn parallel_ge_with_block<W: Word>(
    tableau: &mut Tableau<W>,
    pivots: &PivotList,
    block: usize,
) -> Result<PrefixPlanes<W>, MeasureError> {
    tableau.expect_layout(Layout::RowMajor)?;
    assert!(block > 0, "block size must be positive");
    if pivots.count == 0 {
        return Err(MeasureError::EmptyPivots);
    }
    let c = pivots.entries[0] as usize;
    let targets: Vec<usize> = pivots.entries[1..pivots.count].iter().map(|&t| t as usize).collect();
    if targets.is_empty() {
        return Ok(PrefixPlanes::default());
    }
    let k = tableau.words();
    let n = tableau.num_qubits();
    let row = 2 * k;
    let m = targets.len();
    let nblocks = m.div_ceil(block);
    let par = m * k >= PAR_MIN;

    // Pass 1: block-local exclusive prefixes of the target destabilizer rows.
    let mut prefixes = vec![W::ZERO; m * row];
    let mut blocksums = vec![W::ZERO; nblocks * row];
    {
        let (x, z) = (&tableau.x, &tableau.z);
        let pass1 = |(b, (pre, sum)): (usize, (&mut [W], &mut [W]))| {
            let ts = &targets[b * block..((b + 1) * block).min(m)];
            let mut acc = vec![W::ZERO; row];
            for (l, &t) in ts.iter().enumerate() {
                let cell = &mut pre[l * row..(l + 1) * row];
                let (dx, dz) = (&x[t * row..t * row + k], &z[t * row..t * row + k]);
                for j in 0..k {
                    cell[2 * j] = acc[2 * j];
                    cell[2 * j + 1] = acc[2 * j + 1];
                    acc[2 * j] ^= dz[j];
                    acc[2 * j + 1] ^= dx[j];
                }
            }
            sum.copy_from_slice(&acc);
        };
        if par {
            prefixes
                .par_chunks_mut(block * row)
                .zip(blocksums.par_chunks_mut(row))
                .enumerate()
                .for_each(pass1);
        } else {
            prefixes.chunks_mut(block * row).zip(blocksums.chunks_mut(row)).enumerate().for_each(pass1);
        }
    }

    // Pass 2: exclusive scan of block sums. The total is the control's destabilizer update.
    let mut total = vec![W::ZERO; row];
    for b in 0..nblocks {
        let cell = &mut blocksums[b * row..(b + 1) * row];
        for j in 0..row {
            let v = cell[j];
            cell[j] = total[j];
            total[j] ^= v;
        }
    }

    // Pass 3: finish each prefix, derive sign histories, merge the control stabilizer.
    let tb = &mut *tableau;
    let ctrl_dx: Vec<W> = tb.x[c * row..c * row + k].to_vec();
    let ctrl_dz: Vec<W> = tb.z[c * row..c * row + k].to_vec();
    let ctrl_sx: Vec<W> = tb.x[c * row + k..(c + 1) * row].to_vec();
    let ctrl_sz: Vec<W> = tb.z[c * row + k..(c + 1) * row].to_vec();
    let ctrl_stab_sign = tb.sign(n + c);

    let mut xrows: Vec<Option<&mut [W]>> = tb.x.chunks_mut(row).map(Some).collect();
    let mut zrows: Vec<Option<&mut [W]>> = tb.z.chunks_mut(row).map(Some).collect();
    let mut work: Vec<(usize, &mut [W], &mut [W])> = targets
        .iter()
        .map(|&t| (t, xrows[t].take().expect("distinct targets"), zrows[t].take().expect("distinct targets")))
        .collect();
    let signs = &tb.s;
    let sign_of = |g: usize| -> bool { crate::word::get_bit(signs, g) };
    let nq = k * W::BITS as usize;

    let pass3 = |(l, (t, xr, zr)): (usize, &mut (usize, &mut [W], &mut [W]))| -> (bool, bool) {
        let b = l / block;
        let pre = &prefixes[l * row..(l + 1) * row];
        let base = &blocksums[b * row..(b + 1) * row];
        let mut px = [W::ZERO; 64];
        let mut pz = [W::ZERO; 64];
        let (dx, sx) = xr.split_at_mut(k);
        let (dz, sz) = zr.split_at_mut(k);
        // Control destabilizer as seen by this target, in chunks of 64 words.
        let mut phase = 0u32;
        for j0 in (0..k).step_by(64) {
            let j1 = (j0 + 64).min(k);
            for j in j0..j1 {
                pz[j - j0] = ctrl_dz[j] ^ base[2 * j] ^ pre[2 * j];
                px[j - j0] = ctrl_dx[j] ^ base[2 * j + 1] ^ pre[2 * j + 1];
            }
            let e = product_phase(&px[..j1 - j0], &pz[..j1 - j0], &dx[j0..j1], &dz[j0..j1]);
            phase = (phase + e) & 3;
        }
        let h_destab = phase == 2;
        let h_stab = commuting_sign(&ctrl_sx, &ctrl_sz, sx, sz);
        for j in 0..k {
            sx[j] ^= ctrl_sx[j];
            sz[j] ^= ctrl_sz[j];
        }
        (h_destab ^ sign_of(*t), h_stab ^ ctrl_stab_sign)
    };
    let histories: Vec<(bool, bool)> = if par {
        work.par_iter_mut().enumerate().map(pass3).collect()
    } else {
        work.iter_mut().enumerate().map(pass3).collect()
    };
    drop(work);
    drop(xrows);
    drop(zrows);

    let mut flip_control = false;
    for (&t, &(hd, hs)) in targets.iter().zip(&histories) {
        flip_control ^= hd;
        if hs {
            crate::word::flip_bit(&mut tb.s, nq + t);
        }
    }
    if flip_control {
        crate::word::flip_bit(&mut tb.s, c);
    }
    for j in 0..k {
        tb.z[c * row + j] ^= total[2 * j];
        tb.x[c * row + j] ^= total[2 * j + 1];
    }
    Ok(PrefixPlanes { prefixes, blocksums })
}

/// Replace stabilizer `p` by an operator that commutes with `Z_q` while keeping the group
/// valid. Y case (destabilizer `p` has X on `q`): stabilizer `p` becomes `i * S_p * D_p`.
/// X case: stabilizer and destabilizer `p` trade places.
pub fn swap_anti_commuting<W: Word>(tableau: &mut Tableau<W>, p: usize, q: usize) -> Result<(), MeasureError> {
    tableau.expect_layout(Layout::RowMajor)?;
    let n = tableau.num_qubits();
    if p >= n || q >= n {
        return Err(MeasureError::OutOfRange(p.max(q)));
    }
    if !tableau.x_bit(n + p, q) {
        return Err(MeasureError::NotAnticommuting { p, q });
    }
    let k = tableau.words();
    let row = 2 * k;
    let y_case = tableau.x_bit(p, q);
    let (ds, ss) = (tableau.sign(p), tableau.sign(n + p));
    let xr = &mut tableau.x[p * row..(p + 1) * row];
    let zr = &mut tableau.z[p * row..(p + 1) * row];
    if y_case {
        let (dx, sx) = xr.split_at_mut(k);
        let (dz, sz) = zr.split_at_mut(k);
        let e = product_phase(sx, sz, dx, dz);
        debug_assert_eq!(e & 1, 1);
        let neg = ss ^ ds ^ (((e + 1) & 3) == 2);
        for j in 0..k {
            sx[j] ^= dx[j];
            sz[j] ^= dz[j];
        }
        tableau.set_sign(n + p, neg);
    } else {
        let (dx, sx) = xr.split_at_mut(k);
        dx.swap_with_slice(sx);
        let (dz, sz) = zr.split_at_mut(k);
        dz.swap_with_slice(sz);
        tableau.set_sign(p, ss);
        tableau.set_sign(n + p, ds);
    }
    Ok(())
}

/// Flip the sign of stabilizer `p`.
pub fn inject_x<W: Word>(tableau: &mut Tableau<W>, p: usize) -> Result<(), MeasureError> {
    tableau.expect_layout(Layout::RowMajor)?;
    let n = tableau.num_qubits();
    if p >= n {
        return Err(MeasureError::OutOfRange(p));
    }
    tableau.flip_sign(n + p);
    Ok(())
}

/// Outcome of measuring `Z_q` when no stabilizer anticommutes with it: the sign of the
/// product of the stabilizers whose destabilizers anticommute with `Z_q`.
pub fn deterministic_outcome<W: Word>(tableau: &Tableau<W>, q: usize) -> Result<bool, MeasureError> {
    tableau.expect_layout(Layout::RowMajor)?;
    if q >= tableau.num_qubits() {
        return Err(MeasureError::OutOfRange(q));
    }
    if stab_column_any(tableau, q) {
        return Err(MeasureError::NotDeterministic(q));
    }
    z_eigenvalue(tableau, q)
}

struct Product<W> {
    x: Vec<W>,
    z: Vec<W>,
    phase: u32,
    sign: bool,
}

impl<W: Word> Product<W> {
    fn identity(k: usize) -> Self {
        Product { x: vec![W::ZERO; k], z: vec![W::ZERO; k], phase: 0, sign: false }
    }

    fn mul_row(&mut self, x: &[W], z: &[W], sign: bool) {
        self.phase = (self.phase + product_phase(&self.x, &self.z, x, z)) & 3;
        for j in 0..x.len() {
            self.x[j] ^= x[j];
            self.z[j] ^= z[j];
        }
        self.sign ^= sign;
    }

    fn mul(mut self, o: Product<W>) -> Self {
        self.phase = (self.phase + o.phase + product_phase(&self.x, &self.z, &o.x, &o.z)) & 3;
        for j in 0..self.x.len() {
            self.x[j] ^= o.x[j];
            self.z[j] ^= o.z[j];
        }
        self.sign ^= o.sign;
        self
    }
}

fn z_eigenvalue<W: Word>(t: &Tableau<W>, q: usize) -> Result<bool, MeasureError> {
    let n = t.num_qubits();
    let k = t.words();
    let row = 2 * k;
    let w = W::BITS as usize;
    let (off, b) = (q / w, q % w);
    let rows: Vec<usize> = (0..n).filter(|&g| bit_of(t.x[g * row + off], b)).collect();
    let chunk = 64;
    let fold = |ids: &[usize]| {
        let mut p = Product::<W>::identity(k);
        for &g in ids {
            p.mul_row(&t.x[g * row + k..(g + 1) * row], &t.z[g * row + k..(g + 1) * row], t.sign(n + g));
        }
        p
    };
    let prod = if rows.len() * k >= PAR_MIN {
        let parts: Vec<Product<W>> = rows.par_chunks(chunk).map(fold).collect();
        parts.into_iter().fold(Product::identity(k), Product::mul)
    } else {
        fold(&rows)
    };
    let mut expect_z = vec![W::ZERO; k];
    expect_z[off] = W::single(b);
    if prod.phase & 1 == 1 || prod.x.iter().any(|&v| v != W::ZERO) || prod.z != expect_z {
        return Err(MeasureError::Corrupted(q));
    }
    Ok((prod.phase == 2) ^ prod.sign)
}

/// Measure every qubit of a measurement window. Transposes to row-major and back.
pub fn measure_window<W: Word>(
    tableau: &mut Tableau<W>,
    window: &Window,
    rng: &mut BitStream,
) -> Result<MeasurementRecord, MeasureError> {
    tableau.expect_layout(Layout::ColumnMajor)?;
    tableau.transpose_in_place();
    let mut times = PhaseTimes::default();
    let r = measure_window_rows(tableau, window, rng, &mut times);
    tableau.transpose_in_place();
    r
}

/// [`measure_window`] on a tableau already in row-major layout.
pub fn measure_window_rows<W: Word>(
    tableau: &mut Tableau<W>,
    window: &Window,
    rng: &mut BitStream,
    times: &mut PhaseTimes,
) -> Result<MeasurementRecord, MeasureError> {
    let t0 = Instant::now();
    let probabilistic = find_probabilistic(tableau, window)?;
    times.cmp += t0.elapsed();
    let mut rec = MeasurementRecord { outcomes: Vec::with_capacity(window.gates.len()) };
    for (g, &pr) in window.gates.iter().zip(&probabilistic) {
        let q = g.q0();
        if pr >= 0 {
            let t0 = Instant::now();
            let pivots = find_and_compact_pivots(tableau, q)?;
            times.cmp += t0.elapsed();
            if pivots.count > 0 {
                let t0 = Instant::now();
                let p = pivots.entries[0] as usize;
                parallel_ge(tableau, &pivots)?;
                swap_anti_commuting(tableau, p, q)?;
                let v = z_eigenvalue(tableau, q)?;
                let m = rng.next_bit();
                if m != v {
                    inject_x(tableau, p)?;
                }
                times.ge += t0.elapsed();
                rec.outcomes.push(Outcome { qubit: q, bit: m, deterministic: false });
                continue;
            }
        }
        let t0 = Instant::now();
        let bit = deterministic_outcome(tableau, q)?;
        times.ge += t0.elapsed();
        rec.outcomes.push(Outcome { qubit: q, bit, deterministic: true });
    }
    Ok(rec)
}
