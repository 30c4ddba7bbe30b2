//! Column-wise tableau evolution under a window of qubit-disjoint gates.
//!
//! Rules act on the X/Z words of the operand columns; the sign contribution of word `j` is
//! XOR-ed into sign word `j`. H, S and CX follow the textbook CHP updates. The remaining
//! kinds were derived by conjugating Pauli bases with the dense unitaries (see the tests).

use rayon::prelude::*;
use thiserror::Error;

use crate::bitplane::reduce_xor;
use crate::circuit::GateKind;
use crate::scheduler::Window;
use crate::tableau::{Layout, Tableau, TableauError};
use crate::word::Word;

/// Gates per sign-reduction partition.
pub const PARTITION: usize = 1024;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GateError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("window is a measurement window")]
    MeasurementWindow,
    #[error("qubit {0} is used twice in one window")]
    NotDisjoint(usize),
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
}

/// Apply `kind` to operand columns. `b` is the target column for two-qubit kinds. When
/// `SIGNS` is false the sign slice is ignored.
#[inline]
pub(crate) fn apply_columns<W: Word, const SIGNS: bool>(
    kind: GateKind,
    ax: &mut [W],
    az: &mut [W],
    b: Option<(&mut [W], &mut [W])>,
    signs: &mut [W],
) {
    let len = ax.len();
    macro_rules! each {
        (|$j:ident, $x:ident, $z:ident, $s:ident| $body:block) => {
            for $j in 0..len {
                let ($x, $z) = (ax[$j], az[$j]);
                let $s: W;
                $body
                if SIGNS {
                    signs[$j] ^= $s;
                }
            }
        };
    }
    match kind {
        GateKind::H => each!(|j, x, z, s| {
            s = x & z;
            ax[j] = z;
            az[j] = x;
        }),
        GateKind::S => each!(|j, x, z, s| {
            s = x & z;
            az[j] = z ^ x;
        }),
        GateKind::Sdg => each!(|j, x, z, s| {
            s = x & !z;
            az[j] = z ^ x;
        }),
        GateKind::X => {
            if SIGNS {
                for j in 0..len {
                    signs[j] ^= az[j];
                }
            }
        }
        GateKind::Z => {
            if SIGNS {
                for j in 0..len {
                    signs[j] ^= ax[j];
                }
            }
        }
        GateKind::Y => {
            if SIGNS {
                for j in 0..len {
                    signs[j] ^= ax[j] ^ az[j];
                }
            }
        }
        GateKind::Cx => {
            let (bx, bz) = b.expect("two operands");
            for j in 0..len {
                let (xc, zc, xt, zt) = (ax[j], az[j], bx[j], bz[j]);
                if SIGNS {
                    signs[j] ^= xc & zt & !(xt ^ zc);
                }
                bx[j] = xt ^ xc;
                az[j] = zc ^ zt;
            }
        }
        GateKind::Cz => {
            let (bx, bz) = b.expect("two operands");
            for j in 0..len {
                let (xc, zc, xt, zt) = (ax[j], az[j], bx[j], bz[j]);
                if SIGNS {
                    signs[j] ^= xc & xt & (zc ^ zt);
                }
                az[j] = zc ^ xt;
                bz[j] = zt ^ xc;
            }
        }
        GateKind::Swap => {
            let (bx, bz) = b.expect("two operands");
            ax.swap_with_slice(bx);
            az.swap_with_slice(bz);
        }
        GateKind::Cy => {
            let (bx, bz) = b.expect("two operands");
            apply_columns::<W, SIGNS>(GateKind::Sdg, bx, bz, None, signs);
            apply_columns::<W, SIGNS>(GateKind::Cx, ax, az, Some((&mut *bx, &mut *bz)), signs);
            apply_columns::<W, SIGNS>(GateKind::S, bx, bz, None, signs);
        }
        GateKind::Iswap => {
            let (bx, bz) = b.expect("two operands");
            apply_columns::<W, SIGNS>(GateKind::S, ax, az, None, signs);
            apply_columns::<W, SIGNS>(GateKind::S, bx, bz, None, signs);
            apply_columns::<W, SIGNS>(GateKind::H, ax, az, None, signs);
            apply_columns::<W, SIGNS>(GateKind::Cx, ax, az, Some((&mut *bx, &mut *bz)), signs);
            apply_columns::<W, SIGNS>(GateKind::Cx, bx, bz, Some((&mut *ax, &mut *az)), signs);
            apply_columns::<W, SIGNS>(GateKind::H, bx, bz, None, signs);
        }
        GateKind::Measure => panic!("measurement is not a unitary rule"),
    }
}

/// Rule for one word per operand: `x_words[i]`, `z_words[i]` belong to operand `i`.
/// Returns the sign contribution.
pub fn apply_gate_rule<W: Word>(kind: GateKind, x_words: &mut [W], z_words: &mut [W]) -> W {
    assert_eq!(x_words.len(), kind.arity());
    assert_eq!(z_words.len(), kind.arity());
    let mut s = [W::ZERO];
    let (ax, bx) = x_words.split_at_mut(1);
    let (az, bz) = z_words.split_at_mut(1);
    let b = if kind.arity() == 2 { Some((bx, bz)) } else { None };
    apply_columns::<W, true>(kind, ax, az, b, &mut s);
    s[0]
}

/// `target ^= XOR of contributions`, combined as a tree.
pub fn collapse_signs<W: Word>(contributions: &[W], target: &mut W) {
    *target ^= reduce_xor(contributions);
}

pub(crate) struct Columns<'a, W> {
    x: Vec<Option<&'a mut [W]>>,
    z: Vec<Option<&'a mut [W]>>,
}

impl<'a, W: Word> Columns<'a, W> {
    pub(crate) fn new(x: &'a mut [W], z: &'a mut [W], len: usize) -> Self {
        Columns { x: x.chunks_mut(len).map(Some).collect(), z: z.chunks_mut(len).map(Some).collect() }
    }

    pub(crate) fn take(&mut self, q: usize) -> Result<(&'a mut [W], &'a mut [W]), GateError> {
        if q >= self.x.len() {
            return Err(GateError::OutOfRange(q));
        }
        match (self.x[q].take(), self.z[q].take()) {
            (Some(x), Some(z)) => Ok((x, z)),
            _ => Err(GateError::NotDisjoint(q)),
        }
    }
}

pub(crate) type GateCols<'a, W> = (GateKind, (&'a mut [W], &'a mut [W]), Option<(&'a mut [W], &'a mut [W])>);

pub(crate) fn gather<'a, W: Word>(
    window: &Window,
    cols: &mut Columns<'a, W>,
    n: usize,
) -> Result<Vec<GateCols<'a, W>>, GateError> {
    let mut out = Vec::with_capacity(window.gates.len());
    for g in &window.gates {
        for &q in g.qubits() {
            if q as usize >= n {
                return Err(GateError::OutOfRange(q as usize));
            }
        }
        let a = cols.take(g.q0())?;
        let b = if g.kind.arity() == 2 { Some(cols.take(g.q1())?) } else { None };
        out.push((g.kind, a, b));
    }
    Ok(out)
}

/// Evolve a column-major tableau through one unitary window.
pub fn apply_window<W: Word>(tableau: &mut Tableau<W>, window: &Window) -> Result<(), GateError> {
    tableau.expect_layout(Layout::ColumnMajor)?;
    if window.is_measurement {
        return Err(GateError::MeasurementWindow);
    }
    let n = tableau.num_qubits();
    let len = 2 * tableau.words();
    let mut cols = Columns::new(&mut tableau.x, &mut tableau.z, len);
    let mut work = gather(window, &mut cols, n)?;

    let run = |part: &mut [GateCols<'_, W>]| -> Vec<W> {
        let mut local = vec![W::ZERO; len];
        for (kind, (ax, az), b) in part.iter_mut() {
            let b = b.as_mut().map(|(x, z)| (&mut **x, &mut **z));
            apply_columns::<W, true>(*kind, ax, az, b, &mut local);
        }
        local
    };
    let partials: Vec<Vec<W>> = if work.len() * len < crate::bitplane::PAR_MIN {
        work.chunks_mut(PARTITION).map(run).collect()
    } else {
        // Smaller partitions than PARTITION keep all threads busy; results are XOR-combined,
        // so the split does not affect the outcome.
        let part = PARTITION.min(work.len().div_ceil(rayon::current_num_threads() * 4)).max(1);
        work.par_chunks_mut(part).map(run).collect()
    };
    let signs = &mut tableau.s;
    if partials.len() == 1 {
        for (s, c) in signs.iter_mut().zip(&partials[0]) {
            *s ^= *c;
        }
    } else {
        let mut column = vec![W::ZERO; partials.len()];
        for (j, s) in signs.iter_mut().enumerate() {
            for (c, p) in column.iter_mut().zip(&partials) {
                *c = p[j];
            }
            collapse_signs(&column, s);
        }
    }
    Ok(())
}

/// Apply a single gate (as a one-gate window).
pub fn apply_gate<W: Word>(tableau: &mut Tableau<W>, gate: crate::circuit::Gate) -> Result<(), GateError> {
    apply_window(tableau, &Window { gates: vec![gate], is_measurement: false })
}
