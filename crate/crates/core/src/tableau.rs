//! Bit-packed extended tableau: destabilizers `0..n`, stabilizers `n..2n`, X and Z
//! bit-planes plus one sign bit per generator.
//!
//! Storage pads the qubit dimension to `n' = k * w`. In column-major layout word `(q, j)`
//! at `q * 2k + j` packs generator bits of qubit `q`; `j < k` are destabilizer words,
//! `j >= k` stabilizer words. In row-major layout the destabilizer `g` occupies words
//! `g * 2k .. g * 2k + k` and stabilizer `g` the following `k` words, each packing qubit
//! bits. The sign vector has `2k` words in both layouts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::bitplane::transpose_unchecked;
use crate::word::{self, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    ColumnMajor,
    RowMajor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Hermitian Pauli string with a sign. `Y` stands for the Hermitian operator with bits (1, 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub negative: bool,
    pub paulis: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { negative: false, paulis: vec![Pauli::I; n] }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.paulis[q] = p;
        s
    }

    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for p in &self.paulis {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid Pauli string `{0}`")]
pub struct ParsePauliError(pub String);

impl FromStr for PauliString {
    type Err = ParsePauliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let paulis = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(ParsePauliError(s.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(PauliString { negative, paulis })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error("a tableau needs at least one qubit")]
    Empty,
    #[error("generator index {0} out of range")]
    GeneratorOutOfRange(usize),
    #[error("expected {expected:?} layout")]
    Layout { expected: Layout },
}

/// First broken condition found by [`Tableau::check_group_validity`].
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidityError {
    #[error("generators {0} and {1} anticommute")]
    Anticommute(usize, usize),
    #[error("destabilizer {0} commutes with its stabilizer")]
    PairCommutes(usize),
    #[error("padding bit set in generator {0}")]
    Padding(usize),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Tableau<W: Word> {
    n: usize,
    k: usize,
    pub(crate) x: Vec<W>,
    pub(crate) z: Vec<W>,
    pub(crate) s: Vec<W>,
    layout: Layout,
}

impl<W: Word> fmt::Debug for Tableau<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tableau(n={}, w={}, {:?})\n{}", self.n, W::BITS, self.layout, self.dump())
    }
}

impl<W: Word> Tableau<W> {
    /// Basis state `|initstate>`: destabilizer `i` is `X_i`, stabilizer `i` is `Z_i`, both with
    /// sign `initstate[i]`.
    pub fn new_basis_state(initstate: &[bool]) -> Result<Self, TableauError> {
        let n = initstate.len();
        if n == 0 {
            return Err(TableauError::Empty);
        }
        let mut t = Self::zeroed(n);
        let k = t.k;
        let w = W::BITS as usize;
        for q in 0..n {
            t.x[q * 2 * k + q / w] = W::single(q % w);
            t.z[q * 2 * k + k + q / w] = W::single(q % w);
            if initstate[q] {
                word::set_bit(&mut t.s[..k], q, true);
                word::set_bit(&mut t.s[k..], q, true);
            }
        }
        Ok(t)
    }

    pub fn zero_state(n: usize) -> Self {
        Self::new_basis_state(&vec![false; n]).expect("n >= 1")
    }

    /// All-zero storage in column-major layout.
    pub fn zeroed(n: usize) -> Self {
        let k = word::words_for::<W>(n);
        let nq = k * W::BITS as usize;
        Tableau {
            n,
            k,
            x: vec![W::ZERO; nq * 2 * k],
            z: vec![W::ZERO; nq * 2 * k],
            s: vec![W::ZERO; 2 * k],
            layout: Layout::ColumnMajor,
        }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Words per generator block (`ceil(n / w)`).
    #[inline]
    pub fn words(&self) -> usize {
        self.k
    }

    /// Padded qubit count `k * w`.
    #[inline]
    pub fn padded(&self) -> usize {
        self.k * W::BITS as usize
    }

    #[inline]
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn x_words(&self) -> &[W] {
        &self.x
    }

    pub fn z_words(&self) -> &[W] {
        &self.z
    }

    pub fn sign_words(&self) -> &[W] {
        &self.s
    }

    /// Storage size in bytes of the three word arrays.
    pub fn payload_bytes(&self) -> usize {
        (self.x.len() + self.z.len() + self.s.len()) * (W::BITS as usize / 8)
    }

    pub(crate) fn expect_layout(&self, layout: Layout) -> Result<(), TableauError> {
        if self.layout == layout {
            Ok(())
        } else {
            Err(TableauError::Layout { expected: layout })
        }
    }

    /// (word index, bit) of generator `g`, qubit `q` in the current layout.
    #[inline]
    fn locate(&self, g: usize, q: usize) -> (usize, usize) {
        let w = W::BITS as usize;
        let k = self.k;
        let (half, r) = if g < self.n { (0, g) } else { (k, g - self.n) };
        match self.layout {
            Layout::ColumnMajor => (q * 2 * k + half + r / w, r % w),
            Layout::RowMajor => (r * 2 * k + half + q / w, q % w),
        }
    }

    #[inline]
    fn sign_bit_index(&self, g: usize) -> usize {
        if g < self.n {
            g
        } else {
            self.padded() + g - self.n
        }
    }

    #[inline]
    pub fn x_bit(&self, g: usize, q: usize) -> bool {
        let (i, b) = self.locate(g, q);
        self.x[i].bit(b)
    }

    #[inline]
    pub fn z_bit(&self, g: usize, q: usize) -> bool {
        let (i, b) = self.locate(g, q);
        self.z[i].bit(b)
    }

    pub fn set_x_bit(&mut self, g: usize, q: usize, v: bool) {
        let (i, b) = self.locate(g, q);
        word::set_bit(&mut self.x[i..=i], b, v);
    }

    pub fn set_z_bit(&mut self, g: usize, q: usize, v: bool) {
        let (i, b) = self.locate(g, q);
        word::set_bit(&mut self.z[i..=i], b, v);
    }

    #[inline]
    pub fn sign(&self, g: usize) -> bool {
        word::get_bit(&self.s, self.sign_bit_index(g))
    }

    pub fn set_sign(&mut self, g: usize, v: bool) {
        let i = self.sign_bit_index(g);
        word::set_bit(&mut self.s, i, v);
    }

    pub fn flip_sign(&mut self, g: usize) {
        let i = self.sign_bit_index(g);
        word::flip_bit(&mut self.s, i);
    }

    pub fn get_generator(&self, g: usize) -> Result<PauliString, TableauError> {
        if g >= 2 * self.n {
            return Err(TableauError::GeneratorOutOfRange(g));
        }
        Ok(PauliString {
            negative: self.sign(g),
            paulis: (0..self.n).map(|q| Pauli::from_bits(self.x_bit(g, q), self.z_bit(g, q))).collect(),
        })
    }

    pub fn set_generator(&mut self, g: usize, p: &PauliString) -> Result<(), TableauError> {
        if g >= 2 * self.n || p.len() != self.n {
            return Err(TableauError::GeneratorOutOfRange(g));
        }
        for (q, &pq) in p.paulis.iter().enumerate() {
            let (x, z) = pq.bits();
            self.set_x_bit(g, q, x);
            self.set_z_bit(g, q, z);
        }
        self.set_sign(g, p.negative);
        Ok(())
    }

    /// Build a tableau from explicit destabilizer and stabilizer lists.
    pub fn from_generators(destab: &[PauliString], stab: &[PauliString]) -> Result<Self, TableauError> {
        let n = stab.len();
        if n == 0 {
            return Err(TableauError::Empty);
        }
        let mut t = Self::zeroed(n);
        for (i, d) in destab.iter().enumerate() {
            t.set_generator(i, d)?;
        }
        for (i, s) in stab.iter().enumerate() {
            t.set_generator(n + i, s)?;
        }
        Ok(t)
    }

    /// In-place layout flip: bit-transpose every w x w tile, then swap off-diagonal tiles
    /// within the destabilizer half and within the stabilizer half. Signs are untouched.
    pub fn transpose_in_place(&mut self) {
        let k = self.k;
        transpose_plane::<W>(&mut self.x, k);
        transpose_plane::<W>(&mut self.z, k);
        self.layout = match self.layout {
            Layout::ColumnMajor => Layout::RowMajor,
            Layout::RowMajor => Layout::ColumnMajor,
        };
    }

    pub fn to_layout(&mut self, layout: Layout) {
        if self.layout != layout {
            self.transpose_in_place();
        }
    }

    /// Generator rows as packed qubit words, `(x, z)` each `2n * k` words, destabilizers first.
    pub fn rows(&self) -> (Vec<W>, Vec<W>) {
        let owned;
        let src = if self.layout == Layout::RowMajor {
            self
        } else {
            let mut t = self.clone();
            t.transpose_in_place();
            owned = t;
            &owned
        };
        let k = self.k;
        let mut xr = vec![W::ZERO; 2 * self.n * k];
        let mut zr = vec![W::ZERO; 2 * self.n * k];
        for g in 0..self.n {
            for (half, base) in [(0, g), (k, self.n + g)] {
                let from = g * 2 * k + half;
                xr[base * k..base * k + k].copy_from_slice(&src.x[from..from + k]);
                zr[base * k..base * k + k].copy_from_slice(&src.z[from..from + k]);
            }
        }
        (xr, zr)
    }

    /// Symplectic checks: stabilizers commute, destabilizers commute, destabilizer `i`
    /// anticommutes with stabilizer `j` exactly when `i == j`. Padding must be zero.
    pub fn check_group_validity(&self) -> Result<(), ValidityError> {
        let n = self.n;
        let k = self.k;
        let (xr, zr) = self.rows();
        let w = W::BITS as usize;
        let tail = if n % w == 0 { W::ZERO } else { !W::low_bits(n % w) };
        for g in 0..2 * n {
            if (xr[g * k + k - 1] | zr[g * k + k - 1]) & tail != W::ZERO {
                return Err(ValidityError::Padding(g));
            }
        }
        if !self.padding_is_zero() {
            return Err(ValidityError::Padding(2 * n));
        }
        let anti = |a: usize, b: usize| -> bool {
            let mut acc = 0u32;
            for j in 0..k {
                acc ^= ((xr[a * k + j] & zr[b * k + j]) ^ (xr[b * k + j] & zr[a * k + j])).count_ones();
            }
            acc & 1 == 1
        };
        let bad = (0..2 * n).into_par_iter().find_map_first(|a| {
            for b in a + 1..2 * n {
                let expect = a < n && b == a + n;
                if anti(a, b) != expect {
                    return Some(if expect { ValidityError::PairCommutes(a) } else { ValidityError::Anticommute(a, b) });
                }
            }
            None
        });
        match bad {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// True when every storage bit outside the logical `2n x n` region, and every sign bit of
    /// a padding generator, is zero.
    pub fn padding_is_zero(&self) -> bool {
        let k = self.k;
        let w = W::BITS as usize;
        let nq = self.padded();
        let tail = if self.n % w == 0 { W::ZERO } else { !W::low_bits(self.n % w) };
        if (self.s[k - 1] | self.s[2 * k - 1]) & tail != W::ZERO {
            return false;
        }
        for plane in [&self.x, &self.z] {
            for r in 0..nq {
                let row = &plane[r * 2 * k..(r + 1) * 2 * k];
                if r >= self.n {
                    if row.iter().any(|&v| v != W::ZERO) {
                        return false;
                    }
                } else if (row[k - 1] | row[2 * k - 1]) & tail != W::ZERO {
                    return false;
                }
            }
        }
        true
    }

    /// One generator per line, destabilizers first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in 0..2 * self.n {
            out.push_str(&self.get_generator(g).expect("in range").to_string());
            out.push('\n');
        }
        out
    }
}

/// Tile-level transpose of one plane, viewed as `n'` rows of `2k` words.
fn transpose_plane<W: Word>(plane: &mut [W], k: usize) {
    let w = W::BITS as usize;
    let stride = 2 * k;
    let mut buf_a = [W::ZERO; 64];
    let mut buf_b = [W::ZERO; 64];
    let chunk = w * stride;

    // Diagonal tiles of both halves transpose in place.
    plane.par_chunks_mut(chunk).enumerate().for_each(|(a, rows)| {
        let mut buf = [W::ZERO; 64];
        for c in [a, a + k] {
            for r in 0..w {
                buf[r] = rows[r * stride + c];
            }
            transpose_unchecked(&mut buf[..w]);
            for r in 0..w {
                rows[r * stride + c] = buf[r];
            }
        }
    });

    // Off-diagonal tiles: transpose each and swap with its mirror in the same half.
    for a in 0..k {
        for c in a + 1..k {
            for half in [0, k] {
                let ia = a * chunk + c + half;
                let ic = c * chunk + a + half;
                for r in 0..w {
                    buf_a[r] = plane[ia + r * stride];
                    buf_b[r] = plane[ic + r * stride];
                }
                transpose_unchecked(&mut buf_a[..w]);
                transpose_unchecked(&mut buf_b[..w]);
                for r in 0..w {
                    plane[ia + r * stride] = buf_b[r];
                    plane[ic + r * stride] = buf_a[r];
                }
            }
        }
    }
}
