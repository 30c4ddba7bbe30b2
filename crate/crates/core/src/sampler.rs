//! Many-shot sampling with Pauli frames. Frames are qubit-major: word `(q, j)` packs the
//! frame bits of shots `j*w .. j*w + w` on qubit `q`. One reference shot from the tableau
//! engine supplies absolute outcomes; frames supply per-shot flips.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::gates::{apply_columns, gather, Columns, GateError};
use crate::measure::MeasureError;
use crate::rng::{frame_word, seed_key};
use crate::scheduler::{schedule_windows, Mode, Window};
use crate::simulator::{simulate, MeasureMap, SimError};
use crate::word::{words_for, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameTableau<W> {
    pub n: usize,
    pub f: usize,
    pub kf: usize,
    pub x: Vec<W>,
    pub z: Vec<W>,
}

/// Outcome words per measurement, in program order of the measurement gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord<W> {
    pub shots: usize,
    pub kf: usize,
    pub qubits: Vec<usize>,
    pub words: Vec<W>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Binary,
}

fn pad_mask<W: Word>(f: usize, j: usize) -> W {
    let w = W::BITS as usize;
    let lo = j * w;
    if lo + w <= f {
        W::ONES
    } else {
        W::low_bits(f - lo)
    }
}

pub fn init_frames<W: Word>(n: usize, f: usize, seed: u64) -> FrameTableau<W> {
    assert!(f >= 1, "at least one shot");
    let kf = words_for::<W>(f);
    let key = seed_key(seed);
    let mut z = vec![W::ZERO; n * kf];
    let fill = |(q, col): (usize, &mut [W])| {
        for (j, v) in col.iter_mut().enumerate() {
            *v = frame_word::<W>(key, q, j, 0) & pad_mask::<W>(f, j);
        }
    };
    if n * kf >= crate::bitplane::PAR_MIN {
        z.par_chunks_mut(kf).enumerate().for_each(fill);
    } else {
        z.chunks_mut(kf).enumerate().for_each(fill);
    }
    FrameTableau { n, f, kf, x: vec![W::ZERO; n * kf], z }
}

/// Apply a unitary window to every shot. Frames carry no signs.
pub fn apply_window_frames<W: Word>(frames: &mut FrameTableau<W>, window: &Window) -> Result<(), GateError> {
    if window.is_measurement {
        return Err(GateError::MeasurementWindow);
    }
    let (n, kf) = (frames.n, frames.kf);
    let mut cols = Columns::new(&mut frames.x, &mut frames.z, kf);
    let mut work = gather(window, &mut cols, n)?;
    let run = |(kind, (ax, az), b): &mut crate::gates::GateCols<'_, W>| {
        let b = b.as_mut().map(|(x, z)| (&mut **x, &mut **z));
        apply_columns::<W, false>(*kind, ax, az, b, &mut []);
    };
    if work.len() * kf >= crate::bitplane::PAR_MIN {
        work.par_iter_mut().for_each(run);
    } else {
        work.iter_mut().for_each(run);
    }
    Ok(())
}

/// Record the X frame of every measured qubit, then re-randomize its Z frame. `slots[i]`
/// is the record index of the window's `i`-th measurement.
pub fn measure_sample<W: Word>(
    frames: &mut FrameTableau<W>,
    window: &Window,
    slots: &[usize],
    record: &mut ShotRecord<W>,
    seed: u64,
    epoch: u32,
) -> Result<(), MeasureError> {
    let (n, f, kf) = (frames.n, frames.f, frames.kf);
    let mut seen = vec![false; n];
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
    }
    let key = seed_key(seed);
    for (g, &slot) in window.gates.iter().zip(slots) {
        let q = g.q0();
        record.words[slot * kf..(slot + 1) * kf].copy_from_slice(&frames.x[q * kf..(q + 1) * kf]);
    }
    let mut zcols: Vec<Option<&mut [W]>> = frames.z.chunks_mut(kf).map(Some).collect();
    let mut targets: Vec<(usize, &mut [W])> =
        window.gates.iter().map(|g| (g.q0(), zcols[g.q0()].take().expect("distinct"))).collect();
    let refill = |(q, col): &mut (usize, &mut [W])| {
        for (j, v) in col.iter_mut().enumerate() {
            *v = frame_word::<W>(key, *q, j, epoch) & pad_mask::<W>(f, j);
        }
    };
    if targets.len() * kf >= crate::bitplane::PAR_MIN {
        targets.par_iter_mut().for_each(refill);
    } else {
        targets.iter_mut().for_each(refill);
    }
    Ok(())
}

/// Flip record of `f` shots: one reference-free frame propagation.
pub fn sample_flips<W: Word>(circuit: &Circuit, f: usize, seed: u64) -> Result<ShotRecord<W>, SimError> {
    let schedule = schedule_windows(circuit, Mode::Sampling);
    let mut frames = init_frames::<W>(circuit.num_qubits, f, seed);
    let kf = frames.kf;
    let mut record = ShotRecord {
        shots: f,
        kf,
        qubits: circuit.measured_qubits(),
        words: vec![W::ZERO; circuit.num_measurements() * kf],
    };
    let mut map = MeasureMap::new(circuit);
    let mut epoch = 0u32;
    for window in &schedule.windows {
        if window.is_measurement {
            epoch += 1;
            let slots: Vec<usize> = window.gates.iter().map(|g| map.next(g.q0())).collect();
            measure_sample(&mut frames, window, &slots, &mut record, seed, epoch)?;
        } else {
            apply_window_frames(&mut frames, window)?;
        }
    }
    Ok(record)
}

/// Absolute outcomes for `f` shots: reference shot XOR frame flips.
pub fn sample<W: Word>(circuit: &Circuit, f: usize, seed: u64) -> Result<ShotRecord<W>, SimError> {
    let reference = simulate::<W>(circuit, seed)?;
    let mut record = sample_flips::<W>(circuit, f, seed)?;
    let kf = record.kf;
    for (m, o) in reference.outcomes.iter().enumerate() {
        if o.bit {
            for j in 0..kf {
                record.words[m * kf + j] ^= pad_mask::<W>(f, j);
            }
        }
    }
    Ok(record)
}

impl<W: Word> ShotRecord<W> {
    pub fn num_measurements(&self) -> usize {
        self.qubits.len()
    }

    pub fn bit(&self, m: usize, shot: usize) -> bool {
        let w = W::BITS as usize;
        self.words[m * self.kf + shot / w].bit(shot % w)
    }

    /// Outcomes of one shot, in measurement order.
    pub fn shot(&self, shot: usize) -> Vec<bool> {
        (0..self.num_measurements()).map(|m| self.bit(m, shot)).collect()
    }

    pub fn count_ones(&self, m: usize) -> usize {
        self.words[m * self.kf..(m + 1) * self.kf].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn write_to(&self, out: &mut impl Write, format: Format) -> io::Result<()> {
        match format {
            Format::Text => {
                let mut line = Vec::with_capacity(self.num_measurements() + 1);
                for s in 0..self.shots {
                    line.clear();
                    line.extend((0..self.num_measurements()).map(|m| if self.bit(m, s) { b'1' } else { b'0' }));
                    line.push(b'\n');
                    out.write_all(&line)?;
                }
            }
            Format::Binary => {
                let bytes = W::BITS as usize / 8;
                for w in &self.words {
                    out.write_all(&w.to_u64().to_le_bytes()[..bytes])?;
                }
            }
        }
        Ok(())
    }

    /// Inverse of [`ShotRecord::write_to`]. Text input needs no shape; binary input needs
    /// the measurement count and shot count.
    pub fn read_text(text: &str, qubits: Vec<usize>) -> Result<Self, String> {
        let shots = text.lines().count();
        let kf = words_for::<W>(shots.max(1));
        let mut words = vec![W::ZERO; qubits.len() * kf];
        let w = W::BITS as usize;
        for (s, line) in text.lines().enumerate() {
            if line.len() != qubits.len() {
                return Err(format!("line {}: expected {} bits", s + 1, qubits.len()));
            }
            for (m, c) in line.bytes().enumerate() {
                match c {
                    b'0' => {}
                    b'1' => words[m * kf + s / w] = words[m * kf + s / w] | W::single(s % w),
                    _ => return Err(format!("line {}: bad character", s + 1)),
                }
            }
        }
        Ok(ShotRecord { shots, kf, qubits, words })
    }

    pub fn read_binary(bytes: &[u8], qubits: Vec<usize>, shots: usize) -> Result<Self, String> {
        let kf = words_for::<W>(shots.max(1));
        let size = W::BITS as usize / 8;
        if bytes.len() != qubits.len() * kf * size {
            return Err(format!("expected {} bytes, got {}", qubits.len() * kf * size, bytes.len()));
        }
        let words = bytes
            .chunks(size)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..size].copy_from_slice(c);
                W::from_u64(u64::from_le_bytes(buf))
            })
            .collect();
        Ok(ShotRecord { shots, kf, qubits, words })
    }
}
