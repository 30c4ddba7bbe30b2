//! Philox4x32-10 counter-based generator and the streams built on it.

use crate::word::Word;

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

#[inline(always)]
fn round(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let (hi0, lo0) = mulhilo(M0, ctr[0]);
    let (hi1, lo1) = mulhilo(M1, ctr[2]);
    [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0]
}

/// One Philox4x32 block with 10 rounds.
pub fn philox4x32(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for r in 0..10 {
        if r > 0 {
            key[0] = key[0].wrapping_add(W0);
            key[1] = key[1].wrapping_add(W1);
        }
        ctr = round(ctr, key);
    }
    ctr
}

#[inline]
pub fn seed_key(seed: u64) -> [u32; 2] {
    [seed as u32, (seed >> 32) as u32]
}

/// Sequential bit stream used for measurement collapses. Draw `i` is the low bit of block `i`.
#[derive(Clone, Debug)]
pub struct BitStream {
    key: [u32; 2],
    stream: u32,
    counter: u64,
}

impl BitStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u32) -> Self {
        BitStream { key: seed_key(seed), stream, counter: 0 }
    }

    #[inline]
    fn block(&mut self) -> [u32; 4] {
        let c = self.counter;
        self.counter += 1;
        philox4x32([c as u32, (c >> 32) as u32, self.stream, 0], self.key)
    }

    pub fn next_bit(&mut self) -> bool {
        self.block()[0] & 1 == 1
    }

    /// Uniform in [0, 1) with 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        let b = self.block();
        let v = ((b[1] as u64) << 32 | b[0] as u64) >> 11;
        v as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn draws(&self) -> u64 {
        self.counter
    }
}

/// Random frame word for (qubit, shot-word, epoch). Independent of the total shot count.
#[inline]
pub fn frame_word<W: Word>(key: [u32; 2], q: usize, j: usize, epoch: u32) -> W {
    let b = philox4x32([j as u32, q as u32, epoch, 1], key);
    W::from_u64((b[1] as u64) << 32 | b[0] as u64)
}
