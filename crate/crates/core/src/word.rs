use std::fmt::Debug;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, BitXor, BitXorAssign, Not, Shl, Shr};

/// Shuffle masks for the recursive bit transpose, finest level first.
pub const MASKS64: [u64; 6] = [
    0x5555555555555555,
    0x3333333333333333,
    0x0F0F0F0F0F0F0F0F,
    0x00FF00FF00FF00FF,
    0x0000FFFF0000FFFF,
    0x00000000FFFFFFFF,
];

/// Machine word used to pack tableau bits. Bit `b` of word `j` is logical index `j * BITS + b`.
pub trait Word:
    Copy
    + Eq
    + Default
    + Debug
    + Send
    + Sync
    + 'static
    + BitAnd<Output = Self>
    + BitOr<Output = Self>
    + BitXor<Output = Self>
    + Not<Output = Self>
    + BitAndAssign
    + BitOrAssign
    + BitXorAssign
    + Shl<u32, Output = Self>
    + Shr<u32, Output = Self>
{
    const BITS: u32;
    const LOG_BITS: u32;
    const ZERO: Self;
    const ONE: Self;
    const ONES: Self;

    fn count_ones(self) -> u32;
    fn from_u64(v: u64) -> Self;
    fn to_u64(self) -> u64;

    #[inline(always)]
    fn bit(self, b: usize) -> bool {
        (self >> b as u32) & Self::ONE == Self::ONE
    }

    #[inline(always)]
    fn single(b: usize) -> Self {
        Self::ONE << b as u32
    }

    /// Transpose mask for shuffle level `l` (group size `2^l`).
    #[inline(always)]
    fn mask(l: u32) -> Self {
        Self::from_u64(MASKS64[l as usize])
    }

    /// Low `b` bits set.
    #[inline]
    fn low_bits(b: usize) -> Self {
        if b >= Self::BITS as usize {
            Self::ONES
        } else {
            Self::from_u64((1u64 << b) - 1)
        }
    }
}

macro_rules! impl_word {
    ($t:ty, $log:expr) => {
        impl Word for $t {
            const BITS: u32 = <$t>::BITS;
            const LOG_BITS: u32 = $log;
            const ZERO: Self = 0;
            const ONE: Self = 1;
            const ONES: Self = <$t>::MAX;

            #[inline(always)]
            fn count_ones(self) -> u32 {
                <$t>::count_ones(self)
            }
            #[inline(always)]
            fn from_u64(v: u64) -> Self {
                v as $t
            }
            #[inline(always)]
            fn to_u64(self) -> u64 {
                self as u64
            }
        }
    };
}

impl_word!(u8, 3);
impl_word!(u16, 4);
impl_word!(u32, 5);
impl_word!(u64, 6);

/// Number of words needed for `bits` bits.
#[inline]
pub fn words_for<W: Word>(bits: usize) -> usize {
    bits.div_ceil(W::BITS as usize)
}

#[inline(always)]
pub fn get_bit<W: Word>(words: &[W], i: usize) -> bool {
    let w = W::BITS as usize;
    words[i / w].bit(i % w)
}

#[inline(always)]
pub fn set_bit<W: Word>(words: &mut [W], i: usize, v: bool) {
    let w = W::BITS as usize;
    let m = W::single(i % w);
    if v {
        words[i / w] |= m;
    } else {
        words[i / w] &= !m;
    }
}

#[inline(always)]
pub fn flip_bit<W: Word>(words: &mut [W], i: usize) {
    let w = W::BITS as usize;
    words[i / w] ^= W::single(i % w);
}
