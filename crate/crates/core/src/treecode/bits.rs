use std::fmt;
use std::ops::BitXor;

use rand::Rng;

use crate::{Error, Result};

pub const MAX_BLOCK_BITS: usize = 64;

/// Low `len` bits set.
#[inline]
pub fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A fixed-length GF(2) vector. Bit `i` of the packed word is coordinate `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitBlock {
    bits: u64,
    len: u8,
}

impl BitBlock {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_BLOCK_BITS {
            return Err(Error::invalid(format!("block length {len} outside 1..=64")));
        }
        if bits & !mask(len) != 0 {
            return Err(Error::invalid(format!("bits set beyond block length {len}")));
        }
        Ok(Self { bits, len: len as u8 })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        let word = bits
            .iter()
            .enumerate()
            .fold(0u64, |w, (i, &b)| w | (u64::from(b) << i));
        Self::new(word, bits.len())
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub(crate) fn from_raw(bits: u64, len: usize) -> Self {
        debug_assert!(bits & !mask(len) == 0);
        Self { bits, len: len as u8 }
    }
}

impl BitXor for BitBlock {
    type Output = BitBlock;

    fn bitxor(self, rhs: BitBlock) -> BitBlock {
        assert_eq!(self.len, rhs.len, "xor of blocks with different lengths");
        BitBlock { bits: self.bits ^ rhs.bits, len: self.len }
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitBlock(")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, ")")
    }
}

/// An `n × k` matrix over GF(2), stored column-major with each column
/// packed into a word.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GeneratorBlock {
    n: usize,
    cols: Vec<u64>,
}

impl GeneratorBlock {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self { n, cols: vec![0; k] }
    }

    pub fn from_columns(n: usize, cols: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_BLOCK_BITS || cols.is_empty() || cols.len() > MAX_BLOCK_BITS {
            return Err(Error::invalid(format!("generator block {n}x{} out of range", cols.len())));
        }
        if cols.iter().any(|c| c & !mask(n) != 0) {
            return Err(Error::invalid("column has bits beyond row count"));
        }
        Ok(Self { n, cols })
    }

    /// Builds from packed rows; bit `j` of row `r` is entry `(r, j)`.
    pub fn from_rows(n: usize, k: usize, rows: &[u64]) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: rows.len() });
        }
        if rows.iter().any(|r| r & !mask(k) != 0) {
            return Err(Error::invalid("row has bits beyond column count"));
        }
        let cols = (0..k)
            .map(|j| {
                rows.iter()
                    .enumerate()
                    .fold(0u64, |c, (r, &row)| c | (((row >> j) & 1) << r))
            })
            .collect();
        Self::from_columns(n, cols)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        let cols = (0..k).map(|_| rng.random::<u64>() & mask(n)).collect();
        Self { n, cols }
    }

    pub fn rows_count(&self) -> usize {
        self.n
    }

    pub fn cols_count(&self) -> usize {
        self.cols.len()
    }

    pub fn columns(&self) -> &[u64] {
        &self.cols
    }

    pub fn rows(&self) -> Vec<u64> {
        (0..self.n)
            .map(|r| {
                self.cols
                    .iter()
                    .enumerate()
                    .fold(0u64, |row, (j, &c)| row | (((c >> r) & 1) << j))
            })
            .collect()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.cols[c] >> r) & 1 == 1
    }

    /// `G·b` on packed words.
    #[inline]
    pub fn mul_word(&self, mut b: u64) -> u64 {
        let mut acc = 0;
        while b != 0 {
            let j = b.trailing_zeros() as usize;
            acc ^= self.cols[j];
            b &= b - 1;
        }
        acc
    }

    pub fn apply(&self, b: &BitBlock) -> Result<BitBlock> {
        if b.len() != self.cols.len() {
            return Err(Error::DimensionMismatch { expected: self.cols.len(), actual: b.len() });
        }
        Ok(BitBlock::from_raw(self.mul_word(b.bits()), self.n))
    }

    /// Column rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut cols = self.cols.clone();
        let mut rank = 0;
        for bit in 0..self.n {
            let pivot = 1u64 << bit;
            let Some(p) = (rank..cols.len()).find(|&i| cols[i] & pivot != 0) else {
                continue;
            };
            cols.swap(rank, p);
            let pc = cols[rank];
            for c in cols.iter_mut().skip(rank + 1) {
                if *c & pivot != 0 {
                    *c ^= pc;
                }
            }
            rank += 1;
        }
        rank
    }
}
