//! Fixed-length bitsets keyed by literal bits.
//!
//! Only value bits are stored; an attribute counts as present iff any of its
//! value bits is set, which keeps the attribute/value consistency rule true by
//! construction.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const W: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateBitmap {
    words: Vec<u64>,
    len: usize,
}

impl StateBitmap {
    pub fn empty(len: usize) -> Self {
        StateBitmap {
            words: vec![0; len.div_ceil(W)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Self::empty(len);
        for i in 0..len {
            b.set(i);
        }
        b
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = Self::empty(bits.len());
        for (i, &on) in bits.iter().enumerate() {
            if on {
                b.set(i);
            }
        }
        b
    }

    /// Parses a string of `0`/`1` characters, bit 0 first.
    pub fn from_binary(s: &str) -> Result<Self> {
        let bits: Option<Vec<bool>> = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.map(|b| Self::from_bits(&b))
            .ok_or_else(|| Error::Argument(format!("not a binary bitmap: `{s}`")))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / W] >> (i % W) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / W] |= 1 << (i % W);
    }

    pub fn clear(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / W] &= !(1 << (i % W));
    }

    pub fn with(&self, i: usize, on: bool) -> Self {
        let mut b = self.clone();
        if on {
            b.set(i)
        } else {
            b.clear(i)
        }
        b
    }

    /// Hamming weight.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_ones_in(&self, range: std::ops::Range<usize>) -> usize {
        range.filter(|&i| self.get(i)).count()
    }

    pub fn any_in(&self, range: std::ops::Range<usize>) -> bool {
        range.into_iter().any(|i| self.get(i))
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| !self.get(i))
    }

    /// Size of the intersection.
    pub fn and_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Hex string with bit 0 as the most significant bit of the first digit;
    /// the tail is zero-padded to a whole digit.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut d = 0u32;
            for j in 0..4 {
                let i = chunk * 4 + j;
                d <<= 1;
                if i < self.len && self.get(i) {
                    d |= 1;
                }
            }
            s.push(char::from_digit(d, 16).unwrap());
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::Argument(format!(
                "hex bitmap `{hex}` has {} digits, expected {}",
                hex.len(),
                len.div_ceil(4)
            )));
        }
        let mut b = Self::empty(len);
        for (chunk, ch) in hex.chars().enumerate() {
            let d = ch
                .to_digit(16)
                .ok_or_else(|| Error::Argument(format!("bad hex digit `{ch}`")))?;
            for j in 0..4 {
                let i = chunk * 4 + j;
                if d >> (3 - j) & 1 == 1 {
                    if i >= len {
                        return Err(Error::Argument(format!("hex bitmap `{hex}` sets padding bits")));
                    }
                    b.set(i);
                }
            }
        }
        Ok(b)
    }

    pub fn to_binary(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

/// Lexicographic on the bit string read from bit 0.
impl Ord for StateBitmap {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            match a.reverse_bits().cmp(&b.reverse_bits()) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for StateBitmap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for StateBitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateBitmap({})", self.to_binary())
    }
}

impl fmt::Display for StateBitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary())
    }
}
