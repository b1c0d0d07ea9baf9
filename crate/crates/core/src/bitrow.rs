//! Packed binary vectors and the Hamming metric.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default upper bound on the row width `d`.
pub const DEFAULT_MAX_WIDTH: usize = 1 << 16;

const WORD_BITS: usize = 64;

/// A fixed-width vector in `{0,1}^d`, packed into 64-bit words.
///
/// Coordinate `i` lives in bit `i % 64` of word `i / 64`. Bits past the
/// last coordinate are always zero, so whole-word operations (popcount,
/// equality, hashing) never need masking.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    width: usize,
    words: Box<[u64]>,
}

impl BitRow {
    pub fn zeros(width: usize) -> Self {
        BitRow {
            width,
            words: vec![0; width.div_ceil(WORD_BITS)].into_boxed_slice(),
        }
    }

    pub fn ones(width: usize) -> Self {
        let mut row = Self::zeros(width);
        for w in row.words.iter_mut() {
            *w = u64::MAX;
        }
        row.clear_tail();
        row
    }

    pub fn from_bits<I>(bits: I) -> Self
    where
        I: IntoIterator<Item = bool>,
    {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut row = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                row.set(i, true);
            }
        }
        row
    }

    /// Builds a row of `width` coordinates from an integer read as a bit
    /// string with coordinate 0 as the most significant bit. Lexicographic
    /// order on such rows matches numeric order on `value`.
    pub fn from_msb_first(value: u64, width: usize) -> Self {
        assert!(width <= WORD_BITS, "from_msb_first supports widths up to 64");
        let mut row = Self::zeros(width);
        for i in 0..width {
            if (value >> (width - 1 - i)) & 1 == 1 {
                row.set(i, true);
            }
        }
        row
    }

    /// Inverse of [`BitRow::from_msb_first`].
    pub fn to_msb_first(&self) -> u64 {
        assert!(self.width <= WORD_BITS, "to_msb_first supports widths up to 64");
        (0..self.width).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width, "coordinate {i} out of range for width {}", self.width);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.width, "coordinate {i} out of range for width {}", self.width);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }

    /// Number of coordinates where `self` and `other` differ.
    pub fn hamming(&self, other: &BitRow) -> Result<u64> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: other.width,
            });
        }
        Ok(self.hamming_unchecked(other))
    }

    /// Hamming distance without the width check. Callers guarantee equal widths.
    #[inline]
    pub fn hamming_unchecked(&self, other: &BitRow) -> u64 {
        debug_assert_eq!(self.width, other.width);
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }

    fn clear_tail(&mut self) {
        let rem = self.width % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// Free-function form of [`BitRow::hamming`].
pub fn hamming(x: &BitRow, y: &BitRow) -> Result<u64> {
    x.hamming(y)
}

impl Ord for BitRow {
    /// Lexicographic order of the `0`/`1` strings, shorter widths first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.width.cmp(&other.width).then_with(|| {
            self.words
                .iter()
                .map(|w| w.reverse_bits())
                .cmp(other.words.iter().map(|w| w.reverse_bits()))
        })
    }
}

impl PartialOrd for BitRow {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow({self})")
    }
}

impl FromStr for BitRow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut row = BitRow::zeros(s.chars().count());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => row.set(i, true),
                other => return Err(Error::parse(0, format!("unexpected character {other:?} in binary row"))),
            }
        }
        Ok(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(s: &str) -> BitRow {
        s.parse().unwrap()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&row("0101"), &row("0101")).unwrap(), 0);
        assert_eq!(hamming(&row("0000"), &row("1111")).unwrap(), 4);
        assert_eq!(hamming(&row("0101"), &row("0110")).unwrap(), 2);
    }

    #[test]
    fn hamming_width_mismatch() {
        assert!(matches!(
            hamming(&row("01"), &row("011")),
            Err(Error::WidthMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn ones_clears_tail_bits() {
        let r = BitRow::ones(70);
        assert_eq!(r.count_ones(), 70);
        assert_eq!(r.words()[1], (1 << 6) - 1);
        assert_eq!(r, BitRow::from_bits(std::iter::repeat_n(true, 70)));
    }

    #[test]
    fn order_is_lexicographic() {
        let mut rows = [row("110"), row("001"), row("100"), row("011")];
        rows.sort();
        let s: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
        assert_eq!(s, ["001", "011", "100", "110"]);

        let a = BitRow::from_bits((0..80).map(|i| i == 70));
        let b = BitRow::from_bits((0..80).map(|i| i == 3));
        assert!(a < b);
    }

    #[test]
    fn msb_first_roundtrip() {
        assert_eq!(BitRow::from_msb_first(0b01, 2).to_string(), "01");
        assert_eq!(BitRow::from_msb_first(0b110, 3).to_string(), "110");
        for v in 0..16 {
            assert_eq!(BitRow::from_msb_first(v, 4).to_msb_first(), v);
        }
    }

    #[test]
    fn parse_rejects_other_characters() {
        assert!("01a".parse::<BitRow>().is_err());
        assert_eq!(row("").width(), 0);
    }
}
