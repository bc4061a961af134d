//! Subsets of `[n]` as bit masks of arbitrary width.
//!
//! Coordinates are zero-based: element `j` of the set is bit `j` of the mask.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    n: usize,
    words: Vec<u64>,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(WORD).max(1)
}

impl SubsetMask {
    pub fn empty(n: usize) -> Self {
        SubsetMask {
            n,
            words: vec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut m = Self::empty(n);
        for j in 0..n {
            m.words[j / WORD] |= 1 << (j % WORD);
        }
        m
    }

    /// Builds a mask from the low `n` bits of `bits` (requires `n <= 64`).
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        if n > WORD {
            return Err(Error::TooLarge { n, max: WORD });
        }
        if n < WORD && bits >> n != 0 {
            return Err(Error::InvalidMask(format!("{bits:#x} has bits above n = {n}")));
        }
        let mut m = Self::empty(n);
        m.words[0] = bits;
        Ok(m)
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(n: usize, elems: I) -> Result<Self> {
        let mut m = Self::empty(n);
        for j in elems {
            if j >= n {
                return Err(Error::CoordinateOutOfRange { index: j, n });
            }
            m.words[j / WORD] |= 1 << (j % WORD);
        }
        Ok(m)
    }

    /// Parses `0x`-prefixed (or bare) hexadecimal.
    pub fn parse_hex(n: usize, s: &str) -> Result<Self> {
        let bad = || Error::InvalidMask(s.to_string());
        let digits = s
            .trim()
            .strip_prefix("0x")
            .or_else(|| s.trim().strip_prefix("0X"))
            .unwrap_or(s.trim());
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let mut m = Self::empty(n);
        let bytes = digits.as_bytes();
        for (k, chunk) in bytes.rchunks(WORD / 4).enumerate() {
            let text = std::str::from_utf8(chunk).map_err(|_| bad())?;
            let w = u64::from_str_radix(text, 16).map_err(|_| bad())?;
            if w == 0 {
                continue;
            }
            if k >= m.words.len() {
                return Err(bad());
            }
            m.words[k] = w;
        }
        if m.has_bits_above_n() {
            return Err(Error::InvalidMask(format!("{s} has bits above n = {n}")));
        }
        Ok(m)
    }

    fn has_bits_above_n(&self) -> bool {
        self.words.iter().enumerate().any(|(k, &w)| {
            let lo = k * WORD;
            if lo >= self.n {
                w != 0
            } else if self.n - lo >= WORD {
                false
            } else {
                w >> (self.n - lo) != 0
            }
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        j < self.n && self.words[j / WORD] >> (j % WORD) & 1 == 1
    }

    pub fn size(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `self ∪ {j}`.
    pub fn with(&self, j: usize) -> Self {
        debug_assert!(j < self.n);
        let mut m = self.clone();
        m.words[j / WORD] |= 1 << (j % WORD);
        m
    }

    /// `self \ {j}`.
    pub fn without(&self, j: usize) -> Self {
        debug_assert!(j < self.n);
        let mut m = self.clone();
        m.words[j / WORD] &= !(1 << (j % WORD));
        m
    }

    pub fn complement(&self) -> Self {
        let full = Self::full(self.n);
        SubsetMask {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&full.words)
                .map(|(a, f)| !a & f)
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & b == *a)
    }

    pub fn is_strict_subset(&self, other: &Self) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn comparable(&self, other: &Self) -> bool {
        self.is_subset(other) || other.is_subset(self)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(k * WORD + b)
                }
            })
        })
    }

    /// The mask as a `u64`, if `n <= 64`.
    pub fn as_u64(&self) -> Option<u64> {
        (self.n <= WORD).then(|| self.words[0])
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        if self.n == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.n,
            })
        }
    }
}

impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.words.len().max(other.words.len());
        let word = |m: &Self, k: usize| m.words.get(k).copied().unwrap_or(0);
        (0..len)
            .rev()
            .map(|k| word(self, k).cmp(&word(other, k)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then(self.n.cmp(&other.n))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::LowerHex for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top = self.words.iter().rposition(|&w| w != 0).unwrap_or(0);
        if f.alternate() {
            f.write_str("0x")?;
        }
        write!(f, "{:x}", self.words[top])?;
        for k in (0..top).rev() {
            write!(f, "{:016x}", self.words[k])?;
        }
        Ok(())
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:#x}")
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}/{}", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn size_and_membership() {
        let m = SubsetMask::from_elements(5, [0, 2, 4]).unwrap();
        assert_eq!(m.size(), 3);
        assert!(m.contains(2) && !m.contains(1));
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![0, 2, 4]);
        assert_eq!(m.to_string(), "0x15");
        assert_eq!(m.complement().to_string(), "0xa");
    }

    #[test]
    fn rejects_out_of_range_bits() {
        assert!(SubsetMask::from_bits(3, 0b1000).is_err());
        assert!(SubsetMask::parse_hex(3, "0x8").is_err());
        assert!(SubsetMask::parse_hex(3, "zz").is_err());
        assert!(SubsetMask::from_elements(3, [3]).is_err());
    }

    #[test]
    fn wide_masks_print_and_order() {
        let a = SubsetMask::from_elements(130, [0, 129]).unwrap();
        assert_eq!(
            a.to_string(),
            "0x200000000000000000000000000000001"
        );
        let b = SubsetMask::from_elements(130, [128]).unwrap();
        assert!(b < a);
        assert_eq!(SubsetMask::full(130).size(), 130);
        assert_eq!(SubsetMask::empty(0).to_string(), "0x0");
    }

    #[test]
    fn strict_inclusion() {
        let a = SubsetMask::from_elements(3, [0]).unwrap();
        let b = SubsetMask::from_elements(3, [0, 1]).unwrap();
        assert!(a.is_strict_subset(&b));
        assert!(!a.is_strict_subset(&a));
        assert!(a.comparable(&b));
    }

    proptest! {
        #[test]
        fn hex_round_trip(n in 1usize..200, seed in any::<u64>()) {
            let elems: Vec<usize> = (0..n).filter(|j| (seed.rotate_left(*j as u32 % 64) ^ (*j as u64 * 0x9e37)) & 1 == 1).collect();
            let m = SubsetMask::from_elements(n, elems.clone()).unwrap();
            let back = SubsetMask::parse_hex(n, &m.to_string()).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.iter().collect::<Vec<_>>(), elems);
        }
    }
}
