//! Fixed-length bit vectors and subset-mask helpers.

use std::fmt;

/// Bit vector of fixed length, word-packed, bit 0 in the lowest bit of word 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.count_ones() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn union_with(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len);
        BitVec {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint_from(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Packs the first 128 bits into a u128 (bit i of the vector at bit i).
    pub fn to_u128(&self) -> u128 {
        assert!(self.len <= 128);
        let lo = self.words.first().copied().unwrap_or(0) as u128;
        let hi = self.words.get(1).copied().unwrap_or(0) as u128;
        lo | (hi << 64)
    }

    pub fn from_u128(len: usize, v: u128) -> Self {
        assert!(len <= 128);
        let mut out = Self::zeros(len);
        if !out.words.is_empty() {
            out.words[0] = v as u64;
        }
        if out.words.len() > 1 {
            out.words[1] = (v >> 64) as u64;
        }
        let tail = len % 64;
        if tail != 0 {
            let last = out.words.len() - 1;
            out.words[last] &= (1u64 << tail) - 1;
        }
        out
    }

    /// Canonical-order comparison: at the first differing bit index, the
    /// vector containing the bit is the smaller one. Equal-length only.
    pub fn cmp_canonical(&self, other: &BitVec) -> std::cmp::Ordering {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let bit = diff.trailing_zeros();
                return if (a >> bit) & 1 == 1 {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                };
            }
        }
        std::cmp::Ordering::Equal
    }

    /// ASCII order of the '0'/'1' text form (bit 0 printed first).
    pub fn cmp_text(&self, other: &BitVec) -> std::cmp::Ordering {
        self.cmp_canonical(other).reverse()
    }

    /// Text form: one character per bit, bit 0 first.
    pub fn to_bitstring(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        let mut v = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => v.set(i, true),
                '0' => {}
                _ => return None,
            }
        }
        Some(v)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bitstring())
    }
}

/// Iterates the submasks of `mask` in increasing integer order, including 0
/// and `mask` itself.
pub fn submasks_ascending(mask: u32) -> impl Iterator<Item = u32> {
    let mut cur = Some(0u32);
    std::iter::from_fn(move || {
        let s = cur?;
        cur = if s == mask {
            None
        } else {
            Some((s.wrapping_sub(mask)) & mask)
        };
        Some(s)
    })
}

/// Rank of submask `k` among the submasks of `mask` in increasing order
/// (bit compression of `k` onto the positions of `mask`).
pub fn submask_rank(k: u32, mask: u32) -> u32 {
    debug_assert_eq!(k & !mask, 0);
    let mut rank = 0;
    let mut out_bit = 0;
    let mut m = mask;
    while m != 0 {
        let p = m.trailing_zeros();
        if (k >> p) & 1 == 1 {
            rank |= 1 << out_bit;
        }
        out_bit += 1;
        m &= m - 1;
    }
    rank
}

/// Inverse of [`submask_rank`]: spreads the low bits of `rank` onto `mask`.
pub fn submask_unrank(rank: u32, mask: u32) -> u32 {
    let mut k = 0;
    let mut in_bit = 0;
    let mut m = mask;
    while m != 0 {
        let p = m.trailing_zeros();
        if (rank >> in_bit) & 1 == 1 {
            k |= 1 << p;
        }
        in_bit += 1;
        m &= m - 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn submask_order_and_rank() {
        let mask = 0b11010u32;
        let subs: Vec<u32> = submasks_ascending(mask).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        for (r, &s) in subs.iter().enumerate() {
            assert_eq!(submask_rank(s, mask), r as u32);
            assert_eq!(submask_unrank(r as u32, mask), s);
        }
    }

    #[test]
    fn canonical_order_prefers_earlier_set_bits() {
        let a = BitVec::from_bitstring("100000").unwrap();
        let b = BitVec::from_bitstring("001000").unwrap();
        assert_eq!(a.cmp_canonical(&b), std::cmp::Ordering::Less);
        assert_eq!(a.cmp_text(&b), std::cmp::Ordering::Greater);
    }

    #[test]
    fn u128_roundtrip() {
        let v = BitVec::from_bitstring("10110010011").unwrap();
        let w = BitVec::from_u128(11, v.to_u128());
        assert_eq!(v, w);
    }

    #[test]
    fn iter_ones_matches_get() {
        let v = BitVec::from_bitstring("0101100101").unwrap();
        let ones: Vec<usize> = v.iter_ones().collect();
        assert_eq!(ones, vec![1, 3, 4, 7, 9]);
        assert_eq!(v.count_ones(), 5);
    }
}
