//! Packed GF(2) vectors and the small amount of linear algebra the rest of
//! the crate needs: rank, span membership, and basis extraction.
//!
//! A [`BitVector`] is the common encoding for Pauli-X/Z supports, error
//! patterns, bond-sign assignments and loop configurations. Bit `i` lives in
//! word `i / 64` at position `i % 64`; bits past `len` are always zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; len.div_ceil(WORD)],
        };
        v.clear_tail();
        v
    }

    /// Builds a vector with the given positions set. Repeated indices toggle.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Result<Self> {
        let mut v = Self::zeros(len);
        for i in indices {
            if i >= len {
                return Err(Error::Index { index: i, len });
            }
            v.flip(i);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Number of set bits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_len(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            Err(Error::Shape {
                expected: self.len,
                found: other.len,
            })
        } else {
            Ok(())
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    /// Size of the intersection of the two supports.
    pub fn overlap(&self, other: &BitVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    /// Positions of the set bits, ascending.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    fn leading_index(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(wi, w)| wi * WORD + w.trailing_zeros() as usize)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// Bit 0 is printed first.
impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected character {other:?} in bit string"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitVector::from_bools(&bits))
    }
}

fn common_len(rows: &[BitVector]) -> Result<Option<usize>> {
    let Some(first) = rows.first() else {
        return Ok(None);
    };
    for r in rows {
        if r.len() != first.len() {
            return Err(Error::Shape {
                expected: first.len(),
                found: r.len(),
            });
        }
    }
    Ok(Some(first.len()))
}

/// Rank over GF(2).
pub fn gf2_rank(rows: &[BitVector]) -> Result<usize> {
    Ok(row_basis(rows)?.len())
}

/// A basis of the row span, in echelon form with distinct leading bits.
pub fn row_basis(rows: &[BitVector]) -> Result<Vec<BitVector>> {
    common_len(rows)?;
    let mut basis: Vec<(usize, BitVector)> = Vec::new();
    for row in rows {
        let mut r = row.clone();
        for (lead, b) in &basis {
            if r.get(*lead) {
                r.xor_assign(b)?;
            }
        }
        if let Some(lead) = r.leading_index() {
            // keep the basis fully reduced on its pivot columns
            for (_, b) in basis.iter_mut() {
                if b.get(lead) {
                    b.xor_assign(&r)?;
                }
            }
            basis.push((lead, r));
        }
    }
    Ok(basis.into_iter().map(|(_, b)| b).collect())
}

/// Finds `c` with `XOR_{i : c_i = 1} rows[i] == target`, or `None` when the
/// target lies outside the span. The zero target always yields the zero
/// coefficient vector.
pub fn gf2_solve_membership(target: &BitVector, rows: &[BitVector]) -> Result<Option<BitVector>> {
    if let Some(n) = common_len(rows)? {
        if n != target.len() {
            return Err(Error::Shape {
                expected: n,
                found: target.len(),
            });
        }
    }
    // Each pivot row carries the combination of input rows that produced it.
    let mut pivots: Vec<(usize, BitVector, BitVector)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        let mut combo = BitVector::zeros(rows.len());
        combo.set(i, true);
        for (lead, b, bc) in &pivots {
            if r.get(*lead) {
                r.xor_assign(b)?;
                combo.xor_assign(bc)?;
            }
        }
        if let Some(lead) = r.leading_index() {
            pivots.push((lead, r, combo));
        }
    }
    let mut residual = target.clone();
    let mut coeffs = BitVector::zeros(rows.len());
    for (lead, b, bc) in &pivots {
        if residual.get(*lead) {
            residual.xor_assign(b)?;
            coeffs.xor_assign(bc)?;
        }
    }
    Ok(residual.is_zero().then_some(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn rank_of_duplicates_and_empty() {
        assert_eq!(gf2_rank(&[bv("0110"), bv("0110")]).unwrap(), 1);
        assert_eq!(gf2_rank(&[]).unwrap(), 0);
        assert_eq!(gf2_rank(&[bv("1100"), bv("0110"), bv("1010")]).unwrap(), 2);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = gf2_rank(&[bv("011"), bv("0110")]).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
        let err = gf2_solve_membership(&bv("01"), &[bv("011")]).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn membership_of_zero_and_generator() {
        let rows = vec![bv("1100"), bv("0110")];
        let c = gf2_solve_membership(&bv("0000"), &rows).unwrap().unwrap();
        assert!(c.is_zero());
        let c = gf2_solve_membership(&bv("0110"), &rows).unwrap().unwrap();
        assert_eq!(c, bv("01"));
        assert!(gf2_solve_membership(&bv("0001"), &rows).unwrap().is_none());
    }

    #[test]
    fn bitvector_ops_across_word_boundary() {
        let a = BitVector::from_indices(130, [0, 63, 64, 129]).unwrap();
        let b = BitVector::from_indices(130, [63, 129]).unwrap();
        assert_eq!(a.weight(), 4);
        assert_eq!(a.overlap(&b).unwrap(), 2);
        assert_eq!(a.xor(&b).unwrap().ones_iter().collect::<Vec<_>>(), vec![0, 64]);
        assert_eq!(BitVector::ones(130).weight(), 130);
        assert!(BitVector::from_indices(3, [3]).is_err());
    }

    fn arb_rows() -> impl Strategy<Value = Vec<BitVector>> {
        (1usize..80).prop_flat_map(|len| {
            prop::collection::vec(prop::collection::vec(any::<bool>(), len), 0..12)
                .prop_map(|rows| rows.iter().map(|r| BitVector::from_bools(r)).collect())
        })
    }

    proptest! {
        #[test]
        fn rank_invariant_under_permutation(rows in arb_rows(), seed in any::<u64>()) {
            let mut shuffled = rows.clone();
            let n = shuffled.len();
            if n > 1 {
                let mut s = seed;
                for i in (1..n).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (s >> 33) as usize % (i + 1));
                }
            }
            prop_assert_eq!(gf2_rank(&rows).unwrap(), gf2_rank(&shuffled).unwrap());
        }

        #[test]
        fn membership_coefficients_reproduce_target(rows in arb_rows(), pick in any::<u64>()) {
            prop_assume!(!rows.is_empty());
            let len = rows[0].len();
            let mut target = BitVector::zeros(len);
            for (i, r) in rows.iter().enumerate() {
                if (pick >> (i % 64)) & 1 == 1 {
                    target.xor_assign(r).unwrap();
                }
            }
            let c = gf2_solve_membership(&target, &rows).unwrap().expect("in span");
            let mut rebuilt = BitVector::zeros(len);
            for i in c.ones_iter() {
                rebuilt.xor_assign(&rows[i]).unwrap();
            }
            prop_assert_eq!(rebuilt, target);
        }

        #[test]
        fn xor_preserves_length_and_bounds_weight(a in prop::collection::vec(any::<bool>(), 0..200)) {
            let x = BitVector::from_bools(&a);
            let y = BitVector::ones(a.len());
            let z = x.xor(&y).unwrap();
            prop_assert_eq!(z.len(), a.len());
            prop_assert_eq!(z.weight() + x.weight(), a.len());
        }
    }
}
