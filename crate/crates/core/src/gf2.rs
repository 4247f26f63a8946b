//! Packed bit vectors and the small amount of GF(2) linear algebra the Pauli
//! layer needs: incremental elimination with combination tracking and
//! nullspace bases.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
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

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        let mut out = BitVec::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }
}

impl Ord for BitVec {
    /// Lexicographic by bit index 0 first, with a set bit ordering before a
    /// clear one, so echelon rows with earlier pivots sort first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().zip(&other.words) {
                if a != b {
                    let low = (a ^ b).trailing_zeros();
                    return if (a >> low) & 1 == 1 { Ordering::Less } else { Ordering::Greater };
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Outcome of offering a vector to an [`Echelon`] basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insert {
    /// Vector was independent; it is recorded under this input index.
    Added(usize),
    /// Vector lies in the span; the bit vector selects which previously
    /// added inputs sum to it.
    Dependent(BitVec),
}

/// Incremental GF(2) row echelon form that remembers, for every reduced row,
/// which of the originally inserted vectors it is a combination of.
#[derive(Debug, Clone)]
pub struct Echelon {
    width: usize,
    capacity: usize,
    rows: Vec<(usize, BitVec, BitVec)>,
    inserted: usize,
}

impl Echelon {
    pub fn new(width: usize, capacity: usize) -> Self {
        Echelon { width, capacity, rows: Vec::new(), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; returns the residual and the
    /// combination of inserted vectors that was subtracted.
    pub fn reduce(&self, v: &BitVec) -> (BitVec, BitVec) {
        let mut r = v.clone();
        let mut comb = BitVec::zeros(self.capacity);
        for (pivot, row, c) in &self.rows {
            if r.get(*pivot) {
                r.xor_assign(row);
                comb.xor_assign(c);
            }
        }
        (r, comb)
    }

    /// `(pivot column, combination of inserted inputs)` for each reduced row.
    pub fn pivot_rows(&self) -> impl Iterator<Item = (usize, &BitVec)> {
        self.rows.iter().map(|(p, _, c)| (*p, c))
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Offers a vector. Independent vectors consume an input slot; dependent
    /// ones do not.
    pub fn insert(&mut self, v: &BitVec) -> Insert {
        debug_assert_eq!(v.len(), self.width);
        let (r, mut comb) = self.reduce(v);
        match r.first_one() {
            None => Insert::Dependent(comb),
            Some(pivot) => {
                assert!(self.inserted < self.capacity, "echelon capacity exceeded");
                let idx = self.inserted;
                self.inserted += 1;
                comb.flip(idx);
                // keep earlier rows free of the new pivot so reduce stays single-pass
                for (_, row, c) in self.rows.iter_mut() {
                    if row.get(pivot) {
                        row.xor_assign(&r);
                        c.xor_assign(&comb);
                    }
                }
                self.rows.push((pivot, r, comb));
                Insert::Added(idx)
            }
        }
    }
}

/// Basis of `{v : row · v = 0 for every row}` in GF(2)^width.
pub fn nullspace(rows: &[BitVec], width: usize) -> Vec<BitVec> {
    // full reduced row echelon form
    let mut m: Vec<BitVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..m.len()).find(|&i| m[i].get(col)) else { continue };
        m.swap(r, p);
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let mut is_pivot = vec![false; width];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..width)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = BitVec::zeros(width);
            v.set(free, true);
            for (i, &p) in pivots.iter().enumerate() {
                if m[i].get(free) {
                    v.set(p, true);
                }
            }
            v
        })
        .collect()
}

pub fn rank(rows: &[BitVec]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let mut e = Echelon::new(first.len(), rows.len());
    rows.iter().filter(|r| matches!(e.insert(r), Insert::Added(_))).count()
}
