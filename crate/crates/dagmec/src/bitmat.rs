//! Row-major bit matrix used for adjacency storage.
//!
//! Every graph algorithm in this crate that scans neighborhoods does so on
//! 64-bit words, so parent-pair and subset tests cost `O(n / 64)` per row
//! rather than `O(n)`.

/// Dense `n x n` bit matrix. Row `i` is a contiguous slice of `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words_per_row = n.div_ceil(64).max(1);
        BitMatrix {
            n,
            words_per_row,
            bits: vec![0; words_per_row * n.max(1)],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize) {
        debug_assert!(row < self.n && col < self.n);
        self.bits[row * self.words_per_row + col / 64] |= 1u64 << (col % 64);
    }

    #[inline]
    pub fn clear(&mut self, row: usize, col: usize) {
        debug_assert!(row < self.n && col < self.n);
        self.bits[row * self.words_per_row + col / 64] &= !(1u64 << (col % 64));
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.n && col < self.n);
        self.bits[row * self.words_per_row + col / 64] & (1u64 << (col % 64)) != 0
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u64] {
        let s = row * self.words_per_row;
        &self.bits[s..s + self.words_per_row]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [u64] {
        let s = row * self.words_per_row;
        &mut self.bits[s..s + self.words_per_row]
    }

    pub fn row_count_ones(&self, row: usize) -> usize {
        self.row(row).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bitwise OR of `other`'s row into this row.
    pub fn or_row_from(&mut self, row: usize, other: &[u64]) {
        for (dst, src) in self.row_mut(row).iter_mut().zip(other) {
            *dst |= *src;
        }
    }

    /// Iterate set column indices of a row in increasing order.
    pub fn iter_row(&self, row: usize) -> RowIter<'_> {
        RowIter {
            words: self.row(row),
            word_idx: 0,
            current: self.row(row).first().copied().unwrap_or(0),
        }
    }

    pub fn any_in_row(&self, row: usize) -> bool {
        self.row(row).iter().any(|&w| w != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = f.debug_struct("BitMatrix");
        s.field("n", &self.n);
        let rows: Vec<Vec<usize>> = (0..self.n).map(|r| self.iter_row(r).collect()).collect();
        s.field("rows", &rows);
        s.finish()
    }
}

pub struct RowIter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for RowIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.word_idx * 64 + bit)
    }
}

/// `a \ remove ⊆ b`? Word-parallel subset test.
#[inline]
pub fn subset_minus(a: &[u64], remove: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(remove)
        .zip(b)
        .all(|((&wa, &wr), &wb)| wa & !wr & !wb == 0)
}

/// Any common bit between two rows?
#[inline]
pub fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(&wa, &wb)| wa & wb != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_iter() {
        let mut m = BitMatrix::new(130);
        m.set(3, 0);
        m.set(3, 64);
        m.set(3, 129);
        assert!(m.get(3, 64));
        assert!(!m.get(3, 63));
        assert_eq!(m.iter_row(3).collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(m.row_count_ones(3), 3);
        m.clear(3, 64);
        assert_eq!(m.iter_row(3).collect::<Vec<_>>(), vec![0, 129]);
    }

    #[test]
    fn subset_test() {
        let mut a = BitMatrix::new(70);
        let mut b = BitMatrix::new(70);
        let mut r = BitMatrix::new(70);
        for c in [1, 5, 69] {
            a.set(0, c);
        }
        b.set(0, 1);
        b.set(0, 69);
        r.set(0, 5);
        assert!(subset_minus(a.row(0), r.row(0), b.row(0)));
        r.clear(0, 5);
        assert!(!subset_minus(a.row(0), r.row(0), b.row(0)));
    }
}
