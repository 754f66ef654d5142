//! Bit-packed GF(2) matrices and the elimination kernel shared by rank,
//! membership and entropy queries.

/// Number of 64-bit words needed to hold `bits` bits.
#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], i: usize) {
    words[i >> 6] |= 1 << (i & 63);
}

#[inline]
pub(crate) fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// Index of the lowest set bit, if any.
#[inline]
pub fn first_set(words: &[u64]) -> Option<usize> {
    words.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| (i << 6) + w.trailing_zeros() as usize)
}

/// Dense row-major GF(2) matrix with rows packed into `u64` words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        Self { cols, stride: words_for(cols), data: Vec::new() }
    }

    pub fn with_capacity(cols: usize, rows: usize) -> Self {
        let stride = words_for(cols);
        Self { cols, stride, data: Vec::with_capacity(rows * stride) }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self { cols, stride, data: vec![0; rows * stride] }
    }

    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.stride).unwrap_or(0)
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Append a row given as packed words. Bits at or beyond `cols` must be clear.
    pub fn push_row(&mut self, words: &[u64]) {
        assert_eq!(words.len(), self.stride, "row width mismatch");
        self.data.extend_from_slice(words);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        get_bit(self.row(r), c)
    }

    pub fn set(&mut self, r: usize, c: usize) {
        set_bit(self.row_mut(r), c)
    }

    /// In-place forward elimination. Afterwards the first `rank` rows are in
    /// row-echelon form (strictly increasing pivot columns, zeros left of each
    /// pivot) and the remaining rows are zero. Returns the pivot columns.
    pub fn echelonize(&mut self) -> Vec<usize> {
        let rows = self.rows();
        let stride = self.stride;
        let mut pivots = Vec::new();
        let mut next = 0;
        for word in 0..stride {
            let mut bit = 0;
            while bit < 64 && next < rows {
                let col = (word << 6) + bit;
                if col >= self.cols {
                    break;
                }
                let mask = 1u64 << bit;
                let found = (next..rows).find(|&r| self.data[r * stride + word] & mask != 0);
                if let Some(p) = found {
                    if p != next {
                        for w in 0..stride {
                            self.data.swap(p * stride + w, next * stride + w);
                        }
                    }
                    let (head, tail) = self.data.split_at_mut((next + 1) * stride);
                    let pivot_row = &head[next * stride..];
                    for r in 0..rows - next - 1 {
                        let row = &mut tail[r * stride..(r + 1) * stride];
                        if row[word] & mask != 0 {
                            // columns left of `word` are already clear in both rows
                            xor_into(&mut row[word..], &pivot_row[word..]);
                        }
                    }
                    pivots.push(col);
                    next += 1;
                }
                bit += 1;
            }
        }
        pivots
    }

    /// GF(2) rank; consumes a copy of the matrix.
    pub fn rank(&self) -> usize {
        self.clone().echelonize().len()
    }
}

/// Row-echelon basis of a row space, supporting membership queries in
/// `O(rank · words)`.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    matrix: BitMatrix,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn from_matrix(mut matrix: BitMatrix) -> Self {
        let pivots = matrix.echelonize();
        let stride = matrix.stride;
        matrix.data.truncate(pivots.len() * stride);
        Self { matrix, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols
    }

    /// Reduce `v` against the basis in place; `v` is in the span iff it ends zero.
    pub fn reduce(&self, v: &mut [u64]) {
        for (r, &p) in self.pivots.iter().enumerate() {
            if get_bit(v, p) {
                xor_into(v, self.matrix.row(r));
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut scratch = v.to_vec();
        self.reduce(&mut scratch);
        scratch.iter().all(|&w| w == 0)
    }
}

/// Rank of a list of packed rows of equal width `cols`.
pub fn rank_of_rows<'a, I>(cols: usize, rows: I) -> usize
where
    I: IntoIterator<Item = &'a [u64]>,
{
    let mut m = BitMatrix::new(cols);
    for r in rows {
        m.push_row(r);
    }
    m.echelonize().len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_bits(rows: &[&str]) -> BitMatrix {
        let cols = rows[0].len();
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, s) in rows.iter().enumerate() {
            for (c, ch) in s.chars().enumerate() {
                if ch == '1' {
                    m.set(r, c);
                }
            }
        }
        m
    }

    #[test]
    fn rank_small() {
        assert_eq!(from_bits(&["110", "011", "101"]).rank(), 2);
        assert_eq!(from_bits(&["100", "010", "001"]).rank(), 3);
        assert_eq!(from_bits(&["000", "000"]).rank(), 0);
        assert_eq!(BitMatrix::new(10).rank(), 0);
    }

    #[test]
    fn rank_spans_word_boundary() {
        let mut m = BitMatrix::zeros(3, 130);
        m.set(0, 63);
        m.set(0, 64);
        m.set(1, 64);
        m.set(1, 129);
        m.set(2, 63);
        m.set(2, 129);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn echelon_membership() {
        let basis = EchelonBasis::from_matrix(from_bits(&["1100", "0110"]));
        let mut v = vec![0u64];
        set_bit(&mut v, 0);
        set_bit(&mut v, 2);
        assert!(basis.contains(&v));
        set_bit(&mut v, 3);
        assert!(!basis.contains(&v));
        assert!(basis.contains(&[0]));
    }

    #[test]
    fn first_set_bit() {
        assert_eq!(first_set(&[0, 0]), None);
        assert_eq!(first_set(&[0, 8]), Some(67));
    }
}
