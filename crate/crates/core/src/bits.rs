//! Bit-packed binary vectors and matrices plus the numeric kernels every
//! other module consumes: Hamming distance, column averages, and the
//! lukewarm-column count.
//!
//! The packing layout (little-endian u64 words) is an internal detail and is
//! never serialized raw; external formats go through the runner's text
//! outputs.

use crate::error::{Error, Result};
use crate::rng::TrialRng;

/// A fixed-length vector of bits, packed 64 per word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0u64; len.div_ceil(64)],
        }
    }

    /// Build from 0/1 entries.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            debug_assert!(b <= 1);
            if b != 0 {
                v.set(j, true);
            }
        }
        v
    }

    /// Uniform random vector of `len` bits.
    pub fn random(len: usize, rng: &mut TrialRng) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for w in words.iter_mut() {
            *w = rng.next_u64();
        }
        let mut v = BitVector { len, words };
        v.mask_tail();
        v
    }

    /// Vector whose bit j is an independent Bernoulli(p[j]) draw.
    pub fn bernoulli(p: &[f64], rng: &mut TrialRng) -> Self {
        let mut v = BitVector::zeros(p.len());
        for (j, &pj) in p.iter().enumerate() {
            if rng.bernoulli(pj) {
                v.set(j, true);
            }
        }
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        debug_assert!(j < self.len);
        if value {
            self.words[j / 64] |= 1 << (j % 64);
        } else {
            self.words[j / 64] &= !(1 << (j % 64));
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Hamming distance: number of differing coordinates.
    pub fn hamming(&self, other: &BitVector) -> Result<u32> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: other.len,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum())
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    /// Dot product with a real vector: sum of y[j] over set bits.
    pub fn dot(&self, y: &RealVector) -> Result<f64> {
        if self.len != y.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: y.len(),
            });
        }
        let mut acc = 0.0;
        for j in 0..self.len {
            if self.get(j) {
                acc += y.values()[j];
            }
        }
        Ok(acc)
    }

    /// Pack the low `len` bits into a u64 (requires `len <= 64`). Used by the
    /// tiny-scale enumeration oracles.
    pub fn to_u64(&self) -> u64 {
        debug_assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_u64(bits: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        let mut v = BitVector {
            len,
            words: vec![bits],
        };
        if len == 0 {
            v.words.clear();
        }
        v.mask_tail();
        v
    }
}

/// An n×d binary dataset: rows are individuals, columns are attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    /// Empty matrix with a declared column count (degenerate tests only).
    pub fn empty(cols: usize) -> Self {
        BitMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(rows: Vec<BitVector>, cols: usize) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Ok(BitMatrix { cols, rows })
    }

    /// Convenience constructor from literal 0/1 rows.
    pub fn from_bit_rows(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| BitVector::from_bits(r)).collect();
        BitMatrix::from_rows(rows, cols).expect("literal rows share a length")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn column_weight(&self, j: usize) -> usize {
        self.rows.iter().filter(|r| r.get(j)).count()
    }

    pub fn contains_row(&self, z: &BitVector) -> bool {
        self.rows.iter().any(|r| r == z)
    }

    /// Coordinate-wise column means. Errors on an empty matrix.
    pub fn average(&self) -> Result<RealVector> {
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = self.rows.len() as f64;
        let mut acc = vec![0.0f64; self.cols];
        for r in &self.rows {
            for (j, a) in acc.iter_mut().enumerate() {
                if r.get(j) {
                    *a += 1.0;
                }
            }
        }
        for a in acc.iter_mut() {
            *a /= n;
        }
        RealVector::new(acc)
    }

    /// Number of columns whose Hamming weight w satisfies n/4 <= w <= 3n/4,
    /// bounds inclusive. The fractional bounds are compared exactly as
    /// rationals (4w vs n and 4w vs 3n), never through floats.
    pub fn lukewarm_count(&self) -> Result<usize> {
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = self.rows.len();
        let mut count = 0;
        for j in 0..self.cols {
            let w = self.column_weight(j);
            if 4 * w >= n && 4 * w <= 3 * n {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Rows sorted by content; canonical form for law comparisons in tests
    /// and oracles.
    pub fn sorted_rows(&self) -> Vec<BitVector> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }
}

/// A finite real vector (averages, noisy releases).
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    values: Vec<f64>,
}

impl RealVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite real vector entry".into()));
        }
        Ok(RealVector { values })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
