//! Dense containers shared by every stage of the pipeline.
//!
//! All three types are row-major and immutable once handed to the
//! training or search routines; they can be shared across worker threads
//! without synchronization.

use crate::error::{Error, Result};

/// `N x P` matrix of points, one row per point, stored as `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    dims: usize,
    values: Vec<f32>,
}

impl DataMatrix {
    pub fn new(rows: usize, dims: usize, values: Vec<f32>) -> Result<Self> {
        if rows == 0 || dims == 0 {
            return Err(Error::contract(format!(
                "data matrix must be non-empty, got {rows}x{dims}"
            )));
        }
        if values.len() != rows * dims {
            return Err(Error::contract(format!(
                "data matrix {rows}x{dims} needs {} values, got {}",
                rows * dims,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite value at row {}, column {}",
                pos / dims,
                pos % dims
            )));
        }
        Ok(Self { rows, dims, values })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dims = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dims);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dims {
                return Err(Error::contract(format!(
                    "row {i} has {} values, expected {dims}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), dims, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.values.chunks_exact(self.dims)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.values
    }

    /// Copies the selected rows into a new matrix.
    pub fn select_rows(&self, ids: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(ids.len() * self.dims);
        for &i in ids {
            if i >= self.rows {
                return Err(Error::contract(format!(
                    "row {i} out of range for {} rows",
                    self.rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(ids.len(), self.dims, values)
    }

    /// Sum of squared norms of all rows, accumulated in `f64`.
    pub fn energy(&self) -> f64 {
        crate::par::chunked_sum(self.rows, |i| sq_norm(self.row(i)))
    }
}

/// `C` dictionaries of `K` codewords in `P` dimensions, laid out `(c, k, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSet {
    num_dicts: usize,
    num_words: usize,
    dims: usize,
    words: Vec<f32>,
}

impl CodebookSet {
    pub fn new(num_dicts: usize, num_words: usize, dims: usize, words: Vec<f32>) -> Result<Self> {
        if num_dicts == 0 || num_words == 0 || dims == 0 {
            return Err(Error::contract(format!(
                "codebooks need C, K, P >= 1, got C={num_dicts} K={num_words} P={dims}"
            )));
        }
        if words.len() != num_dicts * num_words * dims {
            return Err(Error::contract(format!(
                "codebooks C={num_dicts} K={num_words} P={dims} need {} values, got {}",
                num_dicts * num_words * dims,
                words.len()
            )));
        }
        if words.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("non-finite codeword entry"));
        }
        Ok(Self {
            num_dicts,
            num_words,
            dims,
            words,
        })
    }

    pub fn zeros(num_dicts: usize, num_words: usize, dims: usize) -> Result<Self> {
        Self::new(
            num_dicts,
            num_words,
            dims,
            vec![0.0; num_dicts * num_words * dims],
        )
    }

    /// Builds codebooks from `f64` values, rounding each entry to `f32`.
    pub fn from_f64(
        num_dicts: usize,
        num_words: usize,
        dims: usize,
        words: &[f64],
    ) -> Result<Self> {
        Self::new(
            num_dicts,
            num_words,
            dims,
            words.iter().map(|&v| v as f32).collect(),
        )
    }

    pub fn num_dicts(&self) -> usize {
        self.num_dicts
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn word(&self, c: usize, k: usize) -> &[f32] {
        let start = (c * self.num_words + k) * self.dims;
        &self.words[start..start + self.dims]
    }

    #[inline]
    pub fn word_mut(&mut self, c: usize, k: usize) -> &mut [f32] {
        let start = (c * self.num_words + k) * self.dims;
        &mut self.words[start..start + self.dims]
    }

    /// All `K` codewords of dictionary `c`, `K x P` row-major.
    pub fn dict(&self, c: usize) -> &[f32] {
        let len = self.num_words * self.dims;
        &self.words[c * len..(c + 1) * len]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.words
    }

    /// Returns a copy with every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: f32) -> Self {
        Self {
            words: self.words.iter().map(|v| v * alpha).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CodeStorage {
    Byte(Vec<u8>),
    Wide(Vec<u16>),
}

/// `N x C` matrix of codeword indices.
///
/// Entries use one byte when `K <= 256` and two bytes otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    rows: usize,
    num_dicts: usize,
    num_words: usize,
    codes: CodeStorage,
}

impl CodeMatrix {
    /// Largest supported dictionary size.
    pub const MAX_WORDS: usize = 1 << 16;

    pub fn zeros(rows: usize, num_dicts: usize, num_words: usize) -> Result<Self> {
        if num_dicts == 0 || num_words == 0 {
            return Err(Error::contract("code matrix needs C >= 1 and K >= 1"));
        }
        if num_words > Self::MAX_WORDS {
            return Err(Error::Capacity(format!(
                "K={num_words} exceeds the 16-bit code limit"
            )));
        }
        let len = rows * num_dicts;
        let codes = if num_words <= 256 {
            CodeStorage::Byte(vec![0; len])
        } else {
            CodeStorage::Wide(vec![0; len])
        };
        Ok(Self {
            rows,
            num_dicts,
            num_words,
            codes,
        })
    }

    /// Builds a code matrix from row-major indices, validating the range.
    pub fn from_indices(
        rows: usize,
        num_dicts: usize,
        num_words: usize,
        indices: &[usize],
    ) -> Result<Self> {
        if indices.len() != rows * num_dicts {
            return Err(Error::contract(format!(
                "code matrix {rows}x{num_dicts} needs {} entries, got {}",
                rows * num_dicts,
                indices.len()
            )));
        }
        let mut out = Self::zeros(rows, num_dicts, num_words)?;
        for (pos, &k) in indices.iter().enumerate() {
            if k >= num_words {
                return Err(Error::contract(format!(
                    "code {k} at row {}, dictionary {} is out of range for K={num_words}",
                    pos / num_dicts,
                    pos % num_dicts
                )));
            }
            out.store(pos, k);
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_dicts(&self) -> usize {
        self.num_dicts
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    /// Bytes per stored entry: 1 when `K <= 256`, else 2.
    pub fn entry_width(&self) -> usize {
        match self.codes {
            CodeStorage::Byte(_) => 1,
            CodeStorage::Wide(_) => 2,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, c: usize) -> usize {
        let pos = i * self.num_dicts + c;
        match &self.codes {
            CodeStorage::Byte(v) => v[pos] as usize,
            CodeStorage::Wide(v) => v[pos] as usize,
        }
    }

    /// Sets one entry. Panics if `k >= K`.
    #[inline]
    pub fn set(&mut self, i: usize, c: usize, k: usize) {
        assert!(
            k < self.num_words,
            "code {k} out of range for K={}",
            self.num_words
        );
        self.store(i * self.num_dicts + c, k);
    }

    #[inline]
    fn store(&mut self, pos: usize, k: usize) {
        match &mut self.codes {
            CodeStorage::Byte(v) => v[pos] = k as u8,
            CodeStorage::Wide(v) => v[pos] = k as u16,
        }
    }

    /// Copies row `i` into `out` (length `C`).
    #[inline]
    pub fn read_row(&self, i: usize, out: &mut [usize]) {
        for (c, slot) in out.iter_mut().enumerate().take(self.num_dicts) {
            *slot = self.get(i, c);
        }
    }

    pub fn row(&self, i: usize) -> Vec<usize> {
        let mut out = vec![0; self.num_dicts];
        self.read_row(i, &mut out);
        out
    }

    pub fn write_row(&mut self, i: usize, row: &[usize]) {
        for (c, &k) in row.iter().enumerate() {
            self.set(i, c, k);
        }
    }

    /// Builds a matrix from per-point rows, all of length `C`.
    pub fn from_rows(num_dicts: usize, num_words: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let flat: Vec<usize> = rows.iter().flatten().copied().collect();
        Self::from_indices(rows.len(), num_dicts, num_words, &flat)
    }

    /// Raw little-endian entry bytes, row-major.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        match &self.codes {
            CodeStorage::Byte(v) => v.clone(),
            CodeStorage::Wide(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    /// Number of entries that differ between two matrices of equal shape.
    pub fn count_changes(&self, other: &CodeMatrix) -> usize {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.num_dicts, other.num_dicts);
        (0..self.rows)
            .flat_map(|i| (0..self.num_dicts).map(move |c| (i, c)))
            .filter(|&(i, c)| self.get(i, c) != other.get(i, c))
            .count()
    }
}

#[inline]
pub(crate) fn sq_norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| (x as f64) * (x as f64)).sum()
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}
