//! The dictionary update: with codes fixed, the objective is quadratic in the
//! codewords and all of them are solved jointly from `W = D Z`.
//!
//! `W` is `P x KC` with column `(c, k)` the sum of the points whose code on
//! dictionary `c` is `k`; `Z` is the `KC x KC` co-occurrence matrix, whose
//! entry `((c1, k1), (c2, k2))` counts the points coded `k1` on `c1` and `k2`
//! on `c2`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::data::{CodeMatrix, CodebookSet, DataMatrix};
use crate::distortion::point_error;
use crate::error::{Error, Result};
use crate::linalg::{solve_spd_ridge_detailed, SymMatrix};

/// Row access for the accumulation kernels.
pub(crate) trait Rows: Sync {
    fn rows(&self) -> usize;
    fn dims(&self) -> usize;
    /// Adds `row(i)[range]` into `acc`.
    fn add_into(&self, i: usize, start: usize, acc: &mut [f64]);
}

impl Rows for DataMatrix {
    fn rows(&self) -> usize {
        DataMatrix::rows(self)
    }

    fn dims(&self) -> usize {
        DataMatrix::dims(self)
    }

    #[inline]
    fn add_into(&self, i: usize, start: usize, acc: &mut [f64]) {
        let row = &self.row(i)[start..start + acc.len()];
        for (a, &x) in acc.iter_mut().zip(row) {
            *a += x as f64;
        }
    }
}

/// Row-major `f64` points, used for rotated data.
#[derive(Debug, Clone)]
pub(crate) struct DenseRows {
    pub rows: usize,
    pub dims: usize,
    pub values: Vec<f64>,
}

impl DenseRows {
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }
}

impl Rows for DenseRows {
    fn rows(&self) -> usize {
        self.rows
    }

    fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    fn add_into(&self, i: usize, start: usize, acc: &mut [f64]) {
        let row = &self.row(i)[start..start + acc.len()];
        for (a, &x) in acc.iter_mut().zip(row) {
            *a += x;
        }
    }
}

#[derive(Debug, Clone)]
pub struct UpdateSystem {
    num_dicts: usize,
    num_words: usize,
    dims: usize,
    /// `P x KC`
    pub w: DMatrix<f64>,
    /// `KC x KC`
    pub z: SymMatrix,
    /// Occupancy of each codeword, indexed `c * K + k`.
    pub counts: Vec<f64>,
}

impl UpdateSystem {
    pub fn num_dicts(&self) -> usize {
        self.num_dicts
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    pub fn dims(&self) -> usize {
        self.dims
    }
}

/// Columns per accumulation task when splitting `W` over dimensions.
const DIM_BLOCK: usize = 32;

/// Per-codeword sums, laid out `(c * K + k) * P + p`.
///
/// Work is split over `(dictionary, dimension block)` and every task scans
/// the points in order, so the sums do not depend on the thread count.
pub(crate) fn codeword_sums<R: Rows>(data: &R, codes: &CodeMatrix) -> Vec<f64> {
    let (c_n, k_n, p) = (codes.num_dicts(), codes.num_words(), data.dims());
    let blocks = p.div_ceil(DIM_BLOCK);
    let parts: Vec<(usize, usize, Vec<f64>)> = (0..c_n * blocks)
        .into_par_iter()
        .map(|task| {
            let (c, b) = (task / blocks, task % blocks);
            let start = b * DIM_BLOCK;
            let width = DIM_BLOCK.min(p - start);
            let mut acc = vec![0.0f64; k_n * width];
            for i in 0..data.rows() {
                let k = codes.get(i, c);
                data.add_into(i, start, &mut acc[k * width..(k + 1) * width]);
            }
            (c, start, acc)
        })
        .collect();
    let mut sums = vec![0.0f64; c_n * k_n * p];
    for (c, start, acc) in parts {
        let width = acc.len() / k_n;
        for k in 0..k_n {
            let dst = (c * k_n + k) * p + start;
            sums[dst..dst + width].copy_from_slice(&acc[k * width..(k + 1) * width]);
        }
    }
    sums
}

/// Co-occurrence counts `Z`, row-major `KC x KC`. Integer-valued, so the
/// accumulation order does not matter.
pub(crate) fn co_occurrence(codes: &CodeMatrix) -> Vec<f64> {
    let (c_n, k_n) = (codes.num_dicts(), codes.num_words());
    let m = c_n * k_n;
    let mut z = vec![0.0f64; m * m];
    z.par_chunks_mut(k_n * m)
        .enumerate()
        .for_each(|(c1, block)| {
            let mut counts = vec![0u64; k_n * m];
            for i in 0..codes.rows() {
                let k1 = codes.get(i, c1);
                let row = &mut counts[k1 * m..(k1 + 1) * m];
                for c2 in 0..c_n {
                    row[c2 * k_n + codes.get(i, c2)] += 1;
                }
            }
            for (dst, &n) in block.iter_mut().zip(&counts) {
                *dst = n as f64;
            }
        });
    z
}

pub(crate) fn accumulate<R: Rows>(data: &R, codes: &CodeMatrix) -> Result<UpdateSystem> {
    if data.rows() != codes.rows() {
        return Err(Error::contract(format!(
            "{} code rows for {} data rows",
            codes.rows(),
            data.rows()
        )));
    }
    let (c_n, k_n, p) = (codes.num_dicts(), codes.num_words(), data.dims());
    let m = c_n * k_n;
    let sums = codeword_sums(data, codes);
    let w = DMatrix::from_fn(p, m, |r, col| sums[col * p + r]);
    let z = co_occurrence(codes);
    let counts = (0..m).map(|i| z[i * m + i]).collect();
    let z = SymMatrix::new(DMatrix::from_row_slice(m, m, &z))?;
    Ok(UpdateSystem {
        num_dicts: c_n,
        num_words: k_n,
        dims: p,
        w,
        z,
        counts,
    })
}

/// Builds `W` and `Z` from the current codes.
pub fn accumulate_wz(data: &DataMatrix, codes: &CodeMatrix) -> Result<UpdateSystem> {
    accumulate(data, codes)
}

/// Solved codewords in `f64`, laid out `(c, k, p)`, plus the ridge applied.
#[derive(Debug, Clone)]
pub struct SolvedWords {
    pub words: Vec<f64>,
    pub occupied: Vec<bool>,
    pub ridge: f64,
}

/// Solves `W = D (Z + lambda' I)` over the occupied codewords, with
/// `lambda' = lambda * mean(diag Z)`. Unoccupied codewords decouple from the
/// system and are left at zero with `occupied = false`.
pub fn solve_words(system: &UpdateSystem, lambda: f64) -> Result<SolvedWords> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::contract(format!("ridge must be >= 0, got {lambda}")));
    }
    let m = system.counts.len();
    let p = system.dims;
    let occupied_ids: Vec<usize> = (0..m).filter(|&i| system.counts[i] > 0.0).collect();
    let mut words = vec![0.0f64; m * p];
    let mut occupied = vec![false; m];
    if occupied_ids.is_empty() {
        return Ok(SolvedWords {
            words,
            occupied,
            ridge: 0.0,
        });
    }
    // Each dictionary's indicator columns sum to the all-ones vector, so Z
    // has C - 1 null directions. Without a ridge, one codeword per extra
    // dictionary is held at zero; reconstructions are unaffected.
    let pinned: Vec<usize> = if lambda == 0.0 {
        (1..system.num_dicts)
            .filter_map(|c| {
                let k_n = system.num_words;
                occupied_ids.iter().copied().find(|&id| id / k_n == c)
            })
            .collect()
    } else {
        Vec::new()
    };
    for &id in &pinned {
        occupied[id] = true;
    }
    let occupied_ids: Vec<usize> = occupied_ids
        .into_iter()
        .filter(|id| !pinned.contains(id))
        .collect();
    let r = occupied_ids.len();
    let z = system.z.matrix();
    let z_red = DMatrix::from_fn(r, r, |a, b| z[(occupied_ids[a], occupied_ids[b])]);
    let w_red = DMatrix::from_fn(p, r, |row, b| system.w[(row, occupied_ids[b])]);
    let z_red = SymMatrix::new(z_red)?;
    let ridge = lambda * z_red.mean_diagonal();
    let sol = solve_spd_ridge_detailed(&z_red, &w_red, ridge)?;
    for (b, &id) in occupied_ids.iter().enumerate() {
        occupied[id] = true;
        for row in 0..p {
            words[id * p + row] = sol.x[(row, b)];
        }
    }
    Ok(SolvedWords {
        words,
        occupied,
        ridge: sol.ridge,
    })
}

/// Solves the update system. Codewords nobody uses keep their value from
/// `prev` (zero when `prev` is `None`).
pub fn solve_dictionaries(
    system: &UpdateSystem,
    lambda: f64,
    prev: Option<&CodebookSet>,
) -> Result<CodebookSet> {
    solve_dictionaries_detailed(system, lambda, prev).map(|(cb, _)| cb)
}

/// [`solve_dictionaries`] that also returns the absolute ridge finally
/// applied, after any escalation.
pub fn solve_dictionaries_detailed(
    system: &UpdateSystem,
    lambda: f64,
    prev: Option<&CodebookSet>,
) -> Result<(CodebookSet, f64)> {
    let (c_n, k_n, p) = (system.num_dicts, system.num_words, system.dims);
    if let Some(prev) = prev {
        if (prev.num_dicts(), prev.num_words(), prev.dims()) != (c_n, k_n, p) {
            return Err(Error::contract(
                "previous codebooks do not match the update system",
            ));
        }
    }
    let solved = solve_words(system, lambda)?;
    let mut out = CodebookSet::from_f64(c_n, k_n, p, &solved.words)?;
    if let Some(prev) = prev {
        for (id, &occ) in solved.occupied.iter().enumerate() {
            if !occ {
                let (c, k) = (id / k_n, id % k_n);
                out.word_mut(c, k).copy_from_slice(prev.word(c, k));
            }
        }
    }
    Ok((out, solved.ridge))
}

/// One update step: accumulate, solve, and carry over unused codewords.
pub fn update_step(
    data: &DataMatrix,
    codes: &CodeMatrix,
    prev_codebooks: &CodebookSet,
    lambda: f64,
) -> Result<CodebookSet> {
    update_step_detailed(data, codes, prev_codebooks, lambda).map(|(cb, _)| cb)
}

/// [`update_step`] that also returns the absolute ridge applied.
pub fn update_step_detailed(
    data: &DataMatrix,
    codes: &CodeMatrix,
    prev_codebooks: &CodebookSet,
    lambda: f64,
) -> Result<(CodebookSet, f64)> {
    if data.dims() != prev_codebooks.dims() {
        return Err(Error::DimensionMismatch {
            expected: prev_codebooks.dims(),
            found: data.dims(),
        });
    }
    if codes.num_dicts() != prev_codebooks.num_dicts()
        || codes.num_words() != prev_codebooks.num_words()
    {
        return Err(Error::contract("codes do not match the codebook shape"));
    }
    let system = accumulate_wz(data, codes)?;
    solve_dictionaries_detailed(&system, lambda, Some(prev_codebooks))
}

/// Moves every unused codeword onto the residual of a badly reconstructed
/// point, worst points first. Unused codewords do not enter the objective,
/// so this never changes the current distortion.
pub fn reseed_unused(data: &DataMatrix, codes: &CodeMatrix, codebooks: &mut CodebookSet) -> usize {
    let (c_n, k_n) = (codebooks.num_dicts(), codebooks.num_words());
    let mut used = vec![false; c_n * k_n];
    for i in 0..codes.rows() {
        for c in 0..c_n {
            used[c * k_n + codes.get(i, c)] = true;
        }
    }
    if used.iter().all(|&u| u) {
        return 0;
    }
    let mut worst: Vec<(f64, usize)> = (0..data.rows())
        .into_par_iter()
        .map(|i| (point_error(data.row(i), codebooks, &codes.row(i)), i))
        .collect();
    worst.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let snapshot = codebooks.clone();
    let mut reseeded = 0;
    for c in 0..c_n {
        let mut candidates = worst.iter();
        for k in 0..k_n {
            if used[c * k_n + k] {
                continue;
            }
            let Some(&(_, i)) = candidates.next() else {
                break;
            };
            let row = codes.row(i);
            let recon = crate::distortion::reconstruct_f64(&snapshot, &row);
            let own = snapshot.word(c, row[c]);
            let target = codebooks.word_mut(c, k);
            for (j, t) in target.iter_mut().enumerate() {
                // residual after removing every dictionary except c
                *t = (data.row(i)[j] as f64 - recon[j] + own[j] as f64) as f32;
            }
            reseeded += 1;
        }
    }
    reseeded
}
