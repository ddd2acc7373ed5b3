//! Plain K-means (Lloyd's algorithm).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{CodeMatrix, CodebookSet, DataMatrix};
use crate::error::{Error, Result};
use crate::par::chunked_sum;
use crate::update::codeword_sums;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// `K x P` centers, stored as a single-dictionary codebook.
    pub centers: CodebookSet,
    pub assignments: Vec<usize>,
    /// Total squared error after the initial assignment and after every iteration.
    pub history: Vec<f64>,
    /// Snapshot of the centers used for each assignment in `history`.
    pub center_trace: Vec<CodebookSet>,
}

/// Index of the nearest center by squared Euclidean distance; ties go to
/// the smallest index.
pub fn nearest_center(x: &[f32], centers: &CodebookSet) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for k in 0..centers.num_words() {
        let d = sq_dist(x, centers.word(0, k));
        if d < best_dist {
            best_dist = d;
            best = k;
        }
    }
    best
}

/// Nearest-center assignment for every row.
pub fn kmeans_assign(data: &DataMatrix, centers: &CodebookSet) -> Result<Vec<usize>> {
    if data.dims() != centers.dims() {
        return Err(Error::DimensionMismatch {
            expected: centers.dims(),
            found: data.dims(),
        });
    }
    Ok((0..data.rows())
        .into_par_iter()
        .map(|i| nearest_center(data.row(i), centers))
        .collect())
}

/// Samples `k` distinct row indices without replacement.
pub(crate) fn sample_rows(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, k).into_vec()
}

/// Runs Lloyd's algorithm from `K` distinct data rows chosen with `seed`.
///
/// Stops after `iters` update/assignment rounds or once the assignments no
/// longer change. An empty cluster is moved onto the point with the largest
/// current error.
pub fn kmeans_fit(data: &DataMatrix, k: usize, iters: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::contract("K must be >= 1"));
    }
    if data.rows() < k {
        return Err(Error::InsufficientData {
            needed: k,
            available: data.rows(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = sample_rows(&mut rng, data.rows(), k);
    let init = data.select_rows(&ids)?;
    let centers = CodebookSet::new(1, k, data.dims(), init.as_slice().to_vec())?;
    kmeans_fit_from(data, centers, iters)
}

/// Lloyd iterations from caller-supplied centers.
pub fn kmeans_fit_from(
    data: &DataMatrix,
    mut centers: CodebookSet,
    iters: usize,
) -> Result<KMeansResult> {
    let mut assignments = kmeans_assign(data, &centers)?;
    let mut history = vec![distortion(data, &centers, &assignments)];
    let mut center_trace = vec![centers.clone()];
    for _ in 0..iters {
        centers = update_centers(data, &centers, &assignments)?;
        let next = kmeans_assign(data, &centers)?;
        history.push(distortion(data, &centers, &next));
        center_trace.push(centers.clone());
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
    }
    Ok(KMeansResult {
        centers,
        assignments,
        history,
        center_trace,
    })
}

/// Per-cluster sums and counts. Shares the accumulation kernel of the
/// dictionary update so both produce bitwise identical means.
pub(crate) fn cluster_sums(
    data: &DataMatrix,
    assignments: &[usize],
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let codes = CodeMatrix::from_indices(assignments.len(), 1, k, assignments)?;
    let sums = codeword_sums(data, &codes);
    let mut counts = vec![0.0f64; k];
    for &a in assignments {
        counts[a] += 1.0;
    }
    Ok((sums, counts))
}

fn update_centers(
    data: &DataMatrix,
    centers: &CodebookSet,
    assignments: &[usize],
) -> Result<CodebookSet> {
    let k = centers.num_words();
    let p = data.dims();
    let (sums, counts) = cluster_sums(data, assignments, k)?;
    let mut next = centers.clone();
    let mut empty = Vec::new();
    for c in 0..k {
        if counts[c] == 0.0 {
            empty.push(c);
            continue;
        }
        for (dst, s) in next
            .word_mut(0, c)
            .iter_mut()
            .zip(&sums[c * p..(c + 1) * p])
        {
            *dst = (s / counts[c]) as f32;
        }
    }
    if !empty.is_empty() {
        let mut errors: Vec<(f64, usize)> = (0..data.rows())
            .map(|i| (sq_dist(data.row(i), centers.word(0, assignments[i])), i))
            .collect();
        errors.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (slot, &(_, i)) in empty.iter().zip(&errors) {
            next.word_mut(0, *slot).copy_from_slice(data.row(i));
        }
    }
    Ok(next)
}

fn distortion(data: &DataMatrix, centers: &CodebookSet, assignments: &[usize]) -> f64 {
    chunked_sum(data.rows(), |i| {
        sq_dist(data.row(i), centers.word(0, assignments[i]))
    })
}

#[inline]
pub(crate) fn sq_dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}
