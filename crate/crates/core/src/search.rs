//! Asymmetric-distance search over encoded points and recall evaluation.
//!
//! For a query `q` and a point coded as `b`,
//! `1/2 ||q - sum_c d^c_{b_c}||^2 = 1/2 ||q||^2 - sum_c <q, d^c_{b_c}> + 1/2 ||sum_c d^c_{b_c}||^2`.
//! The first term is the same for every point and is dropped, the second
//! comes from a per-query `C x K` table, and the third is precomputed once
//! per point from the codes alone.

use rayon::prelude::*;

use crate::assign::build_inner_table;
use crate::data::{dot, CodeMatrix, DataMatrix};
use crate::error::{Error, Result};
use crate::model::Model;

/// `||sum_c d^c_{b_c}||^2` for every coded point, from pairwise codeword
/// inner products only.
pub fn precompute_norms(model: &Model, codes: &CodeMatrix) -> Result<Vec<f64>> {
    check_codes(model, codes)?;
    let t = build_inner_table(&model.codebooks);
    let c_n = model.num_dicts();
    Ok((0..codes.rows())
        .into_par_iter()
        .map(|i| {
            let row = codes.row(i);
            let mut norm = 0.0;
            for c1 in 0..c_n {
                norm += 2.0 * t.half_norm(c1, row[c1]);
                for c2 in 0..c_n {
                    if c1 != c2 {
                        norm += t.get(c1, c2, row[c1], row[c2]);
                    }
                }
            }
            norm.max(0.0)
        })
        .collect())
}

fn check_codes(model: &Model, codes: &CodeMatrix) -> Result<()> {
    if codes.num_dicts() != model.num_dicts() || codes.num_words() != model.num_words() {
        return Err(Error::contract(format!(
            "codes are for C={} K={}, model has C={} K={}",
            codes.num_dicts(),
            codes.num_words(),
            model.num_dicts(),
            model.num_words()
        )));
    }
    Ok(())
}

/// Per-query inner products `<q, d^c_k>`.
#[derive(Debug, Clone)]
pub struct AdcTables {
    num_words: usize,
    inner: Vec<f64>,
}

impl AdcTables {
    pub fn new(query: &[f32], model: &Model) -> Result<Self> {
        if query.len() != model.dims() {
            return Err(Error::DimensionMismatch {
                expected: model.dims(),
                found: query.len(),
            });
        }
        let (c_n, k_n) = (model.num_dicts(), model.num_words());
        let mut inner = Vec::with_capacity(c_n * k_n);
        for c in 0..c_n {
            for k in 0..k_n {
                inner.push(dot(query, model.codebooks.word(c, k)));
            }
        }
        Ok(Self {
            num_words: k_n,
            inner,
        })
    }

    #[inline]
    pub fn get(&self, c: usize, k: usize) -> f64 {
        self.inner[c * self.num_words + k]
    }
}

/// `-sum_c <q, d^c_{b_c}> + 1/2 norm`; equals
/// `1/2 ||q - reconstruction||^2 - 1/2 ||q||^2`.
#[inline]
pub fn adc_score(tables: &AdcTables, codes_row: &[usize], norm: f64) -> f64 {
    let ip: f64 = codes_row
        .iter()
        .enumerate()
        .map(|(c, &k)| tables.get(c, k))
        .sum();
    0.5 * norm - ip
}

/// Ids of the `r` smallest scores, ascending; ties go to the smaller id.
pub fn topk(
    query: &[f32],
    model: &Model,
    codes: &CodeMatrix,
    norms: &[f64],
    r: usize,
) -> Result<Vec<usize>> {
    check_codes(model, codes)?;
    let n = codes.rows();
    if norms.len() != n {
        return Err(Error::contract(format!(
            "{} norms for {n} coded points",
            norms.len()
        )));
    }
    if r > n {
        return Err(Error::Capacity(format!(
            "R={r} exceeds the {n} stored points"
        )));
    }
    let tables = AdcTables::new(query, model)?;
    let mut row = vec![0usize; model.num_dicts()];
    let mut scored: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            codes.read_row(i, &mut row);
            (adc_score(&tables, &row, norms[i]), i)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if r == 0 {
        return Ok(Vec::new());
    }
    if r < n {
        scored.select_nth_unstable_by(r - 1, cmp);
        scored.truncate(r);
    }
    scored.sort_unstable_by(cmp);
    Ok(scored.into_iter().map(|(_, i)| i).collect())
}

/// [`topk`] for every row of `queries`, in parallel.
pub fn search_batch(
    queries: &DataMatrix,
    model: &Model,
    codes: &CodeMatrix,
    norms: &[f64],
    r: usize,
) -> Result<Vec<Vec<usize>>> {
    (0..queries.rows())
        .into_par_iter()
        .map(|q| topk(queries.row(q), model, codes, norms, r))
        .collect()
}

/// Fraction of queries whose true nearest neighbour is among the first `r`
/// entries of its ranking.
pub fn recall_at(rankings: &[Vec<usize>], ground_truth: &[usize], r: usize) -> Result<f64> {
    if rankings.len() != ground_truth.len() {
        return Err(Error::contract(format!(
            "{} rankings for {} ground-truth entries",
            rankings.len(),
            ground_truth.len()
        )));
    }
    if rankings.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hits = rankings
        .iter()
        .zip(ground_truth)
        .filter(|(ranking, gt)| ranking.iter().take(r).any(|id| id == *gt))
        .count();
    Ok(hits as f64 / rankings.len() as f64)
}

/// Brute-force Euclidean nearest neighbour of each query; ties go to the
/// smaller id.
pub fn exact_nn(queries: &DataMatrix, database: &DataMatrix) -> Result<Vec<usize>> {
    if queries.dims() != database.dims() {
        return Err(Error::DimensionMismatch {
            expected: database.dims(),
            found: queries.dims(),
        });
    }
    Ok((0..queries.rows())
        .into_par_iter()
        .map(|q| {
            let x = queries.row(q);
            let mut best = (f64::INFINITY, 0);
            for (i, y) in database.iter_rows().enumerate() {
                let d = crate::lloyd::sq_dist(x, y);
                if d < best.0 {
                    best = (d, i);
                }
            }
            best.1
        })
        .collect())
}
