//! The assignment step: choose codes for fixed dictionaries.
//!
//! Every score here is `1/2 ||x - sum_c d^c_{k_c}||^2 - 1/2 ||x||^2` expanded
//! into two lookup tables:
//!
//! * the shared [`InnerTable`] `T[c1][c2][k1][k2] = <d^c1_k1, d^c2_k2>`, with
//!   `1/2 ||d^c_k||^2` on the diagonal of each same-dictionary block and zero
//!   elsewhere in that block;
//! * the per-point [`PointTable`] `S[c][k] = -<x, d^c_k>`.
//!
//! Once `S` is built a point can be re-scored with additions only, so the
//! cost of repeated sweeps does not grow with `P`.

use rayon::prelude::*;

use crate::config::AssignOrder;
use crate::data::{dot, sq_norm, CodeMatrix, CodebookSet, DataMatrix};
use crate::error::{Error, Result};

/// Largest `K^C` accepted by [`exhaustive_assign`].
pub const EXHAUSTIVE_LIMIT: usize = 1_000_000;

/// Point-independent codeword inner products, `C x C x K x K`.
#[derive(Debug, Clone)]
pub struct InnerTable {
    num_dicts: usize,
    num_words: usize,
    values: Vec<f64>,
    /// Copy of the diagonals, `half_norms[c * K + k] = 1/2 ||d^c_k||^2`.
    half_norms: Vec<f64>,
}

impl InnerTable {
    #[inline]
    fn index(&self, c1: usize, c2: usize, k1: usize, k2: usize) -> usize {
        ((c1 * self.num_dicts + c2) * self.num_words + k1) * self.num_words + k2
    }

    #[inline]
    pub fn get(&self, c1: usize, c2: usize, k1: usize, k2: usize) -> f64 {
        self.values[self.index(c1, c2, k1, k2)]
    }

    /// `1/2 ||d^c_k||^2`
    #[inline]
    pub fn half_norm(&self, c: usize, k: usize) -> f64 {
        self.half_norms[c * self.num_words + k]
    }

    #[inline]
    fn half_norms_of(&self, c: usize) -> &[f64] {
        &self.half_norms[c * self.num_words..(c + 1) * self.num_words]
    }

    /// `T[c1][c2][k1][..]`, contiguous over `k2`.
    #[inline]
    fn row(&self, c1: usize, c2: usize, k1: usize) -> &[f64] {
        let start = self.index(c1, c2, k1, 0);
        &self.values[start..start + self.num_words]
    }

    /// The `K x K` block `T[c1][c2]`.
    #[inline]
    fn block(&self, c1: usize, c2: usize) -> &[f64] {
        let start = self.index(c1, c2, 0, 0);
        &self.values[start..start + self.num_words * self.num_words]
    }

    pub fn num_dicts(&self) -> usize {
        self.num_dicts
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }
}

pub fn build_inner_table(codebooks: &CodebookSet) -> InnerTable {
    let (c_n, k_n) = (codebooks.num_dicts(), codebooks.num_words());
    let mut table = InnerTable {
        num_dicts: c_n,
        num_words: k_n,
        values: vec![0.0; c_n * c_n * k_n * k_n],
        half_norms: vec![0.0; c_n * k_n],
    };
    let block_len = k_n * k_n;
    // Upper blocks in parallel, then mirror so symmetry holds exactly.
    let blocks: Vec<(usize, usize, Vec<f64>)> = (0..c_n)
        .flat_map(|c1| (c1..c_n).map(move |c2| (c1, c2)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c1, c2)| {
            let mut block = vec![0.0f64; block_len];
            for k1 in 0..k_n {
                let a = codebooks.word(c1, k1);
                if c1 == c2 {
                    block[k1 * k_n + k1] = 0.5 * sq_norm(a);
                } else {
                    for k2 in 0..k_n {
                        block[k1 * k_n + k2] = dot(a, codebooks.word(c2, k2));
                    }
                }
            }
            (c1, c2, block)
        })
        .collect();
    for (c1, c2, block) in blocks {
        if c1 == c2 {
            for k in 0..k_n {
                table.half_norms[c1 * k_n + k] = block[k * k_n + k];
            }
        }
        for k1 in 0..k_n {
            for k2 in 0..k_n {
                let v = block[k1 * k_n + k2];
                let i = table.index(c1, c2, k1, k2);
                table.values[i] = v;
                let j = table.index(c2, c1, k2, k1);
                table.values[j] = v;
            }
        }
    }
    table
}

/// `S[c][k] = -<x, d^c_k>` for one point.
#[derive(Debug, Clone)]
pub struct PointTable {
    num_words: usize,
    values: Vec<f64>,
}

impl PointTable {
    #[inline]
    pub fn get(&self, c: usize, k: usize) -> f64 {
        self.values[c * self.num_words + k]
    }

    #[inline]
    fn dict(&self, c: usize) -> &[f64] {
        &self.values[c * self.num_words..(c + 1) * self.num_words]
    }
}

/// Builds `S` for `x`. `x` must have the codebooks' dimension.
pub fn build_point_table(x: &[f32], codebooks: &CodebookSet) -> PointTable {
    let mut table = PointTable {
        num_words: codebooks.num_words(),
        values: Vec::with_capacity(codebooks.num_dicts() * codebooks.num_words()),
    };
    fill_point_table(x, codebooks, &mut table);
    table
}

/// Rebuilds `table` for `x`, reusing its storage.
fn fill_point_table(x: &[f32], codebooks: &CodebookSet, table: &mut PointTable) {
    debug_assert_eq!(x.len(), codebooks.dims());
    table.num_words = codebooks.num_words();
    table.values.clear();
    for c in 0..codebooks.num_dicts() {
        for k in 0..codebooks.num_words() {
            table.values.push(-dot(x, codebooks.word(c, k)));
        }
    }
}

/// Per-worker buffers reused across points.
struct Workspace {
    s: PointTable,
    scratch: Vec<f64>,
    prefix: Vec<usize>,
}

impl Workspace {
    fn new(codebooks: &CodebookSet) -> Self {
        let (c_n, k_n) = (codebooks.num_dicts(), codebooks.num_words());
        Self {
            s: PointTable {
                num_words: k_n,
                values: Vec::with_capacity(c_n * k_n),
            },
            scratch: vec![0.0; 2 * c_n * k_n + k_n],
            prefix: vec![0; c_n],
        }
    }
}

/// Score of placing codeword `k` on dictionary `c1` with the other codes fixed.
///
/// Differs from `1/2 ||y - d^c1_k||^2` (with `y` the residual of the other
/// dictionaries) by a constant that does not depend on `k`.
pub fn group_cost_o1(
    s: &PointTable,
    t: &InnerTable,
    codes_row: &[usize],
    c1: usize,
    k: usize,
) -> f64 {
    let mut score = s.get(c1, k) + t.half_norm(c1, k);
    for (c, &kc) in codes_row.iter().enumerate() {
        if c != c1 {
            score += t.get(c1, c, k, kc);
        }
    }
    score
}

/// Joint score of codewords `(k1, k2)` on dictionaries `(c1, c2)`, `c1 != c2`.
#[allow(clippy::too_many_arguments)]
pub fn group_cost_o2(
    s: &PointTable,
    t: &InnerTable,
    codes_row: &[usize],
    c1: usize,
    c2: usize,
    k1: usize,
    k2: usize,
) -> f64 {
    let mut score = s.get(c1, k1) + t.half_norm(c1, k1) + s.get(c2, k2) + t.half_norm(c2, k2);
    for (c, &kc) in codes_row.iter().enumerate() {
        if c != c1 && c != c2 {
            score += t.get(c1, c, k1, kc) + t.get(c2, c, k2, kc);
        }
    }
    score + t.get(c1, c2, k1, k2)
}

/// O1 scores of all `K` candidates for dictionary `c1`, written into `out`.
fn o1_scores(s: &PointTable, t: &InnerTable, codes_row: &[usize], c1: usize, out: &mut [f64]) {
    out.copy_from_slice(s.dict(c1));
    for (k, o) in out.iter_mut().enumerate() {
        *o += t.half_norm(c1, k);
    }
    for (c, &kc) in codes_row.iter().enumerate() {
        if c == c1 {
            continue;
        }
        // T[c1][c][k][kc] == T[c][c1][kc][k], which is contiguous in k.
        for (o, &v) in out.iter_mut().zip(t.row(c, c1, kc)) {
            *o += v;
        }
    }
}

#[inline]
fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in scores.iter().enumerate().skip(1) {
        if v < scores[best] {
            best = k;
        }
    }
    best
}

/// One Order-1 pass over `c1 = 0..C`. Returns whether any code changed.
pub fn o1_sweep(s: &PointTable, t: &InnerTable, codes_row: &mut [usize]) -> bool {
    let mut scores = vec![0.0f64; t.num_words];
    let mut changed = false;
    for c1 in 0..codes_row.len() {
        o1_scores(s, t, codes_row, c1, &mut scores);
        let best = argmin(&scores);
        if best != codes_row[c1] {
            codes_row[c1] = best;
            changed = true;
        }
    }
    changed
}

/// Consecutive dictionary pairs `(c, c + 1 mod C)`; a single pair for `C = 2`.
pub fn o2_pairs(num_dicts: usize) -> Vec<(usize, usize)> {
    match num_dicts {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        n => (0..n).map(|c| (c, (c + 1) % n)).collect(),
    }
}

/// Re-optimizes the pair `(c1, c2)` jointly over all `K^2` combinations.
/// Ties go to the lexicographically smallest `(k1, k2)`.
fn o2_pair_update(
    s: &PointTable,
    t: &InnerTable,
    codes_row: &mut [usize],
    c1: usize,
    c2: usize,
    u: &mut [f64],
    v: &mut [f64],
) -> bool {
    let k_n = t.num_words;
    for k in 0..k_n {
        u[k] = s.get(c1, k) + t.half_norm(c1, k);
        v[k] = s.get(c2, k) + t.half_norm(c2, k);
    }
    for (c, &kc) in codes_row.iter().enumerate() {
        if c == c1 || c == c2 {
            continue;
        }
        for (o, &w) in u.iter_mut().zip(t.row(c, c1, kc)) {
            *o += w;
        }
        for (o, &w) in v.iter_mut().zip(t.row(c, c2, kc)) {
            *o += w;
        }
    }
    let block = t.block(c1, c2);
    let mut best = (codes_row[c1], codes_row[c2]);
    let mut best_score = f64::INFINITY;
    for k1 in 0..k_n {
        let row = &block[k1 * k_n..(k1 + 1) * k_n];
        let base = u[k1];
        for (k2, (&vk, &tk)) in v.iter().zip(row).enumerate() {
            let score = base + vk + tk;
            if score < best_score {
                best_score = score;
                best = (k1, k2);
            }
        }
    }
    let changed = best != (codes_row[c1], codes_row[c2]);
    codes_row[c1] = best.0;
    codes_row[c2] = best.1;
    changed
}

/// One Order-2 pass over the consecutive pairs. Falls back to
/// [`o1_sweep`] when `C = 1`.
pub fn o2_sweep(s: &PointTable, t: &InnerTable, codes_row: &mut [usize]) -> bool {
    if codes_row.len() < 2 {
        return o1_sweep(s, t, codes_row);
    }
    let mut u = vec![0.0f64; t.num_words];
    let mut v = vec![0.0f64; t.num_words];
    let mut changed = false;
    for (c1, c2) in o2_pairs(codes_row.len()) {
        changed |= o2_pair_update(s, t, codes_row, c1, c2, &mut u, &mut v);
    }
    changed
}

/// Refines one point's codes, starting from `prev_codes_row`, until a
/// sweep changes nothing or `max_sweeps` sweeps have run.
///
/// With [`AssignOrder::Exhaustive`] the previous codes are ignored and the
/// global optimum is returned.
pub fn assign_point(
    x: &[f32],
    codebooks: &CodebookSet,
    t: &InnerTable,
    prev_codes_row: &[usize],
    order: AssignOrder,
    max_sweeps: usize,
) -> Result<Vec<usize>> {
    let mut row = prev_codes_row.to_vec();
    assign_point_into(x, codebooks, t, &mut row, order, max_sweeps)?;
    Ok(row)
}

/// In-place variant of [`assign_point`]; returns the number of sweeps run.
pub fn assign_point_into(
    x: &[f32],
    codebooks: &CodebookSet,
    t: &InnerTable,
    row: &mut [usize],
    order: AssignOrder,
    max_sweeps: usize,
) -> Result<usize> {
    crate::distortion::check_code_row(codebooks, row)?;
    if x.len() != codebooks.dims() {
        return Err(Error::DimensionMismatch {
            expected: codebooks.dims(),
            found: x.len(),
        });
    }
    if order == AssignOrder::Exhaustive {
        check_exhaustive_capacity(codebooks)?;
    }
    let mut ws = Workspace::new(codebooks);
    Ok(assign_point_ws(
        x, codebooks, t, row, order, max_sweeps, &mut ws,
    ))
}

/// [`assign_point_into`] without argument checks.
fn assign_point_ws(
    x: &[f32],
    codebooks: &CodebookSet,
    t: &InnerTable,
    row: &mut [usize],
    order: AssignOrder,
    max_sweeps: usize,
    ws: &mut Workspace,
) -> usize {
    if order == AssignOrder::Exhaustive {
        fill_point_table(x, codebooks, &mut ws.s);
        exhaustive_search(&ws.s, t, &mut ws.scratch, &mut ws.prefix, row);
        return 1;
    }
    if max_sweeps == 0 {
        return 0;
    }
    fill_point_table(x, codebooks, &mut ws.s);
    let s = &ws.s;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let changed = match order {
            AssignOrder::One => o1_sweep(s, t, row),
            _ => o2_sweep(s, t, row),
        };
        if !changed {
            break;
        }
    }
    sweeps
}

/// Applies [`assign_point`] to every row of `data`.
pub fn assign_all(
    data: &DataMatrix,
    codebooks: &CodebookSet,
    prev_codes: &CodeMatrix,
    order: AssignOrder,
    max_sweeps: usize,
) -> Result<CodeMatrix> {
    if data.dims() != codebooks.dims() {
        return Err(Error::DimensionMismatch {
            expected: codebooks.dims(),
            found: data.dims(),
        });
    }
    if prev_codes.rows() != data.rows() || prev_codes.num_dicts() != codebooks.num_dicts() {
        return Err(Error::contract(format!(
            "previous codes are {}x{}, expected {}x{}",
            prev_codes.rows(),
            prev_codes.num_dicts(),
            data.rows(),
            codebooks.num_dicts()
        )));
    }
    if order == AssignOrder::Exhaustive {
        check_exhaustive_capacity(codebooks)?;
    }
    let t = build_inner_table(codebooks);
    let c_n = codebooks.num_dicts();
    let mut flat = vec![0usize; data.rows() * c_n];
    flat.par_chunks_mut(c_n).enumerate().for_each_init(
        || Workspace::new(codebooks),
        |ws, (i, row)| {
            prev_codes.read_row(i, row);
            assign_point_ws(data.row(i), codebooks, &t, row, order, max_sweeps, ws);
        },
    );
    CodeMatrix::from_indices(data.rows(), c_n, codebooks.num_words(), &flat)
}

fn check_exhaustive_capacity(codebooks: &CodebookSet) -> Result<()> {
    let k = codebooks.num_words();
    let mut total: usize = 1;
    for _ in 0..codebooks.num_dicts() {
        total = total.saturating_mul(k);
        if total > EXHAUSTIVE_LIMIT {
            return Err(Error::Capacity(format!(
                "K^C = {k}^{} exceeds the exhaustive limit of {EXHAUSTIVE_LIMIT}",
                codebooks.num_dicts()
            )));
        }
    }
    Ok(())
}

/// Globally optimal code over all `K^C` combinations. Ties go to the
/// lexicographically smallest code.
pub fn exhaustive_assign(x: &[f32], codebooks: &CodebookSet) -> Result<Vec<usize>> {
    if x.len() != codebooks.dims() {
        return Err(Error::DimensionMismatch {
            expected: codebooks.dims(),
            found: x.len(),
        });
    }
    check_exhaustive_capacity(codebooks)?;
    let t = build_inner_table(codebooks);
    let mut ws = Workspace::new(codebooks);
    fill_point_table(x, codebooks, &mut ws.s);
    let mut best = vec![0; codebooks.num_dicts()];
    exhaustive_search(&ws.s, &t, &mut ws.scratch, &mut ws.prefix, &mut best);
    Ok(best)
}

/// Depth-first enumeration in lexicographic order, accumulating the score
/// of each prefix so every leaf costs `O(C)` additions. Writes the best
/// code into `best`.
fn exhaustive_search(
    s: &PointTable,
    t: &InnerTable,
    scratch: &mut [f64],
    prefix: &mut [usize],
    best: &mut [usize],
) {
    struct Search<'a> {
        t: &'a InnerTable,
        /// `S[c][k] + 1/2 ||d^c_k||^2`, the prefix-independent part.
        base: &'a [f64],
        prefix: &'a mut [usize],
        /// One row of `K` candidate scores per depth above the last.
        rows: &'a mut [f64],
        best: &'a mut [usize],
        best_score: f64,
    }

    impl Search<'_> {
        /// Keeps the strict minimum so the lexicographically first optimum wins.
        fn descend(&mut self, depth: usize, partial: f64, leaf: &mut [f64]) {
            let (c_n, k_n) = (self.t.num_dicts, self.t.num_words);
            if depth + 1 == c_n {
                score_level(self.t, self.base, self.prefix, depth, partial, leaf);
                for (k, &v) in leaf.iter().enumerate() {
                    if v < self.best_score {
                        self.best_score = v;
                        self.prefix[depth] = k;
                        self.best.copy_from_slice(self.prefix);
                    }
                }
                return;
            }
            let start = depth * k_n;
            score_level(
                self.t,
                self.base,
                self.prefix,
                depth,
                partial,
                &mut self.rows[start..start + k_n],
            );
            // deeper levels only write their own rows
            for k in 0..k_n {
                self.prefix[depth] = k;
                let v = self.rows[start + k];
                self.descend(depth + 1, v, leaf);
            }
        }
    }

    /// Scores every codeword of dictionary `depth` given the prefix.
    fn score_level(
        t: &InnerTable,
        base: &[f64],
        prefix: &[usize],
        depth: usize,
        partial: f64,
        out: &mut [f64],
    ) {
        let k_n = t.num_words;
        for (r, &b) in out.iter_mut().zip(&base[depth * k_n..(depth + 1) * k_n]) {
            *r = partial + b;
        }
        for (c, &kc) in prefix[..depth].iter().enumerate() {
            for (r, &tv) in out.iter_mut().zip(t.row(c, depth, kc)) {
                *r += tv;
            }
        }
    }

    let (c_n, k_n) = (t.num_dicts, t.num_words);
    let (base, rest) = scratch.split_at_mut(c_n * k_n);
    let (rows, leaf) = rest.split_at_mut(c_n * k_n);
    for c in 0..c_n {
        for ((b, &sv), &h) in base[c * k_n..(c + 1) * k_n]
            .iter_mut()
            .zip(s.dict(c))
            .zip(t.half_norms_of(c))
        {
            *b = sv + h;
        }
    }
    let mut search = Search {
        t,
        base,
        prefix,
        rows,
        best,
        best_score: f64::INFINITY,
    };
    search.descend(0, 0.0, &mut leaf[..k_n]);
}
