//! Hierarchical initialization.
//!
//! The full problem is approached through `log2 C` constrained subproblems.
//! In stage `s` the dictionaries are `D = R_s * B_s` with `R_s` orthogonal and
//! `B_s` block diagonal: the rotated space is cut into `C / 2^(s-1)` row
//! groups of `P 2^(s-1) / C` rows, and each group holds `2^(s-1)`
//! dictionaries whose codewords are zero outside that group's rows. Stage 1
//! is a rotated product quantizer; every later stage merges pairs of
//! neighbouring groups, so the previous optimum is a feasible starting point
//! with exactly the same objective value.
//!
//! Dictionaries are indexed globally as `c = u * 2^(s-1) + v` for group `u`
//! and slot `v` (both 0-based). With that numbering lifting to the next
//! stage never renumbers a dictionary.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assign::assign_all;
use crate::config::{AssignOrder, TrainConfig};
use crate::data::{CodeMatrix, CodebookSet, DataMatrix};
use crate::error::{Error, Result};
use crate::linalg::{procrustes, RotationMatrix};
use crate::lloyd::sample_rows;
use crate::update::{accumulate, solve_words, DenseRows};

use super::init_codes_greedy;

/// Parameters shared by every alternation of a stage.
#[derive(Debug, Clone, Copy)]
pub struct StageOptions {
    pub order: AssignOrder,
    pub max_sweeps: usize,
    pub ridge: f64,
}

impl From<&TrainConfig> for StageOptions {
    fn from(cfg: &TrainConfig) -> Self {
        Self {
            order: cfg.order,
            max_sweeps: cfg.max_inner_sweeps,
            ridge: cfg.ridge,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HierStageState {
    stage: usize,
    num_dicts: usize,
    num_words: usize,
    dims: usize,
    rotation: RotationMatrix,
    /// One block per dictionary, `K x rows_per_group` codeword-major.
    blocks: Vec<Vec<f64>>,
    codes: CodeMatrix,
}

impl HierStageState {
    /// Stage-1 state: identity rotation and each dictionary made of `K`
    /// randomly chosen data points restricted to its subvector.
    pub fn initial(
        data: &DataMatrix,
        num_dicts: usize,
        num_words: usize,
        seed: u64,
        order: AssignOrder,
    ) -> Result<Self> {
        check_shape(num_dicts, data.dims())?;
        if data.rows() < num_words {
            return Err(Error::InsufficientData {
                needed: num_words,
                available: data.rows(),
            });
        }
        let p = data.dims();
        let rows = p / num_dicts;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = (0..num_dicts)
            .map(|c| {
                sample_rows(&mut rng, data.rows(), num_words)
                    .into_iter()
                    .flat_map(|i| {
                        data.row(i)[c * rows..(c + 1) * rows]
                            .iter()
                            .map(|&v| v as f64)
                    })
                    .collect()
            })
            .collect();
        let mut state = Self {
            stage: 1,
            num_dicts,
            num_words,
            dims: p,
            rotation: RotationMatrix::identity(p),
            blocks,
            codes: CodeMatrix::zeros(data.rows(), num_dicts, num_words)?,
        };
        state.codes = init_codes_greedy(data, &state.effective_codebooks()?, order)?;
        Ok(state)
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn num_stages(&self) -> usize {
        self.num_dicts.trailing_zeros() as usize
    }

    /// Dictionaries per row group, `2^(s-1)`.
    pub fn group_size(&self) -> usize {
        1 << (self.stage - 1)
    }

    pub fn num_groups(&self) -> usize {
        self.num_dicts / self.group_size()
    }

    pub fn rows_per_group(&self) -> usize {
        self.dims / self.num_groups()
    }

    pub fn rotation(&self) -> &RotationMatrix {
        &self.rotation
    }

    pub fn codes(&self) -> &CodeMatrix {
        &self.codes
    }

    /// Block `(u, v)` as a `rows_per_group x K` matrix (0-based indices).
    pub fn block(&self, u: usize, v: usize) -> DMatrix<f64> {
        let rows = self.rows_per_group();
        let b = &self.blocks[u * self.group_size() + v];
        DMatrix::from_fn(rows, self.num_words, |r, k| b[k * rows + r])
    }

    /// The dictionaries `R * blockdiag(...)` as a dense codebook set.
    pub fn effective_codebooks(&self) -> Result<CodebookSet> {
        let (c_n, k_n, p) = (self.num_dicts, self.num_words, self.dims);
        let rows = self.rows_per_group();
        let r = self.rotation.matrix();
        let mut words = vec![0.0f64; c_n * k_n * p];
        words.par_chunks_mut(p).enumerate().for_each(|(id, out)| {
            let (c, k) = (id / k_n, id % k_n);
            let offset = (c / self.group_size()) * rows;
            let block = &self.blocks[c][k * rows..(k + 1) * rows];
            for (i, o) in out.iter_mut().enumerate() {
                *o = block
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| r[(i, offset + j)] * b)
                    .sum();
            }
        });
        CodebookSet::from_f64(c_n, k_n, p, &words)
    }

    /// Reconstruction of point `i` in the rotated frame.
    fn unrotated_reconstruction(&self, i: usize) -> Vec<f64> {
        let rows = self.rows_per_group();
        let mut y = vec![0.0f64; self.dims];
        for c in 0..self.num_dicts {
            let k = self.codes.get(i, c);
            let offset = (c / self.group_size()) * rows;
            for (o, &b) in y[offset..offset + rows]
                .iter_mut()
                .zip(&self.blocks[c][k * rows..(k + 1) * rows])
            {
                *o += b;
            }
        }
        y
    }

    /// `sum_i ||R^T x_i - yhat_i||^2`, evaluated in `f64`.
    pub fn objective(&self, data: &DataMatrix) -> f64 {
        self.objective_in(&Frame::new(data, &self.rotation))
    }

    fn objective_in(&self, frame: &Frame) -> f64 {
        crate::par::chunked_sum(frame.z.nrows(), |i| {
            let y = self.unrotated_reconstruction(i);
            y.iter()
                .enumerate()
                .map(|(j, b)| {
                    let d = frame.z[(i, j)] - b;
                    d * d
                })
                .sum()
        })
    }

    fn assignment_step(&mut self, data: &DataMatrix, opts: &StageOptions) -> Result<()> {
        let cb = self.effective_codebooks()?;
        self.codes = assign_all(data, &cb, &self.codes, opts.order, opts.max_sweeps)?;
        Ok(())
    }

    /// Least-squares update of every block on its rows of the rotated data.
    /// Groups are decoupled, so each is solved on its own.
    fn block_step(&mut self, frame: &Frame, opts: &StageOptions) -> Result<()> {
        let (rows, g, k_n, n) = (
            self.rows_per_group(),
            self.group_size(),
            self.num_words,
            frame.z.nrows(),
        );
        for u in 0..self.num_groups() {
            let mut slice = Vec::with_capacity(n * rows);
            for i in 0..n {
                slice.extend((u * rows..(u + 1) * rows).map(|j| frame.z[(i, j)]));
            }
            let sub = DenseRows {
                rows: n,
                dims: rows,
                values: slice,
            };
            let mut idx = Vec::with_capacity(n * g);
            for i in 0..n {
                for v in 0..g {
                    idx.push(self.codes.get(i, u * g + v));
                }
            }
            let sub_codes = CodeMatrix::from_indices(n, g, k_n, &idx)?;
            let system = accumulate(&sub, &sub_codes)?;
            let solved = solve_words(&system, opts.ridge)?;
            for v in 0..g {
                let block = &mut self.blocks[u * g + v];
                for k in 0..k_n {
                    let id = v * k_n + k;
                    if solved.occupied[id] {
                        block[k * rows..(k + 1) * rows]
                            .copy_from_slice(&solved.words[id * rows..(id + 1) * rows]);
                    }
                }
            }
        }
        Ok(())
    }

    /// `R = argmax trace(R^T M)` with `M = sum_i x_i yhat_i^T`.
    fn rotation_step(&mut self, frame: &mut Frame) -> Result<()> {
        let recon: Vec<Vec<f64>> = (0..frame.x.nrows())
            .into_par_iter()
            .map(|i| self.unrotated_reconstruction(i))
            .collect();
        let y = DMatrix::from_fn(recon.len(), self.dims, |i, j| recon[i][j]);
        let m = frame.x.transpose() * y;
        self.rotation = procrustes(&m)?;
        frame.refresh(&self.rotation);
        Ok(())
    }
}

/// The data as an `N x P` matrix together with its rotated copy `X R`.
struct Frame {
    x: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl Frame {
    fn new(data: &DataMatrix, rotation: &RotationMatrix) -> Self {
        let x = DMatrix::from_fn(data.rows(), data.dims(), |i, j| data.row(i)[j] as f64);
        let z = &x * rotation.matrix();
        Self { x, z }
    }

    fn refresh(&mut self, rotation: &RotationMatrix) {
        self.z = &self.x * rotation.matrix();
    }
}

fn check_shape(num_dicts: usize, dims: usize) -> Result<()> {
    if num_dicts < 2 || !num_dicts.is_power_of_two() {
        return Err(Error::Unsupported(format!(
            "hierarchical initialization needs C to be a power of two >= 2, got {num_dicts}"
        )));
    }
    if !dims.is_multiple_of(num_dicts) {
        return Err(Error::Unsupported(format!(
            "hierarchical initialization needs P divisible by C, got P={dims} C={num_dicts}"
        )));
    }
    Ok(())
}

/// Runs `iters` alternations of codes, blocks, and rotation on one stage.
///
/// Returns the objective `sum ||x - D b||^2` before the first alternation
/// followed by its value after each of the three steps of every alternation.
pub fn solve_stage(
    data: &DataMatrix,
    mut state: HierStageState,
    iters: usize,
    opts: &StageOptions,
) -> Result<(HierStageState, Vec<f64>)> {
    if data.dims() != state.dims || data.rows() != state.codes.rows() {
        return Err(Error::Config(format!(
            "stage state is for {}x{} data, got {}x{}",
            state.codes.rows(),
            state.dims,
            data.rows(),
            data.dims()
        )));
    }
    let mut frame = Frame::new(data, &state.rotation);
    let mut trace = vec![state.objective_in(&frame)];
    for _ in 0..iters {
        state.assignment_step(data, opts)?;
        trace.push(state.objective_in(&frame));
        state.block_step(&frame, opts)?;
        trace.push(state.objective_in(&frame));
        state.rotation_step(&mut frame)?;
        trace.push(state.objective_in(&frame));
    }
    Ok((state, trace))
}

/// Stage `s` to stage `s + 1`: the rotation is kept and each new block is an
/// old block zero-padded below (first half of a merged group) or above
/// (second half).
pub fn lift_stage(state: &HierStageState) -> Result<HierStageState> {
    if state.stage >= state.num_stages() {
        return Err(Error::contract(format!(
            "cannot lift stage {} of {}",
            state.stage,
            state.num_stages()
        )));
    }
    let g = state.group_size();
    let rows = state.rows_per_group();
    let k_n = state.num_words;
    let new_rows = 2 * rows;
    let mut blocks = vec![Vec::new(); state.num_dicts];
    for u in 0..state.num_groups() / 2 {
        for v in 0..2 * g {
            let (old_u, old_v, offset) = if v < g {
                (2 * u, v, 0)
            } else {
                (2 * u + 1, v - g, rows)
            };
            let old = &state.blocks[old_u * g + old_v];
            let mut block = vec![0.0f64; k_n * new_rows];
            for k in 0..k_n {
                block[k * new_rows + offset..k * new_rows + offset + rows]
                    .copy_from_slice(&old[k * rows..(k + 1) * rows]);
            }
            blocks[u * 2 * g + v] = block;
        }
    }
    Ok(HierStageState {
        stage: state.stage + 1,
        blocks,
        ..state.clone()
    })
}

/// Everything recorded while running the hierarchical chain.
#[derive(Debug, Clone)]
pub struct HierarchicalTrace {
    pub codebooks: CodebookSet,
    pub codes: CodeMatrix,
    /// Objective at the end of each stage.
    pub stage_objectives: Vec<f64>,
    /// Objective just before and just after each lift.
    pub lift_objectives: Vec<(f64, f64)>,
    /// Per-stage objective traces from [`solve_stage`].
    pub stage_traces: Vec<Vec<f64>>,
    pub final_state: HierStageState,
}

/// Solves the `log2 C` stages in sequence and returns the final dictionaries.
pub fn init_hierarchical(
    data: &DataMatrix,
    num_dicts: usize,
    num_words: usize,
    config: &TrainConfig,
) -> Result<CodebookSet> {
    init_hierarchical_traced(data, num_dicts, num_words, config).map(|t| t.codebooks)
}

pub fn init_hierarchical_traced(
    data: &DataMatrix,
    num_dicts: usize,
    num_words: usize,
    config: &TrainConfig,
) -> Result<HierarchicalTrace> {
    check_shape(num_dicts, data.dims())?;
    let opts = StageOptions::from(config);
    let mut state = HierStageState::initial(data, num_dicts, num_words, config.seed, config.order)?;
    let mut stage_objectives = Vec::new();
    let mut lift_objectives = Vec::new();
    let mut stage_traces = Vec::new();
    loop {
        let (solved, trace) = solve_stage(data, state, config.init_iters, &opts)?;
        state = solved;
        stage_objectives.push(*trace.last().expect("trace is never empty"));
        stage_traces.push(trace);
        if state.stage() == state.num_stages() {
            break;
        }
        let before = state.objective(data);
        state = lift_stage(&state)?;
        lift_objectives.push((before, state.objective(data)));
    }
    Ok(HierarchicalTrace {
        codebooks: state.effective_codebooks()?,
        codes: state.codes.clone(),
        stage_objectives,
        lift_objectives,
        stage_traces,
        final_state: state,
    })
}
