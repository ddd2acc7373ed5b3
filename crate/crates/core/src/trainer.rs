//! Training loop: initialize, then alternate dictionary updates and code
//! assignments until the distortion stops improving.

use std::fmt;

use crate::assign::assign_all;
use crate::config::{AssignOrder, InitScheme, TrainConfig};
use crate::data::{CodeMatrix, CodebookSet, DataMatrix};
use crate::distortion::relative_distortion;
use crate::encode::encode;
use crate::error::{Error, Result};
use crate::init::{init_codes_greedy, init_hierarchical_traced, init_kmeans_residual, init_random};
use crate::model::Model;
use crate::update::{reseed_unused, update_step_detailed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceReason {
    TolReached,
    MaxIters,
    AssignmentsStable,
}

impl fmt::Display for ConvergenceReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvergenceReason::TolReached => "tol-reached",
            ConvergenceReason::MaxIters => "max-iters",
            ConvergenceReason::AssignmentsStable => "assignments-stable",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Relative distortion after each assignment step. Entry 0 follows the
    /// initial assignment, entry `t` follows outer iteration `t`.
    pub history: Vec<f64>,
    /// Outer iterations run.
    pub iterations: usize,
    pub reason: ConvergenceReason,
    /// Relative distortion at the end of each hierarchical stage; empty for
    /// the other initializations.
    pub stage_distortions: Vec<f64>,
    /// Largest absolute ridge used by any update step.
    pub max_ridge: f64,
}

/// What the trainer holds right after an assignment step.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub iteration: usize,
    pub codebooks: &'a CodebookSet,
    pub codes: &'a CodeMatrix,
    pub relative_distortion: f64,
}

/// Trains a model on `data`.
pub fn fit(data: &DataMatrix, config: &TrainConfig) -> Result<(Model, TrainReport)> {
    fit_observed(data, config, |_| {})
}

/// [`fit`] calling `observer` after the initial assignment and after every
/// outer iteration.
pub fn fit_observed<F>(
    data: &DataMatrix,
    config: &TrainConfig,
    mut observer: F,
) -> Result<(Model, TrainReport)>
where
    F: FnMut(&IterationView<'_>),
{
    config.validate()?;
    let (c_n, k_n) = (config.num_dicts, config.num_words);
    if data.rows() < k_n {
        return Err(Error::InsufficientData {
            needed: k_n,
            available: data.rows(),
        });
    }
    let energy = data.energy();
    if energy == 0.0 {
        return Err(Error::DegenerateMetric);
    }
    let mut stage_distortions = Vec::new();
    let (mut codebooks, init_codes) = match config.init {
        InitScheme::Random => {
            let cb = init_random(data, c_n, k_n, config.seed, config.scale_random_init)?;
            let codes = init_codes_greedy(data, &cb, config.order)?;
            (cb, codes)
        }
        InitScheme::KMeans => {
            let (cb, codes) = init_kmeans_residual(data, c_n, k_n, config.init_iters, config.seed)?;
            let codes = if config.order == AssignOrder::One {
                codes
            } else {
                init_codes_greedy(data, &cb, config.order)?
            };
            (cb, codes)
        }
        InitScheme::Hierarchical => {
            let trace = init_hierarchical_traced(data, c_n, k_n, config)?;
            stage_distortions = trace.stage_objectives.iter().map(|d| d / energy).collect();
            (trace.codebooks, trace.codes)
        }
    };
    let mut codes = assign_all(
        data,
        &codebooks,
        &init_codes,
        config.order,
        config.max_inner_sweeps,
    )?;
    let mut current = relative_distortion(data, &codebooks, &codes)?;
    let mut history = vec![current];
    observer(&IterationView {
        iteration: 0,
        codebooks: &codebooks,
        codes: &codes,
        relative_distortion: current,
    });

    let mut max_ridge = 0.0f64;
    let mut reason = ConvergenceReason::MaxIters;
    let mut iterations = 0;
    while iterations < config.max_outer_iters {
        iterations += 1;
        let (next, ridge) = update_step_detailed(data, &codes, &codebooks, config.ridge)?;
        codebooks = next;
        max_ridge = max_ridge.max(ridge);
        if config.reseed_empty {
            reseed_unused(data, &codes, &mut codebooks);
        }
        let next_codes = assign_all(
            data,
            &codebooks,
            &codes,
            config.order,
            config.max_inner_sweeps,
        )?;
        let stable = next_codes == codes;
        codes = next_codes;
        let previous = current;
        current = relative_distortion(data, &codebooks, &codes)?;
        if !current.is_finite() {
            return Err(Error::Numerical(format!(
                "distortion became {current} at iteration {iterations}"
            )));
        }
        history.push(current);
        observer(&IterationView {
            iteration: iterations,
            codebooks: &codebooks,
            codes: &codes,
            relative_distortion: current,
        });
        if stable {
            reason = ConvergenceReason::AssignmentsStable;
            break;
        }
        if previous - current < config.rel_tol * previous {
            reason = ConvergenceReason::TolReached;
            break;
        }
    }

    let mut model = Model::new(codebooks, config.clone());
    model.history = history.iter().copied().enumerate().collect();
    Ok((
        model,
        TrainReport {
            history,
            iterations,
            reason,
            stage_distortions,
            max_ridge,
        },
    ))
}

/// Encodes `data` with `model` and reports the relative distortion.
pub fn evaluate(
    data: &DataMatrix,
    model: &Model,
    order: AssignOrder,
    max_sweeps: usize,
) -> Result<(CodeMatrix, f64)> {
    let codes = encode(data, model, order, max_sweeps)?;
    let d = relative_distortion(data, &model.codebooks, &codes)?;
    Ok((codes, d))
}
