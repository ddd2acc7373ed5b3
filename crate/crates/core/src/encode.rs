//! Encoding new points against a trained model, and decoding codes.

use rayon::prelude::*;

use crate::assign::assign_all;
use crate::config::AssignOrder;
use crate::data::{CodeMatrix, DataMatrix};
use crate::distortion::reconstruct;
use crate::error::{Error, Result};
use crate::init::init_codes_greedy;
use crate::model::Model;

/// Greedy codes refined by up to `max_sweeps` assignment sweeps.
/// `max_sweeps = 0` returns the greedy codes unchanged. Exhaustive
/// assignment needs no starting codes and skips the greedy pass.
pub fn encode(
    data: &DataMatrix,
    model: &Model,
    order: AssignOrder,
    max_sweeps: usize,
) -> Result<CodeMatrix> {
    if data.dims() != model.dims() {
        return Err(Error::DimensionMismatch {
            expected: model.dims(),
            found: data.dims(),
        });
    }
    if order == AssignOrder::Exhaustive {
        let start = CodeMatrix::zeros(data.rows(), model.num_dicts(), model.num_words())?;
        return assign_all(data, &model.codebooks, &start, order, max_sweeps);
    }
    let greedy = init_codes_greedy(data, &model.codebooks, order)?;
    if max_sweeps == 0 {
        return Ok(greedy);
    }
    assign_all(data, &model.codebooks, &greedy, order, max_sweeps)
}

/// Row `i` of the result is the sum of the codewords selected by row `i`.
pub fn decode(model: &Model, codes: &CodeMatrix) -> Result<DataMatrix> {
    if codes.num_dicts() != model.num_dicts() || codes.num_words() != model.num_words() {
        return Err(Error::contract(format!(
            "codes are for C={} K={}, model has C={} K={}",
            codes.num_dicts(),
            codes.num_words(),
            model.num_dicts(),
            model.num_words()
        )));
    }
    if codes.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let rows: Vec<Vec<f32>> = (0..codes.rows())
        .into_par_iter()
        .map(|i| reconstruct(&model.codebooks, &codes.row(i)))
        .collect::<Result<_>>()?;
    DataMatrix::from_rows(&rows)
}
