//! Reconstruction and the relative-distortion metric.

use crate::data::{CodeMatrix, CodebookSet, DataMatrix};
use crate::error::{Error, Result};
use crate::par::chunked_sum;

/// Sum of the selected codeword from each dictionary.
pub fn reconstruct(codebooks: &CodebookSet, code_row: &[usize]) -> Result<Vec<f32>> {
    check_code_row(codebooks, code_row)?;
    Ok(reconstruct_f64(codebooks, code_row)
        .into_iter()
        .map(|v| v as f32)
        .collect())
}

pub(crate) fn check_code_row(codebooks: &CodebookSet, code_row: &[usize]) -> Result<()> {
    if code_row.len() != codebooks.num_dicts() {
        return Err(Error::contract(format!(
            "code row has {} entries, model has {} dictionaries",
            code_row.len(),
            codebooks.num_dicts()
        )));
    }
    if let Some((c, &k)) = code_row
        .iter()
        .enumerate()
        .find(|(_, &k)| k >= codebooks.num_words())
    {
        return Err(Error::contract(format!(
            "code {k} on dictionary {c} is out of range for K={}",
            codebooks.num_words()
        )));
    }
    Ok(())
}

/// Unchecked reconstruction accumulated in `f64`.
pub(crate) fn reconstruct_f64(codebooks: &CodebookSet, code_row: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0f64; codebooks.dims()];
    for (c, &k) in code_row.iter().enumerate() {
        for (o, &w) in out.iter_mut().zip(codebooks.word(c, k)) {
            *o += w as f64;
        }
    }
    out
}

/// `||x - sum_c d^c_{k_c}||^2` without range checks.
pub(crate) fn point_error(x: &[f32], codebooks: &CodebookSet, code_row: &[usize]) -> f64 {
    let recon = reconstruct_f64(codebooks, code_row);
    x.iter()
        .zip(&recon)
        .map(|(&a, &b)| {
            let d = a as f64 - b;
            d * d
        })
        .sum()
}

fn check_shapes(data: &DataMatrix, codebooks: &CodebookSet, codes: &CodeMatrix) -> Result<()> {
    if data.dims() != codebooks.dims() {
        return Err(Error::DimensionMismatch {
            expected: codebooks.dims(),
            found: data.dims(),
        });
    }
    if codes.rows() != data.rows() {
        return Err(Error::contract(format!(
            "{} code rows for {} data rows",
            codes.rows(),
            data.rows()
        )));
    }
    if codes.num_dicts() != codebooks.num_dicts() || codes.num_words() > codebooks.num_words() {
        return Err(Error::contract(format!(
            "codes are C={} K={}, codebooks are C={} K={}",
            codes.num_dicts(),
            codes.num_words(),
            codebooks.num_dicts(),
            codebooks.num_words()
        )));
    }
    Ok(())
}

/// Squared reconstruction error of every point.
pub fn point_errors(
    data: &DataMatrix,
    codebooks: &CodebookSet,
    codes: &CodeMatrix,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    check_shapes(data, codebooks, codes)?;
    Ok((0..data.rows())
        .into_par_iter()
        .map(|i| point_error(data.row(i), codebooks, &codes.row(i)))
        .collect())
}

/// Total squared reconstruction error, `sum_i ||x_i - recon_i||^2`.
pub fn total_distortion(
    data: &DataMatrix,
    codebooks: &CodebookSet,
    codes: &CodeMatrix,
) -> Result<f64> {
    check_shapes(data, codebooks, codes)?;
    Ok(chunked_sum(data.rows(), |i| {
        point_error(data.row(i), codebooks, &codes.row(i))
    }))
}

/// Total squared error divided by `sum_i ||x_i||^2`.
pub fn relative_distortion(
    data: &DataMatrix,
    codebooks: &CodebookSet,
    codes: &CodeMatrix,
) -> Result<f64> {
    let num = total_distortion(data, codebooks, codes)?;
    let den = data.energy();
    if den == 0.0 {
        return Err(Error::DegenerateMetric);
    }
    Ok(num / den)
}
