//! Initial dictionaries and initial codes.
//!
//! Three dictionary initializations are provided: random data samples,
//! K-means run repeatedly on residuals, and the hierarchical scheme in
//! [`hierarchical`]. Codes for fresh dictionaries (or for new points) come
//! from [`init_codes_greedy`].

pub mod hierarchical;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assign::build_inner_table;
use crate::config::AssignOrder;
use crate::data::{CodeMatrix, CodebookSet, DataMatrix};
use crate::error::{Error, Result};
use crate::lloyd::{kmeans_fit, sample_rows};

pub use hierarchical::{
    init_hierarchical, init_hierarchical_traced, lift_stage, solve_stage, HierStageState,
    HierarchicalTrace, StageOptions,
};

/// Each dictionary is `K` distinct data rows, drawn independently per
/// dictionary. With `scale` the rows are multiplied by `1/C` so that a sum
/// of `C` codewords starts at data scale.
pub fn init_random(
    data: &DataMatrix,
    num_dicts: usize,
    num_words: usize,
    seed: u64,
    scale: bool,
) -> Result<CodebookSet> {
    if num_dicts == 0 || num_words == 0 {
        return Err(Error::Config("C and K must be >= 1".into()));
    }
    if data.rows() < num_words {
        return Err(Error::InsufficientData {
            needed: num_words,
            available: data.rows(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = if scale { 1.0 / num_dicts as f32 } else { 1.0 };
    let mut words = Vec::with_capacity(num_dicts * num_words * data.dims());
    for _ in 0..num_dicts {
        for i in sample_rows(&mut rng, data.rows(), num_words) {
            words.extend(data.row(i).iter().map(|&v| v * factor));
        }
    }
    CodebookSet::new(num_dicts, num_words, data.dims(), words)
}

/// Seed used for the K-means run that fits dictionary `c`.
fn stage_seed(seed: u64, c: usize) -> u64 {
    seed.wrapping_add(c as u64)
}

/// Fits dictionary 1 by K-means on the data, then each following
/// dictionary by K-means on the residual left by the previous ones.
///
/// Returns the dictionaries and the greedy codes produced along the way.
pub fn init_kmeans_residual(
    data: &DataMatrix,
    num_dicts: usize,
    num_words: usize,
    iters: usize,
    seed: u64,
) -> Result<(CodebookSet, CodeMatrix)> {
    let (n, p) = (data.rows(), data.dims());
    let mut residual = data.clone();
    let mut words = Vec::with_capacity(num_dicts * num_words * p);
    let mut codes = CodeMatrix::zeros(n, num_dicts, num_words)?;
    for c in 0..num_dicts {
        let fit = kmeans_fit(&residual, num_words, iters, stage_seed(seed, c))?;
        words.extend_from_slice(fit.centers.as_slice());
        let mut next = residual.as_slice().to_vec();
        for (i, &k) in fit.assignments.iter().enumerate() {
            codes.set(i, c, k);
            for (y, &d) in next[i * p..(i + 1) * p]
                .iter_mut()
                .zip(fit.centers.word(0, k))
            {
                *y -= d;
            }
        }
        residual = DataMatrix::new(n, p, next)?;
    }
    Ok((CodebookSet::new(num_dicts, num_words, p, words)?, codes))
}

/// Sequential greedy codes: dictionary `c` picks the codeword nearest to the
/// residual left by dictionaries `0..c`. With [`AssignOrder::Two`] the
/// dictionaries are taken in pairs `(0,1), (2,3), ...`, each pair chosen
/// jointly; an odd last dictionary is chosen alone.
pub fn init_codes_greedy(
    data: &DataMatrix,
    codebooks: &CodebookSet,
    order: AssignOrder,
) -> Result<CodeMatrix> {
    if data.dims() != codebooks.dims() {
        return Err(Error::DimensionMismatch {
            expected: codebooks.dims(),
            found: data.dims(),
        });
    }
    let (c_n, k_n) = (codebooks.num_dicts(), codebooks.num_words());
    let pairs = order == AssignOrder::Two;
    let table = if pairs {
        Some(build_inner_table(codebooks))
    } else {
        None
    };
    let norms: Vec<f64> = (0..c_n)
        .flat_map(|c| (0..k_n).map(move |k| (c, k)))
        .map(|(c, k)| crate::data::sq_norm(codebooks.word(c, k)))
        .collect();
    let mut flat = vec![0usize; data.rows() * c_n];
    flat.par_chunks_mut(c_n).enumerate().for_each(|(i, row)| {
        let mut y: Vec<f64> = data.row(i).iter().map(|&v| v as f64).collect();
        // -2 <y, d^c_k> + ||d^c_k||^2 for the current residual
        let partial = |y: &[f64], c: usize, k: usize| -> f64 {
            let ip: f64 = y
                .iter()
                .zip(codebooks.word(c, k))
                .map(|(a, &b)| a * b as f64)
                .sum();
            norms[c * k_n + k] - 2.0 * ip
        };
        let subtract = |y: &mut [f64], c: usize, k: usize| {
            for (v, &d) in y.iter_mut().zip(codebooks.word(c, k)) {
                *v -= d as f64;
            }
        };
        let mut c = 0;
        while c < c_n {
            if let (Some(t), true) = (&table, c + 1 < c_n) {
                let a: Vec<f64> = (0..k_n).map(|k| partial(&y, c, k)).collect();
                let b: Vec<f64> = (0..k_n).map(|k| partial(&y, c + 1, k)).collect();
                let mut best = (f64::INFINITY, 0, 0);
                for k1 in 0..k_n {
                    for k2 in 0..k_n {
                        let s = a[k1] + b[k2] + 2.0 * t.get(c, c + 1, k1, k2);
                        if s < best.0 {
                            best = (s, k1, k2);
                        }
                    }
                }
                row[c] = best.1;
                row[c + 1] = best.2;
                subtract(&mut y, c, best.1);
                subtract(&mut y, c + 1, best.2);
                c += 2;
            } else {
                let mut best = (f64::INFINITY, 0);
                for k in 0..k_n {
                    let s = partial(&y, c, k);
                    if s < best.0 {
                        best = (s, k);
                    }
                }
                row[c] = best.1;
                subtract(&mut y, c, best.1);
                c += 1;
            }
        }
    });
    CodeMatrix::from_indices(data.rows(), c_n, k_n, &flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assign::assign_all;
    use crate::distortion::{relative_distortion, total_distortion};
    use crate::lloyd::kmeans_assign;
    use rand::Rng;

    fn random_data(seed: u64, n: usize, p: usize) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::new(
            n,
            p,
            (0..n * p).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn random_init_is_deterministic() {
        let data = random_data(1, 100, 4);
        let a = init_random(&data, 3, 8, 7, true).unwrap();
        let b = init_random(&data, 3, 8, 7, true).unwrap();
        assert_eq!(a, b);
        let c = init_random(&data, 3, 8, 8, true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unscaled_single_dictionary_uses_data_rows() {
        let data = random_data(2, 30, 3);
        let cb = init_random(&data, 1, 10, 0, true).unwrap();
        let rows: Vec<&[f32]> = data.iter_rows().collect();
        for k in 0..10 {
            assert!(rows.contains(&cb.word(0, k)));
        }
        // sampled without replacement
        for a in 0..10 {
            for b in a + 1..10 {
                assert_ne!(cb.word(0, a), cb.word(0, b));
            }
        }
    }

    #[test]
    fn random_init_scales_by_dictionary_count() {
        let data = random_data(3, 30, 3);
        let scaled = init_random(&data, 4, 5, 1, true).unwrap();
        let raw = init_random(&data, 4, 5, 1, false).unwrap();
        for (s, r) in scaled.as_slice().iter().zip(raw.as_slice()) {
            assert_eq!(*s, r * 0.25);
        }
    }

    #[test]
    fn random_init_needs_k_points() {
        let data = random_data(4, 5, 3);
        assert!(matches!(
            init_random(&data, 2, 6, 0, true),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn kmeans_init_with_one_dictionary_is_kmeans() {
        let data = random_data(5, 200, 4);
        let (cb, codes) = init_kmeans_residual(&data, 1, 8, 10, 3).unwrap();
        let fit = kmeans_fit(&data, 8, 10, 3).unwrap();
        assert_eq!(cb.as_slice(), fit.centers.as_slice());
        assert_eq!(
            (0..200).map(|i| codes.get(i, 0)).collect::<Vec<_>>(),
            fit.assignments
        );
    }

    #[test]
    fn kmeans_init_recovers_planted_multiscale_sums() {
        // x = a_i + b_j with coarse centers at scale 100 and fine ones at scale 1.
        let coarse = [[100.0f32, 0.0], [0.0, 100.0], [-100.0, 0.0], [0.0, -100.0]];
        let fine = [[1.0f32, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]];
        let mut rows = Vec::new();
        for _ in 0..5 {
            for a in &coarse {
                for b in &fine {
                    rows.push(vec![a[0] + b[0], a[1] + b[1]]);
                }
            }
        }
        let data = DataMatrix::from_rows(&rows).unwrap();
        let mut best = f64::INFINITY;
        for seed in 0..5 {
            let (cb, codes) = init_kmeans_residual(&data, 2, 4, 30, seed).unwrap();
            best = best.min(relative_distortion(&data, &cb, &codes).unwrap());
        }
        assert!(best < 1e-3, "best {best}");
    }

    #[test]
    fn kmeans_init_stages_reduce_residual_energy() {
        let data = random_data(6, 300, 6);
        let (cb, codes) = init_kmeans_residual(&data, 4, 8, 20, 0).unwrap();
        let mut prev = data.energy();
        for c in 1..=4 {
            let mut partial = cb.as_slice().to_vec();
            for v in partial[c * 8 * 6..].iter_mut() {
                *v = 0.0;
            }
            let partial = CodebookSet::new(4, 8, 6, partial).unwrap();
            let d = total_distortion(&data, &partial, &codes).unwrap();
            assert!(d <= prev * (1.0 + 1e-9));
            prev = d;
        }
    }

    #[test]
    fn greedy_single_dictionary_is_nearest_center() {
        let data = random_data(7, 80, 5);
        let cb = CodebookSet::new(1, 6, 5, random_data(8, 6, 5).as_slice().to_vec()).unwrap();
        let codes = init_codes_greedy(&data, &cb, AssignOrder::One).unwrap();
        let expected = kmeans_assign(&data, &cb).unwrap();
        for i in 0..80 {
            assert_eq!(codes.get(i, 0), expected[i]);
        }
    }

    #[test]
    fn greedy_recovers_planted_codes_with_orthogonal_dictionaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // dictionary 0 lives in dims 0..3, dictionary 1 in dims 3..6
        let mut words = vec![0.0f32; 2 * 5 * 6];
        for k in 0..5 {
            for j in 0..3 {
                words[k * 6 + j] = rng.gen_range(-1.0..1.0);
                words[30 + k * 6 + 3 + j] = rng.gen_range(-1.0..1.0);
            }
        }
        let cb = CodebookSet::new(2, 5, 6, words).unwrap();
        let mut rows = Vec::new();
        let mut planted = Vec::new();
        for a in 0..5 {
            for b in 0..5 {
                rows.push(crate::reconstruct(&cb, &[a, b]).unwrap());
                planted.push(vec![a, b]);
            }
        }
        let data = DataMatrix::from_rows(&rows).unwrap();
        for order in [AssignOrder::One, AssignOrder::Two] {
            let codes = init_codes_greedy(&data, &cb, order).unwrap();
            for (i, p) in planted.iter().enumerate() {
                assert_eq!(&codes.row(i), p);
            }
        }
    }

    #[test]
    fn refinement_never_undoes_greedy_progress() {
        let data = random_data(10, 150, 6);
        let cb = init_random(&data, 4, 8, 2, true).unwrap();
        for order in [AssignOrder::One, AssignOrder::Two] {
            let greedy = init_codes_greedy(&data, &cb, order).unwrap();
            let refined = assign_all(&data, &cb, &greedy, order, 10).unwrap();
            let g = total_distortion(&data, &cb, &greedy).unwrap();
            let r = total_distortion(&data, &cb, &refined).unwrap();
            assert!(r <= g * (1.0 + 1e-12));
        }
    }
}
