//! Seeded synthetic datasets for examples, benchmarks, and tests.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::DataMatrix;
use crate::error::Result;

/// Parameters of [`mixture`].
#[derive(Debug, Clone, Copy)]
pub struct MixtureSpec {
    pub points: usize,
    pub dims: usize,
    pub clusters: usize,
    /// Spread of the cluster centers.
    pub center_scale: f64,
    /// Spread of points around their center along the strongest axis.
    pub noise_scale: f64,
}

impl MixtureSpec {
    /// The benchmark shape used throughout the tests: 2000 points in 64
    /// dimensions from 256 overlapping clusters.
    pub fn benchmark() -> Self {
        Self {
            points: 2000,
            dims: 64,
            clusters: 256,
            center_scale: 1.0,
            noise_scale: 0.7,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian mixture whose within-cluster covariance has a decaying
/// spectrum and random principal axes, so coordinates are correlated.
/// Centers share the same axes and spectrum.
pub fn mixture(spec: &MixtureSpec, seed: u64) -> Result<DataMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = spec.dims;
    let axes = DMatrix::<f64>::from_fn(p, p, |_, _| gaussian(&mut rng))
        .qr()
        .q();
    let spectrum: Vec<f64> = (0..p)
        .map(|i| 1.0 / (1.0 + i as f64 / 4.0).sqrt())
        .collect();
    let shaped = |rng: &mut ChaCha8Rng, scale: f64| -> Vec<f64> {
        let g: Vec<f64> = spectrum.iter().map(|s| s * scale * gaussian(rng)).collect();
        (0..p)
            .map(|i| (0..p).map(|j| axes[(i, j)] * g[j]).sum())
            .collect()
    };
    let centers: Vec<Vec<f64>> = (0..spec.clusters.max(1))
        .map(|_| shaped(&mut rng, spec.center_scale))
        .collect();
    let mut values = Vec::with_capacity(spec.points * p);
    for _ in 0..spec.points {
        let c = &centers[rng.gen_range(0..centers.len())];
        let noise = shaped(&mut rng, spec.noise_scale);
        values.extend(c.iter().zip(&noise).map(|(a, b)| (a + b) as f32));
    }
    DataMatrix::new(spec.points, p, values)
}

/// Independent uniform coordinates in `[-1, 1)`.
pub fn uniform(points: usize, dims: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix::new(
        points,
        dims,
        (0..points * dims)
            .map(|_| rng.gen_range(-1.0f32..1.0))
            .collect(),
    )
}
