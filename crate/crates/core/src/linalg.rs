//! Dense kernels for the dictionary update and the rotation updates:
//! a ridge-regularised symmetric solve and an SVD-based Procrustes step.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Square symmetric real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m`, checking squareness, finiteness, and symmetry to `1e-10` relative.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::contract(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("non-finite entry in symmetric matrix"));
        }
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let n = m.nrows();
        for i in 0..n {
            for j in i + 1..n {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::contract(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn mean_diagonal(&self) -> f64 {
        let n = self.order();
        if n == 0 {
            return 0.0;
        }
        self.0.diagonal().sum() / n as f64
    }
}

/// Orthogonal `P x P` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix(DMatrix<f64>);

impl RotationMatrix {
    pub fn identity(order: usize) -> Self {
        Self(DMatrix::identity(order, order))
    }

    /// Wraps `m` after checking `m^T m = I` to `1e-8` per entry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::contract("rotation must be square"));
        }
        let gram = m.transpose() * &m;
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - target).abs() > 1e-8 {
                    return Err(Error::contract(format!(
                        "matrix is not orthogonal at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `R v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order();
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `R^T v`
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order();
        (0..n)
            .map(|j| (0..n).map(|i| self.0[(i, j)] * v[i]).sum())
            .collect()
    }
}

/// Number of times the ridge is multiplied by ten after a failed factorization.
const RIDGE_ESCALATIONS: usize = 3;

/// Relative pivot floor below which the factorization is declared failed.
const PIVOT_FLOOR: f64 = 1e-12;

/// Ridge used for the first escalation when the requested ridge is zero,
/// relative to the mean diagonal.
const ZERO_RIDGE_SEED: f64 = 1e-8;

/// Result of a ridge solve, with the ridge that was actually applied.
#[derive(Debug, Clone)]
pub struct RidgeSolution {
    pub x: DMatrix<f64>,
    pub ridge: f64,
}

/// Returns `X` with `X (A + lambda I) = B`, the minimiser of
/// `||X A - B||_F^2 + lambda ||X||_F^2` for symmetric PSD `A`.
///
/// `B` has one row per right-hand side. If the `LDL^T` factorization of
/// `A + lambda I` hits a non-positive pivot the ridge is multiplied by ten,
/// up to three times, before failing.
pub fn solve_spd_ridge(a: &SymMatrix, b: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    solve_spd_ridge_detailed(a, b, lambda).map(|s| s.x)
}

pub fn solve_spd_ridge_detailed(
    a: &SymMatrix,
    b: &DMatrix<f64>,
    lambda: f64,
) -> Result<RidgeSolution> {
    let n = a.order();
    if b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.ncols(),
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::contract(format!("ridge must be >= 0, got {lambda}")));
    }
    let scale = a
        .matrix()
        .diagonal()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut ridge = lambda;
    for attempt in 0..=RIDGE_ESCALATIONS {
        if let Some(f) = Ldlt::factor(a.matrix(), ridge, scale) {
            return Ok(RidgeSolution {
                x: f.solve_rows(b),
                ridge,
            });
        }
        if attempt < RIDGE_ESCALATIONS {
            ridge = if ridge == 0.0 {
                ZERO_RIDGE_SEED * a.mean_diagonal().max(f64::MIN_POSITIVE)
            } else {
                ridge * 10.0
            };
        }
    }
    Err(Error::Numerical(format!(
        "LDL^T factorization of order {n} failed with ridge escalated to {ridge:e}"
    )))
}

/// `A = L D L^T` with unit lower-triangular `L`, stored row-major.
struct Ldlt {
    n: usize,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl Ldlt {
    fn factor(a: &DMatrix<f64>, ridge: f64, scale: f64) -> Option<Self> {
        let n = a.nrows();
        let floor = PIVOT_FLOOR * scale.max(ridge);
        let mut lower = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..i {
                lower[i * n + j] = a[(i, j)];
            }
        }
        let mut diag = vec![0.0f64; n];
        let mut scaled = vec![0.0f64; n];
        for j in 0..n {
            let row_j = &lower[j * n..j * n + j];
            for k in 0..j {
                scaled[k] = row_j[k] * diag[k];
            }
            let dj = a[(j, j)] + ridge - dot(row_j, &scaled[..j]);
            if !(dj > floor) || !dj.is_finite() {
                return None;
            }
            diag[j] = dj;
            let v = &scaled[..j];
            let update = |row: &mut [f64]| {
                let s = row[j] - dot(&row[..j], v);
                row[j] = s / dj;
            };
            let below = &mut lower[(j + 1) * n..];
            if n - j > 256 {
                below.par_chunks_mut(n).for_each(update);
            } else {
                below.chunks_mut(n).for_each(update);
            }
        }
        Some(Self { n, lower, diag })
    }

    fn solve_rows(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let rows: Vec<Vec<f64>> = (0..b.nrows())
            .into_par_iter()
            .map(|r| {
                let mut y: Vec<f64> = (0..n).map(|j| b[(r, j)]).collect();
                for i in 0..n {
                    let s = dot(&self.lower[i * n..i * n + i], &y[..i]);
                    y[i] -= s;
                }
                for i in 0..n {
                    y[i] /= self.diag[i];
                }
                for i in (0..n).rev() {
                    let yi = y[i];
                    for k in 0..i {
                        y[k] -= self.lower[i * n + k] * yi;
                    }
                }
                y
            })
            .collect();
        DMatrix::from_fn(b.nrows(), n, |r, j| rows[r][j])
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Thin SVD: singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let sigma =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.singular_values.clone()));
        &self.u * sigma * self.v.transpose()
    }
}

pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("non-finite entry passed to svd"));
    }
    let decomposition = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = decomposition
        .u
        .ok_or_else(|| Error::Numerical("SVD returned no U".into()))?;
    let v_t = decomposition
        .v_t
        .ok_or_else(|| Error::Numerical("SVD returned no V^T".into()))?;
    let sigma = decomposition.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)]);
    let singular_values = order.iter().map(|&i| sigma[i]).collect();
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

/// Orthogonal `R` maximising `trace(R^T M)`, i.e. `U V^T` from the SVD of `M`.
pub fn procrustes(m: &DMatrix<f64>) -> Result<RotationMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::contract("procrustes needs a square matrix"));
    }
    let s = svd(m)?;
    Ok(RotationMatrix(&s.u * s.v.transpose()))
}
