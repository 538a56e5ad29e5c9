//! Cyclic Jacobi eigensolver for small symmetric matrices and the
//! eigenvalue-clipping projection onto the positive semidefinite cone.

use serde::Serialize;

use crate::error::{CopoError, Result};
use crate::sym::SymMatrix;

/// Sweep cap for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// `sum_i f(lambda_i) v_i v_i^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.order();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        SymMatrix::from_fn(n, |i, j| {
            self.eigenvectors.iter().zip(&weights).map(|(v, &w)| w * v[i] * v[j]).sum()
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eigendecompose(a: &SymMatrix) -> Result<Spectrum> {
    let n = a.order();
    let mut m = a.to_rows();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();

    let scale = a.norm();
    let mut converged = n == 1 || scale == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(CopoError::ConvergenceFailure { sweeps: MAX_SWEEPS });
        }
        sweep += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[p][p], m[q][q]);
                // Negligible relative to both pivots: drop it.
                if apq.abs() <= f64::EPSILON * 0.5 * (app.abs().min(aqq.abs())) || apq.abs() <= 1e-18 * scale
                {
                    m[p][q] = 0.0;
                    m[q][p] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta.abs() > 1e150 { 0.5 / theta } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        converged = !rotated || off.sqrt() <= 1e-18 * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&k| m[k][k]).collect(),
        eigenvectors: order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect(),
    })
}

/// Nearest positive semidefinite matrix in the Frobenius norm,
/// `sum max(lambda_i, 0) v_i v_i^T`.
pub fn psd_project(a: &SymMatrix) -> Result<SymMatrix> {
    Ok(eigendecompose(a)?.reconstruct_with(|l| l.max(0.0)))
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(a: &SymMatrix) -> Result<f64> {
    Ok(eigendecompose(a)?.min())
}
