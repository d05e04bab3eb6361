use num_complex::Complex64;

use super::grid::inverse_iteration;
use crate::error::SpectraError;
use crate::linalg::DenseMatrix;

/// Largest dimension handled by dense one-sided Jacobi; above it the
/// smallest singular value comes from banded inverse iteration.
pub const JACOBI_DIM_CAP: usize = 512;

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_SWEEPS: usize = 60;

/// All singular values of `a`, descending, by one-sided (Hestenes) Jacobi
/// with a phase rotation per column pair.
pub fn jacobi_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut cols_v: Vec<Vec<Complex64>> = (0..cols).map(|j| a.column(j).to_vec()).collect();
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let (x, y) = (&cols_v[p], &cols_v[q]);
                    let alpha: f64 = x.iter().map(|v| v.norm_sqr()).sum();
                    let beta: f64 = y.iter().map(|v| v.norm_sqr()).sum();
                    let gamma: Complex64 = x.iter().zip(y).map(|(u, v)| u.conj() * v).sum();
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate q by the phase of γ so the pair is a real 2×2 problem.
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let x = cols_v[p][i];
                    let y = cols_v[q][i] * phase;
                    cols_v[p][i] = x * c - y * s;
                    cols_v[q][i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols_v.iter().map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `σ_min(A − μI)`.
pub fn smallest_singular(a: &DenseMatrix, mu: Complex64) -> Result<f64, SpectraError> {
    if !a.is_square() || a.rows() == 0 {
        return Err(SpectraError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let m = a.shifted(mu);
    if m.rows() <= JACOBI_DIM_CAP {
        return Ok(*jacobi_singular_values(&m).last().expect("nonempty"));
    }
    let r = inverse_iteration(&m);
    if r.converged {
        Ok(r.sigma)
    } else {
        Err(SpectraError::NoConvergence { iterations: r.iterations, residual: r.relative_change })
    }
}
