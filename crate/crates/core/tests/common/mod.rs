//! Oracles shared by the integration tests. Nothing here calls into the
//! library's numerical kernels.

#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi method.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Smallest singular value of a complex `n × n` matrix (row-major) from the
/// eigenvalues of the symmetric matrix `[[0, R], [Rᵀ, 0]]`, where `R` is the
/// real `2n × 2n` form of the matrix. Those eigenvalues are `±σ_i`, each
/// repeated, so no square root of a small eigenvalue is taken.
pub fn smallest_singular_oracle(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = m[i][j];
            r[i][j] = z.re;
            r[i][j + n] = -z.im;
            r[i + n][j] = z.im;
            r[i + n][j + n] = z.re;
        }
    }
    let size = 4 * n;
    let mut h = vec![vec![0.0; size]; size];
    for i in 0..2 * n {
        for j in 0..2 * n {
            h[i][j + 2 * n] = r[i][j];
            h[j + 2 * n][i] = r[i][j];
        }
    }
    symmetric_eigenvalues(h).into_iter().map(f64::abs).fold(f64::INFINITY, f64::min)
}

/// Row-major `μ·B − z·I` for the backward shift `B e_k = e_{k−1}` on `d` coordinates.
pub fn shifted_backward_shift(d: usize, mu: f64, z: Complex64) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = -z;
        if i + 1 < d {
            row[i + 1] = Complex64::new(mu, 0.0);
        }
    }
    m
}
