use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SpectraError;
use crate::linalg::{cdiv, l2_norm, DenseMatrix};
use crate::operators::max_iter;

/// Most grid points evaluated in one call.
pub const GRID_POINT_CAP: usize = 100_000;
/// Inverse-iteration cap per grid point (lowered further by `RLAB_MAX_ITER`).
pub const INVERSE_ITERATION_CAP: usize = 200;

const REL_CHANGE_TOL: f64 = 1e-8;
const RESCALE_AT: f64 = 1e150;
const START_SEED: u64 = 0x0051_574d_494e;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Rectangular grid `[re_min, re_max] × [im_min, im_max]` with `n_re × n_im`
/// points, endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<Complex64>, SpectraError> {
        let total = self.n_re.saturating_mul(self.n_im);
        if total > GRID_POINT_CAP {
            return Err(SpectraError::GridTooLarge { points: total, cap: GRID_POINT_CAP });
        }
        if self.n_re == 0 || self.n_im == 0 {
            return Err(SpectraError::InvalidGrid("grid needs at least one point per axis".into()));
        }
        let bounds = [self.re_min, self.re_max, self.im_min, self.im_max];
        if bounds.iter().any(|b| !b.is_finite()) || self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(SpectraError::InvalidGrid("bounds must be finite with min <= max".into()));
        }
        let axis = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(total);
        for j in 0..self.n_im {
            for i in 0..self.n_re {
                out.push(Complex64::new(
                    axis(self.re_min, self.re_max, self.n_re, i),
                    axis(self.im_min, self.im_max, self.n_im, j),
                ));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub dim: usize,
    /// `(re, im, σ_min)` in row-major order over the imaginary axis.
    pub points: Vec<[f64; 3]>,
    /// Points whose inverse iteration hit the cap; their σ_min is the last iterate.
    pub nonconverged: usize,
    /// Points where a zero pivot had to be perturbed (λ is numerically an eigenvalue).
    pub singular: usize,
}

impl GridResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,sigma_min\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{:e}", p[0], p[1], p[2]);
        }
        s
    }
}

/// `σ_min(A − λI)` over the grid. Finite sections of non-normal operators do
/// not approximate spectra, so this is a pseudospectrum surrogate only.
pub fn pseudospectrum_grid(a: &DenseMatrix, grid: &GridSpec) -> Result<GridResult, SpectraError> {
    if !a.is_square() || a.rows() == 0 {
        return Err(SpectraError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let pts = grid.points()?;
    let mut out = GridResult { dim: a.rows(), points: Vec::with_capacity(pts.len()), nonconverged: 0, singular: 0 };
    for lam in pts {
        let r = inverse_iteration(&a.shifted(lam));
        out.nonconverged += usize::from(!r.converged);
        out.singular += usize::from(r.perturbed_pivots > 0);
        out.points.push([lam.re, lam.im, r.sigma]);
    }
    Ok(out)
}

pub(crate) struct InverseIteration {
    pub sigma: f64,
    pub converged: bool,
    pub iterations: usize,
    pub relative_change: f64,
    pub perturbed_pivots: usize,
}

/// Inverse iteration on `M^* M` through a banded LU of `M`.
pub(crate) fn inverse_iteration(m: &DenseMatrix) -> InverseIteration {
    let lu = BandLu::factor(m);
    let n = m.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    normalize(&mut x);
    let cap = (INVERSE_ITERATION_CAP as u64).min(max_iter()) as usize;
    let mut sigma = f64::INFINITY;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cap {
        iterations += 1;
        let mut z = lu.solve(&x);
        normalize(&mut z);
        let mut w = lu.solve_adjoint(&z);
        let nw = l2_norm(&w);
        if !nw.is_finite() || nw == 0.0 {
            sigma = 0.0;
            change = 0.0;
            break;
        }
        // ‖z‖ = 1 and w = M^{-*} z, so 1/‖w‖ → σ_min from above.
        let next = 1.0 / nw;
        change = (next - sigma).abs() / next.max(f64::MIN_POSITIVE);
        sigma = next;
        for v in &mut w {
            *v /= nw;
        }
        x = w;
        if change < REL_CHANGE_TOL {
            break;
        }
    }
    InverseIteration {
        sigma,
        converged: change < REL_CHANGE_TOL,
        iterations,
        relative_change: change,
        perturbed_pivots: lu.perturbed,
    }
}

fn normalize(x: &mut [Complex64]) {
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    if peak > RESCALE_AT || (peak > 0.0 && peak < 1.0 / RESCALE_AT) {
        for v in x.iter_mut() {
            *v /= peak;
        }
    }
    let n = l2_norm(x);
    if n > 0.0 && n.is_finite() {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

/// LU with partial pivoting in band storage: `A(i, j)` lives at
/// `ab[j * ld + kl + ku + i − j]`, leaving `kl` extra rows for fill-in.
struct BandLu {
    n: usize,
    kl: usize,
    kv: usize,
    ld: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
    perturbed: usize,
}

impl BandLu {
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.ab[j * self.ld + self.kv + i - j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.ab[j * self.ld + self.kv + i - j]
    }

    fn factor(a: &DenseMatrix) -> BandLu {
        let n = a.rows();
        let (kl, ku) = a.bandwidths();
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut lu = BandLu { n, kl, kv, ld, ab: vec![ZERO; ld * n], ipiv: vec![0; n], perturbed: 0 };
        for j in 0..n {
            for i in j.saturating_sub(ku)..(j + kl + 1).min(n) {
                *lu.at_mut(i, j) = a[(i, j)];
            }
        }
        let scale = a.max_abs();
        let tiny = f64::EPSILON * if scale > 0.0 { scale } else { 1.0 };
        let mut ju = 0;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = lu.at(j, j).norm();
            for r in 1..=km {
                let v = lu.at(j + r, j).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.ipiv[j] = j + p;
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let (x, y) = (lu.at(j, c), lu.at(j + p, c));
                    *lu.at_mut(j, c) = y;
                    *lu.at_mut(j + p, c) = x;
                }
            }
            if best == 0.0 {
                *lu.at_mut(j, j) = Complex64::new(tiny, 0.0);
                lu.perturbed += 1;
            }
            let piv = lu.at(j, j);
            for r in 1..=km {
                let v = lu.at(j + r, j);
                *lu.at_mut(j + r, j) = cdiv(v, piv);
            }
            for c in j + 1..=ju {
                let ujc = lu.at(j, c);
                if ujc == ZERO {
                    continue;
                }
                for r in 1..=km {
                    let l = lu.at(j + r, j);
                    *lu.at_mut(j + r, c) -= l * ujc;
                }
            }
        }
        lu
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for j in 0..n {
            x.swap(j, self.ipiv[j]);
            let xj = x[j];
            for r in 1..=self.kl.min(n - 1 - j) {
                x[j + r] -= self.at(j + r, j) * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] = cdiv(x[j], self.at(j, j));
            let xj = x[j];
            for i in j.saturating_sub(self.kv)..j {
                x[i] -= self.at(i, j) * xj;
            }
        }
        x
    }

    fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for j in 0..n {
            let mut s = x[j];
            for i in j.saturating_sub(self.kv)..j {
                s -= self.at(i, j).conj() * x[i];
            }
            x[j] = cdiv(s, self.at(j, j).conj());
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for r in 1..=self.kl.min(n - 1 - j) {
                s -= self.at(j + r, j).conj() * x[j + r];
            }
            x[j] = s;
            x.swap(j, self.ipiv[j]);
        }
        x
    }
}
