//! Analytic spectral facts, the unit-disc gate and finite-section surrogates.
//!
//! The gate only ever consumes analytic descriptors. Finite sections of
//! non-normal shifts do not approximate their spectra, so σ_min grids are a
//! pseudospectrum surrogate for plotting and sanity checks, nothing more.

mod grid;
mod svd;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use grid::{pseudospectrum_grid, GridResult, GridSpec, GRID_POINT_CAP, INVERSE_ITERATION_CAP};
pub use svd::{jacobi_singular_values, smallest_singular, JACOBI_DIM_CAP};

use crate::error::SpectraError;
use crate::linalg::{cdiv, recip, DenseMatrix};
use crate::operators::{CTypeData, OperatorKind, OperatorSpec, ShiftWeights, SECTION_CAP};

/// Default threshold `W` for the inverse-unboundedness witness.
pub const DEFAULT_WITNESS_THRESHOLD: f64 = 1e6;

const UNIT_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectrumSet {
    Circle { radius: f64 },
    FiniteSet { points: Vec<[f64; 2]> },
    Union { parts: Vec<SpectrumSet> },
    UnknownAnalytic,
}

impl SpectrumSet {
    fn meets_closed_unit_disc(&self) -> Option<bool> {
        match self {
            SpectrumSet::Circle { radius } => Some(*radius <= 1.0 + UNIT_TOL),
            SpectrumSet::FiniteSet { points } => {
                Some(points.iter().any(|p| Complex64::new(p[0], p[1]).norm() <= 1.0 + UNIT_TOL))
            }
            SpectrumSet::Union { parts } => {
                let mut any = false;
                for p in parts {
                    any |= p.meets_closed_unit_disc()?;
                }
                Some(any)
            }
            SpectrumSet::UnknownAnalytic => None,
        }
    }

    fn conjugate_closure(self) -> SpectrumSet {
        match self {
            SpectrumSet::FiniteSet { mut points } => {
                let extra: Vec<[f64; 2]> =
                    points.iter().filter(|p| p[1] != 0.0).map(|p| [p[0], -p[1]]).collect();
                for q in extra {
                    if !points.contains(&q) {
                        points.push(q);
                    }
                }
                SpectrumSet::FiniteSet { points }
            }
            SpectrumSet::Union { parts } => {
                SpectrumSet::Union { parts: parts.into_iter().map(SpectrumSet::conjugate_closure).collect() }
            }
            other => other,
        }
    }
}

/// Essential spectrum with the fact it rests on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDescriptor {
    pub set: SpectrumSet,
    pub provenance: String,
}

fn point(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Essential spectrum of `spec` viewed as an operator on the full sequence space.
pub fn essential_spectrum_analytic(spec: &OperatorSpec) -> Result<SpectrumDescriptor, SpectraError> {
    Ok(match spec.kind() {
        OperatorKind::Identity => SpectrumDescriptor {
            set: SpectrumSet::FiniteSet { points: vec![[1.0, 0.0]] },
            provenance: "sigma_e(I) = {1}".into(),
        },
        OperatorKind::ScalarMul(l) => SpectrumDescriptor {
            set: SpectrumSet::FiniteSet { points: vec![point(*l)] },
            provenance: "sigma_e(lambda I) = {lambda} on an infinite-dimensional space".into(),
        },
        OperatorKind::BackwardShift(ShiftWeights::Constant(mu)) if *mu == Complex64::new(0.0, 0.0) => {
            SpectrumDescriptor {
                set: SpectrumSet::FiniteSet { points: vec![[0.0, 0.0]] },
                provenance: "zero operator".into(),
            }
        }
        OperatorKind::BackwardShift(ShiftWeights::Constant(mu)) => SpectrumDescriptor {
            set: SpectrumSet::Circle { radius: mu.norm() },
            provenance: "sigma_e(mu B) = sigma_le(mu B) = |mu| T for the unweighted backward shift B; \
                         left-essential and essential spectra agree for recurrent operators"
                .into(),
        },
        OperatorKind::BackwardShift(ShiftWeights::Table(_)) => {
            return Err(SpectraError::UnsupportedClass("weighted backward shift with a weight table".into()))
        }
        OperatorKind::CompactK(_) => SpectrumDescriptor {
            set: SpectrumSet::FiniteSet { points: vec![[0.0, 0.0]] },
            provenance: "K_{phi,v} is compact, so sigma_e(K) = {0}".into(),
        },
        OperatorKind::CTypeWB(_) | OperatorKind::CTypeFull(_) => SpectrumDescriptor {
            set: SpectrumSet::UnknownAnalytic,
            provenance: "no analytic formula for C-type operators; 0 in sigma_e(T_{w,b}) is witnessed through \
                         the unbounded inverse, not certified"
                .into(),
        },
        OperatorKind::DirectSum(l, r) => {
            let a = essential_spectrum_analytic(l)?;
            let b = essential_spectrum_analytic(r)?;
            let set = if a.set == SpectrumSet::UnknownAnalytic || b.set == SpectrumSet::UnknownAnalytic {
                SpectrumSet::UnknownAnalytic
            } else {
                SpectrumSet::Union { parts: vec![a.set, b.set] }
            };
            SpectrumDescriptor {
                set,
                provenance: format!("sigma_e(A + B) = sigma_e(A) U sigma_e(B): [{}] U [{}]", a.provenance, b.provenance),
            }
        }
        OperatorKind::Complexified(inner) => {
            let d = essential_spectrum_analytic(inner)?;
            SpectrumDescriptor {
                set: d.set.conjugate_closure(),
                provenance: format!("complexification is conjugate to T + T: [{}] closed under conjugation", d.provenance),
            }
        }
    })
}

/// Whether the essential spectrum meets the closed unit disc.
pub fn unit_disc_gate(desc: &SpectrumDescriptor) -> Result<bool, SpectraError> {
    desc.set.meets_closed_unit_disc().ok_or(SpectraError::UnknownAnalytic)
}

/// Number of blocks `n < n_blocks` with `λ^{L_n} = −1` (within 1e−9).
pub fn point_spectrum_blocks(ct: &CTypeData, lam: Complex64, n_blocks: usize) -> Result<usize, SpectraError> {
    let r = lam.norm();
    if (r - 1.0).abs() > ROOT_TOL {
        return Err(SpectraError::OffCircle(r));
    }
    if n_blocks > ct.num_blocks() {
        return Err(SpectraError::BlocksNotStored { requested: n_blocks, stored: ct.num_blocks() });
    }
    let theta = lam.arg();
    Ok((0..n_blocks)
        .filter(|&n| {
            // Reduce L·θ mod 2π before exponentiating; λ is treated as unimodular.
            let a = (ct.block_len(n) as f64 * theta).rem_euclid(2.0 * PI);
            (Complex64::from_polar(1.0, a) + 1.0).norm() <= ROOT_TOL
        })
        .count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub block: usize,
    pub log2_product: f64,
    pub product: f64,
    /// `‖T^{-1} e_{b_n}‖`, from the inverse's wrap row `−P_n e_{b_{n+1}−1}`.
    pub inverse_wrap_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseWitness {
    /// Running maxima of `|P_n|` over the stored blocks.
    pub table: Vec<GrowthRow>,
    pub max_product: f64,
    pub max_block: usize,
    pub threshold: f64,
    /// `max |P_n|` exceeds the threshold at this truncation. Not a limit claim.
    pub witnessed: bool,
    /// `T_{w,b} T_{w,b}^{-1} e_{b_n} = e_{b_n}` on every stored block.
    pub inverse_consistent: bool,
}

// T_{w,b}^{-1} e_k for k < b_m.
fn inverse_basis_image(ct: &CTypeData, k: usize) -> (usize, Complex64) {
    let n = ct.block_of(k);
    if k == ct.boundary(n) {
        (ct.boundary(n + 1) - 1, -ct.block_product(n))
    } else {
        (k - 1, recip(ct.weight(k)))
    }
}

/// Growth table of the block products: `sup_n |P_n| = ∞` makes `T_{w,b}^{-1}`
/// unbounded. Reports whether the stored blocks pass `threshold`.
pub fn inverse_unboundedness_witness(ct: &CTypeData, threshold: f64) -> InverseWitness {
    let mut table = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut max_block = 0;
    let mut consistent = true;
    for n in 0..ct.num_blocks() {
        let (row, coeff) = inverse_basis_image(ct, ct.boundary(n));
        // T maps e_{b_{n+1}−1} to −P_n^{-1} e_{b_n}.
        let back = -cdiv(coeff, ct.block_product(n));
        consistent &= row == ct.boundary(n + 1) - 1 && (back - 1.0).norm() <= 1e-12;
        let log2 = ct.log2_abs_block_product(n);
        if log2 > best {
            best = log2;
            max_block = n;
            table.push(GrowthRow {
                block: n,
                log2_product: log2,
                product: ct.block_product(n).norm(),
                inverse_wrap_norm: coeff.norm(),
            });
        }
    }
    let max_product = ct.block_product(max_block).norm();
    InverseWitness { table, max_product, max_block, threshold, witnessed: best > threshold.log2(), inverse_consistent: consistent }
}

/// `(N, |v_N|·|P_N|)` for `N ∈ φ^{-1}(l)` among the stored blocks, one row
/// per fiber `l ≤ max_fiber`. Growth along a fiber is a finite-range witness
/// of the chaos condition only.
pub fn chaos_growth_witness(ct: &CTypeData, max_fiber: usize) -> Vec<(usize, Vec<(usize, f64)>)> {
    (0..=max_fiber)
        .map(|l| {
            let rows = (1..ct.num_blocks())
                .filter(|&n| ct.phi(n) == l)
                .map(|n| (n, ct.coupling(n).norm() * ct.block_product(n).norm()))
                .collect();
            (l, rows)
        })
        .collect()
}

/// The `d × d` section: column `k` is the image of `e_k` cut to rows `< d`.
pub fn finite_section(spec: &OperatorSpec, d: usize) -> Result<DenseMatrix, SpectraError> {
    if d > SECTION_CAP {
        return Err(crate::error::OperatorError::SectionTooLarge { dim: d, cap: SECTION_CAP }.into());
    }
    if d == 0 || d > spec.dim() {
        return Err(SpectraError::NotSquare { rows: d, cols: spec.dim() });
    }
    let mut m = DenseMatrix::zeros(d, d);
    for k in 0..d {
        for (i, c) in spec.basis_image(k)? {
            if i < d {
                m[(i, k)] += c;
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests;
