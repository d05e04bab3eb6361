use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SubspaceError;
use crate::linalg::{null_space, rank, DenseMatrix};
use crate::seqspace::{axpy, FieldMode, NormMode, TruncVec};

/// A member of a non-increasing chain of subspaces.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainMember {
    /// `span{e_i : i ∈ set}`.
    Indices(Vec<usize>),
    /// Span of explicit vectors.
    Generators(Vec<TruncVec>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MazurResult {
    pub vectors: Vec<TruncVec>,
    /// Sampled lower estimate of the basis constant `sup_m ‖P_m‖`.
    pub basis_constant_estimate: f64,
}

const RANK_TOL: f64 = 1e-12;
const BASIS_SAMPLES: usize = 64;

/// Picks normalized `e_n ∈ S_n` for `n = 1..=count`, each vanishing on the
/// union of the supports of the earlier ones. At finite truncation this is
/// the exact analogue of annihilating the coordinate functionals of the
/// previous span, and it makes every prefix projection contractive on the
/// earlier coordinates.
pub fn mazur_extract(
    chain: &[ChainMember],
    count: usize,
    dim: usize,
    norm: NormMode,
    seed: u64,
) -> Result<MazurResult, SubspaceError> {
    if chain.len() < count {
        return Err(SubspaceError::ChainTooShallow { have: chain.len(), need: count });
    }
    check_nested(&chain[..count], dim)?;
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut vectors: Vec<TruncVec> = Vec::with_capacity(count);
    for (step, member) in chain[..count].iter().enumerate() {
        let v = match member {
            ChainMember::Indices(set) => {
                let i = set
                    .iter()
                    .copied()
                    .filter(|i| !used.contains(i))
                    .min()
                    .ok_or(SubspaceError::NullSpaceEmpty { step: step + 1 })?;
                TruncVec::basis(dim, i, FieldMode::Real, norm)?
            }
            ChainMember::Generators(gens) => pick_in_span(gens, &used, step + 1)?,
        };
        let v = v.normalized()?;
        used.extend(v.support());
        vectors.push(v);
    }
    let basis_constant_estimate = basis_constant(&vectors, seed)?;
    Ok(MazurResult { vectors, basis_constant_estimate })
}

fn pick_in_span(gens: &[TruncVec], used: &BTreeSet<usize>, step: usize) -> Result<TruncVec, SubspaceError> {
    if gens.is_empty() {
        return Err(SubspaceError::NullSpaceEmpty { step });
    }
    let rows: Vec<usize> = used.iter().copied().collect();
    let mut a = DenseMatrix::zeros(rows.len().max(1), gens.len());
    for (c, g) in gens.iter().enumerate() {
        for (r, &i) in rows.iter().enumerate() {
            a[(r, c)] = g.get(i);
        }
    }
    let field = gens.iter().fold(FieldMode::Real, |f, g| f.join(g.field()));
    for coeffs in null_space(&a, RANK_TOL) {
        let mut v = TruncVec::zeros(gens[0].dim(), field, gens[0].norm_mode())?;
        for (c, g) in coeffs.iter().zip(gens) {
            if *c != Complex64::new(0.0, 0.0) {
                v = axpy(*c, g, &v)?;
            }
        }
        // Clean rounding residue on the annihilated coordinates.
        let entries: Vec<(usize, Complex64)> = v.sparse().into_iter().filter(|(i, _)| !used.contains(i)).collect();
        let v = TruncVec::from_sparse(v.dim(), &entries, v.field(), v.norm_mode())?;
        if v.norm() > RANK_TOL * gens.iter().map(|g| g.norm()).fold(0.0, f64::max) {
            return Ok(v);
        }
    }
    Err(SubspaceError::NullSpaceEmpty { step })
}

fn check_nested(chain: &[ChainMember], dim: usize) -> Result<(), SubspaceError> {
    for at in 1..chain.len() {
        let nested = match (&chain[at - 1], &chain[at]) {
            (ChainMember::Indices(a), ChainMember::Indices(b)) => {
                let a: BTreeSet<_> = a.iter().collect();
                b.iter().all(|i| a.contains(i))
            }
            (prev, cur) => {
                let p = columns(prev, dim);
                let c = columns(cur, dim);
                let both: Vec<Vec<Complex64>> = p.iter().chain(&c).cloned().collect();
                rank(&DenseMatrix::from_columns(dim, &both), RANK_TOL)
                    == rank(&DenseMatrix::from_columns(dim, &p), RANK_TOL)
            }
        };
        if !nested {
            return Err(SubspaceError::ChainNotNested { at });
        }
    }
    Ok(())
}

fn columns(m: &ChainMember, dim: usize) -> Vec<Vec<Complex64>> {
    match m {
        ChainMember::Indices(set) => set
            .iter()
            .map(|&i| {
                let mut col = vec![Complex64::new(0.0, 0.0); dim];
                col[i] = Complex64::new(1.0, 0.0);
                col
            })
            .collect(),
        ChainMember::Generators(g) => g.iter().map(|v| v.coeffs().to_vec()).collect(),
    }
}

// max over samples and m of ‖Σ_{n≤m} a_n e_n‖ / ‖Σ a_n e_n‖.
fn basis_constant(vectors: &[TruncVec], seed: u64) -> Result<f64, SubspaceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 1.0_f64;
    for _ in 0..BASIS_SAMPLES {
        let a: Vec<f64> = vectors.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut partials = Vec::with_capacity(vectors.len());
        let mut acc = TruncVec::zeros(vectors[0].dim(), vectors[0].field(), vectors[0].norm_mode())?;
        for (ai, v) in a.iter().zip(vectors) {
            acc = axpy(Complex64::new(*ai, 0.0), v, &acc)?;
            partials.push(acc.norm());
        }
        let total = acc.norm();
        if total > 0.0 {
            best = partials.iter().fold(best, |b, &p| b.max(p / total));
        }
    }
    Ok(best)
}
