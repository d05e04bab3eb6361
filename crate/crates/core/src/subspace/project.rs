use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SubspaceError;
use crate::linalg::{rank, rref, DenseMatrix};
use crate::seqspace::{PairVec, TruncVec};

const RANK_TOL: f64 = 1e-12;

/// Left and right projections of a finite-dimensional `Z ⊂ X ⊕ X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairProjection {
    /// Spanning set of `P(Z) = {x : (x, y) ∈ Z for some y}`.
    pub p_basis: Vec<TruncVec>,
    /// Spanning set of `Q(Z) = {y : (x, y) ∈ Z for some x}`.
    pub q_basis: Vec<TruncVec>,
    pub rank_p: usize,
    pub rank_q: usize,
    pub rank_z: usize,
    /// `Z` is closed under `(x, y) ↦ (−y, x)`, multiplication by `i`.
    pub i_invariant: bool,
    /// `rank_P + rank_Q ≥ rank_Z`, so one projection has rank at least `rank_Z / 2`.
    pub dichotomy_holds: bool,
}

pub fn project_pair_subspace(generators: &[PairVec]) -> Result<PairProjection, SubspaceError> {
    let count = generators.len();
    if count == 0 {
        return Err(SubspaceError::RankDeficient { rank: 0, count: 0 });
    }
    let dim = generators[0].dim();
    let stacked: Vec<Vec<Complex64>> = generators.iter().map(stack).collect();
    let z = DenseMatrix::from_columns(2 * dim, &stacked);
    let rank_z = rank(&z, RANK_TOL);
    if rank_z < count {
        return Err(SubspaceError::RankDeficient { rank: rank_z, count });
    }
    let lefts: Vec<TruncVec> = generators.iter().map(|g| g.left().clone()).collect();
    let rights: Vec<TruncVec> = generators.iter().map(|g| g.right().clone()).collect();
    let p_basis = independent_subset(&lefts);
    let q_basis = independent_subset(&rights);
    let (rank_p, rank_q) = (p_basis.len(), q_basis.len());

    let mut rotated = stacked.clone();
    for g in generators {
        let neg_y = g.right().scale(Complex64::new(-1.0, 0.0));
        rotated.push(neg_y.coeffs().iter().chain(g.left().coeffs()).copied().collect());
    }
    let i_invariant = rank(&DenseMatrix::from_columns(2 * dim, &rotated), RANK_TOL) == rank_z;
    if i_invariant {
        debug_assert_eq!(rank_p, rank_q, "an i-invariant subspace has equal projections");
    }
    Ok(PairProjection {
        p_basis,
        q_basis,
        rank_p,
        rank_q,
        rank_z,
        i_invariant,
        dichotomy_holds: rank_p + rank_q >= rank_z,
    })
}

fn stack(g: &PairVec) -> Vec<Complex64> {
    g.left().coeffs().iter().chain(g.right().coeffs()).copied().collect()
}

// Pivot columns of the RREF, i.e. the first maximal independent subset.
fn independent_subset(vectors: &[TruncVec]) -> Vec<TruncVec> {
    let dim = vectors[0].dim();
    let cols: Vec<Vec<Complex64>> = vectors.iter().map(|v| v.coeffs().to_vec()).collect();
    let (_, pivots) = rref(&DenseMatrix::from_columns(dim, &cols), RANK_TOL);
    pivots.into_iter().map(|p| vectors[p].clone()).collect()
}
