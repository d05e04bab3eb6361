//! Basic-sequence constructions and recurrent-subspace certificates.
//!
//! [`claim_construct`] runs the perturbation recursion that turns a basic
//! sequence `(e_n)` into a sequence `(f_n)` of quasi-rigid vectors along a
//! subsequence `(l_n)` of the rigidity sequence; [`second_option_certificate`]
//! builds the coordinate subspaces `E_n` of a C-type shift directly. Both
//! produce a [`SubspaceCert`], checked independently by
//! [`verify_recurrent_subspace`].

mod claim;
mod mazur;
mod project;
mod second_option;
mod verify;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use claim::{claim_construct, ClaimOptions, MIN_RULE_WARNING};
pub use mazur::{mazur_extract, ChainMember, MazurResult};
pub use project::{project_pair_subspace, PairProjection};
pub use second_option::{
    second_option_certificate, second_option_generator_indices, second_option_select,
};
pub use verify::{verify_recurrent_subspace, VerifyOptions};

use crate::error::SubspaceError;
use crate::linalg::{inverse, rank, DenseMatrix};
use crate::operators::OperatorToml;
use crate::seqspace::{NormMode, TruncVec};

pub const CERT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertMode {
    ClaimConstruction,
    CTypeSecondOption,
}

/// The three families of bounds kept by the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// `‖g_n‖ < 1/(2^{n+1} K)`.
    I,
    /// `‖T^{l_j} g_n‖ < 2^{−(j+n)}` for `n > j`.
    Ii,
    /// `‖T^{l_j} f_n − f_n‖ < 2^{−(j+n)}` for `n ≤ j`.
    Iii,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::I => "i",
            Condition::Ii => "ii",
            Condition::Iii => "iii",
        }
    }
}

/// One ledger line; `j` and `n` are 1-based, `j = 0` for condition (i).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub condition: Condition,
    pub j: usize,
    pub n: usize,
    pub value: f64,
    pub bound: f64,
}

impl LedgerEntry {
    pub fn holds(&self) -> bool {
        self.value < self.bound
    }
}

pub(crate) fn ledger_bound(condition: Condition, j: usize, n: usize, k: f64) -> f64 {
    match condition {
        Condition::I => 1.0 / ((n as f64 + 1.0).exp2() * k),
        Condition::Ii | Condition::Iii => (-((j + n) as f64)).exp2(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceCert {
    pub schema_version: u32,
    pub mode: CertMode,
    pub operator: OperatorToml,
    pub operator_digest: String,
    /// The rigidity sequence the powers were drawn from.
    pub k_seq: Vec<u64>,
    /// Powers `l_n` (claim mode) or `k_n` (second-option mode), one per generator.
    pub powers: Vec<u64>,
    /// Block indices `l_n` of the second-option generators; empty in claim mode.
    pub blocks: Vec<usize>,
    /// The basic sequence `(e_n)`.
    pub basis: Vec<TruncVec>,
    /// The generators `(f_n)`; equal to `basis` in second-option mode.
    pub generators: Vec<TruncVec>,
    /// Upper bounds for `‖e*_n‖`.
    pub dual_norms: Vec<f64>,
    /// `K = 1 + max_n ‖e*_n‖`.
    pub dual_norm_bound: f64,
    pub ledger: Vec<LedgerEntry>,
    /// `S = Σ ‖e*_n‖·‖f_n − e_n‖`.
    pub perturbation_sum: f64,
    /// Claim mode: `R_j ≥ ‖T^{l_j}‖` on `span{e_n : n > j}`.
    /// Second-option mode: `‖T^{k_n}‖` on `E_n`.
    pub restricted_norms: Vec<f64>,
    /// Whether each restricted norm is exact (disjoint images) or an upper bound.
    pub restricted_exact: Vec<bool>,
    pub warnings: Vec<String>,
}

impl SubspaceCert {
    /// Structural problems; empty iff the certificate is well formed.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.generators.len();
        if self.schema_version != CERT_SCHEMA_VERSION {
            out.push(format!("schema version {} (expected {CERT_SCHEMA_VERSION})", self.schema_version));
        }
        if m == 0 {
            out.push("no generators".into());
        }
        if self.powers.len() != m || self.basis.len() != m || self.restricted_norms.len() != m {
            out.push("generator, basis, power and restricted-norm lists differ in length".into());
        }
        if self.dual_norms.len() < m {
            out.push("fewer dual norms than generators".into());
        }
        if self.restricted_exact.len() != self.restricted_norms.len() {
            out.push("restricted-norm exactness flags missing".into());
        }
        if !self.powers.windows(2).all(|w| w[0] < w[1]) {
            out.push("powers are not strictly increasing".into());
        }
        if !is_subsequence(&self.powers, &self.k_seq) {
            out.push("powers are not a subsequence of the rigidity sequence".into());
        }
        if !(self.perturbation_sum < 0.5) {
            out.push(format!("perturbation sum {} is not below 1/2", self.perturbation_sum));
        }
        let max_dual = self.dual_norms.iter().fold(0.0_f64, |a, &b| a.max(b));
        if !(self.dual_norm_bound >= 1.0 + max_dual - 1e-12) {
            out.push("K is smaller than 1 + max dual norm".into());
        }
        for e in &self.ledger {
            if !e.holds() {
                out.push(format!(
                    "ledger ({}) at j={}, n={}: {:e} not below {:e}",
                    e.condition.label(),
                    e.j,
                    e.n,
                    e.value,
                    e.bound
                ));
            }
        }
        let dims: Vec<usize> = self.generators.iter().chain(&self.basis).map(|v| v.dim()).collect();
        if dims.windows(2).any(|w| w[0] != w[1]) {
            out.push("vectors have different dimensions".into());
        }
        match self.mode {
            CertMode::ClaimConstruction => {
                let need = m * (m + 1) / 2 + m * (m + 1) / 2;
                if self.ledger.len() != need {
                    out.push(format!("ledger has {} entries, {} expected", self.ledger.len(), need));
                }
            }
            CertMode::CTypeSecondOption => {
                if self.blocks.len() != m || !self.blocks.windows(2).all(|w| w[0] < w[1]) {
                    out.push("block indices missing or not strictly increasing".into());
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SubspaceError> {
        serde_json::from_str(s).map_err(|e| SubspaceError::InvalidCertificate(e.to_string()))
    }

    /// Ledger lookup.
    pub fn entry(&self, condition: Condition, j: usize, n: usize) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.condition == condition && e.j == j && e.n == n)
    }
}

pub(crate) fn is_subsequence(sub: &[u64], seq: &[u64]) -> bool {
    let mut it = seq.iter();
    sub.iter().all(|x| it.any(|y| y == x))
}

/// Source of vectors from the dense set on which the operator is quasi-rigid.
pub trait DenseFamily {
    /// A member `y` of the family with `‖y − target‖ < delta`.
    fn approximate(&self, target: &TruncVec, delta: f64) -> Result<TruncVec, SubspaceError>;
    fn describe(&self) -> String;
}

/// The whole truncated space; appropriate when every vector is quasi-rigid.
#[derive(Clone, Copy, Debug, Default)]
pub struct WholeSpace;

impl DenseFamily for WholeSpace {
    fn approximate(&self, target: &TruncVec, delta: f64) -> Result<TruncVec, SubspaceError> {
        if !(delta > 0.0) {
            return Err(SubspaceError::OracleCannotMeet { delta, best: 0.0 });
        }
        Ok(target.clone())
    }

    fn describe(&self) -> String {
        "whole truncated space".into()
    }
}

/// Truncations to the first `m` whole blocks, `m ≤ max_blocks`. For a C-type
/// shift these are exactly periodic.
#[derive(Clone, Debug)]
pub struct BlockTruncations {
    boundaries: Vec<usize>,
    max_blocks: usize,
}

impl BlockTruncations {
    pub fn new(boundaries: &[usize], max_blocks: usize) -> Self {
        let max_blocks = max_blocks.min(boundaries.len().saturating_sub(1));
        BlockTruncations { boundaries: boundaries.to_vec(), max_blocks }
    }

    pub fn for_ctype(ct: &crate::operators::CTypeData) -> Self {
        Self::new(ct.boundaries(), ct.num_blocks())
    }
}

impl DenseFamily for BlockTruncations {
    fn approximate(&self, target: &TruncVec, delta: f64) -> Result<TruncVec, SubspaceError> {
        let mut best = f64::INFINITY;
        for m in 1..=self.max_blocks {
            let cut = self.boundaries[m].min(target.dim());
            let entries: Vec<(usize, Complex64)> = target.sparse().into_iter().filter(|&(i, _)| i < cut).collect();
            let y = TruncVec::from_sparse(target.dim(), &entries, target.field(), target.norm_mode())?;
            let err = target.sub(&y)?.norm();
            if err < delta {
                return Ok(y);
            }
            best = best.min(err);
        }
        Err(SubspaceError::OracleCannotMeet { delta, best })
    }

    fn describe(&self) -> String {
        format!("truncations to whole blocks (at most {})", self.max_blocks)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualNormMethod {
    /// Disjoint supports: `‖e*_n‖ = 1/‖e_n‖` exactly.
    DisjointSupports,
    /// `ℓ²` dual basis from the Gram matrix, times a norm-equivalence factor.
    Gram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualNormBound {
    pub per_vector: Vec<f64>,
    /// `K = 1 + max ‖e*_n‖`.
    pub k: f64,
    pub method: DualNormMethod,
    /// Factor applied to the `ℓ²` value (1 when not needed).
    pub equivalence_factor: f64,
}

/// Guaranteed upper bounds for the coefficient functionals of `generators`
/// on their span.
pub fn dual_norm_bound(generators: &[TruncVec]) -> Result<DualNormBound, SubspaceError> {
    if generators.is_empty() {
        return Err(SubspaceError::RankDeficient { rank: 0, count: 0 });
    }
    let norm = generators[0].norm_mode();
    let supports: Vec<Vec<usize>> = generators.iter().map(|g| g.support()).collect();
    if supports.iter().any(|s| s.is_empty()) {
        return Err(SubspaceError::RankDeficient { rank: generators.len() - 1, count: generators.len() });
    }
    let total: usize = supports.iter().map(|s| s.len()).sum();
    let union: std::collections::BTreeSet<usize> = supports.iter().flatten().copied().collect();
    let disjoint = union.len() == total;
    if disjoint {
        let per_vector: Vec<f64> = generators.iter().map(|g| 1.0 / g.norm()).collect();
        let k = 1.0 + per_vector.iter().fold(0.0_f64, |a, &b| a.max(b));
        return Ok(DualNormBound { per_vector, k, method: DualNormMethod::DisjointSupports, equivalence_factor: 1.0 });
    }
    let m = generators.len();
    let mut gram = DenseMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            gram[(a, b)] = generators[a]
                .coeffs()
                .iter()
                .zip(generators[b].coeffs())
                .map(|(x, y)| x.conj() * y)
                .sum();
        }
    }
    let r = rank(&gram, 1e-12);
    let inv = match inverse(&gram, 1e-12) {
        Some(inv) if r == m => inv,
        _ => return Err(SubspaceError::RankDeficient { rank: r, count: m }),
    };
    let support_size = union.len() as f64;
    let factor = match norm {
        NormMode::Sup => support_size.sqrt(),
        NormMode::Lp(p) => support_size.powf((0.5 - 1.0 / p).max(0.0)),
    };
    let per_vector: Vec<f64> = (0..m).map(|n| inv[(n, n)].re.max(0.0).sqrt() * factor).collect();
    let k = 1.0 + per_vector.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(DualNormBound { per_vector, k, method: DualNormMethod::Gram, equivalence_factor: factor })
}
