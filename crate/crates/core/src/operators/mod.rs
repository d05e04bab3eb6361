//! Operator algebra on truncated sequence spaces.
//!
//! Operators are described by [`OperatorSpec`] trees and applied through
//! closed-form images of basis vectors; no matrix is formed except by
//! [`OperatorSpec::dense_section`].

mod ctype;
mod schema;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ctype::{dyadic_phi, CTypeData, CTypeParams, CTypePreset, Violation};
pub use schema::{CTypeToml, OperatorToml, ScalarRepr};

use crate::error::OperatorError;
use crate::linalg::{l2_norm, recip, DenseMatrix};
use crate::seqspace::{FieldMode, NormMode, PairVec, TruncVec};

/// Default cap on iterated application.
pub const DEFAULT_MAX_ITER: u64 = 10_000_000;

/// Largest dense finite section that will be formed.
pub const SECTION_CAP: usize = 2048;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Iteration cap, overridable through `RLAB_MAX_ITER`.
pub fn max_iter() -> u64 {
    static CAP: OnceLock<u64> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("RLAB_MAX_ITER")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_ITER)
    })
}

/// Sparse vector as sorted `(index, coefficient)` pairs.
pub type SparseVec = Vec<(usize, Complex64)>;

#[derive(Clone, Debug, PartialEq)]
pub enum ShiftWeights {
    /// `B_w e_k = c e_{k−1}` for every `k ≥ 1`.
    Constant(Complex64),
    /// `w_1, …, w_{D−1}`.
    Table(Vec<Complex64>),
}

impl ShiftWeights {
    fn weight(&self, k: usize) -> Complex64 {
        match self {
            ShiftWeights::Constant(c) => *c,
            ShiftWeights::Table(t) => t[k - 1],
        }
    }

    fn is_real(&self) -> bool {
        match self {
            ShiftWeights::Constant(c) => c.im == 0.0,
            ShiftWeights::Table(t) => t.iter().all(|c| c.im == 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    Identity,
    /// `λI`.
    ScalarMul(Complex64),
    /// Weighted backward shift `e_k ↦ w_k e_{k−1}`, `e_0 ↦ 0`.
    BackwardShift(ShiftWeights),
    /// Block-cyclic weighted shift `T_{w,b}`.
    CTypeWB(Arc<CTypeData>),
    /// `T_{w,φ,b,v} = T_{w,b} + K_{φ,v}`.
    CTypeFull(Arc<CTypeData>),
    /// The coupling part `K_{φ,v}`.
    CompactK(Arc<CTypeData>),
    /// `left ⊕ right`, acting on the concatenated coordinates.
    DirectSum(Box<OperatorSpec>, Box<OperatorSpec>),
    /// `T̃(x + iy) = Tx + iTy`.
    Complexified(Box<OperatorSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    kind: OperatorKind,
    dim: usize,
    norm: NormMode,
}

impl OperatorSpec {
    pub fn identity(dim: usize, norm: NormMode) -> Result<Self, OperatorError> {
        Self::leaf(OperatorKind::Identity, dim, norm)
    }

    pub fn scalar(lambda: Complex64, dim: usize, norm: NormMode) -> Result<Self, OperatorError> {
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(OperatorError::Schema("non-finite scalar".into()));
        }
        Self::leaf(OperatorKind::ScalarMul(lambda), dim, norm)
    }

    /// `μB` with the unweighted backward shift `B`.
    pub fn rolewicz(mu: Complex64, dim: usize, norm: NormMode) -> Result<Self, OperatorError> {
        Self::backward_shift(ShiftWeights::Constant(mu), dim, norm)
    }

    pub fn backward_shift(weights: ShiftWeights, dim: usize, norm: NormMode) -> Result<Self, OperatorError> {
        match &weights {
            ShiftWeights::Constant(c) if !c.re.is_finite() || !c.im.is_finite() => {
                return Err(OperatorError::Schema("non-finite shift weight".into()))
            }
            ShiftWeights::Table(t) => {
                if t.len() + 1 != dim {
                    return Err(OperatorError::Schema(format!(
                        "shift weight table has {} entries, dimension {dim} needs {}",
                        t.len(),
                        dim.saturating_sub(1)
                    )));
                }
                if t.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(OperatorError::Schema("non-finite shift weight".into()));
                }
            }
            _ => {}
        }
        Self::leaf(OperatorKind::BackwardShift(weights), dim, norm)
    }

    /// `T_{w,b}` on the first `b_m = ct.dim()` coordinates.
    pub fn ctype_wb(ct: CTypeData, norm: NormMode) -> Result<Self, OperatorError> {
        let dim = ct.dim();
        Self::leaf(OperatorKind::CTypeWB(Arc::new(ct)), dim, norm)
    }

    pub fn ctype_full(ct: CTypeData, norm: NormMode) -> Result<Self, OperatorError> {
        let dim = ct.dim();
        Self::leaf(OperatorKind::CTypeFull(Arc::new(ct)), dim, norm)
    }

    pub fn compact_k(ct: CTypeData, norm: NormMode) -> Result<Self, OperatorError> {
        let dim = ct.dim();
        Self::leaf(OperatorKind::CompactK(Arc::new(ct)), dim, norm)
    }

    pub fn direct_sum(left: OperatorSpec, right: OperatorSpec) -> Result<Self, OperatorError> {
        if left.norm != right.norm {
            return Err(OperatorError::NormMismatch);
        }
        if matches!(left.kind, OperatorKind::Complexified(_)) || matches!(right.kind, OperatorKind::Complexified(_)) {
            return Err(OperatorError::Schema("direct sums of complexified operators are not supported".into()));
        }
        let dim = left.dim + right.dim;
        let norm = left.norm;
        Ok(OperatorSpec { kind: OperatorKind::DirectSum(Box::new(left), Box::new(right)), dim, norm })
    }

    fn leaf(kind: OperatorKind, dim: usize, norm: NormMode) -> Result<Self, OperatorError> {
        if dim == 0 {
            return Err(OperatorError::Seq(crate::error::SeqError::EmptyVector));
        }
        let norm = norm.validated()?;
        if let OperatorKind::CTypeWB(ct) | OperatorKind::CTypeFull(ct) | OperatorKind::CompactK(ct) = &kind {
            if ct.blocks_for_dim(dim).is_none() {
                return Err(OperatorError::NotOnBlockBoundary { dim });
            }
        }
        Ok(OperatorSpec { kind, dim, norm })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm
    }

    /// Field of the vectors the operator acts on.
    pub fn field(&self) -> FieldMode {
        match &self.kind {
            OperatorKind::Complexified(_) => FieldMode::Complex,
            _ if self.is_real() => FieldMode::Real,
            _ => FieldMode::Complex,
        }
    }

    /// Whether every parameter is real (the operator maps real vectors to real vectors).
    pub fn is_real(&self) -> bool {
        match &self.kind {
            OperatorKind::Identity => true,
            OperatorKind::ScalarMul(l) => l.im == 0.0,
            OperatorKind::BackwardShift(w) => w.is_real(),
            OperatorKind::CTypeWB(ct) | OperatorKind::CTypeFull(ct) | OperatorKind::CompactK(ct) => ct.is_real(),
            OperatorKind::DirectSum(l, r) => l.is_real() && r.is_real(),
            OperatorKind::Complexified(_) => false,
        }
    }

    /// The C-type data, for C-type nodes.
    pub fn ctype_data(&self) -> Option<&CTypeData> {
        match &self.kind {
            OperatorKind::CTypeWB(ct) | OperatorKind::CTypeFull(ct) | OperatorKind::CompactK(ct) => Some(ct),
            _ => None,
        }
    }

    pub fn basis_image(&self, k: usize) -> Result<SparseVec, OperatorError> {
        if k >= self.dim {
            return Err(OperatorError::IndexOutOfRange { index: k, dim: self.dim });
        }
        let mut out = Vec::with_capacity(2);
        self.visit_image(k, &mut |i, c| out.push((i, c)));
        out.sort_by_key(|&(i, _)| i);
        Ok(out)
    }

    // Calls `f(i, c)` for each term `c e_i` of the image of `e_k`.
    fn visit_image(&self, k: usize, f: &mut dyn FnMut(usize, Complex64)) {
        match &self.kind {
            OperatorKind::Identity => f(k, ONE),
            OperatorKind::ScalarMul(l) => f(k, *l),
            OperatorKind::BackwardShift(w) => {
                if k > 0 {
                    f(k - 1, w.weight(k))
                }
            }
            OperatorKind::CTypeWB(ct) => ctype_image(ct, k, CTypePart::Shift, f),
            OperatorKind::CTypeFull(ct) => ctype_image(ct, k, CTypePart::Full, f),
            OperatorKind::CompactK(ct) => ctype_image(ct, k, CTypePart::Coupling, f),
            OperatorKind::DirectSum(l, r) => {
                if k < l.dim {
                    l.visit_image(k, f)
                } else {
                    let off = l.dim;
                    r.visit_image(k - off, &mut |i, c| f(i + off, c))
                }
            }
            OperatorKind::Complexified(inner) => inner.visit_image(k, f),
        }
    }

    fn check_vec(&self, x: &TruncVec) -> Result<(), OperatorError> {
        if x.dim() != self.dim {
            return Err(OperatorError::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        if x.norm_mode() != self.norm {
            return Err(OperatorError::Seq(crate::error::SeqError::NormMismatch));
        }
        Ok(())
    }

    fn apply_slice(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        for (k, &xk) in x.iter().enumerate() {
            if xk == ZERO {
                continue;
            }
            self.visit_image(k, &mut |i, c| out[i] += c * xk);
        }
    }

    /// One application `Tx`.
    pub fn apply(&self, x: &TruncVec) -> Result<TruncVec, OperatorError> {
        self.check_vec(x)?;
        if let OperatorKind::Complexified(inner) = &self.kind {
            let re = inner.apply(&x.re_part())?;
            let im = inner.apply(&x.im_part())?;
            return Ok(join_complex(&re, &im));
        }
        let field = if self.is_real() { x.field() } else { FieldMode::Complex };
        let mut out = vec![ZERO; self.dim];
        self.apply_slice(x.coeffs(), &mut out);
        if field == FieldMode::Real {
            out.iter_mut().for_each(|c| c.im = 0.0);
        }
        Ok(TruncVec::from_parts(out, field, self.norm))
    }

    /// `T^k x`, iterated; `k = 0` returns `x`.
    pub fn apply_power(&self, x: &TruncVec, k: u64) -> Result<TruncVec, OperatorError> {
        let cap = max_iter();
        if k > cap {
            return Err(OperatorError::PowerTooLarge { power: k, cap });
        }
        self.check_vec(x)?;
        if k == 0 {
            return Ok(x.clone());
        }
        if let OperatorKind::Complexified(inner) = &self.kind {
            let re = inner.apply_power(&x.re_part(), k)?;
            let im = inner.apply_power(&x.im_part(), k)?;
            return Ok(join_complex(&re, &im));
        }
        let field = if self.is_real() { x.field() } else { FieldMode::Complex };
        let mut cur = x.coeffs().to_vec();
        let mut next = vec![ZERO; self.dim];
        for _ in 0..k {
            self.apply_slice(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        if field == FieldMode::Real {
            cur.iter_mut().for_each(|c| c.im = 0.0);
        }
        Ok(TruncVec::from_parts(cur, field, self.norm))
    }

    /// `T^power e_k` computed on sparse supports.
    pub fn power_image(&self, k: usize, power: u64) -> Result<SparseVec, OperatorError> {
        if k >= self.dim {
            return Err(OperatorError::IndexOutOfRange { index: k, dim: self.dim });
        }
        let cap = max_iter();
        if power > cap {
            return Err(OperatorError::PowerTooLarge { power, cap });
        }
        let mut cur: BTreeMap<usize, Complex64> = BTreeMap::new();
        cur.insert(k, ONE);
        for _ in 0..power {
            let mut next: BTreeMap<usize, Complex64> = BTreeMap::new();
            for (&j, &c) in &cur {
                self.visit_image(j, &mut |i, a| *next.entry(i).or_insert(ZERO) += a * c);
            }
            next.retain(|_, c| *c != ZERO);
            cur = next;
            if cur.is_empty() {
                break;
            }
        }
        Ok(cur.into_iter().collect())
    }

    /// Exact norm of `T^power` restricted to `span{e_j : j ∈ basis}`, valid
    /// when the images `T^power e_j` are pairwise disjointly supported: the
    /// restriction then acts diagonally between disjoint blocks and its norm
    /// is `max_j ‖T^power e_j‖` in every `ℓ^p` and in `c₀`.
    pub fn restricted_norm_exact(&self, power: u64, basis: &[usize]) -> Result<f64, OperatorError> {
        let mut owner: HashMap<usize, usize> = HashMap::new();
        let mut best = 0.0_f64;
        for (pos, &j) in basis.iter().enumerate() {
            if let Some(prev) = basis[..pos].iter().find(|&&b| b == j) {
                return Err(OperatorError::DisjointnessViolated { first: *prev, second: j });
            }
            let img = self.power_image(j, power)?;
            for &(i, _) in &img {
                if let Some(&other) = owner.get(&i) {
                    return Err(OperatorError::DisjointnessViolated { first: other, second: j });
                }
                owner.insert(i, j);
            }
            best = best.max(self.norm.of_sparse(&img));
        }
        Ok(best)
    }

    /// Upper bound for `‖T^power‖` restricted to the coordinate span of
    /// `columns` (all coordinates when `None`), by the Schur/Riesz–Thorin
    /// bound `‖A‖_p ≤ ‖A‖_1^{1/p} ‖A‖_∞^{1−1/p}`. Exact for monomial `A`.
    pub fn power_norm_upper_bound(&self, power: u64, columns: Option<&[usize]>) -> Result<f64, OperatorError> {
        let all: Vec<usize>;
        let cols = match columns {
            Some(c) => c,
            None => {
                all = (0..self.dim).collect();
                &all
            }
        };
        let mut max_col = 0.0_f64;
        let mut row_sums: HashMap<usize, f64> = HashMap::new();
        for &j in cols {
            let img = self.power_image(j, power)?;
            let col: f64 = img.iter().map(|(_, c)| c.norm()).sum();
            max_col = max_col.max(col);
            for (i, c) in img {
                *row_sums.entry(i).or_insert(0.0) += c.norm();
            }
        }
        let max_row = row_sums.values().fold(0.0_f64, |m, &v| m.max(v));
        Ok(match self.norm {
            NormMode::Sup => max_row,
            NormMode::Lp(p) => max_col.powf(1.0 / p) * max_row.powf(1.0 - 1.0 / p),
        })
    }

    /// Finite section: column `k` is `basis_image(k)`.
    pub fn dense_section(&self) -> Result<DenseMatrix, OperatorError> {
        if self.dim > SECTION_CAP {
            return Err(OperatorError::SectionTooLarge { dim: self.dim, cap: SECTION_CAP });
        }
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for k in 0..self.dim {
            self.visit_image(k, &mut |i, c| m[(i, k)] += c);
        }
        Ok(m)
    }

    /// Estimate of `‖T‖`. See [`NormEstimate`] for what the value means.
    pub fn operator_norm_estimate(&self, trials: usize) -> Result<NormEstimate, OperatorError> {
        if let OperatorKind::Complexified(inner) = &self.kind {
            return complexified_norm_estimate(inner, trials);
        }
        if self.norm.is_l2() {
            let a = self.dense_section()?;
            let (value, iterations, converged, _) = top_singular(&a);
            return Ok(NormEstimate {
                value,
                kind: if converged { EstimateKind::PowerIteration } else { EstimateKind::IterationCap },
                iterations,
            });
        }
        let mut best = 0.0_f64;
        for k in 0..self.dim {
            let img = self.basis_image(k)?;
            best = best.max(self.norm.of_sparse(&img));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
        let field = self.field();
        for _ in 0..trials {
            let x = random_vector(&mut rng, self.dim, field, self.norm);
            let nx = x.norm();
            if nx > 0.0 {
                best = best.max(self.apply(&x)?.norm() / nx);
            }
        }
        Ok(NormEstimate { value: best, kind: EstimateKind::LowerBound, iterations: trials })
    }

    /// `T̃`, acting on complex vectors `x + iy`.
    pub fn complexify(&self) -> Result<OperatorSpec, OperatorError> {
        if matches!(self.kind, OperatorKind::Complexified(_)) {
            return Err(OperatorError::AlreadyComplexified);
        }
        if !self.is_real() {
            return Err(OperatorError::NotRealMode);
        }
        Ok(OperatorSpec { kind: OperatorKind::Complexified(Box::new(self.clone())), dim: self.dim, norm: self.norm })
    }

    /// `(T ⊕ T)(x, y) = (Tx, Ty)`.
    pub fn apply_pair(&self, z: &PairVec) -> Result<PairVec, OperatorError> {
        let tx = self.apply(z.left())?;
        let ty = self.apply(z.right())?;
        Ok(PairVec::new(tx, ty)?)
    }

    pub fn to_toml(&self) -> OperatorToml {
        schema::to_toml(self)
    }

    pub fn from_toml(t: &OperatorToml) -> Result<Self, OperatorError> {
        schema::from_toml(t, None)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, OperatorError> {
        let t: OperatorToml = toml::from_str(s).map_err(|e| OperatorError::Schema(e.to_string()))?;
        Self::from_toml(&t)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_toml()).expect("operator description serializes")
    }

    /// Content hash of the canonical TOML description.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_toml_string().as_bytes());
        hex_string(&h.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy)]
enum CTypePart {
    Shift,
    Full,
    Coupling,
}

fn ctype_image(ct: &CTypeData, k: usize, part: CTypePart, f: &mut dyn FnMut(usize, Complex64)) {
    let n = ct.block_of(k);
    let start = ct.boundary(n);
    let last = ct.boundary(n + 1) - 1;
    if k < last {
        if !matches!(part, CTypePart::Coupling) {
            f(k + 1, ct.weight(k + 1));
        }
        return;
    }
    let inv = recip(ct.block_product(n));
    match (part, n) {
        (CTypePart::Shift, _) => f(start, -inv),
        (CTypePart::Full, 0) => f(0, inv),
        (CTypePart::Full, _) => {
            f(ct.boundary(ct.phi(n)), ct.coupling(n));
            f(start, -inv);
        }
        // Block 0 carries the term that turns the −P_0^{-1} wrap of T_{w,b}
        // into the +P_0^{-1} wrap of T_{w,φ,b,v}.
        (CTypePart::Coupling, 0) => f(0, inv + inv),
        (CTypePart::Coupling, _) => f(ct.boundary(ct.phi(n)), ct.coupling(n)),
    }
}

fn join_complex(re: &TruncVec, im: &TruncVec) -> TruncVec {
    let coeffs = re.coeffs().iter().zip(im.coeffs()).map(|(a, b)| Complex64::new(a.re, b.re)).collect();
    TruncVec::from_parts(coeffs, FieldMode::Complex, re.norm_mode())
}

/// `J(x + iy) = (x, y)`.
pub fn j_split(z: &TruncVec) -> PairVec {
    PairVec::new(z.re_part(), z.im_part()).expect("parts share dimension and norm")
}

/// `J^{-1}(x, y) = x + iy`.
pub fn j_join(pair: &PairVec) -> TruncVec {
    join_complex(pair.left(), pair.right())
}

const NORM_SEED: u64 = 0x5eed_0001;

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, field: FieldMode, norm: NormMode) -> TruncVec {
    let coeffs = (0..dim)
        .map(|_| match field {
            FieldMode::Real => Complex64::new(rng.gen_range(-1.0..1.0), 0.0),
            FieldMode::Complex => Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        })
        .collect();
    TruncVec::from_parts(coeffs, field, norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    /// Power iteration on `A^*A` converged to relative tolerance 1e−6.
    PowerIteration,
    /// Power iteration hit its cap; the value is still a lower bound.
    IterationCap,
    /// Maximum ratio over sampled vectors: a lower bound only.
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub iterations: usize,
}

const POWER_TOL: f64 = 1e-6;
const POWER_CAP: usize = 10_000;

// Largest singular value of `a` by power iteration on `a^* a`; returns the
// value, iteration count, convergence flag and the final right vector.
fn top_singular(a: &DenseMatrix) -> (f64, usize, bool, Vec<Complex64>) {
    let n = a.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(1.0 + 0.1 * rng.gen_range(-1.0..1.0), 0.0)).collect();
    let nv = l2_norm(&v);
    v.iter_mut().for_each(|c| *c /= nv);
    let mut sigma = 0.0;
    for it in 1..=POWER_CAP {
        let av = a.matvec(&v);
        let new_sigma = l2_norm(&av);
        let w = a.adjoint_matvec(&av);
        let nw = l2_norm(&w);
        if nw == 0.0 {
            return (new_sigma, it, true, v);
        }
        v = w.into_iter().map(|c| c / nw).collect();
        if (new_sigma - sigma).abs() <= POWER_TOL * new_sigma {
            let sigma_final = l2_norm(&a.matvec(&v));
            return (sigma_final.max(new_sigma), it, true, v);
        }
        sigma = new_sigma;
    }
    (sigma, POWER_CAP, false, v)
}

fn complexified_norm_estimate(inner: &OperatorSpec, trials: usize) -> Result<NormEstimate, OperatorError> {
    use crate::seqspace::complexification_norm;
    let dim = inner.dim;
    let norm = inner.norm;
    let mut candidates: Vec<(TruncVec, TruncVec)> = Vec::new();
    let zero = TruncVec::zeros(dim, FieldMode::Real, norm)?;
    if norm.is_l2() && dim <= SECTION_CAP {
        let a = inner.dense_section()?;
        let (_, _, _, v) = top_singular(&a);
        let re: Vec<f64> = v.iter().map(|c| c.re).collect();
        candidates.push((TruncVec::real(&re, norm)?, zero.clone()));
    }
    for k in 0..dim.min(64) {
        candidates.push((TruncVec::basis(dim, k, FieldMode::Real, norm)?, zero.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED ^ 0xc0);
    for _ in 0..trials {
        candidates.push((
            random_vector(&mut rng, dim, FieldMode::Real, norm),
            random_vector(&mut rng, dim, FieldMode::Real, norm),
        ));
    }
    let mut best = 0.0_f64;
    for (x, y) in &candidates {
        let den = complexification_norm(x, y)?;
        if den == 0.0 {
            continue;
        }
        let num = complexification_norm(&inner.apply(x)?, &inner.apply(y)?)?;
        best = best.max(num / den);
    }
    Ok(NormEstimate { value: best, kind: EstimateKind::LowerBound, iterations: candidates.len() })
}

/// Sum of two sparse vectors with exact zeros dropped.
pub fn sparse_add(a: &[(usize, Complex64)], b: &[(usize, Complex64)]) -> SparseVec {
    let mut m: BTreeMap<usize, Complex64> = BTreeMap::new();
    for &(i, c) in a.iter().chain(b) {
        *m.entry(i).or_insert(ZERO) += c;
    }
    m.into_iter().filter(|(_, c)| *c != ZERO).collect()
}

/// Rigorous bound on `‖K_{φ,v}‖` restricted to the columns `b_{n+1} − 1`
/// with `n ≥ from_block` (Schur bound; in `ℓ¹` it equals `max |v_n|`).
pub fn coupling_tail_norm_bound(ct: &CTypeData, norm: NormMode, from_block: usize) -> f64 {
    let m = ct.num_blocks();
    let mut max_col = 0.0_f64;
    let mut rows: HashMap<usize, f64> = HashMap::new();
    for n in from_block.max(1)..m {
        let a = ct.coupling(n).norm();
        max_col = max_col.max(a);
        *rows.entry(ct.phi(n)).or_insert(0.0) += a;
    }
    let max_row = rows.values().fold(0.0_f64, |acc, &v| acc.max(v));
    match norm {
        NormMode::Sup => max_row,
        NormMode::Lp(p) => max_col.powf(1.0 / p) * max_row.powf(1.0 - 1.0 / p),
    }
}
