//! Truncated sequence-space vectors.
//!
//! A [`TruncVec`] is a finitely supported element of `ℓ^p(ℕ₀)` (or `c₀` in
//! sup mode) stored up to its truncation dimension `D`; coordinates at or
//! beyond `D` are zero. Real-mode vectors carry exactly zero imaginary parts.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SeqError;

/// Largest admissible finite norm exponent.
pub const MAX_P: f64 = 64.0;

/// Uniform grid size for the complexification-norm supremum.
pub const COMPLEX_NORM_GRID: usize = 1024;

/// Final golden-section bracket width (in `t`) for the complexification norm.
pub const COMPLEX_NORM_T_TOL: f64 = 1e-10;

/// Documented relative accuracy of [`complexification_norm`].
pub const COMPLEX_NORM_REL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    Real,
    Complex,
}

impl FieldMode {
    /// Real only when both are real.
    pub fn join(self, other: FieldMode) -> FieldMode {
        match (self, other) {
            (FieldMode::Real, FieldMode::Real) => FieldMode::Real,
            _ => FieldMode::Complex,
        }
    }
}

/// Norm on the sequence space: `ℓ^p` with `1 ≤ p ≤ 64`, or the sup norm of `c₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormMode {
    Lp(f64),
    Sup,
}

impl NormMode {
    pub fn lp(p: f64) -> Result<Self, SeqError> {
        if !(1.0..=MAX_P).contains(&p) {
            return Err(SeqError::InvalidExponent(p));
        }
        Ok(NormMode::Lp(p))
    }

    /// Checks an already constructed mode (useful after deserialization).
    pub fn validated(self) -> Result<Self, SeqError> {
        match self {
            NormMode::Lp(p) => NormMode::lp(p),
            NormMode::Sup => Ok(self),
        }
    }

    /// Norm of a coefficient slice.
    pub fn of(self, coeffs: &[Complex64]) -> f64 {
        let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        match self {
            NormMode::Sup => scale,
            NormMode::Lp(p) if p == 1.0 => coeffs.iter().map(|c| c.norm()).sum(),
            NormMode::Lp(p) if p == 2.0 => {
                let s: f64 = coeffs.iter().map(|c| (c.norm() / scale).powi(2)).sum();
                scale * s.sqrt()
            }
            NormMode::Lp(p) => {
                let s: f64 = coeffs.iter().map(|c| (c.norm() / scale).powf(p)).sum();
                scale * s.powf(1.0 / p)
            }
        }
    }

    /// Norm of a sparse coefficient list.
    pub fn of_sparse(self, entries: &[(usize, Complex64)]) -> f64 {
        let coeffs: Vec<Complex64> = entries.iter().map(|&(_, c)| c).collect();
        self.of(&coeffs)
    }

    pub fn is_l2(self) -> bool {
        matches!(self, NormMode::Lp(p) if p == 2.0)
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormMode::Lp(p) => write!(f, "l^{p}"),
            NormMode::Sup => write!(f, "c0"),
        }
    }
}

// Serialized as `"sup"` or as the numeric exponent.
impl Serialize for NormMode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NormMode::Lp(p) => s.serialize_f64(*p),
            NormMode::Sup => s.serialize_str("sup"),
        }
    }
}

impl<'de> Deserialize<'de> for NormMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Int(i64),
            Text(String),
        }
        let mode = match Repr::deserialize(d)? {
            Repr::Num(p) => NormMode::Lp(p),
            Repr::Int(p) => NormMode::Lp(p as f64),
            Repr::Text(t) if t == "sup" || t == "c0" => NormMode::Sup,
            Repr::Text(t) => {
                return Err(serde::de::Error::custom(format!(
                    "unknown norm mode `{t}` (expected a number or \"sup\")"
                )))
            }
        };
        mode.validated().map_err(serde::de::Error::custom)
    }
}

/// Finitely supported coefficient vector at truncation dimension `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncVec {
    coeffs: Vec<Complex64>,
    field: FieldMode,
    norm: NormMode,
}

impl TruncVec {
    pub fn new(coeffs: Vec<Complex64>, field: FieldMode, norm: NormMode) -> Result<Self, SeqError> {
        if coeffs.is_empty() {
            return Err(SeqError::EmptyVector);
        }
        let norm = norm.validated()?;
        for (j, c) in coeffs.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(SeqError::NonFinite { index: j });
            }
            if field == FieldMode::Real && c.im != 0.0 {
                return Err(SeqError::ImaginaryInRealMode { index: j });
            }
        }
        Ok(TruncVec { coeffs, field, norm })
    }

    pub fn real(values: &[f64], norm: NormMode) -> Result<Self, SeqError> {
        Self::new(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            FieldMode::Real,
            norm,
        )
    }

    pub fn complex(values: Vec<Complex64>, norm: NormMode) -> Result<Self, SeqError> {
        Self::new(values, FieldMode::Complex, norm)
    }

    pub fn zeros(dim: usize, field: FieldMode, norm: NormMode) -> Result<Self, SeqError> {
        Self::new(vec![Complex64::new(0.0, 0.0); dim], field, norm)
    }

    /// Canonical basis vector `e_k`.
    pub fn basis(dim: usize, k: usize, field: FieldMode, norm: NormMode) -> Result<Self, SeqError> {
        if k >= dim {
            return Err(SeqError::IndexOutOfRange { index: k, dim });
        }
        let mut v = Self::zeros(dim, field, norm)?;
        v.coeffs[k] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// Builds from a sparse list; entries must lie below `dim`.
    pub fn from_sparse(
        dim: usize,
        entries: &[(usize, Complex64)],
        field: FieldMode,
        norm: NormMode,
    ) -> Result<Self, SeqError> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        for &(k, c) in entries {
            if k >= dim {
                return Err(SeqError::IndexOutOfRange { index: k, dim });
            }
            coeffs[k] += c;
        }
        Self::new(coeffs, field, norm)
    }

    // Crate-internal constructor for results of linear maps of valid vectors.
    // Non-finite values are still rejected by the public paths that matter
    // (orbit scans check norms explicitly).
    pub(crate) fn from_parts(coeffs: Vec<Complex64>, field: FieldMode, norm: NormMode) -> Self {
        debug_assert!(!coeffs.is_empty());
        TruncVec { coeffs, field, norm }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn field(&self) -> FieldMode {
        self.field
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn norm(&self) -> f64 {
        self.norm.of(&self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Indices of nonzero coordinates, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn sparse(&self) -> Vec<(usize, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(k, &c)| (k, c))
            .collect()
    }

    /// `a · self`. A non-real scalar promotes the vector to complex mode.
    pub fn scale(&self, a: Complex64) -> TruncVec {
        let field = if a.im == 0.0 { self.field } else { FieldMode::Complex };
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if field == FieldMode::Real { Complex64::new(a.re * c.re, 0.0) } else { a * c })
            .collect();
        TruncVec::from_parts(coeffs, field, self.norm)
    }

    pub fn normalized(&self) -> Result<TruncVec, SeqError> {
        let n = self.norm();
        if n == 0.0 {
            return Err(SeqError::ZeroVector);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn sub(&self, other: &TruncVec) -> Result<TruncVec, SeqError> {
        axpy(Complex64::new(-1.0, 0.0), other, self)
    }

    pub fn with_norm_mode(&self, norm: NormMode) -> TruncVec {
        TruncVec { norm, ..self.clone() }
    }

    /// Real part as a real-mode vector.
    pub fn re_part(&self) -> TruncVec {
        let coeffs = self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect();
        TruncVec::from_parts(coeffs, FieldMode::Real, self.norm)
    }

    /// Imaginary part as a real-mode vector.
    pub fn im_part(&self) -> TruncVec {
        let coeffs = self.coeffs.iter().map(|c| Complex64::new(c.im, 0.0)).collect();
        TruncVec::from_parts(coeffs, FieldMode::Real, self.norm)
    }

    /// Concatenation `(self, other)`, the flat layout of `X ⊕ Y`.
    pub fn concat(&self, other: &TruncVec) -> Result<TruncVec, SeqError> {
        if self.norm != other.norm {
            return Err(SeqError::NormMismatch);
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.extend_from_slice(&other.coeffs);
        Ok(TruncVec::from_parts(coeffs, self.field.join(other.field), self.norm))
    }

    /// Splits at `at` into `(head, tail)`.
    pub fn split(&self, at: usize) -> Result<(TruncVec, TruncVec), SeqError> {
        if at == 0 || at >= self.dim() {
            return Err(SeqError::IndexOutOfRange { index: at, dim: self.dim() });
        }
        Ok((
            TruncVec::from_parts(self.coeffs[..at].to_vec(), self.field, self.norm),
            TruncVec::from_parts(self.coeffs[at..].to_vec(), self.field, self.norm),
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct TruncVecRepr {
    field: FieldMode,
    norm: NormMode,
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

impl Serialize for TruncVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TruncVecRepr {
            field: self.field,
            norm: self.norm,
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: match self.field {
                FieldMode::Real => None,
                FieldMode::Complex => Some(self.coeffs.iter().map(|c| c.im).collect()),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = TruncVecRepr::deserialize(d)?;
        let im = repr.im.unwrap_or_else(|| vec![0.0; repr.re.len()]);
        if im.len() != repr.re.len() {
            return Err(serde::de::Error::custom("re/im length mismatch"));
        }
        let coeffs = repr.re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        TruncVec::new(coeffs, repr.field, repr.norm).map_err(serde::de::Error::custom)
    }
}

/// Element of `X ⊕ X` (equivalently `x + iy` in the complexification).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairVec {
    left: TruncVec,
    right: TruncVec,
}

impl PairVec {
    pub fn new(left: TruncVec, right: TruncVec) -> Result<Self, SeqError> {
        check_compatible(&left, &right)?;
        Ok(PairVec { left, right })
    }

    pub fn left(&self) -> &TruncVec {
        &self.left
    }

    pub fn right(&self) -> &TruncVec {
        &self.right
    }

    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    pub fn into_parts(self) -> (TruncVec, TruncVec) {
        (self.left, self.right)
    }
}

fn check_compatible(x: &TruncVec, y: &TruncVec) -> Result<(), SeqError> {
    if x.dim() != y.dim() {
        return Err(SeqError::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    if x.norm != y.norm {
        return Err(SeqError::NormMismatch);
    }
    Ok(())
}

/// Standard norm of `x`.
pub fn norm(x: &TruncVec) -> f64 {
    x.norm()
}

/// `a·x + y`.
pub fn axpy(a: Complex64, x: &TruncVec, y: &TruncVec) -> Result<TruncVec, SeqError> {
    check_compatible(x, y)?;
    let mut field = x.field.join(y.field);
    if a.im != 0.0 {
        field = FieldMode::Complex;
    }
    let coeffs = x
        .coeffs
        .iter()
        .zip(&y.coeffs)
        .map(|(&xi, &yi)| {
            if field == FieldMode::Real {
                Complex64::new(a.re * xi.re + yi.re, 0.0)
            } else {
                a * xi + yi
            }
        })
        .collect();
    Ok(TruncVec::from_parts(coeffs, field, x.norm))
}

/// `‖x + iy‖_c = sup_t ‖cos(t)x − sin(t)y‖` for real `x, y`.
///
/// Evaluated on a uniform grid of [`COMPLEX_NORM_GRID`] points over `[0, 2π)`
/// and refined by golden-section search around the best grid point. The grid
/// contains `t = 0` and `t = π/2`, so the result is never below
/// `max(‖x‖, ‖y‖)`.
pub fn complexification_norm(x: &TruncVec, y: &TruncVec) -> Result<f64, SeqError> {
    if x.field != FieldMode::Real || y.field != FieldMode::Real {
        return Err(SeqError::ComplexInput);
    }
    check_compatible(x, y)?;
    let xs: Vec<f64> = x.coeffs.iter().map(|c| c.re).collect();
    let ys: Vec<f64> = y.coeffs.iter().map(|c| c.re).collect();
    let mode = x.norm;
    let mut buf = vec![Complex64::new(0.0, 0.0); xs.len()];
    let mut eval = |t: f64| -> f64 {
        let (s, c) = t.sin_cos();
        for ((b, &a), &bv) in buf.iter_mut().zip(&xs).zip(&ys) {
            *b = Complex64::new(c * a - s * bv, 0.0);
        }
        mode.of(&buf)
    };

    let step = std::f64::consts::TAU / COMPLEX_NORM_GRID as f64;
    let mut best_t = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..COMPLEX_NORM_GRID {
        let t = i as f64 * step;
        let v = eval(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while hi - lo > COMPLEX_NORM_T_TOL {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = eval(d);
        }
    }
    Ok(best.max(fc).max(fd))
}

/// Complexification norm of a pair.
pub fn pair_complexification_norm(z: &PairVec) -> Result<f64, SeqError> {
    complexification_norm(&z.left, &z.right)
}
