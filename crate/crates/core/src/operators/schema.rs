//! TOML description of operator trees.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CTypeData, CTypeParams, CTypePreset, OperatorKind, OperatorSpec, ShiftWeights};
use crate::error::OperatorError;
use crate::seqspace::NormMode;

/// A scalar written either as a float or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Real(f64),
    Complex([f64; 2]),
}

impl ScalarRepr {
    pub fn value(self) -> Complex64 {
        match self {
            ScalarRepr::Real(r) => Complex64::new(r, 0.0),
            ScalarRepr::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    pub fn from_value(c: Complex64) -> Self {
        if c.im == 0.0 {
            ScalarRepr::Real(c.re)
        } else {
            ScalarRepr::Complex([c.re, c.im])
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CTypeToml {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<CTypePreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<ScalarRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<ScalarRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_check_max: Option<usize>,
}

impl CTypeToml {
    /// Unvalidated parameters; a preset may be partially overridden by
    /// explicit lists.
    pub fn params(&self) -> Result<CTypeParams, OperatorError> {
        let mut params = match (self.preset, self.blocks) {
            (Some(p), Some(m)) => CTypeParams::preset(p, m),
            (Some(_), None) => return Err(OperatorError::Schema("ctype preset needs `blocks`".into())),
            (None, _) => CTypeParams {
                boundaries: self
                    .boundaries
                    .clone()
                    .ok_or_else(|| OperatorError::Schema("ctype needs `preset` or `boundaries`".into()))?,
                phi: Vec::new(),
                weights: Vec::new(),
                v: Vec::new(),
                fiber_check_max: None,
            },
        };
        if let Some(b) = &self.boundaries {
            params.boundaries = b.clone();
        }
        let m = params.num_blocks();
        params.phi = match &self.phi {
            Some(phi) => phi.clone(),
            None if self.preset.is_some() => params.phi,
            None => (0..m).map(super::dyadic_phi).collect(),
        };
        if let Some(w) = &self.weights {
            params.weights = w.iter().map(|s| s.value()).collect();
        } else if self.preset.is_none() {
            params.weights = vec![Complex64::new(1.0, 0.0); params.boundaries.last().copied().unwrap_or(1).saturating_sub(1)];
        }
        if let Some(v) = &self.v {
            params.v = v.iter().map(|s| s.value()).collect();
        } else if self.preset.is_none() {
            params.v = (1..m).map(|n| Complex64::new((-(n as f64)).exp2(), 0.0)).collect();
        }
        if self.fiber_check_max.is_some() {
            params.fiber_check_max = self.fiber_check_max;
        }
        Ok(params)
    }

    pub fn build(&self) -> Result<CTypeData, OperatorError> {
        let only_preset = self.boundaries.is_none()
            && self.phi.is_none()
            && self.weights.is_none()
            && self.v.is_none()
            && self.fiber_check_max.is_none();
        match (self.preset, self.blocks) {
            (Some(p), Some(m)) if only_preset => CTypeData::preset(p, m),
            _ => self.params()?.build(),
        }
    }

    pub fn from_data(ct: &CTypeData) -> Self {
        if let Some((preset, blocks)) = ct.preset_origin() {
            return CTypeToml { preset: Some(preset), blocks: Some(blocks), ..Default::default() };
        }
        let p = ct.params();
        CTypeToml {
            preset: None,
            blocks: None,
            boundaries: Some(p.boundaries.clone()),
            phi: Some(p.phi.clone()),
            weights: Some(p.weights.iter().map(|&c| ScalarRepr::from_value(c)).collect()),
            v: Some(p.v.iter().map(|&c| ScalarRepr::from_value(c)).collect()),
            fiber_check_max: p.fiber_check_max,
        }
    }
}

/// One node of an operator description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorToml {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<NormMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<ScalarRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<ScalarRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<ScalarRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ctype: Option<CTypeToml>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Box<OperatorToml>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Box<OperatorToml>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<OperatorToml>>,
}

impl OperatorToml {
    fn node(kind: &str, dim: usize, p: NormMode) -> Self {
        OperatorToml {
            kind: kind.to_string(),
            dim: Some(dim),
            p: Some(p),
            lambda: None,
            weight: None,
            weights: None,
            ctype: None,
            left: None,
            right: None,
            inner: None,
        }
    }
}

pub(super) fn to_toml(spec: &OperatorSpec) -> OperatorToml {
    let (dim, p) = (spec.dim(), spec.norm_mode());
    match spec.kind() {
        OperatorKind::Identity => OperatorToml::node("identity", dim, p),
        OperatorKind::ScalarMul(l) => {
            OperatorToml { lambda: Some(ScalarRepr::from_value(*l)), ..OperatorToml::node("scalar", dim, p) }
        }
        OperatorKind::BackwardShift(ShiftWeights::Constant(c)) => {
            OperatorToml { weight: Some(ScalarRepr::from_value(*c)), ..OperatorToml::node("backward-shift", dim, p) }
        }
        OperatorKind::BackwardShift(ShiftWeights::Table(t)) => OperatorToml {
            weights: Some(t.iter().map(|&c| ScalarRepr::from_value(c)).collect()),
            ..OperatorToml::node("backward-shift", dim, p)
        },
        OperatorKind::CTypeWB(ct) => {
            OperatorToml { ctype: Some(CTypeToml::from_data(ct)), ..OperatorToml::node("ctype-wb", dim, p) }
        }
        OperatorKind::CTypeFull(ct) => {
            OperatorToml { ctype: Some(CTypeToml::from_data(ct)), ..OperatorToml::node("ctype-full", dim, p) }
        }
        OperatorKind::CompactK(ct) => {
            OperatorToml { ctype: Some(CTypeToml::from_data(ct)), ..OperatorToml::node("compact-k", dim, p) }
        }
        OperatorKind::DirectSum(l, r) => OperatorToml {
            left: Some(Box::new(to_toml(l))),
            right: Some(Box::new(to_toml(r))),
            ..OperatorToml::node("direct-sum", dim, p)
        },
        OperatorKind::Complexified(inner) => {
            OperatorToml { inner: Some(Box::new(to_toml(inner))), ..OperatorToml::node("complexified", dim, p) }
        }
    }
}

fn need<T: Clone>(v: &Option<T>, kind: &str, field: &str) -> Result<T, OperatorError> {
    v.clone().ok_or_else(|| OperatorError::Schema(format!("`{kind}` needs `{field}`")))
}

fn ctype_leaf(
    t: &OperatorToml,
    norm: NormMode,
    make: fn(CTypeData, NormMode) -> Result<OperatorSpec, OperatorError>,
) -> Result<OperatorSpec, OperatorError> {
    let ct = need(&t.ctype, &t.kind, "ctype")?.build()?;
    let ct = match t.dim {
        None => ct,
        Some(d) if d == ct.dim() => ct,
        Some(d) => {
            let m = ct.blocks_for_dim(d).ok_or(OperatorError::NotOnBlockBoundary { dim: d })?;
            ct.truncated(m)?
        }
    };
    make(ct, norm)
}

pub(super) fn from_toml(t: &OperatorToml, inherited: Option<NormMode>) -> Result<OperatorSpec, OperatorError> {
    let norm = match (t.p, inherited) {
        (Some(p), _) => p.validated()?,
        (None, Some(p)) => p,
        (None, None) => NormMode::Lp(2.0),
    };
    let kind = t.kind.as_str();
    match kind {
        "identity" => OperatorSpec::identity(need(&t.dim, kind, "dim")?, norm),
        "scalar" => OperatorSpec::scalar(need(&t.lambda, kind, "lambda")?.value(), need(&t.dim, kind, "dim")?, norm),
        "rolewicz" => OperatorSpec::rolewicz(need(&t.lambda, kind, "lambda")?.value(), need(&t.dim, kind, "dim")?, norm),
        "backward-shift" => {
            let dim = need(&t.dim, kind, "dim")?;
            let weights = match (&t.weight, &t.weights) {
                (Some(_), Some(_)) => {
                    return Err(OperatorError::Schema("give either `weight` or `weights`, not both".into()))
                }
                (Some(c), None) => ShiftWeights::Constant(c.value()),
                (None, Some(tab)) => ShiftWeights::Table(tab.iter().map(|s| s.value()).collect()),
                (None, None) => ShiftWeights::Constant(Complex64::new(1.0, 0.0)),
            };
            OperatorSpec::backward_shift(weights, dim, norm)
        }
        "ctype-wb" => ctype_leaf(t, norm, OperatorSpec::ctype_wb),
        "ctype-full" => ctype_leaf(t, norm, OperatorSpec::ctype_full),
        "compact-k" => ctype_leaf(t, norm, OperatorSpec::compact_k),
        "direct-sum" => {
            let l = from_toml(&*need(&t.left, kind, "left")?, Some(norm))?;
            let r = from_toml(&*need(&t.right, kind, "right")?, Some(norm))?;
            let s = OperatorSpec::direct_sum(l, r)?;
            check_dim(t, &s)?;
            Ok(s)
        }
        "complexified" => {
            let inner = from_toml(&*need(&t.inner, kind, "inner")?, Some(norm))?;
            let s = inner.complexify()?;
            check_dim(t, &s)?;
            Ok(s)
        }
        other => Err(OperatorError::Schema(format!("unknown operator kind `{other}`"))),
    }
}

fn check_dim(t: &OperatorToml, s: &OperatorSpec) -> Result<(), OperatorError> {
    match t.dim {
        Some(d) if d != s.dim() => Err(OperatorError::Schema(format!(
            "`{}` declares dim = {d} but its children give {}",
            t.kind,
            s.dim()
        ))),
        _ => Ok(()),
    }
}
