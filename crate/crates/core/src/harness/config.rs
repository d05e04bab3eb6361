use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::operators::{OperatorSpec, OperatorToml, ScalarRepr};
use crate::spectra::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Orbit,
    Recur,
    CtypeVerify,
    SubspaceBuild,
    SubspaceVerify,
    SpectraGrid,
    ClaimRun,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Orbit,
        Scenario::Recur,
        Scenario::CtypeVerify,
        Scenario::SubspaceBuild,
        Scenario::SubspaceVerify,
        Scenario::SpectraGrid,
        Scenario::ClaimRun,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Orbit => "orbit",
            Scenario::Recur => "recur",
            Scenario::CtypeVerify => "ctype-verify",
            Scenario::SubspaceBuild => "subspace-build",
            Scenario::SubspaceVerify => "subspace-verify",
            Scenario::SpectraGrid => "spectra-grid",
            Scenario::ClaimRun => "claim-run",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL.into_iter().find(|sc| sc.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.as_str()).collect();
            format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Start vector of a scan. Exactly one of the fields must be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// The coordinate vector `e_k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
    /// `[[index, value], …]`; a value is a number or `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparse: Option<Vec<(usize, ScalarRepr)>>,
    /// A seeded random vector; see [`RecurSection::random`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitExpect {
    Diverges,
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    /// Last power `N` scanned.
    pub steps: u64,
    pub initial: InitialSpec,
    /// Threshold `M` of the divergence scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<OrbitExpect>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurExpect {
    /// Every start vector returns at least once.
    Returns,
    /// No start vector returns.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    Whole,
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurSection {
    pub steps: u64,
    pub eps: f64,
    /// Explicit start vectors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<InitialSpec>,
    /// Number of seeded random start vectors. On a direct sum both halves are
    /// drawn and normalized separately, so the right half is never zero.
    #[serde(default)]
    pub random: usize,
    pub expect: RecurExpect,
    /// Evaluate the unit-disc gate on this part of the operator and record
    /// whether it agrees with the scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_component: Option<Component>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_gate: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CTypeVerifySection {
    #[serde(default = "default_second_option_count")]
    pub second_option_count: usize,
    /// `M ≥ sup |w_j|`; defaults to the largest stored weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub first_option_lambdas: Vec<ScalarRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_option_max_count: Option<usize>,
    #[serde(default = "default_witness_threshold")]
    pub witness_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_witness: Option<bool>,
    /// Check strict growth of `|v_N| |P_N|` along the fibers `l ≤ chaos_fibers`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chaos_fibers: Option<usize>,
}

fn default_second_option_count() -> usize {
    4
}

fn default_witness_threshold() -> f64 {
    crate::spectra::DEFAULT_WITNESS_THRESHOLD
}

impl Default for CTypeVerifySection {
    fn default() -> Self {
        CTypeVerifySection {
            second_option_count: default_second_option_count(),
            m_bound: None,
            first_option_lambdas: Vec::new(),
            first_option_max_count: None,
            witness_threshold: default_witness_threshold(),
            expect_witness: None,
            chaos_fibers: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuildMethod {
    SecondOption,
    Claim,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildSection {
    #[serde(default = "default_method")]
    pub method: BuildMethod,
    /// Number of generators (Second Option) or recursion steps (Claim).
    pub count: usize,
    /// `M ≥ sup |w_j|`; defaults to the largest stored weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<f64>,
    /// Largest power offered to the Claim on non-C-type operators, which use
    /// the sequence `1, 2, …, k_max`.
    #[serde(default = "default_k_max")]
    pub k_max: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSection {
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_method() -> BuildMethod {
    BuildMethod::SecondOption
}

fn default_k_max() -> u64 {
    64
}

fn default_samples() -> usize {
    20
}

fn default_eps() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Certificate path, relative to the config file.
    pub cert: PathBuf,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Section size `D`.
    pub dim: usize,
    pub grid: GridSpec,
    /// Require `σ_min ≤ inside_max` wherever `|μ| ≤ inside_radius`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inside_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inside_max: Option<f64>,
    /// Require `σ_min ≥ |μ| − ‖A‖ − 1e−9` wherever `|μ| ≥ outside_radius`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outside_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_gate: Option<bool>,
}

/// One TOML file: an operator, a seed and one table per scenario it supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorToml>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recur: Option<RecurSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ctype_verify: Option<CTypeVerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace_build: Option<BuildSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace_verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra_grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim_run: Option<ClaimSection>,
    /// Directory that relative paths resolve against; set by [`ScenarioConfig::load`].
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        toml::from_str(s).map_err(|e| HarnessError::Config { path: PathBuf::from("<inline>"), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        let mut cfg: ScenarioConfig = toml::from_str(&text)
            .map_err(|e| HarnessError::Config { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Canonical TOML re-serialization; the digest is taken over this text, so
    /// formatting and comments in the source file do not change it.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        crate::operators::hex_string(&Sha256::digest(self.canonical_toml().as_bytes()))
    }

    pub fn has_section(&self, scenario: Scenario) -> bool {
        match scenario {
            Scenario::Orbit => self.orbit.is_some(),
            Scenario::Recur => self.recur.is_some(),
            Scenario::CtypeVerify => true,
            Scenario::SubspaceBuild => self.subspace_build.is_some(),
            Scenario::SubspaceVerify => self.subspace_verify.is_some(),
            Scenario::SpectraGrid => self.spectra_grid.is_some(),
            Scenario::ClaimRun => self.claim_run.is_some(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn operator_spec(&self) -> Result<OperatorSpec, HarnessError> {
        let t = self.operator.as_ref().ok_or_else(|| HarnessError::Config {
            path: self.base_dir.clone().unwrap_or_default(),
            message: "missing [operator] table".into(),
        })?;
        Ok(OperatorSpec::from_toml(t)?)
    }
}
