//! Parameters `(w, φ, b, v)` of C-type operators.
//!
//! Blocks are the index ranges `[b_n, b_{n+1})`. Only the first `m` blocks
//! are stored; the truncation dimension is `b_m`. Weights `w_j` are stored
//! for `1 ≤ j < b_m` and couplings `v_n` for `1 ≤ n < m`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::OperatorError;

/// Built-in parameter families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CTypePreset {
    /// `L_0 = 1`, `L_n = 2^n`; weight 2 on the first `⌊(L_n − 1)/2⌋`
    /// interior indices of each block and 1 elsewhere; `v_n = 2^{-n}`.
    Default,
    /// `L_0 = 1`, `L_n = 2^n`; weight 2 on the first `min(2n, L_n − 1)`
    /// interior indices, so `|v_N|·P_N = 2^N` grows along every fiber of φ.
    ChaosWitness,
}

/// A single failed admissibility constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub message: String,
}

impl Violation {
    fn new(constraint: &str, message: impl Into<String>) -> Self {
        Violation { constraint: constraint.to_string(), message: message.into() }
    }
}

/// Unvalidated C-type parameters as read from configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct CTypeParams {
    /// `b_0, …, b_m`.
    pub boundaries: Vec<usize>,
    /// `φ(0), …, φ(m−1)`.
    pub phi: Vec<usize>,
    /// `w_1, …, w_{b_m − 1}`.
    pub weights: Vec<Complex64>,
    /// `v_1, …, v_{m−1}`.
    pub v: Vec<Complex64>,
    /// Fibers `φ^{-1}(l)` are checked for `l ≤ fiber_check_max`; defaults to
    /// the largest stored value of φ.
    pub fiber_check_max: Option<usize>,
}

/// φ(n) = n − 2^⌊log₂ n⌋ for n ≥ 1, φ(0) = 0. Every fiber is infinite.
pub fn dyadic_phi(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n - (1usize << (usize::BITS - 1 - n.leading_zeros()))
    }
}

impl CTypeParams {
    pub fn preset(preset: CTypePreset, blocks: usize) -> Self {
        let lengths: Vec<usize> = (0..blocks).map(|n| if n == 0 { 1 } else { 1usize << n }).collect();
        let mut boundaries = vec![0usize];
        for &l in &lengths {
            boundaries.push(boundaries.last().unwrap() + l);
        }
        let mut weights = Vec::new();
        for (n, &l) in lengths.iter().enumerate() {
            // Block n contributes w_{b_n + 1..b_{n+1} − 1} (interior) and, for
            // n ≥ 1, the entry w_{b_n} that closes the previous block.
            if n > 0 {
                weights.push(Complex64::new(1.0, 0.0));
            }
            let interior = l - 1;
            let twos = match preset {
                CTypePreset::Default => interior / 2,
                CTypePreset::ChaosWitness => (2 * n).min(interior),
            };
            for i in 0..interior {
                weights.push(Complex64::new(if i < twos { 2.0 } else { 1.0 }, 0.0));
            }
        }
        let phi = (0..blocks).map(dyadic_phi).collect();
        let v = (1..blocks).map(|n| Complex64::new((-(n as f64)).exp2(), 0.0)).collect();
        CTypeParams { boundaries, phi, weights, v, fiber_check_max: None }
    }

    pub fn num_blocks(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    /// Every admissibility constraint that fails; empty iff admissible.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let b = &self.boundaries;
        if b.len() < 2 {
            out.push(Violation::new("blocks", "at least one block (two boundaries) is required"));
            return out;
        }
        if b[0] != 0 {
            out.push(Violation::new("b_0 = 0", format!("b_0 = {}", b[0])));
        }
        for n in 0..b.len() - 1 {
            if b[n + 1] <= b[n] {
                out.push(Violation::new(
                    "b strictly increasing",
                    format!("b_{} = {} <= b_{} = {}", n + 1, b[n + 1], n, b[n]),
                ));
            }
        }
        if !out.is_empty() {
            return out;
        }
        let m = b.len() - 1;
        let len = |n: usize| b[n + 1] - b[n];

        if self.phi.len() != m {
            out.push(Violation::new(
                "phi table",
                format!("phi has {} entries, {} blocks stored", self.phi.len(), m),
            ));
        } else {
            if self.phi[0] != 0 {
                out.push(Violation::new("phi(0) = 0", format!("phi(0) = {}", self.phi[0])));
            }
            for n in 1..m {
                if self.phi[n] >= n {
                    out.push(Violation::new("phi(n) < n", format!("phi({n}) = {}", self.phi[n])));
                }
            }
            for n in 1..m {
                let pn = self.phi[n];
                if pn < m && pn < n {
                    let base = 2 * len(pn);
                    if len(n) % base != 0 {
                        out.push(Violation::new(
                            "divisibility",
                            format!(
                                "L_{n} = {} is not a multiple of 2 L_{pn} = {base}",
                                len(n)
                            ),
                        ));
                    }
                }
            }
            // With a single stored block there is no fiber to inspect.
            let max_l = self.fiber_check_max.or_else(|| self.phi[1..].iter().copied().max());
            for l in max_l.map_or(0..0, |top| 0..top + 1) {
                if !(1..m).any(|n| self.phi[n] == l) {
                    out.push(Violation::new(
                        "phi fibers nonempty",
                        format!("phi^-1({l}) has no element among stored blocks 1..{}", m - 1),
                    ));
                }
            }
        }

        let dim = b[m];
        if self.weights.len() != dim - 1 {
            out.push(Violation::new(
                "weights table",
                format!("{} weights given, w_1..w_{} needs {}", self.weights.len(), dim - 1, dim - 1),
            ));
        } else {
            for (i, w) in self.weights.iter().enumerate() {
                let a = w.norm();
                if !a.is_finite() || a == 0.0 {
                    out.push(Violation::new(
                        "0 < inf|w_j| <= sup|w_j| < inf",
                        format!("|w_{}| = {a}", i + 1),
                    ));
                }
            }
            if out.iter().all(|v| v.constraint != "0 < inf|w_j| <= sup|w_j| < inf") {
                for n in 0..m {
                    let p: Complex64 = (b[n] + 1..b[n + 1]).map(|j| self.weights[j - 1]).product();
                    if !(p.norm().is_finite() && p.norm() > 0.0) {
                        out.push(Violation::new(
                            "block product finite",
                            format!("product of w over block {n} is {}", p.norm()),
                        ));
                    }
                }
            }
        }

        if self.v.len() != m - 1 {
            out.push(Violation::new(
                "v table",
                format!("{} couplings given, v_1..v_{} needs {}", self.v.len(), m - 1, m - 1),
            ));
        } else {
            for (i, v) in self.v.iter().enumerate() {
                let a = v.norm();
                if !a.is_finite() || a == 0.0 {
                    out.push(Violation::new("v_n nonzero", format!("|v_{}| = {a}", i + 1)));
                }
            }
            for i in 1..self.v.len() {
                if self.v[i].norm() > self.v[i - 1].norm() {
                    out.push(Violation::new(
                        "sum |v_n| < inf",
                        format!(
                            "|v_{}| = {} increases over |v_{}| = {} (summability witness needs nonincreasing |v_n|)",
                            i + 1,
                            self.v[i].norm(),
                            i,
                            self.v[i - 1].norm()
                        ),
                    ));
                }
            }
        }
        out
    }

    pub fn build(self) -> Result<CTypeData, OperatorError> {
        let violations = self.violations();
        if !violations.is_empty() {
            let text: Vec<String> =
                violations.iter().map(|v| format!("[{}] {}", v.constraint, v.message)).collect();
            return Err(OperatorError::InvalidCType(text.join("; ")));
        }
        let m = self.num_blocks();
        let b = &self.boundaries;
        let mut weights = Vec::with_capacity(b[m]);
        weights.push(Complex64::new(1.0, 0.0));
        weights.extend_from_slice(&self.weights);
        let products = (0..m).map(|n| (b[n] + 1..b[n + 1]).map(|j| weights[j]).product()).collect();
        let mut v = Vec::with_capacity(m);
        v.push(Complex64::new(0.0, 0.0));
        v.extend_from_slice(&self.v);
        Ok(CTypeData { params: self, weights, v, products, preset: None })
    }
}

/// Validated C-type parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CTypeData {
    params: CTypeParams,
    // w_j at index j; index 0 is a placeholder.
    weights: Vec<Complex64>,
    // v_n at index n; index 0 is a placeholder.
    v: Vec<Complex64>,
    products: Vec<Complex64>,
    preset: Option<(CTypePreset, usize)>,
}

impl CTypeData {
    pub fn preset(preset: CTypePreset, blocks: usize) -> Result<Self, OperatorError> {
        let mut data = CTypeParams::preset(preset, blocks).build()?;
        data.preset = Some((preset, blocks));
        Ok(data)
    }

    pub fn default_config(blocks: usize) -> Result<Self, OperatorError> {
        Self::preset(CTypePreset::Default, blocks)
    }

    pub fn params(&self) -> &CTypeParams {
        &self.params
    }

    pub fn preset_origin(&self) -> Option<(CTypePreset, usize)> {
        self.preset
    }

    pub fn num_blocks(&self) -> usize {
        self.params.num_blocks()
    }

    /// Truncation dimension `b_m`.
    pub fn dim(&self) -> usize {
        self.params.boundaries[self.num_blocks()]
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.params.boundaries
    }

    pub fn boundary(&self, n: usize) -> usize {
        self.params.boundaries[n]
    }

    /// `L_n = b_{n+1} − b_n`.
    pub fn block_len(&self, n: usize) -> usize {
        self.params.boundaries[n + 1] - self.params.boundaries[n]
    }

    pub fn phi(&self, n: usize) -> usize {
        self.params.phi[n]
    }

    /// `w_j` for `1 ≤ j < b_m`.
    pub fn weight(&self, j: usize) -> Complex64 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights[1..]
    }

    /// `v_n` for `1 ≤ n < m`.
    pub fn coupling(&self, n: usize) -> Complex64 {
        self.v[n]
    }

    /// `P_n = ∏_{j=b_n+1}^{b_{n+1}−1} w_j` (1 for a block of length one).
    pub fn block_product(&self, n: usize) -> Complex64 {
        self.products[n]
    }

    /// `log₂ |P_n|` summed term by term.
    pub fn log2_abs_block_product(&self, n: usize) -> f64 {
        (self.boundary(n) + 1..self.boundary(n + 1)).map(|j| self.weights[j].norm().log2()).sum()
    }

    pub fn sup_weight(&self) -> f64 {
        self.weights().iter().fold(0.0, |m, w| m.max(w.norm()))
    }

    pub fn inf_weight(&self) -> f64 {
        self.weights().iter().fold(f64::INFINITY, |m, w| m.min(w.norm()))
    }

    /// Block containing index `k < b_m`.
    pub fn block_of(&self, k: usize) -> usize {
        debug_assert!(k < self.dim());
        self.params.boundaries.partition_point(|&b| b <= k) - 1
    }

    /// Whether `dim` is one of the stored boundaries `b_1, …, b_m`.
    pub fn blocks_for_dim(&self, dim: usize) -> Option<usize> {
        self.params.boundaries.iter().position(|&b| b == dim).filter(|&m| m > 0)
    }

    pub fn is_real(&self) -> bool {
        self.weights.iter().chain(self.v.iter()).all(|c| c.im == 0.0)
    }

    /// The data restricted to the first `blocks` blocks.
    pub fn truncated(&self, blocks: usize) -> Result<CTypeData, OperatorError> {
        if blocks == 0 || blocks > self.num_blocks() {
            return Err(OperatorError::InvalidCType(format!(
                "cannot truncate {} stored blocks to {blocks}",
                self.num_blocks()
            )));
        }
        let dim = self.boundary(blocks);
        let params = CTypeParams {
            boundaries: self.params.boundaries[..=blocks].to_vec(),
            phi: self.params.phi[..blocks].to_vec(),
            weights: self.params.weights[..dim - 1].to_vec(),
            v: self.params.v[..blocks - 1].to_vec(),
            fiber_check_max: self.params.fiber_check_max,
        };
        let mut data = params.build()?;
        data.preset = self.preset.map(|(p, _)| (p, blocks));
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_phi_values() {
        let got: Vec<usize> = (0..9).map(dyadic_phi).collect();
        assert_eq!(got, vec![0, 0, 0, 1, 0, 1, 2, 3, 0]);
        for n in 1..200 {
            assert!(dyadic_phi(n) < n);
        }
    }

    #[test]
    fn default_preset_is_admissible() {
        let p = CTypeParams::preset(CTypePreset::Default, 12);
        assert!(p.violations().is_empty(), "{:?}", p.violations());
        let data = p.build().unwrap();
        assert_eq!(data.dim(), 4095);
        assert_eq!(data.block_len(0), 1);
        assert_eq!(data.block_len(5), 32);
        // P_n = 2^(2^(n-1) - 1)
        for n in 1..12 {
            let want = ((1u64 << (n - 1)) - 1) as f64;
            assert_eq!(data.log2_abs_block_product(n), want);
            assert_eq!(data.block_product(n).re, want.exp2());
        }
        assert_eq!(data.block_product(0).re, 1.0);
        assert!(data.block_product(11).re.is_finite());
    }

    #[test]
    fn chaos_witness_products() {
        let data = CTypeData::preset(CTypePreset::ChaosWitness, 12).unwrap();
        assert_eq!(data.block_product(1).re, 2.0);
        assert_eq!(data.block_product(2).re, 8.0);
        assert_eq!(data.block_product(5).re, 1024.0);
    }

    #[test]
    fn divisibility_violation_reported() {
        let p = CTypeParams {
            boundaries: vec![0, 2, 5],
            phi: vec![0, 0],
            weights: vec![Complex64::new(1.0, 0.0); 4],
            v: vec![Complex64::new(0.5, 0.0)],
            fiber_check_max: None,
        };
        let v = p.violations();
        assert!(v.iter().any(|x| x.constraint == "divisibility"), "{v:?}");
    }

    #[test]
    fn phi_violation_reported() {
        let mut p = CTypeParams::preset(CTypePreset::Default, 5);
        p.phi[3] = 3;
        let v = p.violations();
        assert!(v.iter().any(|x| x.constraint == "phi(n) < n"), "{v:?}");
    }

    #[test]
    fn zero_weight_and_increasing_v_reported() {
        let mut p = CTypeParams::preset(CTypePreset::Default, 4);
        p.weights[2] = Complex64::new(0.0, 0.0);
        p.v[2] = Complex64::new(10.0, 0.0);
        let v = p.violations();
        assert!(v.iter().any(|x| x.constraint.starts_with("0 < inf")));
        assert!(v.iter().any(|x| x.constraint == "sum |v_n| < inf"));
        assert!(p.build().is_err());
    }

    #[test]
    fn block_lookup_and_truncation() {
        let data = CTypeData::default_config(6).unwrap();
        assert_eq!(data.boundaries(), &[0, 1, 3, 7, 15, 31, 63]);
        assert_eq!(data.block_of(0), 0);
        assert_eq!(data.block_of(2), 1);
        assert_eq!(data.block_of(3), 2);
        assert_eq!(data.block_of(62), 5);
        assert_eq!(data.blocks_for_dim(15), Some(4));
        assert_eq!(data.blocks_for_dim(16), None);
        let t = data.truncated(3).unwrap();
        assert_eq!(t.dim(), 7);
        assert_eq!(t.preset_origin(), Some((CTypePreset::Default, 3)));
    }
}
