use super::{CertMode, SubspaceCert, CERT_SCHEMA_VERSION};
use crate::error::SubspaceError;
use crate::operators::{CTypeData, OperatorKind, OperatorSpec};
use crate::seqspace::{FieldMode, TruncVec};

// Slack for comparing base-2 logarithms of exact products.
const LOG_SLACK: f64 = 1e-9;

/// For each `k_n`, the smallest block `l_n > l_{n−1}` (with `l_0 = 0`) such
/// that `k_n − 1 < L_{l_n}` and `M^{k_n − 1} ≤ |P_{l_n}|`. Products are
/// compared in log space.
pub fn second_option_select(ct: &CTypeData, k_seq: &[u64], m_bound: f64) -> Result<Vec<usize>, SubspaceError> {
    let sup = ct.sup_weight();
    if !(m_bound >= sup) {
        return Err(SubspaceError::BoundBelowSupWeight { m: m_bound, sup });
    }
    let log_m = m_bound.log2();
    let blocks = ct.num_blocks();
    let mut out = Vec::with_capacity(k_seq.len());
    let mut prev = 0usize;
    for (idx, &k) in k_seq.iter().enumerate() {
        let exponent = k.saturating_sub(1) as f64;
        let need_log = exponent * log_m;
        let found = (prev + 1..blocks).find(|&l| {
            let len_ok = (k.saturating_sub(1) as u128) < ct.block_len(l) as u128;
            let have = ct.log2_abs_block_product(l);
            len_ok && need_log <= have + LOG_SLACK * have.abs().max(1.0)
        });
        match found {
            Some(l) => {
                out.push(l);
                prev = l;
            }
            None => {
                return Err(SubspaceError::NotFoundWithinTruncation {
                    n: idx + 1,
                    k,
                    required_len: k,
                    required_log2_product: need_log,
                })
            }
        }
    }
    Ok(out)
}

/// Indices `b_{l+1} − 1` of the generators for the given blocks.
pub fn second_option_generator_indices(ct: &CTypeData, blocks: &[usize]) -> Vec<usize> {
    blocks.iter().map(|&l| ct.boundary(l + 1) - 1).collect()
}

/// Certificate for `E_n = span{e_{b_{l_m+1}−1} : m ≥ n}` with `‖T^{k_n}|_{E_n}‖`
/// computed exactly. `spec` must be a C-type shift `T_{w,b}`.
pub fn second_option_certificate(
    spec: &OperatorSpec,
    k_seq: &[u64],
    m_bound: f64,
    count: usize,
) -> Result<SubspaceCert, SubspaceError> {
    let ct = match spec.kind() {
        OperatorKind::CTypeWB(ct) => ct.clone(),
        _ => {
            return Err(SubspaceError::InvalidCertificate(
                "the second-option construction needs a ctype-wb operator".into(),
            ))
        }
    };
    if k_seq.len() < count {
        return Err(SubspaceError::BasisTooShort { have: k_seq.len(), need: count });
    }
    let powers = k_seq[..count].to_vec();
    let blocks = second_option_select(&ct, &powers, m_bound)?;
    let idx = second_option_generator_indices(&ct, &blocks);
    let field = if spec.is_real() { FieldMode::Real } else { FieldMode::Complex };
    let generators = idx
        .iter()
        .map(|&i| TruncVec::basis(spec.dim(), i, field, spec.norm_mode()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut restricted_norms = Vec::with_capacity(count);
    for n in 0..count {
        restricted_norms.push(spec.restricted_norm_exact(powers[n], &idx[n..])?);
    }
    Ok(SubspaceCert {
        schema_version: CERT_SCHEMA_VERSION,
        mode: CertMode::CTypeSecondOption,
        operator: spec.to_toml(),
        operator_digest: spec.digest(),
        k_seq: k_seq.to_vec(),
        powers,
        blocks,
        basis: generators.clone(),
        generators,
        dual_norms: vec![1.0; count],
        dual_norm_bound: 2.0,
        ledger: Vec::new(),
        perturbation_sum: 0.0,
        restricted_exact: vec![true; count],
        restricted_norms,
        warnings: Vec::new(),
    })
}
