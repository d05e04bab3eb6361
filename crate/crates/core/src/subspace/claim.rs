use super::{
    ledger_bound, CertMode, Condition, DenseFamily, DualNormBound, LedgerEntry, SubspaceCert, CERT_SCHEMA_VERSION,
};
use crate::error::{OperatorError, SubspaceError};
use crate::operators::OperatorSpec;
use crate::seqspace::TruncVec;

pub const MIN_RULE_WARNING: &str = "f_n is chosen with ||f_n - e_n|| below the minimum of 1/(2^(n+1) K) and the \
     continuity margin; taking the larger of the two would not guarantee conditions (i) and (ii) together";

#[derive(Clone, Copy, Debug)]
pub struct ClaimOptions {
    pub steps: usize,
}

/// Runs the recursion for `opts.steps` steps.
///
/// Step `s` picks `f_s` from `family` within `min(1/(2^{s+1}K), ε_s)` of
/// `e_s`, where `ε_s = min_{j<s} 2^{−(j+s)}/N_j` and `N_j` is a rigorous
/// upper bound for `‖T^{l_j}‖`; then takes the smallest `l_s > l_{s−1}` in
/// `k_seq` with `‖T^{l_s} f_n − f_n‖ < 2^{−(s+n)}` for every `n ≤ s`.
pub fn claim_construct(
    spec: &OperatorSpec,
    k_seq: &[u64],
    e_basis: &[TruncVec],
    family: &dyn DenseFamily,
    dual: &DualNormBound,
    opts: ClaimOptions,
) -> Result<SubspaceCert, SubspaceError> {
    let steps = opts.steps;
    if e_basis.len() < steps || dual.per_vector.len() < steps {
        return Err(SubspaceError::BasisTooShort { have: e_basis.len().min(dual.per_vector.len()), need: steps });
    }
    let k = dual.k;
    let mut l: Vec<u64> = Vec::with_capacity(steps);
    let mut power_bounds: Vec<f64> = Vec::with_capacity(steps);
    let mut f: Vec<TruncVec> = Vec::with_capacity(steps);
    let mut g: Vec<TruncVec> = Vec::with_capacity(steps);
    let mut ledger = Vec::new();

    for s in 1..=steps {
        let e = &e_basis[s - 1];
        let eps = (1..s)
            .map(|j| {
                let nj = power_bounds[j - 1];
                if nj > 0.0 {
                    ledger_bound(Condition::Ii, j, s, k) / nj
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min);
        let bound_i = ledger_bound(Condition::I, 0, s, k);
        let delta = bound_i.min(eps);
        let fs = family.approximate(e, delta)?;
        let gs = fs.sub(e)?;
        ledger.push(LedgerEntry { condition: Condition::I, j: 0, n: s, value: gs.norm(), bound: bound_i });
        for j in 1..s {
            let value = spec.apply_power(&gs, l[j - 1])?.norm();
            let bound = ledger_bound(Condition::Ii, j, s, k);
            if !(value < bound) {
                return Err(SubspaceError::BoundViolated { condition: "ii", j, n: s, value, bound });
            }
            ledger.push(LedgerEntry { condition: Condition::Ii, j, n: s, value, bound });
        }
        f.push(fs);
        g.push(gs);

        let after = l.last().copied().unwrap_or(0);
        let mut chosen = None;
        for &cand in k_seq.iter().filter(|&&c| c > after) {
            let mut row = Vec::with_capacity(s);
            let mut ok = true;
            for (n, fn_) in f.iter().enumerate().map(|(i, v)| (i + 1, v)) {
                let value = spec.apply_power(fn_, cand)?.sub(fn_)?.norm();
                let bound = ledger_bound(Condition::Iii, s, n, k);
                if !(value < bound) {
                    ok = false;
                    break;
                }
                row.push(LedgerEntry { condition: Condition::Iii, j: s, n, value, bound });
            }
            if ok {
                chosen = Some((cand, row));
                break;
            }
        }
        let (ls, row) = chosen.ok_or(SubspaceError::NoAdmissiblePower { step: s, after })?;
        ledger.extend(row);
        l.push(ls);
        power_bounds.push(spec.power_norm_upper_bound(ls, None)?);
    }

    let perturbation_sum: f64 = (0..steps).map(|n| dual.per_vector[n] * g[n].norm()).sum();
    if !(perturbation_sum < 0.5) {
        return Err(SubspaceError::PerturbationTooLarge(perturbation_sum));
    }

    let mut restricted_norms = Vec::with_capacity(steps);
    let mut restricted_exact = Vec::with_capacity(steps);
    for j in 1..=steps {
        let tail = &e_basis[j..steps];
        if tail.is_empty() {
            restricted_norms.push(0.0);
            restricted_exact.push(true);
            continue;
        }
        let coords: Option<Vec<usize>> = tail
            .iter()
            .map(|v| match v.support().as_slice() {
                [i] => Some(*i),
                _ => None,
            })
            .collect();
        let exact = match coords {
            Some(c) => match spec.restricted_norm_exact(l[j - 1], &c) {
                Ok(v) => Some(v),
                Err(OperatorError::DisjointnessViolated { .. }) => None,
                Err(e) => return Err(e.into()),
            },
            None => None,
        };
        match exact {
            Some(v) => {
                restricted_norms.push(v);
                restricted_exact.push(true);
            }
            None => {
                restricted_norms.push(power_bounds[j - 1]);
                restricted_exact.push(false);
            }
        }
    }

    Ok(SubspaceCert {
        schema_version: CERT_SCHEMA_VERSION,
        mode: CertMode::ClaimConstruction,
        operator: spec.to_toml(),
        operator_digest: spec.digest(),
        k_seq: k_seq.to_vec(),
        powers: l,
        blocks: Vec::new(),
        basis: e_basis[..steps].to_vec(),
        generators: f,
        dual_norms: dual.per_vector[..steps].to_vec(),
        dual_norm_bound: k,
        ledger,
        perturbation_sum,
        restricted_norms,
        restricted_exact,
        warnings: vec![MIN_RULE_WARNING.to_string(), format!("dense family: {}", family.describe())],
    })
}
