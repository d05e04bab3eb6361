//! Orbits, return times and exact periods.

use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::operators::{max_iter, CTypeData, OperatorSpec};
use crate::seqspace::TruncVec;

/// Norms above this are treated as overflow and end a scan.
pub const DIVERGENCE_CAP: f64 = 1e300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub spec_digest: String,
    pub initial: TruncVec,
    pub n: Vec<u64>,
    pub norms: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Set when a norm passed [`DIVERGENCE_CAP`]; the scan stopped there.
    pub diverged: bool,
}

impl OrbitRecord {
    /// `n,norm,residual` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,norm,residual\n");
        for ((n, a), r) in self.n.iter().zip(&self.norms).zip(&self.residuals) {
            out.push_str(&format!("{n},{a:e},{r:e}\n"));
        }
        out
    }
}

fn check_scan(n: u64) -> Result<(), DynamicsError> {
    let cap = max_iter();
    if n > cap {
        return Err(DynamicsError::ScanTooLong { n, cap });
    }
    Ok(())
}

/// Records `‖T^n x‖` and `‖T^n x − x‖` for `n = 0..=steps`.
pub fn orbit_scan(spec: &OperatorSpec, x: &TruncVec, steps: u64) -> Result<OrbitRecord, DynamicsError> {
    check_scan(steps)?;
    let mut rec = OrbitRecord {
        spec_digest: spec.digest(),
        initial: x.clone(),
        n: vec![0],
        norms: vec![x.norm()],
        residuals: vec![0.0],
        diverged: false,
    };
    let mut cur = x.clone();
    for n in 1..=steps {
        cur = spec.apply(&cur)?;
        let nrm = cur.norm();
        if !nrm.is_finite() || nrm > DIVERGENCE_CAP {
            rec.diverged = true;
            break;
        }
        rec.n.push(n);
        rec.norms.push(nrm);
        rec.residuals.push(cur.sub(x)?.norm());
    }
    Ok(rec)
}

/// All `1 ≤ n ≤ steps` with `‖T^n x − x‖ < eps·‖x‖`, ascending.
pub fn return_times(spec: &OperatorSpec, x: &TruncVec, steps: u64, eps: f64) -> Result<Vec<u64>, DynamicsError> {
    if x.is_zero() {
        return Err(DynamicsError::ZeroVector);
    }
    let rec = orbit_scan(spec, x, steps)?;
    let threshold = eps * x.norm();
    Ok(rec.n.iter().zip(&rec.residuals).skip(1).filter(|(_, &r)| r < threshold).map(|(&n, _)| n).collect())
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u128, b: u128) -> Result<u128, DynamicsError> {
    (a / gcd(a, b)).checked_mul(b).ok_or(DynamicsError::PeriodOverflow)
}

/// `lcm{2 L_n : n ∈ blocks}`: every vector supported in these blocks is a
/// fixed point of `T_{w,b}^{period}`.
pub fn exact_period(ct: &CTypeData, blocks: &[usize]) -> Result<u128, DynamicsError> {
    if blocks.is_empty() {
        return Err(DynamicsError::EmptySupport);
    }
    let stored = ct.num_blocks();
    let mut p = 1u128;
    for &n in blocks {
        if n >= stored {
            return Err(DynamicsError::BlockNotStored { block: n, stored });
        }
        p = lcm(p, 2 * ct.block_len(n) as u128)?;
    }
    Ok(p)
}

/// `k_1 < k_2 < … < k_{n_blocks}` with `T_{w,b}^{k_m}` fixing every vector
/// supported in blocks `0..m`. `k_m` is the period of those blocks, bumped
/// to its next multiple when it would not exceed `k_{m−1}`.
pub fn quasi_rigidity_witness(ct: &CTypeData, n_blocks: usize) -> Result<Vec<u64>, DynamicsError> {
    let stored = ct.num_blocks();
    if n_blocks > stored {
        return Err(DynamicsError::BlockNotStored { block: n_blocks - 1, stored });
    }
    let mut out: Vec<u64> = Vec::with_capacity(n_blocks);
    let mut period = 1u128;
    for m in 1..=n_blocks {
        period = lcm(period, 2 * ct.block_len(m - 1) as u128)?;
        let mut k = period;
        if let Some(&prev) = out.last() {
            let prev = prev as u128;
            if k <= prev {
                k = (prev / period + 1).checked_mul(period).ok_or(DynamicsError::PeriodOverflow)?;
            }
        }
        out.push(u64::try_from(k).map_err(|_| DynamicsError::PeriodOverflow)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub crossed: bool,
    pub first_crossing: Option<u64>,
    /// Norms never decrease over the last quarter of the scan.
    pub increasing_tail: bool,
    pub max_norm: f64,
    pub steps_scanned: u64,
}

/// Whether `‖T^n x‖ ≥ threshold` for some `n ≤ steps`. A finite-horizon
/// surrogate for `‖T^n x‖ → ∞`; never a limit claim.
pub fn divergence_scan(
    spec: &OperatorSpec,
    x: &TruncVec,
    steps: u64,
    threshold: f64,
) -> Result<DivergenceReport, DynamicsError> {
    let rec = orbit_scan(spec, x, steps)?;
    let first_crossing = rec.n.iter().zip(&rec.norms).find(|(_, &a)| a >= threshold).map(|(&n, _)| n);
    let crossed = first_crossing.is_some() || rec.diverged;
    let tail_start = rec.norms.len() - rec.norms.len() / 4 - 1;
    let increasing_tail = rec.diverged || rec.norms[tail_start..].windows(2).all(|w| w[1] >= w[0]);
    Ok(DivergenceReport {
        crossed,
        first_crossing: first_crossing.or(if rec.diverged { Some(*rec.n.last().unwrap() + 1) } else { None }),
        increasing_tail,
        max_norm: rec.norms.iter().fold(0.0, |m: f64, &a| m.max(a)),
        steps_scanned: *rec.n.last().unwrap(),
    })
}
