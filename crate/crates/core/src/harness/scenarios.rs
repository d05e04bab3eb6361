use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{
    BuildMethod, ClaimSection, Component, InitialSpec, OrbitExpect, RecurExpect, ScenarioConfig,
};
use super::Output;
use crate::dynamics::{divergence_scan, orbit_scan, quasi_rigidity_witness, return_times, DivergenceReport};
use crate::error::{HarnessError, SubspaceError};
use crate::linalg::DenseMatrix;
use crate::operators::{sparse_add, CTypeData, OperatorKind, OperatorSpec, SparseVec};
use crate::report::{Check, Relation, Report};
use crate::seqspace::{FieldMode, TruncVec};
use crate::spectra::{
    chaos_growth_witness, essential_spectrum_analytic, finite_section, inverse_unboundedness_witness,
    point_spectrum_blocks, pseudospectrum_grid, unit_disc_gate, InverseWitness, SpectrumDescriptor,
};
use crate::subspace::{
    claim_construct, dual_norm_bound, second_option_certificate, second_option_generator_indices,
    second_option_select, verify_recurrent_subspace, BlockTruncations, ClaimOptions, DenseFamily, SubspaceCert,
    VerifyOptions, WholeSpace,
};

const PERIOD_TOL: f64 = 1e-10;
const SECOND_OPTION_SLACK: f64 = 1e-12;
const RETURN_LIST_CAP: usize = 32;

fn config_error(cfg: &ScenarioConfig, message: impl Into<String>) -> HarnessError {
    HarnessError::Config { path: cfg.base_dir.clone().unwrap_or_default(), message: message.into() }
}

fn field_of(spec: &OperatorSpec) -> FieldMode {
    if spec.is_real() {
        FieldMode::Real
    } else {
        FieldMode::Complex
    }
}

fn random_part(spec: &OperatorSpec, dim: usize, rng: &mut ChaCha8Rng) -> Result<TruncVec, HarnessError> {
    let real = spec.is_real();
    let coeffs = (0..dim)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            Complex64::new(re, im)
        })
        .collect();
    let v = TruncVec::new(coeffs, field_of(spec), spec.norm_mode())?;
    Ok(v.normalized()?)
}

/// A seeded random unit vector; on a direct sum each half is a unit vector.
fn random_vector(spec: &OperatorSpec, rng: &mut ChaCha8Rng) -> Result<TruncVec, HarnessError> {
    match spec.kind() {
        OperatorKind::DirectSum(l, r) => {
            let left = random_part(spec, l.dim(), rng)?;
            let right = random_part(spec, r.dim(), rng)?;
            Ok(left.concat(&right)?)
        }
        _ => random_part(spec, spec.dim(), rng),
    }
}

fn initial_vector(spec: &OperatorSpec, init: &InitialSpec, rng: &mut ChaCha8Rng) -> Result<TruncVec, HarnessError> {
    let field = field_of(spec);
    if let Some(k) = init.basis {
        return Ok(TruncVec::basis(spec.dim(), k, field, spec.norm_mode())?);
    }
    if let Some(entries) = &init.sparse {
        let e: Vec<(usize, Complex64)> = entries.iter().map(|(i, v)| (*i, v.value())).collect();
        return Ok(TruncVec::from_sparse(spec.dim(), &e, field, spec.norm_mode())?);
    }
    random_vector(spec, rng)
}

pub(super) fn orbit(cfg: &ScenarioConfig, out: &Output, report: &mut Report) -> Result<(), HarnessError> {
    let sec = cfg.orbit.as_ref().expect("section checked");
    let spec = cfg.operator_spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = initial_vector(&spec, &sec.initial, &mut rng)?;
    let rec = orbit_scan(&spec, &x, sec.steps)?;
    out.json("orbit.json", &rec)?;
    out.text("orbit.csv", &rec.to_csv())?;
    report.push(Check::new(
        "initial residual",
        "the orbit starts at x, so ||T^0 x - x|| = 0",
        rec.residuals[0],
        Relation::Eq,
        0.0,
    ));
    if rec.diverged {
        report.warn(format!("orbit norm passed {:e}; scan stopped at n = {}", crate::dynamics::DIVERGENCE_CAP, rec.n.len() - 1));
    }
    if let Some(m) = sec.divergence_threshold {
        let d: DivergenceReport = divergence_scan(&spec, &x, sec.steps, m)?;
        out.json("divergence.json", &d)?;
        match sec.expect {
            Some(OrbitExpect::Diverges) => report.push(Check::new(
                "divergence threshold crossed",
                "||T^n x|| reaches M within the scanned horizon (finite surrogate for ||T^n x|| -> infinity)",
                d.max_norm,
                Relation::Ge,
                m,
            )),
            Some(OrbitExpect::Bounded) => report.push(Check::new(
                "orbit stays bounded",
                "||T^n x|| stays below M over the scanned horizon",
                d.max_norm,
                Relation::Lt,
                m,
            )),
            None => {}
        }
        if let Some(n) = d.first_crossing {
            report.warn(format!("first crossing of {m:e} at n = {n}; increasing tail: {}", d.increasing_tail));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReturnRecord {
    start: usize,
    norm: f64,
    count: usize,
    /// At most the first 32 return times.
    first: Vec<u64>,
}

#[derive(Serialize)]
struct GateRecord {
    component: Component,
    descriptor: SpectrumDescriptor,
    gate: bool,
}

fn component(spec: &OperatorSpec, which: Component) -> Option<&OperatorSpec> {
    match (which, spec.kind()) {
        (Component::Whole, _) => Some(spec),
        (Component::Left, OperatorKind::DirectSum(l, _)) => Some(l),
        (Component::Right, OperatorKind::DirectSum(_, r)) => Some(r),
        _ => None,
    }
}

pub(super) fn recur(cfg: &ScenarioConfig, out: &Output, report: &mut Report) -> Result<(), HarnessError> {
    let sec = cfg.recur.as_ref().expect("section checked");
    let spec = cfg.operator_spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = Vec::new();
    for init in &sec.initial {
        starts.push(initial_vector(&spec, init, &mut rng)?);
    }
    for _ in 0..sec.random {
        starts.push(random_vector(&spec, &mut rng)?);
    }
    let mut records = Vec::with_capacity(starts.len());
    for (i, x) in starts.iter().enumerate() {
        let times = return_times(&spec, x, sec.steps, sec.eps)?;
        records.push(ReturnRecord {
            start: i,
            norm: x.norm(),
            count: times.len(),
            first: times.iter().take(RETURN_LIST_CAP).copied().collect(),
        });
    }
    out.json("returns.json", &records)?;
    let total: usize = records.iter().map(|r| r.count).sum();
    let min_count = records.iter().map(|r| r.count).min().unwrap_or(0);
    let any_returns = total > 0;
    match sec.expect {
        RecurExpect::Returns => report.push(Check::new(
            "return times found",
            "every scanned start vector has some n <= N with ||T^n x - x|| < eps ||x||",
            min_count as f64,
            Relation::Ge,
            1.0,
        )),
        RecurExpect::None => report.push(Check::new(
            "no return times",
            "no scanned start vector returns: ||T^n x - x|| >= eps ||x|| for every 1 <= n <= N",
            total as f64,
            Relation::Eq,
            0.0,
        )),
    }
    if let Some(which) = sec.gate_component {
        let part = component(&spec, which)
            .ok_or_else(|| config_error(cfg, "recur.gate_component left/right needs a direct-sum operator"))?;
        let descriptor = essential_spectrum_analytic(part)?;
        let gate = unit_disc_gate(&descriptor)?;
        out.json("descriptor.json", &GateRecord { component: which, descriptor, gate })?;
        if let Some(want) = sec.expect_gate {
            report.push(Check::holds(
                "unit-disc gate",
                "sigma_e meets the closed unit disc exactly when the gate is true",
                gate == want,
            ));
        }
        report.push(Check::holds(
            "gate agrees with dynamics",
            "the gate is true exactly when the scan found returns",
            gate == any_returns,
        ));
    }
    Ok(())
}

fn sparse_diff_norm(a: &SparseVec, b: &SparseVec) -> f64 {
    let mut m: BTreeMap<usize, Complex64> = a.iter().copied().collect();
    for &(i, c) in b {
        *m.entry(i).or_default() -= c;
    }
    m.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn ctype_of(cfg: &ScenarioConfig, spec: &OperatorSpec, scenario: &str) -> Result<CTypeData, HarnessError> {
    spec.ctype_data()
        .cloned()
        .ok_or_else(|| config_error(cfg, format!("{scenario} needs a ctype-wb, ctype-full or compact-k operator")))
}

#[derive(Serialize)]
struct FirstOptionRow {
    lambda: [f64; 2],
    count: usize,
}

#[derive(Serialize)]
struct CTypeSummary {
    dim: usize,
    blocks: usize,
    block_lengths: Vec<usize>,
    quasi_rigidity_witness: Vec<u64>,
    second_option_blocks: Vec<usize>,
    second_option_generators: Vec<usize>,
    second_option_norms: Vec<f64>,
    inverse_witness: InverseWitness,
    first_option: Vec<FirstOptionRow>,
    chaos_growth: Vec<(usize, Vec<(usize, f64)>)>,
}

pub(super) fn ctype_verify(cfg: &ScenarioConfig, out: &Output, report: &mut Report) -> Result<(), HarnessError> {
    let sec = cfg.ctype_verify.clone().unwrap_or_default();
    let spec = cfg.operator_spec()?;
    let ct = ctype_of(cfg, &spec, "ctype-verify")?;
    let norm = spec.norm_mode();
    let wb = OperatorSpec::ctype_wb(ct.clone(), norm)?;
    let full = OperatorSpec::ctype_full(ct.clone(), norm)?;
    let k_op = OperatorSpec::compact_k(ct.clone(), norm)?;
    let m = ct.num_blocks();

    let violations = ct.params().violations();
    for v in &violations {
        report.warn(format!("[{}] {}", v.constraint, v.message));
    }
    report.push(Check::new(
        "ctype invariants",
        "b_0 = 0, phi(n) < n, L_n divisible by 2 L_phi(n), nonempty fibers, inf |P_n| > 0, v_n != 0",
        violations.len() as f64,
        Relation::Eq,
        0.0,
    ));

    let mut worst = 0.0_f64;
    for k in 0..ct.dim() {
        let sum = sparse_add(&wb.basis_image(k)?, &k_op.basis_image(k)?);
        worst = worst.max(sparse_diff_norm(&full.basis_image(k)?, &sum));
    }
    report.push(Check::new(
        "decomposition exact",
        "T_{w,phi,b,v} = T_{w,b} + K_{phi,v} on every basis vector",
        worst,
        Relation::Eq,
        0.0,
    ));

    let (mut period_err, mut half_err) = (0.0_f64, 0.0_f64);
    for n in 0..m {
        let b = ct.boundary(n);
        let l = ct.block_len(n) as u64;
        let e = vec![(b, Complex64::new(1.0, 0.0))];
        let neg = vec![(b, Complex64::new(-1.0, 0.0))];
        period_err = period_err.max(sparse_diff_norm(&wb.power_image(b, 2 * l)?, &e));
        half_err = half_err.max(sparse_diff_norm(&wb.power_image(b, l)?, &neg));
    }
    report.push(Check::new(
        "block period",
        "T_{w,b}^{2 L_n} e_{b_n} = e_{b_n} on every stored block",
        period_err,
        Relation::Le,
        PERIOD_TOL,
    ));
    report.push(Check::new(
        "block half period",
        "T_{w,b}^{L_n} e_{b_n} = -e_{b_n} on every stored block",
        half_err,
        Relation::Le,
        PERIOD_TOL,
    ));

    let k_seq = quasi_rigidity_witness(&ct, m)?;
    let mut qr_err = 0.0_f64;
    for (i, &km) in k_seq.iter().enumerate() {
        for n in 0..=i {
            for b in [ct.boundary(n), ct.boundary(n + 1) - 1] {
                let e = vec![(b, Complex64::new(1.0, 0.0))];
                qr_err = qr_err.max(sparse_diff_norm(&wb.power_image(b, km)?, &e));
            }
        }
    }
    report.push(Check::new(
        "quasi-rigidity witness",
        "T_{w,b}^{k_m} fixes every vector supported in the first m blocks",
        qr_err,
        Relation::Le,
        PERIOD_TOL,
    ));
    report.push(Check::holds(
        "witness strictly increasing",
        "k_1 < k_2 < ... along the witness sequence",
        k_seq.windows(2).all(|w| w[0] < w[1]),
    ));

    let m_bound = sec.m_bound.unwrap_or_else(|| ct.sup_weight());
    let count = sec.second_option_count.min(k_seq.len());
    let cert = second_option_certificate(&wb, &k_seq, m_bound, count)?;
    let max_norm = cert.restricted_norms.iter().fold(0.0_f64, |a, &b| a.max(b));
    report.push(Check::new(
        "second option bound",
        "||T_{w,b}^{k_n} restricted to E_n|| <= 1 with E_n = span{e_{b_{l_m+1}-1} : m >= n}",
        max_norm,
        Relation::Le,
        1.0 + SECOND_OPTION_SLACK,
    ));

    let witness = inverse_unboundedness_witness(&ct, sec.witness_threshold);
    report.push(Check::holds(
        "inverse wrap row",
        "T_{w,b} T_{w,b}^{-1} e_{b_n} = e_{b_n} with T_{w,b}^{-1} e_{b_n} = -P_n e_{b_{n+1}-1}",
        witness.inverse_consistent,
    ));
    match sec.expect_witness {
        Some(true) => report.push(Check::new(
            "inverse unboundedness witnessed",
            "max_n |P_n| over the stored blocks exceeds W (witnessed up to truncation, not a limit claim)",
            witness.max_product,
            Relation::Gt,
            sec.witness_threshold,
        )),
        Some(false) => report.push(Check::new(
            "inverse unboundedness not witnessed",
            "max_n |P_n| over the stored blocks stays at or below W",
            witness.max_product,
            Relation::Le,
            sec.witness_threshold,
        )),
        None => {}
    }

    let mut first_option = Vec::new();
    for lam in &sec.first_option_lambdas {
        let z = lam.value();
        let count = point_spectrum_blocks(&ct, z, m)?;
        first_option.push(FirstOptionRow { lambda: [z.re, z.im], count });
        if let Some(max) = sec.first_option_max_count {
            report.push(Check::new(
                &format!("first option count at lambda = {}{:+}i", z.re, z.im),
                "number of stored blocks with lambda^{L_n} = -1",
                count as f64,
                Relation::Le,
                max as f64,
            ));
        }
    }

    let chaos_growth = match sec.chaos_fibers {
        Some(f) => {
            let rows = chaos_growth_witness(&ct, f);
            let grows = rows.iter().all(|(_, r)| r.len() >= 2 && r.windows(2).all(|w| w[1].1 > w[0].1));
            report.push(Check::holds(
                "chaos growth along fibers",
                "|v_N| |P_N| strictly increases along phi^{-1}(l) for every checked fiber l (finite range only)",
                grows,
            ));
            rows
        }
        None => Vec::new(),
    };

    out.json(
        "ctype.json",
        &CTypeSummary {
            dim: ct.dim(),
            blocks: m,
            block_lengths: (0..m).map(|n| ct.block_len(n)).collect(),
            quasi_rigidity_witness: k_seq,
            second_option_generators: second_option_generator_indices(&ct, &cert.blocks),
            second_option_blocks: cert.blocks.clone(),
            second_option_norms: cert.restricted_norms.clone(),
            inverse_witness: witness,
            first_option,
            chaos_growth,
        },
    )?;
    Ok(())
}

fn wb_data(spec: &OperatorSpec) -> Option<&CTypeData> {
    match spec.kind() {
        OperatorKind::CTypeWB(ct) => Some(ct),
        _ => None,
    }
}

/// Claim certificate. On `T_{w,b}` the start basis is the Second Option
/// generators, the dense family is block truncations and the powers come from
/// the quasi-rigidity witness; elsewhere the basis is `e_0, e_1, …`, the
/// family is the whole space and the powers are `1..=k_max`.
fn claim_certificate(
    spec: &OperatorSpec,
    steps: usize,
    m_bound: Option<f64>,
    k_max: u64,
) -> Result<SubspaceCert, HarnessError> {
    let (k_seq, basis, family): (Vec<u64>, Vec<TruncVec>, Box<dyn DenseFamily>) = match wb_data(spec) {
        Some(ct) => {
            let k = quasi_rigidity_witness(ct, ct.num_blocks())?;
            if k.len() < steps {
                return Err(SubspaceError::BasisTooShort { have: k.len(), need: steps }.into());
            }
            let blocks = second_option_select(ct, &k[..steps], m_bound.unwrap_or_else(|| ct.sup_weight()))?;
            let basis = second_option_generator_indices(ct, &blocks)
                .into_iter()
                .map(|i| TruncVec::basis(spec.dim(), i, field_of(spec), spec.norm_mode()))
                .collect::<Result<Vec<_>, _>>()?;
            (k, basis, Box::new(BlockTruncations::for_ctype(ct)))
        }
        None => {
            let basis = (0..steps.min(spec.dim()))
                .map(|i| TruncVec::basis(spec.dim(), i, field_of(spec), spec.norm_mode()))
                .collect::<Result<Vec<_>, _>>()?;
            ((1..=k_max).collect(), basis, Box::new(WholeSpace))
        }
    };
    let dual = dual_norm_bound(&basis)?;
    Ok(claim_construct(spec, &k_seq, &basis, family.as_ref(), &dual, ClaimOptions { steps })?)
}

fn push_cert_checks(cert: &SubspaceCert, report: &mut Report) {
    let problems = cert.problems();
    for p in &problems {
        report.warn(format!("certificate: {p}"));
    }
    for w in &cert.warnings {
        report.warn(w.clone());
    }
    report.push(Check::holds(
        "certificate well-formed",
        "S < 1/2, powers strictly increasing inside the rigidity sequence, every ledger entry strictly below its bound",
        problems.is_empty(),
    ));
}

pub(super) fn subspace_build(cfg: &ScenarioConfig, out: &Output, report: &mut Report) -> Result<(), HarnessError> {
    let sec = cfg.subspace_build.as_ref().expect("section checked");
    let spec = cfg.operator_spec()?;
    let cert = match sec.method {
        BuildMethod::SecondOption => {
            let ct = wb_data(&spec)
                .ok_or_else(|| config_error(cfg, "the second-option method needs a ctype-wb operator"))?;
            let k = quasi_rigidity_witness(ct, ct.num_blocks())?;
            second_option_certificate(&spec, &k, sec.m_bound.unwrap_or_else(|| ct.sup_weight()), sec.count)?
        }
        BuildMethod::Claim => claim_certificate(&spec, sec.count, sec.m_bound, sec.k_max)?,
    };
    out.text("cert.json", &cert.to_json())?;
    push_cert_checks(&cert, report);
    Ok(())
}

pub(super) fn claim_run(cfg: &ScenarioConfig, out: &Output, report: &mut Report) -> Result<(), HarnessError> {
    let sec: &ClaimSection = cfg.claim_run.as_ref().expect("section checked");
    let spec = cfg.operator_spec()?;
    let cert = claim_certificate(&spec, sec.steps, sec.m_bound, sec.k_max)?;
    out.text("cert.json", &cert.to_json())?;
    push_cert_checks(&cert, report);
    let verified =
        verify_recurrent_subspace(&spec, &cert, VerifyOptions { samples: sec.samples, eps: sec.eps, seed: cfg.seed });
    merge_verification(report, verified);
    Ok(())
}

// The verifier repeats the well-formedness check; keep one copy.
fn merge_verification(report: &mut Report, verified: Report) {
    for c in verified.checks {
        if report.check(&c.name).is_none() {
            report.push(c);
        }
    }
    for w in verified.warnings {
        report.warn(w);
    }
}

pub(super) fn subspace_verify(cfg: &ScenarioConfig, _out: &Output, report: &mut Report) -> Result<(), HarnessError> {
    let sec = cfg.subspace_verify.as_ref().expect("section checked");
    let path = cfg.resolve(&sec.cert);
    let text = std::fs::read_to_string(&path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    let cert = SubspaceCert::from_json(&text).map_err(|e| HarnessError::Config { path, message: e.to_string() })?;
    let spec = match &cfg.operator {
        Some(_) => cfg.operator_spec()?,
        None => OperatorSpec::from_toml(&cert.operator)?,
    };
    let verified =
        verify_recurrent_subspace(&spec, &cert, VerifyOptions { samples: sec.samples, eps: sec.eps, seed: cfg.seed });
    merge_verification(report, verified);
    Ok(())
}

// ℓ² bound sqrt(‖A‖_1 ‖A‖_∞) on the section.
fn section_norm_bound(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let col = (0..a.cols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let row = (0..n).map(|i| (0..a.cols()).map(|j| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    (col * row).sqrt()
}

#[derive(Serialize)]
struct DescriptorRecord {
    descriptor: SpectrumDescriptor,
    gate: Option<bool>,
}

pub(super) fn spectra_grid(cfg: &ScenarioConfig, out: &Output, report: &mut Report) -> Result<(), HarnessError> {
    let sec = cfg.spectra_grid.as_ref().expect("section checked");
    let spec = cfg.operator_spec()?;
    let a = finite_section(&spec, sec.dim)?;
    let grid = pseudospectrum_grid(&a, &sec.grid)?;
    out.text("grid.csv", &grid.to_csv())?;
    report.warn("sigma_min values are a finite-section pseudospectrum surrogate; they do not approximate the spectrum");
    if grid.nonconverged > 0 {
        report.warn(format!(
            "{} of {} grid points stopped at the inverse-iteration cap; their values are upper estimates",
            grid.nonconverged,
            grid.points.len()
        ));
    }
    if let Some(r) = sec.outside_radius {
        let nb = section_norm_bound(&a);
        let pts: Vec<&[f64; 3]> = grid.points.iter().filter(|p| p[0].hypot(p[1]) >= r).collect();
        if pts.is_empty() {
            report.warn(format!("no grid point with |mu| >= {r}"));
        }
        let slack = pts.iter().map(|p| p[2] - (p[0].hypot(p[1]) - nb)).fold(f64::INFINITY, f64::min);
        report.push(Check::new(
            "resolvent lower bound",
            "sigma_min(A - mu) >= |mu| - ||A|| outside the norm disc (triangle inequality)",
            if pts.is_empty() { 0.0 } else { slack },
            Relation::Ge,
            -1e-9,
        ));
    }
    if let (Some(r), Some(max)) = (sec.inside_radius, sec.inside_max) {
        let pts: Vec<&[f64; 3]> = grid.points.iter().filter(|p| p[0].hypot(p[1]) <= r).collect();
        if pts.is_empty() {
            report.warn(format!("no grid point with |mu| <= {r}"));
        }
        let worst = pts.iter().map(|p| p[2]).fold(0.0, f64::max);
        report.push(Check::new(
            "small sigma_min inside",
            "finite sections are nearly singular well inside the spectrum",
            worst,
            Relation::Le,
            max,
        ));
    }
    match essential_spectrum_analytic(&spec) {
        Ok(descriptor) => {
            let gate = unit_disc_gate(&descriptor).ok();
            if let Some(want) = sec.expect_gate {
                report.push(Check::holds(
                    "unit-disc gate",
                    "sigma_e meets the closed unit disc exactly when the gate is true",
                    gate == Some(want),
                ));
            }
            out.json("descriptor.json", &DescriptorRecord { descriptor, gate })?;
        }
        Err(e) => {
            report.warn(format!("no analytic descriptor: {e}"));
            if sec.expect_gate.is_some() {
                report.push(Check::holds("unit-disc gate", "an analytic descriptor is available", false));
            }
        }
    }
    Ok(())
}
