use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{claim::MIN_RULE_WARNING, CertMode, Condition, SubspaceCert};
use crate::error::SubspaceError;
use crate::operators::OperatorSpec;
use crate::report::{Check, Relation, Report};
use crate::seqspace::{axpy, TruncVec};

/// Relative slack allowed between a measured residual and its majorant.
pub const MAJORANT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub eps: f64,
    pub seed: u64,
}

/// Re-checks a certificate against `spec` on seeded random members of the
/// constructed subspace. Never errors: every failure becomes a failing check.
pub fn verify_recurrent_subspace(spec: &OperatorSpec, cert: &SubspaceCert, opts: VerifyOptions) -> Report {
    let mut report = Report::new("subspace-verify", &cert.operator_digest);
    let problems = cert.problems();
    report.push(Check::holds(
        "certificate well-formed",
        "S < 1/2, powers strictly increasing inside the rigidity sequence, every ledger entry strictly below its bound",
        problems.is_empty(),
    ));
    for p in problems {
        report.warn(format!("certificate: {p}"));
    }
    if !report.pass {
        return report;
    }
    report.push(Check::holds(
        "operator matches certificate",
        "certificate was built for this operator (digest equality)",
        spec.digest() == cert.operator_digest,
    ));
    if !report.pass {
        return report;
    }
    let outcome = match cert.mode {
        CertMode::ClaimConstruction => verify_claim(spec, cert, opts, &mut report),
        CertMode::CTypeSecondOption => verify_second_option(spec, cert, opts, &mut report),
    };
    if let Err(e) = outcome {
        report.push(Check::holds("verification ran", "all sampled powers computable", false));
        report.warn(format!("verification aborted: {e}"));
    }
    report
}

fn combination(a: &[f64], vs: &[TruncVec]) -> Result<TruncVec, SubspaceError> {
    let mut acc = TruncVec::zeros(vs[0].dim(), vs[0].field(), vs[0].norm_mode())?;
    for (ai, v) in a.iter().zip(vs) {
        acc = axpy(Complex64::new(*ai, 0.0), v, &acc)?;
    }
    Ok(acc)
}

fn verify_claim(
    spec: &OperatorSpec,
    cert: &SubspaceCert,
    opts: VerifyOptions,
    report: &mut Report,
) -> Result<(), SubspaceError> {
    report.warn(MIN_RULE_WARNING);
    let m = cert.generators.len();
    let (f, e, l) = (&cert.generators, &cert.basis, &cert.powers);

    // Ledger re-derived from scratch.
    let mut worst = 0.0_f64;
    for entry in &cert.ledger {
        let (j, n) = (entry.j, entry.n);
        let value = match entry.condition {
            Condition::I => f[n - 1].sub(&e[n - 1])?.norm(),
            Condition::Ii => spec.apply_power(&f[n - 1].sub(&e[n - 1])?, l[j - 1])?.norm(),
            Condition::Iii => spec.apply_power(&f[n - 1], l[j - 1])?.sub(&f[n - 1])?.norm(),
        };
        worst = worst.max(value / entry.bound);
        if (value - entry.value).abs() > 1e-12 * entry.bound.max(value) {
            report.warn(format!(
                "ledger ({}) at j={j}, n={n}: recorded {:e}, recomputed {:e}",
                entry.condition.label(),
                entry.value,
                value
            ));
        }
    }
    report.push(Check::new(
        "ledger re-verified",
        "every ledger value, recomputed directly, stays strictly below its bound",
        worst,
        Relation::Lt,
        1.0,
    ));
    report.push(Check::new(
        "perturbation sum",
        "S = sum ||e*_n|| ||f_n - e_n|| < 1/2, so (f_n) is a basic sequence equivalent to (e_n)",
        cert.perturbation_sum,
        Relation::Lt,
        0.5,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut max_excess = f64::NEG_INFINITY;
    let mut final_residual = 0.0_f64;
    let entry = |c: Condition, j: usize, n: usize| cert.entry(c, j, n).map_or(f64::INFINITY, |x| x.value);
    for _ in 0..opts.samples {
        let a: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = combination(&a, f)?;
        let nx = x.norm();
        if nx == 0.0 {
            continue;
        }
        let a_max = a.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        for j in 1..=m {
            let residual = spec.apply_power(&x, l[j - 1])?.sub(&x)?.norm();
            let head: f64 = (1..=j).map(|n| entry(Condition::Iii, j, n)).sum();
            let tail_g: f64 = (j + 1..=m).map(|n| entry(Condition::Ii, j, n)).sum();
            let (tail_e, tail_f) = if j < m {
                (combination(&a[j..], &e[j..])?.norm(), combination(&a[j..], &f[j..])?.norm())
            } else {
                (0.0, 0.0)
            };
            let majorant = a_max * (head + tail_g) + cert.restricted_norms[j - 1] * tail_e + tail_f;
            max_excess = max_excess.max((residual - majorant * (1.0 + MAJORANT_SLACK)) / nx);
            if j == m {
                final_residual = final_residual.max(residual / nx);
            }
        }
    }
    report.push(Check::new(
        "majorant domination",
        "||T^{l_j} x - x|| <= |a|_inf (sum_{n<=j} (iii) + sum_{n>j} (ii)) + R_j ||sum_{n>j} a_n e_n|| + ||sum_{n>j} a_n f_n|| at every j",
        max_excess,
        Relation::Le,
        0.0,
    ));
    report.push(Check::new(
        "final residual",
        "T^{l_n} x -> x on the span of (f_n): relative residual at the largest constructed power",
        final_residual,
        Relation::Lt,
        opts.eps,
    ));
    Ok(())
}

fn verify_second_option(
    spec: &OperatorSpec,
    cert: &SubspaceCert,
    opts: VerifyOptions,
    report: &mut Report,
) -> Result<(), SubspaceError> {
    let m = cert.generators.len();
    let idx: Vec<usize> = cert
        .generators
        .iter()
        .map(|g| match g.support().as_slice() {
            [i] => Ok(*i),
            _ => Err(SubspaceError::InvalidCertificate("second-option generators must be coordinate vectors".into())),
        })
        .collect::<Result<_, _>>()?;
    let mut max_norm = 0.0_f64;
    let mut max_mismatch = 0.0_f64;
    for n in 0..m {
        let exact = spec.restricted_norm_exact(cert.powers[n], &idx[n..])?;
        max_mismatch = max_mismatch.max((exact - cert.restricted_norms[n]).abs());
        max_norm = max_norm.max(exact);
    }
    report.push(Check::new(
        "restricted norm recomputed",
        "recorded ||T^{k_n}|_{E_n}|| equals the exact value",
        max_mismatch,
        Relation::Le,
        1e-12,
    ));
    report.push(Check::new(
        "second option bound",
        "||T_{w,b}^{k_n}|_{E_n}|| <= 1 with E_n = span{e_{b_{l_m+1}-1} : m >= n}",
        max_norm,
        Relation::Le,
        1.0 + 1e-12,
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0_f64;
    for _ in 0..opts.samples {
        for n in 0..m {
            let a: Vec<f64> = (n..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = combination(&a, &cert.generators[n..])?;
            let nx = x.norm();
            if nx == 0.0 {
                continue;
            }
            let tx = spec.apply_power(&x, cert.powers[n])?.norm();
            worst = worst.max(tx / nx - cert.restricted_norms[n]);
        }
    }
    report.push(Check::new(
        "sampled restricted norm",
        "||T^{k_n} x|| <= ||T^{k_n}|_{E_n}|| ||x|| for sampled x in E_n",
        worst,
        Relation::Le,
        1e-12,
    ));
    Ok(())
}
