//! Config-driven scenarios that tie the modules together and persist reports.
//!
//! A run validates its config, dispatches to one scenario, writes the
//! scenario's artifacts plus `report.json` into the output directory, and
//! returns the [`Report`]. The report body is deterministic for a fixed
//! config; only `wall_time_s` in the file wrapper varies between runs.

mod config;
mod scenarios;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{
    BuildMethod, BuildSection, CTypeVerifySection, ClaimSection, Component, GridSection, InitialSpec, OrbitExpect,
    OrbitSection, RecurExpect, RecurSection, Scenario, ScenarioConfig, VerifySection,
};

use crate::error::HarnessError;
use crate::operators::{max_iter, OperatorSpec, OperatorToml, SECTION_CAP};
use crate::report::{Report, ReportFile};

/// Name of the report file written into every output directory.
pub const REPORT_FILE: &str = "report.json";

/// Every admissibility problem in `config`; empty iff it can be run.
pub fn validate(config: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    match &config.operator {
        Some(op) => {
            let before = out.len();
            operator_violations(op, "operator", &mut out);
            if out.len() == before {
                if let Err(e) = OperatorSpec::from_toml(op) {
                    out.push(format!("operator: {e}"));
                }
            }
        }
        None if config.subspace_verify.is_none() => out.push("missing [operator] table".into()),
        None => {}
    }
    let cap = max_iter();
    if let Some(o) = &config.orbit {
        if o.steps > cap {
            out.push(format!("orbit.steps = {} exceeds the iteration cap {cap}", o.steps));
        }
        initial_violations(&o.initial, "orbit.initial", &mut out);
        if let Some(m) = o.divergence_threshold {
            if !(m.is_finite() && m > 0.0) {
                out.push("orbit.divergence_threshold must be positive and finite".into());
            }
        }
        if o.expect.is_some() && o.divergence_threshold.is_none() {
            out.push("orbit.expect needs orbit.divergence_threshold".into());
        }
    }
    if let Some(r) = &config.recur {
        if r.steps > cap {
            out.push(format!("recur.steps = {} exceeds the iteration cap {cap}", r.steps));
        }
        if !(r.eps.is_finite() && r.eps > 0.0) {
            out.push("recur.eps must be positive and finite".into());
        }
        if r.initial.is_empty() && r.random == 0 {
            out.push("recur needs `initial` vectors or `random > 0`".into());
        }
        for (i, init) in r.initial.iter().enumerate() {
            initial_violations(init, &format!("recur.initial[{i}]"), &mut out);
        }
    }
    if let Some(c) = &config.ctype_verify {
        if c.second_option_count == 0 {
            out.push("ctype-verify.second_option_count must be at least 1".into());
        }
        if !(c.witness_threshold.is_finite() && c.witness_threshold > 0.0) {
            out.push("ctype-verify.witness_threshold must be positive and finite".into());
        }
    }
    if let Some(b) = &config.subspace_build {
        if b.count == 0 {
            out.push("subspace-build.count must be at least 1".into());
        }
    }
    if let Some(c) = &config.claim_run {
        if c.steps == 0 {
            out.push("claim-run.steps must be at least 1".into());
        }
        if !(c.eps.is_finite() && c.eps > 0.0) {
            out.push("claim-run.eps must be positive and finite".into());
        }
    }
    if let Some(v) = &config.subspace_verify {
        if !(v.eps.is_finite() && v.eps > 0.0) {
            out.push("subspace-verify.eps must be positive and finite".into());
        }
    }
    if let Some(g) = &config.spectra_grid {
        if g.dim == 0 || g.dim > SECTION_CAP {
            out.push(format!("spectra-grid.dim must lie in 1..={SECTION_CAP}"));
        }
        if let Err(e) = g.grid.points() {
            out.push(format!("spectra-grid.grid: {e}"));
        }
        if g.inside_radius.is_some() != g.inside_max.is_some() {
            out.push("spectra-grid.inside_radius and inside_max go together".into());
        }
    }
    out
}

fn operator_violations(op: &OperatorToml, path: &str, out: &mut Vec<String>) {
    if let Some(ct) = &op.ctype {
        match ct.params() {
            Ok(params) => {
                for v in params.violations() {
                    out.push(format!("{path}.ctype: [{}] {}", v.constraint, v.message));
                }
            }
            Err(e) => out.push(format!("{path}.ctype: {e}")),
        }
    }
    for (name, child) in [("left", &op.left), ("right", &op.right), ("inner", &op.inner)] {
        if let Some(c) = child {
            operator_violations(c, &format!("{path}.{name}"), out);
        }
    }
}

fn initial_violations(init: &InitialSpec, path: &str, out: &mut Vec<String>) {
    let set = usize::from(init.basis.is_some()) + usize::from(init.sparse.is_some()) + usize::from(init.random == Some(true));
    if set != 1 {
        out.push(format!("{path}: set exactly one of `basis`, `sparse`, `random = true`"));
    }
}

/// Runs `scenario`, writing its artifacts and `report.json` into `out_dir`.
pub fn run(config: &ScenarioConfig, scenario: Scenario, out_dir: &Path) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let config_path = config.base_dir.clone().unwrap_or_default();
    let violations = validate(config);
    if !violations.is_empty() {
        return Err(HarnessError::Config { path: config_path, message: violations.join("; ") });
    }
    if !config.has_section(scenario) {
        return Err(HarnessError::Config {
            path: config_path,
            message: format!("no [{scenario}] table for scenario `{scenario}`"),
        });
    }
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io { path: out_dir.to_path_buf(), source })?;
    let mut report = Report::new(scenario.as_str(), &config.digest());
    let out = Output { dir: out_dir.to_path_buf() };
    match scenario {
        Scenario::Orbit => scenarios::orbit(config, &out, &mut report)?,
        Scenario::Recur => scenarios::recur(config, &out, &mut report)?,
        Scenario::CtypeVerify => scenarios::ctype_verify(config, &out, &mut report)?,
        Scenario::SubspaceBuild => scenarios::subspace_build(config, &out, &mut report)?,
        Scenario::SubspaceVerify => scenarios::subspace_verify(config, &out, &mut report)?,
        Scenario::SpectraGrid => scenarios::spectra_grid(config, &out, &mut report)?,
        Scenario::ClaimRun => scenarios::claim_run(config, &out, &mut report)?,
    }
    if config.operator.as_ref().is_some_and(has_ctype) {
        report.warn(
            "fibers of phi are checked nonempty among the stored blocks only; that they are infinite cannot be \
             tested at finite truncation",
        );
    }
    let file = ReportFile { report: report.clone(), wall_time_s: start.elapsed().as_secs_f64() };
    out.json(REPORT_FILE, &file)?;
    Ok(report)
}

/// Loads the config at `path`, applies the seed override and runs.
pub fn run_file(path: &Path, scenario: Scenario, out_dir: &Path, seed: Option<u64>) -> Result<Report, HarnessError> {
    let mut config = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    run(&config, scenario, out_dir).map_err(|e| match e {
        HarnessError::Config { message, .. } => HarnessError::Config { path: path.to_path_buf(), message },
        other => other,
    })
}

fn has_ctype(op: &OperatorToml) -> bool {
    op.ctype.is_some() || [&op.left, &op.right, &op.inner].into_iter().flatten().any(|c| has_ctype(c))
}

pub(crate) struct Output {
    dir: PathBuf,
}

impl Output {
    pub(crate) fn text(&self, name: &str, body: &str) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|source| HarnessError::Io { path, source })
    }

    pub(crate) fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), HarnessError> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Serialize(e.to_string()))?;
        body.push('\n');
        self.text(name, &body)
    }
}

#[cfg(test)]
mod tests;
