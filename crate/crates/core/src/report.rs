//! Structured verification outcomes.

use serde::{Deserialize, Serialize};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// How `measured` is compared against `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Lt,
    Le,
    Ge,
    Gt,
    Eq,
    /// Boolean outcome; `measured` is 1 for true, `bound` is the expected value.
    Holds,
}

impl Relation {
    pub fn eval(self, measured: f64, bound: f64) -> bool {
        match self {
            Relation::Lt => measured < bound,
            Relation::Le => measured <= bound,
            Relation::Ge => measured >= bound,
            Relation::Gt => measured > bound,
            Relation::Eq | Relation::Holds => measured == bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "==",
            Relation::Holds => "holds",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The mathematical statement being checked.
    pub anchor: String,
    pub measured: f64,
    pub bound: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, anchor: &str, measured: f64, relation: Relation, bound: f64) -> Self {
        Check {
            name: name.to_string(),
            anchor: anchor.to_string(),
            measured,
            bound,
            relation,
            pass: relation.eval(measured, bound),
        }
    }

    pub fn holds(name: &str, anchor: &str, ok: bool) -> Self {
        Check::new(name, anchor, if ok { 1.0 } else { 0.0 }, Relation::Holds, 1.0)
    }
}

/// Deterministic report body. Timing lives in [`ReportFile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub artifact_version: String,
    pub scenario: String,
    pub config_digest: String,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(scenario: &str, config_digest: &str) -> Self {
        Report {
            artifact_version: ARTIFACT_VERSION.to_string(),
            scenario: scenario.to_string(),
            config_digest: config_digest.to_string(),
            checks: Vec::new(),
            warnings: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let m = message.into();
        if !self.warnings.contains(&m) {
            self.warnings.push(m);
        }
    }

    pub fn extend(&mut self, other: Report) {
        for c in other.checks {
            self.push(c);
        }
        for w in other.warnings {
            self.warn(w);
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// On-disk form of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub report: Report,
    pub wall_time_s: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_tracks_checks() {
        let mut r = Report::new("demo", "abc");
        r.push(Check::new("a", "x < 1", 0.5, Relation::Lt, 1.0));
        assert!(r.pass);
        r.push(Check::new("b", "x >= 2", 1.0, Relation::Ge, 2.0));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        r.warn("w");
        r.warn("w");
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn nan_never_passes() {
        for rel in [Relation::Lt, Relation::Le, Relation::Ge, Relation::Gt, Relation::Eq] {
            assert!(!rel.eval(f64::NAN, 1.0));
        }
    }
}
