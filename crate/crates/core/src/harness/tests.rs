use super::*;

const IDENTITY: &str = r#"
seed = 3

[operator]
kind = "identity"
dim = 8

[recur]
steps = 20
eps = 1e-9
initial = [{ basis = 2 }]
random = 2
expect = "returns"
gate_component = "whole"
expect_gate = true
"#;

fn ctype_config(ctype: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(&format!("[operator]\nkind = \"ctype-wb\"\n[operator.ctype]\n{ctype}\n")).unwrap()
}

#[test]
fn default_config_validates() {
    assert!(validate(&ctype_config("preset = \"default\"\nblocks = 12")).is_empty());
}

#[test]
fn divisibility_violation() {
    let v = validate(&ctype_config("boundaries = [0, 2, 5]"));
    assert!(v.iter().any(|m| m.contains("divisibility")), "{v:?}");
}

#[test]
fn phi_violation() {
    let v = validate(&ctype_config("boundaries = [0, 1, 3, 7, 15]\nphi = [0, 0, 1, 3]"));
    assert!(v.iter().any(|m| m.contains("phi(n) < n")), "{v:?}");
}

#[test]
fn section_violations() {
    let cfg = ScenarioConfig::from_toml_str(
        "[operator]\nkind = \"identity\"\ndim = 4\n[recur]\nsteps = 5\neps = -1.0\nexpect = \"returns\"\n",
    )
    .unwrap();
    let v = validate(&cfg);
    assert_eq!(v.len(), 2, "{v:?}");
    assert!(ScenarioConfig::from_toml_str("bogus = 1").is_err());
}

#[test]
fn identity_recur_passes_and_is_deterministic() {
    let cfg = ScenarioConfig::from_toml_str(IDENTITY).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run(&cfg, Scenario::Recur, a.path()).unwrap();
    let rb = run(&cfg, Scenario::Recur, b.path()).unwrap();
    assert!(ra.pass, "{ra:?}");
    assert_eq!(ra, rb);
    let returns = std::fs::read_to_string(a.path().join("returns.json")).unwrap();
    assert_eq!(returns, std::fs::read_to_string(b.path().join("returns.json")).unwrap());
    assert!(a.path().join(REPORT_FILE).exists());
    assert!(a.path().join("descriptor.json").exists());
}

#[test]
fn digest_ignores_formatting() {
    let a = ScenarioConfig::from_toml_str(IDENTITY).unwrap();
    let b = ScenarioConfig::from_toml_str(&IDENTITY.replace("dim = 8", "dim   =   8 # padded")).unwrap();
    assert_eq!(a.digest(), b.digest());
    let mut c = a.clone();
    c.seed = 4;
    assert_ne!(a.digest(), c.digest());
}

#[test]
fn missing_section_is_a_config_error() {
    let cfg = ScenarioConfig::from_toml_str(IDENTITY).unwrap();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(run(&cfg, Scenario::SpectraGrid, dir.path()), Err(HarnessError::Config { .. })));
}
