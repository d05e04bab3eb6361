//! The C ABI exercised through its Rust symbols, plus a C program compiled
//! against the generated header and linked to the static library.

use std::ffi::{c_int, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use rlab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rlab_last_error()) }.to_string_lossy().into_owned()
}

fn operator(toml: &str) -> *mut RlabOperator {
    let text = CString::new(toml).unwrap();
    let mut op = ptr::null_mut();
    let status = unsafe { rlab_operator_from_toml(text.as_ptr(), &mut op) };
    assert_eq!(status, RlabStatus::Ok, "{}", last_error());
    assert!(!op.is_null());
    op
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shift_apply_and_power() {
    let op = operator("kind = \"rolewicz\"\ndim = 4\nlambda = 2.0\n");
    unsafe {
        assert_eq!(rlab_operator_dim(op), 4);
        assert!(rlab_operator_is_real(op));
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut y = [0.0; 4];
        assert_eq!(rlab_operator_apply(op, x.as_ptr(), ptr::null(), 4, y.as_mut_ptr(), ptr::null_mut()), RlabStatus::Ok);
        assert_eq!(y, [4.0, 6.0, 8.0, 0.0]);
        let (xi, mut yr, mut yi) = ([0.0, 0.0, 1.0, 0.0], [0.0; 4], [0.0; 4]);
        let status = rlab_operator_apply_power(op, x.as_ptr(), xi.as_ptr(), 4, 2, yr.as_mut_ptr(), yi.as_mut_ptr());
        assert_eq!(status, RlabStatus::Ok);
        assert_eq!(yr, [12.0, 16.0, 0.0, 0.0]);
        assert_eq!(yi, [4.0, 0.0, 0.0, 0.0]);
        let mut norm = 0.0;
        assert_eq!(rlab_operator_norm_estimate(op, &mut norm), RlabStatus::Ok);
        assert!((norm - 2.0).abs() < 1e-6, "{norm}");
        rlab_operator_free(op);
    }
}

#[test]
fn norms() {
    let x = [3.0, -4.0];
    let mut out = 0.0;
    unsafe {
        assert_eq!(rlab_vector_norm(x.as_ptr(), ptr::null(), 2, 2.0, &mut out), RlabStatus::Ok);
        assert_eq!(out, 5.0);
        assert_eq!(rlab_vector_norm(x.as_ptr(), ptr::null(), 2, f64::INFINITY, &mut out), RlabStatus::Ok);
        assert_eq!(out, 4.0);
        assert_eq!(rlab_vector_norm(x.as_ptr(), ptr::null(), 2, 0.5, &mut out), RlabStatus::Config);
        // e_0 + i e_1 in l^2 has complexification norm 1.
        let (a, b) = ([1.0, 0.0], [0.0, 1.0]);
        assert_eq!(rlab_complexification_norm(a.as_ptr(), b.as_ptr(), 2, 2.0, &mut out), RlabStatus::Ok);
        assert!((out - 1.0).abs() < 1e-12);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut op = ptr::null_mut();
        assert_eq!(rlab_operator_from_toml(ptr::null(), &mut op), RlabStatus::NullPointer);
        let bad = CString::new("kind = \"no-such-kind\"").unwrap();
        assert_eq!(rlab_operator_from_toml(bad.as_ptr(), &mut op), RlabStatus::Config);
        assert!(op.is_null());
        assert!(!last_error().is_empty());

        let op = operator("kind = \"identity\"\ndim = 3\n");
        assert!(last_error().is_empty());
        let x = [1.0; 2];
        let mut y = [0.0; 2];
        let status = rlab_operator_apply(op, x.as_ptr(), ptr::null(), 2, y.as_mut_ptr(), ptr::null_mut());
        assert_eq!(status, RlabStatus::DimensionMismatch);
        assert!(last_error().contains("dimension"));
        let status = rlab_operator_apply(ptr::null(), x.as_ptr(), ptr::null(), 2, y.as_mut_ptr(), ptr::null_mut());
        assert_eq!(status, RlabStatus::NullPointer);
        rlab_operator_free(op);
        rlab_operator_free(ptr::null_mut());
        assert_eq!(rlab_operator_dim(ptr::null()), 0);
    }
}

#[test]
fn scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let config = CString::new(configs().join("identity.toml").to_str().unwrap()).unwrap();
    let scenario = CString::new("recur").unwrap();
    let mut passed: c_int = -1;
    let status = unsafe { rlab_run_scenario(scenario.as_ptr(), config.as_ptr(), out.as_ptr(), &mut passed) };
    assert_eq!(status, RlabStatus::Ok, "{}", last_error());
    assert_eq!(passed, 1);
    assert!(dir.path().join("report.json").exists());

    let unknown = CString::new("nope").unwrap();
    let status = unsafe { rlab_run_scenario(unknown.as_ptr(), config.as_ptr(), out.as_ptr(), ptr::null_mut()) };
    assert_eq!(status, RlabStatus::Config);
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "rlab.h"

int main(void) {
    RlabOperator *op = NULL;
    if (rlab_operator_from_toml("kind = \"rolewicz\"\ndim = 3\nlambda = 2.0\n", &op) != RLAB_STATUS_OK) {
        fprintf(stderr, "%s\n", rlab_last_error());
        return 1;
    }
    double x[3] = {1.0, 1.0, 1.0}, y[3];
    if (rlab_operator_apply(op, x, NULL, 3, y, NULL) != RLAB_STATUS_OK) return 2;
    rlab_operator_free(op);
    if (y[0] != 2.0 || y[1] != 2.0 || y[2] != 0.0) return 3;
    double n = 0.0;
    if (rlab_vector_norm(y, NULL, 3, INFINITY, &n) != RLAB_STATUS_OK || n != 2.0) return 4;
    printf("ok %s\n", rlab_version());
    return 0;
}
"#;

#[test]
fn c_program_links_against_header_and_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    // Integration tests run from target/<profile>/deps; the static library sits one level up.
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = lib_dir.join("librlab_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or no static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
