use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hyperperc_ffi::*;

const COMPETITION_HALF: &str = r#"{"k":3,"entries":[
    {"blocks":[[0],[1],[2]],"p":0.125},
    {"blocks":[[0],[1,2]],"p":0.25},
    {"blocks":[[0,1],[2]],"p":0.25},
    {"blocks":[[0,2],[1]],"p":0.25},
    {"blocks":[[0,1,2]],"p":0.125}]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn partition_counts() {
    let mut n = 0usize;
    for (k, want) in [(1, 1), (3, 5), (4, 14), (5, 42)] {
        assert_eq!(unsafe { hp_nc_count(k, &mut n) }, HpStatus::HpOk);
        assert_eq!(n, want);
    }
    assert_eq!(unsafe { hp_nc_count(40, &mut n) }, HpStatus::HpCapacity);
    assert!(!last_error_string().is_empty());
    assert_eq!(unsafe { hp_nc_count(3, ptr::null_mut()) }, HpStatus::HpNullArgument);
}

#[test]
fn lattice_handles() {
    let mut lat = ptr::null_mut();
    assert_eq!(unsafe { hp_lattice_builtin(c("hex-bond").as_ptr(), &mut lat) }, HpStatus::HpOk);
    let (mut v, mut e) = (0, 0);
    assert_eq!(unsafe { hp_lattice_counts(lat, &mut v, &mut e) }, HpStatus::HpOk);
    assert_eq!((v, e), (2, 3));
    let mut dual = ptr::null_mut();
    assert_eq!(unsafe { hp_lattice_dual(lat, &mut dual) }, HpStatus::HpOk);
    assert_eq!(unsafe { hp_lattice_counts(dual, &mut v, &mut e) }, HpStatus::HpOk);
    assert_eq!((v, e), (1, 3));
    unsafe {
        hp_lattice_free(dual);
        hp_lattice_free(lat);
        hp_lattice_free(ptr::null_mut());
    }
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { hp_lattice_builtin(c("kagome").as_ptr(), &mut bad) }, HpStatus::HpInvalidInput);
    assert!(bad.is_null());
    assert_eq!(unsafe { hp_lattice_from_json(c("{").as_ptr(), &mut bad) }, HpStatus::HpInvalidInput);
    assert_eq!(unsafe { hp_lattice_counts(ptr::null(), &mut v, &mut e) }, HpStatus::HpNullArgument);
}

#[test]
fn self_duality_and_crossing() {
    let mut lat = ptr::null_mut();
    assert_eq!(unsafe { hp_lattice_builtin(c("tri").as_ptr(), &mut lat) }, HpStatus::HpOk);
    let mut flag = false;
    assert_eq!(unsafe { hp_lattice_self_dual(lat, c(COMPETITION_HALF).as_ptr(), &mut flag) }, HpStatus::HpOk);
    assert!(flag);
    let mut stats = HpCrossingStats::default();
    let status = unsafe { hp_estimate_crossing(lat, c(COMPETITION_HALF).as_ptr(), 8, 200, 3, &mut stats) };
    assert_eq!(status, HpStatus::HpOk);
    assert_eq!(stats.trials, 200);
    assert!(stats.hits > 0 && stats.hits < 200);
    let mut again = HpCrossingStats::default();
    unsafe { hp_estimate_crossing(lat, c(COMPETITION_HALF).as_ptr(), 8, 200, 3, &mut again) };
    assert_eq!(stats, again);
    let bad = r#"{"k":3,"entries":[{"blocks":[[0,1,2]],"p":0.5}]}"#;
    assert_eq!(unsafe { hp_lattice_self_dual(lat, c(bad).as_ptr(), &mut flag) }, HpStatus::HpInvalidInput);
    unsafe { hp_lattice_free(lat) };
}

#[test]
fn generators() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { hp_generator_builtin(c("triangle").as_ptr(), &mut g) }, HpStatus::HpOk);
    let mut root = 0.0;
    assert_eq!(unsafe { hp_generator_critical_point(g, &mut root) }, HpStatus::HpOk);
    assert!((root - 2.0 * (std::f64::consts::PI / 18.0).sin()).abs() < 1e-9);
    unsafe { hp_generator_free(g) };

    let flat = r#"{"terminals":[0,1,2],"vertices":[0,1,2],"bonds":[{"u":0,"v":1,"p":["1/3"]},{"u":1,"v":2,"p":["1/3"]}]}"#;
    assert_eq!(unsafe { hp_generator_from_json(c(flat).as_ptr(), &mut g) }, HpStatus::HpOk);
    root = -1.0;
    assert_eq!(unsafe { hp_generator_critical_point(g, &mut root) }, HpStatus::HpNoRoot);
    assert_eq!(root, -1.0);
    unsafe { hp_generator_free(g) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

/// Compiles a small C program against the generated header and the static
/// library, then runs it.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("hyperperc.h").exists(), "header not generated");
    let lib = profile_dir().join("libhyperperc_ffi.a");
    if !lib.exists() {
        eprintln!("static library not found at {}; skipping C link check", lib.display());
        return;
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping C link check");
        return;
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("capi_smoke");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "hyperperc.h"
int main(void) {
    size_t n = 0;
    if (hp_nc_count(4, &n) != HP_OK || n != 14) return 1;
    HpGenerator *g = NULL;
    if (hp_generator_builtin("star", &g) != HP_OK) return 2;
    double root = 0.0;
    if (hp_generator_critical_point(g, &root) != HP_OK) return 3;
    hp_generator_free(g);
    HpLattice *lat = NULL;
    if (hp_lattice_builtin("nope", &lat) != HP_INVALID_INPUT) return 4;
    printf("%.9f %s\n", root, hp_last_error()[0] ? "err" : "none");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.652703645 err");
}
