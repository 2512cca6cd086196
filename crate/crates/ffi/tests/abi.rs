use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use pathwise_ffi::*;

fn last_code() -> String {
    unsafe { CStr::from_ptr(pw_last_error_code()) }.to_str().unwrap().to_string()
}

unsafe fn walk(seed: u64, n: usize, scale: f64) -> *mut PwPath {
    let kind = CString::new("random_walk").unwrap();
    let mut path = ptr::null_mut();
    assert_eq!(pw_path_generate(kind.as_ptr(), seed, n, 1.0, 1, scale, &mut path), PwStatus::Ok);
    path
}

#[test]
fn path_roundtrip_and_variation() {
    unsafe {
        let t = [0.0, 0.5, 1.0];
        let v = [0.0, 1.0, -1.0];
        let mut path = ptr::null_mut();
        assert_eq!(pw_path_new(t.as_ptr(), v.as_ptr(), 3, 1, &mut path), PwStatus::Ok);
        assert_eq!((pw_path_len(path), pw_path_dim(path)), (3, 1));
        let mut out = 0.0;
        assert_eq!(pw_p_variation(path, 2.0, 0, 2, &mut out), PwStatus::Ok);
        assert!((out - 5f64.sqrt()).abs() < 1e-12);
        pw_path_free(path);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let t = [0.0, 1.0, 0.5];
        let v = [0.0; 3];
        let mut path = ptr::null_mut();
        assert_eq!(pw_path_new(t.as_ptr(), v.as_ptr(), 3, 1, &mut path), PwStatus::Failed);
        assert_eq!(last_code(), "invalid_path");
        assert!(path.is_null());
        assert_eq!(pw_path_new(ptr::null(), v.as_ptr(), 3, 1, &mut path), PwStatus::InvalidArgument);
        let kind = CString::new("levy").unwrap();
        assert_eq!(pw_path_generate(kind.as_ptr(), 0, 8, 1.0, 1, 0.1, &mut path), PwStatus::Failed);
        assert_eq!(last_code(), "unknown_kind");
        let p = walk(1, 64, 0.125);
        let mut ladder = ptr::null_mut();
        assert_eq!(pw_ladder_dyadic(p, 1, 3, false, &mut ladder), PwStatus::Ok);
        let mut rp = ptr::null_mut();
        assert_eq!(pw_rough_path_build(p, ladder, 3.5, 0, &mut rp), PwStatus::Failed);
        assert_eq!(last_code(), "exponent_out_of_range");
        pw_ladder_free(ladder);
        pw_path_free(p);
        pw_path_free(ptr::null_mut());
    }
}

#[test]
fn ladder_qv_and_integral() {
    unsafe {
        let p = walk(2, 1024, 1.0 / 32.0);
        let mut ladder = ptr::null_mut();
        assert_eq!(pw_ladder_dyadic(p, 2, 4, false, &mut ladder), PwStatus::Ok);
        assert_eq!(pw_ladder_num_levels(ladder), 3);
        let mut len = 0;
        assert_eq!(pw_ladder_stops(ladder, 2, ptr::null_mut(), 0, &mut len), PwStatus::BufferTooSmall);
        let mut stops = vec![0usize; len];
        assert_eq!(pw_ladder_stops(ladder, 2, stops.as_mut_ptr(), len, &mut len), PwStatus::Ok);
        assert_eq!(stops[0], 0);
        let mut qv = 0.0;
        assert_eq!(pw_discrete_qv(p, ladder, 2, 0, 1024, &mut qv), PwStatus::Ok);
        let mut curve = vec![0.0; 1025];
        assert_eq!(pw_ito_integral(p, ladder, 2, 0, 0, curve.as_mut_ptr(), curve.len()), PwStatus::Ok);
        // (S.S)_T + QV_T / 2 = (S_T^2 - S_0^2) / 2, S_0 = 0
        let mut rp = ptr::null_mut();
        assert_eq!(pw_rough_path_build(p, ladder, 2.5, 0, &mut rp), PwStatus::Ok);
        let mut a = [0.0];
        assert_eq!(pw_rough_path_area(rp, 0, 1024, a.as_mut_ptr(), 1), PwStatus::Ok);
        // S_0 = 0 and level 2 is the finest, so A(0,T) is the level-2 integral
        assert!((a[0] - curve[1024]).abs() < 1e-12);
        let s_t = curve[1024];
        let mut json = ptr::null_mut();
        assert_eq!(pw_rough_path_to_json(rp, &mut json), PwStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_string();
        pw_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let last = v["values"].as_array().unwrap().last().unwrap()[0].as_f64().unwrap();
        assert!((s_t + 0.5 * qv - 0.5 * last * last).abs() < 1e-12);
        assert!(pw_rough_path_chen_residual(rp) < 1e-12);
        assert_eq!(pw_rough_path_area(rp, 5, 4, a.as_mut_ptr(), 1), PwStatus::InvalidArgument);
        pw_rough_path_free(rp);
        pw_ladder_free(ladder);
        pw_path_free(p);
    }
}

#[test]
fn run_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CString::new(
        r#"{"schema_version": 1,
            "path": {"kind": "linear", "params": {"n_steps": 256, "T": 1, "d": 1}},
            "ladder": {"rule": "dyadic", "from": 1, "to": 6},
            "checks": ["chen"]}"#,
    )
    .unwrap();
    let verb = CString::new("verify").unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    unsafe {
        let mut summary = ptr::null_mut();
        assert_eq!(pw_run_experiment(cfg.as_ptr(), verb.as_ptr(), out.as_ptr(), &mut summary), PwStatus::Ok);
        let s: serde_json::Value = serde_json::from_str(CStr::from_ptr(summary).to_str().unwrap()).unwrap();
        pw_string_free(summary);
        assert_eq!(s["all_pass"], true);
        assert!(dir.path().join("summary.json").exists());
        let bad = CString::new(r#"{"schema_version": 1, "path": {"kind": "linear", "params": {"n_steps": 8, "T": 1, "d": 1}}, "ladder": {"rule": "dyadic", "from": 1, "to": 2}, "exponents": {"p": 3.5}}"#).unwrap();
        assert_eq!(pw_run_experiment(bad.as_ptr(), verb.as_ptr(), out.as_ptr(), ptr::null_mut()), PwStatus::Failed);
        assert_eq!(last_code(), "exponent_out_of_range");
    }
}

/// Compiles and runs a C program against the generated header and the
/// static library.
#[test]
fn c_program_links() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libpathwise_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "pathwise.h"
int main(void) {
    PwPath *path = NULL;
    PwLadder *ladder = NULL;
    PwRoughPath *rp = NULL;
    if (pw_path_generate("random_walk", 3, 512, 1.0, 2, 0.0625, &path) != PW_STATUS_OK) return 1;
    if (pw_ladder_dyadic(path, 1, 3, false, &ladder) != PW_STATUS_OK) return 2;
    if (pw_rough_path_build(path, ladder, 2.5, 0, &rp) != PW_STATUS_OK) return 3;
    double a[4];
    if (pw_rough_path_area(rp, 0, 512, a, 4) != PW_STATUS_OK) return 4;
    if (pw_rough_path_chen_residual(rp) > 1e-12) return 5;
    if (pw_rough_path_build(path, ladder, 3.5, 0, &rp) != PW_STATUS_FAILED) return 6;
    printf("%s\n", pw_last_error_code());
    pw_rough_path_free(rp);
    pw_ladder_free(ladder);
    pw_path_free(path);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "exponent_out_of_range");
}
