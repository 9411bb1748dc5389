use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use homocalc_ffi::*;

fn last_error() -> String {
    let p = hc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(name: &str) -> *mut HcFunction {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { hc_function_builtin(name.as_ptr(), &mut h) },
        HcStatus::Ok
    );
    h
}

#[test]
fn eval_and_fc_on_examples() {
    let h = builtin("example-7.1");
    assert_eq!(unsafe { hc_function_dim(h) }, 2);
    let mut v = f64::NAN;
    assert_eq!(
        unsafe { hc_eval(h, [1.0, 1.0].as_ptr(), 2, 1e-9, &mut v) },
        HcStatus::Ok
    );
    assert_eq!(v, 2.0);
    unsafe { hc_function_free(h) };

    let h = builtin("example-7.2");
    let fs = [2.0, 5.0, -1.0, 3.0, -1.0, 1.0];
    let mut out = [f64::NAN; 3];
    assert_eq!(
        unsafe { hc_fc_rm(h, fs.as_ptr(), 2, 3, 1e-9, out.as_mut_ptr()) },
        HcStatus::Ok
    );
    assert_eq!(out, [2.0, -1.0, 0.0]);
    unsafe { hc_function_free(h) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let name = CString::new("no-such-function").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { hc_function_builtin(name.as_ptr(), &mut h) },
        HcStatus::InputError
    );
    assert!(h.is_null());
    assert!(last_error().contains("no-such-function"));

    let doc = CString::new(r#"{"family": {"kind": "usc", "maps": [{"sublinear": {"subdiff": {"ball": {"center": [0, 0], "radius": -1}}}}]}}"#).unwrap();
    assert_eq!(
        unsafe { hc_function_from_json(doc.as_ptr(), &mut h) },
        HcStatus::InputError
    );
    assert!(last_error().contains("family.maps[0]"));

    assert_eq!(
        unsafe { hc_function_builtin(ptr::null(), &mut h) },
        HcStatus::InvalidArgument
    );
    let h = builtin("abs-sum");
    let mut v = 0.0;
    assert_eq!(
        unsafe { hc_eval(h, [1.0].as_ptr(), 1, 1e-9, &mut v) },
        HcStatus::InputError
    );
    assert!(last_error().contains("DimensionMismatch"));
    assert_eq!(
        unsafe { hc_eval(h, [1.0, 2.0].as_ptr(), 2, 1e-9, ptr::null_mut()) },
        HcStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { hc_eval(h, [1.0, 2.0].as_ptr(), 2, 1e-9, &mut v) },
        HcStatus::Ok
    );
    assert!(hc_last_error().is_null());
    unsafe { hc_function_free(h) };
}

#[test]
fn saddle_round_trip_through_json() {
    let h = builtin("abs-sum");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hc_saddle_build(h, 1e-9, &mut s) }, HcStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hc_saddle_to_json(s, &mut json) }, HcStatus::Ok);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { hc_saddle_from_json(json, &mut t) }, HcStatus::Ok);
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(
        unsafe { hc_saddle_eval(t, [1.0, -2.0].as_ptr(), 2, &mut a, &mut b) },
        HcStatus::Ok
    );
    assert_eq!((a, b), (3.0, 3.0));
    let mut out = [0.0; 2];
    let fs = [1.0, -1.0, -2.0, 0.5];
    assert_eq!(
        unsafe { hc_saddle_fc_rm(t, fs.as_ptr(), 2, 2, 1e-6, out.as_mut_ptr()) },
        HcStatus::Ok
    );
    assert_eq!(out, [3.0, 1.5]);
    unsafe {
        hc_string_free(json);
        hc_saddle_free(s);
        hc_saddle_free(t);
        hc_function_free(h);
    }
}

#[test]
fn saddle_gap_is_numerical() {
    let doc = CString::new(
        r#"{"dim": 2, "phi_count": 2, "psi_count": 2, "phi_labels": ["a", "b"], "psi_labels": ["c", "d"],
            "coefficients": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}"#,
    )
    .unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { hc_saddle_from_json(doc.as_ptr(), &mut s) },
        HcStatus::Ok
    );
    let mut out = [0.0];
    let status = unsafe { hc_saddle_fc_rm(s, [1.0, 0.0].as_ptr(), 2, 1, 1e-6, out.as_mut_ptr()) };
    assert_eq!(status, HcStatus::NumericalError);
    assert!(last_error().contains("SaddleGap"));
    unsafe { hc_saddle_free(s) };
}

#[test]
fn saddle_build_needs_finite_families() {
    let h = builtin("example-7.1");
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { hc_saddle_build(h, 1e-9, &mut s) },
        HcStatus::InputError
    );
    assert!(s.is_null());
    unsafe { hc_function_free(h) };
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/homocalc.h"))
            .unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12, "{exports:?}");
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
}

/// Compile and run a small C program against the header and static library.
#[test]
fn c_program_links_against_staticlib() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libhomocalc_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "homocalc.h"
int main(void) {
    HcFunction *h = NULL;
    if (hc_function_builtin("example-7.1", &h) != HC_STATUS_OK) return 10;
    double x[2] = {1.0, 1.0}, v = 0.0;
    if (hc_eval(h, x, 2, 1e-9, &v) != HC_STATUS_OK) return 11;
    hc_function_free(h);
    if (hc_function_builtin("missing", &h) != HC_STATUS_INPUT_ERROR) return 12;
    if (hc_last_error() == NULL) return 13;
    printf("%.1f\n", v);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("smoke");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2.0");
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}

fn tempfile_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-smoke");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
