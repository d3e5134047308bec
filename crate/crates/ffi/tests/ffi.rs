use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qmqkd_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qm_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn link_power_follows_the_cosine_law() {
    unsafe {
        let mut link = ptr::null_mut();
        assert_eq!(qm_link_new(QmMirrorKind::QwpReflector, 0.3, 1.1, 2.0, 4.0, &mut link), QmStatus::Ok);
        for k in 0..8 {
            let phi = k as f64 * 0.7;
            assert_eq!(qm_link_set_phase_shift(link, phi), QmStatus::Ok);
            let mut p = 0.0;
            assert_eq!(qm_link_interference_power(link, 0.6, 0.0, 0.0, 0.8, &mut p), QmStatus::Ok);
            assert!((p - (1.0 + phi.cos()) / 8.0).abs() < 1e-12);
        }
        let mut v = 0.0;
        assert_eq!(qm_link_visibility(link, 64, &mut v), QmStatus::Ok);
        assert!((v - 1.0).abs() < 1e-9);
        qm_link_free(link);
    }
}

#[test]
fn random_links_and_fading_scan() {
    unsafe {
        let mut link = ptr::null_mut();
        assert_eq!(qm_link_random(QmMirrorKind::FaradayMirror, 9, 3, &mut link), QmStatus::Ok);
        let mut v = 0.0;
        assert_eq!(qm_link_visibility(link, 32, &mut v), QmStatus::Ok);
        assert!(v > 1.0 - 1e-9);
        qm_link_free(link);

        let mut s = QmFadingSummary::default();
        assert_eq!(qm_fading_scan(QmMirrorKind::PlainMirror, 200, 1, &mut s), QmStatus::Ok);
        assert_eq!(s.samples, 200);
        assert!(s.min <= s.p5 && s.p5 <= s.mean && s.mean <= 1.0);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(qm_link_visibility(ptr::null(), 64, &mut v), QmStatus::NullPointer);
        assert!(last_error().contains("link"));

        let mut link = ptr::null_mut();
        assert_eq!(qm_link_new(QmMirrorKind::QwpReflector, f64::NAN, 0.0, 0.0, 0.0, &mut link), QmStatus::InvalidArgument);
        assert!(link.is_null());

        let mut scen = ptr::null_mut();
        let bad = CString::new("[detector]\nefficiancy = 1").unwrap();
        assert_eq!(qm_scenario_from_toml(bad.as_ptr(), &mut scen), QmStatus::Config);
        assert!(!last_error().is_empty());
        let name = CString::new("nope").unwrap();
        assert_eq!(qm_scenario_preset(name.as_ptr(), &mut scen), QmStatus::Config);

        let (mut pass, mut failures) = (0, 0usize);
        assert_eq!(qm_algebra_check(1e-10, 100, 1, &mut pass, &mut failures), QmStatus::Ok);
        assert_eq!((pass, failures), (1, 0));
        assert!(last_error().is_empty());
        assert_eq!(qm_algebra_check(1e-18, 100, 1, &mut pass, &mut failures), QmStatus::Ok);
        assert_eq!(pass, 0);
        assert!(failures > 0);
        assert_eq!(qm_algebra_check(0.0, 100, 1, &mut pass, &mut failures), QmStatus::InvalidArgument);
    }
}

#[test]
fn session_through_handles() {
    unsafe {
        let name = CString::new("paper-50km").unwrap();
        let mut scen = ptr::null_mut();
        assert_eq!(qm_scenario_preset(name.as_ptr(), &mut scen), QmStatus::Ok);
        assert_eq!(qm_scenario_calibrate(scen), QmStatus::Ok);
        let mut session = ptr::null_mut();
        assert_eq!(qm_session_run(scen, &mut session), QmStatus::Ok);
        assert_eq!(qm_session_len(session), 120);

        let mut summary = QmSessionSummary::default();
        assert_eq!(qm_session_summary(session, &mut summary), QmStatus::Ok);
        assert!((0.006..=0.0106).contains(&summary.mean_qber));
        assert!((6620.0..=8060.0).contains(&summary.mean_rate_bps));

        let mut bin = QmSessionBin::default();
        assert_eq!(qm_session_bin(session, 119, &mut bin), QmStatus::Ok);
        assert_eq!(bin.t_s, 119.0 * 60.0);
        assert_eq!(qm_session_bin(session, 120, &mut bin), QmStatus::OutOfRange);

        qm_session_free(session);
        qm_scenario_free(scen);
        assert_eq!(qm_session_len(ptr::null()), 0);
    }
}

const SMOKE: &str = r#"
#include <stdio.h>
#include "qmqkd.h"

int main(void) {
    QmLink *link = NULL;
    double v = 0.0;
    if (qm_link_random(QM_MIRROR_KIND_QWP_REFLECTOR, 1, 0, &link) != QM_STATUS_OK) return 1;
    if (qm_link_visibility(link, 64, &v) != QM_STATUS_OK) return 2;
    qm_link_free(link);
    if (qm_link_visibility(NULL, 64, &v) != QM_STATUS_NULL_POINTER) return 3;
    printf("%.6f %s\n", v, qm_version());
    return 0;
}
"#;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(header_dir().join("qmqkd.h")).unwrap();
    for name in ["qm_link_new", "qm_session_run", "qm_last_error_message", "typedef struct QmLink QmLink"] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn c_program_compiles_and_links() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, SMOKE).unwrap();
    let include = format!("-I{}", header_dir().display());

    // the static library sits next to this test binary's deps directory
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libqmqkd_ffi.a");
    if !lib.exists() {
        let status = Command::new("cc").args(["-fsyntax-only", &include]).arg(&src).status().unwrap();
        assert!(status.success());
        return;
    }
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("1.000000"));
}
