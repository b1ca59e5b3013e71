use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use boundstate_ffi::*;

fn config(n: usize, alpha: f64, beta: f64) -> *mut BsConfig {
    let mut out = ptr::null_mut();
    let status = unsafe { bs_config_new(n, alpha, beta, &mut out) };
    assert_eq!(status, BsStatus::Ok);
    out
}

fn last_error() -> String {
    let p = bs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn bad_configs_report_status_and_message() {
    let mut out = ptr::null_mut();
    let status = unsafe { bs_config_new(2, 2.0, 3.0, &mut out) };
    assert_eq!(status, BsStatus::InvalidConfig);
    assert!(out.is_null());
    assert!(last_error().contains("below 3"));

    let status = unsafe { bs_config_new(3, 2.0, 3.0, ptr::null_mut()) };
    assert_eq!(status, BsStatus::NullPointer);
}

#[test]
fn success_clears_the_error() {
    let mut out = ptr::null_mut();
    unsafe { bs_config_new(3, 1.0, 1.0, &mut out) };
    let cfg = config(3, 2.0, 3.0);
    assert!(bs_last_error_message().is_null());
    unsafe { bs_config_free(cfg) };
}

#[test]
fn shoot_bubble_is_a_bound_state() {
    let cfg = config(3, 2.0, 3.0);
    let mut prof = ptr::null_mut();
    unsafe {
        assert_eq!(bs_shoot(cfg, 1.0, 1.0, 0.0, &mut prof), BsStatus::Ok);
        assert_eq!(bs_profile_kind(prof), BsShootKind::BoundState);
        assert!(bs_profile_event_radius(prof).is_nan());
        assert!(bs_profile_crossing(prof).is_nan());
        let len = bs_profile_len(prof);
        let (mut r, mut u, mut v) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        assert_eq!(
            bs_profile_copy(prof, r.as_mut_ptr(), u.as_mut_ptr(), v.as_mut_ptr(), len),
            BsStatus::Ok
        );
        assert_eq!(u, v);
        // u(0) = 1 is the bubble with t = sqrt(3)
        let mut phi = 0.0;
        for i in (0..len).step_by(97).filter(|&i| r[i] < 50.0) {
            assert_eq!(bs_bubble_radial(cfg, 3f64.sqrt(), r[i], &mut phi), BsStatus::Ok);
            assert!((u[i] - phi).abs() < 1e-6 * phi);
        }
        assert_eq!(
            bs_profile_copy(prof, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), len + 1),
            BsStatus::InvalidArgument
        );
        bs_profile_free(prof);
        bs_config_free(cfg);
    }
}

#[test]
fn newton_potential_of_unit_ball_indicator() {
    let r: Vec<f64> = (0..20001).map(|i| 5e-5 + 2.0 * i as f64 / 20000.0).collect();
    let f: Vec<f64> = r.iter().map(|&x| if x < 1.0 { 1.0 } else { 0.0 }).collect();
    let mut out = vec![0.0; r.len()];
    let status = unsafe { bs_newton_potential(3, r.as_ptr(), f.as_ptr(), r.len(), out.as_mut_ptr()) };
    assert_eq!(status, BsStatus::Ok);
    assert!((out[0] - 0.5).abs() < 1e-4, "{}", out[0]);

    let neg = vec![-1.0; r.len()];
    let status = unsafe { bs_newton_potential(3, r.as_ptr(), neg.as_ptr(), r.len(), out.as_mut_ptr()) };
    assert_eq!(status, BsStatus::InvalidArgument);
}

#[test]
fn hls_ratio_and_relation_errors() {
    let cfg = config(3, 2.0, 3.0);
    let mut ratio = 0.0;
    unsafe {
        assert_eq!(bs_hls_bubble_ratio(cfg, 1.0, 1.2, 1.2, 1.0, &mut ratio), BsStatus::Ok);
        assert!((ratio - 2.2940107035415991).abs() < 1e-5);
        assert_eq!(bs_hls_bubble_ratio(cfg, 1.0, 1.2, 1.3, 1.0, &mut ratio), BsStatus::InvalidArgument);
        bs_config_free(cfg);
    }
}

#[test]
fn verify_criterion_through_the_boundary() {
    let mut passed = -1;
    assert_eq!(unsafe { bs_verify_criterion(7, 1, &mut passed) }, BsStatus::Ok);
    assert_eq!(passed, 1);
    assert_eq!(unsafe { bs_verify_criterion(99, 1, &mut passed) }, BsStatus::InvalidArgument);
}

#[test]
fn c_program_links_against_the_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libboundstate_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let bin = profile_dir.join("bs_c_smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("run C compiler");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
