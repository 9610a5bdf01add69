use std::ffi::{c_void, CStr};
use std::path::Path;
use std::process::Command;
use std::ptr;

use trimspec_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ts_last_error()) }.to_string_lossy().into_owned()
}

fn sublattice(dim: usize, k: u64) -> *mut TsPattern {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ts_pattern_sublattice(dim, k, &mut g) }, TsStatus::Ok);
    g
}

fn operator(dim: usize, side: f64, v: *const TsPotential, g: *const TsPattern, mode: TsMode, t: f64) -> *mut TsOperator {
    let mut op = ptr::null_mut();
    let s = unsafe { ts_operator_new(dim, ptr::null(), side, false, v, g, mode, t, &mut op) };
    assert_eq!(s, TsStatus::Ok, "{}", last_error());
    op
}

#[test]
fn trimmed_chain_energies() {
    // Γ = 3Z trimmed leaves decoupled pairs with eigenvalues 1 and 3.
    let g = sublattice(1, 3);
    let op = operator(1, 31.0, ptr::null(), g, TsMode::Trimmed, 0.0);
    let mut e = 0.0;
    let mut n = 0;
    let mut count = 0;
    unsafe {
        assert_eq!(ts_ground_energy(op, 1e-12, &mut e), TsStatus::Ok);
        assert_eq!(ts_operator_size(op, &mut n), TsStatus::Ok);
        assert_eq!(ts_count_eigs(op, 0.5, 1.5, &mut count), TsStatus::Ok);
        ts_operator_free(op);
        ts_pattern_free(g);
    }
    assert!((e - 1.0).abs() < 1e-10, "{e}");
    assert_eq!(n, 20);
    assert_eq!(count, 10);
}

#[test]
fn three_site_ground_state() {
    let op = operator(1, 3.0, ptr::null(), ptr::null(), TsMode::Full, 0.0);
    let mut psi = [0.0; 3];
    let mut e = 0.0;
    let mut ucp = false;
    let s = unsafe { ts_ground_state(op, 1e-12, psi.as_mut_ptr(), psi.len(), &mut e, &mut ucp) };
    assert_eq!(s, TsStatus::Ok, "{}", last_error());
    assert!((e - (2.0 - 2f64.sqrt())).abs() < 1e-10);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (a, b) in psi.iter().zip([0.5, h, 0.5]) {
        assert!((a - b).abs() < 1e-8, "{psi:?}");
    }
    assert!(ucp);
    let mut short = [0.0; 2];
    let s = unsafe { ts_ground_state(op, 1e-12, short.as_mut_ptr(), short.len(), &mut e, ptr::null_mut()) };
    assert_eq!(s, TsStatus::BufferTooSmall);
    unsafe { ts_operator_free(op) };
}

#[test]
fn penalized_entries_and_sites() {
    let g = sublattice(1, 2);
    let op = operator(1, 5.0, ptr::null(), g, TsMode::Penalized, 1.5);
    let mut coords = [0i64; 1];
    let mut diag = 0.0;
    let mut off = 0.0;
    unsafe {
        for i in 0..5 {
            assert_eq!(ts_operator_site(op, i, coords.as_mut_ptr(), 1), TsStatus::Ok);
            assert_eq!(ts_operator_entry(op, i, i, &mut diag), TsStatus::Ok);
            let expect = if coords[0].rem_euclid(2) == 0 { 3.5 } else { 2.0 };
            assert_eq!(diag, expect);
        }
        assert_eq!(ts_operator_entry(op, 0, 1, &mut off), TsStatus::Ok);
        assert_eq!(off, -1.0);
        assert_eq!(ts_operator_entry(op, 0, 9, &mut off), TsStatus::InvalidArgument);
        ts_operator_free(op);
        ts_pattern_free(g);
    }
}

unsafe extern "C" fn bump(x: *const i64, dim: usize, data: *mut c_void) -> f64 {
    let x = std::slice::from_raw_parts(x, dim);
    let c = *(data as *const f64);
    if x.iter().all(|&v| v == 0) {
        c
    } else {
        0.0
    }
}

#[test]
fn potential_handles_agree() {
    let mut c = 0.75f64;
    let (mut cb, mut ex, mut per) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let origin = [0i64, 0];
    unsafe {
        assert_eq!(ts_potential_callback(Some(bump), (&mut c as *mut f64).cast(), &mut cb), TsStatus::Ok);
        assert_eq!(ts_potential_explicit(2, origin.as_ptr(), &0.75, 1, &mut ex), TsStatus::Ok);
        assert_eq!(ts_potential_periodic(2, 1, &0.75, 1, &mut per), TsStatus::Ok);
    }
    let e = |v: *const TsPotential| {
        let op = operator(2, 5.0, v, ptr::null(), TsMode::Full, 0.0);
        let mut e = 0.0;
        assert_eq!(unsafe { ts_ground_energy(op, 1e-12, &mut e) }, TsStatus::Ok);
        unsafe { ts_operator_free(op) };
        e
    };
    let (a, b, p) = (e(cb), e(ex), e(per));
    assert!((a - b).abs() < 1e-10);
    // A constant shift moves the whole spectrum.
    let free = e(ptr::null());
    assert!((p - free - 0.75).abs() < 1e-10);
    assert!(a > free && a < p);
    unsafe {
        ts_potential_free(cb);
        ts_potential_free(ex);
        ts_potential_free(per);
    }
}

#[test]
fn bounds_match_closed_forms() {
    let mut k = 0;
    let mut dl = 0.0;
    let mut dt = 0.0;
    let mut kap = TsKappa::default();
    unsafe {
        assert_eq!(ts_k_star(2, &mut k), TsStatus::Ok);
        assert_eq!(ts_delta_lower(1, 2, 1, 0.0, &mut dl), TsStatus::Ok);
        assert_eq!(ts_delta_t_lower(1, 2, 1, 0.0, 1e9, &mut dt), TsStatus::Ok);
        assert_eq!(ts_kappa_lower(1, 2, 1, 0.0, 0.0, 0.5 * dl, &mut kap), TsStatus::Ok);
    }
    assert_eq!(k, 3);
    // Q / ((2dK - 1) Y^{2dK - 1}) with Y = 3, 2dK - 1 = 3.
    assert!((dl - 1.0 / 81.0).abs() < 1e-15);
    assert!(dt <= dl && dt > 0.0);
    assert!(kap.kappa_lb > 0.0 && kap.kappa_opt >= kap.kappa_lb);
}

#[test]
fn errors_set_status_and_message() {
    let mut g = ptr::null_mut();
    let mut op = ptr::null_mut();
    let mut x = 0.0;
    unsafe {
        assert_eq!(ts_pattern_sublattice(1, 0, &mut g), TsStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(ts_delta_lower(1, 2, 1, 0.0, ptr::null_mut()), TsStatus::NullPointer);
        assert!(last_error().contains("out"));
        assert_eq!(ts_ground_energy(ptr::null(), 1e-10, &mut x), TsStatus::NullPointer);
        let full = sublattice(1, 1);
        let s = ts_operator_new(1, ptr::null(), 5.0, false, ptr::null(), full, TsMode::Trimmed, 0.0, &mut op);
        assert_eq!(s, TsStatus::EmptyDomain, "{}", last_error());
        assert_eq!(ts_kappa_lower(1, 2, 1, 0.0, 0.0, -1.0, &mut TsKappa::default()), TsStatus::Domain);
        assert_eq!(ts_k_star(3, &mut 0), TsStatus::Ok);
        assert!(last_error().is_empty());
        ts_pattern_free(full);
        ts_pattern_free(ptr::null_mut());
        ts_operator_free(ptr::null_mut());
        ts_potential_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ts_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/trimspec.h");
    let text = std::fs::read_to_string(&header).expect("header generated by the build script");
    for name in [
        "ts_last_error",
        "ts_pattern_sublattice",
        "ts_pattern_periodic",
        "ts_potential_callback",
        "ts_operator_new",
        "ts_ground_energy",
        "ts_ground_state",
        "ts_count_eigs",
        "ts_delta_lower",
        "ts_kappa_lower",
        "TS_STATUS_OK",
        "TS_MODE_PENALIZED",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // The header must parse as C when a compiler is around.
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-std=c99", "-x", "c"]).arg(&header).output() else {
        eprintln!("no C compiler found; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
