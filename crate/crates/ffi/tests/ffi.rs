use std::ffi::{CStr, CString};
use std::ptr;

use finsler_ffi::*;

fn new_metric(id: &str, dim: usize) -> Result<*mut FinslerMetricHandle, FinslerStatus> {
    let id = CString::new(id).unwrap();
    let mut h = ptr::null_mut();
    match unsafe { finsler_metric_new(id.as_ptr(), dim, &mut h) } {
        FinslerStatus::Ok => Ok(h),
        s => Err(s),
    }
}

fn last_error() -> String {
    let p = finsler_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn lifecycle_and_value() {
    let h = new_metric("numata", 3).unwrap();
    assert_eq!(unsafe { finsler_metric_dim(h) }, 3);
    let (x, y) = ([0.1, 0.2, 0.0], [0.0, 3.0, 4.0]);
    let mut f = 0.0;
    assert_eq!(unsafe { finsler_value(h, x.as_ptr(), y.as_ptr(), &mut f) }, FinslerStatus::Ok);
    assert!((f - 5.6).abs() < 1e-14);
    assert!(finsler_last_error().is_null());
    unsafe { finsler_metric_free(h) };
    unsafe { finsler_metric_free(ptr::null_mut()) };
}

#[test]
fn error_codes() {
    assert_eq!(new_metric("nope", 3).unwrap_err(), FinslerStatus::UnknownMetric);
    assert!(last_error().contains("nope"));
    assert_eq!(new_metric("numata", 2).unwrap_err(), FinslerStatus::Dimension);
    assert_eq!(
        unsafe { finsler_metric_new(ptr::null(), 3, &mut ptr::null_mut()) },
        FinslerStatus::NullPointer
    );

    let h = new_metric("funk_half", 3).unwrap();
    let (x, y) = ([0.6, 0.0, 0.0], [1.0, 0.0, 0.0]);
    let mut f = 0.0;
    assert_eq!(unsafe { finsler_value(h, x.as_ptr(), y.as_ptr(), &mut f) }, FinslerStatus::Domain);
    let zero = [0.0; 3];
    assert_eq!(unsafe { finsler_value(h, zero.as_ptr(), zero.as_ptr(), &mut f) }, FinslerStatus::Domain);
    assert_eq!(unsafe { finsler_value(h, zero.as_ptr(), y.as_ptr(), ptr::null_mut()) }, FinslerStatus::NullPointer);
    unsafe { finsler_metric_free(h) };
}

#[test]
fn tensors_into_caller_buffers() {
    let h = new_metric("funk_unit", 3).unwrap();
    let (x, y) = ([0.1, -0.2, 0.3], [0.5, 0.4, -0.3]);
    let mut f = 0.0;
    let mut g = [0.0; 9];
    let mut spray = [0.0; 3];
    let mut jacobi = [0.0; 9];
    let mut w0 = [f64::NAN; 9];
    let mut kappa = 0.0;
    unsafe {
        assert_eq!(finsler_value(h, x.as_ptr(), y.as_ptr(), &mut f), FinslerStatus::Ok);
        assert_eq!(finsler_metric_tensor(h, x.as_ptr(), y.as_ptr(), g.as_mut_ptr()), FinslerStatus::Ok);
        assert_eq!(
            finsler_spray_tensors(h, x.as_ptr(), y.as_ptr(), spray.as_mut_ptr(), ptr::null_mut(), jacobi.as_mut_ptr()),
            FinslerStatus::Ok
        );
        assert_eq!(finsler_weyl(h, x.as_ptr(), y.as_ptr(), w0.as_mut_ptr(), &mut kappa), FinslerStatus::Ok);
        finsler_metric_free(h);
    }
    let gyy: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| g[i * 3 + j] * y[i] * y[j]).sum();
    assert!((gyy - f * f).abs() < 1e-12);
    for i in 0..3 {
        assert!((spray[i] - 0.5 * f * y[i]).abs() < 1e-12);
        assert!(g[i * 3 + (i + 1) % 3] == g[((i + 1) % 3) * 3 + i]);
    }
    assert!((jacobi[0] + jacobi[4] + jacobi[8] - 2.0 * -0.25 * f * f).abs() < 1e-10);
    assert!(w0.iter().all(|v| v.abs() < 1e-10));
    assert!((kappa + 0.25).abs() < 1e-10);
}

#[test]
fn verdicts() {
    let mut kind = FinslerVerdictKind::NotScalar;
    let mut kappa = 0.0;
    let h = new_metric("funk_half", 3).unwrap();
    assert_eq!(unsafe { finsler_verdict(h, 42, 20, 1e-6, &mut kind, &mut kappa) }, FinslerStatus::Ok);
    assert_eq!(kind, FinslerVerdictKind::Constant);
    assert!((kappa + 1.0).abs() < 1e-7);
    assert_eq!(unsafe { finsler_verdict(h, 42, 5, 1e-6, &mut kind, &mut kappa) }, FinslerStatus::Argument);
    unsafe { finsler_metric_free(h) };

    let h = new_metric("numata", 3).unwrap();
    assert_eq!(unsafe { finsler_verdict(h, 42, 20, 1e-6, &mut kind, &mut kappa) }, FinslerStatus::Ok);
    assert_eq!(kind, FinslerVerdictKind::ScalarNonconstant);
    assert!(kappa.is_nan());
    unsafe { finsler_metric_free(h) };
}

#[test]
fn paper_suite_json() {
    let mut json = ptr::null_mut();
    let mut passed = -1;
    assert_eq!(unsafe { finsler_paper_suite_json(3, 42, 12, &mut json, &mut passed) }, FinslerStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { finsler_string_free(json) };
    let report = finsler_core::report::VerificationReport::from_json(&text).unwrap();
    assert_eq!(passed, i32::from(report.overall));
    assert_eq!(report.dimension, 3);
    assert!(report.checks.iter().any(|c| c.check_id == "pm1"));
}

#[test]
fn header_declares_exports() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/finsler.h")).unwrap();
    for name in [
        "finsler_last_error",
        "finsler_metric_new",
        "finsler_metric_free",
        "finsler_metric_dim",
        "finsler_value",
        "finsler_metric_tensor",
        "finsler_spray_tensors",
        "finsler_weyl",
        "finsler_verdict",
        "finsler_paper_suite_json",
        "finsler_string_free",
        "typedef struct FinslerMetricHandle FinslerMetricHandle",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
