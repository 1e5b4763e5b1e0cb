use std::ffi::{CStr, CString};
use std::ptr;

use ptreadout_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ptreadout_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

struct Handle(*mut PtreadoutParams);

impl Handle {
    fn preset(name: &str) -> Handle {
        let h = unsafe { ptreadout_params_from_preset(cstr(name).as_ptr()) };
        assert!(!h.is_null(), "{}", last_error());
        Handle(h)
    }

    fn set(&self, field: &str, value: f64) -> PtreadoutStatus {
        unsafe { ptreadout_params_set(self.0, cstr(field).as_ptr(), value) }
    }

    fn get(&self, field: &str) -> f64 {
        let mut v = f64::NAN;
        let s = unsafe { ptreadout_params_get(self.0, cstr(field).as_ptr(), &mut v) };
        assert_eq!(s, PtreadoutStatus::Ok, "{}", last_error());
        v
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { ptreadout_params_free(self.0) }
    }
}

#[test]
fn default_handle_carries_figure_parameters() {
    let h = Handle(ptreadout_params_new());
    assert_eq!(h.get("g"), 0.2);
    assert_eq!(h.get("delta_q_detuning"), 2.0);
    assert_eq!(h.get("n_cavities"), 2.0);
    assert_eq!(h.get("lossy_auxiliaries"), 0.0);
}

#[test]
fn set_and_get_round_trip() {
    let h = Handle::preset("fig2a");
    assert_eq!(h.set("j1", 0.75), PtreadoutStatus::Ok);
    assert_eq!(h.get("j1"), 0.75);
    assert_eq!(h.set("n_cavities", 3.0), PtreadoutStatus::Ok);
    assert_eq!(h.get("n_cavities"), 3.0);
    assert_eq!(h.set("n_cavities", 2.5), PtreadoutStatus::InvalidArgument);
    assert_eq!(h.set("lossy_auxiliaries", 1.0), PtreadoutStatus::Ok);
    assert_eq!(h.get("lossy_auxiliaries"), 1.0);
    assert_eq!(h.set("nope", 1.0), PtreadoutStatus::InvalidArgument);
    assert!(last_error().contains("nope"));
}

#[test]
fn dispersive_shift_of_the_figure_qubit() {
    let h = Handle::preset("fig2a");
    let mut z = PtreadoutComplex { re: 0.0, im: 0.0 };
    let s = unsafe { ptreadout_dispersive_shift(h.0, PTREADOUT_BRANCH_EXCITED, &mut z) };
    assert_eq!(s, PtreadoutStatus::Ok);
    // 0.04 / (2 - i) = 0.016 + 0.008 i
    assert!((z.re - 0.016).abs() < 1e-15 && (z.im - 0.008).abs() < 1e-15);
    assert_eq!(last_error(), "");
    let s = unsafe { ptreadout_dispersive_shift(h.0, 7, &mut z) };
    assert_eq!(s, PtreadoutStatus::InvalidArgument);
}

#[test]
fn eigenvalue_buffer_protocol() {
    let h = Handle::preset("fig4d");
    let mut buf = [PtreadoutComplex { re: 0.0, im: 0.0 }; 3];
    let mut n = 0usize;
    let s = unsafe { ptreadout_eigenvalues(h.0, PTREADOUT_BRANCH_ABSENT, buf.as_mut_ptr(), 2, &mut n) };
    assert_eq!(s, PtreadoutStatus::BufferTooSmall);
    assert_eq!(n, 3);
    let s = unsafe { ptreadout_eigenvalues(h.0, PTREADOUT_BRANCH_ABSENT, buf.as_mut_ptr(), 3, &mut n) };
    assert_eq!(s, PtreadoutStatus::Ok);
    let sum_im: f64 = buf.iter().map(|z| z.im).sum();
    // trace of the qubit-free three-cavity matrix is -i kappa_a + i kappa_c = 0
    assert!(sum_im.abs() < 1e-12);
}

#[test]
fn transmission_at_the_ep() {
    let h = Handle::preset("fig3d");
    let mut z = PtreadoutComplex { re: 0.0, im: 0.0 };
    let mut flag = false;
    let s = unsafe { ptreadout_s21(h.0, PTREADOUT_BRANCH_ABSENT, 0.0, &mut z, &mut flag) };
    assert_eq!(s, PtreadoutStatus::Ok);
    assert!(flag);
    let s = unsafe { ptreadout_s21(h.0, PTREADOUT_BRANCH_EXCITED, 0.0, &mut z, ptr::null_mut()) };
    assert_eq!(s, PtreadoutStatus::Ok);
    assert!(((z.re * z.re + z.im * z.im) / 3125.0 - 1.0).abs() < 1e-9);
}

#[test]
fn exceptional_points() {
    let mut ep = PtreadoutEp {
        coupling: 0.0,
        order: 0,
        value: PtreadoutComplex { re: 0.0, im: 0.0 },
        gap: 0.0,
        analytic: false,
    };
    let h = Handle::preset("ep3-find");
    assert_eq!(unsafe { ptreadout_find_ep(h.0, &mut ep) }, PtreadoutStatus::Ok);
    assert_eq!(ep.order, 3);
    assert!(!ep.analytic);
    assert!((ep.coupling - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);

    let h = Handle::preset("ep2-find");
    h.set("delta_b", 0.5);
    h.set("kappa_b", 0.5);
    assert_eq!(
        unsafe { ptreadout_find_ep(h.0, &mut ep) },
        PtreadoutStatus::NumericalFailure
    );
    assert!(last_error().contains("no exceptional point"), "{}", last_error());
}

#[test]
fn null_pointers_are_reported() {
    let mut z = PtreadoutComplex { re: 0.0, im: 0.0 };
    let s = unsafe { ptreadout_dispersive_shift(ptr::null(), 0, &mut z) };
    assert_eq!(s, PtreadoutStatus::NullPointer);
    let h = Handle::preset("fig3a");
    let s = unsafe { ptreadout_dispersive_shift(h.0, 0, ptr::null_mut()) };
    assert_eq!(s, PtreadoutStatus::NullPointer);
    assert!(unsafe { ptreadout_params_from_preset(ptr::null()) }.is_null());
    assert!(unsafe { ptreadout_params_from_preset(cstr("fig9").as_ptr()) }.is_null());
    assert!(last_error().contains("fig9"));
    unsafe { ptreadout_params_free(ptr::null_mut()) };
}

#[test]
fn invalid_parameters_surface_on_use() {
    let h = Handle::preset("fig3a");
    assert_eq!(h.set("kappa_a", 0.0), PtreadoutStatus::Ok);
    let mut z = PtreadoutComplex { re: 0.0, im: 0.0 };
    let s = unsafe { ptreadout_s21(h.0, 1, 0.0, &mut z, ptr::null_mut()) };
    assert_eq!(s, PtreadoutStatus::InvalidParams);
    assert!(last_error().contains("kappa_a must be positive"));
}

#[test]
fn scenario_runs_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = cstr(dir.path().to_str().unwrap());
    let s = unsafe { ptreadout_run_scenario(cstr("fig3d").as_ptr(), out.as_ptr()) };
    assert_eq!(s, PtreadoutStatus::Ok, "{}", last_error());
    for f in ["trace_ground.csv", "trace_excited.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let s = unsafe { ptreadout_run_scenario(cstr("nope").as_ptr(), out.as_ptr()) };
    assert_eq!(s, PtreadoutStatus::InvalidArgument);

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"transmission\"\n[params]\nkappa_a = -1.0\n").unwrap();
    let s = unsafe { ptreadout_run_scenario(cstr(cfg.to_str().unwrap()).as_ptr(), out.as_ptr()) };
    assert_eq!(s, PtreadoutStatus::InvalidParams);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ptreadout_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
