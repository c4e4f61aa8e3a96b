use std::ffi::{c_char, CStr, CString};
use std::ptr;

use covscat_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let mut needed = 0usize;
    unsafe {
        covscat_last_error(buf.as_mut_ptr(), buf.len(), &mut needed);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn on_shell(m: f64, p: [f64; 3]) -> [f64; 4] {
    [(m * m + p.iter().map(|x| x * x).sum::<f64>()).sqrt(), p[0], p[1], p[2]]
}

#[test]
fn center_round_trip() {
    let masses = [1.0, 2.5, 0.3];
    let p: Vec<f64> = [on_shell(1.0, [0.2, -0.4, 1.1]), on_shell(2.5, [-0.7, 0.3, 0.0]), on_shell(0.3, [0.1, 0.9, -0.5])].concat();
    let mut u = [0.0; 4];
    let mut q = [0.0; 12];
    let mut back = [0.0; 12];
    unsafe {
        assert_eq!(covscat_to_center(3, p.as_ptr(), masses.as_ptr(), u.as_mut_ptr(), q.as_mut_ptr()), CovscatStatus::Ok);
        assert_eq!(covscat_from_center(3, u.as_ptr(), q.as_ptr(), masses.as_ptr(), back.as_mut_ptr()), CovscatStatus::Ok);
    }
    assert!((u[0] * u[0] - u[1] * u[1] - u[2] * u[2] - u[3] * u[3] - 1.0).abs() < 1e-12);
    for i in 0..4 {
        assert!((q[i] + q[4 + i] + q[8 + i]).abs() < 1e-12);
    }
    for (a, b) in p.iter().zip(&back) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn off_shell_input_is_reported() {
    let masses = [1.0, 1.0];
    let p = [1.0, 0.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
    let mut u = [0.0; 4];
    let mut q = [0.0; 8];
    let s = unsafe { covscat_to_center(2, p.as_ptr(), masses.as_ptr(), u.as_mut_ptr(), q.as_mut_ptr()) };
    assert_eq!(s, CovscatStatus::Numerical);
    assert!(last_error().contains("off its mass shell"));
    let s = unsafe { covscat_to_center(2, ptr::null(), masses.as_ptr(), u.as_mut_ptr(), q.as_mut_ptr()) };
    assert_eq!(s, CovscatStatus::NullPointer);
}

#[test]
fn phase_shift_and_mass_operator() {
    let well = CovscatPotential { kind: COVSCAT_POTENTIAL_SQUARE_WELL, depth: 0.5, length: 1.0 };
    let mut d = 0.0;
    unsafe {
        assert_eq!(covscat_phase_shift(0, 1.0, 1.0, well, 1.0, &mut d), CovscatStatus::Ok);
    }
    // tan(δ + z a) = (z/z′) tan(z′a), z′² = z² + 2μV₀
    let zp: f64 = (1.0f64 + 0.5).sqrt();
    let exact = -1.0 + (zp.tan() / zp).atan();
    assert!((d - exact).abs() < 1e-7, "{d} vs {exact}");

    let bad = CovscatPotential { kind: 9, depth: 0.0, length: 0.0 };
    assert_eq!(unsafe { covscat_phase_shift(0, 1.0, 1.0, bad, 1.0, &mut d) }, CovscatStatus::InvalidArgument);

    let deep = CovscatPotential { kind: COVSCAT_POTENTIAL_SQUARE_WELL, depth: 3.0, length: 1.0 };
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(covscat_mass_operator_new(0, 300, 30.0, 1.0, 1.0, deep, &mut op), CovscatStatus::Ok);
        let mut n = 0;
        let mut bound = 0;
        covscat_mass_operator_dim(op, &mut n);
        covscat_mass_operator_bound_states(op, &mut bound);
        assert_eq!((n, bound), (300, 1));
        let mut ev = vec![0.0; n];
        assert_eq!(covscat_mass_operator_eigenvalues(op, ev.as_mut_ptr(), 10), CovscatStatus::BufferTooSmall);
        assert_eq!(covscat_mass_operator_eigenvalues(op, ev.as_mut_ptr(), n), CovscatStatus::Ok);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]) && ev[0] < 2.0);
        covscat_mass_operator_free(op);

        // Potential reaching into the outer third of the grid.
        let wide = CovscatPotential { kind: COVSCAT_POTENTIAL_SQUARE_WELL, depth: 1.0, length: 25.0 };
        assert_eq!(covscat_mass_operator_new(0, 300, 30.0, 1.0, 1.0, wide, &mut op), CovscatStatus::Config);
        assert!(last_error().contains("asymptotic region"));
    }
}

#[test]
fn config_validate_and_run() {
    let text = CString::new("experiment = \"phaseshift\"\n[potential]\nkind = \"zero\"\n").unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(covscat_config_from_toml(text.as_ptr(), &mut cfg), CovscatStatus::Ok);
        let mut count = 7;
        assert_eq!(covscat_config_validate(cfg, &mut count, ptr::null_mut(), 0, ptr::null_mut()), CovscatStatus::Ok);
        assert_eq!(count, 0);
        let mut digest = [0 as c_char; 65];
        assert_eq!(covscat_config_digest(cfg, digest.as_mut_ptr(), 65), CovscatStatus::Ok);
        assert_eq!(CStr::from_ptr(digest.as_ptr()).to_bytes().len(), 64);

        let set = CString::new("phaseshift.points=20").unwrap();
        assert_eq!(covscat_config_set(cfg, set.as_ptr()), CovscatStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(covscat_run(cfg, &mut run), CovscatStatus::Ok);
        let (mut passed, mut n) = (false, 0);
        covscat_run_passed(run, &mut passed, &mut n);
        assert!(passed && n == 1);
        let mut name = [0 as c_char; 64];
        let mut value = 1.0;
        covscat_run_verdict(run, 0, &mut passed, &mut value, ptr::null_mut());
        covscat_run_verdict_name(run, 0, name.as_mut_ptr(), 64, ptr::null_mut());
        assert_eq!(value, 0.0);
        assert_eq!(CStr::from_ptr(name.as_ptr()).to_str().unwrap(), "phaseshift.zero_potential_max_abs");
        let mut needed = 0;
        assert_eq!(covscat_run_summary_json(run, ptr::null_mut(), 0, &mut needed), CovscatStatus::BufferTooSmall);
        let mut json = vec![0 as c_char; needed];
        assert_eq!(covscat_run_summary_json(run, json.as_mut_ptr(), needed, &mut needed), CovscatStatus::Ok);
        assert!(CStr::from_ptr(json.as_ptr()).to_str().unwrap().contains("\"experiment\": \"phaseshift\""));

        let dir = std::env::temp_dir().join(format!("covscat-ffi-{}", std::process::id()));
        let cdir = CString::new(dir.to_str().unwrap()).unwrap();
        assert_eq!(covscat_run_write(run, cdir.as_ptr(), true), CovscatStatus::Ok);
        assert!(dir.join("phase_shifts.csv").exists() && dir.join("phase_shifts.dat").exists());
        std::fs::remove_dir_all(&dir).ok();
        covscat_run_free(run);

        let bad = CString::new("grid.radius=-1").unwrap();
        assert_eq!(covscat_config_set(cfg, bad.as_ptr()), CovscatStatus::Ok);
        let mut msg = vec![0 as c_char; 1024];
        covscat_config_validate(cfg, &mut count, msg.as_mut_ptr(), msg.len(), ptr::null_mut());
        assert!(count >= 1);
        assert!(CStr::from_ptr(msg.as_ptr()).to_str().unwrap().contains("grid"));
        let mut run = ptr::null_mut();
        assert_eq!(covscat_run(cfg, &mut run), CovscatStatus::Config);
        assert!(run.is_null());
        covscat_config_free(cfg);
    }
    let junk = CString::new("experiment = 3").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { covscat_config_from_toml(junk.as_ptr(), &mut cfg) }, CovscatStatus::Config);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/covscat.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["covscat_to_center", "covscat_run", "covscat_mass_operator_free", "typedef struct CovscatConfig CovscatConfig"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(status.success());
}
