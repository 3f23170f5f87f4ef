use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use basel_panel_ffi::*;

fn last_error() -> String {
    let p = bp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { bp_string_free(p) };
    s
}

fn worked_sheet() -> BpBalanceSheet {
    BpBalanceSheet {
        common_equity: 10.0,
        debt_ge_1y: 20.0,
        other_liabilities_ge_1y: 0.0,
        stable_deposits_lt_1y: 40.0,
        less_stable_deposits_lt_1y: 30.0,
        govt_debt: 20.0,
        corp_loans_lt_1y: 40.0,
        retail_loans_lt_1y: 30.0,
        other_assets: 30.0,
        intangibles: 2.0,
        goodwill: 1.0,
        rwa: 70.0,
    }
}

#[test]
fn nsfr_and_tce_through_c_structs() {
    let sheet = worked_sheet();
    let mut nsfr = 0.0;
    assert_eq!(
        unsafe { bp_compute_nsfr(&sheet, ptr::null(), &mut nsfr) },
        BP_OK
    );
    let asf = 1.0 * 30.0 + 0.85 * 40.0 + 0.70 * 30.0;
    let rsf = 0.05 * 20.0 + 0.50 * 40.0 + 0.85 * 30.0 + 1.0 * 30.0;
    assert!((nsfr - asf / rsf).abs() < 1e-12);
    assert!(bp_last_error().is_null());

    let mut w = BpNsfrWeights::default();
    assert_eq!(unsafe { bp_nsfr_default_weights(&mut w) }, BP_OK);
    assert_eq!(w.rsf_corp_loans, 0.5);
    w.asf_stable_deposits = 1.0;
    let mut custom = 0.0;
    assert_eq!(unsafe { bp_compute_nsfr(&sheet, &w, &mut custom) }, BP_OK);
    assert!(custom > nsfr);

    let mut tce = 0.0;
    let mut negative = true;
    assert_eq!(
        unsafe { bp_compute_tce_rwa(&sheet, &mut tce, &mut negative) },
        BP_OK
    );
    assert!((tce - 0.1).abs() < 1e-12);
    assert!(!negative);
}

#[test]
fn ratio_errors_set_message() {
    let sheet = BpBalanceSheet {
        common_equity: 1.0,
        ..Default::default()
    };
    let mut v = 0.0;
    assert_eq!(
        unsafe { bp_compute_nsfr(&sheet, ptr::null(), &mut v) },
        BP_ERR_INPUT
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { bp_compute_tce_rwa(&sheet, &mut v, ptr::null_mut()) },
        BP_ERR_INPUT
    );
    assert!(last_error().contains("risk-weighted"));
    assert_eq!(
        unsafe { bp_compute_nsfr(ptr::null(), ptr::null(), &mut v) },
        BP_ERR_NULL
    );
    assert_eq!(
        unsafe { bp_compute_nsfr(&sheet, ptr::null(), ptr::null_mut()) },
        BP_ERR_NULL
    );
}

#[test]
fn shock_propagation_matches_preset() {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { bp_coefficients_paper_preset(&mut c) }, BP_OK);
    let mut s = BpScenario::default();
    assert_eq!(
        unsafe { bp_propagate_shock(c, 1.0, 0.0, false, 0.0, &mut s) },
        BP_OK
    );
    assert!((s.delta_spread - 0.639).abs() < 1e-12);
    assert!((s.delta_lending + 0.306 * 0.639).abs() < 1e-12);
    assert_eq!(
        unsafe { bp_propagate_shock(c, 0.0, 0.0, true, 1.0, &mut s) },
        BP_OK
    );
    assert!((s.delta_roe - 1.36).abs() < 1e-12);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { bp_coefficients_to_json(c, &mut json) }, BP_OK);
    let text = CString::new(take_string(json)).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { bp_coefficients_from_json(text.as_ptr(), &mut back) },
        BP_OK
    );
    let mut s2 = BpScenario::default();
    unsafe { bp_propagate_shock(back, 0.3, 0.7, false, 0.0, &mut s2) };
    unsafe { bp_propagate_shock(c, 0.3, 0.7, false, 0.0, &mut s) };
    assert_eq!(s.delta_roe, s2.delta_roe);
    unsafe {
        bp_coefficients_free(back);
        bp_coefficients_free(c);
    }

    let bad = CString::new("{not json").unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(
        unsafe { bp_coefficients_from_json(bad.as_ptr(), &mut none) },
        BP_ERR_INPUT
    );
    assert!(none.is_null());
}

#[test]
fn simulate_fit_and_unit_root() {
    let mut c = ptr::null_mut();
    unsafe { bp_coefficients_paper_preset(&mut c) };
    let mut panel = ptr::null_mut();
    assert_eq!(
        unsafe { bp_simulate_panel(c, 22, 5, 0.01, 7, &mut panel) },
        BP_OK
    );
    let (mut n, mut t) = (0usize, 0usize);
    assert_eq!(unsafe { bp_panel_dims(panel, &mut n, &mut t) }, BP_OK);
    assert_eq!((n, t), (22, 5));

    let dep = CString::new("spread").unwrap();
    let regs = [CString::new("liq").unwrap(), CString::new("cap").unwrap()];
    let reg_ptrs: Vec<*const c_char> = regs.iter().map(|r| r.as_ptr()).collect();
    let mut fit = ptr::null_mut();
    let status = unsafe {
        bp_fit_within_dk(
            panel,
            dep.as_ptr(),
            reg_ptrs.as_ptr(),
            2,
            true,
            true,
            -1,
            &mut fit,
        )
    };
    assert_eq!(status, BP_OK);
    let mut k = 0;
    unsafe { bp_fit_n_coefficients(fit, &mut k) };
    assert_eq!(k, 3);
    let mut name = ptr::null_mut();
    assert_eq!(unsafe { bp_fit_coefficient_name(fit, 1, &mut name) }, BP_OK);
    assert_eq!(take_string(name), "liq");
    let mut coef = BpCoefficient::default();
    assert_eq!(unsafe { bp_fit_coefficient(fit, 1, &mut coef) }, BP_OK);
    assert!((coef.estimate - 0.639).abs() < 0.05);
    assert!(coef.std_error > 0.0 && coef.p_value < 0.01);
    assert_eq!(
        unsafe { bp_fit_coefficient(fit, 9, &mut coef) },
        BP_ERR_INPUT
    );

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { bp_fit_to_json(fit, &mut json) }, BP_OK);
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["bandwidth"], 2);
    unsafe { bp_fit_free(fit) };

    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { bp_fit_system(panel, &mut sys) }, BP_OK);
    unsafe { bp_coefficients_free(sys) };

    let col = CString::new("liq").unwrap();
    let mut ur = BpUnitRoot::default();
    assert_eq!(
        unsafe { bp_harris_tzavalis(panel, col.as_ptr(), &mut ur) },
        BP_OK
    );
    assert_eq!((ur.n_entities, ur.n_periods), (22, 5));
    assert!((0.0..=1.0).contains(&ur.p_value));

    unsafe {
        bp_panel_free(panel);
        bp_coefficients_free(c);
    }
}

#[test]
fn collinear_fit_reports_estimation_error() {
    let dir = std::env::temp_dir().join(format!("bp-ffi-col-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("p.csv");
    let mut csv = String::from("bank_id,year,y,x,x_copy\n");
    for i in 0..12 {
        let x = (i * 5) % 7;
        csv.push_str(&format!("B{},{},{},{x},{x}\n", i / 4, 2000 + i % 4, i));
    }
    std::fs::write(&path, csv).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut panel = ptr::null_mut();
    assert_eq!(
        unsafe { bp_panel_load(cpath.as_ptr(), ptr::null(), &mut panel) },
        BP_OK
    );

    let dep = CString::new("y").unwrap();
    let regs = [CString::new("x").unwrap(), CString::new("x_copy").unwrap()];
    let reg_ptrs: Vec<*const c_char> = regs.iter().map(|r| r.as_ptr()).collect();
    let mut fit = ptr::null_mut();
    let status = unsafe {
        bp_fit_within_dk(
            panel,
            dep.as_ptr(),
            reg_ptrs.as_ptr(),
            2,
            true,
            true,
            0,
            &mut fit,
        )
    };
    assert_eq!(status, BP_ERR_ESTIMATION);
    assert!(fit.is_null());
    assert!(last_error().contains("x_copy"));
    unsafe { bp_panel_free(panel) };
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn panel_csv_round_trip() {
    let mut c = ptr::null_mut();
    unsafe { bp_coefficients_paper_preset(&mut c) };
    let mut panel = ptr::null_mut();
    unsafe { bp_simulate_panel(c, 3, 4, 0.0, 3, &mut panel) };
    let dir = std::env::temp_dir().join(format!("bp-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = CString::new(dir.join("p.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { bp_panel_save_csv(panel, path.as_ptr()) }, BP_OK);
    let mut loaded = ptr::null_mut();
    assert_eq!(
        unsafe { bp_panel_load(path.as_ptr(), ptr::null(), &mut loaded) },
        BP_OK
    );
    let (mut n, mut t) = (0, 0);
    unsafe { bp_panel_dims(loaded, &mut n, &mut t) };
    assert_eq!((n, t), (3, 4));

    let missing = CString::new(dir.join("nope.csv").to_str().unwrap()).unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(
        unsafe { bp_panel_load(missing.as_ptr(), ptr::null(), &mut none) },
        BP_ERR_INPUT
    );
    let bad_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { bp_panel_load(bad_utf8.as_ptr().cast(), ptr::null(), &mut none) },
        BP_ERR_UTF8
    );
    unsafe {
        bp_panel_free(loaded);
        bp_panel_free(panel);
        bp_coefficients_free(c);
        bp_panel_free(ptr::null_mut());
    }
    std::fs::remove_dir_all(dir).ok();
}

fn header_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/basel_panel.h")
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    for f in [
        "bp_last_error",
        "bp_string_free",
        "bp_panel_load",
        "bp_panel_free",
        "bp_panel_dims",
        "bp_panel_save_csv",
        "bp_fit_within_dk",
        "bp_fit_free",
        "bp_fit_n_coefficients",
        "bp_fit_coefficient",
        "bp_fit_coefficient_name",
        "bp_fit_to_json",
        "bp_harris_tzavalis",
        "bp_nsfr_default_weights",
        "bp_compute_nsfr",
        "bp_compute_tce_rwa",
        "bp_coefficients_paper_preset",
        "bp_coefficients_from_json",
        "bp_coefficients_to_json",
        "bp_coefficients_free",
        "bp_fit_system",
        "bp_propagate_shock",
        "bp_simulate_panel",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    for code in [
        "BP_OK 0",
        "BP_ERR_NULL 1",
        "BP_ERR_INPUT 2",
        "BP_ERR_ESTIMATION 3",
    ] {
        assert!(header.contains(code), "{code} missing");
    }
    assert!(header.contains("typedef struct BpPanel BpPanel;"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    if !cc.status.success() {
        return;
    }
    let dir = std::env::temp_dir().join(format!("bp-hdr-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"basel_panel.h\"\n\
         int main(void) {\n\
           BpBalanceSheet s = {0};\n\
           double v;\n\
           BpStatus st = bp_compute_nsfr(&s, NULL, &v);\n\
           return st == BP_ERR_INPUT ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    std::fs::remove_dir_all(dir).ok();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
