use std::path::{Path, PathBuf};

use basel_panel::cli::run_with;
use basel_panel::model::{simulate_panel, CoefficientSet};
use basel_panel::panel::PanelDataset;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("basel-panel").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let r = run(&a);
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SHEET_HEADER: &str = "bank_id,year,common_equity,debt_ge_1y,other_liabilities_ge_1y,stable_deposits_lt_1y,less_stable_deposits_lt_1y,govt_debt,corp_loans_lt_1y,retail_loans_lt_1y,other_assets";

fn sim_panel(dir: &TempDir, ds: &PanelDataset) -> PathBuf {
    let p = dir.path().join("panel.csv");
    ds.save_csv(&p).unwrap();
    p
}

#[test]
fn ratios_worked_example() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "bs.csv",
        &format!("{SHEET_HEADER}\nB01,2014,100,50,0,200,100,100,300,100,100\n"),
    );
    let v = json(&["ratios", "--input", s(&f)]);
    let nsfr = v["rows"][0]["nsfr"].as_f64().unwrap();
    assert_eq!(format!("{nsfr:.5}"), "1.14706");
    let text = run(&["ratios", "--input", s(&f)]);
    assert_eq!(text.code, 0);
    assert!(text.stdout.contains("1.147"));
    assert!(text.stdout.contains("B01"));
}

#[test]
fn ratios_header_only_is_empty_table() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bs.csv", &format!("{SHEET_HEADER}\n"));
    let r = run(&["ratios", "--input", s(&f)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&["ratios", "--input", s(&f)]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn ratios_tce_needs_rwa_column() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "bs.csv",
        &format!(
            "{SHEET_HEADER},intangibles,goodwill\nB01,2014,100,50,0,200,100,100,300,100,100,5,1\n"
        ),
    );
    let r = run(&["ratios", "--input", s(&f), "--tce"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("rwa"), "{}", r.stderr);
}

#[test]
fn ratios_reports_bad_row() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "bs.csv",
        &format!("{SHEET_HEADER}\nB01,2014,100,50,0,200,100,100,300,100,100\nB02,2014,1,x,0,2,1,1,3,1,1\n"),
    );
    let r = run(&["ratios", "--input", s(&f)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains('3'), "{}", r.stderr);
}

#[test]
fn unitroot_stationary_and_random_walk() {
    let dir = TempDir::new().unwrap();
    // liq is stationary around bank levels in the simulator
    let ds = simulate_panel(&CoefficientSet::paper_preset(), 60, 6, 0.01, 4).unwrap();
    // a random walk added as its own column
    let mut walk = Vec::new();
    let mut state = 12345u64;
    for _ in 0..60 {
        let mut level = 0.0;
        for _ in 0..6 {
            walk.push(Some(level));
            // splitmix-style uniform increments, mean zero
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            level += (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
    }
    let ds = ds.with_column("walk", walk).unwrap();
    let p = sim_panel(&dir, &ds);
    let v = json(&[
        "unitroot",
        "--panel",
        s(&p),
        "--var",
        "liq",
        "--var",
        "walk",
    ]);
    assert!(v[0]["p_value"].as_f64().unwrap() < 0.05);
    // rho near 1 + mu with mu = -3/(T_reg + 1) = -0.5
    let rho = v[1]["rho_hat"].as_f64().unwrap();
    assert!((rho - 0.5).abs() < 0.25, "rho {rho}");

    let text = run(&["unitroot", "--panel", s(&p), "--var", "liq"]);
    assert!(text.stdout.contains("variable") && text.stdout.contains("rho"));

    let r = run(&["unitroot", "--panel", s(&p), "--var", "nonesuch"]);
    assert_eq!(r.code, 2);
}

#[test]
fn unitroot_unbalanced_is_input_error() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "p.csv",
        "bank_id,year,x\nA,1,1\nA,2,2\nA,3,1.5\nB,1,0.3\nB,3,0.2\n",
    );
    let r = run(&["unitroot", "--panel", s(&f), "--var", "x"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("every bank"), "{}", r.stderr);
}

#[test]
fn fit_all_recovers_preset_and_writes_coefficients() {
    let dir = TempDir::new().unwrap();
    let ds = simulate_panel(&CoefficientSet::paper_preset(), 22, 5, 0.01, 9).unwrap();
    let p = sim_panel(&dir, &ds);
    let out = dir.path().join("coeffs.json");
    let v = json(&[
        "fit",
        "--panel",
        s(&p),
        "--model",
        "all",
        "--coeffs-out",
        s(&out),
    ]);
    for (eq, term, want) in [
        ("spread", "liq", 0.639),
        ("lending", "spread", -0.306),
        ("roe", "cap", -0.49),
    ] {
        let got = v[eq]["coefficients"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == term)
            .unwrap()["estimate"]
            .as_f64()
            .unwrap();
        assert!((got - want).abs() < 0.05, "{eq}.{term} = {got}");
    }
    let set = CoefficientSet::load(&out).unwrap();
    assert!((set.spread.liq - 0.639).abs() < 0.05);

    let text = run(&["fit", "--panel", s(&p), "--model", "all"]);
    assert_eq!(text.code, 0);
    assert_eq!(text.stdout.matches("Dependent:").count(), 3);
}

#[test]
fn fit_echoes_bandwidth() {
    let dir = TempDir::new().unwrap();
    let ds = simulate_panel(&CoefficientSet::paper_preset(), 10, 6, 0.01, 2).unwrap();
    let p = sim_panel(&dir, &ds);
    let v = json(&[
        "fit",
        "--panel",
        s(&p),
        "--model",
        "spread",
        "--dk-lags",
        "2",
    ]);
    assert_eq!(v["bandwidth"], 2);
    let text = run(&[
        "fit",
        "--panel",
        s(&p),
        "--model",
        "spread",
        "--dk-lags",
        "2",
    ]);
    assert!(text.stdout.contains("bandwidth 2"), "{}", text.stdout);
}

#[test]
fn fit_collinear_regressor_exits_3_naming_it() {
    let dir = TempDir::new().unwrap();
    let ds = simulate_panel(&CoefficientSet::paper_preset(), 8, 5, 0.01, 2).unwrap();
    let liq = ds.column("liq").unwrap().to_vec();
    let ds = ds.with_column("liq_copy", liq).unwrap();
    let p = sim_panel(&dir, &ds);
    let base = [
        "fit",
        "--panel",
        s(&p),
        "--model",
        "custom",
        "--dep",
        "spread",
    ];

    let mut args = base.to_vec();
    args.extend(["--reg", "liq", "--reg", "cap", "--reg", "liq_copy"]);
    let r = run(&args);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("liq_copy"), "{}", r.stderr);

    let mut args = base.to_vec();
    args.extend(["--reg", "cap", "--reg", "cap"]);
    let r = run(&args);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("cap"), "{}", r.stderr);
}

#[test]
fn fit_input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let ds = simulate_panel(&CoefficientSet::paper_preset(), 5, 4, 0.01, 2).unwrap();
    let p = sim_panel(&dir, &ds);
    assert_eq!(
        run(&[
            "fit",
            "--panel",
            s(&p),
            "--model",
            "custom",
            "--dep",
            "spread",
            "--reg",
            "zzz"
        ])
        .code,
        2
    );
    assert_eq!(
        run(&["fit", "--panel", "/no/such/file.csv", "--model", "spread"]).code,
        2
    );
    assert_eq!(run(&["fit", "--panel", s(&p)]).code, 2);
}

#[test]
fn simulate_shocks() {
    let v = json(&["simulate", "--dliq", "1", "--coeffs", "paper"]);
    assert!((v["delta_spread"].as_f64().unwrap() - 0.639).abs() < 1e-12);
    let v = json(&["simulate", "--dcap", "2.5", "--coeffs", "paper"]);
    assert!((v["delta_spread"].as_f64().unwrap() - 0.4225).abs() < 1e-12);
    let v = json(&["simulate"]);
    for k in ["delta_spread", "delta_lending", "delta_lgdp", "delta_roe"] {
        assert_eq!(v[k].as_f64().unwrap(), 0.0);
    }
    let text = run(&["simulate", "--dliq", "1"]);
    assert_eq!(text.code, 0);
    assert!(text.stdout.contains("0.6390"), "{}", text.stdout);
}

#[test]
fn simulate_phase_in_and_csv() {
    let v = json(&["simulate", "--phase-in", "2015:2019"]);
    assert!((v["cumulative"]["delta_spread"].as_f64().unwrap() - 0.4225).abs() < 1e-12);
    let r = run(&["simulate", "--phase-in", "2015:2019", "--format", "csv"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().count(), 5);
    assert_eq!(run(&["simulate", "--phase-in", "2019:2015"]).code, 2);
    assert_eq!(run(&["simulate", "--phase-in", "nonsense"]).code, 2);
}

#[test]
fn simulate_bad_coefficient_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "c.json", "{\"spread\": 1}");
    assert_eq!(run(&["simulate", "--coeffs", s(&f), "--dliq", "1"]).code, 2);
    assert_eq!(run(&["simulate", "--coeffs", "/no/such.json"]).code, 2);
}

#[test]
fn identical_config_gives_identical_json() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(
        run(&["simulate", "--panel-out", s(&a), "--seed", "17"]).code,
        0
    );
    assert_eq!(
        run(&["simulate", "--panel-out", s(&b), "--seed", "17"]).code,
        0
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let args = [
        "fit",
        "--panel",
        s(&a),
        "--model",
        "all",
        "--format",
        "json",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = [
        "simulate", "--dliq", "0.3", "--dcap", "1.1", "--format", "json",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn phasein_views() {
    let text = run(&["phasein"]);
    assert_eq!(text.code, 0);
    assert!(text.stdout.contains("5.125") && text.stdout.contains("12.50"));
    let v = json(&["phasein", "--deltas", "2015:2019"]);
    assert!(v.to_string().contains("2.5"));

    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "pos.csv",
        "bank_id,year,cet1_ratio_pct,tier1_ratio_pct,total_car_pct,leverage_pct,lcr,nsfr\n\
         B01,2019,8,9,13,4,1.2,1.1\n\
         B02,2019,6,7,11,4,1.2,1.1\n",
    );
    let v = json(&["phasein", "--check", s(&f)]);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports[0]["pass"], true);
    assert_eq!(reports[1]["pass"], false);
}

#[test]
fn help_and_usage_codes() {
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["bogus"]).code, 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let r = run(&[
        "simulate",
        "--dliq",
        "1",
        "--format",
        "json",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(v["trace"].is_array());
}
