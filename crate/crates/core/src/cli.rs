//! `basel-panel` command-line front end.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 estimation error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::basel::{
    available_stable_funding, check_compliance, compute_nsfr, compute_tce_rwa, load_balance_sheets,
    load_capital_positions, required_deltas, required_stable_funding, ComplianceReport,
    NsfrWeights, PhaseInSchedule, RequirementDeltas,
};
use crate::econometrics::{
    fit_within_dk, format_fit_table, format_unit_root_table, harris_tzavalis, pooled_ols,
    Bandwidth, FitResult, RegressionSpec, UnitRootResult,
};
use crate::error::{Error, ErrorKind};
use crate::model::{
    fit_system_with, format_phase_in, format_scenario, phase_in_scenario, propagate_shock,
    simulate_panel, write_plot_csv, CoefficientSet, LendingMode, RoeForm, ScenarioInput,
    SystemColumns, SystemOptions,
};
use crate::panel::{apply_schema, load_panel, load_schema, PanelDataset, VariableSpec};
use crate::text::{sig4, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ESTIMATION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "basel-panel",
    version,
    about = "Basel III ratios, panel estimation and regulatory cost scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct PanelArgs {
    /// Wide panel CSV (`bank_id,year,<vars>...`).
    #[arg(long)]
    pub panel: PathBuf,
    /// JSON schema listing variables and their transforms.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Spread,
    Lending,
    Roe,
    All,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoeFormArg {
    Estimated,
    Specification,
}

impl From<RoeFormArg> for RoeForm {
    fn from(a: RoeFormArg) -> Self {
        match a {
            RoeFormArg::Estimated => RoeForm::Estimated,
            RoeFormArg::Specification => RoeForm::Specification,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// NSFR (and optionally TCE/RWA) per bank-year from a balance-sheet CSV.
    Ratios {
        #[arg(long)]
        input: PathBuf,
        /// JSON override of the NSFR weights.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Also compute TCE/RWA (requires intangibles, goodwill, rwa columns).
        #[arg(long)]
        tce: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the phase-in schedule, check capital positions, or diff two years.
    Phasein {
        /// Capital-position CSV to check against the schedule.
        #[arg(long)]
        check: Option<PathBuf>,
        /// Requirement changes between two years, `FROM:TO`.
        #[arg(long)]
        deltas: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Harris–Tzavalis unit-root test for one or more panel variables.
    Unitroot {
        #[command(flatten)]
        input: PanelArgs,
        /// Variable to test (repeatable).
        #[arg(long = "var", required = true)]
        vars: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fixed-effects regression with Driscoll–Kraay standard errors.
    Fit {
        #[command(flatten)]
        input: PanelArgs,
        #[arg(long, value_enum)]
        model: ModelChoice,
        /// Dependent variable for `--model custom`.
        #[arg(long)]
        dep: Option<String>,
        /// Regressor for `--model custom` (repeatable).
        #[arg(long = "reg")]
        regs: Vec<String>,
        /// Driscoll–Kraay lag truncation; automatic when omitted.
        #[arg(long)]
        dk_lags: Option<usize>,
        /// Pooled OLS instead of the within estimator.
        #[arg(long)]
        no_fe: bool,
        #[arg(long)]
        no_intercept: bool,
        #[arg(long, value_enum, default_value_t = RoeFormArg::Estimated)]
        roe_form: RoeFormArg,
        /// Where to write the fitted coefficient set (`--model all`).
        #[arg(long)]
        coeffs_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Propagate capital/liquidity shocks, run the phase-in path, or generate
    /// a synthetic panel.
    Simulate {
        /// `paper` or a coefficient-set JSON file.
        #[arg(long, default_value = "paper")]
        coeffs: String,
        /// Liquidity shock, percentage points (per year with `--phase-in`).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dliq: f64,
        /// Capital shock, percentage points.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dcap: f64,
        /// Use this L/GDP change instead of chaining it from lending.
        #[arg(long, allow_hyphen_values = true)]
        exogenous_lgdp: Option<f64>,
        /// Run the schedule between two years, `FROM:TO`.
        #[arg(long)]
        phase_in: Option<String>,
        /// Write a synthetic panel generated from the coefficients here.
        #[arg(long)]
        panel_out: Option<PathBuf>,
        #[arg(long, default_value_t = 22)]
        banks: usize,
        #[arg(long, default_value_t = 5)]
        years: usize,
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Estimation => EXIT_ESTIMATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Input errors that surface while loading data are always exit 2, even if
/// their kind would be an estimation error.
fn as_input(e: Error) -> Failure {
    input_failure(e.to_string())
}

type CmdResult = std::result::Result<String, Failure>;

/// Parses `args` (including the program name) and runs the command, writing
/// normal output to `stdout` (or `--out`) and diagnostics to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            let code = match e.kind() {
                K::DisplayHelp | K::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let _ = if code == EXIT_OK {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let output = match &cli.command {
        Command::Ratios { output, .. }
        | Command::Phasein { output, .. }
        | Command::Unitroot { output, .. }
        | Command::Fit { output, .. }
        | Command::Simulate { output, .. } => output,
    };
    let result = match &cli.command {
        Command::Ratios {
            input,
            weights,
            tce,
            output,
        } => cmd_ratios(input, weights.as_ref(), *tce, output.format),
        Command::Phasein {
            check,
            deltas,
            output,
        } => cmd_phasein(check.as_ref(), deltas.as_deref(), output.format),
        Command::Unitroot {
            input,
            vars,
            output,
        } => cmd_unitroot(input, vars, output.format),
        Command::Fit {
            input,
            model,
            dep,
            regs,
            dk_lags,
            no_fe,
            no_intercept,
            roe_form,
            coeffs_out,
            output,
        } => cmd_fit(
            input,
            &FitArgs {
                model: *model,
                dep: dep.clone(),
                regs: regs.clone(),
                dk_lags: *dk_lags,
                no_fe: *no_fe,
                no_intercept: *no_intercept,
                roe_form: (*roe_form).into(),
                coeffs_out: coeffs_out.clone(),
            },
            output.format,
        ),
        Command::Simulate {
            coeffs,
            dliq,
            dcap,
            exogenous_lgdp,
            phase_in,
            panel_out,
            banks,
            years,
            noise,
            seed,
            output,
        } => cmd_simulate(
            &SimulateArgs {
                coeffs: coeffs.clone(),
                dliq: *dliq,
                dcap: *dcap,
                exogenous_lgdp: *exogenous_lgdp,
                phase_in: phase_in.clone(),
                panel_out: panel_out.clone(),
                banks: *banks,
                years: *years,
                noise: *noise,
                seed: *seed,
            },
            output.format,
        ),
    };
    match result {
        Ok(text) => {
            let written = match &output.out {
                Some(path) => std::fs::write(path, text.as_bytes()),
                None => stdout.write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write output: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> std::result::Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_failure = |e: csv::Error| input_failure(e.to_string());
    w.write_record(header).map_err(to_failure)?;
    for r in rows {
        w.write_record(&r).map_err(to_failure)?;
    }
    let bytes = w.into_inner().map_err(|e| input_failure(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt_full(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn parse_range(s: &str) -> std::result::Result<(i32, i32), Failure> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| input_failure(format!("expected FROM:TO, got {s:?}")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<i32>()
            .map_err(|_| input_failure(format!("invalid year {x:?} in {s:?}")))
    };
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Serialize)]
struct RatioRow {
    bank_id: String,
    year: i32,
    asf: f64,
    rsf: f64,
    /// `None` when required stable funding is zero.
    nsfr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tce_rwa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    negative_tce: Option<bool>,
}

#[derive(Debug, Serialize)]
struct RatiosReport {
    weights: NsfrWeights,
    rows: Vec<RatioRow>,
}

fn cmd_ratios(
    input: &PathBuf,
    weights: Option<&PathBuf>,
    tce: bool,
    format: OutputFormat,
) -> CmdResult {
    let weights = match weights {
        Some(p) => NsfrWeights::load(p).map_err(as_input)?,
        None => NsfrWeights::default(),
    };
    let sheets = load_balance_sheets(input, tce).map_err(as_input)?;
    let mut rows = Vec::with_capacity(sheets.len());
    for bs in &sheets {
        let nsfr = compute_nsfr(bs, &weights).ok();
        let (tce_rwa, negative_tce) = if tce {
            match compute_tce_rwa(bs) {
                Ok(r) => (Some(r.value), Some(r.negative_tce)),
                Err(e) => return Err(input_failure(format!("({}, {}): {e}", bs.entity, bs.year))),
            }
        } else {
            (None, None)
        };
        rows.push(RatioRow {
            bank_id: bs.entity.clone(),
            year: bs.year,
            asf: available_stable_funding(bs, &weights),
            rsf: required_stable_funding(bs, &weights),
            nsfr,
            tce_rwa,
            negative_tce,
        });
    }
    Ok(match format {
        OutputFormat::Json => to_json(&RatiosReport { weights, rows }),
        OutputFormat::Csv => {
            let mut header = vec!["bank_id", "year", "asf", "rsf", "nsfr"];
            if tce {
                header.extend(["tce_rwa", "negative_tce"]);
            }
            let body = rows
                .iter()
                .map(|r| {
                    let mut v = vec![
                        r.bank_id.clone(),
                        r.year.to_string(),
                        format!("{}", r.asf),
                        format!("{}", r.rsf),
                        opt_full(r.nsfr),
                    ];
                    if tce {
                        v.push(opt_full(r.tce_rwa));
                        v.push(r.negative_tce.map(|b| b.to_string()).unwrap_or_default());
                    }
                    v
                })
                .collect();
            csv_string(&header, body)?
        }
        OutputFormat::Text => {
            let mut header = vec!["bank_id", "year", "ASF", "RSF", "NSFR"];
            if tce {
                header.push("TCE/RWA");
            }
            let mut table = Table::new(header);
            for r in &rows {
                let mut cells = vec![
                    r.bank_id.clone(),
                    r.year.to_string(),
                    sig4(r.asf),
                    sig4(r.rsf),
                    r.nsfr.map_or_else(|| "undefined".to_string(), sig4),
                ];
                if let Some(v) = r.tce_rwa {
                    let flag = if r.negative_tce == Some(true) {
                        " (negative TCE)"
                    } else {
                        ""
                    };
                    cells.push(format!("{}{flag}", sig4(v)));
                }
                table.row(cells);
            }
            table.render()
        }
    })
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum PhaseinOutput {
    Schedule(PhaseInSchedule),
    Compliance { reports: Vec<ComplianceReport> },
    Deltas(RequirementDeltas),
}

fn cmd_phasein(check: Option<&PathBuf>, deltas: Option<&str>, format: OutputFormat) -> CmdResult {
    let sched = PhaseInSchedule::default();
    if check.is_some() && deltas.is_some() {
        return Err(input_failure("use either --check or --deltas, not both"));
    }
    if let Some(path) = check {
        let positions = load_capital_positions(path).map_err(as_input)?;
        let reports: Vec<ComplianceReport> = positions
            .iter()
            .map(|p| check_compliance(p, &sched))
            .collect();
        return Ok(match format {
            OutputFormat::Json => to_json(&PhaseinOutput::Compliance { reports }),
            OutputFormat::Csv => {
                let rows = reports
                    .iter()
                    .flat_map(|r| {
                        r.checks.iter().map(move |c| {
                            vec![
                                r.entity.clone(),
                                r.year.to_string(),
                                c.requirement.clone(),
                                format!("{}", c.required),
                                format!("{}", c.actual),
                                format!("{}", c.shortfall),
                                format!("{:?}", c.status).to_lowercase(),
                            ]
                        })
                    })
                    .collect();
                csv_string(
                    &[
                        "bank_id",
                        "year",
                        "requirement",
                        "required",
                        "actual",
                        "shortfall",
                        "status",
                    ],
                    rows,
                )?
            }
            OutputFormat::Text => {
                let mut out = String::new();
                for r in &reports {
                    let verdict = if r.pass { "PASS" } else { "FAIL" };
                    let steady = if r.steady_state {
                        format!(" (steady state, {} requirements)", r.schedule_year)
                    } else {
                        String::new()
                    };
                    out.push_str(&format!("{} {}: {verdict}{steady}\n", r.entity, r.year));
                    let mut t =
                        Table::new(["requirement", "required", "actual", "shortfall", "status"]);
                    for c in &r.checks {
                        t.row([
                            c.requirement.clone(),
                            sig4(c.required),
                            sig4(c.actual),
                            sig4(c.shortfall),
                            format!("{:?}", c.status).to_lowercase(),
                        ]);
                    }
                    out.push_str(&t.render());
                    out.push('\n');
                }
                out
            }
        });
    }
    if let Some(range) = deltas {
        let (from, to) = parse_range(range)?;
        let d = required_deltas(from, to, &sched).map_err(as_input)?;
        return Ok(match format {
            OutputFormat::Json => to_json(&PhaseinOutput::Deltas(d)),
            OutputFormat::Csv | OutputFormat::Text => {
                let items = [
                    ("min_cet1_pct", d.min_cet1_pct),
                    ("conservation_buffer_pct", d.conservation_buffer_pct),
                    ("cet1_plus_buffer_pct", d.cet1_plus_buffer_pct),
                    ("min_tier1_pct", d.min_tier1_pct),
                    ("min_total_pct", d.min_total_pct),
                    ("total_plus_buffer_pct", d.total_plus_buffer_pct),
                    ("leverage_min_pct", d.leverage_min_pct),
                    ("lcr_min", d.lcr_min),
                    ("nsfr_min", d.nsfr_min),
                ];
                if format == OutputFormat::Csv {
                    csv_string(
                        &["requirement", "delta"],
                        items
                            .iter()
                            .map(|(n, v)| vec![n.to_string(), format!("{v}")])
                            .collect(),
                    )?
                } else {
                    let mut t = Table::new(["requirement", &format!("{from}->{to}")]);
                    for (n, v) in items {
                        t.row([n.to_string(), sig4(v)]);
                    }
                    t.render()
                }
            }
        });
    }
    Ok(match format {
        OutputFormat::Json => to_json(&PhaseinOutput::Schedule(sched)),
        OutputFormat::Csv | OutputFormat::Text => {
            let header = [
                "year",
                "min_cet1",
                "buffer",
                "cet1+buffer",
                "min_tier1",
                "min_total",
                "total+buffer",
                "cet1_deduct",
                "rr_deduct",
                "leverage",
                "lcr",
                "nsfr",
            ];
            let rows: Vec<Vec<String>> = sched
                .years
                .iter()
                .map(|y| {
                    let f = |v: f64| {
                        if format == OutputFormat::Csv {
                            format!("{v}")
                        } else {
                            sig4(v)
                        }
                    };
                    let lev = match (&y.leverage_note, format) {
                        (Some(n), OutputFormat::Text) => format!("{} ({n})", f(y.leverage_min_pct)),
                        _ => f(y.leverage_min_pct),
                    };
                    vec![
                        y.year.to_string(),
                        f(y.min_cet1_pct),
                        f(y.conservation_buffer_pct),
                        f(y.cet1_plus_buffer_pct),
                        f(y.min_tier1_pct),
                        f(y.min_total_pct),
                        f(y.total_plus_buffer_pct),
                        f(y.cet1_deduction_phase_pct),
                        f(y.rr_deduction_phase_pct),
                        lev,
                        f(y.lcr_min),
                        f(y.nsfr_min),
                    ]
                })
                .collect();
            if format == OutputFormat::Csv {
                csv_string(&header, rows)?
            } else {
                let mut t = Table::new(header);
                for r in rows {
                    t.row(r);
                }
                let mut out = String::from("Basel III phase-in (percent; lcr/nsfr as ratios)\n");
                out.push_str(&t.render());
                out.push_str("LCR and NSFR apply from September in 2015.\n");
                out
            }
        }
    })
}

fn load_input_panel(
    args: &PanelArgs,
) -> std::result::Result<(PanelDataset, Vec<VariableSpec>), Failure> {
    let schema = match &args.schema {
        Some(p) => load_schema(p).map_err(as_input)?,
        None => Vec::new(),
    };
    let ds = load_panel(&args.panel, &schema).map_err(as_input)?;
    let ds = apply_schema(&ds, &schema).map_err(as_input)?;
    Ok((ds, schema))
}

/// Maps a user-facing variable name to its column, preferring the
/// transformed column declared in the schema.
fn resolve_var(
    ds: &PanelDataset,
    schema: &[VariableSpec],
    name: &str,
) -> std::result::Result<String, Failure> {
    if let Some(spec) = schema.iter().find(|s| s.name == name) {
        return Ok(spec.output_name());
    }
    if ds.has_column(name) {
        Ok(name.to_string())
    } else {
        Err(input_failure(format!("unknown variable {name:?}")))
    }
}

fn cmd_unitroot(input: &PanelArgs, vars: &[String], format: OutputFormat) -> CmdResult {
    let (ds, schema) = load_input_panel(input)?;
    let mut results: Vec<UnitRootResult> = Vec::new();
    for v in vars {
        let col = resolve_var(&ds, &schema, v)?;
        let mut r = harris_tzavalis(&ds, &col).map_err(|e| match e {
            Error::Unbalanced(_) => input_failure(format!(
                "{e}; drop or fill the incomplete bank-years for {v:?} so every bank covers every year"
            )),
            other => Failure::from(other),
        })?;
        r.variable = v.clone();
        results.push(r);
    }
    Ok(match format {
        OutputFormat::Json => to_json(&results),
        OutputFormat::Csv => csv_string(
            &["variable", "rho", "z", "p_value", "n_entities", "n_periods"],
            results
                .iter()
                .map(|r| {
                    vec![
                        r.variable.clone(),
                        format!("{}", r.rho_hat),
                        format!("{}", r.z_stat),
                        format!("{}", r.p_value),
                        r.n_entities.to_string(),
                        r.n_periods.to_string(),
                    ]
                })
                .collect(),
        )?,
        OutputFormat::Text => format_unit_root_table(&results),
    })
}

struct FitArgs {
    model: ModelChoice,
    dep: Option<String>,
    regs: Vec<String>,
    dk_lags: Option<usize>,
    no_fe: bool,
    no_intercept: bool,
    roe_form: RoeForm,
    coeffs_out: Option<PathBuf>,
}

fn fit_csv(fits: &[&FitResult]) -> std::result::Result<String, Failure> {
    let rows = fits
        .iter()
        .flat_map(|f| {
            f.coefficients.iter().map(move |c| {
                vec![
                    f.dependent.clone(),
                    c.name.clone(),
                    format!("{}", c.estimate),
                    format!("{}", c.std_error),
                    opt_full(c.t_stat),
                    opt_full(c.p_value),
                    f.bandwidth.to_string(),
                ]
            })
        })
        .collect();
    csv_string(
        &[
            "dependent",
            "term",
            "estimate",
            "std_error",
            "t_stat",
            "p_value",
            "bandwidth",
        ],
        rows,
    )
}

fn cmd_fit(input: &PanelArgs, args: &FitArgs, format: OutputFormat) -> CmdResult {
    let (ds, schema) = load_input_panel(input)?;
    let bandwidth = args.dk_lags.map_or(Bandwidth::Auto, Bandwidth::Fixed);
    let columns = SystemColumns::default().prefer_transformed(&ds);

    if args.model == ModelChoice::All {
        if args.no_fe || args.no_intercept {
            return Err(input_failure(
                "--no-fe and --no-intercept apply to single-equation fits only",
            ));
        }
        let opts = SystemOptions {
            columns,
            roe_form: args.roe_form,
            bandwidth,
        };
        for name in [&opts.columns.spread, &opts.columns.liq, &opts.columns.cap] {
            if !ds.has_column(name) {
                return Err(input_failure(format!("unknown variable {name:?}")));
            }
        }
        let system = fit_system_with(&ds, &opts).map_err(Failure::from)?;
        if let Some(path) = &args.coeffs_out {
            system.coefficients.save(path).map_err(as_input)?;
        }
        return Ok(match format {
            OutputFormat::Json => to_json(&system),
            OutputFormat::Csv => fit_csv(&system.fits())?,
            OutputFormat::Text => {
                let mut out = String::new();
                for f in system.fits() {
                    out.push_str(&format_fit_table(f));
                    out.push('\n');
                }
                if let Some(path) = &args.coeffs_out {
                    out.push_str(&format!("coefficient set written to {}\n", path.display()));
                }
                out
            }
        });
    }

    let (dep, regs): (String, Vec<String>) = match args.model {
        ModelChoice::Spread => (
            columns.spread.clone(),
            vec![columns.liq.clone(), columns.cap.clone()],
        ),
        ModelChoice::Lending => (
            columns.lending.clone(),
            vec![columns.gdp.clone(), columns.spread.clone()],
        ),
        ModelChoice::Roe => match args.roe_form {
            RoeForm::Estimated => (
                columns.roe.clone(),
                vec![
                    columns.lending_gdp.clone(),
                    columns.liq.clone(),
                    columns.cap.clone(),
                ],
            ),
            RoeForm::Specification => (
                columns.roe.clone(),
                vec![columns.lending.clone(), columns.spread.clone()],
            ),
        },
        ModelChoice::Custom => {
            let dep = args
                .dep
                .as_ref()
                .ok_or_else(|| input_failure("--model custom needs --dep"))?;
            if args.regs.is_empty() {
                return Err(input_failure("--model custom needs at least one --reg"));
            }
            (
                resolve_var(&ds, &schema, dep)?,
                args.regs
                    .iter()
                    .map(|r| resolve_var(&ds, &schema, r))
                    .collect::<std::result::Result<_, _>>()?,
            )
        }
        ModelChoice::All => unreachable!("handled above"),
    };
    for name in std::iter::once(&dep).chain(&regs) {
        if !ds.has_column(name) {
            return Err(input_failure(format!("unknown variable {name:?}")));
        }
    }
    let reg_refs: Vec<&str> = regs.iter().map(String::as_str).collect();
    let spec = RegressionSpec::new(&dep, &reg_refs)
        .with_bandwidth(bandwidth)
        .with_intercept(!args.no_intercept)
        .with_fixed_effects(!args.no_fe);
    spec.validate().map_err(Failure::from)?;
    let fit = if args.no_fe {
        pooled_ols(&ds, &spec)
    } else {
        fit_within_dk(&ds, &spec)
    }
    .map_err(Failure::from)?;
    Ok(match format {
        OutputFormat::Json => to_json(&fit),
        OutputFormat::Csv => fit_csv(&[&fit])?,
        OutputFormat::Text => format_fit_table(&fit),
    })
}

struct SimulateArgs {
    coeffs: String,
    dliq: f64,
    dcap: f64,
    exogenous_lgdp: Option<f64>,
    phase_in: Option<String>,
    panel_out: Option<PathBuf>,
    banks: usize,
    years: usize,
    noise: f64,
    seed: u64,
}

fn cmd_simulate(args: &SimulateArgs, format: OutputFormat) -> CmdResult {
    let coeffs = if args.coeffs == "paper" {
        CoefficientSet::paper_preset()
    } else {
        CoefficientSet::load(&args.coeffs).map_err(|e| {
            input_failure(format!(
                "cannot read coefficient file {:?}: {e}",
                args.coeffs
            ))
        })?
    };
    if !args.dliq.is_finite() || !args.dcap.is_finite() {
        return Err(input_failure("shocks must be finite"));
    }

    if let Some(path) = &args.panel_out {
        let ds = simulate_panel(&coeffs, args.banks, args.years, args.noise, args.seed)
            .map_err(as_input)?;
        ds.save_csv(path).map_err(as_input)?;
        if args.phase_in.is_none() && args.dliq == 0.0 && args.dcap == 0.0 {
            return Ok(format!(
                "wrote {} banks x {} years (noise {}, seed {}) to {}\n",
                args.banks,
                args.years,
                args.noise,
                args.seed,
                path.display()
            ));
        }
    }

    if let Some(range) = &args.phase_in {
        let (from, to) = parse_range(range)?;
        let series = phase_in_scenario(&coeffs, &PhaseInSchedule::default(), from, to, args.dliq)
            .map_err(as_input)?;
        return Ok(match format {
            OutputFormat::Json => to_json(&series),
            OutputFormat::Csv => {
                let rows: Vec<_> = series
                    .steps
                    .iter()
                    .map(|s| (Some(s.year), &s.result))
                    .collect();
                let mut buf = Vec::new();
                write_plot_csv(&rows, &mut buf).map_err(as_input)?;
                String::from_utf8(buf).expect("csv output is utf-8")
            }
            OutputFormat::Text => format_phase_in(&series),
        });
    }

    let input = ScenarioInput {
        delta_cap: args.dcap,
        delta_liq: args.dliq,
        lending_mode: match args.exogenous_lgdp {
            Some(v) => LendingMode::Exogenous { delta_lgdp: v },
            None => LendingMode::Chained,
        },
    };
    let result = propagate_shock(&coeffs, &input);
    Ok(match format {
        OutputFormat::Json => to_json(&result),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_plot_csv(&[(None, &result)], &mut buf).map_err(as_input)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        OutputFormat::Text => format_scenario(&result),
    })
}
