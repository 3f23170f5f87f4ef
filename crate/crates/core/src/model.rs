//! The three-equation long-run system linking regulatory ratios to the
//! interest-rate spread, private-sector lending and bank profitability:
//!
//! ```text
//! spread  = g0 + g_liq LIQ + g_cap CAP
//! lending = b0 + b_gdp GDP + b_spread spread
//! ROE     = d0 + d_lgdp (L/GDP) + d_liq LIQ + d_cap CAP      (estimated form)
//! ROE     = d0 + d_l lending + d_spread spread                (specification form)
//! ```
//!
//! Coefficient sets can be the published preset, fitted from a panel, or user
//! supplied. Shocks propagate through the chain with GDP held fixed.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basel::{required_deltas, PhaseInSchedule};
use crate::econometrics::{fit_within_dk, Bandwidth, FitResult, RegressionSpec};
use crate::error::{Error, Result};
use crate::panel::{PanelDataset, LOG_SUFFIX};
use crate::text::{sig4, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadEquation {
    pub intercept: f64,
    pub liq: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LendingEquation {
    pub intercept: f64,
    pub gdp: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoeForm {
    /// Regressors L/GDP, LIQ, CAP.
    #[default]
    Estimated,
    /// Regressors lending and spread.
    Specification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RoeEquation {
    Estimated {
        intercept: f64,
        lgdp: f64,
        liq: f64,
        cap: f64,
    },
    Specification {
        intercept: f64,
        lending: f64,
        spread: f64,
    },
}

impl RoeEquation {
    pub fn form(&self) -> RoeForm {
        match self {
            RoeEquation::Estimated { .. } => RoeForm::Estimated,
            RoeEquation::Specification { .. } => RoeForm::Specification,
        }
    }

    fn values(&self) -> Vec<f64> {
        match *self {
            RoeEquation::Estimated {
                intercept,
                lgdp,
                liq,
                cap,
            } => vec![intercept, lgdp, liq, cap],
            RoeEquation::Specification {
                intercept,
                lending,
                spread,
            } => vec![intercept, lending, spread],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PaperPreset,
    Fitted,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub spread: SpreadEquation,
    pub lending: LendingEquation,
    pub roe: RoeEquation,
    pub provenance: Provenance,
}

impl CoefficientSet {
    /// Published long-run estimates. The ROE intercept is unreported and
    /// stored as zero; scenarios only use deltas.
    pub const fn paper_preset() -> Self {
        CoefficientSet {
            spread: SpreadEquation {
                intercept: 1.617,
                liq: 0.639,
                cap: 0.169,
            },
            lending: LendingEquation {
                intercept: 3.29,
                gdp: 1.352,
                spread: -0.306,
            },
            roe: RoeEquation::Estimated {
                intercept: 0.0,
                lgdp: 1.36,
                liq: -1.06,
                cap: -0.49,
            },
            provenance: Provenance::PaperPreset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.spread.intercept,
            self.spread.liq,
            self.spread.cap,
            self.lending.intercept,
            self.lending.gdp,
            self.lending.spread,
        ];
        if all
            .iter()
            .chain(self.roe.values().iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(
                "coefficient set contains a non-finite value".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: CoefficientSet = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficient set serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json().as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Column names for the system variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemColumns {
    pub spread: String,
    pub liq: String,
    pub cap: String,
    pub lending: String,
    pub gdp: String,
    pub lending_gdp: String,
    pub roe: String,
}

impl Default for SystemColumns {
    fn default() -> Self {
        SystemColumns {
            spread: "spread".into(),
            liq: "liq".into(),
            cap: "cap".into(),
            lending: "lending".into(),
            gdp: "gdp".into(),
            lending_gdp: "lending_gdp".into(),
            roe: "roe".into(),
        }
    }
}

impl SystemColumns {
    /// Replaces each name by its `__log` column when the dataset carries one.
    pub fn prefer_transformed(&self, ds: &PanelDataset) -> SystemColumns {
        let pick = |name: &String| {
            let logged = format!("{name}{LOG_SUFFIX}");
            if ds.has_column(&logged) {
                logged
            } else {
                name.clone()
            }
        };
        SystemColumns {
            spread: pick(&self.spread),
            liq: pick(&self.liq),
            cap: pick(&self.cap),
            lending: pick(&self.lending),
            gdp: pick(&self.gdp),
            lending_gdp: pick(&self.lending_gdp),
            roe: pick(&self.roe),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemOptions {
    pub columns: SystemColumns,
    pub roe_form: RoeForm,
    pub bandwidth: Bandwidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFit {
    pub coefficients: CoefficientSet,
    pub spread: FitResult,
    pub lending: FitResult,
    pub roe: FitResult,
}

impl SystemFit {
    pub fn fits(&self) -> [&FitResult; 3] {
        [&self.spread, &self.lending, &self.roe]
    }
}

pub fn fit_system(ds: &PanelDataset) -> Result<SystemFit> {
    fit_system_with(ds, &SystemOptions::default())
}

/// Fits the three equations by fixed effects with Driscoll–Kraay errors.
pub fn fit_system_with(ds: &PanelDataset, opts: &SystemOptions) -> Result<SystemFit> {
    let c = &opts.columns;
    let spec =
        |dep: &str, regs: &[&str]| RegressionSpec::new(dep, regs).with_bandwidth(opts.bandwidth);
    let spread = fit_within_dk(ds, &spec(&c.spread, &[&c.liq, &c.cap]))?;
    let lending = fit_within_dk(ds, &spec(&c.lending, &[&c.gdp, &c.spread]))?;
    let roe_fit = match opts.roe_form {
        RoeForm::Estimated => fit_within_dk(ds, &spec(&c.roe, &[&c.lending_gdp, &c.liq, &c.cap]))?,
        RoeForm::Specification => fit_within_dk(ds, &spec(&c.roe, &[&c.lending, &c.spread]))?,
    };
    let get = |fit: &FitResult, name: &str| fit.estimate(name).expect("fitted term present");
    let intercept = |fit: &FitResult| fit.intercept().expect("intercept fitted");

    let roe = match opts.roe_form {
        RoeForm::Estimated => RoeEquation::Estimated {
            intercept: intercept(&roe_fit),
            lgdp: get(&roe_fit, &c.lending_gdp),
            liq: get(&roe_fit, &c.liq),
            cap: get(&roe_fit, &c.cap),
        },
        RoeForm::Specification => RoeEquation::Specification {
            intercept: intercept(&roe_fit),
            lending: get(&roe_fit, &c.lending),
            spread: get(&roe_fit, &c.spread),
        },
    };
    let coefficients = CoefficientSet {
        spread: SpreadEquation {
            intercept: intercept(&spread),
            liq: get(&spread, &c.liq),
            cap: get(&spread, &c.cap),
        },
        lending: LendingEquation {
            intercept: intercept(&lending),
            gdp: get(&lending, &c.gdp),
            spread: get(&lending, &c.spread),
        },
        roe,
        provenance: Provenance::Fitted,
    };
    Ok(SystemFit {
        coefficients,
        spread,
        lending,
        roe: roe_fit,
    })
}

/// First simulated year.
pub const SIMULATION_START_YEAR: i32 = 2010;

/// Generates a synthetic bank-year panel from a coefficient set.
///
/// Exogenous LIQ, CAP and GDP carry a bank level plus idiosyncratic
/// variation (GDP also trends). Each equation gets its own entity effects,
/// centred to sum to zero so the fitted intercepts target the coefficient-set
/// intercepts, plus independent N(0, noise_sd²) errors. Columns use the
/// [`SystemColumns`] defaults; `lending_gdp = lending - gdp` (log ratio).
pub fn simulate_panel(
    coeffs: &CoefficientSet,
    n_banks: usize,
    n_years: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<PanelDataset> {
    if n_banks < 2 || n_years < 3 {
        return Err(Error::InvalidArgument(format!(
            "simulation needs at least 2 banks and 3 years, got {n_banks} x {n_years}"
        )));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise_sd must be a non-negative number, got {noise_sd}"
        )));
    }
    coeffs.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let mut draw = |scale: f64| scale * std_normal.sample(&mut rng);

    let mut effects = |scale: f64| -> Vec<f64> {
        let mut v: Vec<f64> = (0..n_banks).map(|_| draw(scale)).collect();
        let mean = v.iter().sum::<f64>() / n_banks as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        v
    };
    let fe_spread = effects(0.5);
    let fe_lending = effects(0.5);
    let fe_roe = effects(0.5);
    let level_liq = effects(0.1);
    let level_cap = effects(0.2);
    let level_gdp = effects(0.3);

    let cells = n_banks * n_years;
    let mut liq = Vec::with_capacity(cells);
    let mut cap = Vec::with_capacity(cells);
    let mut gdp = Vec::with_capacity(cells);
    let mut spread = Vec::with_capacity(cells);
    let mut lending = Vec::with_capacity(cells);
    let mut lending_gdp = Vec::with_capacity(cells);
    let mut roe = Vec::with_capacity(cells);

    // fresh stream for the time-varying draws
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut z = |scale: f64| scale * std_normal.sample(&mut rng);
    let s = coeffs.spread;
    let l = coeffs.lending;
    for i in 0..n_banks {
        for t in 0..n_years {
            let liq_it = 0.15 + level_liq[i] + z(0.25);
            let cap_it = 2.3 + level_cap[i] + z(0.25);
            let gdp_it = 9.0 + 0.07 * t as f64 + level_gdp[i] + z(0.2);
            let spread_it =
                s.intercept + fe_spread[i] + s.liq * liq_it + s.cap * cap_it + z(noise_sd);
            let lending_it =
                l.intercept + fe_lending[i] + l.gdp * gdp_it + l.spread * spread_it + z(noise_sd);
            let lgdp_it = lending_it - gdp_it;
            let roe_it = match coeffs.roe {
                RoeEquation::Estimated {
                    intercept,
                    lgdp,
                    liq,
                    cap,
                } => intercept + fe_roe[i] + lgdp * lgdp_it + liq * liq_it + cap * cap_it,
                RoeEquation::Specification {
                    intercept,
                    lending,
                    spread,
                } => intercept + fe_roe[i] + lending * lending_it + spread * spread_it,
            } + z(noise_sd);
            liq.push(Some(liq_it));
            cap.push(Some(cap_it));
            gdp.push(Some(gdp_it));
            spread.push(Some(spread_it));
            lending.push(Some(lending_it));
            lending_gdp.push(Some(lgdp_it));
            roe.push(Some(roe_it));
        }
    }

    let width = n_banks.to_string().len().max(2);
    let names = SystemColumns::default();
    PanelDataset::new(
        (1..=n_banks).map(|i| format!("B{i:0width$}")).collect(),
        (0..n_years as i32)
            .map(|t| SIMULATION_START_YEAR + t)
            .collect(),
    )?
    .with_column(&names.spread, spread)?
    .with_column(&names.liq, liq)?
    .with_column(&names.cap, cap)?
    .with_column(&names.lending, lending)?
    .with_column(&names.gdp, gdp)?
    .with_column(&names.lending_gdp, lending_gdp)?
    .with_column(&names.roe, roe)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LendingMode {
    /// Δ(L/GDP) equals Δlending (GDP fixed).
    #[default]
    Chained,
    /// Δ(L/GDP) supplied by the caller.
    Exogenous { delta_lgdp: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioInput {
    /// Change in CAP, percentage points.
    pub delta_cap: f64,
    /// Change in LIQ, percentage points.
    pub delta_liq: f64,
    #[serde(default)]
    pub lending_mode: LendingMode,
}

impl ScenarioInput {
    pub fn new(delta_liq: f64, delta_cap: f64) -> Self {
        ScenarioInput {
            delta_cap,
            delta_liq,
            lending_mode: LendingMode::Chained,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub quantity: String,
    pub expression: String,
    pub value: f64,
}

pub const UNITS_NOTE: &str = "Shocks are read as percentage-point changes in LIQ and CAP; \
the estimating equations declare LIQ and CAP in logarithms, so responses are long-run \
elasticity-based approximations. GDP is held fixed.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub delta_liq: f64,
    pub delta_cap: f64,
    /// Percentage points.
    pub delta_spread: f64,
    /// Percent (log points).
    pub delta_lending: f64,
    pub delta_lgdp: f64,
    pub delta_roe: f64,
    pub provenance: Provenance,
    pub trace: Vec<TraceStep>,
    pub note: String,
}

fn step(trace: &mut Vec<TraceStep>, quantity: &str, terms: &[(f64, f64)]) -> f64 {
    let value = terms.iter().map(|(c, x)| c * x).sum();
    let expression = terms
        .iter()
        .map(|(c, x)| format!("{c} * {x}"))
        .collect::<Vec<_>>()
        .join(" + ");
    trace.push(TraceStep {
        quantity: quantity.to_string(),
        expression,
        value,
    });
    value
}

/// Pushes a capital/liquidity shock through spread → lending → ROE.
pub fn propagate_shock(coeffs: &CoefficientSet, input: &ScenarioInput) -> ScenarioResult {
    let mut trace = Vec::new();
    let (dliq, dcap) = (input.delta_liq, input.delta_cap);
    let d_spread = step(
        &mut trace,
        "delta_spread",
        &[(coeffs.spread.liq, dliq), (coeffs.spread.cap, dcap)],
    );
    let d_lending = step(
        &mut trace,
        "delta_lending",
        &[(coeffs.lending.spread, d_spread)],
    );
    let d_lgdp = match input.lending_mode {
        LendingMode::Chained => step(&mut trace, "delta_lgdp", &[(1.0, d_lending)]),
        LendingMode::Exogenous { delta_lgdp } => {
            trace.push(TraceStep {
                quantity: "delta_lgdp".into(),
                expression: "exogenous".into(),
                value: delta_lgdp,
            });
            delta_lgdp
        }
    };
    let d_roe = match coeffs.roe {
        RoeEquation::Estimated { lgdp, liq, cap, .. } => step(
            &mut trace,
            "delta_roe",
            &[(lgdp, d_lgdp), (liq, dliq), (cap, dcap)],
        ),
        RoeEquation::Specification {
            lending, spread, ..
        } => step(
            &mut trace,
            "delta_roe",
            &[(lending, d_lending), (spread, d_spread)],
        ),
    };
    ScenarioResult {
        delta_liq: dliq,
        delta_cap: dcap,
        delta_spread: d_spread,
        delta_lending: d_lending,
        delta_lgdp: d_lgdp,
        delta_roe: d_roe,
        provenance: coeffs.provenance,
        trace,
        note: UNITS_NOTE.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearStep {
    pub year: i32,
    pub result: ScenarioResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseInSeries {
    pub from_year: i32,
    pub to_year: i32,
    pub steps: Vec<YearStep>,
    pub cumulative: ScenarioResult,
}

/// Runs the year-on-year increments of the total-capital-plus-buffer
/// requirement through [`propagate_shock`]. `delta_liq_per_year` is applied
/// in every step.
pub fn phase_in_scenario(
    coeffs: &CoefficientSet,
    sched: &PhaseInSchedule,
    from_year: i32,
    to_year: i32,
    delta_liq_per_year: f64,
) -> Result<PhaseInSeries> {
    if from_year > to_year {
        return Err(Error::InvalidArgument(format!(
            "phase-in range {from_year}:{to_year} runs backwards"
        )));
    }
    // validates both endpoints
    let total = required_deltas(from_year, to_year, sched)?;
    let mut steps = Vec::new();
    for year in from_year + 1..=to_year {
        let d = required_deltas(year - 1, year, sched)?;
        steps.push(YearStep {
            year,
            result: propagate_shock(
                coeffs,
                &ScenarioInput::new(delta_liq_per_year, d.total_plus_buffer_pct),
            ),
        });
    }
    let cumulative = propagate_shock(
        coeffs,
        &ScenarioInput::new(
            delta_liq_per_year * steps.len() as f64,
            total.total_plus_buffer_pct,
        ),
    );
    Ok(PhaseInSeries {
        from_year,
        to_year,
        steps,
        cumulative,
    })
}

pub fn format_scenario(result: &ScenarioResult) -> String {
    let mut table = Table::new(["step", "expression", "value"]);
    for s in &result.trace {
        table.row([s.quantity.clone(), s.expression.clone(), sig4(s.value)]);
    }
    let mut out = format!(
        "Shock: dLIQ = {}, dCAP = {}  (coefficients: {:?})\n",
        sig4(result.delta_liq),
        sig4(result.delta_cap),
        result.provenance
    );
    out.push_str(&table.render());
    let mut summary = Table::new(["response", "delta"]);
    summary
        .row(["spread (pp)".to_string(), sig4(result.delta_spread)])
        .row(["lending (%)".to_string(), sig4(result.delta_lending)])
        .row(["L/GDP (%)".to_string(), sig4(result.delta_lgdp)])
        .row(["ROE (%)".to_string(), sig4(result.delta_roe)]);
    out.push('\n');
    out.push_str(&summary.render());
    out.push_str(&format!("\nNote: {}\n", result.note));
    out
}

pub fn format_phase_in(series: &PhaseInSeries) -> String {
    let mut table = Table::new(["year", "dCAP", "dLIQ", "dspread", "dlending", "dROE"]);
    for s in &series.steps {
        table.row([
            s.year.to_string(),
            sig4(s.result.delta_cap),
            sig4(s.result.delta_liq),
            sig4(s.result.delta_spread),
            sig4(s.result.delta_lending),
            sig4(s.result.delta_roe),
        ]);
    }
    let c = &series.cumulative;
    table.row([
        "total".to_string(),
        sig4(c.delta_cap),
        sig4(c.delta_liq),
        sig4(c.delta_spread),
        sig4(c.delta_lending),
        sig4(c.delta_roe),
    ]);
    let mut out = format!(
        "Phase-in {}->{}  (coefficients: {:?})\n",
        series.from_year, series.to_year, c.provenance
    );
    out.push_str(&table.render());
    out.push_str(&format!("\nNote: {}\n", c.note));
    out
}

/// Plot-ready CSV: `year,delta_spread,delta_lending,delta_roe`.
pub fn write_plot_csv<W: Write>(rows: &[(Option<i32>, &ScenarioResult)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["year", "delta_spread", "delta_lending", "delta_roe"])?;
    for (year, r) in rows {
        w.write_record([
            year.map(|y| y.to_string()).unwrap_or_default(),
            format!("{}", r.delta_spread),
            format!("{}", r.delta_lending),
            format!("{}", r.delta_roe),
        ])?;
    }
    w.flush()?;
    Ok(())
}
