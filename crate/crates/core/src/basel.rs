//! Regulatory ratio calculators and the Basel III phase-in schedule used by
//! Bangladesh Bank for 2015–2019.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Balance-sheet components of one bank-year, in a single currency unit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BalanceSheetSnapshot {
    #[serde(rename = "bank_id")]
    pub entity: String,
    pub year: i32,
    pub common_equity: f64,
    pub debt_ge_1y: f64,
    pub other_liabilities_ge_1y: f64,
    pub stable_deposits_lt_1y: f64,
    pub less_stable_deposits_lt_1y: f64,
    pub govt_debt: f64,
    pub corp_loans_lt_1y: f64,
    pub retail_loans_lt_1y: f64,
    /// Other assets excluding cash and interbank loans.
    #[serde(rename = "other_assets")]
    pub other_assets_ex_cash_interbank: f64,
    #[serde(default)]
    pub intangibles: f64,
    #[serde(default)]
    pub goodwill: f64,
    #[serde(default)]
    pub rwa: f64,
}

impl BalanceSheetSnapshot {
    fn amounts(&self) -> [(&'static str, f64); 12] {
        [
            ("common_equity", self.common_equity),
            ("debt_ge_1y", self.debt_ge_1y),
            ("other_liabilities_ge_1y", self.other_liabilities_ge_1y),
            ("stable_deposits_lt_1y", self.stable_deposits_lt_1y),
            (
                "less_stable_deposits_lt_1y",
                self.less_stable_deposits_lt_1y,
            ),
            ("govt_debt", self.govt_debt),
            ("corp_loans_lt_1y", self.corp_loans_lt_1y),
            ("retail_loans_lt_1y", self.retail_loans_lt_1y),
            ("other_assets", self.other_assets_ex_cash_interbank),
            ("intangibles", self.intangibles),
            ("goodwill", self.goodwill),
            ("rwa", self.rwa),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.amounts() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be a non-negative amount for ({}, {}), got {v}",
                    self.entity, self.year
                )));
            }
        }
        Ok(())
    }
}

pub const BALANCE_SHEET_COLUMNS: [&str; 14] = [
    "bank_id",
    "year",
    "common_equity",
    "debt_ge_1y",
    "other_liabilities_ge_1y",
    "stable_deposits_lt_1y",
    "less_stable_deposits_lt_1y",
    "govt_debt",
    "corp_loans_lt_1y",
    "retail_loans_lt_1y",
    "other_assets",
    "intangibles",
    "goodwill",
    "rwa",
];

/// Reads a balance-sheet CSV. The TCE columns (`intangibles`, `goodwill`,
/// `rwa`) are mandatory only when `require_tce` is set; otherwise they default
/// to zero when absent.
pub fn load_balance_sheets(
    path: impl AsRef<Path>,
    require_tce: bool,
) -> Result<Vec<BalanceSheetSnapshot>> {
    read_balance_sheets(std::fs::File::open(path)?, require_tce)
}

pub fn read_balance_sheets<R: Read>(
    reader: R,
    require_tce: bool,
) -> Result<Vec<BalanceSheetSnapshot>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let required = if require_tce {
        &BALANCE_SHEET_COLUMNS[..]
    } else {
        &BALANCE_SHEET_COLUMNS[..11]
    };
    for name in required {
        if !headers.iter().any(|h| h == *name) {
            return Err(Error::MissingColumn(name.to_string()));
        }
    }
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let cell = |name: &str| -> Result<f64> {
            let Some(pos) = headers.iter().position(|h| h == name) else {
                return Ok(0.0);
            };
            let raw = record.get(pos).unwrap_or_default();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::ParseCell {
                    row,
                    column: name.to_string(),
                    value: raw.to_string(),
                })
        };
        let year_pos = headers.iter().position(|h| h == "year").unwrap_or(1);
        let year_raw = record.get(year_pos).unwrap_or_default();
        let bs = BalanceSheetSnapshot {
            entity: record
                .get(headers.iter().position(|h| h == "bank_id").unwrap_or(0))
                .unwrap_or_default()
                .to_string(),
            year: year_raw.parse().map_err(|_| Error::ParseCell {
                row,
                column: "year".into(),
                value: year_raw.to_string(),
            })?,
            common_equity: cell("common_equity")?,
            debt_ge_1y: cell("debt_ge_1y")?,
            other_liabilities_ge_1y: cell("other_liabilities_ge_1y")?,
            stable_deposits_lt_1y: cell("stable_deposits_lt_1y")?,
            less_stable_deposits_lt_1y: cell("less_stable_deposits_lt_1y")?,
            govt_debt: cell("govt_debt")?,
            corp_loans_lt_1y: cell("corp_loans_lt_1y")?,
            retail_loans_lt_1y: cell("retail_loans_lt_1y")?,
            other_assets_ex_cash_interbank: cell("other_assets")?,
            intangibles: cell("intangibles")?,
            goodwill: cell("goodwill")?,
            rwa: cell("rwa")?,
        };
        bs.validate().map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::InvalidArgument(format!("row {row}: {msg}")),
            other => other,
        })?;
        out.push(bs);
    }
    Ok(out)
}

/// Available-stable-funding factors applied to liability-side components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsfWeights {
    /// Equity, debt and other liabilities with maturity of one year or more.
    pub long_term_funding: f64,
    pub stable_deposits: f64,
    pub less_stable_deposits: f64,
}

/// Required-stable-funding factors applied to asset-side components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsfWeights {
    pub govt_debt: f64,
    pub corp_loans: f64,
    pub retail_loans: f64,
    pub other_assets: f64,
}

/// NSFR weights. The default is the December 2009 calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsfrWeights {
    pub asf: AsfWeights,
    pub rsf: RsfWeights,
}

impl Default for NsfrWeights {
    fn default() -> Self {
        NsfrWeights {
            asf: AsfWeights {
                long_term_funding: 1.00,
                stable_deposits: 0.85,
                less_stable_deposits: 0.70,
            },
            rsf: RsfWeights {
                govt_debt: 0.05,
                corp_loans: 0.50,
                retail_loans: 0.85,
                other_assets: 1.00,
            },
        }
    }
}

impl NsfrWeights {
    pub fn uniform(w: f64) -> Self {
        NsfrWeights {
            asf: AsfWeights {
                long_term_funding: w,
                stable_deposits: w,
                less_stable_deposits: w,
            },
            rsf: RsfWeights {
                govt_debt: w,
                corp_loans: w,
                retail_loans: w,
                other_assets: w,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("asf.long_term_funding", self.asf.long_term_funding),
            ("asf.stable_deposits", self.asf.stable_deposits),
            ("asf.less_stable_deposits", self.asf.less_stable_deposits),
            ("rsf.govt_debt", self.rsf.govt_debt),
            ("rsf.corp_loans", self.rsf.corp_loans),
            ("rsf.retail_loans", self.rsf.retail_loans),
            ("rsf.other_assets", self.rsf.other_assets),
        ];
        for (name, w) in all {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidArgument(format!(
                    "weight {name} = {w} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let w: NsfrWeights = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        w.validate()?;
        Ok(w)
    }
}

pub fn available_stable_funding(bs: &BalanceSheetSnapshot, w: &NsfrWeights) -> f64 {
    w.asf.long_term_funding * (bs.common_equity + bs.debt_ge_1y + bs.other_liabilities_ge_1y)
        + w.asf.stable_deposits * bs.stable_deposits_lt_1y
        + w.asf.less_stable_deposits * bs.less_stable_deposits_lt_1y
}

pub fn required_stable_funding(bs: &BalanceSheetSnapshot, w: &NsfrWeights) -> f64 {
    w.rsf.govt_debt * bs.govt_debt
        + w.rsf.corp_loans * bs.corp_loans_lt_1y
        + w.rsf.retail_loans * bs.retail_loans_lt_1y
        + w.rsf.other_assets * bs.other_assets_ex_cash_interbank
}

/// Net stable funding ratio, ASF / RSF.
pub fn compute_nsfr(bs: &BalanceSheetSnapshot, w: &NsfrWeights) -> Result<f64> {
    let rsf = required_stable_funding(bs, w);
    if rsf <= 0.0 {
        return Err(Error::UndefinedNsfr);
    }
    Ok(available_stable_funding(bs, w) / rsf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TceRatio {
    pub value: f64,
    /// Set when intangibles and goodwill exceed common equity.
    pub negative_tce: bool,
}

/// Tangible common equity over risk-weighted assets. Negative TCE is reported,
/// not clamped.
pub fn compute_tce_rwa(bs: &BalanceSheetSnapshot) -> Result<TceRatio> {
    if bs.rwa.is_nan() || bs.rwa <= 0.0 {
        return Err(Error::NonPositiveRwa(bs.rwa));
    }
    let tce = bs.common_equity - bs.intangibles - bs.goodwill;
    let value = tce / bs.rwa;
    if tce < 0.0 {
        log::warn!(
            "negative tangible common equity for ({}, {}): {tce}",
            bs.entity,
            bs.year
        );
    }
    Ok(TceRatio {
        value,
        negative_tce: tce < 0.0,
    })
}

/// Loans-to-deposits change implied by an NSFR change (both in percentage
/// points): 46 bp of LTD per 1 pp of NSFR.
pub fn nsfr_to_ltd_delta(delta_nsfr: f64) -> f64 {
    -0.46 * delta_nsfr
}

/// Requirements in force in one year. Percentages are in percent, `lcr_min`
/// and `nsfr_min` are ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRequirements {
    pub year: i32,
    pub min_cet1_pct: f64,
    pub conservation_buffer_pct: f64,
    pub cet1_plus_buffer_pct: f64,
    pub min_tier1_pct: f64,
    pub min_total_pct: f64,
    pub total_plus_buffer_pct: f64,
    pub cet1_deduction_phase_pct: f64,
    pub rr_deduction_phase_pct: f64,
    pub leverage_min_pct: f64,
    pub leverage_note: Option<String>,
    pub lcr_min: f64,
    pub nsfr_min: f64,
    /// Liquidity rules apply only from September in this year.
    pub liquidity_from_september: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseInSchedule {
    pub years: Vec<YearRequirements>,
}

impl Default for PhaseInSchedule {
    fn default() -> Self {
        Self::bangladesh()
    }
}

impl PhaseInSchedule {
    /// Bangladesh Bank phase-in arrangements, 2015–2019.
    pub fn bangladesh() -> Self {
        let cet1 = [4.50, 4.50, 4.50, 4.50, 4.50];
        let buffer = [0.0, 0.625, 1.25, 1.875, 2.50];
        let cet1_buf = [4.50, 5.125, 5.75, 6.375, 7.00];
        let tier1 = [5.50, 5.50, 6.00, 6.00, 6.00];
        let total = [10.00, 10.00, 10.00, 10.00, 10.00];
        let total_buf = [10.00, 10.625, 11.25, 11.875, 12.50];
        let deduction = [20.0, 40.0, 60.0, 80.0, 100.0];
        let leverage_note = [
            None,
            None,
            Some("Readjustment"),
            Some("Migration to Pillar 1"),
            Some("Pillar 1"),
        ];
        let years = (0..5)
            .map(|k| YearRequirements {
                year: 2015 + k as i32,
                min_cet1_pct: cet1[k],
                conservation_buffer_pct: buffer[k],
                cet1_plus_buffer_pct: cet1_buf[k],
                min_tier1_pct: tier1[k],
                min_total_pct: total[k],
                total_plus_buffer_pct: total_buf[k],
                cet1_deduction_phase_pct: deduction[k],
                rr_deduction_phase_pct: deduction[k],
                leverage_min_pct: 3.0,
                leverage_note: leverage_note[k].map(str::to_string),
                lcr_min: 1.0,
                nsfr_min: 1.0,
                liquidity_from_september: k == 0,
            })
            .collect();
        PhaseInSchedule { years }
    }

    pub fn year(&self, year: i32) -> Option<&YearRequirements> {
        self.years.iter().find(|y| y.year == year)
    }

    pub fn first_year(&self) -> i32 {
        self.years.first().map_or(0, |y| y.year)
    }

    pub fn last_year(&self) -> i32 {
        self.years.last().map_or(0, |y| y.year)
    }

    fn year_or_err(&self, year: i32) -> Result<&YearRequirements> {
        self.year(year).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "year {year} is outside the schedule {}–{}",
                self.first_year(),
                self.last_year()
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalPosition {
    #[serde(rename = "bank_id")]
    pub entity: String,
    pub year: i32,
    pub cet1_ratio_pct: f64,
    pub tier1_ratio_pct: f64,
    pub total_car_pct: f64,
    pub leverage_pct: f64,
    pub lcr: f64,
    pub nsfr: f64,
}

pub fn load_capital_positions(path: impl AsRef<Path>) -> Result<Vec<CapitalPosition>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let pos: CapitalPosition = rec?;
        let values = [
            pos.cet1_ratio_pct,
            pos.tier1_ratio_pct,
            pos.total_car_pct,
            pos.leverage_pct,
            pos.lcr,
            pos.nsfr,
        ];
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "capital position ({}, {}) has a negative or non-finite ratio",
                pos.entity, pos.year
            )));
        }
        out.push(pos);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Rule not yet binding for the full year; reported but not counted.
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementCheck {
    pub requirement: String,
    pub required: f64,
    pub actual: f64,
    /// `required - actual`, floored at zero.
    pub shortfall: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    #[serde(rename = "bank_id")]
    pub entity: String,
    pub year: i32,
    /// The schedule year whose requirements were applied.
    pub schedule_year: i32,
    /// Year outside the schedule, terminal requirements applied.
    pub steady_state: bool,
    pub checks: Vec<RequirementCheck>,
    pub pass: bool,
}

/// Checks a capital position against the schedule. Comparisons are inclusive.
pub fn check_compliance(pos: &CapitalPosition, sched: &PhaseInSchedule) -> ComplianceReport {
    let (req, steady_state) = match sched.year(pos.year) {
        Some(r) => (r, false),
        None => (
            sched.years.last().expect("schedule has at least one year"),
            true,
        ),
    };
    let liquidity_advisory = !steady_state && req.liquidity_from_september;
    let rules: [(&str, f64, f64, bool); 8] = [
        ("min_cet1", req.min_cet1_pct, pos.cet1_ratio_pct, false),
        (
            "cet1_plus_buffer",
            req.cet1_plus_buffer_pct,
            pos.cet1_ratio_pct,
            false,
        ),
        ("min_tier1", req.min_tier1_pct, pos.tier1_ratio_pct, false),
        ("min_total", req.min_total_pct, pos.total_car_pct, false),
        (
            "total_plus_buffer",
            req.total_plus_buffer_pct,
            pos.total_car_pct,
            false,
        ),
        ("leverage", req.leverage_min_pct, pos.leverage_pct, false),
        ("lcr", req.lcr_min, pos.lcr, liquidity_advisory),
        ("nsfr", req.nsfr_min, pos.nsfr, liquidity_advisory),
    ];
    let checks: Vec<RequirementCheck> = rules
        .iter()
        .map(|&(name, required, actual, advisory)| {
            let status = if advisory {
                CheckStatus::Advisory
            } else if actual >= required {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            RequirementCheck {
                requirement: name.to_string(),
                required,
                actual,
                shortfall: (required - actual).max(0.0),
                status,
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.status != CheckStatus::Fail);
    ComplianceReport {
        entity: pos.entity.clone(),
        year: pos.year,
        schedule_year: req.year,
        steady_state,
        checks,
        pass,
    }
}

/// Per-requirement change between two schedule years (`to - from`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RequirementDeltas {
    pub from_year: i32,
    pub to_year: i32,
    pub min_cet1_pct: f64,
    pub conservation_buffer_pct: f64,
    pub cet1_plus_buffer_pct: f64,
    pub min_tier1_pct: f64,
    pub min_total_pct: f64,
    pub total_plus_buffer_pct: f64,
    pub leverage_min_pct: f64,
    pub lcr_min: f64,
    pub nsfr_min: f64,
}

pub fn required_deltas(
    from_year: i32,
    to_year: i32,
    sched: &PhaseInSchedule,
) -> Result<RequirementDeltas> {
    let a = sched.year_or_err(from_year)?;
    let b = sched.year_or_err(to_year)?;
    Ok(RequirementDeltas {
        from_year,
        to_year,
        min_cet1_pct: b.min_cet1_pct - a.min_cet1_pct,
        conservation_buffer_pct: b.conservation_buffer_pct - a.conservation_buffer_pct,
        cet1_plus_buffer_pct: b.cet1_plus_buffer_pct - a.cet1_plus_buffer_pct,
        min_tier1_pct: b.min_tier1_pct - a.min_tier1_pct,
        min_total_pct: b.min_total_pct - a.min_total_pct,
        total_plus_buffer_pct: b.total_plus_buffer_pct - a.total_plus_buffer_pct,
        leverage_min_pct: b.leverage_min_pct - a.leverage_min_pct,
        lcr_min: b.lcr_min - a.lcr_min,
        nsfr_min: b.nsfr_min - a.nsfr_min,
    })
}
