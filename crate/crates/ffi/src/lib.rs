//! C ABI over `basel_panel`.
//!
//! Every entry point returns a status code and writes results through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`bp_last_error`]. Handles are opaque and must be released with their
//! matching `_free` function. Strings returned to the caller are owned by the
//! caller and released with [`bp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use basel_panel::basel::{self, AsfWeights, BalanceSheetSnapshot, NsfrWeights, RsfWeights};
use basel_panel::econometrics::{self, Bandwidth, FitResult, RegressionSpec};
use basel_panel::model::{self, CoefficientSet, LendingMode, ScenarioInput};
use basel_panel::panel::{self, PanelDataset};
use basel_panel::{Error, ErrorKind};

pub type BpStatus = i32;

pub const BP_OK: BpStatus = 0;
/// A required pointer argument was null.
pub const BP_ERR_NULL: BpStatus = 1;
/// Malformed input, bad argument or I/O failure.
pub const BP_ERR_INPUT: BpStatus = 2;
/// Rank deficiency, too few observations or another estimation failure.
pub const BP_ERR_ESTIMATION: BpStatus = 3;
/// A string argument was not valid UTF-8.
pub const BP_ERR_UTF8: BpStatus = 4;
/// The library panicked; the handle arguments should be considered unusable.
pub const BP_ERR_PANIC: BpStatus = 5;

/// Opaque bank-year panel.
pub struct BpPanel {
    inner: PanelDataset,
}

/// Opaque regression result.
pub struct BpFit {
    inner: FitResult,
}

/// Opaque coefficient set for the spread / lending / ROE system.
pub struct BpCoefficients {
    inner: CoefficientSet,
}

/// One row of a coefficient table. `t_stat` and `p_value` are NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BpCoefficient {
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BpBalanceSheet {
    pub common_equity: f64,
    pub debt_ge_1y: f64,
    pub other_liabilities_ge_1y: f64,
    pub stable_deposits_lt_1y: f64,
    pub less_stable_deposits_lt_1y: f64,
    pub govt_debt: f64,
    pub corp_loans_lt_1y: f64,
    pub retail_loans_lt_1y: f64,
    pub other_assets: f64,
    pub intangibles: f64,
    pub goodwill: f64,
    pub rwa: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BpNsfrWeights {
    pub asf_long_term_funding: f64,
    pub asf_stable_deposits: f64,
    pub asf_less_stable_deposits: f64,
    pub rsf_govt_debt: f64,
    pub rsf_corp_loans: f64,
    pub rsf_retail_loans: f64,
    pub rsf_other_assets: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BpUnitRoot {
    pub rho_hat: f64,
    pub z_stat: f64,
    pub p_value: f64,
    pub n_entities: usize,
    pub n_periods: usize,
}

/// Scenario deltas: spread in percentage points, the rest in percent.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BpScenario {
    pub delta_spread: f64,
    pub delta_lending: f64,
    pub delta_lgdp: f64,
    pub delta_roe: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(BpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => BP_ERR_INPUT,
            ErrorKind::Estimation => BP_ERR_ESTIMATION,
        };
        Fail(code, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BP_OK
        }
        Ok(Err(Fail(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            BP_ERR_PANIC
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(BP_ERR_NULL, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(BP_ERR_UTF8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

/// Message of the last failed call on this thread, or null after a
/// successful call. Valid until the next call into the library.
#[no_mangle]
pub extern "C" fn bp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------- panel

/// Loads a long-format `bank_id,year,...` CSV. `schema_path` may be null, in
/// which case every numeric column is kept untransformed.
///
/// # Safety
/// Pointer arguments must be valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn bp_panel_load(
    path: *const c_char,
    schema_path: *const c_char,
    out: *mut *mut BpPanel,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let schema = if schema_path.is_null() {
            Vec::new()
        } else {
            panel::load_schema(str_arg(schema_path, "schema_path")?)?
        };
        let ds = panel::load_panel(path, &schema)?;
        let ds = panel::apply_schema(&ds, &schema)?;
        *out = Box::into_raw(Box::new(BpPanel { inner: ds }));
        Ok(())
    })
}

/// # Safety
/// `panel` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_panel_free(panel: *mut BpPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_panel_dims(
    panel: *const BpPanel,
    n_entities: *mut usize,
    n_periods: *mut usize,
) -> BpStatus {
    guard(|| {
        let p = ref_arg(panel, "panel")?;
        *out_arg(n_entities, "n_entities")? = p.inner.n_entities();
        *out_arg(n_periods, "n_periods")? = p.inner.n_periods();
        Ok(())
    })
}

/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_panel_save_csv(panel: *const BpPanel, path: *const c_char) -> BpStatus {
    guard(|| {
        let p = ref_arg(panel, "panel")?;
        p.inner.save_csv(str_arg(path, "path")?)?;
        Ok(())
    })
}

// ---------------------------------------------------------------- estimation

/// Fixed-effects (or pooled, when `fixed_effects` is false) regression with
/// Driscoll–Kraay standard errors. A negative `bandwidth` selects the
/// automatic lag length.
///
/// # Safety
/// `regressors` must point to `n_regressors` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn bp_fit_within_dk(
    panel: *const BpPanel,
    dependent: *const c_char,
    regressors: *const *const c_char,
    n_regressors: usize,
    include_intercept: bool,
    fixed_effects: bool,
    bandwidth: i32,
    out: *mut *mut BpFit,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = ref_arg(panel, "panel")?;
        let dep = str_arg(dependent, "dependent")?;
        if n_regressors > 0 && regressors.is_null() {
            return Err(null("regressors"));
        }
        let mut regs = Vec::with_capacity(n_regressors);
        for i in 0..n_regressors {
            regs.push(str_arg(*regressors.add(i), "regressor")?);
        }
        let bw = if bandwidth < 0 {
            Bandwidth::Auto
        } else {
            Bandwidth::Fixed(bandwidth as usize)
        };
        let spec = RegressionSpec::new(dep, &regs)
            .with_intercept(include_intercept)
            .with_fixed_effects(fixed_effects)
            .with_bandwidth(bw);
        let fit = econometrics::fit_within_dk(&p.inner, &spec)?;
        *out = Box::into_raw(Box::new(BpFit { inner: fit }));
        Ok(())
    })
}

/// # Safety
/// `fit` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_fit_free(fit: *mut BpFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of coefficients, intercept included.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_fit_n_coefficients(fit: *const BpFit, out: *mut usize) -> BpStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(fit, "fit")?.inner.coefficients.len();
        Ok(())
    })
}

/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_fit_coefficient(
    fit: *const BpFit,
    index: usize,
    out: *mut BpCoefficient,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = coefficient_at(ref_arg(fit, "fit")?, index)?;
        *out = BpCoefficient {
            estimate: c.estimate,
            std_error: c.std_error,
            t_stat: c.t_stat.unwrap_or(f64::NAN),
            p_value: c.p_value.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Writes a newly allocated copy of the coefficient name to `out`.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_fit_coefficient_name(
    fit: *const BpFit,
    index: usize,
    out: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = coefficient_at(ref_arg(fit, "fit")?, index)?;
        *out = into_c_string(c.name.clone());
        Ok(())
    })
}

fn coefficient_at(fit: &BpFit, index: usize) -> Result<&econometrics::Coefficient, Fail> {
    fit.inner.coefficients.get(index).ok_or_else(|| {
        Fail(
            BP_ERR_INPUT,
            format!(
                "coefficient index {index} out of range (have {})",
                fit.inner.coefficients.len()
            ),
        )
    })
}

/// Serialises the whole fit (coefficients, covariance, residuals, diagnostics).
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_fit_to_json(fit: *const BpFit, out: *mut *mut c_char) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let json = serde_json::to_string_pretty(&ref_arg(fit, "fit")?.inner)
            .map_err(|e| Fail(BP_ERR_INPUT, e.to_string()))?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// Harris–Tzavalis test with panel-specific means on a balanced column.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_harris_tzavalis(
    panel: *const BpPanel,
    column: *const c_char,
    out: *mut BpUnitRoot,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = ref_arg(panel, "panel")?;
        let r = econometrics::harris_tzavalis(&p.inner, str_arg(column, "column")?)?;
        *out = BpUnitRoot {
            rho_hat: r.rho_hat,
            z_stat: r.z_stat,
            p_value: r.p_value,
            n_entities: r.n_entities,
            n_periods: r.n_periods,
        };
        Ok(())
    })
}

// ---------------------------------------------------------------- ratios

fn snapshot(bs: &BpBalanceSheet) -> BalanceSheetSnapshot {
    BalanceSheetSnapshot {
        entity: String::new(),
        year: 0,
        common_equity: bs.common_equity,
        debt_ge_1y: bs.debt_ge_1y,
        other_liabilities_ge_1y: bs.other_liabilities_ge_1y,
        stable_deposits_lt_1y: bs.stable_deposits_lt_1y,
        less_stable_deposits_lt_1y: bs.less_stable_deposits_lt_1y,
        govt_debt: bs.govt_debt,
        corp_loans_lt_1y: bs.corp_loans_lt_1y,
        retail_loans_lt_1y: bs.retail_loans_lt_1y,
        other_assets_ex_cash_interbank: bs.other_assets,
        intangibles: bs.intangibles,
        goodwill: bs.goodwill,
        rwa: bs.rwa,
    }
}

impl From<NsfrWeights> for BpNsfrWeights {
    fn from(w: NsfrWeights) -> Self {
        BpNsfrWeights {
            asf_long_term_funding: w.asf.long_term_funding,
            asf_stable_deposits: w.asf.stable_deposits,
            asf_less_stable_deposits: w.asf.less_stable_deposits,
            rsf_govt_debt: w.rsf.govt_debt,
            rsf_corp_loans: w.rsf.corp_loans,
            rsf_retail_loans: w.rsf.retail_loans,
            rsf_other_assets: w.rsf.other_assets,
        }
    }
}

impl From<&BpNsfrWeights> for NsfrWeights {
    fn from(w: &BpNsfrWeights) -> Self {
        NsfrWeights {
            asf: AsfWeights {
                long_term_funding: w.asf_long_term_funding,
                stable_deposits: w.asf_stable_deposits,
                less_stable_deposits: w.asf_less_stable_deposits,
            },
            rsf: RsfWeights {
                govt_debt: w.rsf_govt_debt,
                corp_loans: w.rsf_corp_loans,
                retail_loans: w.rsf_retail_loans,
                other_assets: w.rsf_other_assets,
            },
        }
    }
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_nsfr_default_weights(out: *mut BpNsfrWeights) -> BpStatus {
    guard(|| {
        *out_arg(out, "out")? = NsfrWeights::default().into();
        Ok(())
    })
}

/// NSFR = ASF / RSF. `weights` may be null for the default calibration.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_compute_nsfr(
    sheet: *const BpBalanceSheet,
    weights: *const BpNsfrWeights,
    out: *mut f64,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let bs = snapshot(ref_arg(sheet, "sheet")?);
        bs.validate()?;
        let w = weights.as_ref().map(NsfrWeights::from).unwrap_or_default();
        w.validate()?;
        *out = basel::compute_nsfr(&bs, &w)?;
        Ok(())
    })
}

/// Tangible common equity over RWA. `negative_tce` may be null.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_compute_tce_rwa(
    sheet: *const BpBalanceSheet,
    out: *mut f64,
    negative_tce: *mut bool,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let bs = snapshot(ref_arg(sheet, "sheet")?);
        bs.validate()?;
        let r = basel::compute_tce_rwa(&bs)?;
        *out = r.value;
        if let Some(flag) = negative_tce.as_mut() {
            *flag = r.negative_tce;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- system

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_coefficients_paper_preset(out: *mut *mut BpCoefficients) -> BpStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(BpCoefficients {
            inner: CoefficientSet::paper_preset(),
        }));
        Ok(())
    })
}

/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_coefficients_from_json(
    json: *const c_char,
    out: *mut *mut BpCoefficients,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let set = CoefficientSet::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(BpCoefficients { inner: set }));
        Ok(())
    })
}

/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_coefficients_to_json(
    coeffs: *const BpCoefficients,
    out: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_c_string(ref_arg(coeffs, "coeffs")?.inner.to_json());
        Ok(())
    })
}

/// # Safety
/// `coeffs` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_coefficients_free(coeffs: *mut BpCoefficients) {
    if !coeffs.is_null() {
        drop(Box::from_raw(coeffs));
    }
}

/// Fits the three-equation system on the default column names.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_fit_system(
    panel: *const BpPanel,
    out: *mut *mut BpCoefficients,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let fit = model::fit_system(&ref_arg(panel, "panel")?.inner)?;
        *out = Box::into_raw(Box::new(BpCoefficients {
            inner: fit.coefficients,
        }));
        Ok(())
    })
}

/// Propagates a liquidity / capital shock (percentage points). With
/// `exogenous_lgdp` false the lending change feeds the lending-to-GDP term;
/// otherwise `delta_lgdp` is used as given.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_propagate_shock(
    coeffs: *const BpCoefficients,
    delta_liq: f64,
    delta_cap: f64,
    exogenous_lgdp: bool,
    delta_lgdp: f64,
    out: *mut BpScenario,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = ref_arg(coeffs, "coeffs")?;
        let mut input = ScenarioInput::new(delta_liq, delta_cap);
        if exogenous_lgdp {
            input.lending_mode = LendingMode::Exogenous { delta_lgdp };
        }
        let r = model::propagate_shock(&c.inner, &input);
        *out = BpScenario {
            delta_spread: r.delta_spread,
            delta_lending: r.delta_lending,
            delta_lgdp: r.delta_lgdp,
            delta_roe: r.delta_roe,
        };
        Ok(())
    })
}

/// Generates a seeded synthetic panel from a coefficient set.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_simulate_panel(
    coeffs: *const BpCoefficients,
    n_banks: usize,
    n_years: usize,
    noise_sd: f64,
    seed: u64,
    out: *mut *mut BpPanel,
) -> BpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = ref_arg(coeffs, "coeffs")?;
        let ds = model::simulate_panel(&c.inner, n_banks, n_years, noise_sd, seed)?;
        *out = Box::into_raw(Box::new(BpPanel { inner: ds }));
        Ok(())
    })
}
