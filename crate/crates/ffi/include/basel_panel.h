#ifndef BASEL_PANEL_H
#define BASEL_PANEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Opaque coefficient set for the spread / lending / ROE system.
typedef struct BpCoefficients BpCoefficients;

// Opaque regression result.
typedef struct BpFit BpFit;

// Opaque bank-year panel.
typedef struct BpPanel BpPanel;

typedef int32_t BpStatus;

// One row of a coefficient table. `t_stat` and `p_value` are NaN when undefined.
typedef struct BpCoefficient {
  double estimate;
  double std_error;
  double t_stat;
  double p_value;
} BpCoefficient;

typedef struct BpUnitRoot {
  double rho_hat;
  double z_stat;
  double p_value;
  size_t n_entities;
  size_t n_periods;
} BpUnitRoot;

typedef struct BpNsfrWeights {
  double asf_long_term_funding;
  double asf_stable_deposits;
  double asf_less_stable_deposits;
  double rsf_govt_debt;
  double rsf_corp_loans;
  double rsf_retail_loans;
  double rsf_other_assets;
} BpNsfrWeights;

typedef struct BpBalanceSheet {
  double common_equity;
  double debt_ge_1y;
  double other_liabilities_ge_1y;
  double stable_deposits_lt_1y;
  double less_stable_deposits_lt_1y;
  double govt_debt;
  double corp_loans_lt_1y;
  double retail_loans_lt_1y;
  double other_assets;
  double intangibles;
  double goodwill;
  double rwa;
} BpBalanceSheet;

// Scenario deltas: spread in percentage points, the rest in percent.
typedef struct BpScenario {
  double delta_spread;
  double delta_lending;
  double delta_lgdp;
  double delta_roe;
} BpScenario;

#define BP_OK 0

// A required pointer argument was null.
#define BP_ERR_NULL 1

// Malformed input, bad argument or I/O failure.
#define BP_ERR_INPUT 2

// Rank deficiency, too few observations or another estimation failure.
#define BP_ERR_ESTIMATION 3

// A string argument was not valid UTF-8.
#define BP_ERR_UTF8 4

// The library panicked; the handle arguments should be considered unusable.
#define BP_ERR_PANIC 5

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful call. Valid until the next call into the library.
const char *bp_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void bp_string_free(char *s);

// Loads a long-format `bank_id,year,...` CSV. `schema_path` may be null, in
// which case every numeric column is kept untransformed.
//
// # Safety
// Pointer arguments must be valid for the duration of the call.
BpStatus bp_panel_load(const char *path, const char *schema_path, struct BpPanel **out);

// # Safety
// `panel` must come from this library and not have been freed.
void bp_panel_free(struct BpPanel *panel);

// # Safety
// Pointer arguments must be valid.
BpStatus bp_panel_dims(const struct BpPanel *panel, size_t *n_entities, size_t *n_periods);

// # Safety
// Pointer arguments must be valid.
BpStatus bp_panel_save_csv(const struct BpPanel *panel, const char *path);

// Fixed-effects (or pooled, when `fixed_effects` is false) regression with
// Driscoll–Kraay standard errors. A negative `bandwidth` selects the
// automatic lag length.
//
// # Safety
// `regressors` must point to `n_regressors` valid C strings.
BpStatus bp_fit_within_dk(const struct BpPanel *panel,
                          const char *dependent,
                          const char *const *regressors,
                          size_t n_regressors,
                          bool include_intercept,
                          bool fixed_effects,
                          int32_t bandwidth,
                          struct BpFit **out);

// # Safety
// `fit` must come from this library and not have been freed.
void bp_fit_free(struct BpFit *fit);

// Number of coefficients, intercept included.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_fit_n_coefficients(const struct BpFit *fit, size_t *out);

// # Safety
// Pointer arguments must be valid.
BpStatus bp_fit_coefficient(const struct BpFit *fit, size_t index, struct BpCoefficient *out);

// Writes a newly allocated copy of the coefficient name to `out`.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_fit_coefficient_name(const struct BpFit *fit, size_t index, char **out);

// Serialises the whole fit (coefficients, covariance, residuals, diagnostics).
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_fit_to_json(const struct BpFit *fit, char **out);

// Harris–Tzavalis test with panel-specific means on a balanced column.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_harris_tzavalis(const struct BpPanel *panel,
                            const char *column,
                            struct BpUnitRoot *out);

// # Safety
// `out` must be valid.
BpStatus bp_nsfr_default_weights(struct BpNsfrWeights *out);

// NSFR = ASF / RSF. `weights` may be null for the default calibration.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_compute_nsfr(const struct BpBalanceSheet *sheet,
                         const struct BpNsfrWeights *weights,
                         double *out);

// Tangible common equity over RWA. `negative_tce` may be null.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_compute_tce_rwa(const struct BpBalanceSheet *sheet, double *out, bool *negative_tce);

// # Safety
// `out` must be valid.
BpStatus bp_coefficients_paper_preset(struct BpCoefficients **out);

// # Safety
// Pointer arguments must be valid.
BpStatus bp_coefficients_from_json(const char *json, struct BpCoefficients **out);

// # Safety
// Pointer arguments must be valid.
BpStatus bp_coefficients_to_json(const struct BpCoefficients *coeffs, char **out);

// # Safety
// `coeffs` must come from this library and not have been freed.
void bp_coefficients_free(struct BpCoefficients *coeffs);

// Fits the three-equation system on the default column names.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_fit_system(const struct BpPanel *panel, struct BpCoefficients **out);

// Propagates a liquidity / capital shock (percentage points). With
// `exogenous_lgdp` false the lending change feeds the lending-to-GDP term;
// otherwise `delta_lgdp` is used as given.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_propagate_shock(const struct BpCoefficients *coeffs,
                            double delta_liq,
                            double delta_cap,
                            bool exogenous_lgdp,
                            double delta_lgdp,
                            struct BpScenario *out);

// Generates a seeded synthetic panel from a coefficient set.
//
// # Safety
// Pointer arguments must be valid.
BpStatus bp_simulate_panel(const struct BpCoefficients *coeffs,
                           size_t n_banks,
                           size_t n_years,
                           double noise_sd,
                           uint64_t seed,
                           struct BpPanel **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BASEL_PANEL_H */
