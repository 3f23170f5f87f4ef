use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::panel::PanelDataset;

pub const PANEL_SPECIFIC_MEANS: &str = "panel-specific means";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    pub variable: String,
    pub rho_hat: f64,
    pub z_stat: f64,
    /// Left-tail p-value; small values reject the unit root.
    pub p_value: f64,
    /// Observed periods per entity.
    pub n_periods: usize,
    /// Autoregression observations per entity (`n_periods - 1`).
    pub t_regression: usize,
    pub n_entities: usize,
    pub case: String,
    /// Null mean of `rho_hat - 1`.
    pub bias: f64,
    /// Null standard deviation of `sqrt(N) (rho_hat - 1)`.
    pub std_dev: f64,
}

/// Fixed-T null moments `(mu, sigma^2)` of the within AR(1) estimator with
/// panel-specific means, for `t` autoregression observations per entity.
pub fn ht_moments(t: usize) -> (f64, f64) {
    let t = t as f64;
    let mu = -3.0 / (t + 1.0);
    let var = 3.0 * (17.0 * t * t - 20.0 * t + 17.0) / (5.0 * (t - 1.0) * (t + 1.0).powi(3));
    (mu, var)
}

/// Harris–Tzavalis unit-root test, panel-specific means case.
///
/// Each entity contributes the pairs `(y_{t-1}, y_t)`, `t = 2..T`, with both
/// sides demeaned over that usable sample. The statistic is normalised with
/// the fixed-T moments evaluated at `T - 1` autoregression observations.
pub fn harris_tzavalis(ds: &PanelDataset, column: &str) -> Result<UnitRootResult> {
    let values = ds.column(column)?;
    if values.iter().any(Option::is_none) {
        return Err(Error::Unbalanced(column.to_string()));
    }
    let n_periods = ds.n_periods();
    if n_periods < 3 {
        return Err(Error::InvalidArgument(format!(
            "Harris–Tzavalis needs at least 3 periods, got {n_periods}"
        )));
    }
    let n = ds.n_entities();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Harris–Tzavalis needs at least 2 entities, got {n}"
        )));
    }

    // sum in entity-id order so the result does not depend on row order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ds.entities()[a].cmp(&ds.entities()[b]));

    let t_reg = n_periods - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for e in order {
        let series: Vec<f64> = ds.series(column, e)?.iter().map(|v| v.unwrap()).collect();
        let lagged = &series[..t_reg];
        let current = &series[1..];
        let lag_mean = lagged.iter().sum::<f64>() / t_reg as f64;
        let cur_mean = current.iter().sum::<f64>() / t_reg as f64;
        for (l, c) in lagged.iter().zip(current) {
            let dl = l - lag_mean;
            num += dl * (c - cur_mean);
            den += dl * dl;
        }
    }
    if den <= 0.0 {
        return Err(Error::DegenerateVariance(column.to_string()));
    }
    let rho_hat = num / den;
    let (bias, var) = ht_moments(t_reg);
    let std_dev = var.sqrt();
    let z_stat = (n as f64).sqrt() * (rho_hat - 1.0 - bias) / std_dev;
    let p_value = Normal::standard().cdf(z_stat);

    Ok(UnitRootResult {
        variable: column.to_string(),
        rho_hat,
        z_stat,
        p_value,
        n_periods,
        t_regression: t_reg,
        n_entities: n,
        case: PANEL_SPECIFIC_MEANS.to_string(),
        bias,
        std_dev,
    })
}
