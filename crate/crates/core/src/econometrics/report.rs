use super::{CovarianceKind, FitResult, UnitRootResult, INTERCEPT};
use crate::text::{sig4, sig4_opt, Table};

/// Coefficient table followed by the fitted equation with p-values printed
/// beneath each slope.
pub fn format_fit_table(fit: &FitResult) -> String {
    let mut out = String::new();
    let cov = match fit.covariance_kind {
        CovarianceKind::DriscollKraay => format!("Driscoll-Kraay, bandwidth {}", fit.bandwidth),
        CovarianceKind::Conventional => "conventional".to_string(),
    };
    let model = if fit.fixed_effects {
        "fixed effects (within)"
    } else {
        "pooled OLS"
    };
    out.push_str(&format!("Dependent: {}  [{model}; {cov}]\n", fit.dependent));
    out.push_str(&format!(
        "obs {}  entities {}  periods {}  df {}  R2 {}\n",
        fit.n_obs,
        fit.n_entities,
        fit.t_used,
        fit.df_resid,
        sig4_opt(fit.r_squared)
    ));
    let mut table = Table::new(["term", "estimate", "std.err", "t", "p-value"]);
    for c in &fit.coefficients {
        table.row([
            c.name.clone(),
            sig4(c.estimate),
            sig4(c.std_error),
            sig4_opt(c.t_stat),
            sig4_opt(c.p_value),
        ]);
    }
    out.push_str(&table.render());
    out.push('\n');

    let mut terms: Vec<(String, String)> = Vec::new();
    for (i, c) in fit.coefficients.iter().enumerate() {
        let value = if i == 0 {
            sig4(c.estimate)
        } else if c.estimate < 0.0 {
            format!("- {}", sig4(-c.estimate))
        } else {
            format!("+ {}", sig4(c.estimate))
        };
        let term = if c.name == INTERCEPT {
            value
        } else {
            format!("{value} {}", c.name)
        };
        let p = if c.name == INTERCEPT {
            String::new()
        } else {
            format!("({})", sig4_opt(c.p_value))
        };
        terms.push((term, p));
    }
    let lhs = format!("{} = ", fit.dependent);
    let mut eq = lhs.clone();
    let mut under = " ".repeat(lhs.chars().count());
    for (term, p) in &terms {
        let w = term.chars().count().max(p.chars().count());
        eq.push_str(&format!("{term:<w$} "));
        under.push_str(&format!("{p:<w$} "));
    }
    out.push_str(eq.trim_end());
    out.push('\n');
    out.push_str(under.trim_end());
    out.push('\n');
    out
}

/// Unit-root results laid out as variable / rho / p-value rows.
pub fn format_unit_root_table(results: &[UnitRootResult]) -> String {
    let mut table = Table::new(["variable", "rho", "z", "p-value", "N", "T"]);
    for r in results {
        table.row([
            r.variable.clone(),
            sig4(r.rho_hat),
            sig4(r.z_stat),
            sig4(r.p_value),
            r.n_entities.to_string(),
            r.n_periods.to_string(),
        ]);
    }
    let mut out = String::from("Harris-Tzavalis unit-root test (panel-specific means)\n");
    out.push_str(&table.render());
    out
}
