use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::dk::{auto_bandwidth, driscoll_kraay_meat};
use super::{
    Bandwidth, Coefficient, CovarianceKind, FitResult, RegressionSpec, Residual, INTERCEPT,
};
use crate::error::{Error, Result};
use crate::panel::PanelDataset;

/// Relative singular-value tolerance for rank detection.
const RANK_TOL: f64 = 1e-10;

/// Least-squares design after listwise deletion and (optionally) the within
/// transformation.
struct Design {
    names: Vec<String>,
    x: DMatrix<f64>,
    y: DVector<f64>,
    /// Dependent variable centred as in the R² denominator.
    y_centred: DVector<f64>,
    entity: Vec<usize>,
    period: Vec<usize>,
    n_entities: usize,
    t_used: usize,
    df_resid: usize,
}

/// Within (fixed-effects) estimator with Driscoll–Kraay covariance.
///
/// With an intercept, entity means are removed and the grand means are added
/// back before fitting, so the intercept is the average fixed effect and all
/// slopes and residuals equal those of the pure within regression.
pub fn fit_within_dk(ds: &PanelDataset, spec: &RegressionSpec) -> Result<FitResult> {
    estimate(ds, spec)
}

/// Ordinary least squares on the pooled observations. `spec.fixed_effects` is
/// ignored; the covariance follows `spec.covariance`.
pub fn pooled_ols(ds: &PanelDataset, spec: &RegressionSpec) -> Result<FitResult> {
    estimate(ds, &spec.clone().with_fixed_effects(false))
}

fn estimate(ds: &PanelDataset, spec: &RegressionSpec) -> Result<FitResult> {
    spec.validate()?;
    let design = build_design(ds, spec)?;
    let n = design.x.nrows();
    let p = design.x.ncols();

    let qr = design.x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &design.y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient {
            columns: design.names.clone(),
        })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::RankDeficient {
            columns: design.names.clone(),
        })?;
    let bread = &r_inv * r_inv.transpose();
    let resid = &design.y - &design.x * &beta;

    let (cov, bandwidth) = match spec.covariance {
        CovarianceKind::DriscollKraay => {
            let m = match spec.dk_bandwidth {
                Bandwidth::Auto => auto_bandwidth(design.t_used),
                Bandwidth::Fixed(m) => m,
            };
            let slots = ds.n_periods();
            let mut moments = vec![DVector::zeros(p); slots];
            for row in 0..n {
                let g = design.x.row(row).transpose() * resid[row];
                moments[design.period[row]] += g;
            }
            let first = *design.period.iter().min().unwrap_or(&0);
            let last = *design.period.iter().max().unwrap_or(&0);
            let meat = driscoll_kraay_meat(&moments[first..=last], m);
            (&bread * meat * &bread, m)
        }
        CovarianceKind::Conventional => {
            if design.df_resid == 0 {
                return Err(Error::TooFewObservations {
                    observations: n,
                    parameters: p,
                });
            }
            let s2 = resid.norm_squared() / design.df_resid as f64;
            (&bread * s2, 0)
        }
    };
    let cov = (&cov + cov.transpose()) * 0.5;

    let t_dist = if design.df_resid > 0 {
        Some(
            StudentsT::new(0.0, 1.0, design.df_resid as f64)
                .map_err(|e| Error::InvalidArgument(format!("t distribution: {e}")))?,
        )
    } else {
        None
    };
    let coefficients = design
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let se = cov[(j, j)].max(0.0).sqrt();
            let (t_stat, p_value) = match &t_dist {
                Some(dist) if se > 0.0 => {
                    let t = beta[j] / se;
                    (Some(t), Some((2.0 * dist.sf(t.abs())).min(1.0)))
                }
                _ => (None, None),
            };
            Coefficient {
                name: name.clone(),
                estimate: beta[j],
                std_error: se,
                t_stat,
                p_value,
            }
        })
        .collect();

    let sst = design.y_centred.norm_squared();
    let ssr = resid.norm_squared();
    let r_squared = (sst > 0.0).then(|| 1.0 - ssr / sst);

    let residuals = (0..n)
        .map(|row| Residual {
            entity: ds.entities()[design.entity[row]].clone(),
            year: ds.periods()[design.period[row]],
            value: resid[row],
        })
        .collect();

    Ok(FitResult {
        dependent: spec.dependent.clone(),
        fixed_effects: spec.fixed_effects,
        covariance_kind: spec.covariance,
        coefficients,
        covariance: (0..p)
            .map(|i| (0..p).map(|j| cov[(i, j)]).collect())
            .collect(),
        residuals,
        r_squared,
        n_obs: n,
        n_entities: design.n_entities,
        t_used: design.t_used,
        df_resid: design.df_resid,
        bandwidth,
    })
}

fn build_design(ds: &PanelDataset, spec: &RegressionSpec) -> Result<Design> {
    let y_col = ds.column(&spec.dependent)?;
    let x_cols: Vec<&[Option<f64>]> = spec
        .regressors
        .iter()
        .map(|r| ds.column(r))
        .collect::<Result<_>>()?;
    let k = x_cols.len();
    let t = ds.n_periods();

    // listwise deletion
    let mut rows: Vec<(usize, usize)> = Vec::new();
    for e in 0..ds.n_entities() {
        for p in 0..t {
            let cell = e * t + p;
            if y_col[cell].is_some() && x_cols.iter().all(|c| c[cell].is_some()) {
                rows.push((e, p));
            }
        }
    }

    if spec.fixed_effects {
        let mut counts = vec![0usize; ds.n_entities()];
        for &(e, _) in &rows {
            counts[e] += 1;
        }
        for (e, &c) in counts.iter().enumerate() {
            if c == 1 {
                log::warn!(
                    "dropping entity {:?}: only one usable period for {}",
                    ds.entities()[e],
                    spec.dependent
                );
            }
        }
        rows.retain(|&(e, _)| counts[e] >= 2);
    }

    let n = rows.len();
    let n_params = k + usize::from(spec.include_intercept);
    // pooled fits may be exactly identified
    if (spec.fixed_effects && n <= k + 1) || n < n_params {
        return Err(Error::TooFewObservations {
            observations: n,
            parameters: n_params,
        });
    }
    let mut entity_ids: Vec<usize> = rows.iter().map(|&(e, _)| e).collect();
    entity_ids.dedup();
    let n_entities = entity_ids.len();
    let mut periods_used: Vec<usize> = rows.iter().map(|&(_, p)| p).collect();
    periods_used.sort_unstable();
    periods_used.dedup();

    let absorbed = if spec.fixed_effects {
        n_entities
    } else {
        usize::from(spec.include_intercept)
    };
    let df_resid = n
        .checked_sub(k + absorbed)
        .filter(|&d| d > 0 || !spec.fixed_effects)
        .ok_or(Error::TooFewObservations {
            observations: n,
            parameters: k + absorbed,
        })?;

    let mut y = DVector::from_iterator(n, rows.iter().map(|&(e, p)| y_col[e * t + p].unwrap()));
    let mut x = DMatrix::from_fn(n, k, |i, j| {
        let (e, p) = rows[i];
        x_cols[j][e * t + p].unwrap()
    });
    let raw_norms: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();

    let y_centred;
    if spec.fixed_effects {
        let y_grand = y.mean();
        let x_grand: Vec<f64> = (0..k).map(|j| x.column(j).mean()).collect();
        demean_by_entity(&rows, &mut y, &mut x);
        y_centred = y.clone();
        if spec.include_intercept {
            y.add_scalar_mut(y_grand);
            for (j, g) in x_grand.iter().enumerate() {
                x.column_mut(j).add_scalar_mut(*g);
            }
        }
        check_rank(
            &demeaned_view(&x, &x_grand, spec.include_intercept),
            &raw_norms,
            &spec.regressors,
        )?;
    } else {
        y_centred = if spec.include_intercept {
            y.add_scalar(-y.mean())
        } else {
            y.clone()
        };
        if spec.include_intercept {
            let mut full = DMatrix::from_element(n, k + 1, 1.0);
            full.view_mut((0, 1), (n, k)).copy_from(&x);
            let mut names = vec![INTERCEPT.to_string()];
            names.extend(spec.regressors.iter().cloned());
            let mut norms = vec![(n as f64).sqrt()];
            norms.extend(&raw_norms);
            check_rank(&full, &norms, &names)?;
        } else {
            check_rank(&x, &raw_norms, &spec.regressors)?;
        }
    }

    let mut names = Vec::with_capacity(n_params);
    if spec.include_intercept {
        names.push(INTERCEPT.to_string());
        let mut full = DMatrix::from_element(n, k + 1, 1.0);
        full.view_mut((0, 1), (n, k)).copy_from(&x);
        x = full;
    }
    names.extend(spec.regressors.iter().cloned());

    Ok(Design {
        names,
        x,
        y,
        y_centred,
        entity: rows.iter().map(|&(e, _)| e).collect(),
        period: rows.iter().map(|&(_, p)| p).collect(),
        n_entities,
        t_used: periods_used.len(),
        df_resid,
    })
}

fn demean_by_entity(rows: &[(usize, usize)], y: &mut DVector<f64>, x: &mut DMatrix<f64>) {
    // rows are grouped by entity
    let mut start = 0;
    while start < rows.len() {
        let e = rows[start].0;
        let end = start + rows[start..].iter().take_while(|r| r.0 == e).count();
        let len = (end - start) as f64;
        let ym = y.rows(start, end - start).sum() / len;
        y.rows_mut(start, end - start).add_scalar_mut(-ym);
        for j in 0..x.ncols() {
            let xm = x.view((start, j), (end - start, 1)).sum() / len;
            x.view_mut((start, j), (end - start, 1)).add_scalar_mut(-xm);
        }
        start = end;
    }
}

fn demeaned_view(x: &DMatrix<f64>, grand: &[f64], added_back: bool) -> DMatrix<f64> {
    let mut out = x.clone();
    if added_back {
        for (j, g) in grand.iter().enumerate() {
            out.column_mut(j).add_scalar_mut(-g);
        }
    }
    out
}

/// Rank check on a column-equilibrated design. A column whose norm collapses
/// relative to its untransformed norm (e.g. a time-invariant regressor under
/// fixed effects) is collinear with the absorbed effects.
fn check_rank(x: &DMatrix<f64>, raw_norms: &[f64], names: &[String]) -> Result<()> {
    let p = x.ncols();
    let mut scaled = x.clone();
    let mut absorbed = Vec::new();
    for j in 0..p {
        let norm = scaled.column(j).norm();
        if norm <= RANK_TOL * raw_norms[j] || norm == 0.0 {
            absorbed.push(names[j].clone());
        } else {
            scaled.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    if !absorbed.is_empty() {
        return Err(Error::RankDeficient { columns: absorbed });
    }
    let svd = scaled.svd(false, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut collinear = vec![false; p];
    for (i, s) in sv.iter().enumerate() {
        if *s <= RANK_TOL * max {
            for j in 0..p {
                if v_t[(i, j)].abs() > 1e-6 {
                    collinear[j] = true;
                }
            }
        }
    }
    if collinear.iter().any(|&c| c) {
        return Err(Error::RankDeficient {
            columns: names
                .iter()
                .zip(collinear)
                .filter(|(_, c)| *c)
                .map(|(n, _)| n.clone())
                .collect(),
        });
    }
    Ok(())
}
