//! Reference implementations used as test oracles. Nothing here calls into
//! the estimator code; linear algebra is plain Gaussian elimination.
#![allow(dead_code, clippy::needless_range_loop)]

use basel_panel::panel::PanelDataset;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-300, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            solve(a.to_vec(), e)
        })
        .collect();
    (0..n)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect()
}

pub fn cross(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = x[0].len();
    let mut out = vec![vec![0.0; p]; p];
    for row in x {
        for i in 0..p {
            for j in 0..p {
                out[i][j] += row[i] * row[j];
            }
        }
    }
    out
}

pub fn xty(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut out = vec![0.0; p];
    for (row, yi) in x.iter().zip(y) {
        for i in 0..p {
            out[i] += row[i] * yi;
        }
    }
    out
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Least squares with one dummy per entity (no common intercept) over
/// complete observations. Returns the slopes and the implied average effect
/// `mean(y) - mean(x)' beta`.
pub struct Lsdv {
    pub slopes: Vec<f64>,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

pub fn lsdv(ds: &PanelDataset, dep: &str, regs: &[&str]) -> Lsdv {
    let n_ent = ds.n_entities();
    let k = regs.len();
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for e in 0..n_ent {
        for t in 0..ds.n_periods() {
            let y = ds.get(dep, e, t).unwrap();
            let xs: Vec<Option<f64>> = regs.iter().map(|r| ds.get(r, e, t).unwrap()).collect();
            if let (Some(y), true) = (y, xs.iter().all(Option::is_some)) {
                let mut row: Vec<f64> = xs.into_iter().map(Option::unwrap).collect();
                row.extend((0..n_ent).map(|d| if d == e { 1.0 } else { 0.0 }));
                rows.push(row);
                ys.push(y);
            }
        }
    }
    // entities without observations leave an all-zero dummy; drop those columns
    let used: Vec<usize> = (0..k + n_ent)
        .filter(|&j| j < k || rows.iter().any(|r| r[j] != 0.0))
        .collect();
    let rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| used.iter().map(|&j| r[j]).collect())
        .collect();
    let b = solve(cross(&rows), xty(&rows, &ys));
    let slopes = b[..k].to_vec();
    let nobs = ys.len() as f64;
    let ybar = ys.iter().sum::<f64>() / nobs;
    let xbar: Vec<f64> = (0..k)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / nobs)
        .collect();
    let intercept = ybar - xbar.iter().zip(&slopes).map(|(x, b)| x * b).sum::<f64>();
    let residuals = rows
        .iter()
        .zip(&ys)
        .map(|(r, y)| y - r.iter().zip(&b).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    Lsdv {
        slopes,
        intercept,
        residuals,
    }
}

/// OLS coefficients and the heteroskedasticity-robust sandwich
/// `(X'X)^-1 (sum_t x_t x_t' e_t^2) (X'X)^-1`, summed term by term.
pub fn ols_sandwich(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let b = solve(cross(x), xty(x, y));
    let p = b.len();
    let mut meat = vec![vec![0.0; p]; p];
    for (row, yi) in x.iter().zip(y) {
        let e = yi - row.iter().zip(&b).map(|(a, c)| a * c).sum::<f64>();
        for i in 0..p {
            for j in 0..p {
                meat[i][j] += row[i] * row[j] * e * e;
            }
        }
    }
    let bread = invert(&cross(x));
    (b, matmul(&matmul(&bread, &meat), &bread))
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random balanced (or, with `holes`, unbalanced) panel with columns `y`,
/// `x0..x{k-1}`, entity effects and a known slope vector.
pub fn random_panel(
    rng: &mut ChaCha8Rng,
    n: usize,
    t: usize,
    k: usize,
    holes: bool,
) -> PanelDataset {
    let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut xs = vec![Vec::with_capacity(n * t); k];
    let mut y = Vec::with_capacity(n * t);
    for _ in 0..n {
        let alpha = 3.0 * normal(rng);
        let levels: Vec<f64> = (0..k).map(|_| normal(rng)).collect();
        for _ in 0..t {
            let row: Vec<f64> = levels.iter().map(|l| l + normal(rng)).collect();
            let yv = alpha + row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + normal(rng);
            let drop = holes && rng.random_bool(0.1);
            y.push(if drop { None } else { Some(yv) });
            for (j, v) in row.into_iter().enumerate() {
                xs[j].push(Some(v));
            }
        }
    }
    let mut ds = PanelDataset::new(
        (0..n).map(|i| format!("E{i}")).collect(),
        (0..t as i32).map(|p| 2000 + p).collect(),
    )
    .unwrap()
    .with_column("y", y)
    .unwrap();
    for (j, col) in xs.into_iter().enumerate() {
        ds = ds.with_column(&format!("x{j}"), col).unwrap();
    }
    ds
}

pub fn regressor_names(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("x{j}")).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
