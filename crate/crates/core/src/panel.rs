//! Bank-year panel storage, CSV ingestion, and variable construction.
//!
//! A [`PanelDataset`] is a rectangular entity × period grid. Every column is
//! stored entity-major (`values[e * n_periods + t]`), and every cell is either a
//! finite real or missing. All transformations return a new dataset.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suffix appended to a column name by a log transform.
pub const LOG_SUFFIX: &str = "__log";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    None,
    Log,
}

/// A declared panel variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default)]
    pub role: String,
    #[serde(default)]
    pub units: String,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, transform: Transform) -> Self {
        VariableSpec {
            name: name.into(),
            transform,
            role: String::new(),
            units: String::new(),
        }
    }

    /// Name of the column holding the transformed values.
    pub fn output_name(&self) -> String {
        match self.transform {
            Transform::None => self.name.clone(),
            Transform::Log => format!("{}{LOG_SUFFIX}", self.name),
        }
    }
}

/// Reads a schema file: a JSON array of [`VariableSpec`] entries.
pub fn load_schema(path: impl AsRef<Path>) -> Result<Vec<VariableSpec>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivedKind {
    /// Lending rate minus interbank rate.
    Spread { rate: String, interbank: String },
    /// Interbank rate minus CPI inflation.
    RealRate {
        interbank: String,
        inflation: String,
    },
    /// `log(numerator / denominator)`.
    RatioLog {
        numerator: String,
        denominator: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedSeriesRecipe {
    pub output: String,
    #[serde(flatten)]
    pub kind: DerivedKind,
}

impl DerivedSeriesRecipe {
    pub fn spread(output: &str, rate: &str, interbank: &str) -> Self {
        DerivedSeriesRecipe {
            output: output.to_string(),
            kind: DerivedKind::Spread {
                rate: rate.to_string(),
                interbank: interbank.to_string(),
            },
        }
    }

    pub fn real_rate(output: &str, interbank: &str, inflation: &str) -> Self {
        DerivedSeriesRecipe {
            output: output.to_string(),
            kind: DerivedKind::RealRate {
                interbank: interbank.to_string(),
                inflation: inflation.to_string(),
            },
        }
    }

    pub fn ratio_log(output: &str, numerator: &str, denominator: &str) -> Self {
        DerivedSeriesRecipe {
            output: output.to_string(),
            kind: DerivedKind::RatioLog {
                numerator: numerator.to_string(),
                denominator: denominator.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Column {
    name: String,
    values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    entities: Vec<String>,
    periods: Vec<i32>,
    columns: Vec<Column>,
}

impl PanelDataset {
    /// Creates an empty dataset over the given index. Entity ids must be unique
    /// and periods strictly increasing.
    pub fn new(entities: Vec<String>, periods: Vec<i32>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entities {
            if !seen.insert(e.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate entity id {e:?}")));
            }
        }
        if periods.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "periods must be strictly increasing".into(),
            ));
        }
        Ok(PanelDataset {
            entities,
            periods,
            columns: Vec::new(),
        })
    }

    /// Adds (or replaces) a column. `values` is entity-major.
    pub fn with_column(mut self, name: &str, values: Vec<Option<f64>>) -> Result<Self> {
        self.set_column(name, values)?;
        Ok(self)
    }

    fn set_column(&mut self, name: &str, values: Vec<Option<f64>>) -> Result<()> {
        if values.len() != self.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "column {name:?} has {} values, expected {}",
                values.len(),
                self.n_cells()
            )));
        }
        if let Some(v) = values.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "column {name:?} contains non-finite value {v}"
            )));
        }
        match self.columns.iter_mut().find(|c| c.name == name) {
            Some(c) => c.values = values,
            None => self.columns.push(Column {
                name: name.to_string(),
                values,
            }),
        }
        Ok(())
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn periods(&self) -> &[i32] {
        &self.periods
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    fn n_cells(&self) -> usize {
        self.entities.len() * self.periods.len()
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    /// Entity-major values of a column.
    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn get(&self, name: &str, entity: usize, period: usize) -> Result<Option<f64>> {
        Ok(self.column(name)?[entity * self.n_periods() + period])
    }

    /// Values of one entity's series in period order.
    pub fn series(&self, name: &str, entity: usize) -> Result<&[Option<f64>]> {
        let t = self.n_periods();
        Ok(&self.column(name)?[entity * t..(entity + 1) * t])
    }

    /// Number of (entity, period) cells with at least one non-missing value.
    pub fn n_observations(&self) -> usize {
        (0..self.n_cells())
            .filter(|&i| self.columns.iter().any(|c| c.values[i].is_some()))
            .count()
    }

    /// True iff none of the listed columns has a missing entry.
    pub fn is_balanced_in(&self, columns: &[&str]) -> Result<bool> {
        for name in columns {
            if self.column(name)?.iter().any(Option::is_none) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff no column has a missing entry.
    pub fn is_balanced(&self) -> bool {
        self.columns
            .iter()
            .all(|c| c.values.iter().all(Option::is_some))
    }

    /// Restricts the dataset to the listed entities, in the given order.
    pub fn select_entities(&self, ids: &[&str]) -> Result<PanelDataset> {
        let idx: Vec<usize> = ids
            .iter()
            .map(|id| {
                self.entities
                    .iter()
                    .position(|e| e == id)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown entity {id:?}")))
            })
            .collect::<Result<_>>()?;
        let t = self.n_periods();
        let mut out = PanelDataset::new(
            idx.iter().map(|&i| self.entities[i].clone()).collect(),
            self.periods.clone(),
        )?;
        for c in &self.columns {
            let values = idx
                .iter()
                .flat_map(|&i| c.values[i * t..(i + 1) * t].iter().copied())
                .collect();
            out.set_column(&c.name, values)?;
        }
        Ok(out)
    }

    /// Writes the dataset as wide CSV, one row per (entity, period) in
    /// entity-major order. Missing cells are written empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["bank_id".to_string(), "year".to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        w.write_record(&header)?;
        let t = self.n_periods();
        for (e, entity) in self.entities.iter().enumerate() {
            for (p, year) in self.periods.iter().enumerate() {
                let mut record = vec![entity.clone(), year.to_string()];
                record.extend(self.columns.iter().map(|c| match c.values[e * t + p] {
                    Some(v) => format!("{v}"),
                    None => String::new(),
                }));
                w.write_record(&record)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Loads a wide-format panel CSV (`bank_id,year,<vars>...`).
///
/// Every variable column in the file is stored raw; declared transforms are not
/// applied. Each declared variable must be present.
pub fn load_panel(path: impl AsRef<Path>, schema: &[VariableSpec]) -> Result<PanelDataset> {
    let file = std::fs::File::open(path)?;
    read_panel(file, schema)
}

pub fn read_panel<R: Read>(reader: R, schema: &[VariableSpec]) -> Result<PanelDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("bank_id") {
        return Err(Error::MissingColumn("bank_id".into()));
    }
    if headers.get(1) != Some("year") {
        return Err(Error::MissingColumn("year".into()));
    }
    let var_names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    for spec in schema {
        if !var_names.contains(&spec.name) {
            return Err(Error::MissingColumn(spec.name.clone()));
        }
    }

    let mut entity_order: Vec<String> = Vec::new();
    let mut entity_index: HashMap<String, usize> = HashMap::new();
    let mut rows: HashMap<(usize, i32), Vec<Option<f64>>> = HashMap::new();

    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // header is line 1
        let row = i + 2;
        let entity = record.get(0).unwrap_or_default().to_string();
        let year_cell = record.get(1).unwrap_or_default();
        let year: i32 = year_cell.parse().map_err(|_| Error::ParseCell {
            row,
            column: "year".into(),
            value: year_cell.to_string(),
        })?;
        let mut values = Vec::with_capacity(var_names.len());
        for (j, name) in var_names.iter().enumerate() {
            let cell = record.get(j + 2).unwrap_or_default();
            if cell.is_empty() {
                values.push(None);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(Some(v)),
                _ => {
                    return Err(Error::ParseCell {
                        row,
                        column: name.clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        let e = *entity_index.entry(entity.clone()).or_insert_with(|| {
            entity_order.push(entity.clone());
            entity_order.len() - 1
        });
        if rows.insert((e, year), values).is_some() {
            return Err(Error::DuplicateKey {
                entity,
                period: year,
            });
        }
    }

    let mut periods: Vec<i32> = rows.keys().map(|&(_, y)| y).collect();
    periods.sort_unstable();
    periods.dedup();
    let t = periods.len();
    let n = entity_order.len();
    let mut columns = vec![vec![None; n * t]; var_names.len()];
    for ((e, year), values) in rows {
        let p = periods
            .binary_search(&year)
            .expect("period collected above");
        for (col, v) in columns.iter_mut().zip(values) {
            col[e * t + p] = v;
        }
    }

    let mut ds = PanelDataset::new(entity_order, periods)?;
    for (name, values) in var_names.iter().zip(columns) {
        ds.set_column(name, values)?;
    }
    Ok(ds)
}

fn checked_ln(ds: &PanelDataset, column: &str, cell: usize, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v.ln())
    } else {
        let t = ds.n_periods();
        Err(Error::NonPositiveLog {
            column: column.to_string(),
            entity: ds.entities[cell / t].clone(),
            period: ds.periods[cell % t],
            value: v,
        })
    }
}

/// Applies a declared transform, adding `<name>__log` for log transforms.
/// The source column is retained.
pub fn apply_transform(ds: &PanelDataset, spec: &VariableSpec) -> Result<PanelDataset> {
    let source = ds.column(&spec.name)?;
    match spec.transform {
        Transform::None => Ok(ds.clone()),
        Transform::Log => {
            let values = source
                .iter()
                .enumerate()
                .map(|(i, v)| v.map(|v| checked_ln(ds, &spec.name, i, v)).transpose())
                .collect::<Result<Vec<_>>>()?;
            ds.clone().with_column(&spec.output_name(), values)
        }
    }
}

/// Applies every transform in a schema, in order.
pub fn apply_schema(ds: &PanelDataset, schema: &[VariableSpec]) -> Result<PanelDataset> {
    schema
        .iter()
        .try_fold(ds.clone(), |acc, spec| apply_transform(&acc, spec))
}

pub fn derive_series(ds: &PanelDataset, recipe: &DerivedSeriesRecipe) -> Result<PanelDataset> {
    let values: Vec<Option<f64>> = match &recipe.kind {
        DerivedKind::Spread { rate, interbank } => {
            elementwise(ds.column(rate)?, ds.column(interbank)?, |a, b| a - b)
        }
        DerivedKind::RealRate {
            interbank,
            inflation,
        } => elementwise(ds.column(interbank)?, ds.column(inflation)?, |a, b| a - b),
        DerivedKind::RatioLog {
            numerator,
            denominator,
        } => {
            let num = ds.column(numerator)?;
            let den = ds.column(denominator)?;
            num.iter()
                .zip(den)
                .enumerate()
                .map(|(i, pair)| match pair {
                    (Some(a), Some(b)) => {
                        let la = checked_ln(ds, numerator, i, *a)?;
                        let lb = checked_ln(ds, denominator, i, *b)?;
                        Ok(Some(la - lb))
                    }
                    _ => Ok(None),
                })
                .collect::<Result<_>>()?
        }
    };
    ds.clone().with_column(&recipe.output, values)
}

fn elementwise(
    a: &[Option<f64>],
    b: &[Option<f64>],
    f: impl Fn(f64, f64) -> f64,
) -> Vec<Option<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| Some(f((*x)?, (*y)?)))
        .collect()
}

/// Replaces each listed column by its deviation from the entity mean taken over
/// that entity's non-missing periods.
pub fn within_demean(ds: &PanelDataset, columns: &[&str]) -> Result<PanelDataset> {
    let t = ds.n_periods();
    let mut out = ds.clone();
    for name in columns {
        let mut values = ds.column(name)?.to_vec();
        for (e, chunk) in values
            .chunks_mut(t.max(1))
            .enumerate()
            .take(ds.n_entities())
        {
            let present: Vec<f64> = chunk.iter().flatten().copied().collect();
            if present.len() < 2 {
                return Err(Error::InsufficientPeriods {
                    entity: ds.entities[e].clone(),
                    column: name.to_string(),
                    available: present.len(),
                });
            }
            let mean = present.iter().sum::<f64>() / present.len() as f64;
            for v in chunk.iter_mut().flatten() {
                *v -= mean;
            }
        }
        out.set_column(name, values)?;
    }
    Ok(out)
}

/// Name of the column produced by [`lag`].
pub fn lag_name(column: &str, k: usize) -> String {
    format!("{column}__lag{k}")
}

/// Adds `<column>__lag<k>`: the series shifted `k` positions along the period
/// grid within each entity. The first `k` periods of every entity are missing.
pub fn lag(ds: &PanelDataset, column: &str, k: usize) -> Result<PanelDataset> {
    let t = ds.n_periods();
    if k == 0 || k >= t {
        return Err(Error::InvalidArgument(format!(
            "lag order {k} must be in 1..{t}"
        )));
    }
    let source = ds.column(column)?;
    let mut values = vec![None; source.len()];
    for e in 0..ds.n_entities() {
        for p in k..t {
            values[e * t + p] = source[e * t + p - k];
        }
    }
    ds.clone().with_column(&lag_name(column, k), values)
}
