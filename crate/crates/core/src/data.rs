//! Column-typed tables with a missingness mask.
//!
//! Values are stored row-major as `f64`. Continuous columns hold the value
//! itself; binary and categorical columns hold the level index (`0.0`,
//! `1.0`, ...). Missing cells hold `NaN` and are flagged `true` in the mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnType {
    Continuous,
    /// Exactly two levels; level 0 is encoded as `0.0` and level 1 as `1.0`.
    Binary { levels: [String; 2] },
    Categorical { levels: Vec<String> },
}

impl ColumnType {
    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnType::Continuous => ColumnKind::Continuous,
            ColumnType::Binary { .. } => ColumnKind::Binary,
            ColumnType::Categorical { levels } => ColumnKind::Categorical(levels.len()),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, ColumnType::Continuous)
    }

    pub fn levels(&self) -> Option<&[String]> {
        match self {
            ColumnType::Continuous => None,
            ColumnType::Binary { levels } => Some(levels),
            ColumnType::Categorical { levels } => Some(levels),
        }
    }
}

/// What a per-column generator has to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Binary,
    /// Number of levels.
    Categorical(usize),
}

impl ColumnKind {
    /// Width of the column once encoded for a network (one-hot for categoricals).
    pub fn encoded_width(self) -> usize {
        match self {
            ColumnKind::Continuous | ColumnKind::Binary => 1,
            ColumnKind::Categorical(k) => k,
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(flatten)]
    pub ty: ColumnType,
}

impl ColumnSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            ty: ColumnType::Continuous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Observed(f64),
    Missing,
}

#[derive(Debug, Clone)]
pub struct DataMatrix {
    columns: Vec<ColumnSchema>,
    n_rows: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
}

/// Equality is bit-exact on observed cells; missing cells compare equal.
impl PartialEq for DataMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.columns == other.columns
            && self.mask == other.mask
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.mask)
                .all(|((a, b), &m)| m || a.to_bits() == b.to_bits())
    }
}

impl DataMatrix {
    /// Builds a matrix from row-major values; `NaN` marks a missing cell.
    pub fn new(columns: Vec<ColumnSchema>, n_rows: usize, values: Vec<f64>) -> Result<Self> {
        let p = columns.len();
        if p == 0 {
            return Err(Error::InvalidArgument("a data matrix needs at least one column".into()));
        }
        if values.len() != n_rows * p {
            return Err(Error::Shape(format!(
                "{} values do not fill {n_rows} rows × {p} columns",
                values.len()
            )));
        }
        let mask: Vec<bool> = values.iter().map(|v| v.is_nan()).collect();
        let dm = DataMatrix {
            columns,
            n_rows,
            values,
            mask,
        };
        dm.validate_levels()?;
        Ok(dm)
    }

    /// All-continuous matrix with columns named `prefix1..prefixP`.
    pub fn from_continuous(prefix: &str, n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        let columns = (1..=n_cols)
            .map(|j| ColumnSchema::continuous(format!("{prefix}{j}")))
            .collect();
        DataMatrix::new(columns, n_rows, values)
    }

    fn validate_levels(&self) -> Result<()> {
        for (j, col) in self.columns.iter().enumerate() {
            match &col.ty {
                ColumnType::Continuous => {
                    if let Some(v) = self.column_values(j).find(|v| v.is_infinite()) {
                        return Err(Error::InvalidArgument(format!(
                            "column `{}` contains non-finite value {v}",
                            col.name
                        )));
                    }
                }
                ty => {
                    let k = ty.levels().map_or(0, <[String]>::len);
                    if let Some(v) = self
                        .column_values(j)
                        .filter(|v| !v.is_nan())
                        .find(|&v| v < 0.0 || v.fract() != 0.0 || v as usize >= k)
                    {
                        return Err(Error::InvalidArgument(format!(
                            "column `{}` has code {v} outside its {k} declared levels",
                            col.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row-major mask, `true` where the cell is missing.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        row * self.columns.len() + col
    }

    pub fn get(&self, row: usize, col: usize) -> Cell {
        let i = self.idx(row, col);
        if self.mask[i] {
            Cell::Missing
        } else {
            Cell::Observed(self.values[i])
        }
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[self.idx(row, col)]
    }

    #[inline]
    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.mask[self.idx(row, col)]
    }

    /// Writes a value and marks the cell observed.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let i = self.idx(row, col);
        self.values[i] = value;
        self.mask[i] = value.is_nan();
    }

    pub fn set_missing(&mut self, row: usize, col: usize) {
        let i = self.idx(row, col);
        self.values[i] = f64::NAN;
        self.mask[i] = true;
    }

    pub fn column_values(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(col).step_by(self.columns.len()).copied()
    }

    pub fn observed_values(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        self.column_values(col).filter(|v| !v.is_nan())
    }

    pub fn missing_rows(&self, col: usize) -> Vec<usize> {
        (0..self.n_rows).filter(|&r| self.is_missing(r, col)).collect()
    }

    pub fn observed_rows(&self, col: usize) -> Vec<usize> {
        (0..self.n_rows).filter(|&r| !self.is_missing(r, col)).collect()
    }

    pub fn missing_count(&self, col: usize) -> usize {
        (0..self.n_rows).filter(|&r| self.is_missing(r, col)).count()
    }

    pub fn missing_fraction(&self, col: usize) -> f64 {
        if self.n_rows == 0 {
            0.0
        } else {
            self.missing_count(col) as f64 / self.n_rows as f64
        }
    }

    pub fn total_missing(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_complete(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Copy with every cell flagged in `mask` deleted.
    pub fn with_mask_applied(&self, mask: &[bool]) -> Result<DataMatrix> {
        if mask.len() != self.mask.len() {
            return Err(Error::Shape(format!(
                "mask has {} cells, matrix has {}",
                mask.len(),
                self.mask.len()
            )));
        }
        let mut out = self.clone();
        for (i, &m) in mask.iter().enumerate() {
            if m {
                out.values[i] = f64::NAN;
                out.mask[i] = true;
            }
        }
        Ok(out)
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<DataMatrix> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols()) {
            return Err(Error::InvalidArgument(format!("column index {bad} out of range")));
        }
        let columns = cols.iter().map(|&c| self.columns[c].clone()).collect();
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for r in 0..self.n_rows {
            values.extend(cols.iter().map(|&c| self.value(r, c)));
        }
        DataMatrix::new(columns, self.n_rows, values)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Checks that `other` has the same shape and column schema.
    pub fn check_congruent(&self, other: &DataMatrix) -> Result<()> {
        if self.n_rows != other.n_rows || self.columns != other.columns {
            return Err(Error::Shape(format!(
                "matrices differ: {}×{} vs {}×{} or schemas disagree",
                self.n_rows,
                self.n_cols(),
                other.n_rows,
                other.n_cols()
            )));
        }
        Ok(())
    }

    /// Level label (or formatted number) for a cell; `None` when missing.
    pub fn display_cell(&self, row: usize, col: usize) -> Option<String> {
        match self.get(row, col) {
            Cell::Missing => None,
            Cell::Observed(v) => Some(match self.columns[col].ty.levels() {
                Some(levels) => levels[v as usize].clone(),
                None => format!("{v}"),
            }),
        }
    }
}
