//! Mean/mode baseline, masked-cell RMSE and the Monte Carlo benchmark harness.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chained::{gcmi_impute, initial_fill, GcmiConfig};
use crate::data::{ColumnType, DataMatrix};
use crate::error::{Error, Result};
use crate::io::{read_csv, write_csv, write_mask_csv, ColumnHint, SchemaHints};
use crate::lab::{ampute_matrix, gen_synthetic, AmputationSpec, Mechanism, SyntheticSpec};
use crate::rng::derive_seed;
use crate::transform::Affine;

/// Mean for continuous columns, mode for the rest.
pub fn mean_impute(dm: &DataMatrix) -> Result<DataMatrix> {
    initial_fill(dm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RmseScale {
    /// Continuous columns min-max scaled with ranges fit on the truth.
    #[default]
    Normalized,
    Raw,
}

/// Root mean squared error over the cells flagged in `mask`.
///
/// Binary and categorical cells contribute 0 when the level matches and 1
/// otherwise.
pub fn rmse(truth: &DataMatrix, imputed: &DataMatrix, mask: &[bool], scale: RmseScale) -> Result<f64> {
    truth.check_congruent(imputed)?;
    if mask.len() != truth.values().len() {
        return Err(Error::Shape(format!(
            "mask has {} cells, matrices have {}",
            mask.len(),
            truth.values().len()
        )));
    }
    let p = truth.n_cols();
    let affine: Vec<Affine> = (0..p)
        .map(|j| match (scale, &truth.columns()[j].ty) {
            (RmseScale::Normalized, ColumnType::Continuous) => {
                Affine::fit_min_max(truth.observed_values(j)).unwrap_or(Affine::IDENTITY)
            }
            _ => Affine::IDENTITY,
        })
        .collect();

    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let j = i % p;
        let (t, x) = (truth.values()[i], imputed.values()[i]);
        if t.is_nan() || x.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "masked cell (row {}, column `{}`) is missing in the {}",
                i / p,
                truth.columns()[j].name,
                if t.is_nan() { "truth" } else { "imputation" }
            )));
        }
        sum += if truth.columns()[j].ty.is_continuous() {
            (affine[j].apply(x) - affine[j].apply(t)).powi(2)
        } else if x == t {
            0.0
        } else {
            1.0
        };
        count += 1;
    }
    if count == 0 {
        return Err(Error::UndefinedMetric("rmse over an empty mask".into()));
    }
    Ok((sum / count as f64).sqrt())
}

// ---------------------------------------------------------------------------
// Benchmark specification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSource {
    /// A fresh synthetic dataset per repeat (covariates only).
    Synthetic(SyntheticSpec),
    /// One complete CSV reused by every repeat.
    Csv {
        path: PathBuf,
        #[serde(default)]
        schema: SchemaHints,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticSpec::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// Scored on the pooled completion of the `m_imputations` chains.
    Gcmi,
    Mean,
    /// Imputations produced elsewhere, read from
    /// `results_dir/g{grid:03}_r{repeat:03}.csv`.
    External { name: String, results_dir: PathBuf },
}

impl Method {
    pub fn name(&self) -> &str {
        match self {
            Method::Gcmi => "gcmi",
            Method::Mean => "mean",
            Method::External { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub source: DataSource,
    /// Grid of amputation settings; their own seeds are replaced per repeat.
    pub mechanisms: Vec<AmputationSpec>,
    pub methods: Vec<Method>,
    pub mc_repeats: usize,
    /// Settings for the `gcmi` method; its seed is replaced per repeat.
    pub gcmi: GcmiConfig,
    pub rmse_scale: RmseScale,
    pub seed: u64,
    /// When set, each repeat's truth, amputed data and mask are written
    /// here as `g{grid:03}_r{repeat:03}_{truth,amputed,mask}.csv`.
    pub export_dir: Option<PathBuf>,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            source: DataSource::default(),
            mechanisms: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
                .iter()
                .map(|&p| AmputationSpec {
                    mechanism: Mechanism::Mcar { p },
                    ..AmputationSpec::default()
                })
                .collect(),
            methods: vec![Method::Gcmi, Method::Mean],
            mc_repeats: 100,
            gcmi: GcmiConfig::default(),
            rmse_scale: RmseScale::Normalized,
            seed: 0,
            export_dir: None,
        }
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.mc_repeats == 0 {
            return Err(Error::InvalidArgument("mc_repeats must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("benchmark needs at least one method".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::InvalidArgument("benchmark needs at least one mechanism".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(m) = self.methods.iter().find(|m| !seen.insert(m.name())) {
            return Err(Error::InvalidArgument(format!("method `{}` listed twice", m.name())));
        }
        if self.methods.contains(&Method::Gcmi) {
            self.gcmi.validate()?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Results

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScore {
    pub method: String,
    pub grid: usize,
    pub repeat: usize,
    pub missing_rate: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: String,
    pub mechanism: String,
    pub grid: usize,
    pub nominal_rate: Option<f64>,
    /// Fraction of cells deleted, averaged over repeats.
    pub realized_rate: f64,
    pub mean_rmse: f64,
    /// Sample standard deviation across repeats; absent for one repeat.
    pub sd_rmse: Option<f64>,
    /// `sd_rmse / sqrt(repeats)`.
    pub se_rmse: Option<f64>,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
    pub raw: Vec<RawScore>,
}

/// Mean, sample standard deviation and standard error.
pub fn summarize(values: &[f64]) -> (f64, Option<f64>, Option<f64>) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, Some(sd), Some(sd / (n as f64).sqrt()))
}

impl BenchmarkTable {
    pub fn row(&self, method: &str, grid: usize) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.method == method && r.grid == grid)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record([
            "method",
            "mechanism",
            "grid",
            "nominal_rate",
            "realized_rate",
            "mean_rmse",
            "sd_rmse",
            "se_rmse",
            "repeats",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                r.mechanism.clone(),
                r.grid.to_string(),
                opt(r.nominal_rate),
                r.realized_rate.to_string(),
                r.mean_rmse.to_string(),
                opt(r.sd_rmse),
                opt(r.se_rmse),
                r.repeats.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.rows)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Per-repeat scores, one line per (method, grid point, repeat).
    pub fn write_raw_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        for s in &self.raw {
            w.serialize(s)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Writes `benchmark_table.{csv,json}` and `benchmark_raw.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.write_csv(&dir.join("benchmark_table.csv"))?;
        self.write_json(&dir.join("benchmark_table.json"))?;
        self.write_raw_csv(&dir.join("benchmark_raw.csv"))
    }
}

// ---------------------------------------------------------------------------
// Harness

pub fn external_result_path(results_dir: &Path, grid: usize, repeat: usize) -> PathBuf {
    results_dir.join(format!("g{grid:03}_r{repeat:03}.csv"))
}

/// Reads an external completion and maps it onto the truth's schema.
fn ingest_external(truth: &DataMatrix, mask: &[bool], path: &Path, repeat: usize) -> Result<DataMatrix> {
    let fail = |detail: String| Error::Ingestion {
        repeat,
        path: path.to_owned(),
        detail,
    };
    let hints = SchemaHints {
        columns: truth
            .columns()
            .iter()
            .map(|c| {
                let hint = if c.ty.is_continuous() {
                    ColumnHint::Continuous
                } else {
                    ColumnHint::Categorical
                };
                (c.name.clone(), hint)
            })
            .collect(),
        ..SchemaHints::default()
    };
    let ext = read_csv(path, &hints).map_err(|e| fail(e.to_string()))?;
    if ext.n_rows() != truth.n_rows() || ext.column_names() != truth.column_names() {
        return Err(fail(format!(
            "expected {} rows with columns {:?}, found {} rows with {:?}",
            truth.n_rows(),
            truth.column_names(),
            ext.n_rows(),
            ext.column_names()
        )));
    }
    let p = truth.n_cols();
    let mut values = vec![f64::NAN; truth.values().len()];
    for (j, col) in truth.columns().iter().enumerate() {
        let remap: Option<HashMap<usize, usize>> = match (col.ty.levels(), ext.columns()[j].ty.levels()) {
            (Some(want), Some(have)) => Some(
                have.iter()
                    .enumerate()
                    .map(|(k, label)| {
                        want.iter()
                            .position(|w| w == label)
                            .map(|t| (k, t))
                            .ok_or_else(|| fail(format!("column `{}` has unknown level `{label}`", col.name)))
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => None,
        };
        for r in 0..truth.n_rows() {
            let i = r * p + j;
            let v = ext.values()[i];
            if v.is_nan() {
                if mask[i] {
                    return Err(fail(format!("row {} column `{}` was left missing", r + 1, col.name)));
                }
                continue;
            }
            values[i] = match &remap {
                Some(map) => map[&(v as usize)] as f64,
                None => v,
            };
        }
    }
    DataMatrix::new(truth.columns().to_vec(), truth.n_rows(), values)
}

fn load_source(source: &DataSource, seed: u64, repeat: usize) -> Result<DataMatrix> {
    match source {
        DataSource::Synthetic(spec) => {
            let spec = SyntheticSpec {
                seed: derive_seed(seed, &[0, repeat as u64]),
                ..spec.clone()
            };
            Ok(gen_synthetic(&spec)?.covariates())
        }
        DataSource::Csv { path, schema } => {
            let dm = read_csv(path, schema)?;
            if !dm.is_complete() {
                return Err(Error::InvalidArgument(format!(
                    "benchmark source {} has {} missing cells; ground truth must be complete",
                    path.display(),
                    dm.total_missing()
                )));
            }
            Ok(dm)
        }
    }
}

fn run_repeat(spec: &BenchmarkSpec, repeat: usize, shared: Option<&DataMatrix>) -> Result<Vec<RawScore>> {
    let owned;
    let truth = match shared {
        Some(dm) => dm,
        None => {
            owned = load_source(&spec.source, spec.seed, repeat)?;
            &owned
        }
    };
    let mut scores = Vec::new();
    for (g, amp) in spec.mechanisms.iter().enumerate() {
        let amp = AmputationSpec {
            seed: derive_seed(spec.seed, &[1, g as u64, repeat as u64]),
            ..amp.clone()
        };
        let (amputed, mask) = ampute_matrix(truth, &amp)?;
        let missing_rate = mask.iter().filter(|&&m| m).count() as f64 / mask.len() as f64;
        if let Some(dir) = &spec.export_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let stem = format!("g{g:03}_r{repeat:03}");
            write_csv(truth, &dir.join(format!("{stem}_truth.csv")))?;
            write_csv(&amputed, &dir.join(format!("{stem}_amputed.csv")))?;
            write_mask_csv(&mask, &truth.column_names(), &dir.join(format!("{stem}_mask.csv")))?;
        }
        if !mask.iter().any(|&m| m) {
            log::warn!("grid {g}, repeat {repeat}: amputation deleted nothing; skipped");
            continue;
        }
        for method in &spec.methods {
            let completed = match method {
                Method::Mean => mean_impute(&amputed)?,
                Method::Gcmi => {
                    let cfg = GcmiConfig {
                        seed: derive_seed(spec.seed, &[2, g as u64, repeat as u64]),
                        ..spec.gcmi.clone()
                    };
                    gcmi_impute(&amputed, &cfg)?.pooled_completion()
                }
                Method::External { results_dir, .. } => {
                    ingest_external(truth, &mask, &external_result_path(results_dir, g, repeat), repeat)?
                }
            };
            scores.push(RawScore {
                method: method.name().to_owned(),
                grid: g,
                repeat,
                missing_rate,
                rmse: rmse(truth, &completed, &mask, spec.rmse_scale)?,
            });
        }
    }
    Ok(scores)
}

/// Runs every method on every (grid point, repeat) pair and aggregates
/// masked-cell RMSE.
///
/// Each repeat draws one dataset shared by all grid points; each grid point
/// draws one mask shared by all methods. Repeats run in parallel.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkTable> {
    spec.validate()?;
    let start = Instant::now();
    let shared = match &spec.source {
        DataSource::Csv { .. } => Some(load_source(&spec.source, spec.seed, 0)?),
        DataSource::Synthetic(_) => None,
    };
    let per_repeat: Vec<Vec<RawScore>> = (0..spec.mc_repeats)
        .into_par_iter()
        .map(|r| run_repeat(spec, r, shared.as_ref()))
        .collect::<Result<_>>()?;
    let mut raw: Vec<RawScore> = per_repeat.into_iter().flatten().collect();
    raw.sort_by(|a, b| (a.grid, &a.method, a.repeat).cmp(&(b.grid, &b.method, b.repeat)));

    let mut rows = Vec::new();
    for (g, amp) in spec.mechanisms.iter().enumerate() {
        for method in &spec.methods {
            let cell: Vec<&RawScore> = raw.iter().filter(|s| s.grid == g && s.method == method.name()).collect();
            if cell.is_empty() {
                continue;
            }
            let rmses: Vec<f64> = cell.iter().map(|s| s.rmse).collect();
            let (mean_rmse, sd_rmse, se_rmse) = summarize(&rmses);
            rows.push(BenchmarkRow {
                method: method.name().to_owned(),
                mechanism: amp.mechanism.label(),
                grid: g,
                nominal_rate: amp.mechanism.nominal_rate(),
                realized_rate: cell.iter().map(|s| s.missing_rate).sum::<f64>() / cell.len() as f64,
                mean_rmse,
                sd_rmse,
                se_rmse,
                repeats: cell.len(),
            });
        }
    }
    info!(
        "benchmark: {} grid points × {} repeats × {} methods in {:.1}s",
        spec.mechanisms.len(),
        spec.mc_repeats,
        spec.methods.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(BenchmarkTable { rows, raw })
}
