//! Chained-equation sweeps of per-column adversarial imputers, multiple
//! imputation and Rubin's-rules pooling.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{debug, info, warn};
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, ColumnType, DataMatrix};
use crate::error::{Error, Result};
use crate::gcin::{impute_column, train_gcin, TrainConfig};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ColumnParallelism {
    /// Columns are refit one after another and each imputation is written
    /// back before the next column trains.
    #[default]
    Sequential,
    /// Every column trains against the matrix as it stood at the start of
    /// the sweep; results are written back together at the end.
    SnapshotParallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialFill {
    #[default]
    MeanMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcmiConfig {
    pub max_chain_iters: usize,
    pub m_imputations: usize,
    pub column_parallelism: ColumnParallelism,
    pub initial_fill: InitialFill,
    /// Columns with fewer observed rows keep their initial fill.
    pub min_observed_rows: usize,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for GcmiConfig {
    fn default() -> Self {
        GcmiConfig {
            max_chain_iters: 20,
            m_imputations: 5,
            column_parallelism: ColumnParallelism::Sequential,
            initial_fill: InitialFill::MeanMode,
            min_observed_rows: 10,
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

impl GcmiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_chain_iters == 0 || self.m_imputations == 0 {
            return Err(Error::InvalidArgument(
                "max_chain_iters and m_imputations must be at least 1".into(),
            ));
        }
        self.train.validate()
    }
}

// ---------------------------------------------------------------------------
// Initial fill and ordering

/// Fills missing cells with the observed mean (continuous) or mode
/// (binary/categorical; ties go to the lowest level). Observed cells are
/// left untouched.
pub fn initial_fill(dm: &DataMatrix) -> Result<DataMatrix> {
    let mut out = dm.clone();
    for (j, col) in dm.columns().iter().enumerate() {
        let missing = dm.missing_rows(j);
        if missing.is_empty() {
            continue;
        }
        let fill = column_fill_value(dm, j).ok_or_else(|| Error::UnimputableColumn(col.name.clone()))?;
        for r in missing {
            out.set(r, j, fill);
        }
    }
    Ok(out)
}

fn column_fill_value(dm: &DataMatrix, j: usize) -> Option<f64> {
    match &dm.columns()[j].ty {
        ColumnType::Continuous => {
            let (sum, count) = dm
                .observed_values(j)
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            (count > 0).then(|| sum / count as f64)
        }
        ty => {
            let k = ty.levels().map_or(0, <[String]>::len);
            let mut counts = vec![0usize; k];
            for v in dm.observed_values(j) {
                counts[v as usize] += 1;
            }
            let (best, n) = counts
                .iter()
                .enumerate()
                .fold((0, 0), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
            (n > 0).then_some(best as f64)
        }
    }
}

/// Column indices sorted by ascending missing fraction; ties keep their
/// original order.
pub fn order_columns(dm: &DataMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dm.n_cols()).collect();
    let counts: Vec<usize> = order.iter().map(|&j| dm.missing_count(j)).collect();
    order.sort_by_key(|&j| counts[j]);
    order
}

// ---------------------------------------------------------------------------
// Convergence

/// `(γ_num, γ_cat)` between two successive completions, summed over the
/// originally missing cells only.
///
/// `γ_num = Σ (new − old)² / Σ new²` over continuous cells (`0/0 = 0`);
/// `γ_cat` is the fraction of binary/categorical cells whose level changed.
/// A kind with no missing cells reports 0.
pub fn convergence_gamma(new: &DataMatrix, old: &DataMatrix, mask: &[bool]) -> Result<(f64, f64)> {
    new.check_congruent(old)?;
    if mask.len() != new.values().len() {
        return Err(Error::Shape(format!(
            "mask has {} cells, matrices have {}",
            mask.len(),
            new.values().len()
        )));
    }
    let p = new.n_cols();
    let numeric: Vec<bool> = new.columns().iter().map(|c| c.ty.is_continuous()).collect();
    let (mut num, mut den, mut changed, mut n_cat) = (0.0, 0.0, 0usize, 0usize);
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let (a, b) = (new.values()[i], old.values()[i]);
        if numeric[i % p] {
            num += (a - b).powi(2);
            den += a * a;
        } else {
            n_cat += 1;
            if a != b {
                changed += 1;
            }
        }
    }
    let gamma_num = if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    };
    let gamma_cat = if n_cat == 0 {
        0.0
    } else {
        changed as f64 / n_cat as f64
    };
    Ok((gamma_num, gamma_cat))
}

// ---------------------------------------------------------------------------
// Sweeps

/// Encodes every column except `exclude` for use as network inputs:
/// continuous values as-is, binary as 0/1, categorical one-hot.
pub fn encode_predictors(dm: &DataMatrix, exclude: usize) -> Array2<f64> {
    let widths: Vec<usize> = dm
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| if j == exclude { 0 } else { c.ty.kind().encoded_width() })
        .collect();
    let total: usize = widths.iter().sum();
    let mut out = Array2::zeros((dm.n_rows(), total));
    for r in 0..dm.n_rows() {
        let mut offset = 0;
        for (j, col) in dm.columns().iter().enumerate() {
            if j == exclude {
                continue;
            }
            let v = dm.value(r, j);
            match col.ty.kind() {
                ColumnKind::Continuous | ColumnKind::Binary => out[[r, offset]] = v,
                ColumnKind::Categorical(_) => out[[r, offset + v as usize]] = 1.0,
            }
            offset += widths[j];
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub matrix: DataMatrix,
    /// Columns that had a pair trained this sweep, in training order.
    pub trained_columns: Vec<usize>,
}

fn fit_and_impute(
    current: &DataMatrix,
    mask: &[bool],
    j: usize,
    train: &TrainConfig,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let p = current.n_cols();
    let (obs_rows, mis_rows): (Vec<usize>, Vec<usize>) =
        (0..current.n_rows()).partition(|&r| !mask[r * p + j]);
    let predictors = encode_predictors(current, j);
    let x_obs = predictors.select(ndarray::Axis(0), &obs_rows);
    let y_obs: Vec<f64> = obs_rows.iter().map(|&r| current.value(r, j)).collect();
    let cfg = TrainConfig {
        seed: derive_seed(seed, &[0]),
        ..train.clone()
    };
    let kind = current.columns()[j].ty.kind();
    let (mut pair, trace) = train_gcin(x_obs.view(), &y_obs, kind, &cfg)?;
    pair.column_index = j;
    debug!(
        "column `{}`: {} cycles, stop {:?}",
        current.columns()[j].name,
        trace.cycles.len(),
        trace.stop
    );
    let x_mis = predictors.select(ndarray::Axis(0), &mis_rows);
    let imputed = impute_column(&pair, x_mis.view(), derive_seed(seed, &[1]))?;
    Ok(mis_rows.into_iter().zip(imputed).collect())
}

/// One pass over the columns in `order`, refitting and re-imputing every
/// column that has missing cells under `mask`.
///
/// `current` must already be complete. Columns with fewer than
/// `cfg.min_observed_rows` observed rows are skipped and keep their values.
pub fn sweep(current: &DataMatrix, mask: &[bool], order: &[usize], cfg: &GcmiConfig, seed: u64) -> Result<SweepOutcome> {
    if !current.is_complete() {
        return Err(Error::InvalidArgument("sweep expects a completed matrix".into()));
    }
    if mask.len() != current.values().len() {
        return Err(Error::Shape("mask does not match matrix".into()));
    }
    let p = current.n_cols();
    let n = current.n_rows();
    let scheduled: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&j| {
            let missing = (0..n).filter(|&r| mask[r * p + j]).count();
            if missing == 0 {
                return false;
            }
            if n - missing < cfg.min_observed_rows {
                warn!(
                    "column `{}` has only {} observed rows; keeping its initial fill",
                    current.columns()[j].name,
                    n - missing
                );
                return false;
            }
            true
        })
        .collect();

    let column_seed = |j: usize| derive_seed(seed, &[j as u64]);
    let name = |j: usize| current.columns()[j].name.clone();

    let matrix = match cfg.column_parallelism {
        ColumnParallelism::Sequential => {
            let mut m = current.clone();
            for &j in &scheduled {
                let updates =
                    fit_and_impute(&m, mask, j, &cfg.train, column_seed(j)).map_err(|e| e.in_column(&name(j)))?;
                for (r, v) in updates {
                    m.set(r, j, v);
                }
            }
            m
        }
        ColumnParallelism::SnapshotParallel => {
            let results: Vec<(usize, Vec<(usize, f64)>)> = scheduled
                .par_iter()
                .map(|&j| {
                    fit_and_impute(current, mask, j, &cfg.train, column_seed(j))
                        .map(|u| (j, u))
                        .map_err(|e| e.in_column(&name(j)))
                })
                .collect::<Result<_>>()?;
            let mut m = current.clone();
            for (j, updates) in results {
                for (r, v) in updates {
                    m.set(r, j, v);
                }
            }
            m
        }
    };
    Ok(SweepOutcome {
        matrix,
        trained_columns: scheduled,
    })
}

// ---------------------------------------------------------------------------
// Full algorithm

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStop {
    BothStabilized,
    MaxIters,
    NothingToImpute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGamma {
    pub gamma_num: f64,
    pub gamma_cat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub sweeps: Vec<SweepGamma>,
    pub stop_reason: ChainStop,
    /// Zero-based sweep whose completion was kept.
    pub retained_sweep: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ImputationResult {
    pub completed: Vec<DataMatrix>,
    /// Missingness mask of the input (row-major, `true` = imputed cell).
    pub input_mask: Vec<bool>,
    pub traces: Vec<ConvergenceTrace>,
    pub chain_seeds: Vec<u64>,
    pub config: GcmiConfig,
    pub wall_time_secs: f64,
}

/// Runs one imputation chain: initial fill, ordering, then sweeps until
/// neither γ improves or the iteration cap is hit. Returns the completion
/// from the sweep with the smallest `γ_num + γ_cat`.
pub fn impute_chain(dm: &DataMatrix, cfg: &GcmiConfig, chain_seed: u64) -> Result<(DataMatrix, ConvergenceTrace)> {
    let mut current = initial_fill(dm)?;
    let mask = dm.mask();
    if dm.is_complete() {
        return Ok((
            current,
            ConvergenceTrace {
                sweeps: Vec::new(),
                stop_reason: ChainStop::NothingToImpute,
                retained_sweep: None,
            },
        ));
    }
    let order = order_columns(dm);

    let mut sweeps: Vec<SweepGamma> = Vec::new();
    let mut best: Option<(f64, usize, DataMatrix)> = None;
    let mut stop = ChainStop::MaxIters;
    for it in 0..cfg.max_chain_iters {
        let outcome = sweep(&current, mask, &order, cfg, derive_seed(chain_seed, &[it as u64])).map_err(|e| {
            Error::SweepFailed {
                sweep: it,
                source: Box::new(e),
            }
        })?;
        let (gamma_num, gamma_cat) = convergence_gamma(&outcome.matrix, &current, mask)?;
        debug!("sweep {it}: γ_num = {gamma_num:.3e}, γ_cat = {gamma_cat:.3e}");
        let score = gamma_num + gamma_cat;
        if best.as_ref().map_or(true, |(b, _, _)| score < *b) {
            best = Some((score, it, outcome.matrix.clone()));
        }
        let improved = sweeps
            .last()
            .map_or(true, |prev| gamma_num < prev.gamma_num || gamma_cat < prev.gamma_cat);
        sweeps.push(SweepGamma { gamma_num, gamma_cat });
        current = outcome.matrix;
        if !improved {
            stop = ChainStop::BothStabilized;
            break;
        }
    }
    let (_, retained, matrix) = best.expect("at least one sweep ran");
    Ok((
        matrix,
        ConvergenceTrace {
            sweeps,
            stop_reason: stop,
            retained_sweep: Some(retained),
        },
    ))
}

/// Multiple imputation: `m_imputations` independent chains, each seeded
/// from `cfg.seed`.
pub fn gcmi_impute(dm: &DataMatrix, cfg: &GcmiConfig) -> Result<ImputationResult> {
    cfg.validate()?;
    if dm.n_cols() < 2 {
        return Err(Error::InvalidArgument("imputation needs at least 2 columns".into()));
    }
    if let Some(j) = (0..dm.n_cols()).find(|&j| dm.missing_count(j) == dm.n_rows()) {
        return Err(Error::UnimputableColumn(dm.columns()[j].name.clone()));
    }
    let start = Instant::now();
    let chain_seeds: Vec<u64> = (0..cfg.m_imputations)
        .map(|m| derive_seed(cfg.seed, &[m as u64]))
        .collect();
    let chains: Vec<(DataMatrix, ConvergenceTrace)> = chain_seeds
        .par_iter()
        .map(|&s| impute_chain(dm, cfg, s))
        .collect::<Result<_>>()?;
    let (completed, traces) = chains.into_iter().unzip();
    let wall_time_secs = start.elapsed().as_secs_f64();
    info!(
        "imputed {} missing cells × {} imputations in {wall_time_secs:.1}s",
        dm.total_missing(),
        cfg.m_imputations
    );
    Ok(ImputationResult {
        completed,
        input_mask: dm.mask().to_vec(),
        traces,
        chain_seeds,
        config: cfg.clone(),
        wall_time_secs,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: GcmiConfig,
    pub chain_seeds: Vec<u64>,
    pub traces: Vec<ConvergenceTrace>,
    pub files: Vec<String>,
    pub wall_time_secs: f64,
}

impl ImputationResult {
    /// Single completion combining the imputations: the mean for continuous
    /// cells and the most frequent level for the rest.
    pub fn pooled_completion(&self) -> DataMatrix {
        let first = &self.completed[0];
        if self.completed.len() == 1 {
            return first.clone();
        }
        let mut out = first.clone();
        let m = self.completed.len() as f64;
        for r in 0..first.n_rows() {
            for (j, col) in first.columns().iter().enumerate() {
                if !self.input_mask[first.idx(r, j)] {
                    continue;
                }
                let vals = self.completed.iter().map(|d| d.value(r, j));
                let v = match col.ty.levels() {
                    None => vals.sum::<f64>() / m,
                    Some(levels) => {
                        let mut counts = vec![0usize; levels.len()];
                        for v in vals {
                            counts[v as usize] += 1;
                        }
                        counts
                            .iter()
                            .enumerate()
                            .fold((0, 0), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc })
                            .0 as f64
                    }
                };
                out.set(r, j, v);
            }
        }
        out
    }

    /// Writes `{prefix}_{k}.csv` for k = 1..M and `{prefix}_manifest.json`
    /// into `dir`, returning the manifest path.
    pub fn write_outputs(&self, dir: &Path, prefix: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::with_capacity(self.completed.len());
        for (k, dm) in self.completed.iter().enumerate() {
            let name = format!("{prefix}_{}.csv", k + 1);
            crate::io::write_csv(dm, &dir.join(&name))?;
            files.push(name);
        }
        let manifest = RunManifest {
            config: self.config.clone(),
            chain_seeds: self.chain_seeds.clone(),
            traces: self.traces.clone(),
            files,
            wall_time_secs: self.wall_time_secs,
        };
        let path = dir.join(format!("{prefix}_manifest.json"));
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

// ---------------------------------------------------------------------------
// Pooling

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledEstimate {
    pub point: f64,
    pub within_var: f64,
    pub between_var: f64,
    pub total_var: f64,
    pub m: usize,
}

/// Rubin's rules over `(estimate, variance)` pairs from each completed dataset.
pub fn rubin_pool(estimates: &[(f64, f64)]) -> Result<PooledEstimate> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::InsufficientImputations(m));
    }
    if let Some(&(t, v)) = estimates.iter().find(|(t, v)| !t.is_finite() || !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "estimate ({t}, {v}) needs a finite value and a finite non-negative variance"
        )));
    }
    let mf = m as f64;
    let point = estimates.iter().map(|e| e.0).sum::<f64>() / mf;
    let within_var = estimates.iter().map(|e| e.1).sum::<f64>() / mf;
    let between_var = estimates.iter().map(|e| (e.0 - point).powi(2)).sum::<f64>() / (mf - 1.0);
    // W + (1 + 1/M) B over a common denominator, which rounds once instead
    // of three times; the max guards the T >= W ordering against that rounding.
    let total_var = ((mf * within_var + (mf + 1.0) * between_var) / mf).max(within_var);
    Ok(PooledEstimate {
        point,
        within_var,
        between_var,
        total_var,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnSchema;
    use proptest::prelude::*;

    const NA: f64 = f64::NAN;

    fn cat_col(name: &str, levels: &[&str]) -> ColumnSchema {
        ColumnSchema {
            name: name.into(),
            ty: ColumnType::Categorical {
                levels: levels.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    #[test]
    fn initial_fill_mean_and_mode() {
        let dm = DataMatrix::new(
            vec![ColumnSchema::continuous("x"), cat_col("c", &["a", "b"])],
            3,
            vec![1.0, 0.0, NA, 0.0, 3.0, NA],
        )
        .unwrap();
        let f = initial_fill(&dm).unwrap();
        assert_eq!(f.value(1, 0), 2.0);
        assert_eq!(f.value(2, 1), 0.0);
        assert!(f.is_complete());
    }

    #[test]
    fn initial_fill_identity_when_complete() {
        let dm = DataMatrix::from_continuous("x", 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(initial_fill(&dm).unwrap(), dm);
    }

    #[test]
    fn initial_fill_rejects_fully_missing_column() {
        let dm = DataMatrix::from_continuous("x", 2, 2, vec![1.0, NA, 3.0, NA]).unwrap();
        match initial_fill(&dm) {
            Err(Error::UnimputableColumn(name)) => assert_eq!(name, "x2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ordering_examples() {
        // Missing fractions 0.5, 0.1, 0.3 over 10 rows.
        let mut vals = vec![1.0; 30];
        for r in 0..5 {
            vals[r * 3] = NA;
        }
        vals[1] = NA;
        for r in 0..3 {
            vals[r * 3 + 2] = NA;
        }
        let dm = DataMatrix::from_continuous("x", 10, 3, vals).unwrap();
        assert_eq!(order_columns(&dm), vec![1, 2, 0]);

        let dm = DataMatrix::from_continuous("x", 2, 3, vec![NA, NA, NA, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(order_columns(&dm), vec![0, 1, 2]);

        let dm = DataMatrix::from_continuous("x", 1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(order_columns(&dm), vec![0, 1, 2]);
    }

    #[test]
    fn gamma_examples() {
        let old = DataMatrix::from_continuous("x", 2, 1, vec![1.0, 1.0]).unwrap();
        let new = DataMatrix::from_continuous("x", 2, 1, vec![2.0, 2.0]).unwrap();
        let mask = [true, true];
        assert_eq!(convergence_gamma(&new, &old, &mask).unwrap(), (0.25, 0.0));
        assert_eq!(convergence_gamma(&old, &old, &mask).unwrap(), (0.0, 0.0));

        let schema = vec![cat_col("c", &["a", "b"])];
        let old = DataMatrix::new(schema.clone(), 3, vec![0.0, 0.0, 1.0]).unwrap();
        let new = DataMatrix::new(schema, 3, vec![0.0, 1.0, 1.0]).unwrap();
        let (gn, gc) = convergence_gamma(&new, &old, &[true, true, true]).unwrap();
        assert_eq!(gn, 0.0);
        assert_eq!(gc, 1.0 / 3.0);
    }

    #[test]
    fn gamma_ignores_observed_cells() {
        let old = DataMatrix::from_continuous("x", 2, 1, vec![1.0, 5.0]).unwrap();
        let new = DataMatrix::from_continuous("x", 2, 1, vec![2.0, 9.0]).unwrap();
        assert_eq!(convergence_gamma(&new, &old, &[true, false]).unwrap().0, 0.25);
    }

    #[test]
    fn gamma_shape_error() {
        let a = DataMatrix::from_continuous("x", 2, 1, vec![1.0, 1.0]).unwrap();
        let b = DataMatrix::from_continuous("x", 1, 1, vec![1.0]).unwrap();
        assert!(matches!(convergence_gamma(&a, &b, &[true]), Err(Error::Shape(_))));
    }

    #[test]
    fn rubin_examples() {
        let p = rubin_pool(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]).unwrap();
        assert_eq!(p.point, 2.0);
        assert_eq!(p.within_var, 1.0);
        assert_eq!(p.between_var, 1.0);
        assert_eq!(p.total_var, 7.0 / 3.0);

        let p = rubin_pool(&[(0.4, 0.2); 4]).unwrap();
        assert_eq!((p.point, p.between_var, p.total_var), (0.4, 0.0, 0.2));

        assert!(matches!(
            rubin_pool(&[(1.0, 1.0)]),
            Err(Error::InsufficientImputations(1))
        ));
        assert!(rubin_pool(&[(1.0, -1.0), (1.0, 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn rubin_scaling_and_ordering(
            entries in proptest::collection::vec((-10.0f64..10.0, 0.0f64..5.0), 2..8),
            c in -5.0f64..5.0,
        ) {
            let base = rubin_pool(&entries).unwrap();
            prop_assert!(base.total_var >= base.within_var);
            prop_assert!(base.between_var >= 0.0);

            let scaled: Vec<_> = entries.iter().map(|&(t, v)| (c * t, v)).collect();
            let s = rubin_pool(&scaled).unwrap();
            prop_assert!((s.between_var - c * c * base.between_var).abs() <= 1e-9 * (1.0 + base.between_var * c * c));
            prop_assert_eq!(s.within_var, base.within_var);

            let mut rev = entries.clone();
            rev.reverse();
            let r = rubin_pool(&rev).unwrap();
            prop_assert!((r.point - base.point).abs() < 1e-12);
            prop_assert!((r.total_var - base.total_var).abs() < 1e-9);
        }

        #[test]
        fn gamma_of_identical_completions_is_zero(
            vals in proptest::collection::vec(-5.0f64..5.0, 6),
            mask in proptest::collection::vec(any::<bool>(), 6),
        ) {
            let dm = DataMatrix::from_continuous("x", 3, 2, vals).unwrap();
            prop_assert_eq!(convergence_gamma(&dm, &dm, &mask).unwrap(), (0.0, 0.0));
        }
    }

    fn tiny_cfg() -> GcmiConfig {
        GcmiConfig {
            max_chain_iters: 3,
            m_imputations: 2,
            train: TrainConfig {
                max_epochs: 5,
                hidden_dims: Some(vec![8]),
                gen_iters_per_cycle: 5,
                disc_iters_per_cycle: 2,
                ..TrainConfig::default()
            },
            ..GcmiConfig::default()
        }
    }

    fn small_missing_matrix() -> DataMatrix {
        let n = 40;
        let mut vals = Vec::with_capacity(n * 3);
        for r in 0..n {
            let x = r as f64 / 10.0;
            vals.extend([x, if r % 4 == 0 { NA } else { 2.0 * x }, if r % 5 == 1 { NA } else { -x }]);
        }
        DataMatrix::from_continuous("x", n, 3, vals).unwrap()
    }

    #[test]
    fn sweep_without_missing_is_identity() {
        let dm = DataMatrix::from_continuous("x", 3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let out = sweep(&dm, dm.mask(), &[0, 1], &tiny_cfg(), 1).unwrap();
        assert_eq!(out.matrix, dm);
        assert!(out.trained_columns.is_empty());
    }

    #[test]
    fn sweep_trains_only_incomplete_columns() {
        let mut vals = vec![0.0; 60];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = (i * 7 % 11) as f64;
        }
        vals[4] = NA;
        let dm = DataMatrix::from_continuous("x", 20, 3, vals).unwrap();
        let filled = initial_fill(&dm).unwrap();
        let out = sweep(&filled, dm.mask(), &order_columns(&dm), &tiny_cfg(), 1).unwrap();
        assert_eq!(out.trained_columns, vec![1]);
        assert!(out.matrix.is_complete());
    }

    #[test]
    fn sparse_columns_keep_initial_fill() {
        let mut vals: Vec<f64> = (0..40).map(|i| i as f64).collect();
        for r in 0..17 {
            vals[r * 2 + 1] = NA;
        }
        let dm = DataMatrix::from_continuous("x", 20, 2, vals).unwrap();
        let filled = initial_fill(&dm).unwrap();
        let out = sweep(&filled, dm.mask(), &[0, 1], &tiny_cfg(), 0).unwrap();
        assert!(out.trained_columns.is_empty());
        assert_eq!(out.matrix, filled);
    }

    #[test]
    fn sequential_and_snapshot_modes_both_complete() {
        let dm = small_missing_matrix();
        let filled = initial_fill(&dm).unwrap();
        let order = order_columns(&dm);
        let seq = sweep(&filled, dm.mask(), &order, &tiny_cfg(), 3).unwrap();
        let snap_cfg = GcmiConfig {
            column_parallelism: ColumnParallelism::SnapshotParallel,
            ..tiny_cfg()
        };
        let snap = sweep(&filled, dm.mask(), &order, &snap_cfg, 3).unwrap();
        assert!(seq.matrix.is_complete() && snap.matrix.is_complete());
        // The first column trained sees the same inputs in both modes.
        let first = order.iter().copied().find(|&j| dm.missing_count(j) > 0).unwrap();
        for r in dm.missing_rows(first) {
            assert_eq!(seq.matrix.value(r, first), snap.matrix.value(r, first));
        }
    }

    #[test]
    fn fully_observed_input_returns_copies() {
        let dm = DataMatrix::from_continuous("x", 3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let res = gcmi_impute(&dm, &tiny_cfg()).unwrap();
        assert_eq!(res.completed.len(), 2);
        for (c, t) in res.completed.iter().zip(&res.traces) {
            assert_eq!(c, &dm);
            assert!(t.sweeps.is_empty());
        }
    }

    #[test]
    fn imputation_preserves_observed_and_is_deterministic() {
        let dm = small_missing_matrix();
        let cfg = GcmiConfig {
            m_imputations: 1,
            seed: 17,
            ..tiny_cfg()
        };
        let a = gcmi_impute(&dm, &cfg).unwrap();
        let b = gcmi_impute(&dm, &cfg).unwrap();
        assert_eq!(a.completed, b.completed);
        let out = &a.completed[0];
        assert!(out.is_complete());
        for r in 0..dm.n_rows() {
            for j in 0..dm.n_cols() {
                if !dm.is_missing(r, j) {
                    assert_eq!(out.value(r, j).to_bits(), dm.value(r, j).to_bits());
                }
            }
        }
        assert!(a.traces[0].sweeps.len() <= cfg.max_chain_iters);
    }

    #[test]
    fn rejects_single_column_and_empty_columns() {
        let dm = DataMatrix::from_continuous("x", 2, 1, vec![1.0, NA]).unwrap();
        assert!(matches!(gcmi_impute(&dm, &tiny_cfg()), Err(Error::InvalidArgument(_))));
        let dm = DataMatrix::from_continuous("x", 2, 2, vec![1.0, NA, 2.0, NA]).unwrap();
        assert!(matches!(gcmi_impute(&dm, &tiny_cfg()), Err(Error::UnimputableColumn(_))));
    }

    #[test]
    fn pooled_completion_averages_continuous_cells() {
        let dm = small_missing_matrix();
        let res = gcmi_impute(&dm, &GcmiConfig { seed: 2, ..tiny_cfg() }).unwrap();
        let pooled = res.pooled_completion();
        let r = dm.missing_rows(1)[0];
        let mean = (res.completed[0].value(r, 1) + res.completed[1].value(r, 1)) / 2.0;
        assert!((pooled.value(r, 1) - mean).abs() < 1e-12);
        assert_eq!(pooled.value(1, 1).to_bits(), dm.value(1, 1).to_bits());
    }

    #[test]
    fn predictor_encoding_one_hot() {
        let dm = DataMatrix::new(
            vec![ColumnSchema::continuous("x"), cat_col("c", &["a", "b", "c"]), ColumnSchema::continuous("y")],
            2,
            vec![1.5, 2.0, 7.0, -1.0, 0.0, 8.0],
        )
        .unwrap();
        let enc = encode_predictors(&dm, 2);
        assert_eq!(enc.shape(), &[2, 4]);
        assert_eq!(enc.row(0).to_vec(), vec![1.5, 0.0, 0.0, 1.0]);
        assert_eq!(enc.row(1).to_vec(), vec![-1.0, 1.0, 0.0, 0.0]);
    }
}
