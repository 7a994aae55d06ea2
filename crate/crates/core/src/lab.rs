//! Synthetic complete data and MCAR / MAR / MNAR amputation.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::{ColumnSchema, DataMatrix};
use crate::error::{Error, Result};
use crate::nn::sigmoid;
use crate::rng::{derive_seed, rng_from_seed};

/// Realized regression coefficients of the 15-covariate outcome model.
pub const DEFAULT_ALPHA: [f64; 15] = [
    0.542, -0.769, 0.298, -0.156, 0.778, -0.391, -0.629, 0.311, 0.913, -0.025, -0.676, 0.512, 0.840,
    -0.265, -0.678,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub sigma2: f64,
    /// Outcome coefficients. `None` uses [`DEFAULT_ALPHA`] when `p == 15`
    /// and otherwise draws `Unif[-1, 1]^p` from the seed.
    pub alpha: Option<Vec<f64>>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 2000,
            p: 15,
            rho: 0.3,
            sigma2: 1.0,
            alpha: None,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// `n × p` covariates.
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl SyntheticData {
    /// Covariates only, columns `X1..Xp`.
    pub fn covariates(&self) -> DataMatrix {
        let (n, p) = self.x.dim();
        DataMatrix::from_continuous("X", n, p, self.x.iter().copied().collect())
            .expect("synthetic values are finite")
    }

    /// Covariates followed by the outcome column `Y`.
    pub fn with_outcome(&self) -> DataMatrix {
        let (n, p) = self.x.dim();
        let mut columns: Vec<ColumnSchema> = (1..=p).map(|j| ColumnSchema::continuous(format!("X{j}"))).collect();
        columns.push(ColumnSchema::continuous("Y"));
        let mut values = Vec::with_capacity(n * (p + 1));
        for (row, y) in self.x.rows().into_iter().zip(&self.y) {
            values.extend(row.iter().copied());
            values.push(*y);
        }
        DataMatrix::new(columns, n, values).expect("synthetic values are finite")
    }
}

/// Equicorrelation covariance `σ² [(1 − ρ) I + ρ 11ᵀ]`.
pub fn equicorrelation(p: usize, rho: f64, sigma2: f64) -> Array2<f64> {
    Array2::from_shape_fn((p, p), |(i, j)| if i == j { sigma2 } else { sigma2 * rho })
}

/// Lower-triangular Cholesky factor, or `None` if `a` is not positive definite.
pub fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum();
            if i == j {
                let d = a[[i, i]] - dot;
                if !(d > 0.0) {
                    return None;
                }
                l[[i, j]] = d.sqrt();
            } else {
                l[[i, j]] = (a[[i, j]] - dot) / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Draws `n` i.i.d. rows from `N(0, σ²[(1−ρ)I + ρ11ᵀ])` and the outcome
/// `Y = Xα + ε` with `ε ~ N(0, noise_sd²)`.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    let SyntheticSpec {
        n,
        p,
        rho,
        sigma2,
        noise_sd,
        seed,
        ..
    } = *spec;
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument("n and p must be positive".into()));
    }
    if !(sigma2 > 0.0) || !(noise_sd >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(
            "sigma2 must be positive and noise_sd non-negative".into(),
        ));
    }
    let chol = cholesky(&equicorrelation(p, rho, sigma2)).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "equicorrelation matrix with rho = {rho} is not positive definite for p = {p}"
        ))
    })?;

    let alpha = match &spec.alpha {
        Some(a) if a.len() == p => a.clone(),
        Some(a) => {
            return Err(Error::InvalidArgument(format!(
                "alpha has {} entries for p = {p}",
                a.len()
            )))
        }
        None if p == DEFAULT_ALPHA.len() => DEFAULT_ALPHA.to_vec(),
        None => {
            let mut rng = rng_from_seed(derive_seed(seed, &[2]));
            let u = Uniform::new_inclusive(-1.0, 1.0);
            (0..p).map(|_| u.sample(&mut rng)).collect()
        }
    };

    let mut rng = rng_from_seed(derive_seed(seed, &[0]));
    let z = Array2::from_shape_simple_fn((n, p), || rng.sample::<f64, _>(StandardNormal));
    let x = z.dot(&chol.t());

    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    let y = if noise_sd > 0.0 {
        let eps = Normal::new(0.0, noise_sd).expect("positive sd");
        x.rows()
            .into_iter()
            .map(|row| row.dot(&ndarray::ArrayView1::from(&alpha)) + eps.sample(&mut rng))
            .collect()
    } else {
        x.rows()
            .into_iter()
            .map(|row| row.dot(&ndarray::ArrayView1::from(&alpha)))
            .collect()
    };
    Ok(SyntheticData { x, y, alpha })
}

// ---------------------------------------------------------------------------
// Amputation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mechanism {
    /// Every eligible cell is deleted with probability `p`.
    Mcar { p: f64 },
    /// Target column `j` is deleted with probability
    /// `sigmoid(X_cond · beta_j)`. Conditioning columns are never deleted.
    Mar {
        /// One row of `cond_cols.len()` coefficients per target column;
        /// drawn from `Unif[-1, 1]` when absent.
        #[serde(default)]
        beta: Option<Vec<Vec<f64>>>,
        #[serde(default = "default_mar_cond")]
        cond_cols: Vec<usize>,
        /// Defaults to every eligible column not in `cond_cols`.
        #[serde(default)]
        target_cols: Option<Vec<usize>>,
    },
    /// Self-masking: cell `(i, j)` is deleted with probability
    /// `clamp(b0 + b1 · x_ij, 0, 1)`.
    Mnar { b0: f64, b1: f64 },
}

fn default_mar_cond() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

impl Mechanism {
    pub fn label(&self) -> String {
        match self {
            Mechanism::Mcar { p } => format!("MCAR(p={p})"),
            Mechanism::Mar { cond_cols, .. } => format!("MAR(cond={cond_cols:?})"),
            Mechanism::Mnar { b0, b1 } => format!("MNAR(b0={b0},b1={b1})"),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Mechanism::Mcar { .. } => "MCAR",
            Mechanism::Mar { .. } => "MAR",
            Mechanism::Mnar { .. } => "MNAR",
        }
    }

    /// Configured deletion probability when the mechanism has one.
    pub fn nominal_rate(&self) -> Option<f64> {
        match self {
            Mechanism::Mcar { p } => Some(*p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "layout", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskLayout {
    /// Independent draw per cell.
    #[default]
    Cellwise,
    /// One draw per (row, block): all listed columns of a block go missing
    /// together, with the block's mean cell probability.
    Blockwise { blocks: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmputationSpec {
    pub mechanism: Mechanism,
    pub layout: MaskLayout,
    /// Columns that may be deleted; `None` means all.
    pub columns: Option<Vec<usize>>,
    pub seed: u64,
}

impl Default for AmputationSpec {
    fn default() -> Self {
        AmputationSpec {
            mechanism: Mechanism::Mcar { p: 0.3 },
            layout: MaskLayout::Cellwise,
            columns: None,
            seed: 0,
        }
    }
}

fn eligible_columns(p: usize, columns: Option<&[usize]>) -> Result<Vec<bool>> {
    let mut eligible = vec![columns.is_none(); p];
    if let Some(cols) = columns {
        for &c in cols {
            if c >= p {
                return Err(Error::InvalidArgument(format!("column {c} out of range for {p} columns")));
            }
            eligible[c] = true;
        }
    }
    Ok(eligible)
}

/// Row-major deletion probability for every cell.
fn cell_probabilities(x: ArrayView2<f64>, mechanism: &Mechanism, eligible: &[bool], seed: u64) -> Result<Vec<f64>> {
    let (n, p) = x.dim();
    let mut probs = vec![0.0; n * p];
    match mechanism {
        Mechanism::Mcar { p: rate } => {
            if !(0.0..=1.0).contains(rate) {
                return Err(Error::InvalidArgument(format!("MCAR probability {rate} outside [0, 1]")));
            }
            for (i, pr) in probs.iter_mut().enumerate() {
                if eligible[i % p] {
                    *pr = *rate;
                }
            }
        }
        Mechanism::Mnar { b0, b1 } => {
            for r in 0..n {
                for j in (0..p).filter(|&j| eligible[j]) {
                    let v = b0 + b1 * x[[r, j]];
                    probs[r * p + j] = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
                }
            }
        }
        Mechanism::Mar {
            beta,
            cond_cols,
            target_cols,
        } => {
            if cond_cols.is_empty() {
                return Err(Error::InvalidArgument("MAR needs at least one conditioning column".into()));
            }
            if let Some(&c) = cond_cols.iter().find(|&&c| c >= p) {
                return Err(Error::InvalidArgument(format!("conditioning column {c} out of range")));
            }
            let targets: Vec<usize> = match target_cols {
                Some(t) => t.clone(),
                None => (0..p).filter(|j| eligible[*j] && !cond_cols.contains(j)).collect(),
            };
            if let Some(&t) = targets.iter().find(|t| cond_cols.contains(t)) {
                return Err(Error::InvalidArgument(format!(
                    "column {t} is both a conditioning and a target column"
                )));
            }
            if let Some(&t) = targets.iter().find(|&&t| t >= p) {
                return Err(Error::InvalidArgument(format!("target column {t} out of range")));
            }
            for &c in cond_cols {
                if x.column(c).iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "conditioning column {c} must be fully observed"
                    )));
                }
            }
            let betas: Vec<Vec<f64>> = match beta {
                Some(b) => {
                    if b.len() != targets.len() || b.iter().any(|row| row.len() != cond_cols.len()) {
                        return Err(Error::InvalidArgument(format!(
                            "beta must be {} rows of {} coefficients",
                            targets.len(),
                            cond_cols.len()
                        )));
                    }
                    b.clone()
                }
                None => {
                    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
                    let u = Uniform::new_inclusive(-1.0, 1.0);
                    targets
                        .iter()
                        .map(|_| cond_cols.iter().map(|_| u.sample(&mut rng)).collect())
                        .collect()
                }
            };
            for r in 0..n {
                for (t, b) in targets.iter().zip(&betas) {
                    let logit: f64 = cond_cols.iter().zip(b).map(|(&c, w)| x[[r, c]] * w).sum();
                    probs[r * p + t] = sigmoid_exact(logit);
                }
            }
        }
    }
    Ok(probs)
}

// The clamped network sigmoid is fine here too, but 0.5 at logit 0 must be exact.
fn sigmoid_exact(z: f64) -> f64 {
    if z == 0.0 {
        0.5
    } else {
        sigmoid(z)
    }
}

/// Samples a row-major mask (`true` = delete) for `x` under `spec`.
pub fn ampute(x: ArrayView2<f64>, spec: &AmputationSpec) -> Result<Vec<bool>> {
    let (n, p) = x.dim();
    let eligible = eligible_columns(p, spec.columns.as_deref())?;
    let probs = cell_probabilities(x, &spec.mechanism, &eligible, spec.seed)?;
    let mut rng = rng_from_seed(derive_seed(spec.seed, &[0]));
    match &spec.layout {
        MaskLayout::Cellwise => Ok(probs.iter().map(|&pr| rng.gen::<f64>() < pr).collect()),
        MaskLayout::Blockwise { blocks } => {
            let mut in_block = vec![false; p];
            for b in blocks {
                for &c in b {
                    if c >= p {
                        return Err(Error::InvalidArgument(format!("block column {c} out of range")));
                    }
                    if in_block[c] {
                        return Err(Error::InvalidArgument(format!("column {c} appears in two blocks")));
                    }
                    in_block[c] = true;
                }
            }
            let mut mask = vec![false; n * p];
            for r in 0..n {
                for j in (0..p).filter(|&j| !in_block[j]) {
                    mask[r * p + j] = rng.gen::<f64>() < probs[r * p + j];
                }
                for b in blocks.iter().filter(|b| !b.is_empty()) {
                    let pr = b.iter().map(|&c| probs[r * p + c]).sum::<f64>() / b.len() as f64;
                    let hit = rng.gen::<f64>() < pr;
                    for &c in b {
                        mask[r * p + c] = hit && probs[r * p + c] > 0.0;
                    }
                }
            }
            Ok(mask)
        }
    }
}

pub fn ampute_mcar(x: ArrayView2<f64>, p: f64, seed: u64) -> Result<Vec<bool>> {
    ampute(
        x,
        &AmputationSpec {
            mechanism: Mechanism::Mcar { p },
            seed,
            ..AmputationSpec::default()
        },
    )
}

pub fn ampute_mar(
    x: ArrayView2<f64>,
    beta: Option<Vec<Vec<f64>>>,
    cond_cols: &[usize],
    target_cols: &[usize],
    seed: u64,
) -> Result<Vec<bool>> {
    ampute(
        x,
        &AmputationSpec {
            mechanism: Mechanism::Mar {
                beta,
                cond_cols: cond_cols.to_vec(),
                target_cols: Some(target_cols.to_vec()),
            },
            seed,
            ..AmputationSpec::default()
        },
    )
}

pub fn ampute_mnar(x: ArrayView2<f64>, b0: f64, b1: f64, seed: u64) -> Result<Vec<bool>> {
    ampute(
        x,
        &AmputationSpec {
            mechanism: Mechanism::Mnar { b0, b1 },
            seed,
            ..AmputationSpec::default()
        },
    )
}

/// Amputes a data matrix. MAR conditioning columns and MNAR targets must be
/// continuous; cells already missing stay missing. Returns the amputed
/// matrix and the mask of newly deleted cells.
pub fn ampute_matrix(dm: &DataMatrix, spec: &AmputationSpec) -> Result<(DataMatrix, Vec<bool>)> {
    let numeric_needed: Vec<usize> = match &spec.mechanism {
        Mechanism::Mcar { .. } => Vec::new(),
        Mechanism::Mar { cond_cols, .. } => cond_cols.clone(),
        Mechanism::Mnar { .. } => spec.columns.clone().unwrap_or_else(|| (0..dm.n_cols()).collect()),
    };
    if let Some(&j) = numeric_needed
        .iter()
        .find(|&&j| j < dm.n_cols() && !dm.columns()[j].ty.is_continuous())
    {
        return Err(Error::InvalidArgument(format!(
            "{} amputation needs column `{}` to be continuous",
            spec.mechanism.kind_name(),
            dm.columns()[j].name
        )));
    }
    let x = ArrayView2::from_shape((dm.n_rows(), dm.n_cols()), dm.values())
        .map_err(|e| Error::Shape(e.to_string()))?;
    let mask: Vec<bool> = ampute(x, spec)?
        .into_iter()
        .zip(dm.mask())
        .map(|(new, &old)| new && !old)
        .collect();
    Ok((dm.with_mask_applied(&mask)?, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, p: usize, rho: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n,
            p,
            rho,
            seed,
            ..SyntheticSpec::default()
        }
    }

    fn pairwise_cov(x: &Array2<f64>, i: usize, j: usize) -> f64 {
        let n = x.nrows() as f64;
        let (mi, mj) = (x.column(i).sum() / n, x.column(j).sum() / n);
        x.column(i)
            .iter()
            .zip(x.column(j))
            .map(|(a, b)| (a - mi) * (b - mj))
            .sum::<f64>()
            / (n - 1.0)
    }

    #[test]
    fn independent_case_has_near_zero_correlation() {
        let d = gen_synthetic(&spec(2000, 15, 0.0, 3)).unwrap();
        for i in 0..15 {
            for j in 0..i {
                let c = pairwise_cov(&d.x, i, j);
                let r = c / (pairwise_cov(&d.x, i, i) * pairwise_cov(&d.x, j, j)).sqrt();
                assert!(r.abs() < 0.08, "corr({i},{j}) = {r}");
            }
        }
    }

    #[test]
    fn equicorrelated_covariance_near_rho() {
        let d = gen_synthetic(&spec(2000, 15, 0.3, 5)).unwrap();
        let mut total = 0.0;
        let mut count = 0.0;
        for i in 0..15 {
            for j in 0..i {
                total += pairwise_cov(&d.x, i, j);
                count += 1.0;
            }
        }
        assert!((total / count - 0.3).abs() < 0.05);
    }

    #[test]
    fn default_alpha_vector() {
        let d = gen_synthetic(&spec(10, 15, 0.3, 0)).unwrap();
        assert_eq!(d.alpha, DEFAULT_ALPHA.to_vec());
        assert_eq!(d.alpha[8], 0.913);
        let dm = d.with_outcome();
        assert_eq!(dm.n_cols(), 16);
        assert_eq!(dm.columns()[15].name, "Y");
    }

    #[test]
    fn outcome_is_linear_without_noise() {
        let s = SyntheticSpec {
            noise_sd: 0.0,
            ..spec(20, 15, 0.3, 1)
        };
        let d = gen_synthetic(&s).unwrap();
        for (row, y) in d.x.rows().into_iter().zip(&d.y) {
            let fit: f64 = row.iter().zip(&DEFAULT_ALPHA).map(|(a, b)| a * b).sum();
            assert!((fit - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_definite() {
        assert!(matches!(
            gen_synthetic(&spec(10, 5, -0.3, 0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(gen_synthetic(&spec(10, 5, 1.0, 0)).is_err());
        assert!(gen_synthetic(&spec(10, 5, -0.2, 0)).is_ok());
    }

    #[test]
    fn synthetic_is_deterministic() {
        assert_eq!(gen_synthetic(&spec(50, 4, 0.3, 9)).unwrap(), gen_synthetic(&spec(50, 4, 0.3, 9)).unwrap());
    }

    #[test]
    fn mcar_extremes_and_bounds() {
        let x = Array2::zeros((100, 3));
        assert!(ampute_mcar(x.view(), 0.0, 1).unwrap().iter().all(|m| !m));
        assert!(ampute_mcar(x.view(), 1.0, 1).unwrap().iter().all(|&m| m));
        assert!(matches!(ampute_mcar(x.view(), 1.5, 1), Err(Error::InvalidArgument(_))));
        assert!(ampute_mcar(x.view(), -0.1, 1).is_err());
    }

    #[test]
    fn mcar_rate_concentrates() {
        let x = Array2::zeros((2000, 15));
        let m = ampute_mcar(x.view(), 0.3, 11).unwrap();
        let rate = m.iter().filter(|&&v| v).count() as f64 / m.len() as f64;
        let bound = 3.0 * (0.3f64 * 0.7 / 30000.0).sqrt();
        assert!((rate - 0.3).abs() < bound, "rate {rate}");
    }

    #[test]
    fn mnar_clamps_probabilities() {
        let x = Array2::from_shape_vec((1, 2), vec![0.5, 0.9]).unwrap();
        for seed in 0..50 {
            let m = ampute_mnar(x.view(), -1.5, 3.0, seed).unwrap();
            assert_eq!(m, vec![false, true]);
        }
    }

    #[test]
    fn mnar_without_slope_matches_mcar_mask() {
        let d = gen_synthetic(&spec(200, 5, 0.3, 1)).unwrap();
        assert_eq!(
            ampute_mnar(d.x.view(), 0.3, 0.0, 4).unwrap(),
            ampute_mcar(d.x.view(), 0.3, 4).unwrap()
        );
    }

    #[test]
    fn mar_zero_beta_gives_half() {
        let d = gen_synthetic(&spec(2000, 6, 0.3, 2)).unwrap();
        let beta = Some(vec![vec![0.0; 4]; 2]);
        let m = ampute_mar(d.x.view(), beta, &[0, 1, 2, 3], &[4, 5], 8).unwrap();
        for j in 0..6 {
            let rate = (0..2000).filter(|r| m[r * 6 + j]).count() as f64 / 2000.0;
            if j < 4 {
                assert_eq!(rate, 0.0);
            } else {
                assert!((rate - 0.5).abs() < 0.04, "column {j}: {rate}");
            }
        }
    }

    #[test]
    fn mar_zero_conditioning_row_is_half() {
        let x = Array2::zeros((1, 6));
        let probs = cell_probabilities(
            x.view(),
            &Mechanism::Mar {
                beta: None,
                cond_cols: vec![0, 1, 2, 3],
                target_cols: None,
            },
            &[true; 6],
            3,
        )
        .unwrap();
        assert_eq!(&probs[4..], &[0.5, 0.5]);
        assert_eq!(&probs[..4], &[0.0; 4]);
    }

    #[test]
    fn mar_rejects_overlap() {
        let x = Array2::zeros((5, 6));
        assert!(matches!(
            ampute_mar(x.view(), None, &[0, 1, 2, 3], &[3, 4], 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn blockwise_layout_deletes_blocks_together() {
        let x = Array2::zeros((300, 4));
        let s = AmputationSpec {
            mechanism: Mechanism::Mcar { p: 0.4 },
            layout: MaskLayout::Blockwise {
                blocks: vec![vec![0, 1], vec![2, 3]],
            },
            columns: None,
            seed: 6,
        };
        let m = ampute(x.view(), &s).unwrap();
        for r in 0..300 {
            assert_eq!(m[r * 4], m[r * 4 + 1]);
            assert_eq!(m[r * 4 + 2], m[r * 4 + 3]);
        }
        let rate = m.iter().filter(|&&v| v).count() as f64 / m.len() as f64;
        assert!((rate - 0.4).abs() < 0.08);
    }

    #[test]
    fn eligible_columns_restrict_deletion() {
        let x = Array2::zeros((50, 3));
        let s = AmputationSpec {
            mechanism: Mechanism::Mcar { p: 1.0 },
            columns: Some(vec![1]),
            ..AmputationSpec::default()
        };
        let m = ampute(x.view(), &s).unwrap();
        for r in 0..50 {
            assert_eq!(&m[r * 3..r * 3 + 3], &[false, true, false]);
        }
    }

    #[test]
    fn matrix_amputation_keeps_existing_gaps() {
        let dm = DataMatrix::from_continuous("X", 2, 2, vec![1.0, f64::NAN, 3.0, 4.0]).unwrap();
        let (am, new_mask) = ampute_matrix(
            &dm,
            &AmputationSpec {
                mechanism: Mechanism::Mcar { p: 1.0 },
                ..AmputationSpec::default()
            },
        )
        .unwrap();
        assert_eq!(new_mask, vec![true, false, true, true]);
        assert!(am.mask().iter().all(|&m| m));
    }

    #[test]
    fn mechanism_json_shape() {
        let s: AmputationSpec = serde_json::from_str(r#"{"mechanism": {"type": "mnar", "b0": -1.5, "b1": 3.0}}"#).unwrap();
        assert_eq!(s.mechanism, Mechanism::Mnar { b0: -1.5, b1: 3.0 });
        let s: AmputationSpec = serde_json::from_str(r#"{"mechanism": {"type": "mar"}}"#).unwrap();
        assert!(matches!(s.mechanism, Mechanism::Mar { ref cond_cols, .. } if cond_cols == &[0, 1, 2, 3]));
        assert!(serde_json::from_str::<AmputationSpec>(r#"{"mech": 1}"#).is_err());
    }
}
