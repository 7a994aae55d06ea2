//! Per-column min-max scaling.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;

/// `normalized = (raw - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub offset: f64,
    pub scale: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        offset: 0.0,
        scale: 1.0,
    };

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    #[inline]
    pub fn invert(&self, y: f64) -> f64 {
        y * self.scale + self.offset
    }

    /// Min-max map onto `[0, 1]` from the finite values given, or `None` when
    /// fewer than two distinct values are present.
    pub fn fit_min_max(values: impl IntoIterator<Item = f64>) -> Option<Affine> {
        let (lo, hi) = values
            .into_iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if lo.is_finite() && hi > lo {
            Some(Affine {
                offset: lo,
                scale: hi - lo,
            })
        } else {
            None
        }
    }

    /// Like [`Affine::fit_min_max`] but a degenerate column is shifted to zero
    /// instead of left alone.
    pub fn fit_min_max_or_shift(values: impl IntoIterator<Item = f64> + Clone) -> Affine {
        Affine::fit_min_max(values.clone()).unwrap_or_else(|| Affine {
            offset: values.into_iter().find(|v| v.is_finite()).unwrap_or(0.0),
            scale: 1.0,
        })
    }
}

/// Min-max scales every continuous column using observed cells only.
///
/// Columns with fewer than two distinct observed values keep the identity
/// transform and log a warning. Non-continuous columns always get the identity.
pub fn normalize(dm: &DataMatrix) -> (DataMatrix, Vec<Affine>) {
    let params: Vec<Affine> = dm
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            if !col.ty.is_continuous() {
                return Affine::IDENTITY;
            }
            Affine::fit_min_max(dm.observed_values(j)).unwrap_or_else(|| {
                warn!(
                    "column `{}` has fewer than two distinct observed values; left unscaled",
                    col.name
                );
                Affine::IDENTITY
            })
        })
        .collect();
    (apply_columnwise(dm, &params, Affine::apply), params)
}

pub fn denormalize(dm: &DataMatrix, params: &[Affine]) -> DataMatrix {
    apply_columnwise(dm, params, Affine::invert)
}

fn apply_columnwise(dm: &DataMatrix, params: &[Affine], f: fn(&Affine, f64) -> f64) -> DataMatrix {
    assert_eq!(params.len(), dm.n_cols(), "one affine map per column");
    let mut out = dm.clone();
    for r in 0..dm.n_rows() {
        for (j, a) in params.iter().enumerate() {
            if *a != Affine::IDENTITY && !dm.is_missing(r, j) {
                out.set(r, j, f(a, dm.value(r, j)));
            }
        }
    }
    out
}
