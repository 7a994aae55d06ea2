//! Multiply impute, fit a regression slope on each completion, pool the fits.
//!
//! cargo run --example rubin_pooling

use gcmi::chained::{gcmi_impute, rubin_pool, GcmiConfig};
use gcmi::lab::{ampute_matrix, gen_synthetic, AmputationSpec, Mechanism, SyntheticSpec};
use gcmi::DataMatrix;

// OLS slope of column `y` on column `x` and its sampling variance.
fn slope(dm: &DataMatrix, x: usize, y: usize) -> (f64, f64) {
    let n = dm.n_rows() as f64;
    let xs: Vec<f64> = dm.column_values(x).collect();
    let ys: Vec<f64> = dm.column_values(y).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let rss: f64 = xs.iter().zip(&ys).map(|(a, c)| (c - my - b * (a - mx)).powi(2)).sum();
    (b, rss / (n - 2.0) / sxx)
}

fn main() -> gcmi::Result<()> {
    let truth = gen_synthetic(&SyntheticSpec {
        n: 300,
        p: 4,
        rho: 0.6,
        seed: 5,
        ..SyntheticSpec::default()
    })?
    .covariates();
    let (amputed, _) = ampute_matrix(
        &truth,
        &AmputationSpec {
            mechanism: Mechanism::Mcar { p: 0.25 },
            seed: 6,
            ..AmputationSpec::default()
        },
    )?;

    let mut cfg = GcmiConfig {
        m_imputations: 5,
        seed: 9,
        ..GcmiConfig::default()
    };
    cfg.train.max_epochs = 200;
    let result = gcmi_impute(&amputed, &cfg)?;

    let fits: Vec<(f64, f64)> = result.completed.iter().map(|dm| slope(dm, 0, 1)).collect();
    for (k, (b, v)) in fits.iter().enumerate() {
        println!("imputation {}: slope {b:.4} (se {:.4})", k + 1, v.sqrt());
    }
    let pooled = rubin_pool(&fits)?;
    let (b_full, v_full) = slope(&truth, 0, 1);
    println!(
        "pooled slope {:.4}, W {:.2e}, B {:.2e}, T {:.2e}",
        pooled.point, pooled.within_var, pooled.between_var, pooled.total_var
    );
    println!("complete-data slope {b_full:.4} (se {:.4})", v_full.sqrt());
    Ok(())
}
