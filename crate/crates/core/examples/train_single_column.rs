//! Fit one conditional generator/discriminator pair and watch the losses.
//!
//! cargo run --example train_single_column

use gcmi::gcin::{impute_column, train_gcin, TrainConfig};
use gcmi::ColumnKind;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gcmi::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 600;
    let x = Array2::from_shape_simple_fn((n, 2), || rng.gen_range(-1.0..1.0));
    // y depends on both predictors, with a heteroscedastic spread.
    let y: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| 2.0 * r[0] - r[1] + (0.1 + 0.3 * f64::abs(r[0])) * rng.gen_range(-1.0..1.0))
        .collect();

    let cfg = TrainConfig {
        max_epochs: 300,
        seed: 1,
        ..TrainConfig::default()
    };
    let (pair, trace) = train_gcin(x.view(), &y, ColumnKind::Continuous, &cfg)?;
    println!("{} cycles, stopped by {:?}", trace.cycles.len(), trace.stop);
    for c in trace.cycles.iter().step_by((trace.cycles.len() / 8).max(1)) {
        println!(
            "cycle {:>3}  L_D {:.4}  L_G {:.4}  acc {:.5}",
            c.cycle, c.disc_loss, c.gen_loss, c.acc_loss
        );
    }

    let probe = Array2::from_shape_vec((3, 2), vec![-0.8, 0.0, 0.0, 0.0, 0.8, 0.0]).unwrap();
    for seed in 0..3 {
        let draws = impute_column(&pair, probe.view(), seed)?;
        println!("draw {seed}: {:?}  (means -1.6, 0.0, 1.6)", draws.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
    Ok(())
}
