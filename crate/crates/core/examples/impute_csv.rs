//! Impute a CSV with mixed column types and write the completions.
//!
//! cargo run --example impute_csv -- [input.csv] [out_dir]
//!
//! Without arguments a small mixed-type table is generated first.

use std::path::PathBuf;

use gcmi::chained::GcmiConfig;
use gcmi::io::{read_csv, SchemaHints};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn demo_csv(path: &std::path::Path) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut text = String::from("age,sex,ward,lactate\n");
    for _ in 0..200 {
        let age: f64 = rng.gen_range(20.0..90.0);
        let sex = if rng.gen_bool(0.5) { "F" } else { "M" };
        let ward = ["icu", "hdu", "gen"][rng.gen_range(0..3)];
        let lactate = 0.5 + 0.03 * age + rng.gen_range(-0.5..0.5) + if ward == "icu" { 1.5 } else { 0.0 };
        let cell = |s: String, rng: &mut ChaCha8Rng| if rng.gen_bool(0.15) { String::new() } else { s };
        let row = [
            cell(format!("{age:.1}"), &mut rng),
            cell(sex.into(), &mut rng),
            cell(ward.into(), &mut rng),
            cell(format!("{lactate:.2}"), &mut rng),
        ];
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out_dir = std::env::temp_dir().join("gcmi_impute_csv");
    let (input, out_dir) = match (args.next(), args.next()) {
        (Some(i), o) => (PathBuf::from(i), o.map(PathBuf::from).unwrap_or(out_dir)),
        (None, _) => {
            std::fs::create_dir_all(&out_dir)?;
            let p = out_dir.join("demo.csv");
            demo_csv(&p)?;
            (p, out_dir)
        }
    };

    let dm = read_csv(&input, &SchemaHints::default())?;
    for (j, c) in dm.columns().iter().enumerate() {
        println!("{:<10} {:?}  missing {:.0}%", c.name, c.ty.kind(), 100.0 * dm.missing_fraction(j));
    }

    let mut cfg = GcmiConfig {
        m_imputations: 3,
        seed: 2,
        ..GcmiConfig::default()
    };
    cfg.train.max_epochs = 200;
    let result = gcmi::chained::gcmi_impute(&dm, &cfg)?;
    for (k, t) in result.traces.iter().enumerate() {
        println!("chain {k}: {} sweeps, {:?}, kept sweep {:?}", t.sweeps.len(), t.stop_reason, t.retained_sweep);
    }
    let manifest = result.write_outputs(&out_dir, "imputed")?;
    println!("wrote {}", manifest.display());
    Ok(())
}
