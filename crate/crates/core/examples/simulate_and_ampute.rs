//! Draw equicorrelated covariates and delete cells under each mechanism.
//!
//! cargo run --example simulate_and_ampute

use gcmi::lab::{ampute_matrix, gen_synthetic, AmputationSpec, MaskLayout, Mechanism, SyntheticSpec};

fn main() -> gcmi::Result<()> {
    let data = gen_synthetic(&SyntheticSpec {
        n: 1000,
        p: 6,
        seed: 7,
        ..SyntheticSpec::default()
    })?;
    let dm = data.with_outcome();
    println!("{} rows, columns {:?}", dm.n_rows(), dm.column_names());

    let mechanisms = [
        Mechanism::Mcar { p: 0.3 },
        Mechanism::Mar {
            beta: None,
            cond_cols: vec![0, 1],
            target_cols: None,
        },
        Mechanism::Mnar { b0: 0.1, b1: 0.3 },
    ];
    for mechanism in mechanisms {
        let spec = AmputationSpec {
            mechanism,
            seed: 11,
            ..AmputationSpec::default()
        };
        let (amputed, _) = ampute_matrix(&dm, &spec)?;
        let per_col: Vec<String> = (0..amputed.n_cols())
            .map(|j| format!("{:.2}", amputed.missing_fraction(j)))
            .collect();
        println!("{:<28} missing per column: {}", spec.mechanism.label(), per_col.join(" "));
    }

    // Blocks of columns that disappear together, e.g. a lab panel.
    let spec = AmputationSpec {
        mechanism: Mechanism::Mcar { p: 0.2 },
        layout: MaskLayout::Blockwise {
            blocks: vec![vec![0, 1, 2], vec![3, 4]],
        },
        seed: 12,
        ..AmputationSpec::default()
    };
    let (amputed, _) = ampute_matrix(&dm, &spec)?;
    let both = (0..amputed.n_rows())
        .filter(|&r| amputed.is_missing(r, 0) && amputed.is_missing(r, 2))
        .count();
    println!("blockwise: {} rows lost column 0, {both} of them also lost column 2", amputed.missing_count(0));
    Ok(())
}
