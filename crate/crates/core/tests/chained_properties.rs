use gcmi::chained::{gcmi_impute, order_columns, GcmiConfig};
use gcmi::{ColumnSchema, ColumnType, DataMatrix};
use proptest::prelude::*;

fn tiny_cfg(seed: u64) -> GcmiConfig {
    let mut cfg = GcmiConfig {
        max_chain_iters: 2,
        m_imputations: 2,
        min_observed_rows: 3,
        seed,
        ..GcmiConfig::default()
    };
    cfg.train.max_epochs = 2;
    cfg.train.gen_iters_per_cycle = 3;
    cfg.train.disc_iters_per_cycle = 1;
    cfg.train.hidden_dims = Some(vec![4]);
    cfg.train.noise_dim = 2;
    cfg
}

// Continuous column, binary column, then a three-level column.
fn matrix(cells: &[(f64, bool)], n: usize) -> DataMatrix {
    let columns = vec![
        ColumnSchema::continuous("x"),
        ColumnSchema {
            name: "b".into(),
            ty: ColumnType::Binary {
                levels: ["f".into(), "t".into()],
            },
        },
        ColumnSchema {
            name: "k".into(),
            ty: ColumnType::Categorical {
                levels: vec!["r".into(), "g".into(), "b".into()],
            },
        },
    ];
    let values = cells
        .iter()
        .enumerate()
        .map(|(i, &(v, drop))| {
            // The first two rows stay observed so no column is empty.
            if drop && i >= 6 {
                f64::NAN
            } else {
                match i % 3 {
                    0 => v,
                    1 => (v > 0.0) as u8 as f64,
                    _ => ((v.abs() * 3.0) as usize % 3) as f64,
                }
            }
        })
        .collect();
    DataMatrix::new(columns, n, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn imputation_contracts(
        n in 8usize..20,
        raw in proptest::collection::vec((-2.0f64..2.0, proptest::bool::weighted(0.25)), 60),
        seed in any::<u64>(),
    ) {
        let dm = matrix(&raw[..3 * n], n);
        let cfg = tiny_cfg(seed);
        let res = gcmi_impute(&dm, &cfg).unwrap();
        prop_assert_eq!(res.completed.len(), 2);
        for done in &res.completed {
            prop_assert!(done.is_complete());
            let kept = (0..dm.values().len())
                .filter(|&i| !dm.mask()[i])
                .all(|i| dm.values()[i].to_bits() == done.values()[i].to_bits());
            prop_assert!(kept);
        }
        for t in &res.traces {
            prop_assert!(t.sweeps.len() <= cfg.max_chain_iters);
            for g in &t.sweeps {
                prop_assert!(g.gamma_num >= 0.0);
                prop_assert!((0.0..=1.0).contains(&g.gamma_cat));
            }
        }
    }

    #[test]
    fn ordering_is_by_missing_fraction(
        n in 8usize..20,
        raw in proptest::collection::vec((-2.0f64..2.0, proptest::bool::weighted(0.3)), 60),
    ) {
        let dm = matrix(&raw[..3 * n], n);
        let order = order_columns(&dm);
        let fractions: Vec<f64> = order.iter().map(|&j| dm.missing_fraction(j)).collect();
        prop_assert!(fractions.windows(2).all(|w| w[0] <= w[1]));
    }
}
