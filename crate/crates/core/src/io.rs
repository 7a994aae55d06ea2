//! CSV ingestion with schema inference, and CSV writers for matrices and masks.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnSchema, ColumnType, DataMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnHint {
    Continuous,
    Binary,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaHints {
    /// Forced kinds by column name.
    pub columns: HashMap<String, ColumnHint>,
    /// Cell contents read as missing (after trimming whitespace).
    pub missing_tokens: Vec<String>,
}

impl Default for SchemaHints {
    fn default() -> Self {
        SchemaHints {
            columns: HashMap::new(),
            missing_tokens: vec!["".into(), "NA".into(), "NaN".into()],
        }
    }
}

pub fn read_csv(path: &Path, hints: &SchemaHints) -> Result<DataMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let dm = read_csv_from(file, hints)?;
    info!(
        "read {} rows × {} columns from {}",
        dm.n_rows(),
        dm.n_cols(),
        path.display()
    );
    Ok(dm)
}

/// Parses CSV text with a header row. Kinds are inferred per column unless
/// hinted: all observed cells numeric → continuous; exactly two distinct
/// non-numeric levels → binary; otherwise categorical.
pub fn read_csv_from<R: Read>(reader: R, hints: &SchemaHints) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    if header.is_empty() {
        return Err(Error::Parse {
            line: 1,
            detail: "missing header row".into(),
        });
    }
    let p = header.len();

    let mut cells: Vec<Option<String>> = Vec::new();
    let mut n_rows = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |pos| pos.line());
        if rec.len() != p {
            return Err(Error::Parse {
                line,
                detail: format!("expected {p} fields, found {}", rec.len()),
            });
        }
        for field in rec.iter() {
            let t = field.trim();
            cells.push(if hints.missing_tokens.iter().any(|m| m == t) {
                None
            } else {
                Some(t.to_owned())
            });
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::EmptyInput);
    }

    let mut columns = Vec::with_capacity(p);
    let mut values = vec![f64::NAN; n_rows * p];
    for (j, name) in header.iter().enumerate() {
        let observed: Vec<(usize, &str)> = (0..n_rows)
            .filter_map(|r| cells[r * p + j].as_deref().map(|s| (r, s)))
            .collect();
        let all_numeric = observed.iter().all(|(_, s)| s.parse::<f64>().map_or(false, f64::is_finite));
        let levels: BTreeSet<&str> = observed.iter().map(|(_, s)| *s).collect();

        let hint = hints.columns.get(name).copied();
        let ty = match hint {
            Some(ColumnHint::Continuous) => ColumnType::Continuous,
            Some(ColumnHint::Binary) => {
                if levels.len() != 2 {
                    return Err(Error::Parse {
                        line: 1,
                        detail: format!("column `{name}` is hinted binary but has {} levels", levels.len()),
                    });
                }
                binary_type(&levels)
            }
            Some(ColumnHint::Categorical) => categorical_type(&levels),
            None if all_numeric => ColumnType::Continuous,
            None if levels.len() == 2 => binary_type(&levels),
            None => categorical_type(&levels),
        };

        for &(r, s) in &observed {
            values[r * p + j] = match ty.levels() {
                None => s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                    line: r as u64 + 2,
                    detail: format!("column `{name}`: `{s}` is not a finite number"),
                })?,
                Some(lv) => lv.iter().position(|l| l == s).expect("level collected above") as f64,
            };
        }
        columns.push(ColumnSchema {
            name: name.clone(),
            ty,
        });
    }

    let dm = DataMatrix::new(columns, n_rows, values)?;
    for j in 0..dm.n_cols() {
        log::debug!(
            "column `{}`: {:?}, {:.1}% missing",
            dm.columns()[j].name,
            dm.columns()[j].ty.kind(),
            100.0 * dm.missing_fraction(j)
        );
    }
    Ok(dm)
}

fn binary_type(levels: &BTreeSet<&str>) -> ColumnType {
    let mut it = levels.iter();
    ColumnType::Binary {
        levels: [
            it.next().expect("two levels").to_string(),
            it.next().expect("two levels").to_string(),
        ],
    }
}

fn categorical_type(levels: &BTreeSet<&str>) -> ColumnType {
    ColumnType::Categorical {
        levels: levels.iter().map(|s| s.to_string()).collect(),
    }
}

/// Writes the matrix with a header row. Missing cells are written empty,
/// numbers in shortest round-trip form, levels by label.
pub fn write_csv_to<W: Write>(dm: &DataMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(dm.columns().iter().map(|c| c.name.as_str()))?;
    for r in 0..dm.n_rows() {
        w.write_record((0..dm.n_cols()).map(|j| dm.display_cell(r, j).unwrap_or_default()))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_csv(dm: &DataMatrix, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(dm, std::io::BufWriter::new(f))
}

/// 0/1 mask file with the same header as the data (1 = missing).
pub fn write_mask_csv(mask: &[bool], names: &[String], path: &Path) -> Result<()> {
    let p = names.len();
    if p == 0 || mask.len() % p != 0 {
        return Err(Error::Shape("mask does not divide into the named columns".into()));
    }
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(f));
    w.write_record(names)?;
    for row in mask.chunks(p) {
        w.write_record(row.iter().map(|&m| if m { "1" } else { "0" }))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_mask_csv(path: &Path) -> Result<(Vec<String>, Vec<bool>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut mask = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() {
            return Err(Error::Parse {
                line,
                detail: format!("expected {} fields, found {}", names.len(), rec.len()),
            });
        }
        for f in rec.iter() {
            mask.push(match f.trim() {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::Parse {
                        line,
                        detail: format!("mask cell `{other}` is not 0 or 1"),
                    })
                }
            });
        }
    }
    Ok((names, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Cell;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<DataMatrix> {
        read_csv_from(text.as_bytes(), &SchemaHints::default())
    }

    #[test]
    fn parses_missing_tokens() {
        let dm = parse("a,b\n1.5,NA\n2.0,3.0\n").unwrap();
        assert_eq!((dm.n_rows(), dm.n_cols()), (2, 2));
        assert_eq!(dm.total_missing(), 1);
        assert_eq!(dm.get(0, 1), Cell::Missing);
        assert_eq!(dm.get(1, 1), Cell::Observed(3.0));
    }

    #[test]
    fn infers_binary_from_two_text_levels() {
        let dm2 = parse("flag,x\nyes,1\nno,2\n,3\n").unwrap();
        assert_eq!(
            dm2.columns()[0].ty,
            ColumnType::Binary {
                levels: ["no".into(), "yes".into()]
            }
        );
        assert_eq!(dm2.missing_count(0), 1);
        assert_eq!(dm2.value(0, 0), 1.0);
    }

    #[test]
    fn infers_categorical_and_respects_hints() {
        let dm = parse("c\nred\ngreen\nblue\n").unwrap();
        assert!(matches!(dm.columns()[0].ty, ColumnType::Categorical { ref levels } if levels.len() == 3));

        let mut hints = SchemaHints::default();
        hints.columns.insert("c".into(), ColumnHint::Categorical);
        let dm = read_csv_from("c\n1\n2\n1\n".as_bytes(), &hints).unwrap();
        assert!(matches!(dm.columns()[0].ty, ColumnType::Categorical { ref levels } if levels == &["1", "2"]));
    }

    #[test]
    fn ragged_row_reports_line() {
        match parse("a,b\n1,2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty_input() {
        assert!(matches!(parse("a,b\n"), Err(Error::EmptyInput)));
    }

    #[test]
    fn writes_empty_cells_for_missing() {
        let dm = parse("a,b\n1.5,NA\n2,3.25\n").unwrap();
        let mut buf = Vec::new();
        write_csv_to(&dm, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.5,\n2,3.25\n");
    }

    #[test]
    fn quoted_fields_round_trip() {
        let text = "name,v\n\"a, b\",1\nplain,2\n\"a, b\",\n";
        let dm = parse(text).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&dm, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn mask_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.csv");
        let names = vec!["a".to_string(), "b".to_string()];
        let mask = vec![true, false, false, true];
        write_mask_csv(&mask, &names, &path).unwrap();
        assert_eq!(read_mask_csv(&path).unwrap(), (names, mask));
    }

    proptest! {
        #[test]
        fn numeric_round_trip_is_exact(
            vals in proptest::collection::vec(proptest::option::weighted(0.8, -1e9f64..1e9), 2..30),
        ) {
            let n = vals.len() / 2;
            prop_assume!(n >= 1);
            let flat: Vec<f64> = vals[..n * 2].iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            let dm = DataMatrix::from_continuous("x", n, 2, flat).unwrap();
            let mut buf = Vec::new();
            write_csv_to(&dm, &mut buf).unwrap();
            let mut hints = SchemaHints::default();
            hints.columns.insert("x1".into(), ColumnHint::Continuous);
            hints.columns.insert("x2".into(), ColumnHint::Continuous);
            let back = read_csv_from(buf.as_slice(), &hints).unwrap();
            prop_assert_eq!(back, dm);
        }
    }
}
