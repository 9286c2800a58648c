//! CSV ingestion and emission for censored bivariate samples, and the curve
//! table writer.
//!
//! The sample schema is a header line `y1,y2,delta1,delta2` (extra columns
//! are ignored by name); values use a decimal point and no thousands
//! separators, deltas are exactly `0` or `1`. Floats are written with Rust's
//! shortest round-trip formatting, so a save/load cycle is bit-exact.

use crate::{CliError, CliResult};
use copfit_core::kendall::CurveTable;
use copfit_core::{Observation, Sample};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn load_csv(path: &Path) -> CliResult<Sample> {
    let file = fs::File::open(path)?;
    read_sample(BufReader::new(file))
}

pub fn read_sample<R: BufRead>(reader: R) -> CliResult<Sample> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((idx, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break (idx + 1, line);
            }
            None => {
                return Err(CliError::Csv { line: 0, message: "no observations".into() });
            }
        }
    };
    let columns: Vec<String> =
        header.1.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    let find = |name: &str| -> CliResult<usize> {
        columns.iter().position(|c| c == name).ok_or_else(|| CliError::Csv {
            line: header.0,
            message: format!("missing column `{name}`"),
        })
    };
    let (iy1, iy2, id1, id2) = (find("y1")?, find("y2")?, find("delta1")?, find("delta2")?);

    let mut observations = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        let field = |i: usize, name: &str| -> CliResult<&str> {
            fields.get(i).copied().ok_or_else(|| CliError::Csv {
                line: lineno,
                message: format!("missing value for `{name}`"),
            })
        };
        let parse_value = |i: usize, name: &str| -> CliResult<f64> {
            let raw = field(i, name)?;
            let v: f64 = raw.parse().map_err(|_| CliError::Csv {
                line: lineno,
                message: format!("`{name}` is not a number: `{raw}`"),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::Csv {
                    line: lineno,
                    message: format!("`{name}` must be finite and nonnegative, got `{raw}`"),
                });
            }
            Ok(v)
        };
        let parse_delta = |i: usize, name: &str| -> CliResult<bool> {
            match field(i, name)? {
                "0" => Ok(false),
                "1" => Ok(true),
                raw => Err(CliError::Csv {
                    line: lineno,
                    message: format!("`{name}` must be 0 or 1, got `{raw}`"),
                }),
            }
        };
        let y1 = parse_value(iy1, "y1")?;
        let y2 = parse_value(iy2, "y2")?;
        let d1 = parse_delta(id1, "delta1")?;
        let d2 = parse_delta(id2, "delta2")?;
        observations.push(Observation::new(y1, y2, d1, d2).map_err(|e| CliError::Csv {
            line: lineno,
            message: e.to_string(),
        })?);
    }
    if observations.is_empty() {
        return Err(CliError::Csv { line: header.0, message: "no observations".into() });
    }
    Ok(Sample::infer(observations)?)
}

pub fn save_csv(path: &Path, sample: &Sample) -> CliResult<()> {
    let mut out = String::from("y1,y2,delta1,delta2\n");
    for o in sample.observations() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            o.y1,
            o.y2,
            o.delta1 as u8,
            o.delta2 as u8
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the curve table as `nu,K_hat,lambda_hat,<family>_K,<family>_lambda,...`.
pub fn write_curves_csv(path: &Path, table: &CurveTable) -> CliResult<()> {
    let mut header = String::from("nu,K_hat,lambda_hat");
    for cand in &table.candidates {
        header.push_str(&format!(",{0}_K,{0}_lambda", cand.family.name()));
    }
    let mut out = header;
    out.push('\n');
    for i in 0..table.nu.len() {
        out.push_str(&format!("{},{},{}", table.nu[i], table.k_hat[i], table.lambda_hat[i]));
        for cand in &table.candidates {
            out.push_str(&format!(",{},{}", cand.k[i], cand.lambda[i]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a generator estimate as `nu,phi_hat`.
pub fn write_generator_csv(
    path: &Path,
    estimate: &copfit_core::GeneratorEstimate,
) -> CliResult<()> {
    let mut out = String::from("nu,phi_hat\n");
    for (nu, phi) in estimate.nu_grid().iter().zip(estimate.phi_values()) {
        out.push_str(&format!("{nu},{phi}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes generic study rows: a header plus comma-joined string rows.
pub fn write_table_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> CliResult<()> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_string(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use copfit_core::ScenarioHint;
    use std::io::Cursor;

    #[test]
    fn parses_well_formed_rows() {
        let csv = "y1,y2,delta1,delta2\n1.5,2.0,1,1\n0.5,3.25,0,1\n2.0,0.125,1,0\n";
        let s = read_sample(Cursor::new(csv)).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.hint(), ScenarioHint::DoubleCensored);
        assert_eq!(s.observations()[1].y2, 3.25);
        assert!(!s.observations()[1].delta1);
    }

    #[test]
    fn extra_columns_ignored_and_hint_inferred() {
        let csv = "id,y1,delta1,y2,delta2,note\n7,1.0,1,2.0,1,x\n8,2.0,1,1.0,1,y\n";
        let s = read_sample(Cursor::new(csv)).unwrap();
        assert_eq!(s.hint(), ScenarioHint::Complete);
    }

    #[test]
    fn rejects_non_binary_delta_with_line_number() {
        let csv = "y1,y2,delta1,delta2\n1.0,2.0,1,1\n1.0,2.0,2,1\n";
        match read_sample(Cursor::new(csv)) {
            Err(CliError::Csv { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("delta1"), "{message}");
            }
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_value_and_missing_column() {
        let csv = "y1,y2,delta1,delta2\n-1.0,2.0,1,1\n";
        assert!(matches!(read_sample(Cursor::new(csv)), Err(CliError::Csv { line: 2, .. })));
        let csv = "y1,delta1,delta2\n1.0,1,1\n";
        assert!(matches!(read_sample(Cursor::new(csv)), Err(CliError::Csv { line: 1, .. })));
    }

    #[test]
    fn empty_file_reports_no_observations() {
        let err = read_sample(Cursor::new("")).unwrap_err();
        assert!(err.to_string().contains("no observations"));
        let err = read_sample(Cursor::new("y1,y2,delta1,delta2\n")).unwrap_err();
        assert!(err.to_string().contains("no observations"));
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let pairs = [
            (0.1234567890123456f64, 7.0e-12, true, false),
            (1.0 / 3.0, 2.0f64.sqrt(), false, false),
            (9_999_999.25, 0.0, true, true),
        ];
        let sample = Sample::infer(
            pairs
                .iter()
                .map(|&(a, b, d1, d2)| Observation::new(a, b, d1, d2).unwrap())
                .collect(),
        )
        .unwrap();
        let dir = std::env::temp_dir().join("copfit-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("round_trip.csv");
        save_csv(&path, &sample).unwrap();
        let loaded = load_csv(&path).unwrap();
        assert_eq!(sample, loaded);
        for (a, b) in sample.observations().iter().zip(loaded.observations()) {
            assert_eq!(a.y1.to_bits(), b.y1.to_bits());
            assert_eq!(a.y2.to_bits(), b.y2.to_bits());
        }
    }
}
