use std::io::Read;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::HarnessError;
use crate::arith::{format_rational, parse_rational, round_to_integer, Rational};

/// Reads headerless numeric rows and converts them to fixed point:
/// every value is multiplied by `data_scale` and rounded to an integer.
pub fn ingest_csv<R: Read>(
    reader: R,
    dim: usize,
    data_scale: u64,
) -> Result<Vec<Vec<i64>>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let scale = Rational::from_integer(BigInt::from(data_scale));
    let mut out = Vec::new();
    let mut rounded = 0usize;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != dim {
            return Err(HarnessError::DimensionMismatch {
                line,
                expected: dim,
                actual: record.len(),
            });
        }
        let row = record
            .iter()
            .map(|field| {
                let value = parse_rational(field).map_err(|_| HarnessError::MalformedRow {
                    line,
                    reason: format!("{field:?} is not a number"),
                })?;
                let scaled = value * &scale;
                if !scaled.is_integer() {
                    rounded += 1;
                }
                round_to_integer(&scaled).to_i64().ok_or_else(|| {
                    HarnessError::MalformedRow {
                        line,
                        reason: format!("{field:?} overflows after scaling"),
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(row);
    }
    if rounded > 0 {
        log::warn!("{rounded} values needed more precision than scale {data_scale}; rounded");
    }
    Ok(out)
}

pub fn ingest_csv_path(
    path: impl AsRef<Path>,
    dim: usize,
    data_scale: u64,
) -> Result<Vec<Vec<i64>>, HarnessError> {
    ingest_csv(std::fs::File::open(path)?, dim, data_scale)
}

/// Inverse of [`ingest_csv`]: divides by `data_scale` and prints exact decimals.
pub fn format_csv(points: &[Vec<i64>], data_scale: u64) -> String {
    let scale = Rational::from_integer(BigInt::from(data_scale));
    let mut out = String::new();
    for p in points {
        let fields: Vec<String> = p
            .iter()
            .map(|&x| format_rational(&(Rational::from_integer(x.into()) / &scale)))
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
