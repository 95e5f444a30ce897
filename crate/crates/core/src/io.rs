//! Reading data matrices from CSV and writing path reports.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{ElassoError, Result};
use crate::path::ElassoPath;
use crate::spectra::DataMatrix;

/// Parses comma-separated numbers, one observation per row. A first row
/// that does not parse as numbers is taken as a header and skipped.
pub fn read_csv<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in csv.records().enumerate() {
        let record = record.map_err(|e| ElassoError::Parse(e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(ElassoError::Parse(format!(
                    "row {} has a non-numeric field: {:?}",
                    line + 1,
                    record.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    let q = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != q) {
        return Err(ElassoError::Parse(format!(
            "row {} has {} fields, expected {q}",
            i + 1,
            r.len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), q, &flat))
}

pub fn read_csv_file(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).map_err(|source| ElassoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file)
}

pub fn read_data(path: &Path) -> Result<DataMatrix> {
    DataMatrix::new(read_csv_file(path)?)
}

/// Serializable view of a path. Knots that never occur are `null`; merge
/// indices are 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub q: usize,
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
    pub knots: Vec<Option<f64>>,
    pub merge_indices: Vec<usize>,
    pub partitions: Vec<Vec<usize>>,
    pub lambda_at_knots: Vec<Vec<f64>>,
}

impl From<&ElassoPath> for PathReport {
    fn from(path: &ElassoPath) -> Self {
        Self {
            q: path.q(),
            eigenvalues: path.eigenvalues().to_vec(),
            weights: path.weights().as_slice().to_vec(),
            knots: path
                .knots()
                .iter()
                .map(|k| k.is_finite().then_some(*k))
                .collect(),
            merge_indices: path.merge_indices().iter().map(|i| i + 1).collect(),
            partitions: path.partitions().iter().map(|p| p.sizes().to_vec()).collect(),
            lambda_at_knots: path.lambda_at_knots(),
        }
    }
}

/// Formats a number so that parsing it back gives the same value.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Tidy `eta,index,lambda` rows at zero, at every finite knot and at each
/// extra tuning value, in increasing `eta`.
pub fn write_curve_csv<W: Write>(mut out: W, path: &ElassoPath, extra: &[f64]) -> Result<()> {
    let mut etas: Vec<f64> = std::iter::once(0.0)
        .chain(path.knots().iter().copied().filter(|k| k.is_finite()))
        .chain(extra.iter().copied())
        .collect();
    etas.sort_by(f64::total_cmp);
    etas.dedup();
    let io = |source| ElassoError::Io {
        path: "curve output".into(),
        source,
    };
    writeln!(out, "eta,index,lambda").map_err(io)?;
    for eta in etas {
        for (j, l) in path.solve_at(eta)?.iter().enumerate() {
            writeln!(out, "{},{},{}", format_number(eta), j + 1, format_number(*l)).map_err(io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::full_path;
    use crate::penalties::WeightVector;

    #[test]
    fn reads_with_and_without_header() {
        let m = read_csv("a,b\n1,2\n3, 4\n".as_bytes()).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        let m = read_csv("1,2\n3,4\n\n".as_bytes()).unwrap();
        assert_eq!(m.nrows(), 2);
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        assert!(read_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_csv("1,2\n3,x\n".as_bytes()).is_err());
    }

    #[test]
    fn report_shapes() {
        let a = WeightVector::new(vec![1.0, 0.0, -1.0]).unwrap();
        let path = full_path(&[6.0, 3.0, 1.0], &a).unwrap();
        let r = PathReport::from(&path);
        assert_eq!(r.partitions, vec![vec![1, 1, 1], vec![1, 2], vec![3]]);
        assert_eq!(r.merge_indices, vec![2, 1]);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"knots\":[0.6666666666666666,0.8]"), "{json}");
    }

    #[test]
    fn curve_rows_roundtrip() {
        let a = WeightVector::new(vec![1.0, 0.0, -1.0]).unwrap();
        let path = full_path(&[6.0, 3.0, 1.0], &a).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &path, &[0.5]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 4 * 3);
        let eta: f64 = lines[4].split(',').next().unwrap().parse().unwrap();
        assert_eq!(eta, 0.5);
        let third: f64 = (2.0f64 / 3.0).to_string().parse().unwrap();
        assert_eq!(format_number(third).parse::<f64>().unwrap(), third);
    }
}
