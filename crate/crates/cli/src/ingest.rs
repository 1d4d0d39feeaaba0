//! CSV ingestion: response column, numeric covariates, automatic intercept,
//! order-preserving category relabeling and optional standardization.

use crate::{CliError, CliResult};
use crlmix::OrdinalDataset;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Everything recorded about how a dataset was read, for the job manifest
/// and for grid construction in original units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestReport {
    /// Covariate column names in design order (intercept excluded).
    pub covariate_names: Vec<String>,
    /// Original category codes in ascending order; code at index `j`
    /// relabels to category `j + 1`.
    pub relabel_map: Vec<i64>,
    /// Per covariate `(mean, sd)` used for z-scoring, when enabled.
    pub standardization: Option<Vec<(f64, f64)>>,
    /// Observed `(min, max)` per covariate in original units.
    pub ranges: Vec<(f64, f64)>,
    /// Observed mean per covariate in original units.
    pub means: Vec<f64>,
}

impl IngestReport {
    /// Maps one original-unit covariate row (no intercept) into a design row.
    pub fn design_row(&self, raw: &[f64]) -> CliResult<Vec<f64>> {
        if raw.len() != self.covariate_names.len() {
            return Err(CliError::Data(format!(
                "expected {} covariates, got {}",
                self.covariate_names.len(),
                raw.len()
            )));
        }
        let mut row = Vec::with_capacity(raw.len() + 1);
        row.push(1.0);
        match &self.standardization {
            Some(ms) => {
                for (v, (m, s)) in raw.iter().zip(ms) {
                    row.push((v - m) / s);
                }
            }
            None => row.extend_from_slice(raw),
        }
        Ok(row)
    }

    /// Inverse of the standardization for reporting grid points.
    pub fn original_value(&self, col: usize, standardized: f64) -> f64 {
        match &self.standardization {
            Some(ms) => standardized * ms[col].1 + ms[col].0,
            None => standardized,
        }
    }
}

/// Reads a dataset CSV: a header row, one integer response column (named by
/// `y_column`), every other column a numeric covariate. Categories are
/// relabeled to contiguous `1..C` preserving order; the intercept column is
/// prepended automatically.
pub fn ingest_csv(path: &Path, y_column: &str, standardize: bool) -> CliResult<(OrdinalDataset, IngestReport)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header row: {e}")))?
        .clone();
    let y_idx = headers.iter().position(|h| h == y_column).ok_or_else(|| {
        CliError::Data(format!(
            "no column named '{y_column}' in {} (found: {})",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let covariate_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != y_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut raw_y: Vec<i64> = Vec::new();
    let mut raw_x: Vec<Vec<f64>> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("row {}: {e}", row_idx + 2)))?;
        let y_cell = record.get(y_idx).unwrap_or("");
        let y: i64 = y_cell.trim().parse().map_err(|_| {
            CliError::Data(format!(
                "row {}, column '{y_column}': expected an integer category, got '{y_cell}'",
                row_idx + 2
            ))
        })?;
        raw_y.push(y);
        let mut row = Vec::with_capacity(covariate_names.len());
        for (col_idx, cell) in record.iter().enumerate() {
            if col_idx == y_idx {
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::Data(format!(
                    "row {}, column '{}': expected a number, got '{cell}'",
                    row_idx + 2,
                    headers.get(col_idx).unwrap_or("?")
                ))
            })?;
            row.push(v);
        }
        raw_x.push(row);
    }
    if raw_y.is_empty() {
        return Err(CliError::Data(format!("{} contains no data rows", path.display())));
    }

    // order-preserving relabel to 1..C
    let mut relabel_map: Vec<i64> = raw_y.clone();
    relabel_map.sort_unstable();
    relabel_map.dedup();
    if relabel_map.len() < 2 {
        return Err(CliError::Data(format!(
            "response column '{y_column}' has a single category ({}); need at least two",
            relabel_map[0]
        )));
    }
    let y: Vec<usize> = raw_y
        .iter()
        .map(|v| relabel_map.binary_search(v).unwrap() + 1)
        .collect();
    let c = relabel_map.len();

    let k = covariate_names.len();
    let n = raw_x.len();
    let mut means = vec![0.0; k];
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); k];
    for row in &raw_x {
        for (j, &v) in row.iter().enumerate() {
            means[j] += v;
            ranges[j].0 = ranges[j].0.min(v);
            ranges[j].1 = ranges[j].1.max(v);
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }

    let standardization = if standardize && k > 0 {
        let mut ms = Vec::with_capacity(k);
        for j in 0..k {
            let var = raw_x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
            let sd = var.sqrt();
            if sd == 0.0 {
                return Err(CliError::Data(format!(
                    "covariate '{}' is constant; cannot standardize",
                    covariate_names[j]
                )));
            }
            ms.push((means[j], sd));
        }
        Some(ms)
    } else {
        None
    };

    let report = IngestReport { covariate_names, relabel_map, standardization, ranges, means };
    let rows: CliResult<Vec<Vec<f64>>> = raw_x.iter().map(|r| report.design_row(r)).collect();
    let dataset = OrdinalDataset::new(y, rows?, c)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok((dataset, report))
}

/// Writes a dataset back out in the ingestion schema (original units).
pub fn write_dataset_csv(
    path: &Path,
    dataset: &OrdinalDataset,
    report: &IngestReport,
) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))?;
    let mut header = vec!["y".to_string()];
    header.extend(report.covariate_names.iter().cloned());
    w.write_record(&header).map_err(|e| CliError::Data(e.to_string()))?;
    for i in 0..dataset.n() {
        let mut rec = vec![dataset.response(i).to_string()];
        for (j, v) in dataset.row(i).iter().skip(1).enumerate() {
            rec.push(format!("{}", report.original_value(j, *v)));
        }
        w.write_record(&rec).map_err(|e| CliError::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(name: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("crlmix-ingest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn three_row_file_reads_with_intercept() {
        let p = write_tmp("basic.csv", "y,x\n1,0.5\n2,-1.0\n3,2.5\n");
        let (data, report) = ingest_csv(&p, "y", false).unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.n_categories(), 3);
        assert_eq!(data.p(), 2);
        assert_eq!(data.row(0), &[1.0, 0.5]);
        assert_eq!(report.relabel_map, vec![1, 2, 3]);
    }

    #[test]
    fn sparse_codes_relabel_in_order() {
        let p = write_tmp("sparse.csv", "y,x\n5,0.0\n2,1.0\n9,2.0\n5,3.0\n");
        let (data, report) = ingest_csv(&p, "y", false).unwrap();
        assert_eq!(report.relabel_map, vec![2, 5, 9]);
        assert_eq!(data.responses(), &[2, 1, 3, 2]);
    }

    #[test]
    fn missing_y_column_is_schema_error() {
        let p = write_tmp("noy.csv", "outcome,x\n1,0.0\n");
        let err = ingest_csv(&p, "y", false).unwrap_err();
        assert!(matches!(&err, CliError::Data(msg) if msg.contains("'y'")), "{err}");
    }

    #[test]
    fn non_integer_y_and_non_numeric_covariate_errors_carry_location() {
        let p = write_tmp("bady.csv", "y,x\n1,0.0\n1.5,1.0\n");
        let err = ingest_csv(&p, "y", false).unwrap_err();
        assert!(matches!(&err, CliError::Data(msg) if msg.contains("row 3")), "{err}");

        let p = write_tmp("badx.csv", "y,x\n1,0.0\n2,oops\n");
        let err = ingest_csv(&p, "y", false).unwrap_err();
        assert!(matches!(&err, CliError::Data(msg) if msg.contains("row 3") && msg.contains("'x'")), "{err}");
    }

    #[test]
    fn single_category_and_empty_file_rejected() {
        let p = write_tmp("onecat.csv", "y,x\n2,0.0\n2,1.0\n");
        assert!(matches!(ingest_csv(&p, "y", false), Err(CliError::Data(_))));
        let p = write_tmp("empty.csv", "y,x\n");
        assert!(matches!(ingest_csv(&p, "y", false), Err(CliError::Data(_))));
    }

    #[test]
    fn standardization_round_trips() {
        let p = write_tmp("std.csv", "y,x1,x2\n1,0.0,10.0\n2,2.0,20.0\n3,4.0,60.0\n");
        let (data, report) = ingest_csv(&p, "y", true).unwrap();
        // standardized columns have mean 0
        let means = data.column_means();
        assert!(means[1].abs() < 1e-12 && means[2].abs() < 1e-12);
        // transform maps back to original units
        let row = report.design_row(&[2.0, 20.0]).unwrap();
        assert!((report.original_value(0, row[1]) - 2.0).abs() < 1e-12);
        assert!((report.original_value(1, row[2]) - 20.0).abs() < 1e-12);
    }
}
