use std::collections::HashSet;
use std::path::Path;

use log::warn;
use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// Numeric table with `n` instances, `f` input features and `d` targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array2<f64>,
    feature_names: Vec<String>,
    target_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        x: Array2<f64>,
        y: Array2<f64>,
        feature_names: Vec<String>,
        target_names: Vec<String>,
    ) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyTable("no rows".into()));
        }
        if x.ncols() == 0 {
            return Err(Error::EmptyTable("no feature columns".into()));
        }
        if y.ncols() == 0 {
            return Err(Error::EmptyTable("no target columns".into()));
        }
        if x.nrows() != y.nrows() {
            return Err(Error::shape(
                format!("{} target rows", x.nrows()),
                format!("{} target rows", y.nrows()),
            ));
        }
        if feature_names.len() != x.ncols() {
            return Err(Error::shape(
                format!("{} feature names", x.ncols()),
                feature_names.len(),
            ));
        }
        if target_names.len() != y.ncols() {
            return Err(Error::shape(
                format!("{} target names", y.ncols()),
                target_names.len(),
            ));
        }
        check_unique(&feature_names)?;
        check_unique(&target_names)?;
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "dataset contains NaN or infinite values".into(),
            ));
        }
        Ok(Dataset {
            x,
            y,
            feature_names,
            target_names,
        })
    }

    /// Builds a dataset with generated column names (`x0..`, `y0..`).
    pub fn from_arrays(x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        let features = (0..x.ncols()).map(|i| format!("x{i}")).collect();
        let targets = (0..y.ncols()).map(|i| format!("y{i}")).collect();
        Dataset::new(x, y, features, targets)
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array2<f64> {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_names(&self) -> &[String] {
        &self.target_names
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_targets(&self) -> usize {
        self.y.ncols()
    }

    /// Rows in the given order. Indices must be in range.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::InvalidParameter(format!(
                "row index {bad} out of range for {} rows",
                self.n_rows()
            )));
        }
        Dataset::new(
            self.x.select(Axis(0), rows),
            self.y.select(Axis(0), rows),
            self.feature_names.clone(),
            self.target_names.clone(),
        )
    }
}

fn check_unique(names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }
    Ok(())
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "NaN" | "nan" | "?")
}

/// Reads a comma-separated file with a header row.
///
/// Columns named in `target_names` become the targets, in that order; every
/// other column is a feature, in file order. Rows with a missing cell
/// (empty, `NA`, `NaN` or `?`) are dropped with a warning.
pub fn load_csv(path: impl AsRef<Path>, target_names: &[impl AsRef<str>]) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 1, e))?;

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, 1, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    check_unique(&header)?;

    let mut target_cols = Vec::with_capacity(target_names.len());
    for name in target_names {
        let name = name.as_ref();
        let col = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownTarget(name.to_owned()))?;
        if target_cols.contains(&col) {
            return Err(Error::DuplicateColumn(name.to_owned()));
        }
        target_cols.push(col);
    }
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|c| !target_cols.contains(c))
        .collect();

    let mut x_vals = Vec::new();
    let mut y_vals = Vec::new();
    let mut rows = 0usize;
    let mut dropped = 0usize;
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader
            .read_record(&mut record)
            .map_err(|e| csv_error(path, reader.position().line() as usize, e))?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != header.len() {
            return Err(Error::Csv {
                path: path.to_owned(),
                row: line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        if record.iter().any(is_missing) {
            dropped += 1;
            continue;
        }
        let parse = |col: usize| -> Result<f64> {
            let cell = &record[col];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::NonNumeric {
                    path: path.to_owned(),
                    row: line,
                    column: header[col].clone(),
                    value: cell.to_owned(),
                }),
            }
        };
        for &c in &feature_cols {
            x_vals.push(parse(c)?);
        }
        for &c in &target_cols {
            y_vals.push(parse(c)?);
        }
        rows += 1;
    }
    if dropped > 0 {
        warn!("{}: dropped {dropped} rows with missing values", path.display());
    }
    if rows == 0 {
        return Err(Error::EmptyTable(format!(
            "{}: no complete data rows",
            path.display()
        )));
    }

    let x = Array2::from_shape_vec((rows, feature_cols.len()), x_vals)
        .expect("row-major buffer matches shape");
    let y = Array2::from_shape_vec((rows, target_cols.len()), y_vals)
        .expect("row-major buffer matches shape");
    Dataset::new(
        x,
        y,
        feature_cols.iter().map(|&c| header[c].clone()).collect(),
        target_cols.iter().map(|&c| header[c].clone()).collect(),
    )
}

/// Reads the named columns of a CSV file, in the given order. Every cell
/// of those columns must be numeric; rows are never dropped so that the
/// result stays aligned with the file.
pub fn load_columns(path: impl AsRef<Path>, names: &[impl AsRef<str>]) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 1, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, 1, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let cols = names
        .iter()
        .map(|n| {
            let n = n.as_ref();
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::MissingColumn(n.to_owned()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut vals = Vec::new();
    let mut rows = 0usize;
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, rows + 2, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(rows + 2);
        for &c in &cols {
            let cell = rec.get(c).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => vals.push(v),
                _ => {
                    return Err(Error::NonNumeric {
                        path: path.to_owned(),
                        row: line,
                        column: header[c].clone(),
                        value: cell.to_owned(),
                    })
                }
            }
        }
        rows += 1;
    }
    Ok(Array2::from_shape_vec((rows, cols.len()), vals).expect("row-major buffer matches shape"))
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => Error::Csv {
            path: path.to_owned(),
            row,
            message,
        },
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn partitions_columns() {
        let f = write("a,b,t\n1,2,3\n4,5,6\n7,8,9\n");
        let ds = load_csv(f.path(), &["t"]).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_targets(), 1);
        assert_eq!(ds.feature_names(), ["a", "b"]);
        assert_eq!(ds.y()[[2, 0]], 9.0);
        assert_eq!(ds.x()[[1, 1]], 5.0);
    }

    #[test]
    fn targets_follow_requested_order() {
        let f = write("t1,a,t2\n1,2,3\n4,5,6\n");
        let ds = load_csv(f.path(), &["t2", "t1"]).unwrap();
        assert_eq!(ds.target_names(), ["t2", "t1"]);
        assert_eq!(ds.y()[[0, 0]], 3.0);
        assert_eq!(ds.y()[[0, 1]], 1.0);
    }

    #[test]
    fn unknown_target() {
        let f = write("a,b,t\n1,2,3\n");
        let err = load_csv(f.path(), &["z"]).unwrap_err();
        assert!(matches!(err, Error::UnknownTarget(ref n) if n == "z"));
        assert!(err.to_string().contains("unknown target"));
    }

    #[test]
    fn non_numeric_cell_is_located() {
        let f = write("a,b,t\n1,2,3\n4,abc,6\n");
        let err = load_csv(f.path(), &["t"]).unwrap_err();
        match err {
            Error::NonNumeric {
                row, column, value, ..
            } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_rows_dropped() {
        let f = write("a,t\n1,2\nNA,3\n4,\n5,6\n");
        let ds = load_csv(f.path(), &["t"]).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.x()[[1, 0]], 5.0);
    }

    #[test]
    fn empty_after_filtering() {
        let f = write("a,t\n?,1\n");
        assert!(matches!(
            load_csv(f.path(), &["t"]),
            Err(Error::EmptyTable(_))
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/nonexistent/data.csv", &["t"]).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn no_features_left() {
        let f = write("t\n1\n2\n");
        assert!(load_csv(f.path(), &["t"]).is_err());
    }

    #[test]
    fn duplicate_header() {
        let f = write("a,a,t\n1,2,3\n");
        assert!(matches!(
            load_csv(f.path(), &["t"]),
            Err(Error::DuplicateColumn(_))
        ));
    }
}
