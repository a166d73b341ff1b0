use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRole {
    Train,
    Test,
}

impl fmt::Display for SplitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitRole::Train => "train",
            SplitRole::Test => "test",
        })
    }
}

impl FromStr for SplitRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitRole::Train),
            "test" => Ok(SplitRole::Test),
            other => Err(Error::InvalidParameter(format!(
                "split role must be 'train' or 'test', got '{other}'"
            ))),
        }
    }
}

/// Train/test partition of the rows `0..n`.
///
/// `train` keeps the order in which rows were selected; `test` is ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn n_rows(&self) -> usize {
        self.train.len() + self.test.len()
    }

    /// Checks that `train` and `test` partition `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.test) {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "split index {i} out of range for {n} rows"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!(
                    "split index {i} appears twice"
                )));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "row {missing} is in neither train nor test"
            )));
        }
        Ok(())
    }

    /// Writes `index,role` rows: training rows in selection order, then test rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| to_io(path, e))?;
        w.write_record(["index", "role"])
            .map_err(|e| to_io(path, e))?;
        let rows = self
            .train
            .iter()
            .map(|&i| (i, SplitRole::Train))
            .chain(self.test.iter().map(|&i| (i, SplitRole::Test)));
        for (i, role) in rows {
            w.write_record([i.to_string(), role.to_string()])
                .map_err(|e| to_io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<SplitIndices> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| to_io(path, e))?;
        let mut split = SplitIndices {
            train: Vec::new(),
            test: Vec::new(),
        };
        for rec in r.records() {
            let rec = rec.map_err(|e| to_io(path, e))?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let bad = |message: String| Error::Csv {
                path: path.to_owned(),
                row: line,
                message,
            };
            if rec.len() != 2 {
                return Err(bad(format!("expected 2 fields, found {}", rec.len())));
            }
            let index: usize = rec[0]
                .parse()
                .map_err(|_| bad(format!("invalid index '{}'", &rec[0])))?;
            let role: SplitRole = rec[1].parse().map_err(|e: Error| bad(e.to_string()))?;
            match role {
                SplitRole::Train => split.train.push(index),
                SplitRole::Test => split.test.push(index),
            }
        }
        let n = split.n_rows();
        split.validate(n)?;
        Ok(split)
    }
}

fn to_io(path: &Path, e: csv::Error) -> Error {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => Error::Csv {
            path: path.to_owned(),
            row: 0,
            message,
        },
    }
}

/// Number of training rows for `n` rows: `⌈fraction·n⌉`, at least 2.
///
/// Products within 1e-9 of an integer are snapped first so that, e.g.,
/// `2/3 · 396` gives 264 despite binary rounding of `2/3`.
pub fn train_size(n: usize, train_fraction: f64) -> Result<usize> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1], got {train_fraction}"
        )));
    }
    let raw = train_fraction * n as f64;
    let size = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    } as usize;
    Ok(size.clamp(2, n))
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Kennard–Stone max–min selection of training rows.
///
/// Starts from the farthest pair (lower index first) and repeatedly adds the
/// unselected row whose distance to its nearest selected row is largest.
/// Ties go to the lower row index.
pub fn kennard_stone_split(x: ArrayView2<f64>, train_fraction: f64) -> Result<SplitIndices> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "Kennard–Stone needs at least 2 rows, got {n}"
        )));
    }
    let k = train_size(n, train_fraction)?;

    let (mut first, mut second, mut best) = (0, 1, f64::NEG_INFINITY);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sq_dist(x.row(i), x.row(j));
            if d > best {
                (first, second, best) = (i, j, d);
            }
        }
    }

    let mut selected = vec![false; n];
    let mut train = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    for pick in [first, second] {
        selected[pick] = true;
        train.push(pick);
    }
    for i in (0..n).filter(|&i| !selected[i]) {
        nearest[i] = sq_dist(x.row(i), x.row(first)).min(sq_dist(x.row(i), x.row(second)));
    }

    while train.len() < k {
        let mut pick = usize::MAX;
        let mut far = f64::NEG_INFINITY;
        for i in (0..n).filter(|&i| !selected[i]) {
            if nearest[i] > far {
                far = nearest[i];
                pick = i;
            }
        }
        selected[pick] = true;
        train.push(pick);
        for i in (0..n).filter(|&i| !selected[i]) {
            let d = sq_dist(x.row(i), x.row(pick));
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
    }

    let test = (0..n).filter(|&i| !selected[i]).collect();
    Ok(SplitIndices { train, test })
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn farthest_pair_first() {
        let x = array![[0.0], [1.0], [10.0]];
        let s = kennard_stone_split(x.view(), 2.0 / 3.0).unwrap();
        assert_eq!(s.train, vec![0, 2]);
        assert_eq!(s.test, vec![1]);
    }

    #[test]
    fn full_fraction() {
        let x = array![[0.0, 1.0], [1.0, 3.0], [10.0, -2.0], [4.0, 4.0]];
        let s = kennard_stone_split(x.view(), 1.0).unwrap();
        assert_eq!(s.train.len(), 4);
        assert!(s.test.is_empty());
        s.validate(4).unwrap();
    }

    #[test]
    fn two_rows_rounds_up() {
        let x = array![[0.0], [1.0]];
        let s = kennard_stone_split(x.view(), 0.5).unwrap();
        assert_eq!(s.train, vec![0, 1]);
        assert!(s.test.is_empty());
    }

    #[test]
    fn identical_rows_use_index_order() {
        let x = ndarray::Array2::<f64>::zeros((5, 3));
        let s = kennard_stone_split(x.view(), 0.6).unwrap();
        assert_eq!(s.train, vec![0, 1, 2]);
        assert_eq!(s.test, vec![3, 4]);
    }

    #[test]
    fn too_few_rows() {
        let x = array![[1.0]];
        assert!(kennard_stone_split(x.view(), 0.5).is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(train_size(396, 2.0 / 3.0).unwrap(), 264);
        assert_eq!(train_size(10, 0.25).unwrap(), 3);
        assert_eq!(train_size(300, 2.0 / 3.0).unwrap(), 200);
        assert!(train_size(10, 0.0).is_err());
        assert!(train_size(10, 1.5).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.csv");
        let s = SplitIndices {
            train: vec![4, 0, 2],
            test: vec![1, 3],
        };
        s.write_csv(&path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "index,role\n4,train\n0,train\n2,train\n1,test\n3,test\n"
        );
        assert_eq!(SplitIndices::read_csv(&path).unwrap(), s);
    }

    #[test]
    fn rejects_overlap() {
        let s = SplitIndices {
            train: vec![0, 1],
            test: vec![1],
        };
        assert!(s.validate(2).is_err());
    }
}
