//! Numeric CSV ingestion.

use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Dataset, Design};

/// A header row plus numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|k| self.columns[k].as_slice())
    }
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv_from(file)
}

/// Parses a CSV with a header row. Every cell must be a finite number;
/// row numbers in errors count data rows from 1.
pub fn read_csv_from<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().any(String::is_empty) {
        return Err(Error::Parse {
            row: 0,
            column: String::new(),
            message: "header row has empty column names".into(),
        });
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        for (k, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: headers[k].clone(),
                message: format!("'{cell}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[k].clone(),
                    message: format!("non-finite value {cell}"),
                });
            }
            columns[k].push(value);
        }
    }
    Ok(Table { headers, columns })
}

/// Regresses `response` on `predictors` (every other column when `None`).
pub fn dataset_from_table(
    table: &Table,
    response: &str,
    predictors: Option<&[String]>,
    intercept: bool,
) -> Result<Dataset> {
    let y = table
        .column(response)
        .ok_or_else(|| Error::InvalidInput(format!("response column '{response}' not found")))?;
    let names: Vec<String> = match predictors {
        Some(list) => list.to_vec(),
        None => table.headers.iter().filter(|h| *h != response).cloned().collect(),
    };
    if names.is_empty() {
        return Err(Error::InvalidInput("no predictor columns".into()));
    }
    let n = table.rows();
    let mut x = DMatrix::zeros(n, names.len());
    for (j, name) in names.iter().enumerate() {
        let col = table
            .column(name)
            .ok_or_else(|| Error::InvalidInput(format!("predictor column '{name}' not found")))?;
        x.set_column(j, &DVector::from_column_slice(col));
    }
    let design = if intercept {
        Design::with_intercept(x, names)?
    } else {
        Design::new(x, names, crate::model::InterceptPolicy::None)?
    };
    Dataset::new(Arc::new(design), DVector::from_column_slice(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds_a_dataset() {
        let text = "y, a ,b\n1,2,3\n2,0.5,1e1\n3,1,0\n4,7,2\n";
        let t = read_csv_from(text.as_bytes()).unwrap();
        assert_eq!(t.headers, ["y", "a", "b"]);
        assert_eq!(t.column("b").unwrap(), &[3.0, 10.0, 0.0, 2.0]);
        let d = dataset_from_table(&t, "y", None, true).unwrap();
        assert_eq!(d.design().column_names(), ["(Intercept)", "a", "b"]);
        assert_eq!(d.y().as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn reports_row_and_column() {
        let err = read_csv_from("y,a\n1,2\n3,oops\n".as_bytes()).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                row: 2,
                column: "a".into(),
                message: "'oops' is not a number".into()
            }
        );
        assert!(matches!(read_csv_from("y,a\n1,2,3\n".as_bytes()), Err(Error::Parse { row: 1, .. })));
        assert!(matches!(read_csv_from("y,a\n1,NaN\n".as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_columns() {
        let t = read_csv_from("y,a\n1,2\n2,3\n3,5\n".as_bytes()).unwrap();
        assert!(dataset_from_table(&t, "z", None, false).is_err());
        assert!(dataset_from_table(&t, "y", Some(&["q".to_string()]), false).is_err());
    }
}
