//! Labelled training samples and their CSV form.
//!
//! Class labels are 1-based (`1..=K`), matching the CSV files this crate reads
//! and writes. A binary problem uses labels `1` and `2`.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Feature points in `d` dimensions with class labels.
///
/// Points are stored row-major in a single buffer; [`LabeledDataset::point`]
/// hands out a slice per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    coords: Vec<f64>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    /// Builds a dataset from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        if labels.is_empty() {
            return Err(Error::input("dataset must contain at least one sample"));
        }
        if coords.len() != dim * labels.len() {
            return Err(Error::input(format!(
                "coordinate buffer has {} values, expected {} x {}",
                coords.len(),
                labels.len(),
                dim
            )));
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite coordinate in sample {}",
                pos / dim + 1
            )));
        }
        if let Some(pos) = labels.iter().position(|&l| l == 0) {
            return Err(Error::input(format!(
                "label of sample {} is 0; labels are 1-based",
                pos + 1
            )));
        }
        let classes = labels.iter().copied().max().unwrap_or(1).max(2);
        Ok(Self {
            dim,
            coords,
            labels,
            classes,
        })
    }

    /// Builds a dataset from one vector per sample.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::input(format!(
                "row {} has {} coordinates, expected {}",
                bad + 1,
                rows[bad].len(),
                dim
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::input(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Self::from_flat(dim, rows.concat(), labels)
    }

    /// Declares the number of classes explicitly (at least the largest label).
    pub fn with_classes(mut self, classes: usize) -> Result<Self> {
        let max = self.labels.iter().copied().max().unwrap_or(1);
        if classes < max {
            return Err(Error::input(format!(
                "{classes} classes declared but label {max} present"
            )));
        }
        self.classes = classes;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of classes `K`; at least 2.
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Returns a copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Reads `d` feature columns followed by one integer label column.
    pub fn read_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Self::from_csv_reader(file, has_header)
    }

    pub fn from_csv_reader<R: Read>(reader: R, has_header: bool) -> Result<Self> {
        let table = read_numeric_table(reader, has_header)?;
        let width = table.width;
        if width < 2 {
            return Err(Error::input(
                "dataset CSV needs at least one feature column and a label column",
            ));
        }
        let dim = width - 1;
        let mut coords = Vec::with_capacity(table.rows.len() * dim);
        let mut labels = Vec::with_capacity(table.rows.len());
        for (row_no, row) in table.rows.iter().enumerate() {
            coords.extend_from_slice(&row[..dim]);
            labels.push(parse_label(row[dim], row_no + 1)?);
        }
        Self::from_flat(dim, coords, labels)
    }

    /// Writes the dataset in the same layout [`LabeledDataset::read_csv`] expects.
    pub fn write_csv(&self, path: impl AsRef<Path>, header: bool) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path.as_ref())?;
        if header {
            let mut names: Vec<String> = (1..=self.dim).map(|j| format!("x{j}")).collect();
            names.push("label".to_string());
            wtr.write_record(&names)?;
        }
        for (x, &y) in self.points().zip(&self.labels) {
            let mut rec: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
            rec.push(y.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn parse_label(v: f64, row: usize) -> Result<usize> {
    if v < 1.0 || v.fract() != 0.0 {
        return Err(Error::input(format!(
            "row {row}: label {v} is not a positive integer"
        )));
    }
    Ok(v as usize)
}

/// A rectangular table of floats read from CSV.
pub(crate) struct NumericTable {
    pub width: usize,
    pub rows: Vec<Vec<f64>>,
}

pub(crate) fn read_numeric_table<R: Read>(reader: R, has_header: bool) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut width = None;
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row: Vec<f64> = rec
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    Error::input(format!("row {}: cannot parse '{field}' as a number", idx + 1))
                })
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::input(format!(
                    "row {} has {} columns, expected {w}",
                    idx + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    let width = width.ok_or_else(|| Error::input("CSV contains no data rows"))?;
    Ok(NumericTable { width, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let text = "x1,x2,label\n0.5,1.0,1\n-2,3e-1,2\n";
        let ds = LabeledDataset::from_csv_reader(text.as_bytes(), true).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.point(1), &[-2.0, 0.3]);
        assert_eq!(ds.labels(), &[1, 2]);

        let bare = "0.5,1.0,1\n-2,3e-1,2\n";
        let ds2 = LabeledDataset::from_csv_reader(bare.as_bytes(), false).unwrap();
        assert_eq!(ds, ds2);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(LabeledDataset::from_csv_reader("1,2,1\n1,2\n".as_bytes(), false).is_err());
        assert!(LabeledDataset::from_csv_reader("1,2,0\n".as_bytes(), false).is_err());
        assert!(LabeledDataset::from_csv_reader("1,2,1.5\n".as_bytes(), false).is_err());
        assert!(LabeledDataset::from_csv_reader("1,nan,1\n".as_bytes(), false).is_err());
        assert!(LabeledDataset::from_csv_reader("".as_bytes(), false).is_err());
    }

    #[test]
    fn class_count_is_at_least_two() {
        let ds = LabeledDataset::from_rows(&[vec![0.0]], vec![1]).unwrap();
        assert_eq!(ds.classes(), 2);
        let ds = LabeledDataset::from_rows(&[vec![0.0], vec![1.0]], vec![1, 3]).unwrap();
        assert_eq!(ds.classes(), 3);
        assert!(ds.clone().with_classes(2).is_err());
        assert_eq!(ds.with_classes(5).unwrap().classes(), 5);
    }

    #[test]
    fn csv_round_trip() {
        let ds = LabeledDataset::from_rows(&[vec![0.1, -3.25], vec![1e-9, 7.0]], vec![2, 1])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        ds.write_csv(&path, true).unwrap();
        assert_eq!(LabeledDataset::read_csv(&path, true).unwrap(), ds);
    }
}
