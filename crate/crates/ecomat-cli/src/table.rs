//! Consumption-table ingestion.
//!
//! Format: a header row `product,<label_1>,...,<label_d>` followed by `d`
//! data rows `label_i,a_i1,...,a_id`. Row `i` lists the amounts consumed to
//! produce one unit of product `i`. Values are decimal strings and are
//! parsed as exact fractions, so `0.14` means 14/100 in rational runs.

use std::path::{Path, PathBuf};

use ecomat::numeric::{format_exact_decimal, parse_decimal, Rational};
use ecomat::{Error, StructureMatrix};
use ecomat::num::Zero;

#[derive(Debug, Clone)]
pub struct TableFile {
    #[allow(dead_code)]
    pub path: PathBuf,
    pub labels: Vec<String>,
    pub dim: usize,
    pub matrix: StructureMatrix,
}

pub fn parse_table(path: &Path) -> Result<TableFile, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let (labels, matrix) = parse_table_str(&text)?;
    Ok(TableFile {
        path: path.to_path_buf(),
        dim: labels.len(),
        labels,
        matrix,
    })
}

pub fn parse_table_str(text: &str) -> Result<(Vec<String>, StructureMatrix), Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("row {}: {e}", idx + 1)))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Parse("empty table file".into()));
    }
    let header = &records[0];
    if header.get(0).map(|f| f.to_ascii_lowercase()) != Some("product".into()) {
        return Err(Error::Parse(
            "row 1: header must start with 'product' followed by the labels".into(),
        ));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let d = labels.len();
    if d == 0 {
        return Err(Error::Parse("row 1: header lists no products".into()));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Parse(format!("row 1, column {}: duplicate label {l:?}", i + 2)));
        }
    }
    let data = &records[1..];
    if data.len() != d {
        return Err(Error::Parse(format!(
            "expected {d} data rows for {d} products, found {}",
            data.len()
        )));
    }
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(d);
    for (i, rec) in data.iter().enumerate() {
        let row_no = i + 2;
        if rec.len() != d + 1 {
            return Err(Error::Parse(format!(
                "row {row_no}: has {} values, expected label plus {d} entries",
                rec.len()
            )));
        }
        let label = rec.get(0).unwrap_or_default();
        if label != labels[i] {
            return Err(Error::Parse(format!(
                "row {row_no}: label {label:?} does not match header label {:?}",
                labels[i]
            )));
        }
        let mut row = Vec::with_capacity(d);
        for (j, field) in rec.iter().skip(1).enumerate() {
            let value = parse_decimal(field).map_err(|e| {
                Error::Parse(format!("row {row_no}, column {}: {e}", j + 2))
            })?;
            if value < Rational::zero() {
                return Err(Error::Parse(format!(
                    "row {row_no}, column {}: negative entry {field}",
                    j + 2
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    let matrix = StructureMatrix::from_rational_rows(labels.clone(), rows)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok((labels, matrix))
}

/// Serializes a matrix back to the table format. In exact mode entries are
/// written as their exact decimal expansions (every table that parsed came
/// from decimals, so one exists); in float mode the shortest
/// round-trippable decimal of the double value is used.
#[allow(dead_code)] // exercised by the round-trip tests
pub fn write_table_string(m: &StructureMatrix, float_mode: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["product".to_string()];
    header.extend(m.labels().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for i in 0..m.dim() {
        let mut row = vec![m.labels()[i].clone()];
        for j in 0..m.dim() {
            let cell = if float_mode {
                format!("{}", m.entry_f64(i, j))
            } else {
                format_exact_decimal(m.entry(i, j))
                    .unwrap_or_else(|| format!("{}", m.entry(i, j)))
            };
            row.push(cell);
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
