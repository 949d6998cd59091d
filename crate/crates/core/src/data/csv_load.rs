use std::cmp::Ordering;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Reads a headered numeric CSV. Every column other than `label_column`
/// becomes a feature, in header order.
///
/// Exactly two distinct label strings must occur. The smaller one maps to −1,
/// comparing numerically when both parse as numbers and lexically otherwise.
/// Row numbers in errors count the header as row 1.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let label_idx = header.iter().position(|h| h == label_column).ok_or_else(|| {
        Error::input(format!(
            "label column '{label_column}' not found in {}; available columns: {}",
            path.display(),
            header.join(", ")
        ))
    })?;

    let width = header.len();
    let mut data = Vec::new();
    let mut raw_labels = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != width {
            return Err(Error::format(
                path,
                format!("row {row}"),
                format!("{} fields, header has {width}", record.len()),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(cell.to_owned());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::format(path, format!("row {row}"), format!("column '{}': '{cell}' is not numeric", header[j]))
            })?;
            if !v.is_finite() {
                return Err(Error::format(path, format!("row {row}"), format!("column '{}' is not finite", header[j])));
            }
            data.push(v);
        }
    }

    let mut distinct: Vec<&str> = Vec::new();
    for (k, label) in raw_labels.iter().enumerate() {
        if !distinct.contains(&label.as_str()) {
            if distinct.len() == 2 {
                return Err(Error::format(
                    path,
                    format!("row {}", k + 2),
                    format!("third distinct label '{label}' (already saw '{}' and '{}')", distinct[0], distinct[1]),
                ));
            }
            distinct.push(label);
        }
    }
    if distinct.len() < 2 {
        return Err(Error::input(format!("{} holds fewer than two label values", path.display())));
    }
    distinct.sort_by(|a, b| label_order(a, b));
    let negative = distinct[0].to_owned();
    let y = raw_labels.iter().map(|l| if *l == negative { -1 } else { 1 }).collect();

    let x = Matrix::from_vec(raw_labels.len(), width - 1, data)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    Dataset::new(name, x, y)
}

fn label_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let location = e
        .position()
        .map(|p| format!("row {}", p.line()))
        .unwrap_or_else(|| "start".into());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::format(path, location, format!("{kind:?}")),
    }
}
