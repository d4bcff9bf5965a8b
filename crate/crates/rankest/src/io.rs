//! Dataset ingestion.
//!
//! Data files are CSV with a header row. The response is the column `y`, the
//! covariates are `x1, x2, ..., x{p+1}` (the coefficient of `x1` is fixed at
//! one), and `r`, `v`, `w` are optional. Columns are matched by name only.

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rankest_core::Sample;

#[derive(Debug)]
pub enum ReadError {
    Io(std::io::Error),
    Format(String),
    /// The file parsed but the data are unusable.
    Invalid(rankest_core::Error),
}

impl fmt::Display for ReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReadError::Io(e) => write!(f, "{e}"),
            ReadError::Format(m) => f.write_str(m),
            ReadError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ReadError {}

impl From<std::io::Error> for ReadError {
    fn from(e: std::io::Error) -> Self {
        ReadError::Io(e)
    }
}

impl From<csv::Error> for ReadError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(e) => ReadError::Io(e),
            other => ReadError::Format(format!("{other:?}")),
        }
    }
}

fn open(path: &Path) -> Result<File, ReadError> {
    File::open(path).map_err(|e| {
        ReadError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn parse_cell(text: &str, column: &str, line: usize) -> Result<f64, ReadError> {
    text.trim().parse::<f64>().map_err(|_| {
        ReadError::Format(format!("line {line}, column {column}: cannot parse {text:?} as a number"))
    })
}

/// Parses a dataset from any reader.
pub fn parse_sample(reader: impl Read) -> Result<Sample, ReadError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(ReadError::Format("missing header row".into()));
    }

    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut x_cols = Vec::new();
    while let Some(i) = find(&format!("x{}", x_cols.len() + 1)) {
        x_cols.push(i);
    }
    let y_col = find("y").ok_or_else(|| ReadError::Format("no column named y".into()))?;
    if x_cols.len() < 2 {
        return Err(ReadError::Format("need covariate columns x1 and x2 at least".into()));
    }
    let known = |h: &str| {
        h == "y"
            || h == "r"
            || h == "v"
            || h == "w"
            || h.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()).is_some_and(|k| k >= 1 && k <= x_cols.len())
    };
    if let Some(h) = headers.iter().find(|h| !known(h)) {
        return Err(ReadError::Format(format!(
            "unexpected column {h:?}; expected y, x1..x{}, r, v, w",
            x_cols.len()
        )));
    }
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(ReadError::Format(format!("duplicate column {h:?}")));
        }
    }
    let (r_col, v_col, w_col) = (find("r"), find("v"), find("w"));

    let mut y = Vec::new();
    let mut xs: Vec<Vec<f64>> = vec![Vec::new(); x_cols.len()];
    let (mut r, mut v, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let cell = |i: usize| parse_cell(&record[i], &headers[i], line);
        y.push(cell(y_col)?);
        for (dst, &i) in xs.iter_mut().zip(&x_cols) {
            dst.push(cell(i)?);
        }
        if let Some(i) = r_col {
            r.push(cell(i)?);
        }
        if let Some(i) = v_col {
            v.push(cell(i)?);
        }
        if let Some(i) = w_col {
            w.push(cell(i)?);
        }
    }
    if y.is_empty() {
        return Err(ReadError::Format("no data rows".into()));
    }

    let mut sample = Sample::from_columns(y, &xs).map_err(ReadError::Invalid)?;
    match (r_col, v_col) {
        (Some(_), Some(_)) => sample = sample.with_censoring(r, v).map_err(ReadError::Invalid)?,
        (None, None) => {}
        (Some(_), None) => {
            return Err(ReadError::Invalid(rankest_core::Error::MissingColumn(
                rankest_core::Column::V,
            )))
        }
        (None, Some(_)) => {
            return Err(ReadError::Invalid(rankest_core::Error::MissingColumn(
                rankest_core::Column::R,
            )))
        }
    }
    if w_col.is_some() {
        sample = sample.with_conditioning(w).map_err(ReadError::Invalid)?;
    }
    Ok(sample)
}

pub fn read_sample(path: &Path) -> Result<Sample, ReadError> {
    parse_sample(open(path)?)
}

/// Reads a single column of numbers. A non-numeric first line is taken as a
/// header.
pub fn read_column(path: &Path) -> Result<Vec<f64>, ReadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(open(path)?);
    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != 1 {
            return Err(ReadError::Format(format!(
                "line {}: expected one column, found {}",
                row + 1,
                record.len()
            )));
        }
        let text = record[0].trim();
        if row == 0 && text.parse::<f64>().is_err() {
            continue;
        }
        out.push(parse_cell(text, "1", row + 1)?);
    }
    if out.is_empty() {
        return Err(ReadError::Format(format!("{}: no values", path.display())));
    }
    Ok(out)
}

/// Writes a sample in the format [`read_sample`] accepts.
pub fn write_sample(sample: &Sample, out: impl std::io::Write) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["y".to_owned()];
    header.extend((1..=sample.p() + 1).map(|k| format!("x{k}")));
    let extras = [("r", sample.r()), ("v", sample.v()), ("w", sample.w())];
    header.extend(extras.iter().filter(|(_, c)| c.is_some()).map(|(h, _)| h.to_string()));
    wtr.write_record(&header)?;
    for i in 0..sample.n() {
        let mut rec = vec![crate::report::fmt_f64(sample.y()[i])];
        rec.extend((0..=sample.p()).map(|k| crate::report::fmt_f64(sample.x(i, k))));
        rec.extend(extras.iter().filter_map(|(_, c)| c.map(|c| crate::report::fmt_f64(c[i]))));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
