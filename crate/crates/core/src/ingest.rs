//! Delimited sensor tables with missing readings.
//!
//! A table is N×L with one row per sensor and one column per time slot, so
//! each column is one sample `yᵢ ∈ ℝᴺ`. Files stored the other way round are
//! read with [`LoadOptions::transpose`].

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{HrpError, Result};
use crate::metrics::ObservationMask;
use crate::synth::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    /// Field separator; `None` picks tab when the first line has one, else comma.
    pub delimiter: Option<u8>,
    /// First row holds column (time) labels.
    pub header: bool,
    /// First column holds row (sensor) labels.
    pub row_labels: bool,
    /// File rows are time slots and columns are sensors.
    pub transpose: bool,
    /// Cell contents (after trimming) that mark a missing reading.
    pub missing_tokens: Vec<String>,
    /// Numeric value that marks a missing reading, e.g. `-10`.
    pub missing_sentinel: Option<f64>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: None,
            header: false,
            row_labels: false,
            transpose: false,
            missing_tokens: vec![String::new(), "NaN".into(), "nan".into()],
            missing_sentinel: None,
        }
    }
}

/// Sensor readings with their observation mask and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTable {
    values: DMatrix<f64>,
    mask: ObservationMask,
    sensor_ids: Vec<String>,
    timestamps: Vec<String>,
}

impl SensorTable {
    pub fn new(
        values: DMatrix<f64>,
        mask: ObservationMask,
        sensor_ids: Vec<String>,
        timestamps: Vec<String>,
    ) -> Result<Self> {
        if values.shape() != mask.as_matrix().shape() {
            return Err(HrpError::DimensionMismatch {
                expected: format!("mask {}x{}", values.nrows(), values.ncols()),
                found: format!("{}x{}", mask.as_matrix().nrows(), mask.as_matrix().ncols()),
            });
        }
        if sensor_ids.len() != values.nrows() || timestamps.len() != values.ncols() {
            return Err(HrpError::InvalidInput(
                "label counts do not match table shape".into(),
            ));
        }
        for (kind, labels) in [("sensor", &sensor_ids), ("timestamp", &timestamps)] {
            let mut seen = HashSet::new();
            if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
                return Err(HrpError::InvalidInput(format!(
                    "duplicate {kind} label {dup:?}"
                )));
            }
        }
        Ok(Self {
            values,
            mask,
            sensor_ids,
            timestamps,
        })
    }

    /// Fully observed table with generated labels.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let (n, l) = values.shape();
        Self::new(
            values,
            ObservationMask::all_observed(n, l),
            default_labels("s", n),
            default_labels("t", l),
        )
    }

    /// Raw values; entries where the mask is false carry no meaning.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }

    pub fn sensor_ids(&self) -> &[String] {
        &self.sensor_ids
    }

    pub fn timestamps(&self) -> &[String] {
        &self.timestamps
    }

    pub fn n_sensors(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_slots(&self) -> usize {
        self.values.ncols()
    }

    fn transposed(self) -> Self {
        Self {
            values: self.values.transpose(),
            mask: self.mask.transpose(),
            sensor_ids: self.timestamps,
            timestamps: self.sensor_ids,
        }
    }
}

fn default_labels(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

fn detect_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

/// Reads a delimited table.
///
/// Missing cells are marked false in the mask and stored as 0.0.
pub fn load_table(path: impl AsRef<Path>, options: &LoadOptions) -> Result<SensorTable> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_table(&text, options)
}

/// [`load_table`] on in-memory text.
pub fn parse_table(text: &str, options: &LoadOptions) -> Result<SensorTable> {
    let delimiter = options.delimiter.unwrap_or_else(|| detect_delimiter(text));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut row_ids = Vec::new();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut width: Option<(usize, usize)> = None;

    for record in reader.records() {
        let record = record.map_err(|e| HrpError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match width {
            None => width = Some((record.len(), line)),
            Some((w, first)) if w != record.len() => {
                return Err(HrpError::Parse {
                    line,
                    column: record.len(),
                    message: format!(
                        "expected {w} fields as on line {first}, found {}",
                        record.len()
                    ),
                });
            }
            Some(_) => {}
        }
        let skip = usize::from(options.row_labels);
        if options.header && header.is_none() {
            header = Some(
                record
                    .iter()
                    .skip(skip)
                    .map(|s| s.trim().to_string())
                    .collect(),
            );
            continue;
        }
        if options.row_labels {
            row_ids.push(record[0].trim().to_string());
        }
        let mut row = Vec::with_capacity(record.len() - skip);
        for (k, cell) in record.iter().enumerate().skip(skip) {
            let cell = cell.trim();
            if options.missing_tokens.iter().any(|t| t == cell) {
                row.push(None);
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| HrpError::Parse {
                line,
                column: k + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            if !value.is_finite() || options.missing_sentinel == Some(value) {
                row.push(None);
            } else {
                row.push(Some(value));
            }
        }
        rows.push(row);
    }

    if rows.is_empty() || rows[0].is_empty() {
        return Err(HrpError::InvalidInput("table has no data cells".into()));
    }
    let (n, l) = (rows.len(), rows[0].len());
    let values = DMatrix::from_fn(n, l, |i, j| rows[i][j].unwrap_or(0.0));
    let mask = ObservationMask::new(DMatrix::from_fn(n, l, |i, j| rows[i][j].is_some()));
    let sensor_ids = if options.row_labels {
        row_ids
    } else {
        default_labels("s", n)
    };
    let timestamps = header.unwrap_or_else(|| default_labels("t", l));
    let table = SensorTable::new(values, mask, sensor_ids, timestamps)?;
    Ok(if options.transpose {
        table.transposed()
    } else {
        table
    })
}

/// Replaces each missing cell with the mean of the observed cells in its
/// column (time slot), or with the global observed mean when the column has
/// none. Observed cells and the mask are carried over unchanged.
pub fn mean_fill(t: &SensorTable) -> Result<DataMatrix> {
    let mask = t.mask.as_matrix();
    let (n, l) = t.values.shape();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut col_means = vec![None; l];
    for (j, slot) in col_means.iter_mut().enumerate() {
        let (mut s, mut c) = (0.0, 0usize);
        for i in 0..n {
            if mask[(i, j)] {
                s += t.values[(i, j)];
                c += 1;
            }
        }
        total += s;
        count += c;
        if c > 0 {
            *slot = Some(s / c as f64);
        }
    }
    if count == 0 {
        return Err(HrpError::Degenerate("table has no observed entries".into()));
    }
    let global = total / count as f64;
    let filled = DMatrix::from_fn(n, l, |i, j| {
        if mask[(i, j)] {
            t.values[(i, j)]
        } else {
            col_means[j].unwrap_or(global)
        }
    });
    DataMatrix::with_mask(filled, t.mask.clone())
}

/// Writes `m` as delimited text with shortest round-trip float formatting.
pub fn write_delimited(path: impl AsRef<Path>, m: &DMatrix<f64>, delimiter: char) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path.as_ref())?);
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(delimiter);
            }
            line.push_str(&m[(i, j)].to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}
