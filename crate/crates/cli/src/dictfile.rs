//! Dictionary JSON: `{"n": N, "values": [N² numbers, row-major], "ortho_residual": r}`.
//!
//! `ortho_residual` is `max |DᵀD - I|`, computed on write; it is
//! informational and ignored on load.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hrp_core::manifold::orthogonality_residual;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryFile {
    pub n: usize,
    pub values: Vec<f64>,
    pub ortho_residual: f64,
}

impl DictionaryFile {
    pub fn from_matrix(d: &DMatrix<f64>) -> Result<Self> {
        if !d.is_square() {
            bail!("dictionary must be square, got {}x{}", d.nrows(), d.ncols());
        }
        let n = d.nrows();
        let values = (0..n)
            .flat_map(|i| (0..n).map(move |j| d[(i, j)]))
            .collect();
        Ok(Self {
            n,
            values,
            ortho_residual: orthogonality_residual(d),
        })
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.values.len() != self.n * self.n {
            bail!(
                "dictionary lists {} values but n = {} needs {}",
                self.values.len(),
                self.n,
                self.n * self.n
            );
        }
        Ok(DMatrix::from_row_slice(self.n, self.n, &self.values))
    }
}

pub fn write_dictionary(path: &Path, d: &DMatrix<f64>) -> Result<()> {
    let file = DictionaryFile::from_matrix(d)?;
    write_json(path, &file)
}

pub fn read_dictionary(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: DictionaryFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing dictionary {}", path.display()))?;
    file.to_matrix()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
