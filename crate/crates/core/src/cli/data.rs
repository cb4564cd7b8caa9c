//! Dataset manifests, CSV ingestion and atomic output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point};
use crate::landmarks::{shape_of, KAd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// One observation per line, comma separated.
    #[default]
    FlatCsv,
    /// One `p x p` symmetric matrix per line, row-major.
    SpdCsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    #[default]
    None,
    /// Rows are raw k-ads (landmark by landmark) reduced to shapes on read.
    Preshape,
}

/// Description of a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub manifold: String,
    /// Relative paths are resolved against the manifest's directory.
    pub data_path: PathBuf,
    #[serde(default)]
    pub format: DataFormat,
    #[serde(default)]
    pub preprocessing: Preprocessing,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut m: DatasetManifest = serde_json::from_str(&text)?;
        if m.data_path.is_relative() {
            if let Some(dir) = path.parent() {
                m.data_path = dir.join(&m.data_path);
            }
        }
        Ok(m)
    }

    pub fn manifold(&self) -> Result<Manifold> {
        self.manifold.parse()
    }

    /// Values per data row implied by the manifold and the preprocessing.
    pub fn row_len(&self) -> Result<usize> {
        let manifold = self.manifold()?;
        match self.preprocessing {
            Preprocessing::None => Ok(manifold.flat_len()),
            Preprocessing::Preshape => landmark_dims(manifold).map(|(m, k)| m * k),
        }
    }

    pub fn load(&self) -> Result<Vec<Point>> {
        let manifold = self.manifold()?;
        if self.format == DataFormat::SpdCsv && !matches!(manifold, Manifold::Spd { .. }) {
            return Err(Error::Parse(format!("spd_csv data needs an SPD manifold, not {manifold}")));
        }
        read_rows(&self.data_path, self.row_len()?)?
            .iter()
            .enumerate()
            .map(|(i, row)| {
                self.point_from_row(manifold, row)
                    .map_err(|e| Error::Parse(format!("{}, row {}: {e}", self.data_path.display(), i + 1)))
            })
            .collect()
    }

    pub(crate) fn point_from_row(&self, manifold: Manifold, row: &[f64]) -> Result<Point> {
        match self.preprocessing {
            Preprocessing::None => Point::from_flat(manifold, row),
            Preprocessing::Preshape => {
                let (m, k) = landmark_dims(manifold)?;
                shape_of(&KAd::from_flat(m, k, row)?, manifold)
            }
        }
    }
}

fn landmark_dims(manifold: Manifold) -> Result<(usize, usize)> {
    match manifold {
        Manifold::PlanarShape { k } => Ok((2, k)),
        Manifold::ReflectionShape { m, k } | Manifold::AffineShape { m, k } => Ok((m, k)),
        other => Err(Error::InvalidArgument(format!("preshape preprocessing does not apply to {other}"))),
    }
}

/// Numeric rows of a CSV file; blank lines and lines starting with `#` are skipped.
pub fn read_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{}, line {}: {e}", path.display(), i + 1)))?;
        if width > 0 && row.len() != width {
            return Err(Error::Parse(format!(
                "{}, line {}: expected {width} values, found {}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

/// Comma-separated values in shortest round-trip form.
pub fn format_row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}
