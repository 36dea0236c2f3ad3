use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const SSDS_MAGIC: &[u8; 4] = b"SSDS";

/// An ordered collection of equal-width real vectors, stored row-major.
/// Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    width: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(width * rows.len());
        for r in rows {
            if r.len() != width {
                return Err(Error::DimMismatch {
                    expected: width,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Ok(Dataset { width, values })
    }

    pub fn from_flat(width: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 && !values.is_empty() || width > 0 && !values.len().is_multiple_of(width) {
            return Err(Error::Format(format!(
                "{} values cannot be split into rows of width {width}",
                values.len()
            )));
        }
        Ok(Dataset { width, values })
    }

    pub fn len(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.values.len() / self.width
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.width);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            width: self.width,
            values,
        }
    }

    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if !self.is_empty() && !other.is_empty() && self.width != other.width {
            return Err(Error::DimMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        let width = self.width.max(other.width);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Dataset { width, values })
    }

    /// `n` rows drawn uniformly without replacement; the same seed always
    /// selects the same rows.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let idx = subsample_indices(self.len(), n, seed)?;
        Ok(self.select(&idx))
    }

    /// Reads one point per CSV row. With `has_header`, the first row is skipped.
    pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, has_header)
    }

    pub fn read_csv(reader: impl Read, has_header: bool) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Format(format!("{s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Dataset::from_rows(&rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, header: Option<&[String]>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        if let Some(h) = header {
            writeln!(w, "{}", h.join(",")).map_err(io)?;
        }
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(w, "{}", line.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Binary column format: `"SSDS"`, `u32` row count, `u32` width, then
    /// `n·width` little-endian `f64` values in row order.
    pub fn read_ssds(mut reader: impl Read) -> Result<Dataset> {
        let fmt = |m: &str| Error::Format(m.to_string());
        let mut head = [0u8; 12];
        reader
            .read_exact(&mut head)
            .map_err(|_| fmt("truncated SSDS header"))?;
        if &head[..4] != SSDS_MAGIC {
            return Err(fmt("bad SSDS magic"));
        }
        let n = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
        let width = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
        let mut buf = vec![0u8; n * width * 8];
        reader
            .read_exact(&mut buf)
            .map_err(|_| fmt("truncated SSDS payload"))?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Dataset::from_flat(width, values)
    }

    pub fn write_ssds(&self, mut writer: impl Write) -> std::io::Result<()> {
        writer.write_all(SSDS_MAGIC)?;
        writer.write_all(&(self.len() as u32).to_le_bytes())?;
        writer.write_all(&(self.width as u32).to_le_bytes())?;
        for v in &self.values {
            writer.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load_ssds(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_ssds(BufReader::new(file))
    }

    pub fn save_ssds(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_ssds(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Indices of a uniform subsample of size `n` out of `total`, without
/// replacement.
pub fn subsample_indices(total: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 || n > total {
        return Err(Error::BadSubsampleSize {
            requested: n,
            available: total,
        });
    }
    let mut rng = rng_from_seed(seed);
    Ok(rand::seq::index::sample(&mut rng, total, n).into_vec())
}
