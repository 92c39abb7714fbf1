//! Regular grids on `[0,1]^d` and scalar fields sampled on them.
//!
//! Sample `k = (k_1, ..., k_d)` with `k_j` in `1..=N` sits at `(k_1/N, ..., k_d/N)`.
//! Values are stored row-major with axis 0 varying slowest.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A regular grid with `n` samples per axis in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain(format!("grid dimension must be >= 1, got {d}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 samples per axis, got {n}")));
        }
        let total = n.checked_pow(d as u32);
        if total.is_none() || total.unwrap() > u32::MAX as usize {
            return Err(Error::Domain(format!("grid {n}^{d} is too large")));
        }
        Ok(GridSpec { d, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Samples per axis.
    pub fn side(&self) -> usize {
        self.n
    }

    /// Total number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Location of the one-based multi-index `k`.
    pub fn index_to_point(&self, k: &[usize]) -> Result<Vec<f64>> {
        self.check_index(k)?;
        let n = self.n as f64;
        Ok(k.iter().map(|&kj| kj as f64 / n).collect())
    }

    /// Inverse of [`index_to_point`](Self::index_to_point): the one-based index of the
    /// grid point nearest to `x` (coordinates are clamped into the grid).
    pub fn point_to_nearest_index(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        let n = self.n as f64;
        Ok(x
            .iter()
            .map(|&xj| ((xj * n).round().max(1.0).min(n)) as usize)
            .collect())
    }

    /// Row-major linear position of a one-based multi-index.
    pub fn linear_index(&self, k: &[usize]) -> Result<usize> {
        self.check_index(k)?;
        Ok(k.iter().fold(0, |acc, &kj| acc * self.n + (kj - 1)))
    }

    /// One-based multi-index of a row-major linear position.
    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut k = vec![0; self.d];
        for j in (0..self.d).rev() {
            k[j] = linear % self.n + 1;
            linear /= self.n;
        }
        k
    }

    /// Location of the sample at a row-major linear position.
    pub fn point_at(&self, linear: usize) -> Vec<f64> {
        let n = self.n as f64;
        self.multi_index(linear).into_iter().map(|k| k as f64 / n).collect()
    }

    fn check_index(&self, k: &[usize]) -> Result<()> {
        if k.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: k.len() });
        }
        if let Some(bad) = k.iter().find(|&&kj| kj < 1 || kj > self.n) {
            return Err(Error::Domain(format!("grid index {bad} outside 1..={}", self.n)));
        }
        Ok(())
    }
}

/// Real samples on a [`GridSpec`]. All values are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        check_finite(&values)?;
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point_at(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a one-based multi-index.
    pub fn get(&self, k: &[usize]) -> Result<f64> {
        Ok(self.values[self.grid.linear_index(k)?])
    }

    /// Pointwise map, rejecting non-finite results.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn write_cpf(&self, path: &Path) -> Result<()> {
        write_cpf(path, &CpfHeader::plain(self.grid.dim(), self.grid.side()), &self.values)
    }

    pub fn read_cpf(path: &Path) -> Result<Self> {
        let (header, values) = read_cpf(path)?;
        ScalarField::new(GridSpec::new(header.d, header.n)?, values)
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index, value: values[index] }),
        None => Ok(()),
    }
}

pub const CPF_MAGIC: &[u8; 4] = b"CPF1";

/// Metadata of a `.cpf` field file, mirrored in its JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpfHeader {
    pub magic: String,
    pub d: usize,
    /// Samples (or blocks) per axis.
    pub n: usize,
    pub count: usize,
    /// Block side in source samples, for block-averaged fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    /// Samples per axis of the field that was averaged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_n: Option<usize>,
}

impl CpfHeader {
    pub fn plain(d: usize, n: usize) -> Self {
        CpfHeader {
            magic: "CPF1".to_string(),
            d,
            n,
            count: n.pow(d as u32),
            block: None,
            source_n: None,
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the binary field (16-byte header, then little-endian f64 values)
/// and its JSON sidecar next to it.
pub fn write_cpf(path: &Path, header: &CpfHeader, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 8 * values.len());
    buf.extend_from_slice(CPF_MAGIC);
    buf.extend_from_slice(&(header.d as u32).to_le_bytes());
    buf.extend_from_slice(&(header.n as u32).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(header)?)?;
    Ok(())
}

/// Reads a binary field. The sidecar is used when present for block metadata;
/// the binary header is authoritative for shape.
pub fn read_cpf(path: &Path) -> Result<(CpfHeader, Vec<f64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[0..4] != CPF_MAGIC {
        return Err(Error::Parse(format!("{} is not a CPF1 field file", path.display())));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (d, n) = (word(4), word(8));
    let count = n
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Parse(format!("field shape {n}^{d} overflows")))?;
    if bytes.len() != 16 + 8 * count {
        return Err(Error::Parse(format!(
            "expected {} value bytes for {n}^{d} field, found {}",
            8 * count,
            bytes.len() - 16
        )));
    }
    let values = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut header = CpfHeader::plain(d, n);
    let side = sidecar_path(path);
    if side.exists() {
        let meta: CpfHeader = serde_json::from_str(&fs::read_to_string(side)?)?;
        if meta.d != d || meta.n != n {
            return Err(Error::Parse("sidecar metadata disagrees with binary header".into()));
        }
        header.block = meta.block;
        header.source_n = meta.source_n;
    }
    Ok((header, values))
}
