//! Complex-valued fields on a [`Grid`], one time slice each, plus the
//! binary snapshot format used to persist them.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Which representation a field currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Physical,
    Spectral,
}

/// One time slice of u (or û) on a grid, stored row-major with Nᵈ entries.
///
/// Fields are immutable values after construction: every operation returns
/// a new field, so sharing read-only references across threads is safe.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    space: Space,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field needs {} values for this grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field { grid, space, values })
    }

    pub fn zeros(grid: Grid, space: Space) -> Self {
        Field {
            grid,
            space,
            values: vec![Complex64::ZERO; grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Pointwise difference on a shared grid and space.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.space != other.space {
            return Err(Error::WrongSpace {
                expected: self.space,
                got: other.space,
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Field::new(self.grid, self.space, values)
    }

    /// Pointwise scaling by a complex factor.
    pub fn scale(&self, factor: Complex64) -> Field {
        let values = self.values.iter().map(|v| v * factor).collect();
        Field {
            grid: self.grid,
            space: self.space,
            values,
        }
    }
}

/// Samples a pointwise function at the grid nodes of [-L/2, L/2)ᵈ into a
/// physical field; a non-finite sample is rejected naming the node.
pub fn sample(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
    let mut values = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let x = grid.node_coordinates(flat);
        let v = f(&x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite {
                node: format!("x = {:?}", x),
                context: format!("sample value {v}"),
            });
        }
        values.push(v);
    }
    Field::new(*grid, Space::Physical, values)
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"NLSF";
const SNAPSHOT_VERSION: u16 = 1;
const HEADER_LEN: usize = 32;

impl Field {
    /// Writes the snapshot format: a 32-byte header (magic "NLSF",
    /// version u16, dim u16, N u32, space u8, zero padding), then L as
    /// little-endian f64, then Nᵈ interleaved (re, im) f64 pairs,
    /// little-endian, row-major.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[0..4].copy_from_slice(SNAPSHOT_MAGIC);
        header[4..6].copy_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        header[6..8].copy_from_slice(&(self.grid.dim() as u16).to_le_bytes());
        header[8..12].copy_from_slice(&(self.grid.points_per_axis() as u32).to_le_bytes());
        header[12] = match self.space {
            Space::Physical => 0,
            Space::Spectral => 1,
        };
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&header)?;
        w.write_all(&self.grid.box_length().to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path) -> Result<Field> {
        let bad = |reason: &str| Error::Snapshot {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let file = File::open(path).map_err(|e| bad(&e.to_string()))?;
        let mut r = BufReader::new(file);
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|_| bad("truncated header"))?;
        if &header[0..4] != SNAPSHOT_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != SNAPSHOT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let dim = u16::from_le_bytes([header[6], header[7]]) as usize;
        let n = u32::from_le_bytes([header[8], header[9], header[10], header[11]]) as usize;
        let space = match header[12] {
            0 => Space::Physical,
            1 => Space::Spectral,
            s => return Err(bad(&format!("unknown space tag {s}"))),
        };
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)
            .map_err(|_| bad("truncated box length"))?;
        let box_length = f64::from_le_bytes(f64buf);
        let grid = Grid::new(dim, n, box_length)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut f64buf)
                .map_err(|_| bad("truncated values"))?;
            let re = f64::from_le_bytes(f64buf);
            r.read_exact(&mut f64buf)
                .map_err(|_| bad("truncated values"))?;
            let im = f64::from_le_bytes(f64buf);
            values.push(Complex64::new(re, im));
        }
        if r.read(&mut f64buf)? != 0 {
            return Err(bad("trailing bytes"));
        }
        Field::new(grid, space, values)
    }
}
