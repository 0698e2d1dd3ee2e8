//! Per-pixel embedding costs and the filtering engine behind them.

mod convolve;
mod hill;
mod suniward;

pub use convolve::{convolve2d_mirror, mirror_index, Kernel, Matrix};
pub use hill::{hill_cost, ker_bohme_kernel, HILL_MIN_SIZE};
pub use suniward::{db8_lowpass, suniward_cost, suniward_kernels, SUNIWARD_MIN_SIZE};

use std::io::Read;

use crate::error::{Error, Result};

/// Cost at or above which a pixel is wet (never changed).
pub const WET_THRESHOLD: f64 = 1e10;

/// Non-negative per-pixel embedding costs, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMap {
    width: usize,
    height: usize,
    costs: Vec<f64>,
}

impl CostMap {
    /// Validates and stores costs. Values above [`WET_THRESHOLD`], including
    /// `+inf`, are stored as exactly `WET_THRESHOLD`.
    pub fn new(width: usize, height: usize, mut costs: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if costs.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (costs.len(), 1),
            });
        }
        for c in costs.iter_mut() {
            if c.is_nan() || *c < 0.0 {
                return Err(Error::NegativeInput(*c));
            }
            *c = c.min(WET_THRESHOLD);
        }
        Ok(Self {
            width,
            height,
            costs,
        })
    }

    pub(crate) fn from_matrix_clamped(m: Matrix) -> Self {
        let (height, width) = (m.rows(), m.cols());
        let costs = m
            .into_vec()
            .into_iter()
            .map(|c| {
                if c.is_nan() {
                    WET_THRESHOLD
                } else {
                    c.clamp(0.0, WET_THRESHOLD)
                }
            })
            .collect();
        Self {
            width,
            height,
            costs,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.costs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    #[inline]
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.width + col]
    }

    #[inline]
    pub fn is_wet(&self, index: usize) -> bool {
        is_wet(self.costs[index])
    }

    pub fn wet_count(&self) -> usize {
        self.costs.iter().filter(|&&c| is_wet(c)).count()
    }
}

#[inline]
pub fn is_wet(cost: f64) -> bool {
    cost >= WET_THRESHOLD
}

/// Serializes a real matrix: `u32` rows, `u32` columns (both little-endian),
/// then `rows * cols` little-endian `f64` values in row-major order.
pub fn write_real_matrix(rows: usize, cols: usize, values: &[f64]) -> Vec<u8> {
    assert_eq!(rows * cols, values.len());
    let mut out = Vec::with_capacity(8 + 8 * values.len());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`write_real_matrix`]; returns `(rows, cols, values)`.
pub fn read_real_matrix(mut reader: impl Read) -> Result<(usize, usize, Vec<f64>)> {
    let mut dims = [0u8; 8];
    reader.read_exact(&mut dims)?;
    let rows = u32::from_le_bytes(dims[..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(dims[4..].try_into().unwrap()) as usize;
    let mut raw = Vec::new();
    reader.read_to_end(&mut raw)?;
    let expected = rows * cols;
    if raw.len() < expected * 8 {
        return Err(Error::TruncatedData {
            expected,
            found: raw.len() / 8,
        });
    }
    let values = raw[..expected * 8]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}

/// One CSV line per row, values in shortest round-trip form.
pub fn real_matrix_csv(cols: usize, values: &[f64]) -> String {
    let mut out = String::new();
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

impl CostMap {
    pub fn to_bytes(&self) -> Vec<u8> {
        write_real_matrix(self.height, self.width, &self.costs)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (rows, cols, values) = read_real_matrix(bytes)?;
        Self::new(cols, rows, values)
    }

    pub fn to_csv(&self) -> String {
        real_matrix_csv(self.width, &self.costs)
    }
}
