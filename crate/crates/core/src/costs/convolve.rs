//! Real-valued matrices and 2-D correlation with mirror boundary padding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            rows: img.height(),
            cols: img.width(),
            data: img.pixels().iter().map(|&v| f64::from(v)).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Applies `f` element-wise in place.
    pub fn map_in_place(&mut self, f: impl Fn(f64) -> f64 + Sync) {
        self.data.par_iter_mut().for_each(|v| *v = f(*v));
    }

    /// Element-wise sum with another matrix of the same shape.
    pub(crate) fn add_assign(&mut self, other: &Matrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }
}

/// A centered correlation kernel with odd dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    weights: Vec<f64>,
    // Column and row factors when the kernel is an outer product.
    factors: Option<(Vec<f64>, Vec<f64>)>,
}

impl Kernel {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if width % 2 == 0 || height % 2 == 0 {
            return Err(Error::InvalidKernel(format!(
                "dimensions {height}x{width} are not odd"
            )));
        }
        if weights.len() != width * height {
            return Err(Error::InvalidKernel(format!(
                "{} weights for a {height}x{width} kernel",
                weights.len()
            )));
        }
        Ok(Self {
            width,
            height,
            weights,
            factors: None,
        })
    }

    /// Separable kernel `column · rowᵀ`; weight `(a, b)` is `column[a] * row[b]`.
    pub fn outer(column: &[f64], row: &[f64]) -> Result<Self> {
        let weights = column
            .iter()
            .flat_map(|&c| row.iter().map(move |&r| c * r))
            .collect();
        let mut k = Self::new(row.len(), column.len(), weights)?;
        k.factors = Some((column.to_vec(), row.to_vec()));
        Ok(k)
    }

    /// `size × size` kernel with every weight equal to `value`.
    pub fn constant(size: usize, value: f64) -> Result<Self> {
        Self::outer(&vec![value; size], &vec![1.0; size])
    }

    /// Uniform averaging kernel (`1 / size²` per tap).
    pub fn average(size: usize) -> Result<Self> {
        Self::constant(size, 1.0 / (size * size) as f64)
    }

    /// Element-wise absolute value of the weights.
    pub fn abs(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            weights: self.weights.iter().map(|w| w.abs()).collect(),
            factors: self.factors.as_ref().map(|(c, r)| {
                (
                    c.iter().map(|v| v.abs()).collect(),
                    r.iter().map(|v| v.abs()).collect(),
                )
            }),
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
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.width + b]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Reflects an out-of-range index back into `0..n` without repeating the
/// edge sample (`… 2 1 | 0 1 2 … n-1 | n-2 n-3 …`). Valid for offsets up to
/// `n - 1` beyond either edge.
#[inline]
pub fn mirror_index(i: isize, n: usize) -> usize {
    let last = n as isize - 1;
    let r = if i < 0 {
        -i
    } else if i > last {
        2 * last - i
    } else {
        i
    };
    debug_assert!(
        (0..=last).contains(&r),
        "offset too large for mirror padding"
    );
    r as usize
}

/// Same-size correlation `out(i, j) = Σ_ab k(a, b) · x(i + a − r, j + b − c)`
/// with mirror padding, where `(r, c)` is the kernel center.
///
/// The kernel must not exceed the matrix in either dimension.
pub fn convolve2d_mirror(matrix: &Matrix, kernel: &Kernel) -> Result<Matrix> {
    if kernel.height > matrix.rows || kernel.width > matrix.cols {
        return Err(Error::KernelLargerThanImage {
            kernel_height: kernel.height,
            kernel_width: kernel.width,
            rows: matrix.rows,
            cols: matrix.cols,
        });
    }
    Ok(correlate_mirror(matrix, kernel))
}

/// Correlation without the size check; only requires the kernel radius to
/// be smaller than each matrix dimension.
pub(crate) fn correlate_mirror(matrix: &Matrix, kernel: &Kernel) -> Matrix {
    assert!(
        kernel.height / 2 < matrix.rows && kernel.width / 2 < matrix.cols,
        "kernel radius exceeds matrix"
    );
    match &kernel.factors {
        Some((column, row)) => {
            let horizontal = correlate_rows(matrix, row);
            correlate_columns(&horizontal, column)
        }
        None => correlate_full(matrix, kernel),
    }
}

fn correlate_full(x: &Matrix, k: &Kernel) -> Matrix {
    let (rows, cols) = (x.rows, x.cols);
    let (ra, rb) = ((k.height / 2) as isize, (k.width / 2) as isize);
    let mut out = vec![0.0; rows * cols];
    out.par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, out_row)| {
            for (j, o) in out_row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for a in 0..k.height {
                    let src = mirror_index(i as isize + a as isize - ra, rows);
                    let src_row = &x.data[src * cols..(src + 1) * cols];
                    let k_row = &k.weights[a * k.width..(a + 1) * k.width];
                    for (b, &w) in k_row.iter().enumerate() {
                        acc += w * src_row[mirror_index(j as isize + b as isize - rb, cols)];
                    }
                }
                *o = acc;
            }
        });
    Matrix {
        rows,
        cols,
        data: out,
    }
}

fn correlate_rows(x: &Matrix, taps: &[f64]) -> Matrix {
    let (rows, cols) = (x.rows, x.cols);
    let radius = (taps.len() / 2) as isize;
    let mut out = vec![0.0; rows * cols];
    out.par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, out_row)| {
            let src_row = &x.data[i * cols..(i + 1) * cols];
            for (j, o) in out_row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (b, &w) in taps.iter().enumerate() {
                    acc += w * src_row[mirror_index(j as isize + b as isize - radius, cols)];
                }
                *o = acc;
            }
        });
    Matrix {
        rows,
        cols,
        data: out,
    }
}

fn correlate_columns(x: &Matrix, taps: &[f64]) -> Matrix {
    let (rows, cols) = (x.rows, x.cols);
    let radius = (taps.len() / 2) as isize;
    let mut out = vec![0.0; rows * cols];
    out.par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, out_row)| {
            for (a, &w) in taps.iter().enumerate() {
                let src = mirror_index(i as isize + a as isize - radius, rows);
                let src_row = &x.data[src * cols..(src + 1) * cols];
                for (o, &v) in out_row.iter_mut().zip(src_row) {
                    *o += w * v;
                }
            }
        });
    Matrix {
        rows,
        cols,
        data: out,
    }
}
