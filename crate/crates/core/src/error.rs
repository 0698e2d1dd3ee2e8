use std::io;

use thiserror::Error;

/// Errors produced by the steganography primitives.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported PNM magic {0:?}, expected P2 or P5")]
    UnsupportedMagic(String),
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: header promises {expected} samples, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("malformed PNM header: {0}")]
    MalformedHeader(String),
    #[error("probability {0} outside the admissible range")]
    ProbabilityOutOfRange(f64),
    #[error("kernel {kernel_height}x{kernel_width} does not fit a {rows}x{cols} matrix")]
    KernelLargerThanImage {
        kernel_height: usize,
        kernel_width: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("image {width}x{height} is smaller than the required {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("negative input: {0}")]
    NegativeInput(f64),
    #[error("payload of {requested} bits exceeds capacity of {capacity} bits")]
    PayloadExceedsCapacity { requested: f64, capacity: f64 },
    #[error("relative payload {0} outside [0, log2 3]")]
    InvalidPayload(f64),
    #[error("image has no pixels")]
    EmptyImage,
    #[error("embedding group is empty")]
    EmptyGroup,
    #[error("dimension mismatch: expected {expected:?}, got {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
