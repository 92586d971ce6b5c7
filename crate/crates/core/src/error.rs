use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("vehicle {vehicle}: timestamps not strictly increasing at t = {t}")]
    NonMonotoneTrace { vehicle: String, t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index out of range: {name} = {value}, expected 1..={max}")]
    IndexOutOfRange {
        name: &'static str,
        value: usize,
        max: usize,
    },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("channel has no propagation paths")]
    EmptyPaths,
    #[error("zero channel matrix")]
    ZeroMatrix,
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("image too small: {width}x{height}, need at least 3x3")]
    ImageTooSmall { width: usize, height: usize },
    #[error("empty Hough accumulator")]
    EmptyAccumulator,
    #[error("degenerate PDF: {0}")]
    DegeneratePdf(String),
    #[error("no trained quadrant at ({x:.1}, {y:.1})")]
    MissingQuadrant { x: f64, y: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
