use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "unknown format {0:?} (expected fp16, bfloat16, fp32, fp64 or custom:t=..,emin=..,emax=..,subnormals=0|1)"
    )]
    UnknownFormat(String),

    #[error("invalid format: {0}")]
    InvalidFormat(String),

    #[error("input vector is empty")]
    EmptyInput,

    #[error("input entry {index} is not finite ({value})")]
    NonFiniteInput { index: usize, value: f64 },

    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),

    #[error("reference value is zero; scaled error is undefined")]
    ZeroReference,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{}line {line}, field {field}: cannot parse {token:?} as a number", path_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: u64,
        field: usize,
        token: String,
    },

    #[error("invalid data spec: {0}")]
    InvalidDataSpec(String),

    #[error("format {0} is too precise to be measured against the binary64 reference")]
    UnmeasurableFormat(String),

    #[error("unknown record field {0:?}")]
    UnknownField(String),

    #[error("malformed record file: {0}")]
    MalformedRecords(String),

    #[error("cannot start worker threads: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}
