use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid image grid: {0}")]
    Grid(String),
    #[error("invalid RF frame: {0}")]
    Frame(String),
    #[error("sampling frequency must be positive, got {0}")]
    SamplingFrequency(f64),
    #[error("{kind} needs at least {required} elements, got {actual}")]
    TooFewElements {
        kind: &'static str,
        required: usize,
        actual: usize,
    },
    #[error("element count mismatch: frame has {frame}, delay table has {table}")]
    ElementMismatch { frame: usize, table: usize },
    #[error("invalid filter: {0}")]
    Filter(String),
    #[error("signal too short: need more than {required} samples, got {actual}")]
    SignalTooShort { required: usize, actual: usize },
    #[error("image has no positive pixel, cannot normalize")]
    ZeroImage,
    #[error("invalid phantom: {0}")]
    Phantom(String),
    #[error("frame has no signal power, SNR undefined")]
    ZeroSignal,
    #[error("region error: {0}")]
    Region(String),
    #[error("profile error: {0}")]
    Profile(String),
}
