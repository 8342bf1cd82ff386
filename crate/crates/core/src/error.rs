use alloc::string::String;

use crate::track::{FlightId, Source};

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("track is empty")]
    EmptyTrack,
    #[error("empty input")]
    EmptyInput,
    #[error("point is {distance_m:.1} m from the frame origin (limit {limit_m:.0} m)")]
    FrameRangeExceeded { distance_m: f64, limit_m: f64 },
    #[error("bearing undefined for coincident points")]
    DegenerateBearing,
    #[error("no cross-source pair within the search window for flight {0}")]
    NoOverlap(FlightId),
    #[error("flight mismatch: expected {expected}, found {found}")]
    FlightMismatch { expected: FlightId, found: FlightId },
    #[error("expected a {expected} track, found {found}")]
    SourceMismatch { expected: Source, found: Source },
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("no geotags to bracket query times")]
    NoGeotags,
    #[error("timestamp {0} s outside the supported solar span 1950-2100")]
    UnsupportedDate(i64),
    #[error("unknown camera `{0}`")]
    UnknownCamera(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid geographic point: {0}")]
    InvalidPoint(&'static str),
}
