use std::path::PathBuf;

use trackfuse_core::FlightId;

pub type Result<T> = std::result::Result<T, Error>;

/// Anything that makes a run fail on its data rather than on its usage.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// `row` is the line number in the file, the header being line 1.
    #[error("{}: row={row} field={field} reason={reason}", path.display())]
    Row {
        path: PathBuf,
        row: u64,
        field: String,
        reason: String,
    },
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
    #[error("flight {flight}: {source}")]
    Flight {
        flight: FlightId,
        #[source]
        source: trackfuse_core::Error,
    },
    #[error("flight {0}: no offset given")]
    MissingOffset(FlightId),
    #[error("flight {0}: no O-GPS/I-GPS geotags loaded")]
    MissingGeotags(FlightId),
    #[error(transparent)]
    Core(#[from] trackfuse_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub(crate) trait FlightContext<T> {
    fn for_flight(self, flight: &FlightId) -> Result<T>;
}

impl<T> FlightContext<T> for trackfuse_core::Result<T> {
    fn for_flight(self, flight: &FlightId) -> Result<T> {
        self.map_err(|source| Error::Flight {
            flight: flight.clone(),
            source,
        })
    }
}
