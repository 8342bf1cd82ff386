//! Two-source GPS track alignment and fusion.
//!
//! A reliable low-rate track (O-GPS, the cockpit unit) and a noisy high-rate
//! track (I-GPS, geotags embedded in imagery) are aligned in time, fused into
//! a weighted moving-average synthetic track, and turned into aircraft bearing
//! and sun-relative orientation features.
//!
//! The crate is `no_std` with `alloc`. Math routes through the `std` feature
//! (default) or through `libm` when built without it. File formats, CSV and
//! the command-line front end live in the companion `trackfuse` crate.
//!
//! Pipeline, per flight:
//!
//! 1. [`geodesy::LocalFrame::from_points`] builds an ENU tangent plane at the
//!    flight centroid.
//! 2. [`align::estimate_offset`] finds the integer clock offset between the
//!    two sources; [`align::apply_offset`] shifts the I-GPS track.
//! 3. [`fuse::fuse_track`] seeds a 5 s linear track along O-GPS and replaces
//!    each seed by the weighted centroid of its neighbours.
//! 4. [`quality`] drops over-land and poorly-covered instants.
//! 5. [`solar::feature_rows`] extracts bearing, sun azimuth/elevation and the
//!    per-camera azimuth difference.
//!
//! [`sim`] generates ground-truth flights with injected GPS errors and is the
//! verification oracle for all of the above.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("trackfuse-core needs either the `std` or the `libm` feature for floating-point math");

extern crate alloc;

pub mod align;
pub mod error;
pub mod fuse;
pub mod geodesy;
pub mod quality;
pub mod sim;
pub mod solar;
pub mod time;
pub mod track;

mod math;

pub use error::{Error, Result};
pub use geodesy::{LocalFrame, LocalPoint};
pub use time::Timestamp;
pub use track::{FlightBundle, FlightId, GeoPoint, Source, Track};
