//! Geotags, per-source tracks and per-flight bundles.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::time::Timestamp;

/// Origin of a position fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    /// Fixed-rate cockpit receiver.
    OGps,
    /// Image-embedded handheld receiver.
    IGps,
    /// Interpolated point.
    Synthetic,
}

impl Source {
    pub const fn as_str(self) -> &'static str {
        match self {
            Source::OGps => "ogps",
            Source::IGps => "igps",
            Source::Synthetic => "synthetic",
        }
    }

    /// Accepts `ogps`, `o-gps`, `igps`, `i-gps`, `synthetic`, case-insensitively.
    pub fn parse(s: &str) -> Option<Source> {
        let s = s.trim();
        let eq = |a: &str| s.eq_ignore_ascii_case(a);
        if eq("ogps") || eq("o-gps") {
            Some(Source::OGps)
        } else if eq("igps") || eq("i-gps") {
            Some(Source::IGps)
        } else if eq("synthetic") {
            Some(Source::Synthetic)
        } else {
            None
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Flight identifier. Purely numeric ids order numerically, so flight 9
/// sorts before flight 10; everything else orders after them, lexically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlightId(String);

impl FlightId {
    pub fn new(id: impl Into<String>) -> Self {
        FlightId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u64> {
        if self.0.is_empty() || !self.0.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        self.0.parse().ok()
    }
}

impl Ord for FlightId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for FlightId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FlightId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FlightId {
    fn from(s: &str) -> Self {
        FlightId(s.to_string())
    }
}

impl From<u32> for FlightId {
    fn from(n: u32) -> Self {
        FlightId(n.to_string())
    }
}

/// One timestamped geotag.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPoint {
    pub flight_id: FlightId,
    pub source: Source,
    pub timestamp: Timestamp,
    /// Degrees, `[-90, 90]`.
    pub lat: f64,
    /// Degrees, `[-180, 180]`.
    pub lon: f64,
    /// Meters above the ellipsoid.
    pub alt: f64,
}

impl GeoPoint {
    pub fn new(
        flight_id: FlightId,
        source: Source,
        timestamp: Timestamp,
        lat: f64,
        lon: f64,
        alt: f64,
    ) -> Result<Self> {
        check_lat_lon(lat, lon)?;
        if !alt.is_finite() {
            return Err(Error::InvalidPoint("altitude is not finite"));
        }
        Ok(GeoPoint {
            flight_id,
            source,
            timestamp,
            lat,
            lon,
            alt,
        })
    }
}

pub(crate) fn check_lat_lon(lat: f64, lon: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(Error::InvalidPoint("latitude outside [-90, 90]"));
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(Error::InvalidPoint("longitude outside [-180, 180]"));
    }
    Ok(())
}

/// Time-ordered points of one source for one flight.
///
/// Timestamps are strictly increasing: construction keeps the first point
/// for a repeated timestamp and hands the rest back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    flight_id: FlightId,
    source: Source,
    points: Vec<GeoPoint>,
}

impl Track {
    /// Sorts `points` by time and drops repeated timestamps.
    /// Returns the track and the dropped duplicates, in input order.
    pub fn from_points(
        flight_id: FlightId,
        source: Source,
        mut points: Vec<GeoPoint>,
    ) -> Result<(Track, Vec<GeoPoint>)> {
        for p in &points {
            if p.flight_id != flight_id {
                return Err(Error::FlightMismatch {
                    expected: flight_id,
                    found: p.flight_id.clone(),
                });
            }
            if p.source != source {
                return Err(Error::SourceMismatch {
                    expected: source,
                    found: p.source,
                });
            }
        }
        // stable: the first occurrence of a timestamp stays first
        points.sort_by_key(|p| p.timestamp);
        let mut kept: Vec<GeoPoint> = Vec::with_capacity(points.len());
        let mut dropped = Vec::new();
        for p in points {
            match kept.last() {
                Some(last) if last.timestamp == p.timestamp => dropped.push(p),
                _ => kept.push(p),
            }
        }
        Ok((
            Track {
                flight_id,
                source,
                points: kept,
            },
            dropped,
        ))
    }

    pub fn flight_id(&self) -> &FlightId {
        &self.flight_id
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<GeoPoint> {
        self.points
    }

    pub(crate) fn with_points_unchecked(flight_id: FlightId, source: Source, points: Vec<GeoPoint>) -> Track {
        Track {
            flight_id,
            source,
            points,
        }
    }
}

/// O-GPS and I-GPS tracks of one flight, both non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightBundle {
    flight_id: FlightId,
    o_track: Track,
    i_track: Track,
}

impl FlightBundle {
    pub fn new(o_track: Track, i_track: Track) -> Result<Self> {
        if o_track.source() != Source::OGps {
            return Err(Error::SourceMismatch {
                expected: Source::OGps,
                found: o_track.source(),
            });
        }
        if i_track.source() != Source::IGps {
            return Err(Error::SourceMismatch {
                expected: Source::IGps,
                found: i_track.source(),
            });
        }
        if o_track.flight_id() != i_track.flight_id() {
            return Err(Error::FlightMismatch {
                expected: o_track.flight_id().clone(),
                found: i_track.flight_id().clone(),
            });
        }
        if o_track.is_empty() || i_track.is_empty() {
            return Err(Error::EmptyTrack);
        }
        Ok(FlightBundle {
            flight_id: o_track.flight_id().clone(),
            o_track,
            i_track,
        })
    }

    pub fn flight_id(&self) -> &FlightId {
        &self.flight_id
    }

    pub fn o_track(&self) -> &Track {
        &self.o_track
    }

    pub fn i_track(&self) -> &Track {
        &self.i_track
    }

    /// Every geotag of the flight, O-GPS first.
    pub fn all_points(&self) -> impl Iterator<Item = &GeoPoint> {
        self.o_track.points().iter().chain(self.i_track.points())
    }
}

/// A flight left out of fusion because one source is absent or empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub flight_id: FlightId,
    pub missing: Source,
}

#[derive(Debug, Clone, Default)]
pub struct BundleReport {
    /// Sorted by flight id.
    pub bundles: Vec<FlightBundle>,
    pub excluded: Vec<Exclusion>,
    /// Points dropped while merging several tracks of the same flight and source.
    pub duplicates: Vec<GeoPoint>,
}

/// Pairs O-GPS and I-GPS tracks by flight id.
///
/// Several tracks for the same flight and source (two handheld receivers, or
/// the same flight split across files) are merged first. Synthetic tracks
/// are ignored.
pub fn bundle(tracks: Vec<Track>) -> BundleReport {
    let mut by_flight: BTreeMap<FlightId, (Vec<GeoPoint>, Vec<GeoPoint>)> = BTreeMap::new();
    for t in tracks {
        let source = t.source();
        let entry = by_flight.entry(t.flight_id().clone()).or_default();
        match source {
            Source::OGps => entry.0.extend(t.into_points()),
            Source::IGps => entry.1.extend(t.into_points()),
            Source::Synthetic => {}
        }
    }

    let mut report = BundleReport::default();
    for (flight_id, (o, i)) in by_flight {
        if o.is_empty() || i.is_empty() {
            report.excluded.push(Exclusion {
                flight_id,
                missing: if o.is_empty() { Source::OGps } else { Source::IGps },
            });
            continue;
        }
        // the inputs were already validated tracks, so these cannot fail
        let (o_track, mut dup) =
            Track::from_points(flight_id.clone(), Source::OGps, o).expect("points share flight and source");
        let (i_track, dup_i) =
            Track::from_points(flight_id.clone(), Source::IGps, i).expect("points share flight and source");
        dup.extend(dup_i);
        report.duplicates.extend(dup);
        report
            .bundles
            .push(FlightBundle::new(o_track, i_track).expect("non-empty tracks of one flight"));
    }
    report
}
