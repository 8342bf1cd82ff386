//! Per-flight clock offset between the I-GPS and O-GPS receivers.
//!
//! Every cross-source pair within the search window is scored by its planar
//! distance in the flight's local frame; the closest pair fixes the offset.
//! Offsets are `t_o - t_i`, so adding one to an I-GPS timestamp lines it up
//! with O-GPS time.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geodesy::{LocalFrame, LocalPoint};
use crate::time::Timestamp;
use crate::track::{FlightBundle, FlightId, GeoPoint, Source, Track};

pub const DEFAULT_SEARCH_WINDOW_S: i64 = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetEstimate {
    pub flight_id: FlightId,
    /// Seconds added to every I-GPS timestamp.
    pub offset_seconds: i64,
    /// Planar distance of the reported pair, meters.
    pub min_distance_m: f64,
    /// `(O-GPS time, I-GPS time)` of the reported pair.
    pub pair: (Timestamp, Timestamp),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetMode {
    /// Offset of the single closest pair.
    ClosestPair,
    /// Lower median of the offsets of the `k` closest pairs.
    MedianOfBest(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OffsetSearch {
    pub window_s: i64,
    pub mode: OffsetMode,
}

impl Default for OffsetSearch {
    fn default() -> Self {
        OffsetSearch {
            window_s: DEFAULT_SEARCH_WINDOW_S,
            mode: OffsetMode::ClosestPair,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    distance: f64,
    offset: i64,
    t_o: Timestamp,
    t_i: Timestamp,
}

impl Candidate {
    // distance, then smaller |offset|, then earlier O-GPS time, then earlier I-GPS time
    fn beats(&self, other: &Candidate) -> bool {
        let key = |c: &Candidate| (c.offset.abs(), c.t_o, c.t_i);
        match self.distance.partial_cmp(&other.distance) {
            Some(core::cmp::Ordering::Less) => true,
            Some(core::cmp::Ordering::Equal) => key(self) < key(other),
            _ => false,
        }
    }
}

pub(crate) fn to_local_all(frame: &LocalFrame, points: &[GeoPoint]) -> Result<Vec<LocalPoint>> {
    points.iter().map(|p| frame.to_local(p)).collect()
}

/// Closest-pair offset with the given window (seconds).
pub fn estimate_offset(bundle: &FlightBundle, frame: &LocalFrame, window_s: i64) -> Result<OffsetEstimate> {
    estimate_offset_with(
        bundle,
        frame,
        &OffsetSearch {
            window_s,
            mode: OffsetMode::ClosestPair,
        },
    )
}

pub fn estimate_offset_with(
    bundle: &FlightBundle,
    frame: &LocalFrame,
    search: &OffsetSearch,
) -> Result<OffsetEstimate> {
    if search.window_s <= 0 {
        return Err(Error::Config("offset search window must be positive".into()));
    }
    let keep = match search.mode {
        OffsetMode::ClosestPair => 1,
        OffsetMode::MedianOfBest(0) => {
            return Err(Error::Config("median-of-best needs k >= 1".into()));
        }
        OffsetMode::MedianOfBest(k) => k,
    };
    let o = to_local_all(frame, bundle.o_track().points())?;
    let i = to_local_all(frame, bundle.i_track().points())?;
    let w = search.window_s;

    // best candidates, kept sorted best-first
    let mut best: Vec<Candidate> = Vec::with_capacity(keep + 1);
    let mut lo = 0;
    let mut hi = 0;
    for po in &o {
        while lo < i.len() && i[lo].timestamp.diff(po.timestamp) < -w {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < i.len() && i[hi].timestamp.diff(po.timestamp) <= w {
            hi += 1;
        }
        for pi in &i[lo..hi] {
            let c = Candidate {
                distance: po.distance(pi),
                offset: po.timestamp.diff(pi.timestamp),
                t_o: po.timestamp,
                t_i: pi.timestamp,
            };
            if best.len() == keep && !c.beats(&best[keep - 1]) {
                continue;
            }
            let at = best.iter().position(|b| c.beats(b)).unwrap_or(best.len());
            best.insert(at, c);
            best.truncate(keep);
        }
    }

    if best.is_empty() {
        return Err(Error::NoOverlap(bundle.flight_id().clone()));
    }
    let chosen = match search.mode {
        OffsetMode::ClosestPair => best[0],
        OffsetMode::MedianOfBest(_) => {
            let mut offsets: Vec<i64> = best.iter().map(|c| c.offset).collect();
            offsets.sort_unstable();
            let median = offsets[(offsets.len() - 1) / 2];
            // best is sorted, so the first match is the closest pair with that offset
            *best
                .iter()
                .find(|c| c.offset == median)
                .expect("median is one of the offsets")
        }
    };
    Ok(OffsetEstimate {
        flight_id: bundle.flight_id().clone(),
        offset_seconds: chosen.offset,
        min_distance_m: chosen.distance,
        pair: (chosen.t_o, chosen.t_i),
    })
}

/// Shifts every I-GPS timestamp by the estimated offset.
pub fn apply_offset(track: &Track, est: &OffsetEstimate) -> Result<Track> {
    if track.source() != Source::IGps {
        return Err(Error::SourceMismatch {
            expected: Source::IGps,
            found: track.source(),
        });
    }
    if *track.flight_id() != est.flight_id {
        return Err(Error::FlightMismatch {
            expected: est.flight_id.clone(),
            found: track.flight_id().clone(),
        });
    }
    let points = track
        .points()
        .iter()
        .map(|p| GeoPoint {
            timestamp: p.timestamp + est.offset_seconds,
            ..p.clone()
        })
        .collect();
    Ok(Track::with_points_unchecked(
        track.flight_id().clone(),
        Source::IGps,
        points,
    ))
}
