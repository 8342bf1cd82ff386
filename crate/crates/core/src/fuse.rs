//! Weighted moving-average synthetic interpolation.
//!
//! A linear seed track is laid along O-GPS at a fixed spacing. Each seed is
//! then replaced by the weighted centroid of every O-GPS fix, offset-applied
//! I-GPS fix and seed within the time window around it, where a neighbour's
//! weight is its source weight divided by `w_temporal * |dt| + 1`.
//!
//! Fusion is a single pass over the linear seeds: fused outputs never feed
//! back in as neighbours, so seeds can be processed in any order.

use alloc::vec::Vec;

use crate::align::{apply_offset, to_local_all, OffsetEstimate};
use crate::error::{Error, Result};
use crate::geodesy::{LocalFrame, LocalPoint};
use crate::time::Timestamp;
use crate::track::{FlightBundle, FlightId, GeoPoint, Source};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub w_ogps: f64,
    pub w_igps: f64,
    pub w_synth: f64,
    /// Per second.
    pub w_temporal: f64,
    /// Neighbours with `|dt| <= window_s` contribute.
    pub window_s: i64,
    pub seed_spacing_s: i64,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            w_ogps: 8.0,
            w_igps: 5.0,
            w_synth: 5.0,
            w_temporal: 0.5,
            window_s: 40,
            seed_spacing_s: 5,
        }
    }
}

impl WeightParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |w: f64| w.is_finite() && w > 0.0;
        if !(positive(self.w_ogps) && positive(self.w_igps) && positive(self.w_synth)) {
            return Err(Error::Config("source weights must be positive".into()));
        }
        if !positive(self.w_temporal) {
            return Err(Error::Config("temporal weight must be positive".into()));
        }
        if self.window_s <= 0 || self.seed_spacing_s <= 0 {
            return Err(Error::Config("window and seed spacing must be positive".into()));
        }
        Ok(())
    }

    pub fn source_weight(&self, source: Source) -> f64 {
        match source {
            Source::OGps => self.w_ogps,
            Source::IGps => self.w_igps,
            Source::Synthetic => self.w_synth,
        }
    }
}

/// `W_source / (W_temporal * |t_diff_s| + 1)`.
pub fn neighbor_weight(source: Source, t_diff_s: i64, params: &WeightParams) -> f64 {
    params.source_weight(source) / (params.w_temporal * t_diff_s.unsigned_abs() as f64 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Seed,
    Fused,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticPoint {
    pub timestamp: Timestamp,
    pub x: f64,
    pub y: f64,
    /// Carried from the linear seed; never fused.
    pub z: f64,
    pub kind: PointKind,
    /// Neighbours used, the seed itself included.
    pub contributors: usize,
}

impl SyntheticPoint {
    pub fn local(&self) -> LocalPoint {
        LocalPoint {
            x: self.x,
            y: self.y,
            z: self.z,
            timestamp: self.timestamp,
            source: Source::Synthetic,
        }
    }
}

/// Linear interpolation of a time-sorted O-GPS track at `spacing_s` steps,
/// from its first timestamp up to and including its last when it falls on
/// the grid.
pub fn linear_seed(o_track: &[LocalPoint], spacing_s: i64) -> Result<Vec<SyntheticPoint>> {
    if o_track.len() < 2 {
        return Err(Error::InsufficientData("linear seed needs at least two O-GPS points"));
    }
    if spacing_s <= 0 {
        return Err(Error::Config("seed spacing must be positive".into()));
    }
    let first = o_track[0].timestamp;
    let last = o_track[o_track.len() - 1].timestamp;
    let mut seeds = Vec::with_capacity((last.diff(first) / spacing_s + 1) as usize);
    let mut seg = 0;
    let mut t = first;
    while t <= last {
        while seg + 1 < o_track.len() - 1 && o_track[seg + 1].timestamp <= t {
            seg += 1;
        }
        let a = &o_track[seg];
        let b = &o_track[seg + 1];
        let (x, y, z) = if t == a.timestamp {
            (a.x, a.y, a.z)
        } else if t == b.timestamp {
            (b.x, b.y, b.z)
        } else {
            let f = t.diff(a.timestamp) as f64 / b.timestamp.diff(a.timestamp) as f64;
            (a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, a.z + (b.z - a.z) * f)
        };
        seeds.push(SyntheticPoint {
            timestamp: t,
            x,
            y,
            z,
            kind: PointKind::Seed,
            contributors: 0,
        });
        t = t + spacing_s;
    }
    Ok(seeds)
}

/// Weighted centroid of the neighbours within the window of `seed`.
///
/// `neighbors` should contain the seed itself (as a `Synthetic` point at
/// `dt = 0`); points outside the window are ignored. With no neighbour in
/// the window the seed position is returned with zero contributors.
pub fn fuse_point(seed: &SyntheticPoint, neighbors: &[LocalPoint], params: &WeightParams) -> SyntheticPoint {
    let mut acc = Accumulator::new(seed);
    for n in neighbors {
        let dt = n.timestamp.diff(seed.timestamp);
        if dt.abs() <= params.window_s {
            acc.add(n, dt, params);
        }
    }
    acc.finish()
}

// Sums are taken relative to the seed position so that coincident
// neighbours reproduce it exactly and large frame coordinates do not
// cost precision.
struct Accumulator<'a> {
    seed: &'a SyntheticPoint,
    sum_w: f64,
    sum_dx: f64,
    sum_dy: f64,
    n: usize,
}

impl<'a> Accumulator<'a> {
    fn new(seed: &'a SyntheticPoint) -> Self {
        Accumulator {
            seed,
            sum_w: 0.0,
            sum_dx: 0.0,
            sum_dy: 0.0,
            n: 0,
        }
    }

    fn add(&mut self, p: &LocalPoint, dt: i64, params: &WeightParams) {
        let w = neighbor_weight(p.source, dt, params);
        self.sum_w += w;
        self.sum_dx += w * (p.x - self.seed.x);
        self.sum_dy += w * (p.y - self.seed.y);
        self.n += 1;
    }

    fn finish(self) -> SyntheticPoint {
        let (x, y) = if self.n == 0 {
            (self.seed.x, self.seed.y)
        } else {
            (
                self.seed.x + self.sum_dx / self.sum_w,
                self.seed.y + self.sum_dy / self.sum_w,
            )
        };
        SyntheticPoint {
            timestamp: self.seed.timestamp,
            x,
            y,
            z: self.seed.z,
            kind: PointKind::Fused,
            contributors: self.n,
        }
    }
}

/// Fuses local-frame tracks. `i_shifted` must already carry the clock offset.
/// Both inputs are sorted by time.
pub fn fuse_local(o: &[LocalPoint], i_shifted: &[LocalPoint], params: &WeightParams) -> Result<Vec<SyntheticPoint>> {
    params.validate()?;
    let seeds = linear_seed(o, params.seed_spacing_s)?;

    let mut neighbors: Vec<LocalPoint> = Vec::with_capacity(o.len() + i_shifted.len() + seeds.len());
    neighbors.extend(o.iter().map(|p| LocalPoint {
        source: Source::OGps,
        ..*p
    }));
    neighbors.extend(i_shifted.iter().map(|p| LocalPoint {
        source: Source::IGps,
        ..*p
    }));
    neighbors.extend(seeds.iter().map(SyntheticPoint::local));
    // stable sort keeps O, I, seed order within a second, fixing summation order
    neighbors.sort_by_key(|p| p.timestamp);

    let w = params.window_s;
    let mut lo = 0;
    let mut hi = 0;
    let mut fused = Vec::with_capacity(seeds.len());
    for seed in &seeds {
        while lo < neighbors.len() && neighbors[lo].timestamp.diff(seed.timestamp) < -w {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < neighbors.len() && neighbors[hi].timestamp.diff(seed.timestamp) <= w {
            hi += 1;
        }
        let mut acc = Accumulator::new(seed);
        for n in &neighbors[lo..hi] {
            acc.add(n, n.timestamp.diff(seed.timestamp), params);
        }
        fused.push(acc.finish());
    }
    Ok(fused)
}

/// Fused points of one flight in its local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedTrack {
    pub flight_id: FlightId,
    pub frame: LocalFrame,
    /// Uniformly spaced by the seed spacing.
    pub points: Vec<SyntheticPoint>,
}

impl FusedTrack {
    pub fn local_points(&self) -> Vec<LocalPoint> {
        self.points.iter().map(SyntheticPoint::local).collect()
    }

    /// Converts back to geodetic synthetic geotags.
    pub fn to_geo(&self) -> Result<Vec<GeoPoint>> {
        self.points
            .iter()
            .map(|p| self.frame.from_local(&p.local(), self.flight_id.clone()))
            .collect()
    }
}

/// Full per-flight fusion in the flight's centroid frame.
pub fn fuse_track(bundle: &FlightBundle, est: &OffsetEstimate, params: &WeightParams) -> Result<FusedTrack> {
    let frame = LocalFrame::from_points(bundle.all_points())?;
    fuse_track_in(bundle, est, params, frame)
}

/// [`fuse_track`] in a caller-chosen frame.
pub fn fuse_track_in(
    bundle: &FlightBundle,
    est: &OffsetEstimate,
    params: &WeightParams,
    frame: LocalFrame,
) -> Result<FusedTrack> {
    let shifted = apply_offset(bundle.i_track(), est)?;
    let o = to_local_all(&frame, bundle.o_track().points())?;
    let i = to_local_all(&frame, shifted.points())?;
    Ok(FusedTrack {
        flight_id: bundle.flight_id().clone(),
        frame,
        points: fuse_local(&o, &i, params)?,
    })
}
