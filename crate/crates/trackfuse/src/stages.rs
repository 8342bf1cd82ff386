//! Pipeline stages over many flights. Every function keeps flight-id order
//! and fails on the first flight whose data cannot be processed.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use log::{info, warn};
use trackfuse_core::align::{apply_offset, estimate_offset_with, OffsetEstimate, OffsetSearch};
use trackfuse_core::fuse::{fuse_track, FusedTrack, PointKind, SyntheticPoint, WeightParams};
use trackfuse_core::geodesy::{forward_bearings, LocalFrame};
use trackfuse_core::quality::{
    count_summary, gap_filter, neighbor_counts, quality_filter, FiveNumber, LandSeaMask, NeighborCounts, QualityReport,
};
use trackfuse_core::sim::{bearing_metrics, BearingMetrics, TruthSample};
use trackfuse_core::solar::{feature_rows, CameraRig, FeatureRow};
use trackfuse_core::track::{bundle, Exclusion};
use trackfuse_core::{FlightBundle, FlightId, GeoPoint, Source, Timestamp, Track};

use crate::error::{Error, FlightContext, Result};
use crate::ingest::{parse_timestamp, read_tracks};
use crate::output::FusedRow;

/// Track files by declared source; `tracks` files name the source per row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackInputs {
    pub ogps: Vec<PathBuf>,
    pub igps: Vec<PathBuf>,
    pub tracks: Vec<PathBuf>,
}

impl TrackInputs {
    pub fn is_empty(&self) -> bool {
        self.ogps.is_empty() && self.igps.is_empty() && self.tracks.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub bundles: Vec<FlightBundle>,
    pub excluded: Vec<Exclusion>,
    /// Repeated timestamps dropped, within files and across them.
    pub duplicates: usize,
}

pub fn load(inputs: &TrackInputs) -> Result<Loaded> {
    let mut tracks = Vec::new();
    let mut duplicates = 0;
    let sets = [
        (&inputs.ogps, Some(Source::OGps)),
        (&inputs.igps, Some(Source::IGps)),
        (&inputs.tracks, None),
    ];
    for (paths, declared) in sets {
        for p in paths {
            let got = read_tracks(p, declared)?;
            duplicates += got.duplicates.len();
            for d in &got.duplicates {
                warn!(
                    "{}: duplicate {} fix for flight {} at {} dropped",
                    p.display(),
                    d.source,
                    d.flight_id,
                    d.timestamp
                );
            }
            tracks.extend(got.tracks);
        }
    }
    let report = bundle(tracks);
    duplicates += report.duplicates.len();
    for e in &report.excluded {
        warn!("flight {} has no {} track and is skipped", e.flight_id, e.missing);
    }
    info!("{} flights loaded", report.bundles.len());
    Ok(Loaded {
        bundles: report.bundles,
        excluded: report.excluded,
        duplicates,
    })
}

/// Centroid frame of all fixes of a flight.
pub fn flight_frame(b: &FlightBundle) -> Result<LocalFrame> {
    LocalFrame::from_points(b.all_points()).for_flight(b.flight_id())
}

pub fn estimate_offsets(bundles: &[FlightBundle], search: &OffsetSearch) -> Result<Vec<OffsetEstimate>> {
    bundles
        .iter()
        .map(|b| {
            let est = estimate_offset_with(b, &flight_frame(b)?, search).for_flight(b.flight_id())?;
            info!(
                "flight {}: offset {} s, pair distance {:.3} m",
                b.flight_id(),
                est.offset_seconds,
                est.min_distance_m
            );
            Ok(est)
        })
        .collect()
}

fn offset_for<'a>(offsets: &'a [OffsetEstimate], flight: &FlightId) -> Result<&'a OffsetEstimate> {
    offsets
        .iter()
        .find(|o| o.flight_id == *flight)
        .ok_or_else(|| Error::MissingOffset(flight.clone()))
}

pub fn fuse_all(
    bundles: &[FlightBundle],
    offsets: &[OffsetEstimate],
    params: &WeightParams,
) -> Result<Vec<FusedTrack>> {
    params.validate()?;
    bundles
        .iter()
        .map(|b| fuse_track(b, offset_for(offsets, b.flight_id())?, params).for_flight(b.flight_id()))
        .collect()
}

/// Merged, sorted O-GPS and offset-applied I-GPS timestamps.
pub fn geotag_times(
    b: &FlightBundle,
    est: &OffsetEstimate,
) -> Result<(Vec<Timestamp>, Vec<Timestamp>, Vec<Timestamp>)> {
    let o: Vec<Timestamp> = b.o_track().points().iter().map(|p| p.timestamp).collect();
    let shifted = apply_offset(b.i_track(), est).for_flight(b.flight_id())?;
    let i: Vec<Timestamp> = shifted.points().iter().map(|p| p.timestamp).collect();
    let mut all: Vec<Timestamp> = o.iter().chain(&i).copied().collect();
    all.sort_unstable();
    Ok((all, o, i))
}

/// Groups points by flight, keeping input order within a flight.
pub fn by_flight(points: Vec<GeoPoint>) -> BTreeMap<FlightId, Vec<GeoPoint>> {
    let mut m: BTreeMap<FlightId, Vec<GeoPoint>> = BTreeMap::new();
    for p in points {
        m.entry(p.flight_id.clone()).or_default().push(p);
    }
    m
}

/// Land and gap filters over query points (typically the fused track).
pub fn filter_all(
    points: Vec<GeoPoint>,
    bundles: &[FlightBundle],
    offsets: &[OffsetEstimate],
    mask: Option<&LandSeaMask>,
    gap_threshold_s: f64,
) -> Result<(Vec<GeoPoint>, Vec<QualityReport>)> {
    if gap_threshold_s.is_nan() || gap_threshold_s < 0.0 {
        return Err(trackfuse_core::Error::Config("gap threshold must be non-negative".into()).into());
    }
    let mut kept = Vec::new();
    let mut reports = Vec::new();
    for (flight, pts) in by_flight(points) {
        let b = bundles
            .iter()
            .find(|b| *b.flight_id() == flight)
            .ok_or_else(|| Error::MissingGeotags(flight.clone()))?;
        let (tags, _, _) = geotag_times(b, offset_for(offsets, &flight)?)?;
        let (k, r) = quality_filter(&flight, &pts, &tags, mask, gap_threshold_s).for_flight(&flight)?;
        if r.outside_mask > 0 {
            warn!(
                "flight {flight}: {} points outside the mask kept as sea",
                r.outside_mask
            );
        }
        kept.extend(k);
        reports.push(r);
    }
    Ok((kept, reports))
}

/// Feature rows of every fused track, optionally restricted to the
/// `(flight, timestamp)` pairs in `keep`. Bearings use the whole track.
pub fn features_all(
    tracks: &[FusedTrack],
    rig: &CameraRig,
    keep: Option<&BTreeSet<(FlightId, Timestamp)>>,
) -> Result<Vec<(FlightId, FeatureRow)>> {
    let mut out = Vec::new();
    for t in tracks {
        for r in feature_rows(t, rig).for_flight(&t.flight_id)? {
            if keep.is_none_or(|k| k.contains(&(t.flight_id.clone(), r.timestamp))) {
                out.push((t.flight_id.clone(), r));
            }
        }
    }
    Ok(out)
}

/// Rebuilds fused tracks from their CSV rows, each in the centroid frame
/// of its own points.
pub fn fused_tracks_from_rows(rows: Vec<FusedRow>) -> Result<Vec<FusedTrack>> {
    let mut groups: BTreeMap<FlightId, Vec<FusedRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.flight_id.clone()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (flight_id, mut rows) in groups {
        rows.sort_by_key(|r| r.timestamp);
        let geo: Vec<GeoPoint> = rows
            .iter()
            .map(|r| GeoPoint::new(flight_id.clone(), Source::Synthetic, r.timestamp, r.lat, r.lon, r.alt))
            .collect::<trackfuse_core::Result<_>>()
            .for_flight(&flight_id)?;
        let frame = LocalFrame::from_points(&geo).for_flight(&flight_id)?;
        let points = geo
            .iter()
            .zip(&rows)
            .map(|(g, r)| {
                let l = frame.to_local(g)?;
                Ok(SyntheticPoint {
                    timestamp: r.timestamp,
                    x: l.x,
                    y: l.y,
                    z: l.z,
                    kind: PointKind::Fused,
                    contributors: r.contributors,
                })
            })
            .collect::<trackfuse_core::Result<_>>()
            .for_flight(&flight_id)?;
        out.push(FusedTrack {
            flight_id,
            frame,
            points,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    /// `all`, `accepted` or `rejected`.
    pub cluster: &'static str,
    pub n: usize,
    pub ogps: FiveNumber,
    pub igps: FiveNumber,
}

/// Neighbour counts around each query time, summarized for all queries and
/// for those the gap filter accepts and rejects. Empty clusters are left out.
pub fn reject_stats(
    queries: &BTreeMap<FlightId, Vec<Timestamp>>,
    bundles: &[FlightBundle],
    offsets: &[OffsetEstimate],
    gap_threshold_s: f64,
    half_window_s: i64,
) -> Result<Vec<ClusterSummary>> {
    let mut all: Vec<NeighborCounts> = Vec::new();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (flight, q) in queries {
        let b = bundles
            .iter()
            .find(|b| b.flight_id() == flight)
            .ok_or_else(|| Error::MissingGeotags(flight.clone()))?;
        let (tags, o, i) = geotag_times(b, offset_for(offsets, flight)?)?;
        let mut q = q.clone();
        q.sort_unstable();
        let split = gap_filter(&q, &tags, gap_threshold_s).for_flight(flight)?;
        let counts = neighbor_counts(&q, &o, &i, half_window_s);
        let retained: BTreeSet<Timestamp> = split.retained.iter().copied().collect();
        for c in counts {
            if retained.contains(&c.timestamp) {
                accepted.push(c);
            } else {
                rejected.push(c);
            }
            all.push(c);
        }
    }
    let mut out = Vec::new();
    for (cluster, counts) in [("all", all), ("accepted", accepted), ("rejected", rejected)] {
        if counts.is_empty() {
            warn!("{cluster} cluster is empty");
            continue;
        }
        let s = count_summary(&counts)?;
        out.push(ClusterSummary {
            cluster,
            n: counts.len(),
            ogps: s.ogps,
            igps: s.igps,
        });
    }
    Ok(out)
}

/// Truth CSV as written by `simulate`, grouped by flight.
pub fn read_truth(path: &Path) -> Result<BTreeMap<FlightId, BTreeMap<Timestamp, TruthSample>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_truth(file, path)
}

pub fn parse_truth<R: Read>(reader: R, path: &Path) -> Result<BTreeMap<FlightId, BTreeMap<Timestamp, TruthSample>>> {
    let rows = read_table(
        reader,
        path,
        &[
            "flight_id",
            "timestamp",
            "lat",
            "lon",
            "alt",
            "bearing",
            "dir_x",
            "dir_y",
            "dir_z",
        ],
        9,
    )?;
    let mut out: BTreeMap<FlightId, BTreeMap<Timestamp, TruthSample>> = BTreeMap::new();
    for r in rows {
        let t = r.timestamp(1)?;
        let s = TruthSample {
            timestamp: t,
            lat: r.num(2)?,
            lon: r.num(3)?,
            alt: r.num(4)?,
            bearing: r.num(5)?,
            direction_ecef: [r.num(6)?, r.num(7)?, r.num(8)?],
        };
        out.entry(FlightId::new(r.get(0))).or_default().insert(t, s);
    }
    Ok(out)
}

/// Fused CSV as written by `fuse`.
pub fn read_fused(path: &Path) -> Result<Vec<FusedRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_fused(file, path)
}

pub fn parse_fused<R: Read>(reader: R, path: &Path) -> Result<Vec<FusedRow>> {
    read_table(
        reader,
        path,
        &["flight_id", "timestamp", "lat", "lon", "contributors", "alt"],
        5,
    )?
    .into_iter()
    .map(|r| {
        if r.get(0).is_empty() {
            return Err(r.bad(0, "empty".into()));
        }
        Ok(FusedRow {
            flight_id: FlightId::new(r.get(0)),
            timestamp: r.timestamp(1)?,
            lat: r.num(2)?,
            lon: r.num(3)?,
            contributors: r.get(4).parse().map_err(|_| r.bad(4, "not a count".into()))?,
            alt: if r.get(5).is_empty() { 0.0 } else { r.num(5)? },
        })
    })
    .collect()
}

/// Offsets CSV as written by `offsets`.
pub fn read_offsets(path: &Path) -> Result<Vec<OffsetEstimate>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_offsets(file, path)
}

pub fn parse_offsets<R: Read>(reader: R, path: &Path) -> Result<Vec<OffsetEstimate>> {
    read_table(
        reader,
        path,
        &[
            "flight_id",
            "min_distance_m",
            "offset_seconds",
            "ogps_timestamp",
            "igps_timestamp",
        ],
        3,
    )?
    .into_iter()
    .map(|r| {
        Ok(OffsetEstimate {
            flight_id: FlightId::new(r.get(0)),
            min_distance_m: r.num(1)?,
            offset_seconds: r.get(2).parse().map_err(|_| r.bad(2, "not an integer".into()))?,
            pair: (r.timestamp_or_epoch(3)?, r.timestamp_or_epoch(4)?),
        })
    })
    .collect()
}

struct Row<'a> {
    path: &'a Path,
    line: u64,
    names: &'a [&'a str],
    values: Vec<String>,
}

impl Row<'_> {
    fn get(&self, i: usize) -> &str {
        &self.values[i]
    }

    fn bad(&self, i: usize, reason: String) -> Error {
        Error::Row {
            path: self.path.into(),
            row: self.line,
            field: self.names[i].into(),
            reason,
        }
    }

    fn num(&self, i: usize) -> Result<f64> {
        match self.get(i).parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.bad(i, format!("not a number `{}`", self.get(i)))),
        }
    }

    fn timestamp(&self, i: usize) -> Result<Timestamp> {
        parse_timestamp(self.get(i)).ok_or_else(|| self.bad(i, format!("unparseable `{}`", self.get(i))))
    }

    fn timestamp_or_epoch(&self, i: usize) -> Result<Timestamp> {
        if self.get(i).is_empty() {
            Ok(Timestamp(0))
        } else {
            self.timestamp(i)
        }
    }
}

/// Rows of the named columns, found by header name and held in `names`
/// order. Columns from index `required` on may be absent and read as empty.
fn read_table<'a, R: Read>(reader: R, path: &'a Path, names: &'a [&'a str], required: usize) -> Result<Vec<Row<'a>>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let csv_err = |e: csv::Error| Error::Row {
        path: path.into(),
        row: e.position().map_or(0, |p| p.line()),
        field: "*".into(),
        reason: e.to_string(),
    };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let idx: Vec<Option<usize>> = names
        .iter()
        .enumerate()
        .map(|(k, n)| match headers.iter().position(|h| h.trim() == *n) {
            None if k < required => Err(Error::Row {
                path: path.into(),
                row: 1,
                field: (*n).into(),
                reason: "missing column".into(),
            }),
            found => Ok(found),
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        out.push(Row {
            path,
            line: rec.position().map_or(0, |p| p.line()),
            names,
            values: idx
                .iter()
                .map(|i| i.and_then(|i| rec.get(i)).unwrap_or("").trim().to_string())
                .collect(),
        });
    }
    Ok(out)
}

/// Bearing error of each fused track against truth directions, in the fused
/// track's own frame.
pub fn evaluate_all(
    truth: &BTreeMap<FlightId, BTreeMap<Timestamp, TruthSample>>,
    tracks: &[FusedTrack],
) -> Result<Vec<(FlightId, BearingMetrics)>> {
    let mut out = Vec::new();
    for t in tracks {
        let samples = truth.get(&t.flight_id);
        let local = t.local_points();
        let bearings = forward_bearings(&local).for_flight(&t.flight_id)?;
        let errors: Vec<f64> = local
            .iter()
            .zip(bearings)
            .filter_map(|(p, b)| {
                samples
                    .and_then(|s| s.get(&p.timestamp))
                    .map(|s| trackfuse_core::geodesy::angular_abs_diff(b.bearing, s.bearing_in(&t.frame)))
            })
            .collect();
        let m = bearing_metrics(&errors).ok_or_else(|| Error::Flight {
            flight: t.flight_id.clone(),
            source: trackfuse_core::Error::NoOverlap(t.flight_id.clone()),
        })?;
        out.push((t.flight_id.clone(), m));
    }
    Ok(out)
}

/// The retained `(flight, timestamp)` pairs of a filtered point set.
pub fn keep_set<'a>(points: impl IntoIterator<Item = &'a GeoPoint>) -> BTreeSet<(FlightId, Timestamp)> {
    points.into_iter().map(|p| (p.flight_id.clone(), p.timestamp)).collect()
}

/// Query points for `filter` from any track-like CSV (canonical tracks or
/// fused output); a file without a `source` column is read as synthetic.
pub fn read_points(path: &Path) -> Result<Vec<GeoPoint>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    })?;
    let has_source = rdr
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .iter()
        .any(|h| h.trim().eq_ignore_ascii_case("source"));
    let declared = if has_source { None } else { Some(Source::Synthetic) };
    let got = read_tracks(path, declared)?;
    Ok(got.tracks.into_iter().flat_map(Track::into_points).collect())
}
