//! Pre-processing filters and neighbour-count statistics.
//!
//! Points over land are removed with a raster land-sea mask. Points whose
//! bracketing geotags (either source) are more than the gap threshold apart
//! are removed too: the default 43.75 s is the average duration of a 45°
//! turn, so a longer unobserved interval may hide a course change.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::time::Timestamp;
use crate::track::{FlightId, GeoPoint};

pub const DEFAULT_GAP_THRESHOLD_S: f64 = 43.75;
pub const DEFAULT_COUNT_HALF_WINDOW_S: i64 = 30;

/// Row-major land bit grid. Row 0 is the southernmost row, column 0 the
/// westernmost; bit `row * cols + col` lives in byte `idx / 8` at bit
/// `idx % 8` (least significant first). A set bit is land.
#[derive(Debug, Clone, PartialEq)]
pub struct LandSeaMask {
    lat_min: f64,
    lat_max: f64,
    lon_min: f64,
    lon_max: f64,
    cell_deg: f64,
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

fn grid_len(span: f64, cell: f64) -> Result<usize> {
    let n = crate::math::round(span / cell);
    if n < 1.0 || (n * cell - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::Config("mask bounds are not a whole number of cells".into()));
    }
    Ok(n as usize)
}

impl LandSeaMask {
    pub fn new(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64, cell_deg: f64, cells: Vec<u8>) -> Result<Self> {
        if !(cell_deg.is_finite() && cell_deg > 0.0) {
            return Err(Error::Config("mask cell size must be positive".into()));
        }
        if !(lat_min < lat_max && lon_min < lon_max) {
            return Err(Error::Config("mask bounds are empty".into()));
        }
        crate::track::check_lat_lon(lat_min, lon_min)?;
        crate::track::check_lat_lon(lat_max, lon_max)?;
        let rows = grid_len(lat_max - lat_min, cell_deg)?;
        let cols = grid_len(lon_max - lon_min, cell_deg)?;
        if cells.len() != (rows * cols).div_ceil(8) {
            return Err(Error::Config("mask cell data does not match its dimensions".into()));
        }
        Ok(LandSeaMask {
            lat_min,
            lat_max,
            lon_min,
            lon_max,
            cell_deg,
            rows,
            cols,
            cells,
        })
    }

    /// Builds a mask by evaluating `land(row, col)` for every cell.
    pub fn from_fn(
        lat_min: f64,
        lat_max: f64,
        lon_min: f64,
        lon_max: f64,
        cell_deg: f64,
        mut land: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let rows = grid_len(lat_max - lat_min, cell_deg)?;
        let cols = grid_len(lon_max - lon_min, cell_deg)?;
        let mut cells = alloc::vec![0u8; (rows * cols).div_ceil(8)];
        for r in 0..rows {
            for c in 0..cols {
                if land(r, c) {
                    let idx = r * cols + c;
                    cells[idx / 8] |= 1 << (idx % 8);
                }
            }
        }
        LandSeaMask::new(lat_min, lat_max, lon_min, lon_max, cell_deg, cells)
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.lat_min, self.lat_max, self.lon_min, self.lon_max)
    }

    pub fn cell_deg(&self) -> f64 {
        self.cell_deg
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// `Some(true)` over land, `None` outside the mask. Cells are closed on
    /// their south and west edges; the north and east mask edges belong to
    /// the last row and column.
    pub fn is_land(&self, lat: f64, lon: f64) -> Option<bool> {
        if !(lat >= self.lat_min && lat <= self.lat_max && lon >= self.lon_min && lon <= self.lon_max) {
            return None;
        }
        let idx = |v: f64, min: f64, n: usize| (crate::math::floor((v - min) / self.cell_deg) as usize).min(n - 1);
        let r = idx(lat, self.lat_min, self.rows);
        let c = idx(lon, self.lon_min, self.cols);
        let i = r * self.cols + c;
        Some(self.cells[i / 8] >> (i % 8) & 1 == 1)
    }
}

/// Retained and removed items, each in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub retained: Vec<T>,
    pub removed: Vec<T>,
}

impl<T> Default for Partition<T> {
    fn default() -> Self {
        Partition {
            retained: Vec::new(),
            removed: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandFilterOutcome {
    pub partition: Partition<GeoPoint>,
    /// Points outside the mask, kept as sea.
    pub outside_mask: usize,
}

pub fn land_filter(points: &[GeoPoint], mask: &LandSeaMask) -> LandFilterOutcome {
    let mut out = LandFilterOutcome {
        partition: Partition::default(),
        outside_mask: 0,
    };
    for p in points {
        match mask.is_land(p.lat, p.lon) {
            Some(true) => out.partition.removed.push(p.clone()),
            Some(false) => out.partition.retained.push(p.clone()),
            None => {
                out.outside_mask += 1;
                out.partition.retained.push(p.clone());
            }
        }
    }
    out
}

/// Gap between the nearest geotag at or before `query` and the nearest at
/// or after it. `None` when the query is outside the geotag span.
pub fn bracket_gap(query: Timestamp, geotag_times: &[Timestamp]) -> Option<i64> {
    let after = geotag_times.partition_point(|g| *g < query);
    let before = geotag_times.partition_point(|g| *g <= query);
    if before == 0 || after == geotag_times.len() {
        return None;
    }
    Some(geotag_times[after].diff(geotag_times[before - 1]))
}

/// Whether `query` passes the gap test against sorted geotag times.
pub fn gap_ok(query: Timestamp, geotag_times: &[Timestamp], threshold_s: f64) -> bool {
    bracket_gap(query, geotag_times).is_some_and(|g| g as f64 <= threshold_s)
}

/// Splits query times by the bracketing-gap test. `geotag_times` is the
/// sorted union of both sources.
pub fn gap_filter(
    query_times: &[Timestamp],
    geotag_times: &[Timestamp],
    threshold_s: f64,
) -> Result<Partition<Timestamp>> {
    if geotag_times.is_empty() {
        return Err(Error::NoGeotags);
    }
    let mut out = Partition::default();
    for &q in query_times {
        if gap_ok(q, geotag_times, threshold_s) {
            out.retained.push(q);
        } else {
            out.removed.push(q);
        }
    }
    Ok(out)
}

/// Per-flight filter bookkeeping. Each removed point is attributed to the
/// first filter it fails, land before gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualityReport {
    pub flight_id: FlightId,
    pub total: usize,
    pub removed_land: usize,
    pub removed_gap: usize,
    pub retained: usize,
    /// Points that fell outside the mask and were kept as sea.
    pub outside_mask: usize,
}

/// Land filter (when a mask is given) followed by the gap filter.
pub fn quality_filter(
    flight_id: &FlightId,
    points: &[GeoPoint],
    geotag_times: &[Timestamp],
    mask: Option<&LandSeaMask>,
    threshold_s: f64,
) -> Result<(Vec<GeoPoint>, QualityReport)> {
    let (sea, removed_land, outside_mask) = match mask {
        Some(m) => {
            let o = land_filter(points, m);
            let n = o.partition.removed.len();
            (o.partition.retained, n, o.outside_mask)
        }
        None => (points.to_vec(), 0, 0),
    };
    if geotag_times.is_empty() {
        return Err(Error::NoGeotags);
    }
    let (kept, gapped): (Vec<GeoPoint>, Vec<GeoPoint>) = sea
        .into_iter()
        .partition(|p| gap_ok(p.timestamp, geotag_times, threshold_s));
    let report = QualityReport {
        flight_id: flight_id.clone(),
        total: points.len(),
        removed_land,
        removed_gap: gapped.len(),
        retained: kept.len(),
        outside_mask,
    };
    Ok((kept, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborCounts {
    pub timestamp: Timestamp,
    pub n_ogps: usize,
    pub n_igps: usize,
}

fn count_within(times: &[Timestamp], q: Timestamp, half: i64) -> usize {
    let lo = times.partition_point(|t| *t < q - half);
    let hi = times.partition_point(|t| *t <= q + half);
    hi - lo
}

/// Geotags of each source within `±half_window_s` (inclusive) of every
/// query. Time slices must be sorted.
pub fn neighbor_counts(
    query_times: &[Timestamp],
    o_times: &[Timestamp],
    i_times: &[Timestamp],
    half_window_s: i64,
) -> Vec<NeighborCounts> {
    query_times
        .iter()
        .map(|&q| NeighborCounts {
            timestamp: q,
            n_ogps: count_within(o_times, q, half_window_s),
            n_igps: count_within(i_times, q, half_window_s),
        })
        .collect()
}

/// Five-number summary with Tukey hinges: the quartiles are the medians of
/// the lower and upper halves, each half including the median for odd `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn five_number(values: &[f64]) -> Result<FiveNumber> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let half = n.div_ceil(2);
    Ok(FiveNumber {
        min: v[0],
        q1: median_sorted(&v[..half]),
        median: median_sorted(&v),
        q3: median_sorted(&v[n - half..]),
        max: v[n - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSummary {
    pub ogps: FiveNumber,
    pub igps: FiveNumber,
}

pub fn count_summary(counts: &[NeighborCounts]) -> Result<CountSummary> {
    let o: Vec<f64> = counts.iter().map(|c| c.n_ogps as f64).collect();
    let i: Vec<f64> = counts.iter().map(|c| c.n_igps as f64).collect();
    Ok(CountSummary {
        ogps: five_number(&o)?,
        igps: five_number(&i)?,
    })
}
