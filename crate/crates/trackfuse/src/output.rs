//! Deterministic CSV writers. Floats are printed with 9 significant digits,
//! timestamps as `YYYY-MM-DDThh:mm:ssZ`, rows in flight-id order.

use std::io::Write;

use trackfuse_core::align::OffsetEstimate;
use trackfuse_core::fuse::FusedTrack;
use trackfuse_core::quality::{FiveNumber, QualityReport};
use trackfuse_core::sim::{BearingMetrics, TruthTrack};
use trackfuse_core::solar::{CameraRig, FeatureRow};
use trackfuse_core::{FlightId, GeoPoint, Timestamp};

/// `v` rounded to 9 significant digits, printed in the shortest form that
/// reads back to that rounded value. `-0` prints as `0`.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("float formatting round-trips");
    format!("{rounded}")
}

fn line(w: &mut impl Write, fields: &[String]) -> std::io::Result<()> {
    writeln!(w, "{}", fields.join(","))
}

fn ts(t: Timestamp) -> String {
    t.to_string()
}

pub fn write_tracks<'a>(w: &mut impl Write, points: impl IntoIterator<Item = &'a GeoPoint>) -> std::io::Result<()> {
    writeln!(w, "flight_id,source,timestamp,lat,lon,alt")?;
    for p in points {
        line(
            w,
            &[
                p.flight_id.to_string(),
                p.source.as_str().into(),
                ts(p.timestamp),
                sig9(p.lat),
                sig9(p.lon),
                sig9(p.alt),
            ],
        )?;
    }
    Ok(())
}

/// Offsets, with the timestamps of the winning pair as two trailing columns.
pub fn write_offsets(w: &mut impl Write, offsets: &[OffsetEstimate]) -> std::io::Result<()> {
    writeln!(
        w,
        "flight_id,min_distance_m,offset_seconds,ogps_timestamp,igps_timestamp"
    )?;
    for o in offsets {
        line(
            w,
            &[
                o.flight_id.to_string(),
                sig9(o.min_distance_m),
                o.offset_seconds.to_string(),
                ts(o.pair.0),
                ts(o.pair.1),
            ],
        )?;
    }
    Ok(())
}

/// One fused point in geodetic form.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedRow {
    pub flight_id: FlightId,
    pub timestamp: Timestamp,
    pub lat: f64,
    pub lon: f64,
    pub contributors: usize,
    /// Carried from the linear seed.
    pub alt: f64,
}

pub fn fused_rows(tracks: &[FusedTrack]) -> trackfuse_core::Result<Vec<FusedRow>> {
    let mut rows = Vec::new();
    for t in tracks {
        for (p, g) in t.points.iter().zip(t.to_geo()?) {
            rows.push(FusedRow {
                flight_id: t.flight_id.clone(),
                timestamp: p.timestamp,
                lat: g.lat,
                lon: g.lon,
                contributors: p.contributors,
                alt: g.alt,
            });
        }
    }
    Ok(rows)
}

pub fn write_fused(w: &mut impl Write, rows: &[FusedRow]) -> std::io::Result<()> {
    writeln!(w, "flight_id,timestamp,lat,lon,contributors,alt")?;
    for r in rows {
        line(
            w,
            &[
                r.flight_id.to_string(),
                ts(r.timestamp),
                sig9(r.lat),
                sig9(r.lon),
                r.contributors.to_string(),
                sig9(r.alt),
            ],
        )?;
    }
    Ok(())
}

pub fn write_features(w: &mut impl Write, rig: &CameraRig, rows: &[(FlightId, FeatureRow)]) -> std::io::Result<()> {
    let mut header = String::from("flight_id,timestamp,lat,lon,bearing,carried,sun_azimuth,sun_elevation");
    for (name, _) in rig.cameras() {
        header.push_str(&format!(",{name}_az_abs_diff"));
    }
    writeln!(w, "{header}")?;
    for (flight, r) in rows {
        let mut f = vec![
            flight.to_string(),
            ts(r.timestamp),
            sig9(r.lat),
            sig9(r.lon),
            sig9(r.bearing),
            r.carried.to_string(),
            sig9(r.sun.azimuth),
            sig9(r.sun.elevation),
        ];
        f.extend(r.az_abs_diff.iter().map(|&d| sig9(d)));
        line(w, &f)?;
    }
    Ok(())
}

pub fn write_quality(w: &mut impl Write, reports: &[QualityReport]) -> std::io::Result<()> {
    writeln!(w, "flight_id,total,removed_land,removed_gap,retained,outside_mask")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.flight_id, r.total, r.removed_land, r.removed_gap, r.retained, r.outside_mask
        )?;
    }
    Ok(())
}

/// One row per cluster and source.
pub fn write_count_summaries(w: &mut impl Write, rows: &[(&str, &str, usize, FiveNumber)]) -> std::io::Result<()> {
    writeln!(w, "cluster,source,n,min,q1,median,q3,max")?;
    for (cluster, source, n, f) in rows {
        line(
            w,
            &[
                cluster.to_string(),
                source.to_string(),
                n.to_string(),
                sig9(f.min),
                sig9(f.q1),
                sig9(f.median),
                sig9(f.q3),
                sig9(f.max),
            ],
        )?;
    }
    Ok(())
}

/// Shortest round-trip form; exponent notation for tiny magnitudes.
fn full(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn write_truth(w: &mut impl Write, truth: &TruthTrack) -> std::io::Result<()> {
    writeln!(w, "flight_id,timestamp,lat,lon,alt,bearing,dir_x,dir_y,dir_z")?;
    for s in &truth.samples {
        // direction components at full precision: they carry the bearing
        // into other frames
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            truth.flight_id,
            ts(s.timestamp),
            full(s.lat),
            full(s.lon),
            full(s.alt),
            sig9(s.bearing),
            full(s.direction_ecef[0]),
            full(s.direction_ecef[1]),
            full(s.direction_ecef[2])
        )?;
    }
    Ok(())
}

pub fn write_metrics(w: &mut impl Write, rows: &[(FlightId, BearingMetrics)]) -> std::io::Result<()> {
    writeln!(w, "flight_id,n,median_abs_err_deg,p90_abs_err_deg,rmse_deg")?;
    for (f, m) in rows {
        line(
            w,
            &[
                f.to_string(),
                m.n.to_string(),
                sig9(m.median_abs_err_deg),
                sig9(m.p90_abs_err_deg),
                sig9(m.rmse_deg),
            ],
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(0.1 + 0.2), "0.3");
        assert_eq!(sig9(45.123456789012), "45.1234568");
        assert_eq!(sig9(-61.5), "-61.5");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(1234567890123.0), "1234567890000");
        assert_eq!(sig9(16.0 / 13.0), "1.23076923");
        assert_eq!(sig9(5.0 / 21.0), "0.238095238");
        assert_eq!(sig9(2.5e-7), "0.00000025");
    }
}
