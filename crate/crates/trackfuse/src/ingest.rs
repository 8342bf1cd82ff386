//! Canonical track CSV.
//!
//! ```text
//! flight_id,source,timestamp,lat,lon,alt
//! 1,ogps,2018-09-15T12:00:00Z,45.1,-61.5,210
//! ```
//!
//! Columns are found by header name, in any order; unknown columns are
//! ignored. `source` (`ogps`, `igps`, `synthetic`; `O-GPS`/`I-GPS` also
//! accepted) may be omitted when the caller declares the source of the whole
//! file. `alt` may be absent or blank (read as 0). Timestamps are UTC: unix
//! seconds, RFC 3339, `YYYY-MM-DD hh:mm:ss` or EXIF `YYYY:MM:DD hh:mm:ss`;
//! fractional seconds are truncated to the second.
//!
//! Repeated timestamps within one flight and source keep the first row;
//! the others are reported back as duplicates.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use trackfuse_core::{FlightId, GeoPoint, Source, Timestamp, Track};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    /// One track per flight and source, sorted by flight id then source.
    pub tracks: Vec<Track>,
    pub duplicates: Vec<GeoPoint>,
}

const NAIVE_FORMATS: [&str; 3] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y:%m:%d %H:%M:%S%.f"];

pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(Timestamp(v));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(Timestamp(dt.timestamp()));
    }
    NAIVE_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|dt| Timestamp(dt.and_utc().timestamp()))
}

struct Columns {
    flight_id: usize,
    source: Option<usize>,
    timestamp: usize,
    lat: usize,
    lon: usize,
    alt: Option<usize>,
}

impl Columns {
    fn find(path: &Path, headers: &csv::StringRecord, need_source: bool) -> Result<Columns> {
        let pos = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
        let req = |name: &str| {
            pos(name).ok_or_else(|| Error::Row {
                path: path.into(),
                row: 1,
                field: name.into(),
                reason: "missing column".into(),
            })
        };
        let source = pos("source");
        if need_source && source.is_none() {
            req("source")?;
        }
        Ok(Columns {
            flight_id: req("flight_id")?,
            source,
            timestamp: req("timestamp")?,
            lat: req("lat")?,
            lon: req("lon")?,
            alt: pos("alt"),
        })
    }
}

/// Reads a track file. `declared` is the source of every row when the file
/// holds one receiver; with `None` each row must name its source.
pub fn read_tracks(path: &Path, declared: Option<Source>) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_tracks(file, path, declared)
}

/// [`read_tracks`] over any reader; `path` only labels diagnostics.
pub fn parse_tracks<R: Read>(reader: R, path: &Path, declared: Option<Source>) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = Columns::find(path, &headers, declared.is_none())?;

    let mut groups: BTreeMap<(FlightId, Source), Vec<GeoPoint>> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        let row = record.position().map_or(0, |p| p.line());
        let bad = |field: &str, reason: String| Error::Row {
            path: path.into(),
            row,
            field: field.into(),
            reason,
        };
        let field = |i: usize| record.get(i).unwrap_or("").trim();

        let flight = field(cols.flight_id);
        if flight.is_empty() {
            return Err(bad("flight_id", "empty".into()));
        }
        let source = match (cols.source.map(field), declared) {
            (Some(s), declared) if !s.is_empty() => {
                let s = Source::parse(s).ok_or_else(|| bad("source", format!("unknown source `{s}`")))?;
                if declared.is_some_and(|d| d != s) {
                    return Err(bad(
                        "source",
                        format!("row says {s}, file declared {}", declared.unwrap()),
                    ));
                }
                s
            }
            (_, Some(d)) => d,
            _ => return Err(bad("source", "empty".into())),
        };
        let ts = field(cols.timestamp);
        let timestamp = parse_timestamp(ts).ok_or_else(|| bad("timestamp", format!("unparseable `{ts}`")))?;
        let num = |name: &str, s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| bad(name, format!("not a number `{s}`")))?;
            if !v.is_finite() {
                return Err(bad(name, "not finite".into()));
            }
            Ok(v)
        };
        let lat = num("lat", field(cols.lat))?;
        let lon = num("lon", field(cols.lon))?;
        let alt = match cols.alt.map(field) {
            Some(s) if !s.is_empty() => num("alt", s)?,
            _ => 0.0,
        };
        let flight_id = FlightId::new(flight);
        let point = GeoPoint::new(flight_id.clone(), source, timestamp, lat, lon, alt)
            .map_err(|e| bad(if (-90.0..=90.0).contains(&lat) { "lon" } else { "lat" }, e.to_string()))?;
        groups.entry((flight_id, source)).or_default().push(point);
    }

    let mut out = Ingested::default();
    for ((flight_id, source), points) in groups {
        let (track, dups) = Track::from_points(flight_id, source, points)?;
        out.tracks.push(track);
        out.duplicates.extend(dups);
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Row {
            path: path.into(),
            row,
            field: "*".into(),
            reason: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Row {
            path: path.into(),
            row,
            field: "*".into(),
            reason: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, declared: Option<Source>) -> Result<Ingested> {
        parse_tracks(text.as_bytes(), Path::new("t.csv"), declared)
    }

    #[test]
    fn timestamp_forms() {
        let t = Timestamp::from_civil(2018, 9, 15, 12, 0, 5);
        for s in [
            "1537012805",
            "2018-09-15T12:00:05Z",
            "2018-09-15T14:00:05+02:00",
            "2018-09-15 12:00:05",
            "2018-09-15T12:00:05.9",
            "2018:09:15 12:00:05",
        ] {
            assert_eq!(parse_timestamp(s), Some(t), "{s}");
        }
        assert_eq!(parse_timestamp("yesterday"), None);
    }

    #[test]
    fn combined_file_groups_by_flight_and_source() {
        let got = parse(
            "flight_id,source,timestamp,lat,lon,alt\n\
             2,igps,10,45,-61,\n\
             10,ogps,5,45,-61,100\n\
             2,ogps,0,45,-61,1\n\
             2,O-GPS,0,45.5,-61,1\n",
            None,
        )
        .unwrap();
        let keys: Vec<(String, Source, usize)> = got
            .tracks
            .iter()
            .map(|t| (t.flight_id().to_string(), t.source(), t.len()))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("2".into(), Source::OGps, 1),
                ("2".into(), Source::IGps, 1),
                ("10".into(), Source::OGps, 1)
            ]
        );
        assert_eq!(got.duplicates.len(), 1);
        assert_eq!(got.duplicates[0].lat, 45.5);
        assert_eq!(got.tracks[1].points()[0].alt, 0.0);
    }

    #[test]
    fn declared_source_and_column_order() {
        let got = parse("lon,lat,timestamp,flight_id,extra\n-61,45,0,7,x\n", Some(Source::IGps)).unwrap();
        assert_eq!(got.tracks[0].source(), Source::IGps);
        let err = parse(
            "flight_id,source,timestamp,lat,lon\n7,ogps,0,45,-61\n",
            Some(Source::IGps),
        )
        .unwrap_err();
        assert!(err.to_string().contains("row=2 field=source"), "{err}");
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let cases = [
            (
                "flight_id,source,timestamp,lat,lon\n1,ogps,0,45,-61\n1,ogps,1,91,-61\n",
                "row=3 field=lat",
            ),
            (
                "flight_id,source,timestamp,lat,lon\n1,ogps,0,45,-200\n",
                "row=2 field=lon",
            ),
            (
                "flight_id,source,timestamp,lat,lon\n1,ogps,noon,45,-61\n",
                "row=2 field=timestamp",
            ),
            (
                "flight_id,source,timestamp,lat,lon\n1,xgps,0,45,-61\n",
                "row=2 field=source",
            ),
            (
                "flight_id,source,timestamp,lat,lon\n1,ogps,0,north,-61\n",
                "row=2 field=lat",
            ),
            ("flight_id,source,timestamp,lat,lon\n1,ogps,0,45\n", "row=2 field=*"),
            ("flight_id,source,timestamp,lon\n", "row=1 field=lat"),
            ("flight_id,timestamp,lat,lon\n1,0,45,-61\n", "row=1 field=source"),
            (
                "flight_id,source,timestamp,lat,lon\n,ogps,0,45,-61\n",
                "row=2 field=flight_id",
            ),
        ];
        for (text, want) in cases {
            let err = parse(text, None).unwrap_err().to_string();
            assert!(err.contains(want), "{err} lacks {want}");
        }
    }
}
