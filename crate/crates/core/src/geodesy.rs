//! WGS-84 geodetic coordinates, flight-local East-North-Up planes, and
//! bearing arithmetic.
//!
//! Each flight gets its own tangent plane at the centroid of its geotags.
//! Flights span well under the 500 km limit enforced here, so the plane is
//! treated as Cartesian for distances, bearings and weighted averages.

use crate::error::{Error, Result};
use crate::math;
use crate::time::Timestamp;
use crate::track::{check_lat_lon, FlightId, GeoPoint, Source};

/// WGS-84 semi-major axis, meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS-84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// First eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

/// Largest horizontal distance from the frame origin accepted by the
/// planar conversions.
pub const MAX_FRAME_RANGE_M: f64 = 500_000.0;

/// Coincident-point threshold for [`bearing`].
pub const MIN_BEARING_DISTANCE_M: f64 = 1e-6;

/// Geodetic degrees/meters to Earth-centered Earth-fixed meters.
pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, alt: f64) -> [f64; 3] {
    let (slat, clat) = sin_cos(lat_deg.to_radians());
    let (slon, clon) = sin_cos(lon_deg.to_radians());
    let n = WGS84_A / math::sqrt(1.0 - WGS84_E2 * slat * slat);
    [
        (n + alt) * clat * clon,
        (n + alt) * clat * slon,
        (n * (1.0 - WGS84_E2) + alt) * slat,
    ]
}

/// Inverse of [`geodetic_to_ecef`]; returns `(lat_deg, lon_deg, alt)`.
pub fn ecef_to_geodetic(ecef: [f64; 3]) -> (f64, f64, f64) {
    let [x, y, z] = ecef;
    let p = math::hypot(x, y);
    let lon = math::atan2(y, x);
    let mut lat = math::atan2(z, p * (1.0 - WGS84_E2));
    for _ in 0..16 {
        let s = math::sin(lat);
        let n = WGS84_A / math::sqrt(1.0 - WGS84_E2 * s * s);
        let next = math::atan2(z + WGS84_E2 * n * s, p);
        let done = (next - lat).abs() < 1e-15;
        lat = next;
        if done {
            break;
        }
    }
    let (s, c) = sin_cos(lat);
    let alt = p * c + z * s - WGS84_A * math::sqrt(1.0 - WGS84_E2 * s * s);
    (lat.to_degrees(), lon.to_degrees(), alt)
}

#[inline]
fn sin_cos(x: f64) -> (f64, f64) {
    (math::sin(x), math::cos(x))
}

/// East-North-Up tangent plane anchored at a geodetic origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub origin_alt: f64,
    origin_ecef: [f64; 3],
    // rows: east, north, up unit vectors in ECEF
    axes: [[f64; 3]; 3],
}

impl LocalFrame {
    pub fn new(origin_lat: f64, origin_lon: f64, origin_alt: f64) -> Result<Self> {
        check_lat_lon(origin_lat, origin_lon)?;
        let (slat, clat) = sin_cos(origin_lat.to_radians());
        let (slon, clon) = sin_cos(origin_lon.to_radians());
        Ok(LocalFrame {
            origin_lat,
            origin_lon,
            origin_alt,
            origin_ecef: geodetic_to_ecef(origin_lat, origin_lon, origin_alt),
            axes: [
                [-slon, clon, 0.0],
                [-slat * clon, -slat * slon, clat],
                [clat * clon, clat * slon, slat],
            ],
        })
    }

    /// Frame at the arithmetic mean latitude, longitude and altitude.
    ///
    /// Longitudes are averaged as plain numbers, which is wrong for flights
    /// straddling the antimeridian.
    pub fn from_points<'a, I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a GeoPoint>,
    {
        let (mut lat, mut lon, mut alt, mut n) = (0.0, 0.0, 0.0, 0usize);
        for p in points {
            lat += p.lat;
            lon += p.lon;
            alt += p.alt;
            n += 1;
        }
        if n == 0 {
            return Err(Error::EmptyTrack);
        }
        let n = n as f64;
        LocalFrame::new(lat / n, lon / n, alt / n)
    }

    /// Geodetic to ENU meters, without the range check.
    pub fn enu(&self, lat: f64, lon: f64, alt: f64) -> [f64; 3] {
        let p = geodetic_to_ecef(lat, lon, alt);
        let d = [
            p[0] - self.origin_ecef[0],
            p[1] - self.origin_ecef[1],
            p[2] - self.origin_ecef[2],
        ];
        self.ecef_dir_to_enu(d)
    }

    /// ENU meters to geodetic `(lat, lon, alt)`, without the range check.
    pub fn geodetic(&self, enu: [f64; 3]) -> (f64, f64, f64) {
        let d = self.enu_dir_to_ecef(enu);
        ecef_to_geodetic([
            self.origin_ecef[0] + d[0],
            self.origin_ecef[1] + d[1],
            self.origin_ecef[2] + d[2],
        ])
    }

    /// Rotates an ECEF vector into this frame's axes.
    pub fn ecef_dir_to_enu(&self, v: [f64; 3]) -> [f64; 3] {
        let dot = |a: &[f64; 3]| a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
        [dot(&self.axes[0]), dot(&self.axes[1]), dot(&self.axes[2])]
    }

    /// Rotates an ENU vector of this frame into ECEF axes.
    pub fn enu_dir_to_ecef(&self, v: [f64; 3]) -> [f64; 3] {
        let a = &self.axes;
        [
            a[0][0] * v[0] + a[1][0] * v[1] + a[2][0] * v[2],
            a[0][1] * v[0] + a[1][1] * v[1] + a[2][1] * v[2],
            a[0][2] * v[0] + a[1][2] * v[1] + a[2][2] * v[2],
        ]
    }

    pub fn to_local(&self, p: &GeoPoint) -> Result<LocalPoint> {
        let [x, y, z] = self.enu(p.lat, p.lon, p.alt);
        check_range(x, y)?;
        Ok(LocalPoint {
            x,
            y,
            z,
            timestamp: p.timestamp,
            source: p.source,
        })
    }

    pub fn from_local(&self, p: &LocalPoint, flight_id: FlightId) -> Result<GeoPoint> {
        check_range(p.x, p.y)?;
        let (lat, lon, alt) = self.geodetic([p.x, p.y, p.z]);
        GeoPoint::new(flight_id, p.source, p.timestamp, lat, lon, alt)
    }
}

fn check_range(x: f64, y: f64) -> Result<()> {
    let d = math::hypot(x, y);
    if d.is_nan() || d > MAX_FRAME_RANGE_M {
        return Err(Error::FrameRangeExceeded {
            distance_m: d,
            limit_m: MAX_FRAME_RANGE_M,
        });
    }
    Ok(())
}

/// A geotag in a flight's local plane. `x` east, `y` north, `z` up, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub timestamp: Timestamp,
    pub source: Source,
}

impl LocalPoint {
    pub fn new(x: f64, y: f64, timestamp: Timestamp, source: Source) -> Self {
        LocalPoint {
            x,
            y,
            z: 0.0,
            timestamp,
            source,
        }
    }

    /// Planar distance, ignoring `z`.
    pub fn distance(&self, other: &LocalPoint) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Heading of the planar vector `(dx, dy)`, degrees clockwise from north in `[0, 360)`.
pub fn heading_of(dx: f64, dy: f64) -> f64 {
    math::wrap(math::atan2(dx, dy).to_degrees(), 360.0)
}

/// Heading from `a` to `b` in the local plane.
pub fn bearing(a: &LocalPoint, b: &LocalPoint) -> Result<f64> {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let d = math::hypot(dx, dy);
    if d.is_nan() || d <= MIN_BEARING_DISTANCE_M {
        return Err(Error::DegenerateBearing);
    }
    Ok(heading_of(dx, dy))
}

/// Smallest absolute angle between two directions, in `[0, 180]`.
pub fn angular_abs_diff(a: f64, b: f64) -> f64 {
    // |x - y| is exact-symmetric in IEEE arithmetic, so normalize first
    let d = (normalize_deg(a) - normalize_deg(b)).abs();
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// Normalizes degrees into `[0, 360)`.
pub fn normalize_deg(a: f64) -> f64 {
    math::wrap(a, 360.0)
}

/// Heading at a track point, from forward differencing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackBearing {
    pub bearing: f64,
    /// Copied from a neighbouring point because this one has no usable
    /// forward difference (coincident successor, or last point).
    pub carried: bool,
}

/// Bearing at each point from point `k` to `k + 1`.
///
/// The last point, and any point whose successor is coincident, carries the
/// previous valid bearing. Leading degenerate points take the first valid
/// bearing. Fails when no pair of consecutive points is distinct.
pub fn forward_bearings(points: &[LocalPoint]) -> Result<alloc::vec::Vec<TrackBearing>> {
    if points.len() < 2 {
        return Err(Error::InsufficientData("bearing needs at least two points"));
    }
    let raw: alloc::vec::Vec<Option<f64>> = points.windows(2).map(|w| bearing(&w[0], &w[1]).ok()).collect();
    let first = raw.iter().flatten().next().copied().ok_or(Error::DegenerateBearing)?;
    let mut prev = first;
    let mut out = alloc::vec::Vec::with_capacity(points.len());
    for b in raw {
        match b {
            Some(b) => {
                prev = b;
                out.push(TrackBearing {
                    bearing: b,
                    carried: false,
                });
            }
            None => out.push(TrackBearing {
                bearing: prev,
                carried: true,
            }),
        }
    }
    out.push(TrackBearing {
        bearing: prev,
        carried: true,
    });
    Ok(out)
}
