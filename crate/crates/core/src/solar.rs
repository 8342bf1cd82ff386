//! Sun position and camera-relative orientation features.
//!
//! The sun is located with the NOAA solar calculator equations (Meeus-based
//! mean elements plus equation of time), good to about 0.01° in angle over
//! 1950-2100. Atmospheric refraction is not applied, so elevations are
//! geometric.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fuse::FusedTrack;
use crate::geodesy::{angular_abs_diff, forward_bearings, normalize_deg};
use crate::math;
use crate::time::Timestamp;

/// 1950-01-01T00:00:00Z.
pub const SOLAR_SPAN_START: Timestamp = Timestamp(-631_152_000);
/// 2101-01-01T00:00:00Z, exclusive.
pub const SOLAR_SPAN_END: Timestamp = Timestamp(4_133_980_800);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunPosition {
    /// Degrees clockwise from true north, `[0, 360)`.
    pub azimuth: f64,
    /// Degrees above the horizon, `[-90, 90]`.
    pub elevation: f64,
}

pub fn sun_position(t: Timestamp, lat: f64, lon: f64) -> Result<SunPosition> {
    if t < SOLAR_SPAN_START || t >= SOLAR_SPAN_END {
        return Err(Error::UnsupportedDate(t.unix()));
    }
    crate::track::check_lat_lon(lat, lon)?;

    let jc = (t.julian_day() - 2_451_545.0) / 36_525.0;
    let l0 = normalize_deg(280.466_46 + jc * (36_000.769_83 + jc * 0.000_303_2));
    let m = 357.529_11 + jc * (35_999.050_29 - 0.000_153_7 * jc);
    let e = 0.016_708_634 - jc * (0.000_042_037 + 0.000_000_126_7 * jc);
    let mr = m.to_radians();
    let center = math::sin(mr) * (1.914_602 - jc * (0.004_817 + 0.000_014 * jc))
        + math::sin(2.0 * mr) * (0.019_993 - 0.000_101 * jc)
        + math::sin(3.0 * mr) * 0.000_289;
    let true_long = l0 + center;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let app_long = (true_long - 0.005_69 - 0.004_78 * math::sin(omega)).to_radians();
    let mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.000_59 - jc * 0.001_813))) / 60.0) / 60.0;
    let obliq = (mean_obliq + 0.002_56 * math::cos(omega)).to_radians();
    let decl = math::asin(math::sin(obliq) * math::sin(app_long));

    let y = math::tan(obliq / 2.0) * math::tan(obliq / 2.0);
    let l0r = l0.to_radians();
    let eq_time_min = 4.0
        * (y * math::sin(2.0 * l0r) - 2.0 * e * math::sin(mr) + 4.0 * e * y * math::sin(mr) * math::cos(2.0 * l0r)
            - 0.5 * y * y * math::sin(4.0 * l0r)
            - 1.25 * e * e * math::sin(2.0 * mr))
        .to_degrees();

    let minutes = t.seconds_of_day() as f64 / 60.0;
    let true_solar_min = math::wrap(minutes + eq_time_min + 4.0 * lon, 1440.0);
    let hour_angle = (true_solar_min / 4.0 - 180.0).to_radians();

    let latr = lat.to_radians();
    let sin_el = math::sin(latr) * math::sin(decl) + math::cos(latr) * math::cos(decl) * math::cos(hour_angle);
    let elevation = math::asin(sin_el.clamp(-1.0, 1.0)).to_degrees();
    // measured from south, westward positive; shifted to north-clockwise
    let az_south = math::atan2(
        math::sin(hour_angle),
        math::cos(hour_angle) * math::sin(latr) - math::tan(decl) * math::cos(latr),
    );
    Ok(SunPosition {
        azimuth: normalize_deg(az_south.to_degrees() + 180.0),
        elevation,
    })
}

/// Cameras and their azimuth offsets from the aircraft bearing, in
/// insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CameraRig {
    cameras: Vec<(String, f64)>,
}

impl CameraRig {
    pub fn new() -> Self {
        CameraRig::default()
    }

    /// Adds a camera; the offset is normalized into `[0, 360)`.
    pub fn add(&mut self, name: impl Into<String>, offset_deg: f64) -> Result<()> {
        let name = name.into();
        if name.is_empty() || self.offset(&name).is_some() {
            return Err(Error::Config(alloc::format!("duplicate or empty camera name `{name}`")));
        }
        if !offset_deg.is_finite() {
            return Err(Error::Config(alloc::format!("camera `{name}` offset is not finite")));
        }
        self.cameras.push((name, normalize_deg(offset_deg)));
        Ok(())
    }

    pub fn offset(&self, name: &str) -> Option<f64> {
        self.cameras.iter().find(|(n, _)| n == name).map(|(_, o)| *o)
    }

    pub fn cameras(&self) -> impl Iterator<Item = (&str, f64)> {
        self.cameras.iter().map(|(n, o)| (n.as_str(), *o))
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }
}

/// Azimuth the named camera looks toward.
pub fn view_azimuth(bearing: f64, rig: &CameraRig, camera: &str) -> Result<f64> {
    let offset = rig.offset(camera).ok_or_else(|| Error::UnknownCamera(camera.into()))?;
    Ok(normalize_deg(bearing + offset))
}

/// Angle between a camera's view azimuth and the sun's azimuth, `[0, 180]`.
pub fn azimuth_absolute_diff(view_az: f64, sun_az: f64) -> f64 {
    angular_abs_diff(view_az, sun_az)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub timestamp: Timestamp,
    pub lat: f64,
    pub lon: f64,
    pub bearing: f64,
    /// Bearing copied from the previous point.
    pub carried: bool,
    pub sun: SunPosition,
    /// One entry per camera, in rig order.
    pub az_abs_diff: Vec<f64>,
}

/// Orientation features for every point of a fused track.
pub fn feature_rows(fused: &FusedTrack, rig: &CameraRig) -> Result<Vec<FeatureRow>> {
    let local = fused.local_points();
    let bearings = forward_bearings(&local)?;
    local
        .iter()
        .zip(bearings)
        .map(|(p, b)| {
            let g = fused.frame.from_local(p, fused.flight_id.clone())?;
            let sun = sun_position(p.timestamp, g.lat, g.lon)?;
            let az_abs_diff = rig
                .cameras()
                .map(|(_, off)| azimuth_absolute_diff(normalize_deg(b.bearing + off), sun.azimuth))
                .collect();
            Ok(FeatureRow {
                timestamp: p.timestamp,
                lat: g.lat,
                lon: g.lon,
                bearing: b.bearing,
                carried: b.carried,
                sun,
                az_abs_diff,
            })
        })
        .collect()
}
