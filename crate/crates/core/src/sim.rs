//! Ground-truth flight generator with injected GPS error models.
//!
//! The aircraft flies constant-speed straight legs joined by constant-rate
//! turns in a tangent plane at the configured origin. The truth is sampled
//! every second; the two receivers sample it with their own error models:
//!
//! * O-GPS: fixed rate, small Gaussian noise, optional outages.
//! * I-GPS: irregular intervals, optional pauses, heavy-tailed Student-t
//!   multipath noise, occasional sustained-bias segments (a calm sea acting
//!   as a mirror), and an integer clock offset on its timestamps.
//!
//! Each error source draws from its own ChaCha stream, so changing one
//! magnitude leaves every other draw untouched.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, StudentT};

use crate::error::{Error, Result};
use crate::fuse::FusedTrack;
use crate::geodesy::{angular_abs_diff, forward_bearings, heading_of, normalize_deg, LocalFrame, LocalPoint};
use crate::math;
use crate::time::Timestamp;
use crate::track::{FlightBundle, FlightId, GeoPoint, Source, Track};

/// Average duration of a 45° survey turn, seconds.
pub const AVERAGE_45_TURN_S: f64 = 43.75;
/// Fastest recorded 45° survey turn, seconds.
pub const FASTEST_45_TURN_S: f64 = 20.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Maneuver {
    Straight {
        duration_s: f64,
    },
    /// Signed heading change in degrees, positive clockwise.
    Turn {
        angle_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// Explicit maneuvers; the last heading is held once they run out.
    Legs(Vec<Maneuver>),
    /// Straight legs of random length joined by turns of random size and side.
    RandomTurns {
        min_leg_s: f64,
        max_leg_s: f64,
        min_turn_deg: f64,
        max_turn_deg: f64,
    },
}

/// Poisson-arrival episodes of random duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episodes {
    pub rate_per_hour: f64,
    pub min_s: f64,
    pub max_s: f64,
}

impl Episodes {
    pub const NONE: Episodes = Episodes {
        rate_per_hour: 0.0,
        min_s: 0.0,
        max_s: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub flight_id: FlightId,
    pub seed: u64,
    pub start: Timestamp,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub altitude_m: f64,
    pub duration_s: i64,
    pub speed_mps: f64,
    pub initial_heading_deg: f64,
    pub turn_rate_deg_s: f64,
    pub schedule: Schedule,
    /// Fixed O-GPS sampling interval.
    pub ogps_rate_s: i64,
    /// Per-axis standard deviation.
    pub ogps_noise_m: f64,
    pub ogps_outages: Episodes,
    /// Mean I-GPS sampling interval.
    pub igps_rate_s: f64,
    /// Half-width of the uniform jitter on each I-GPS interval.
    pub igps_jitter_s: f64,
    pub igps_pauses: Episodes,
    /// Per-axis Student-t scale.
    pub igps_noise_m: f64,
    pub igps_noise_dof: f64,
    /// Sustained multipath bias episodes on I-GPS.
    pub mirror: Episodes,
    pub mirror_bias_m: f64,
    /// Added to every I-GPS timestamp.
    pub clock_offset_s: i64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            flight_id: FlightId::new("1"),
            seed: 0,
            start: Timestamp::from_civil(2018, 9, 15, 12, 0, 0),
            origin_lat: 45.0,
            origin_lon: -61.5,
            altitude_m: 200.0,
            duration_s: 3600,
            speed_mps: 55.0,
            initial_heading_deg: 90.0,
            turn_rate_deg_s: 45.0 / AVERAGE_45_TURN_S,
            schedule: Schedule::RandomTurns {
                min_leg_s: 120.0,
                max_leg_s: 600.0,
                min_turn_deg: 30.0,
                max_turn_deg: 180.0,
            },
            ogps_rate_s: 8,
            ogps_noise_m: 1.0,
            ogps_outages: Episodes::NONE,
            igps_rate_s: 4.0,
            igps_jitter_s: 3.0,
            igps_pauses: Episodes::NONE,
            igps_noise_m: 5.0,
            igps_noise_dof: 3.0,
            mirror: Episodes {
                rate_per_hour: 2.0,
                min_s: 30.0,
                max_s: 120.0,
            },
            mirror_bias_m: 15.0,
            clock_offset_s: 0,
        }
    }
}

impl SimConfig {
    /// No noise, no offset, no outages: both receivers sample the truth exactly.
    pub fn noise_free(mut self) -> Self {
        self.ogps_noise_m = 0.0;
        self.igps_noise_m = 0.0;
        self.mirror = Episodes::NONE;
        self.mirror_bias_m = 0.0;
        self.clock_offset_s = 0;
        self
    }

    /// A straight leg, one 45° right turn at the average survey turn rate,
    /// and another straight leg.
    pub fn turn_45_preset() -> Self {
        SimConfig {
            duration_s: 300,
            turn_rate_deg_s: 45.0 / AVERAGE_45_TURN_S,
            schedule: Schedule::Legs(alloc::vec![
                Maneuver::Straight { duration_s: 60.0 },
                Maneuver::Turn { angle_deg: 45.0 },
                Maneuver::Straight { duration_s: 200.0 },
            ]),
            ..SimConfig::default()
        }
    }

    /// [`SimConfig::turn_45_preset`] at the fastest recorded turn rate.
    pub fn fast_turn_45_preset() -> Self {
        SimConfig {
            turn_rate_deg_s: 45.0 / FASTEST_45_TURN_S,
            ..SimConfig::turn_45_preset()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if self.duration_s <= 0 {
            return fail("duration must be positive");
        }
        if !pos(self.speed_mps) || !pos(self.turn_rate_deg_s) {
            return fail("speed and turn rate must be positive");
        }
        if self.ogps_rate_s <= 0 || self.ogps_rate_s > self.duration_s {
            return fail("O-GPS rate must be positive and within the duration");
        }
        if !pos(self.igps_rate_s) || !nonneg(self.igps_jitter_s) {
            return fail("I-GPS rate must be positive and jitter non-negative");
        }
        if !nonneg(self.ogps_noise_m) || !nonneg(self.igps_noise_m) || !nonneg(self.mirror_bias_m) {
            return fail("noise magnitudes must be non-negative");
        }
        if !pos(self.igps_noise_dof) {
            return fail("Student-t degrees of freedom must be positive");
        }
        for e in [&self.ogps_outages, &self.igps_pauses, &self.mirror] {
            if !nonneg(e.rate_per_hour) || !nonneg(e.min_s) || !nonneg(e.max_s) || e.max_s < e.min_s {
                return fail("episode rate and durations must be non-negative with min <= max");
            }
        }
        if !self.initial_heading_deg.is_finite() {
            return fail("initial heading must be finite");
        }
        match &self.schedule {
            Schedule::Legs(legs) => {
                for m in legs {
                    let ok = match *m {
                        Maneuver::Straight { duration_s } => nonneg(duration_s),
                        Maneuver::Turn { angle_deg } => angle_deg.is_finite(),
                    };
                    if !ok {
                        return fail("maneuvers need finite, non-negative sizes");
                    }
                }
            }
            Schedule::RandomTurns {
                min_leg_s,
                max_leg_s,
                min_turn_deg,
                max_turn_deg,
            } => {
                if !pos(*min_leg_s)
                    || !pos(*max_leg_s)
                    || max_leg_s < min_leg_s
                    || !nonneg(*min_turn_deg)
                    || !nonneg(*max_turn_deg)
                    || max_turn_deg < min_turn_deg
                {
                    return fail("random schedule bounds are inconsistent");
                }
            }
        }
        LocalFrame::new(self.origin_lat, self.origin_lon, self.altitude_m).map(|_| ())
    }
}

/// One constant-rate piece of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Seconds since the flight start.
    pub t0: f64,
    pub duration_s: f64,
    pub x0: f64,
    pub y0: f64,
    pub heading0_deg: f64,
    /// Degrees per second, positive clockwise; zero on straight legs.
    pub rate_deg_s: f64,
}

impl Segment {
    fn state(&self, t: f64, speed: f64) -> (f64, f64, f64) {
        let tau = t - self.t0;
        let h0 = self.heading0_deg.to_radians();
        if self.rate_deg_s == 0.0 {
            return (
                self.x0 + speed * tau * math::sin(h0),
                self.y0 + speed * tau * math::cos(h0),
                self.heading0_deg,
            );
        }
        let w = self.rate_deg_s.to_radians();
        let h = h0 + w * tau;
        (
            self.x0 + speed / w * (math::cos(h0) - math::cos(h)),
            self.y0 + speed / w * (math::sin(h) - math::sin(h0)),
            self.heading0_deg + self.rate_deg_s * tau,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub timestamp: Timestamp,
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
    /// Heading in the generation frame, `[0, 360)`.
    pub bearing: f64,
    /// Unit velocity direction in ECEF axes.
    pub direction_ecef: [f64; 3],
}

impl TruthSample {
    /// Heading of this sample as seen in another frame's plane.
    pub fn bearing_in(&self, frame: &LocalFrame) -> f64 {
        let [e, n, _] = frame.ecef_dir_to_enu(self.direction_ecef);
        heading_of(e, n)
    }
}

/// Dense ground truth at one-second resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTrack {
    pub flight_id: FlightId,
    pub frame: LocalFrame,
    pub speed_mps: f64,
    pub segments: Vec<Segment>,
    pub samples: Vec<TruthSample>,
}

impl TruthTrack {
    pub fn start(&self) -> Timestamp {
        self.samples[0].timestamp
    }

    pub fn sample_at(&self, t: Timestamp) -> Option<&TruthSample> {
        let k = t.diff(self.start());
        if k < 0 {
            return None;
        }
        self.samples.get(k as usize)
    }

    /// Position `(x, y)` and heading in the generation frame, `t` seconds
    /// after the start.
    pub fn state_at(&self, t: f64) -> (f64, f64, f64) {
        let seg = self
            .segments
            .iter()
            .rev()
            .find(|s| s.t0 <= t)
            .unwrap_or(&self.segments[0]);
        let (x, y, h) = seg.state(t, self.speed_mps);
        (x, y, normalize_deg(h))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + (hi - lo) * rng.random::<f64>()
    } else {
        lo
    }
}

/// Episode intervals `[start, end)` in seconds since the flight start.
fn episodes(rng: &mut ChaCha8Rng, e: &Episodes, duration: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if e.rate_per_hour <= 0.0 {
        return out;
    }
    let gap = Exp::new(e.rate_per_hour / 3600.0).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += gap.sample(rng);
        if t > duration {
            return out;
        }
        let d = uniform(rng, e.min_s, e.max_s);
        out.push((t, t + d));
        t += d;
    }
}

fn inside(eps: &[(f64, f64)], t: f64) -> Option<usize> {
    eps.iter().position(|&(a, b)| t >= a && t < b)
}

fn build_segments(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let total = cfg.duration_s as f64 + 1.0;
    let mut segs = Vec::new();
    let mut t = 0.0;
    let mut x = 0.0;
    let mut y = 0.0;
    let mut h = normalize_deg(cfg.initial_heading_deg);
    let push = |segs: &mut Vec<Segment>, t: &mut f64, dur: f64, rate: f64, x: &mut f64, y: &mut f64, h: &mut f64| {
        let s = Segment {
            t0: *t,
            duration_s: dur,
            x0: *x,
            y0: *y,
            heading0_deg: *h,
            rate_deg_s: rate,
        };
        let (nx, ny, nh) = s.state(*t + dur, cfg.speed_mps);
        segs.push(s);
        *t += dur;
        *x = nx;
        *y = ny;
        *h = normalize_deg(nh);
    };
    let turn = |angle: f64| (angle.abs() / cfg.turn_rate_deg_s, cfg.turn_rate_deg_s.copysign(angle));
    match &cfg.schedule {
        Schedule::Legs(legs) => {
            for m in legs {
                if t >= total {
                    break;
                }
                match *m {
                    Maneuver::Straight { duration_s } => {
                        push(&mut segs, &mut t, duration_s, 0.0, &mut x, &mut y, &mut h)
                    }
                    Maneuver::Turn { angle_deg } => {
                        let (d, r) = turn(angle_deg);
                        push(&mut segs, &mut t, d, r, &mut x, &mut y, &mut h)
                    }
                }
            }
        }
        Schedule::RandomTurns {
            min_leg_s,
            max_leg_s,
            min_turn_deg,
            max_turn_deg,
        } => {
            while t < total {
                let leg = uniform(rng, *min_leg_s, *max_leg_s);
                push(&mut segs, &mut t, leg, 0.0, &mut x, &mut y, &mut h);
                let mut angle = uniform(rng, *min_turn_deg, *max_turn_deg);
                if rng.random::<bool>() {
                    angle = -angle;
                }
                let (d, r) = turn(angle);
                push(&mut segs, &mut t, d, r, &mut x, &mut y, &mut h);
            }
        }
    }
    if t < total || segs.is_empty() {
        let rest = (total - t).max(0.0);
        push(&mut segs, &mut t, rest, 0.0, &mut x, &mut y, &mut h);
    }
    segs
}

/// Generates the truth and the two sampled tracks.
pub fn generate(cfg: &SimConfig) -> Result<(TruthTrack, FlightBundle)> {
    cfg.validate()?;
    let frame = LocalFrame::new(cfg.origin_lat, cfg.origin_lon, cfg.altitude_m)?;
    let duration = cfg.duration_s as f64;

    let mut rng_path = stream(cfg.seed, 1);
    let segments = build_segments(cfg, &mut rng_path);
    let mut truth = TruthTrack {
        flight_id: cfg.flight_id.clone(),
        frame,
        speed_mps: cfg.speed_mps,
        segments,
        samples: Vec::with_capacity(cfg.duration_s as usize + 1),
    };

    let geo = |x: f64, y: f64| -> (f64, f64, f64) { frame.geodetic([x, y, 0.0]) };

    for k in 0..=cfg.duration_s {
        let (x, y, h) = truth.state_at(k as f64);
        let (lat, lon, alt) = geo(x, y);
        let hr = h.to_radians();
        truth.samples.push(TruthSample {
            timestamp: cfg.start + k,
            lat,
            lon,
            alt,
            bearing: h,
            direction_ecef: frame.enu_dir_to_ecef([math::sin(hr), math::cos(hr), 0.0]),
        });
    }

    let point = |source: Source, t: Timestamp, x: f64, y: f64| -> Result<GeoPoint> {
        let (lat, lon, alt) = geo(x, y);
        GeoPoint::new(cfg.flight_id.clone(), source, t, lat, lon, alt)
    };

    // O-GPS
    let mut rng_o = stream(cfg.seed, 2);
    let outages = episodes(&mut stream(cfg.seed, 3), &cfg.ogps_outages, duration);
    let o_noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut o_points = Vec::new();
    let mut k = 0;
    while k <= cfg.duration_s {
        let (nx, ny) = (o_noise.sample(&mut rng_o), o_noise.sample(&mut rng_o));
        if inside(&outages, k as f64).is_none() {
            let (x, y, _) = truth.state_at(k as f64);
            o_points.push(point(
                Source::OGps,
                cfg.start + k,
                x + cfg.ogps_noise_m * nx,
                y + cfg.ogps_noise_m * ny,
            )?);
        }
        k += cfg.ogps_rate_s;
    }

    // I-GPS
    let mut rng_times = stream(cfg.seed, 4);
    let mut rng_noise = stream(cfg.seed, 5);
    let mut rng_mirror = stream(cfg.seed, 6);
    let pauses = episodes(&mut stream(cfg.seed, 7), &cfg.igps_pauses, duration);
    let mirrors = episodes(&mut rng_mirror, &cfg.mirror, duration);
    let mirror_dirs: Vec<f64> = mirrors
        .iter()
        .map(|_| uniform(&mut rng_mirror, 0.0, core::f64::consts::TAU))
        .collect();
    let t_noise = StudentT::new(cfg.igps_noise_dof).expect("positive dof");
    let interval = |rng: &mut ChaCha8Rng| -> i64 {
        let v = cfg.igps_rate_s + uniform(rng, -cfg.igps_jitter_s, cfg.igps_jitter_s);
        (math::round(v) as i64).max(1)
    };
    let mut i_points = Vec::new();
    let mut t = (math::floor(uniform(&mut rng_times, 0.0, cfg.igps_rate_s)) as i64).min(cfg.duration_s);
    while t <= cfg.duration_s {
        let tf = t as f64;
        if let Some(p) = inside(&pauses, tf) {
            t = (math::floor(pauses[p].1) as i64 + 1).max(t + 1);
            continue;
        }
        let (x, y, _) = truth.state_at(tf);
        let (mut nx, mut ny) = (t_noise.sample(&mut rng_noise), t_noise.sample(&mut rng_noise));
        nx *= cfg.igps_noise_m;
        ny *= cfg.igps_noise_m;
        if let Some(m) = inside(&mirrors, tf) {
            nx += cfg.mirror_bias_m * math::sin(mirror_dirs[m]);
            ny += cfg.mirror_bias_m * math::cos(mirror_dirs[m]);
        }
        i_points.push(point(Source::IGps, cfg.start + t + cfg.clock_offset_s, x + nx, y + ny)?);
        t += interval(&mut rng_times);
    }

    if o_points.is_empty() || i_points.is_empty() {
        return Err(Error::Config("configuration produced an empty track".into()));
    }
    let (o_track, _) = Track::from_points(cfg.flight_id.clone(), Source::OGps, o_points)?;
    let (i_track, _) = Track::from_points(cfg.flight_id.clone(), Source::IGps, i_points)?;
    Ok((truth, FlightBundle::new(o_track, i_track)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingMetrics {
    pub median_abs_err_deg: f64,
    pub p90_abs_err_deg: f64,
    pub rmse_deg: f64,
    /// Samples compared.
    pub n: usize,
}

/// Median, 90th percentile (linear between order statistics) and RMS of
/// absolute errors.
pub fn bearing_metrics(errors: &[f64]) -> Option<BearingMetrics> {
    if errors.is_empty() {
        return None;
    }
    let mut v = errors.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let quantile = |q: f64| {
        let pos = q * (n - 1) as f64;
        let lo = math::floor(pos) as usize;
        let hi = (lo + 1).min(n - 1);
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    let ms = v.iter().map(|e| e * e).sum::<f64>() / n as f64;
    Some(BearingMetrics {
        median_abs_err_deg: quantile(0.5),
        p90_abs_err_deg: quantile(0.9),
        rmse_deg: math::sqrt(ms),
        n,
    })
}

/// Compares `(timestamp, bearing)` samples expressed in `frame` with the truth.
pub fn evaluate_bearings(
    truth: &TruthTrack,
    frame: &LocalFrame,
    samples: impl IntoIterator<Item = (Timestamp, f64)>,
) -> Result<BearingMetrics> {
    let errors: Vec<f64> = samples
        .into_iter()
        .filter_map(|(t, b)| truth.sample_at(t).map(|s| angular_abs_diff(b, s.bearing_in(frame))))
        .collect();
    bearing_metrics(&errors).ok_or_else(|| Error::NoOverlap(truth.flight_id.clone()))
}

/// Forward-difference bearing error of any time-sorted local track.
pub fn evaluate_track_bearing(truth: &TruthTrack, frame: &LocalFrame, points: &[LocalPoint]) -> Result<BearingMetrics> {
    let b = forward_bearings(points)?;
    evaluate_bearings(
        truth,
        frame,
        points.iter().zip(b).map(|(p, b)| (p.timestamp, b.bearing)),
    )
}

/// Bearing error of a fused track against the truth.
pub fn evaluate_bearing(truth: &TruthTrack, fused: &FusedTrack) -> Result<BearingMetrics> {
    evaluate_track_bearing(truth, &fused.frame, &fused.local_points())
}
