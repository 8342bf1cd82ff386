use proptest::prelude::*;
use trackfuse_core::align::{apply_offset, estimate_offset, OffsetEstimate};
use trackfuse_core::fuse::{fuse_track, WeightParams};
use trackfuse_core::geodesy::LocalFrame;
use trackfuse_core::sim::{evaluate_bearing, evaluate_bearings, generate, Episodes, Schedule, SimConfig};
use trackfuse_core::{FlightBundle, FlightId, GeoPoint, Source, Timestamp, Track};

fn quiet(seed: u64, clock_offset_s: i64) -> SimConfig {
    SimConfig {
        seed,
        duration_s: 900,
        ogps_noise_m: 0.3,
        igps_noise_m: 0.3,
        mirror: Episodes::NONE,
        clock_offset_s,
        ..SimConfig::default()
    }
}

fn frame_of(b: &FlightBundle) -> LocalFrame {
    LocalFrame::from_points(b.all_points()).unwrap()
}

#[test]
fn injected_shift_is_undone() {
    let (_, b) = generate(&quiet(11, 7)).unwrap();
    let est = estimate_offset(&b, &frame_of(&b), 60).unwrap();
    assert_eq!(est.offset_seconds, -7);
    // sign convention: the estimate is t_o - t_i of the winning pair
    assert_eq!(est.offset_seconds, est.pair.0.diff(est.pair.1));
    let shifted = apply_offset(b.i_track(), &est).unwrap();
    let again = FlightBundle::new(b.o_track().clone(), shifted).unwrap();
    assert_eq!(
        estimate_offset(&again, &frame_of(&again), 60).unwrap().offset_seconds,
        0
    );
}

#[test]
fn negative_clock_offset_gives_positive_estimate() {
    let (_, b) = generate(&quiet(12, -5)).unwrap();
    assert_eq!(estimate_offset(&b, &frame_of(&b), 60).unwrap().offset_seconds, 5);
}

#[test]
fn noise_free_fixed_point() {
    let cfg = SimConfig {
        seed: 5,
        duration_s: 900,
        ..SimConfig::default()
    }
    .noise_free();
    let (_, b) = generate(&cfg).unwrap();
    let est = estimate_offset(&b, &frame_of(&b), 60).unwrap();
    assert_eq!((est.offset_seconds, est.min_distance_m), (0, 0.0));
}

#[test]
fn estimate_is_deterministic() {
    let (_, b) = generate(&SimConfig {
        seed: 99,
        duration_s: 600,
        ..SimConfig::default()
    })
    .unwrap();
    let f = frame_of(&b);
    assert_eq!(
        estimate_offset(&b, &f, 60).unwrap(),
        estimate_offset(&b, &f, 60).unwrap()
    );
}

#[test]
fn noise_free_straight_flight_reproduces_truth() {
    let cfg = SimConfig {
        duration_s: 600,
        schedule: Schedule::Legs(vec![]),
        initial_heading_deg: 33.0,
        ..SimConfig::default()
    }
    .noise_free();
    let (truth, b) = generate(&cfg).unwrap();
    let est = estimate_offset(&b, &frame_of(&b), 60).unwrap();
    let fused = fuse_track(&b, &est, &WeightParams::default()).unwrap();
    // collinear: distance of every fused point from the line through the ends
    let pts = fused.local_points();
    let (a, z) = (pts[0], pts[pts.len() - 1]);
    let (dx, dy) = (z.x - a.x, z.y - a.y);
    let len = dx.hypot(dy);
    for p in &pts {
        let off = ((p.x - a.x) * dy - (p.y - a.y) * dx) / len;
        assert!(off.abs() < 1e-6, "{off}");
    }
    let m = evaluate_bearing(&truth, &fused).unwrap();
    assert!(m.rmse_deg < 1e-6, "{m:?}");
}

#[test]
fn turning_noise_free_flight_matches_truth_on_straights() {
    // on curved segments the chord bearing lags the tangent; compare only
    // where the truth heading is constant over the step
    let cfg = SimConfig::turn_45_preset().noise_free();
    let (truth, b) = generate(&cfg).unwrap();
    let est = estimate_offset(&b, &frame_of(&b), 60).unwrap();
    let fused = fuse_track(&b, &est, &WeightParams::default()).unwrap();
    let pts = fused.local_points();
    let bearings = trackfuse_core::geodesy::forward_bearings(&pts).unwrap();
    let straight: Vec<(Timestamp, f64)> = pts
        .windows(2)
        .zip(&bearings)
        .filter(|(w, _)| {
            // window reach of the fusion: nothing within 45 s of the turn
            let (t0, t1) = (w[0].timestamp.diff(truth.start()), w[1].timestamp.diff(truth.start()));
            t1 + 45 < 60 || t0 - 45 > 104
        })
        .map(|(w, b)| (w[0].timestamp, b.bearing))
        .collect();
    assert!(straight.len() > 10);
    let m = evaluate_bearings(&truth, &fused.frame, straight).unwrap();
    assert!(m.p90_abs_err_deg < 1e-6, "{m:?}");
}

#[test]
fn evaluate_constant_bearing_error() {
    let (truth, _) = generate(&SimConfig {
        duration_s: 300,
        ..SimConfig::default()
    })
    .unwrap();
    let frame = truth.frame;
    let exact = truth
        .samples
        .iter()
        .step_by(7)
        .map(|s| (s.timestamp, s.bearing_in(&frame)));
    assert_eq!(evaluate_bearings(&truth, &frame, exact).unwrap().rmse_deg, 0.0);
    let off = truth
        .samples
        .iter()
        .step_by(7)
        .map(|s| (s.timestamp, s.bearing_in(&frame) + 10.0));
    let m = evaluate_bearings(&truth, &frame, off).unwrap();
    assert!((m.median_abs_err_deg - 10.0).abs() < 1e-9 && (m.rmse_deg - 10.0).abs() < 1e-9);
    let none = std::iter::once((Timestamp(0), 0.0));
    assert!(evaluate_bearings(&truth, &frame, none).is_err());
}

#[test]
fn median_error_grows_with_igps_noise() {
    let mean_median = |noise: f64| {
        (0..20)
            .map(|seed| {
                let cfg = SimConfig {
                    seed,
                    duration_s: 900,
                    igps_noise_m: noise,
                    ..SimConfig::default()
                };
                let (truth, b) = generate(&cfg).unwrap();
                let est = estimate_offset(&b, &frame_of(&b), 60).unwrap();
                let fused = fuse_track(&b, &est, &WeightParams::default()).unwrap();
                evaluate_bearing(&truth, &fused).unwrap().median_abs_err_deg
            })
            .sum::<f64>()
            / 20.0
    };
    let levels = [0.0, 2.0, 5.0, 10.0, 20.0];
    let errs: Vec<f64> = levels.iter().map(|&n| mean_median(n)).collect();
    for w in errs.windows(2) {
        assert!(w[1] >= w[0], "{errs:?}");
    }
}

fn pt(src: Source, t: i64, x: f64, y: f64, f: &LocalFrame) -> GeoPoint {
    let (lat, lon, alt) = f.geodetic([x, y, 0.0]);
    GeoPoint::new(FlightId::new("9"), src, Timestamp(t), lat, lon, alt).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn minimum_is_global(
        o in prop::collection::vec((0i64..400, -500.0f64..500.0, -500.0f64..500.0), 1..40),
        i in prop::collection::vec((0i64..400, -500.0f64..500.0, -500.0f64..500.0), 1..40),
        window in 1i64..120,
    ) {
        let f = LocalFrame::new(45.0, -61.5, 0.0).unwrap();
        let ot: Vec<GeoPoint> = o.iter().map(|&(t, x, y)| pt(Source::OGps, t, x, y, &f)).collect();
        let it: Vec<GeoPoint> = i.iter().map(|&(t, x, y)| pt(Source::IGps, t, x, y, &f)).collect();
        let (ot, _) = Track::from_points(FlightId::new("9"), Source::OGps, ot).unwrap();
        let (it, _) = Track::from_points(FlightId::new("9"), Source::IGps, it).unwrap();
        let b = FlightBundle::new(ot, it).unwrap();
        let mut best: Option<(f64, i64, i64, i64)> = None;
        for p in b.o_track().points() {
            for q in b.i_track().points() {
                let dt = p.timestamp.diff(q.timestamp);
                if dt.abs() > window {
                    continue;
                }
                let (a, c) = (f.to_local(p).unwrap(), f.to_local(q).unwrap());
                let key = (a.distance(&c), dt.abs(), p.timestamp.0, q.timestamp.0);
                if best.is_none_or(|bk| key.0 < bk.0 || (key.0 == bk.0 && (key.1, key.2, key.3) < (bk.1, bk.2, bk.3))) {
                    best = Some(key);
                }
            }
        }
        match (estimate_offset(&b, &f, window), best) {
            (Ok(OffsetEstimate { offset_seconds, min_distance_m, pair, .. }), Some(bk)) => {
                prop_assert_eq!(min_distance_m, bk.0);
                prop_assert_eq!((pair.0 .0, pair.1 .0), (bk.2, bk.3));
                prop_assert!(offset_seconds.abs() <= window);
            }
            (Err(_), None) => {}
            (got, want) => prop_assert!(false, "{got:?} vs {want:?}"),
        }
    }
}
