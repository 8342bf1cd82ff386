use proptest::prelude::*;
use trackfuse_core::quality::{
    count_summary, five_number, gap_filter, land_filter, neighbor_counts, quality_filter, LandSeaMask, NeighborCounts,
};
use trackfuse_core::{Error, FlightId, GeoPoint, Source, Timestamp};

fn sorted_times(max_len: usize) -> impl Strategy<Value = Vec<Timestamp>> {
    prop::collection::vec(0i64..2000, 0..max_len).prop_map(|mut v| {
        v.sort_unstable();
        v.dedup();
        v.into_iter().map(Timestamp).collect()
    })
}

fn gp(t: i64, lat: f64, lon: f64) -> GeoPoint {
    GeoPoint::new(FlightId::new("3"), Source::Synthetic, Timestamp(t), lat, lon, 0.0).unwrap()
}

#[test]
fn two_by_two_mask_removes_north_east() {
    let mask = LandSeaMask::from_fn(44.0, 46.0, -62.0, -60.0, 1.0, |r, c| r == 1 && c == 1).unwrap();
    let pts = [
        gp(0, 44.5, -61.5),
        gp(1, 44.5, -60.5),
        gp(2, 45.5, -61.5),
        gp(3, 45.5, -60.5),
    ];
    let out = land_filter(&pts, &mask);
    assert_eq!(out.partition.removed, vec![pts[3].clone()]);
    assert_eq!(out.partition.retained.len(), 3);
    assert_eq!(out.outside_mask, 0);
}

#[test]
fn report_attributes_land_before_gap() {
    let mask = LandSeaMask::from_fn(44.0, 46.0, -62.0, -60.0, 1.0, |r, _| r == 1).unwrap();
    let tags: Vec<Timestamp> = [0, 10, 100].into_iter().map(Timestamp).collect();
    // t=50 sits in the 90 s gap; the one on land is counted as land
    let pts = [
        gp(5, 44.5, -61.0),
        gp(50, 44.5, -61.0),
        gp(50, 45.5, -61.0),
        gp(200, 40.0, -61.0),
    ];
    let (kept, r) = quality_filter(&FlightId::new("3"), &pts, &tags, Some(&mask), 43.75).unwrap();
    assert_eq!(kept, vec![pts[0].clone()]);
    assert_eq!(
        (r.total, r.removed_land, r.removed_gap, r.retained, r.outside_mask),
        (4, 1, 2, 1, 1)
    );
    assert_eq!(r.retained + r.removed_land + r.removed_gap, r.total);
}

#[test]
fn summary_examples() {
    let f = five_number(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    assert_eq!((f.q1, f.median, f.q3), (2.0, 3.0, 4.0));
    let f = five_number(&[4.0; 4]).unwrap();
    assert_eq!((f.min, f.q1, f.median, f.q3, f.max), (4.0, 4.0, 4.0, 4.0, 4.0));
    assert_eq!(five_number(&[1.0, 2.0, 3.0, 4.0]).unwrap().median, 2.5);
    assert_eq!(count_summary(&[]), Err(Error::EmptyInput));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn gap_filter_partitions_and_is_monotone(
        q in prop::collection::vec(0i64..2000, 0..60),
        tags in sorted_times(60),
        th in 0.0f64..200.0,
        extra in 0.0f64..200.0,
    ) {
        let q: Vec<Timestamp> = q.into_iter().map(Timestamp).collect();
        match gap_filter(&q, &tags, th) {
            Err(e) => prop_assert!(tags.is_empty() && e == Error::NoGeotags),
            Ok(p) => {
                prop_assert_eq!(p.retained.len() + p.removed.len(), q.len());
                let mut both: Vec<Timestamp> = p.retained.iter().chain(&p.removed).copied().collect();
                let mut orig = q.clone();
                both.sort_unstable();
                orig.sort_unstable();
                prop_assert_eq!(both, orig);
                let wider = gap_filter(&q, &tags, th + extra).unwrap();
                for t in &p.retained {
                    prop_assert!(wider.retained.contains(t));
                }
            }
        }
    }

    #[test]
    fn land_filter_partitions(
        pts in prop::collection::vec((43.0f64..47.0, -63.0f64..-59.0), 0..50),
        seed in any::<u64>(),
    ) {
        let mask = LandSeaMask::from_fn(44.0, 46.0, -62.0, -60.0, 0.25, |r, c| (seed >> ((r * 8 + c) % 64)) & 1 == 1).unwrap();
        let pts: Vec<GeoPoint> = pts.iter().enumerate().map(|(k, &(la, lo))| gp(k as i64, la, lo)).collect();
        let out = land_filter(&pts, &mask);
        prop_assert_eq!(out.partition.retained.len() + out.partition.removed.len(), pts.len());
        for p in &out.partition.removed {
            prop_assert_eq!(mask.is_land(p.lat, p.lon), Some(true));
        }
        for p in &out.partition.retained {
            prop_assert!(mask.is_land(p.lat, p.lon) != Some(true));
        }
    }

    #[test]
    fn counts_grow_with_window(
        q in sorted_times(30), o in sorted_times(80), i in sorted_times(80), w in 0i64..100, dw in 0i64..100,
    ) {
        let a = neighbor_counts(&q, &o, &i, w);
        let b = neighbor_counts(&q, &o, &i, w + dw);
        for (a, b) in a.iter().zip(&b) {
            prop_assert!(b.n_ogps >= a.n_ogps && b.n_igps >= a.n_igps);
        }
        // brute force
        for c in &a {
            let n = o.iter().filter(|t| (t.diff(c.timestamp)).abs() <= w).count();
            prop_assert_eq!(c.n_ogps, n);
        }
    }

    #[test]
    fn five_numbers_are_ordered(v in prop::collection::vec(0usize..50, 1..80)) {
        let counts: Vec<NeighborCounts> =
            v.iter().map(|&n| NeighborCounts { timestamp: Timestamp(0), n_ogps: n, n_igps: n / 2 }).collect();
        let s = count_summary(&counts).unwrap();
        for f in [s.ogps, s.igps] {
            prop_assert!(f.min <= f.q1 && f.q1 <= f.median && f.median <= f.q3 && f.q3 <= f.max);
        }
    }
}
