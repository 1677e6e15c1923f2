use std::path::Path;

use helmsim_core::environment::write_weather;
use helmsim_core::harness::{
    cmd_compare, cmd_validate, synthetic_voyage, HarnessError, SyntheticOptions, ValidateOptions,
};
use helmsim_core::voyage::{
    load_voyage, project_point, resample, segment_voyage, write_voyage, GeoPoint, SegmentOptions,
    R_EARTH,
};
use helmsim_core::*;

fn setup(dir: &Path, opts: &SyntheticOptions) -> ValidateOptions {
    let v = synthetic_voyage(&Vessel::synthetic(), opts).unwrap();
    write_voyage(&v.records, dir.join("voyage_a.csv")).unwrap();
    write_weather(&v.weather, dir.join("weather.csv")).unwrap();
    let mut o = ValidateOptions::new(dir.join("voyage_*.csv").display().to_string());
    o.weather = Some(dir.join("weather.csv"));
    o
}

fn short() -> SyntheticOptions {
    SyntheticOptions {
        duration_s: 600,
        ..SyntheticOptions::default()
    }
}

#[test]
fn heading_bias_degrades_segments() {
    let dir = tempfile::tempdir().unwrap();
    let clean = cmd_validate(&setup(dir.path(), &short())).unwrap();
    let biased = cmd_validate(&setup(
        dir.path(),
        &SyntheticOptions {
            heading_bias: 10f64.to_radians(),
            ..short()
        },
    ))
    .unwrap();
    assert_eq!(clean.aggregate.optimal, 5);
    assert_eq!(biased.aggregate.total_segments, 5);
    assert!(biased.aggregate.sub_optimal >= 4, "{:?}", biased.aggregate);
    for (c, b) in clean.segments.iter().zip(&biased.segments) {
        let (c, b) = (c.report.as_ref().unwrap(), b.report.as_ref().unwrap());
        assert!(b.cvdm_pct > 100.0 * c.cvdm_pct);
        assert!(b.category >= Category::Satisfactory);
    }
}

#[test]
fn batch_equals_independent_compares() {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = setup(
        dir.path(),
        &SyntheticOptions {
            heading_bias: 3f64.to_radians(),
            ..short()
        },
    );
    let out = dir.path().join("out");
    opts.out = Some(out.clone());
    let report = cmd_validate(&opts).unwrap();
    for seg in &report.segments {
        let d = out
            .join("segments")
            .join(format!("{}_w{:04}", seg.voyage_id, seg.window));
        for f in [
            "track.csv",
            "heading.csv",
            "speeds.csv",
            "yaw_rate.csv",
            "manifest.json",
        ] {
            assert!(d.join(f).is_file(), "{f}");
        }
        let single = cmd_compare(
            &d.join("truth.csv"),
            &d.join("prediction.csv"),
            opts.r_max,
            None,
        )
        .unwrap();
        let batch = seg.report.as_ref().unwrap();
        assert_eq!(single.category, batch.category);
        assert!((single.cvdm_pct - batch.cvdm_pct).abs() <= 1e-6 * batch.cvdm_pct + 1e-6);
        assert!((single.mmd_m - batch.mmd_m).abs() <= 1e-6 * batch.mmd_m + 1e-6);
        assert!((single.ped_pct - batch.ped_pct).abs() <= 1e-6 * batch.ped_pct + 1e-6);
    }
}

#[test]
fn bad_voyage_file_is_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let opts = setup(dir.path(), &short());
    std::fs::write(
        dir.path().join("voyage_b.csv"),
        "timestamp_iso8601,lat_deg,lon_deg,heading_deg,sog_mps,cog_deg,yaw_rate_degmin,rudder_deg,rpm\n\
         2023-01-01T00:00:00Z,95,0,0,1,0,0,0,100\n",
    )
    .unwrap();
    let report = cmd_validate(&opts).unwrap();
    assert_eq!(report.aggregate.failed_voyages, 1);
    assert_eq!(report.aggregate.total_segments, 5);
    let bad = report
        .voyages
        .iter()
        .find(|v| v.voyage_id == "voyage_b")
        .unwrap();
    assert!(bad.error.as_ref().unwrap().contains("lat_deg"));
}

#[test]
fn gaps_are_dropped_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let opts = setup(dir.path(), &short());
    let path = dir.path().join("voyage_a.csv");
    let mut recs = load_voyage(&path).unwrap();
    let t0 = recs[0].t;
    recs.retain(|r| !(300.0..306.0).contains(&(r.t - t0)));
    write_voyage(&recs, &path).unwrap();
    let report = cmd_validate(&opts).unwrap();
    assert_eq!(report.aggregate.dropped_windows, 1);
    assert_eq!(report.dropped[0].window, 2);
    assert_eq!(report.aggregate.total_segments, 4);
}

#[test]
fn compare_identity_and_misalignment() {
    let dir = tempfile::tempdir().unwrap();
    let t = simulate(
        &Vessel::synthetic(),
        &ShipState {
            u: 3.0,
            ..ShipState::default()
        },
        &ControlSeries::constant(ControlInput {
            rudder: 0.1,
            n: 1.7,
        }),
        &EnvironmentSeries::calm(),
        1.0,
        120,
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    t.write_csv(&a).unwrap();
    let out = dir.path().join("cmp");
    let r = cmd_compare(&a, &a, 0.0314, Some(&out)).unwrap();
    assert_eq!(r.category, Category::Optimal);
    for v in [
        r.mmd_m, r.med_m, r.asd, r.msd, r.pmd_pct, r.ped_pct, r.cvdm_pct,
    ] {
        assert_eq!(v, 0.0);
    }
    assert!(out.join("report.json").is_file() && out.join("manifest.json").is_file());

    let short = Trajectory::new(t.records()[..60].to_vec(), 1.0);
    let b = dir.path().join("b.csv");
    short.write_csv(&b).unwrap();
    let e = cmd_compare(&a, &b, 0.0314, None).unwrap_err();
    assert!(matches!(e, HarnessError::Measure(_)));
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn segments_reassemble_the_resampled_voyage() {
    let v = synthetic_voyage(&Vessel::synthetic(), &short()).unwrap();
    let grid = resample(&v.records, 1.0);
    let seg = segment_voyage(&v.records, &v.weather, SegmentOptions::default()).unwrap();
    for s in &seg.segments {
        for (k, rec) in s.truth.records().iter().enumerate() {
            let g = grid[s.window * 120 + k].unwrap();
            let (x, y) = project_point(g.position(), s.anchor);
            assert_eq!((rec.state.x, rec.state.y), (x, y));
            assert_eq!(rec.state.psi, g.heading);
            assert_eq!(rec.state.r, g.yaw_rate);
        }
    }
}

/// Great-circle distance on the sphere of radius `R_EARTH`.
fn haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * R_EARTH * h.sqrt().asin()
}

#[test]
fn projection_error_at_ten_km() {
    for lat in [0.0, 30.0, 57.6, 65.0] {
        let anchor = GeoPoint { lat, lon: 11.7 };
        for bearing_deg in (0..360).step_by(15) {
            let b = (bearing_deg as f64).to_radians();
            // walk 10 km along the bearing on the sphere
            let d = 10_000.0 / R_EARTH;
            let p1 = lat.to_radians();
            let p2 = (p1.sin() * d.cos() + p1.cos() * d.sin() * b.cos()).asin();
            let l2 = 11.7f64.to_radians()
                + (b.sin() * d.sin() * p1.cos()).atan2(d.cos() - p1.sin() * p2.sin());
            let p = GeoPoint {
                lat: p2.to_degrees(),
                lon: l2.to_degrees(),
            };
            let (x, y) = project_point(p, anchor);
            let err = (x.hypot(y) - haversine(anchor, p)).abs() / 10_000.0;
            assert!(err < 1e-3, "lat {lat}, bearing {bearing_deg}: {err}");
        }
    }
}
