use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use helmsim_core::batch::Execution;
use helmsim_core::environment::write_weather;
use helmsim_core::harness::{cmd_validate, synthetic_voyage, SyntheticOptions, ValidateOptions};
use helmsim_core::voyage::write_voyage;
use helmsim_core::Vessel;

fn validate(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let vessel = Vessel::synthetic();
    for (i, heading) in [0.0, 1.5, 3.0, 4.5].into_iter().enumerate() {
        let opts = SyntheticOptions {
            duration_s: 1800,
            initial_heading: heading,
            ..SyntheticOptions::default()
        };
        let v = synthetic_voyage(&vessel, &opts).unwrap();
        write_voyage(&v.records, dir.path().join(format!("voyage_{i}.csv"))).unwrap();
        if i == 0 {
            write_weather(&v.weather, dir.path().join("weather.csv")).unwrap();
        }
    }
    let mut opts = ValidateOptions::new(dir.path().join("voyage_*.csv").display().to_string());
    opts.weather = Some(dir.path().join("weather.csv"));

    let mut group = c.benchmark_group("validate_60_segments");
    group.sample_size(20);
    for (name, execution) in [
        ("parallel", Execution::Parallel),
        ("sequential", Execution::Sequential),
    ] {
        let o = ValidateOptions {
            execution,
            ..opts.clone()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &o, |b, o| {
            b.iter(|| cmd_validate(o).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, validate);
criterion_main!(benches);
