use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tanksim::gmproc::{response_spectrum, GroundMotion};
use tanksim::sloshfem::{assemble_with, build_mesh, Grading};
use tanksim::uplift::{StripModel, UpliftCurve};
use tanksim::{Exec, TankSpec};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn record() -> GroundMotion {
    let dt = 0.005;
    let accel = (0..4000)
        .map(|k| {
            let t = k as f64 * dt;
            (2.0 * t).sin() + 0.5 * (7.3 * t).sin() + 0.2 * (19.0 * t).cos()
        })
        .collect();
    GroundMotion::new("bench", dt, accel).unwrap()
}

fn spectrum(c: &mut Criterion) {
    let gm = record();
    let periods: Vec<f64> = (1..=200).map(|i| 0.02 * i as f64).collect();
    let mut group = c.benchmark_group("response_spectrum");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| response_spectrum(black_box(&gm), 0.05, &periods, exec).unwrap())
        });
    }
    group.finish();
}

fn uplift_curve(c: &mut Criterion) {
    let spec = TankSpec::broad();
    let strip = StripModel::for_tank(&spec, 0.02, 200, None).unwrap();
    let uplifts: Vec<f64> = (0..=48).map(|i| 0.02 * (i as f64 / 48.0).powi(2)).collect();
    let mut group = c.benchmark_group("uplift_curve");
    group.sample_size(20);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| UpliftCurve::compute(black_box(&strip), &uplifts, exec).unwrap())
        });
    }
    group.finish();
}

fn fe_assembly(c: &mut Criterion) {
    let spec = TankSpec::broad();
    let mesh = build_mesh(&spec.geometry, 0.01, Grading::Uniform, 1).unwrap();
    let mut group = c.benchmark_group("fe_assembly");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| assemble_with(black_box(&mesh), &spec.liquid, spec.gravity, false, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectrum, uplift_curve, fe_assembly);
criterion_main!(benches);
