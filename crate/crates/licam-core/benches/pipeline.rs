//! Benchmarks of the data-parallel kernels.
//!
//! With the default `parallel` feature each kernel runs twice: on the global
//! rayon pool and inside a single-thread pool, so one run shows the speedup.
//! `cargo bench --no-default-features` measures the true sequential fallback
//! instead.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use licam_core::calib::{build_index, evaluate_cost, MatchConfig};
use licam_core::edgemap::{extract_lidar_edges, EdgePipelineConfig};
use licam_core::geometry::{RigidTransform, Timestamp};
use licam_core::preprocessing::{render_depth_images, undistort_frame};
use licam_core::synth::{generate_scan, make_calibration_fixture, make_distortion_fixture, ScanPatternParams};

#[cfg(feature = "parallel")]
fn for_each_mode(c: &mut Criterion, group: &str, mut f: impl FnMut(&mut Criterion, &str)) {
    f(c, &format!("{group}/parallel"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    pool.install(|| f(c, &format!("{group}/single_thread")));
}

#[cfg(not(feature = "parallel"))]
fn for_each_mode(c: &mut Criterion, group: &str, mut f: impl FnMut(&mut Criterion, &str)) {
    f(c, &format!("{group}/sequential"));
}

fn bench_generate_scan(c: &mut Criterion) {
    let fixture = make_calibration_fixture(0);
    let params = ScanPatternParams::default();
    for_each_mode(c, "generate_scan_frame", |c, name| {
        c.bench_function(name, |b| {
            b.iter(|| {
                generate_scan(
                    black_box(&params),
                    black_box(&fixture.scene),
                    |_| RigidTransform::identity(),
                    Timestamp::from_nanos(0),
                    Timestamp::from_nanos(100_000_000),
                )
                .unwrap()
            })
        });
    });
}

fn bench_undistort(c: &mut Criterion) {
    let fixture = make_distortion_fixture(1);
    for_each_mode(c, "undistort_frame", |c, name| {
        c.bench_function(name, |b| {
            b.iter(|| undistort_frame(black_box(&fixture.moving), black_box(&fixture.imu)).unwrap())
        });
    });
}

fn bench_render_depth(c: &mut Criterion) {
    let fixture = make_calibration_fixture(0);
    for_each_mode(c, "render_depth_images", |c, name| {
        c.bench_function(name, |b| {
            b.iter(|| {
                render_depth_images(
                    black_box(&fixture.cloud),
                    &fixture.intrinsics,
                    &fixture.t_true,
                )
            })
        });
    });
}

fn bench_lidar_edges(c: &mut Criterion) {
    let fixture = make_calibration_fixture(0);
    let (depth, refl) = render_depth_images(&fixture.cloud, &fixture.intrinsics, &fixture.t_true);
    let cfg = EdgePipelineConfig::default();
    for_each_mode(c, "extract_lidar_edges", |c, name| {
        c.bench_function(name, |b| {
            b.iter(|| extract_lidar_edges(black_box(&depth), black_box(&refl), &cfg).unwrap())
        });
    });
}

fn bench_cost(c: &mut Criterion) {
    let fixture = make_calibration_fixture(0);
    let (depth, refl) = render_depth_images(&fixture.cloud, &fixture.intrinsics, &fixture.t_true);
    let edge_cfg = EdgePipelineConfig::default();
    let lidar_edges = extract_lidar_edges(&depth, &refl, &edge_cfg).unwrap();
    let camera_edges =
        licam_core::edgemap::extract_camera_edges(&fixture.camera_image, &edge_cfg);
    let index = build_index(&lidar_edges).unwrap();
    let cfg = MatchConfig::default();
    for_each_mode(c, "evaluate_cost", |c, name| {
        c.bench_function(name, |b| {
            b.iter(|| evaluate_cost(black_box(&camera_edges), black_box(&index), &cfg).unwrap())
        });
    });
}

criterion_group!(
    benches,
    bench_generate_scan,
    bench_undistort,
    bench_render_depth,
    bench_lidar_edges,
    bench_cost
);
criterion_main!(benches);
