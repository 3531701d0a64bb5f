// Scratch probe for fixture tuning (deleted before release).
use licam_core::calib::{build_index, evaluate_cost, scaled_max_match_distance, MatchConfig};
use licam_core::edgemap::{extract_camera_edges, extract_lidar_edges, EdgePipelineConfig};
use licam_core::geometry::{EulerAngles, RigidTransform};
use licam_core::preprocessing::render_depth_images;
use licam_core::synth::{make_calibration_fixture, quantized_directions};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let fixture = make_calibration_fixture(1);
    println!("fixture gen: {:?}", t0.elapsed());
    println!("cloud points: {}", fixture.cloud.len());

    let edge_cfg = EdgePipelineConfig::default();
    let t0 = Instant::now();
    let cam_edges = extract_camera_edges(&fixture.camera_image, &edge_cfg);
    println!(
        "camera edges: {} segments, {} px ({:?})",
        cam_edges.segments().len(),
        cam_edges.pixel_count(),
        t0.elapsed()
    );

    let t0 = Instant::now();
    let (depth, refl) = render_depth_images(&fixture.cloud, &fixture.intrinsics, &fixture.t_true);
    println!("render: {:?}, fill {:.3}", t0.elapsed(), depth.fill_ratio());
    let t0 = Instant::now();
    let lidar_edges = extract_lidar_edges(&depth, &refl, &edge_cfg).unwrap();
    println!(
        "lidar edges: {} segments, {} px ({:?})",
        lidar_edges.segments().len(),
        lidar_edges.pixel_count(),
        t0.elapsed()
    );

    let k = &fixture.intrinsics;
    let cfg = MatchConfig {
        max_match_distance: scaled_max_match_distance(k.width, k.height),
        ..MatchConfig::default()
    };
    let index = build_index(&lidar_edges).unwrap();
    let t0 = Instant::now();
    let cost_true = evaluate_cost(&cam_edges, &index, &cfg).unwrap();
    println!("cost at truth: {:?} ({:?})", cost_true, t0.elapsed());

    for (name, angles) in [
        ("yaw +2deg", EulerAngles::new(0.0, 0.0, 2.0f64.to_radians())),
        ("yaw -2deg", EulerAngles::new(0.0, 0.0, -2.0f64.to_radians())),
        ("pitch +2deg", EulerAngles::new(0.0, 2.0f64.to_radians(), 0.0)),
        ("roll +2deg", EulerAngles::new(2.0f64.to_radians(), 0.0, 0.0)),
        ("yaw +0.5deg", EulerAngles::new(0.0, 0.0, 0.5f64.to_radians())),
        ("yaw -0.5deg", EulerAngles::new(0.0, 0.0, -0.5f64.to_radians())),
        ("pitch +0.5deg", EulerAngles::new(0.0, 0.5f64.to_radians(), 0.0)),
        ("roll +0.5deg", EulerAngles::new(0.5f64.to_radians(), 0.0, 0.0)),
    ] {
        let d = angles.to_rotation();
        let t = RigidTransform::new(
            d * fixture.t_true.rotation(),
            d * fixture.t_true.translation(),
        )
        .unwrap();
        let (dp, rp) = render_depth_images(&fixture.cloud, k, &t);
        let le = extract_lidar_edges(&dp, &rp, &edge_cfg).unwrap();
        if le.pixel_count() == 0 {
            println!("{name}: no lidar edges!");
            continue;
        }
        let idx = build_index(&le).unwrap();
        let c = evaluate_cost(&cam_edges, &idx, &cfg).unwrap();
        println!("cost {name}: {:.4} (matched {}/{})", c.cost, c.matched, c.total);
    }

    // Non-repetition: overlap of quantized directions between frames.
    let q = 0.05f64.to_radians();
    let sets: Vec<_> = fixture.frames.iter().take(10).map(|f| quantized_directions(f, q)).collect();
    let mut max_overlap = 0.0f64;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let inter = sets[i].intersection(&sets[j]).count();
            let ratio = inter as f64 / sets[i].len().min(sets[j].len()) as f64;
            max_overlap = max_overlap.max(ratio);
        }
    }
    println!("max pairwise 10-frame overlap: {:.4}", max_overlap);
}
