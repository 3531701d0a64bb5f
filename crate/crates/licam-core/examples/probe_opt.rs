// Scratch probe: coordinate-descent recovery on fixtures (deleted before release).
use licam_core::calib::{optimize_extrinsic, scaled_max_match_distance, MatchConfig};
use licam_core::edgemap::{extract_camera_edges, EdgePipelineConfig};
use licam_core::geometry::{EulerAngles, RigidTransform};
use licam_core::synth::make_calibration_fixture;
use std::time::Instant;

fn recovery_error_deg(estimate: &RigidTransform, truth: &RigidTransform) -> EulerAngles {
    let delta = estimate.rotation() * truth.rotation().transpose();
    let e = EulerAngles::from_rotation(&delta);
    EulerAngles::new(e.roll.to_degrees(), e.pitch.to_degrees(), e.yaw.to_degrees())
}

fn main() {
    let seeds: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().unwrap())
        .collect();
    let seeds = if seeds.is_empty() { vec![1, 2, 3] } else { seeds };
    let edge_cfg = EdgePipelineConfig::default();
    for seed in seeds {
        let t0 = Instant::now();
        let fixture = make_calibration_fixture(seed);
        let camera_edges = extract_camera_edges(&fixture.camera_image, &edge_cfg);
        let k = &fixture.intrinsics;
        let d_max: f64 = std::env::var("DMAX").map(|v| v.parse().unwrap()).unwrap_or(scaled_max_match_distance(k.width, k.height));
        let cfg = MatchConfig {
            max_match_distance: d_max,
            ..MatchConfig::default()
        };
        // 2 degree yaw perturbation, camera frame.
        let d = EulerAngles::new(0.0, 0.0, 2.0f64.to_radians()).to_rotation();
        let t_init = RigidTransform::new(
            d * fixture.t_true.rotation(),
            d * fixture.t_true.translation(),
        )
        .unwrap();
        let setup = t0.elapsed();

        let t0 = Instant::now();
        let result = optimize_extrinsic(
            &camera_edges,
            &fixture.cloud,
            k,
            &t_init,
            &cfg,
            &edge_cfg,
            &fixture.scene_id,
        )
        .unwrap();
        let opt_time = t0.elapsed();

        let err = recovery_error_deg(&result.extrinsic, &fixture.t_true);
        // Reference costs for the ordering check.
        let eval = |t: &RigidTransform| {
            use licam_core::calib::{build_index, evaluate_cost};
            use licam_core::edgemap::extract_lidar_edges;
            use licam_core::preprocessing::render_depth_images;
            let (dp, rp) = render_depth_images(&fixture.cloud, k, t);
            let le = extract_lidar_edges(&dp, &rp, &edge_cfg).unwrap();
            evaluate_cost(&camera_edges, &build_index(&le).unwrap(), &cfg)
                .unwrap()
                .cost
        };
        let cost_init = eval(&t_init);
        let cost_truth = eval(&fixture.t_true);
        println!(
            "seed {seed}: err (r {:+.3}, p {:+.3}, y {:+.3}) deg | cost init {:.3} -> auto {:.3} vs truth {:.3} | setup {:?} opt {:?}",
            err.roll, err.pitch, err.yaw, cost_init, result.cost, cost_truth, setup, opt_time
        );
    }
}
