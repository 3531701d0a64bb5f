// Scratch probe: dump pipeline stages as PNGs (deleted before release).
use licam_core::edgemap::{
    equalize_histogram, extract_camera_edges, extract_lidar_edges, EdgePipelineConfig,
};
use licam_core::io::{write_gray_png8, write_rgb_png};
use licam_core::preprocessing::render_depth_images;
use licam_core::raster::RgbImage;
use licam_core::synth::make_calibration_fixture;
use std::path::Path;

fn main() {
    let seed: u64 = std::env::args().nth(1).unwrap_or("3".into()).parse().unwrap();
    let dir = format!("/tmp/dump-{seed}");
    std::fs::create_dir_all(&dir).unwrap();
    let dir = Path::new(&dir);

    let fixture = make_calibration_fixture(seed);
    let edge_cfg = EdgePipelineConfig::default();

    write_gray_png8(&dir.join("camera.png"), &fixture.camera_image).unwrap();
    write_gray_png8(
        &dir.join("camera_eq.png"),
        &equalize_histogram(&fixture.camera_image),
    )
    .unwrap();

    let (depth, refl) = render_depth_images(&fixture.cloud, &fixture.intrinsics, &fixture.t_true);
    write_gray_png8(&dir.join("depth_eq.png"), &equalize_histogram(&depth)).unwrap();
    write_gray_png8(&dir.join("refl.png"), &refl).unwrap();

    let cam_edges = extract_camera_edges(&fixture.camera_image, &edge_cfg);
    let lidar_edges = extract_lidar_edges(&depth, &refl, &edge_cfg).unwrap();
    println!(
        "camera: {} segs {} px | lidar: {} segs {} px | fill {:.3}",
        cam_edges.segments().len(),
        cam_edges.pixel_count(),
        lidar_edges.segments().len(),
        lidar_edges.pixel_count(),
        depth.fill_ratio()
    );

    let mut overlay = RgbImage::from_gray(&fixture.camera_image);
    for (u, v) in lidar_edges.pixels() {
        overlay.set(u, v, [0, 120, 255]);
    }
    for (u, v) in cam_edges.pixels() {
        overlay.set(u, v, [255, 140, 0]);
    }
    write_rgb_png(&dir.join("edges_overlay.png"), &overlay).unwrap();
    println!("wrote {}", dir.display());
}
