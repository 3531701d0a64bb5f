//! Synthetic scan-pattern oracle.
//!
//! Simulates a prism-scanned lidar whose beam traces a non-repeating rosette,
//! ray-casts it against analytic scenes from an arbitrary platform motion,
//! and renders the matching camera view through the same projection model.
//! Because the scene, the motion and the extrinsic are all known exactly,
//! the generated fixtures verify undistortion, density growth and the full
//! calibration loop against ground truth.

mod scene;

pub use scene::{BoxPrimitive, Primitive, RayHit, Rectangle, Scene, SurfaceTexture};

use nalgebra::{Matrix3, Vector3};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec;
use crate::geometry::{CameraIntrinsics, EulerAngles, RigidTransform, Timestamp};
use crate::preprocessing::{
    accumulate_frames, ImuSample, LidarPoint, PointCloudFrame, SENSOR_MAX_RANGE_M,
};
use crate::raster::RasterImage;
use crate::Result;

/// Two-rotor rosette scan parameters.
///
/// The beam direction at absolute time `t` (seconds) deflects off the
/// forward axis by the sum of two counter-rotating harmonics scaled into the
/// field of view; an irrational-like rate ratio keeps the pattern from
/// retracing itself across frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPatternParams {
    /// First prism angular rate, rad/s.
    pub omega1: f64,
    /// Second prism angular rate, rad/s (counter-rotating when negative).
    pub omega2: f64,
    /// Horizontal half field of view, radians.
    pub half_fov_h: f64,
    /// Vertical half field of view, radians.
    pub half_fov_v: f64,
    /// Emission rate, points per second.
    pub point_rate: f64,
    /// Trigger period, seconds.
    pub frame_period: f64,
}

impl Default for ScanPatternParams {
    fn default() -> Self {
        ScanPatternParams {
            omega1: 2.0 * std::f64::consts::PI * 7294.0 / 60.0,
            omega2: -2.0 * std::f64::consts::PI * 4677.0 / 60.0,
            half_fov_h: (81.7_f64 / 2.0).to_radians(),
            half_fov_v: (25.1_f64 / 2.0).to_radians(),
            point_rate: 240_000.0,
            frame_period: 0.1,
        }
    }
}

impl ScanPatternParams {
    /// Beam direction (unit, lidar frame, x forward) at absolute time `t_s`.
    pub fn beam_direction(&self, t: f64) -> Vector3<f64> {
        let u = ((self.omega1 * t).cos() + (self.omega2 * t).cos()) * 0.5;
        let v = ((self.omega1 * t).sin() + (self.omega2 * t).sin()) * 0.5;
        Vector3::new(1.0, self.half_fov_h.tan() * u, self.half_fov_v.tan() * v).normalize()
    }

    /// Number of emissions within one interval of `duration_ns`.
    fn emission_count(&self, duration_ns: i64) -> usize {
        ((duration_ns as f64 * 1e-9) * self.point_rate).round() as usize
    }
}

/// Generates one scan frame over `[t_s, t_e)`.
///
/// `platform_motion` maps a timestamp to the lidar-to-world pose at that
/// instant; every emission is ray-cast from the pose at its own time, so a
/// moving platform produces a motion-distorted frame exactly as a real
/// continuously scanning sensor would. Points come back in the lidar frame
/// at their acquisition instant with the surface albedo as reflectivity;
/// misses and returns beyond the sensor maximum range produce no point.
pub fn generate_scan<F>(
    params: &ScanPatternParams,
    scene: &Scene,
    platform_motion: F,
    t_s: Timestamp,
    t_e: Timestamp,
) -> Result<PointCloudFrame>
where
    F: Fn(Timestamp) -> RigidTransform + Sync,
{
    generate_scan_impl(params, scene, platform_motion, t_s, t_e, None)
}

/// [`generate_scan`] with zero-mean Gaussian range noise of `sigma_m`
/// meters, deterministic in `seed`.
pub fn generate_scan_noisy<F>(
    params: &ScanPatternParams,
    scene: &Scene,
    platform_motion: F,
    t_s: Timestamp,
    t_e: Timestamp,
    sigma_m: f64,
    seed: u64,
) -> Result<PointCloudFrame>
where
    F: Fn(Timestamp) -> RigidTransform + Sync,
{
    generate_scan_impl(params, scene, platform_motion, t_s, t_e, Some((sigma_m, seed)))
}

fn generate_scan_impl<F>(
    params: &ScanPatternParams,
    scene: &Scene,
    platform_motion: F,
    t_s: Timestamp,
    t_e: Timestamp,
    noise: Option<(f64, u64)>,
) -> Result<PointCloudFrame>
where
    F: Fn(Timestamp) -> RigidTransform + Sync,
{
    if t_e <= t_s {
        return Err(crate::Error::DegenerateInterval(t_s.nanos()));
    }
    let count = params.emission_count(t_e.nanos() - t_s.nanos());
    let step_ns = 1e9 / params.point_rate;
    let points: Vec<Option<LidarPoint>> = exec::map_indices(count, |k| {
        let t_ns = t_s.nanos() + (k as f64 * step_ns).round() as i64;
        if t_ns >= t_e.nanos() {
            return None;
        }
        let t = Timestamp::from_nanos(t_ns);
        let dir = params.beam_direction(t.as_secs_f64());
        let pose = platform_motion(t);
        let origin = *pose.translation();
        let world_dir = pose.rotation() * dir;
        scene.cast_ray(&origin, &world_dir).and_then(|hit| {
            let range = match noise {
                Some((sigma, seed)) => hit.range + sigma * gaussian_from_hash(seed, k as u64),
                None => hit.range,
            };
            if range <= 0.0 || range > SENSOR_MAX_RANGE_M {
                return None;
            }
            Some(LidarPoint {
                position: dir * range,
                reflectivity: hit.albedo,
                t,
            })
        })
    });
    PointCloudFrame::new(points.into_iter().flatten().collect(), t_s, t_e)
}

/// Deterministic standard normal derived from a hash of `(seed, k)`
/// (Box-Muller over splitmix64 outputs); keeps noisy scans reproducible and
/// independent of the parallel schedule.
fn gaussian_from_hash(seed: u64, k: u64) -> f64 {
    let mut x = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut next = || {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    let u1 = (next() >> 11) as f64 / (1u64 << 53) as f64;
    let u2 = (next() >> 11) as f64 / (1u64 << 53) as f64;
    let u1 = u1.max(1e-300);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Renders the camera view of a scene by per-pixel ray casting through the
/// same pinhole model the projection path uses. Pixel values are surface
/// albedos; sky (no hit) renders as 0.
pub fn render_camera(
    scene: &Scene,
    k: &CameraIntrinsics,
    camera_to_world: &RigidTransform,
) -> RasterImage {
    let mut img = RasterImage::zeros(k.width, k.height);
    let origin = *camera_to_world.translation();
    let rotation = *camera_to_world.rotation();
    let rows = exec::map_indices(k.height as usize, |row| {
        let v = row as f64;
        (0..k.width)
            .map(|col| {
                let u = col as f64;
                let dir_cam =
                    Vector3::new((u - k.c_u) / k.f_u, (v - k.c_v) / k.f_v, 1.0).normalize();
                let dir = rotation * dir_cam;
                scene
                    .cast_ray(&origin, &dir)
                    .map_or(0.0, |hit| hit.albedo)
            })
            .collect::<Vec<f32>>()
    });
    for (row, line) in rows.into_iter().enumerate() {
        let start = row * k.width as usize;
        img.data_mut()[start..start + k.width as usize].copy_from_slice(&line);
    }
    img
}

/// Lidar-to-camera axes: camera x = -y_lidar, camera y = -z_lidar,
/// camera z = x_lidar.
pub fn nominal_axis_swap() -> Matrix3<f64> {
    Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0)
}

/// A complete calibration test fixture with known ground truth.
#[derive(Debug, Clone)]
pub struct CalibrationFixture {
    /// Grayscale camera rendering of the scene.
    pub camera_image: RasterImage,
    /// Accumulated stationary cloud over all frames.
    pub cloud: PointCloudFrame,
    /// The individual frames making up `cloud`.
    pub frames: Vec<PointCloudFrame>,
    pub intrinsics: CameraIntrinsics,
    /// Ground-truth lidar-to-camera extrinsic.
    pub t_true: RigidTransform,
    /// Constant-pose IMU stream covering the accumulation span at 200 Hz.
    pub imu: Vec<ImuSample>,
    pub scene: Scene,
    pub scene_id: String,
}

/// Number of accumulated frames in a calibration fixture (5 s of scanning).
pub const FIXTURE_FRAMES: usize = 50;

/// Builds a deterministic calibration fixture: a building-like scene with at
/// least six non-parallel depth/albedo discontinuities, a stationary
/// accumulated rosette cloud, the matching camera image, and a ground-truth
/// extrinsic with a realistic small offset (5-15 cm, under 3 degrees off the
/// nominal mounting).
pub fn make_calibration_fixture(seed: u64) -> CalibrationFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Camera FOV chosen to sit just inside the scan FOV so depth rasters can
    // approach full coverage.
    let intrinsics = CameraIntrinsics::new(900.0, 1300.0, 760.0, 284.0, 1520, 568).unwrap();

    let delta = EulerAngles::new(
        rng.random_range(-2.5f64..2.5).to_radians(),
        rng.random_range(-2.5f64..2.5).to_radians(),
        rng.random_range(-2.5f64..2.5).to_radians(),
    );
    let rotation = delta.to_rotation() * nominal_axis_swap();
    // Camera center 5-15 cm from the lidar origin.
    let offset_dir = Vector3::new(
        rng.random_range(-1.0f64..1.0),
        rng.random_range(-1.0f64..1.0),
        rng.random_range(-1.0f64..1.0),
    )
    .normalize();
    let center_lidar = offset_dir * rng.random_range(0.05..0.15);
    let t_true = RigidTransform::new(rotation, -(rotation * center_lidar)).unwrap();

    let scene = fixture_scene(&mut rng);

    let params = ScanPatternParams::default();
    let frame_ns = (params.frame_period * 1e9).round() as i64;
    let frames: Vec<PointCloudFrame> = (0..FIXTURE_FRAMES)
        .map(|i| {
            generate_scan(
                &params,
                &scene,
                |_| RigidTransform::identity(),
                Timestamp::from_nanos(i as i64 * frame_ns),
                Timestamp::from_nanos((i as i64 + 1) * frame_ns),
            )
            .unwrap()
        })
        .collect();
    let cloud = accumulate_frames(&frames).unwrap();

    let camera_image = render_camera(&scene, &intrinsics, &t_true.inverse());

    let imu_period_ns = 5_000_000;
    let imu: Vec<ImuSample> = (0..=(FIXTURE_FRAMES as i64 * frame_ns / imu_period_ns))
        .map(|i| ImuSample {
            t: Timestamp::from_nanos(i * imu_period_ns),
            pose: RigidTransform::identity(),
        })
        .collect();

    CalibrationFixture {
        camera_image,
        cloud,
        frames,
        intrinsics,
        t_true,
        imu,
        scene,
        scene_id: format!("fixture-{seed}"),
    }
}

fn fixture_scene(rng: &mut ChaCha8Rng) -> Scene {
    let mut primitives = Vec::new();

    // Striped ground plane: long horizontal bands in both the camera image
    // and the reflectivity raster.
    primitives.push(Primitive::Rect(Rectangle {
        corner: Vector3::new(2.0, -40.0, -1.4),
        edge_u: Vector3::new(70.0, 0.0, 0.0),
        edge_v: Vector3::new(0.0, 80.0, 0.0),
        texture: SurfaceTexture::Stripes {
            a: 55.0,
            b: 110.0,
            period_m: rng.random_range(2.0..3.5),
        },
    }));

    // Striped backdrop wall facing the sensor.
    let wall_x = rng.random_range(38.0..48.0);
    primitives.push(Primitive::Rect(Rectangle {
        corner: Vector3::new(wall_x, -35.0, -1.4),
        edge_u: Vector3::new(0.0, 70.0, 0.0),
        edge_v: Vector3::new(0.0, 0.0, 16.0),
        texture: SurfaceTexture::Stripes {
            a: 95.0,
            b: 195.0,
            period_m: rng.random_range(2.5..4.5),
        },
    }));

    // Building-like boxes seated on the ground.
    let albedos = [35.0f32, 60.0, 120.0, 165.0, 210.0, 240.0];
    let n_boxes = rng.random_range(6..10usize);
    for i in 0..n_boxes {
        let hx = rng.random_range(1.0..2.2);
        let hy = rng.random_range(1.0..2.2);
        let hz = rng.random_range(1.6..4.0);
        let x = rng.random_range(9.0..30.0);
        let lane = if i % 2 == 0 { 1.0 } else { -1.0 };
        let y = lane * rng.random_range(1.0..11.0);
        let yaw = rng.random_range(-0.45f64..0.45);
        let face = albedos[rng.random_range(0..albedos.len())];
        let side = albedos[(rng.random_range(0..albedos.len() - 1) + 1) % albedos.len()];
        let striped = rng.random_range(0.0..1.0) < 0.5;
        let front_tex = if striped {
            SurfaceTexture::Stripes {
                a: face,
                b: (255.0 - face).max(20.0),
                period_m: rng.random_range(0.8..1.6),
            }
        } else {
            SurfaceTexture::Solid(face)
        };
        primitives.push(Primitive::Box(BoxPrimitive {
            pose: RigidTransform::from_euler(
                EulerAngles::new(0.0, 0.0, yaw),
                Vector3::new(x, y, -1.4 + hz),
            ),
            half_extents: Vector3::new(hx, hy, hz),
            faces: [
                SurfaceTexture::Solid(side),
                front_tex,
                SurfaceTexture::Solid(side),
                SurfaceTexture::Solid(face),
                SurfaceTexture::Solid((face + 30.0).min(250.0)),
                SurfaceTexture::Solid(side),
            ],
        }));
    }

    Scene::new(primitives).unwrap()
}

/// A motion-distortion fixture: the same wall scanned by a constant-velocity
/// platform and by a static one, with the exact motion as an IMU stream.
#[derive(Debug, Clone)]
pub struct DistortionFixture {
    /// Frame scanned while the platform moves (distorted).
    pub moving: PointCloudFrame,
    /// Reference frame scanned from the pose at `t_s` (undistorted truth).
    pub static_scan: PointCloudFrame,
    /// Exact motion sampled at 200 Hz, bracketing the frame.
    pub imu: Vec<ImuSample>,
    /// The wall plane in the `t_s` lidar frame: unit normal and offset such
    /// that `normal · p = offset` on the plane.
    pub plane_normal: Vector3<f64>,
    pub plane_offset: f64,
}

/// Builds the distortion-correction fixture. The platform follows the
/// constant twist (forward velocity plus yaw rate), so piecewise screw
/// interpolation of the sampled poses reproduces the motion exactly and the
/// undistorted cloud must land back on the wall.
pub fn make_distortion_fixture(seed: u64) -> DistortionFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wall_x = 12.0;
    let scene = Scene::new(vec![Primitive::Rect(Rectangle {
        corner: Vector3::new(wall_x, -25.0, -8.0),
        edge_u: Vector3::new(0.0, 50.0, 0.0),
        edge_v: Vector3::new(0.0, 0.0, 16.0),
        texture: SurfaceTexture::Solid(128.0),
    })])
    .unwrap();

    // Constant twist: ~1.5 m/s forward-ish, mild yaw rate.
    let v = Vector3::new(
        rng.random_range(1.0..2.0),
        rng.random_range(-0.5..0.5),
        rng.random_range(-0.1..0.1),
    );
    let omega = Vector3::new(0.0, 0.0, rng.random_range(-0.3f64..0.3));
    let motion = move |t: Timestamp| {
        let s = t.as_secs_f64();
        RigidTransform::exp(&(v * s), &(omega * s))
    };

    let params = ScanPatternParams::default();
    let t_s = Timestamp::from_nanos(0);
    let t_e = Timestamp::from_nanos(100_000_000);
    let moving = generate_scan(&params, &scene, motion, t_s, t_e).unwrap();
    let static_scan = generate_scan(&params, &scene, |_| RigidTransform::identity(), t_s, t_e).unwrap();

    let imu: Vec<ImuSample> = (-1..=21)
        .map(|i| {
            let t = Timestamp::from_nanos(i * 5_000_000);
            ImuSample {
                t,
                pose: motion(t),
            }
        })
        .collect();

    DistortionFixture {
        moving,
        static_scan,
        imu,
        plane_normal: Vector3::new(1.0, 0.0, 0.0),
        plane_offset: wall_x,
    }
}

/// RMS distance of points to the plane `normal · p = offset`.
pub fn point_plane_rms(points: &[LidarPoint], normal: &Vector3<f64>, offset: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let sum: f64 = points
        .iter()
        .map(|p| {
            let d = normal.dot(&p.position) - offset;
            d * d
        })
        .sum();
    (sum / points.len() as f64).sqrt()
}

/// Least-squares plane through a cloud: centroid plus the covariance
/// eigenvector of smallest eigenvalue. Returns `(unit normal, offset)`.
pub fn fit_plane(points: &[LidarPoint]) -> Result<(Vector3<f64>, f64)> {
    if points.len() < 3 {
        return Err(crate::Error::EmptyInput("plane fit needs at least 3 points"));
    }
    let n = points.len() as f64;
    let centroid = points
        .iter()
        .fold(Vector3::zeros(), |acc, p| acc + p.position)
        / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p.position - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut min_idx = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let normal = eig.eigenvectors.column(min_idx).into_owned().normalize();
    Ok((normal, normal.dot(&centroid)))
}

/// Quantizes beam directions to a grid of `quantum_rad` in azimuth and
/// elevation; used to measure scan-pattern overlap between frames.
pub fn quantized_directions(
    frame: &PointCloudFrame,
    quantum_rad: f64,
) -> std::collections::BTreeSet<(i64, i64)> {
    frame
        .points
        .iter()
        .map(|p| {
            let d = p.position.normalize();
            let az = d.y.atan2(d.x);
            let el = d.z.asin();
            (
                (az / quantum_rad).round() as i64,
                (el / quantum_rad).round() as i64,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocessing::render_depth_images;

    #[test]
    fn empty_scene_gives_empty_frame() {
        let params = ScanPatternParams::default();
        let frame = generate_scan(
            &params,
            &Scene::empty(),
            |_| RigidTransform::identity(),
            Timestamp::from_nanos(0),
            Timestamp::from_nanos(100_000_000),
        )
        .unwrap();
        assert!(frame.is_empty());
    }

    #[test]
    fn wall_scan_ranges_bounded_below_by_wall_distance() {
        let scene = Scene::new(vec![Primitive::Rect(Rectangle {
            corner: Vector3::new(10.0, -60.0, -60.0),
            edge_u: Vector3::new(0.0, 120.0, 0.0),
            edge_v: Vector3::new(0.0, 0.0, 120.0),
            texture: SurfaceTexture::Solid(200.0),
        })])
        .unwrap();
        let params = ScanPatternParams::default();
        let frame = generate_scan(
            &params,
            &scene,
            |_| RigidTransform::identity(),
            Timestamp::from_nanos(0),
            Timestamp::from_nanos(100_000_000),
        )
        .unwrap();
        assert!(!frame.is_empty());
        let min_range = frame
            .points
            .iter()
            .map(|p| p.position.norm())
            .fold(f64::INFINITY, f64::min);
        // The perpendicular distance bounds every range; a near-axis beam
        // comes close to it, and the exact axis ray (cast directly) hits it.
        assert!(min_range >= 10.0 * (1.0 - 1e-12));
        assert!(min_range < 10.2);
        let axis_hit = scene
            .cast_ray(&Vector3::zeros(), &Vector3::new(1.0, 0.0, 0.0))
            .unwrap();
        assert_eq!(axis_hit.range, 10.0);
        // All points carry the wall albedo and timestamps inside the frame.
        for p in &frame.points {
            assert_eq!(p.reflectivity, 200.0);
            assert!(p.t >= frame.t_s && p.t <= frame.t_e);
        }
    }

    #[test]
    fn accumulation_increases_fill_ratio() {
        let fixture = make_calibration_fixture(1);
        let k = &fixture.intrinsics;
        let one = render_depth_images(&fixture.frames[0], k, &fixture.t_true).0;
        let five = render_depth_images(
            &accumulate_frames(&fixture.frames[..5]).unwrap(),
            k,
            &fixture.t_true,
        )
        .0;
        assert!(five.fill_ratio() > one.fill_ratio());
    }

    #[test]
    fn render_camera_empty_scene_is_black() {
        let k = CameraIntrinsics::new(300.0, 300.0, 160.0, 120.0, 320, 240).unwrap();
        let img = render_camera(&Scene::empty(), &k, &RigidTransform::identity());
        assert_eq!(img.count_nonzero(), 0);
    }

    #[test]
    fn render_camera_full_wall_is_constant() {
        let k = CameraIntrinsics::new(300.0, 300.0, 160.0, 120.0, 320, 240).unwrap();
        // Wall fills the camera frustum (camera z forward).
        let scene = Scene::new(vec![Primitive::Rect(Rectangle {
            corner: Vector3::new(-100.0, -100.0, 10.0),
            edge_u: Vector3::new(200.0, 0.0, 0.0),
            edge_v: Vector3::new(0.0, 200.0, 0.0),
            texture: SurfaceTexture::Solid(180.0),
        })])
        .unwrap();
        let img = render_camera(&scene, &k, &RigidTransform::identity());
        assert!(img.data().iter().all(|&v| v == 180.0));
    }

    // Two abutting walls with the seam at x = 1 m, 10 m ahead: the intensity
    // step must land at u = f*x/z + c = 900*0.1 + 760 = 850.
    #[test]
    fn render_camera_seam_column_is_analytic() {
        let k = CameraIntrinsics::new(900.0, 1300.0, 760.0, 284.0, 1520, 568).unwrap();
        let scene = Scene::new(vec![
            Primitive::Rect(Rectangle {
                corner: Vector3::new(-30.0, -30.0, 10.0),
                edge_u: Vector3::new(31.0, 0.0, 0.0),
                edge_v: Vector3::new(0.0, 60.0, 0.0),
                texture: SurfaceTexture::Solid(60.0),
            }),
            Primitive::Rect(Rectangle {
                corner: Vector3::new(1.0, -30.0, 10.0),
                edge_u: Vector3::new(29.0, 0.0, 0.0),
                edge_v: Vector3::new(0.0, 60.0, 0.0),
                texture: SurfaceTexture::Solid(200.0),
            }),
        ])
        .unwrap();
        let img = render_camera(&scene, &k, &RigidTransform::identity());
        let row = 284;
        assert_eq!(img.get(848, row), 60.0);
        assert_eq!(img.get(852, row), 200.0);
        // The transition happens within one pixel of the analytic column.
        let mut transition = None;
        for u in 840..860 {
            if img.get(u, row) != img.get(u + 1, row) {
                transition = Some(u);
                break;
            }
        }
        let transition = transition.expect("no seam found");
        assert!((transition as f64 - 850.0).abs() <= 1.0, "seam at {transition}");
    }

    #[test]
    fn fixture_is_deterministic() {
        let a = make_calibration_fixture(0);
        let b = make_calibration_fixture(0);
        assert_eq!(a.camera_image, b.camera_image);
        assert_eq!(a.cloud, b.cloud);
        assert_eq!(a.t_true.rotation(), b.t_true.rotation());
        assert_eq!(a.t_true.translation(), b.t_true.translation());
        assert_eq!(a.intrinsics, b.intrinsics);
    }

    #[test]
    fn fixture_extrinsic_is_small_offset() {
        for seed in [0, 1, 2] {
            let f = make_calibration_fixture(seed);
            let delta = f.t_true.rotation() * nominal_axis_swap().transpose();
            let angles = EulerAngles::from_rotation(&delta);
            assert!(angles.max_abs() < 3.0f64.to_radians());
            let center = -(f.t_true.rotation().transpose() * f.t_true.translation());
            assert!(center.norm() >= 0.05 && center.norm() <= 0.15);
        }
    }

    #[test]
    fn noisy_scan_is_deterministic_and_differs() {
        let scene = Scene::new(vec![Primitive::Rect(Rectangle {
            corner: Vector3::new(10.0, -50.0, -50.0),
            edge_u: Vector3::new(0.0, 100.0, 0.0),
            edge_v: Vector3::new(0.0, 0.0, 100.0),
            texture: SurfaceTexture::Solid(100.0),
        })])
        .unwrap();
        let params = ScanPatternParams::default();
        let (t0, t1) = (Timestamp::from_nanos(0), Timestamp::from_nanos(10_000_000));
        let clean = generate_scan(&params, &scene, |_| RigidTransform::identity(), t0, t1).unwrap();
        let a = generate_scan_noisy(&params, &scene, |_| RigidTransform::identity(), t0, t1, 0.02, 7)
            .unwrap();
        let b = generate_scan_noisy(&params, &scene, |_| RigidTransform::identity(), t0, t1, 0.02, 7)
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, clean);
        let rms = point_plane_rms(&a.points, &Vector3::new(1.0, 0.0, 0.0), 10.0);
        assert!(rms > 0.005 && rms < 0.05, "noise rms {rms}");
    }

    #[test]
    fn plane_fit_recovers_wall() {
        let fixture = make_distortion_fixture(3);
        let (normal, offset) = fit_plane(&fixture.static_scan.points).unwrap();
        let aligned = normal.dot(&fixture.plane_normal).abs();
        assert!(aligned > 1.0 - 1e-9);
        assert!((offset.abs() - fixture.plane_offset).abs() < 1e-9);
    }
}
