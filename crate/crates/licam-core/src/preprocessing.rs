//! Motion undistortion of continuously scanned lidar frames and projection
//! into pixel-aligned depth/reflectivity rasters.
//!
//! A lidar frame is acquired over a full trigger period, so every point sees
//! a slightly different sensor pose. Undistortion re-expresses each point in
//! the lidar frame at the trigger instant `t_s` using the IMU pose stream:
//! the pose at an arbitrary time is the screw interpolation between the two
//! bracketing IMU samples, and a point taken at `t_i` moves by the relative
//! motion between `t_s` and `t_i`.

use nalgebra::Vector3;

use crate::exec;
use crate::geometry::{
    project_point, CameraIntrinsics, RigidTransform, Timestamp,
};
use crate::raster::{RasterImage, RgbImage};
use crate::{Error, Result};

/// Maximum sensor range in meters; ranges beyond this produce no return.
pub const SENSOR_MAX_RANGE_M: f64 = 260.0;

/// Default depth threshold separating close from far keypoints, in meters.
pub const DEFAULT_CLOSE_KEYPOINT_THRESHOLD_M: f64 = 130.0;

/// Nominal trigger period of the synchronized rig, in seconds.
pub const NOMINAL_FRAME_PERIOD_S: f64 = 0.1;

/// One lidar return: position in the lidar frame at the acquisition instant,
/// return intensity in `[0, 255]`, and the acquisition timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarPoint {
    pub position: Vector3<f64>,
    pub reflectivity: f32,
    pub t: Timestamp,
}

/// Points grouped into one trigger interval `[t_s, t_e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudFrame {
    pub points: Vec<LidarPoint>,
    pub t_s: Timestamp,
    pub t_e: Timestamp,
}

impl PointCloudFrame {
    /// Builds a frame, rejecting point timestamps outside `[t_s, t_e]`.
    pub fn new(points: Vec<LidarPoint>, t_s: Timestamp, t_e: Timestamp) -> Result<Self> {
        if t_e <= t_s {
            return Err(Error::DegenerateInterval(t_s.nanos()));
        }
        for p in &points {
            if p.t < t_s || p.t > t_e {
                return Err(Error::TimestampOutOfInterval {
                    t: p.t.nanos(),
                    start: t_s.nanos(),
                    end: t_e.nanos(),
                });
            }
        }
        Ok(PointCloudFrame { points, t_s, t_e })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        (self.t_e.nanos() - self.t_s.nanos()) as f64 * 1e-9
    }

    /// Checks that the frame spans one trigger period within `rel_tol`
    /// (raw sensor frames only; accumulated frames span many periods).
    pub fn validate_trigger_period(&self, period_s: f64, rel_tol: f64) -> Result<()> {
        let d = self.duration_s();
        if (d - period_s).abs() > period_s * rel_tol {
            return Err(Error::Invalid(format!(
                "frame spans {d:.6} s, expected one trigger period of {period_s:.6} s (±{:.0}%)",
                rel_tol * 100.0
            )));
        }
        Ok(())
    }
}

/// One sample of the body pose stream (pose of the lidar origin relative to
/// the session origin; the stream is expected to be expressed at the lidar).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: Timestamp,
    pub pose: RigidTransform,
}

/// Pixel-aligned camera + lidar frame: all rasters share dimensions, depth is
/// meters with 0 encoding "no return".
#[derive(Debug, Clone)]
pub struct RgbdFrame {
    pub rgb: RgbImage,
    pub depth: RasterImage,
    pub reflectivity: RasterImage,
    pub t_s: Timestamp,
}

impl RgbdFrame {
    pub fn new(
        rgb: RgbImage,
        depth: RasterImage,
        reflectivity: RasterImage,
        t_s: Timestamp,
    ) -> Result<Self> {
        depth.same_dims(&reflectivity)?;
        if rgb.width() != depth.width() || rgb.height() != depth.height() {
            return Err(Error::DimensionMismatch {
                lhs_width: rgb.width(),
                lhs_height: rgb.height(),
                rhs_width: depth.width(),
                rhs_height: depth.height(),
            });
        }
        for &d in depth.data() {
            if !(d == 0.0 || (d > 0.0 && d as f64 <= SENSOR_MAX_RANGE_M)) {
                return Err(Error::Invalid(format!(
                    "depth value {d} outside 0 or (0, {SENSOR_MAX_RANGE_M}]"
                )));
            }
        }
        Ok(RgbdFrame {
            rgb,
            depth,
            reflectivity,
            t_s,
        })
    }
}

/// Piecewise screw interpolation over a sorted IMU pose stream.
///
/// Brackets are precomputed once (pose, twist to the next sample) so that
/// per-point pose lookups reduce to a binary search plus one exponential.
pub struct ImuTrack {
    times: Vec<i64>,
    poses: Vec<RigidTransform>,
    twists: Vec<(Vector3<f64>, Vector3<f64>)>,
}

impl ImuTrack {
    pub fn new(samples: &[ImuSample]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "need at least 2 IMU samples, got {}",
                samples.len()
            )));
        }
        for pair in samples.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::Invalid(format!(
                    "IMU stream not strictly sorted at {} ns",
                    pair[1].t.nanos()
                )));
            }
        }
        let times: Vec<i64> = samples.iter().map(|s| s.t.nanos()).collect();
        let poses: Vec<RigidTransform> = samples.iter().map(|s| s.pose).collect();
        let twists = samples
            .windows(2)
            .map(|pair| pair[0].pose.inverse().compose(&pair[1].pose).log())
            .collect();
        Ok(ImuTrack {
            times,
            poses,
            twists,
        })
    }

    pub fn start(&self) -> Timestamp {
        Timestamp::from_nanos(self.times[0])
    }

    pub fn end(&self) -> Timestamp {
        Timestamp::from_nanos(*self.times.last().unwrap())
    }

    /// Pose at `t`, which must lie within the covered span.
    pub fn pose_at(&self, t: Timestamp) -> Result<RigidTransform> {
        let ns = t.nanos();
        if ns < self.times[0] || ns > *self.times.last().unwrap() {
            return Err(Error::TimestampOutOfInterval {
                t: ns,
                start: self.times[0],
                end: *self.times.last().unwrap(),
            });
        }
        // Index of the last sample at or before t.
        let i = match self.times.binary_search(&ns) {
            Ok(i) => return Ok(self.poses[i]),
            Err(ins) => ins - 1,
        };
        let alpha = (ns - self.times[i]) as f64 / (self.times[i + 1] - self.times[i]) as f64;
        let (v, omega) = self.twists[i];
        Ok(self.poses[i].compose(&RigidTransform::exp(&(v * alpha), &(omega * alpha))))
    }
}

/// Re-expresses every point of `frame` in the lidar frame at `t_s`.
///
/// Requires the IMU stream to bracket `[t_s, t_e]`; an interior spacing of
/// more than 3 median sample periods is treated as a coverage gap. With a
/// constant pose stream the input is returned unchanged, bit for bit.
pub fn undistort_frame(frame: &PointCloudFrame, imu: &[ImuSample]) -> Result<PointCloudFrame> {
    let track = ImuTrack::new(imu)?;
    if track.start() > frame.t_s || track.end() < frame.t_e {
        let (gap_start, gap_end) = if track.start() > frame.t_s {
            (frame.t_s.nanos(), track.start().nanos().min(frame.t_e.nanos()))
        } else {
            (track.end().nanos().max(frame.t_s.nanos()), frame.t_e.nanos())
        };
        return Err(Error::ImuCoverageGap {
            start: frame.t_s.nanos(),
            end: frame.t_e.nanos(),
            gap_start,
            gap_end,
            max_gap: 0,
        });
    }

    // Interior gap check against 3x the median sample spacing.
    let max_gap = 3 * median_gap(imu);
    for pair in imu.windows(2) {
        let (a, b) = (pair[0].t.nanos(), pair[1].t.nanos());
        let overlaps = b > frame.t_s.nanos() && a < frame.t_e.nanos();
        if overlaps && b - a > max_gap {
            return Err(Error::ImuCoverageGap {
                start: frame.t_s.nanos(),
                end: frame.t_e.nanos(),
                gap_start: a,
                gap_end: b,
                max_gap,
            });
        }
    }

    // Stationary shortcut: identical poses mean zero correction, and the
    // frame must round-trip byte for byte.
    if imu.windows(2).all(|p| p[0].pose == p[1].pose) {
        return Ok(frame.clone());
    }

    let world_from_start = track.pose_at(frame.t_s)?;
    let start_from_world = world_from_start.inverse();
    let corrected = exec::map_ordered(&frame.points, |p| {
        // pose lookups stay in range because the track brackets the frame
        let world_from_point_time = track.pose_at(p.t).expect("imu covers frame");
        let motion = start_from_world.compose(&world_from_point_time);
        LidarPoint {
            position: motion.apply(&p.position),
            reflectivity: p.reflectivity,
            t: p.t,
        }
    });
    Ok(PointCloudFrame {
        points: corrected,
        t_s: frame.t_s,
        t_e: frame.t_e,
    })
}

fn median_gap(imu: &[ImuSample]) -> i64 {
    let mut gaps: Vec<i64> = imu
        .windows(2)
        .map(|p| p[1].t.nanos() - p[0].t.nanos())
        .collect();
    if gaps.is_empty() {
        return i64::MAX / 8;
    }
    gaps.sort_unstable();
    gaps[gaps.len() / 2]
}

/// Projects an (undistorted) cloud into depth and reflectivity rasters.
///
/// Each point lands on its rounded `(u, v)` pixel; when several points share
/// a pixel the smallest camera depth wins and carries its reflectivity with
/// it (ties keep the earliest point). Pixels without a return hold 0.
pub fn render_depth_images(
    cloud: &PointCloudFrame,
    k: &CameraIntrinsics,
    lidar_to_cam: &RigidTransform,
) -> (RasterImage, RasterImage) {
    let width = k.width as usize;
    let hits = exec::map_ordered(&cloud.points, |p| {
        project_point(k, lidar_to_cam, &p.position).and_then(|proj| {
            let u = proj.u.round();
            let v = proj.v.round();
            if u >= 0.0 && u < k.width as f64 && v >= 0.0 && v < k.height as f64 {
                let idx = v as usize * width + u as usize;
                Some((idx, proj.depth as f32, p.reflectivity))
            } else {
                None
            }
        })
    });

    let mut depth = RasterImage::zeros(k.width, k.height);
    let mut refl = RasterImage::zeros(k.width, k.height);
    let dd = depth.data_mut();
    let rd = refl.data_mut();
    for (idx, z, r) in hits.into_iter().flatten() {
        if dd[idx] == 0.0 || z < dd[idx] {
            dd[idx] = z;
            rd[idx] = r;
        }
    }
    (depth, refl)
}

/// Close/far classification of a depth-associated keypoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthClass {
    /// No lidar return at this pixel (depth 0).
    NoDepth,
    /// Depth in `(0, threshold]`: usable for scale/translation/rotation.
    Close,
    /// Depth above the threshold: rotation information only.
    Far,
}

/// Classifies a depth value against the close-keypoint threshold.
pub fn classify_keypoint_depth(depth_m: f64, close_threshold_m: f64) -> Result<DepthClass> {
    if depth_m < 0.0 {
        return Err(Error::NegativeDepth(depth_m));
    }
    if depth_m == 0.0 {
        Ok(DepthClass::NoDepth)
    } else if depth_m <= close_threshold_m {
        Ok(DepthClass::Close)
    } else {
        Ok(DepthClass::Far)
    }
}

/// Per-class pixel counts of a depth raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthClassCounts {
    pub close: usize,
    pub far: usize,
    pub no_depth: usize,
}

/// Counts close/far/no-depth pixels of a depth raster; the three counts
/// always partition `width × height`.
pub fn classify_depth_raster(depth: &RasterImage, close_threshold_m: f64) -> Result<DepthClassCounts> {
    let mut counts = DepthClassCounts {
        close: 0,
        far: 0,
        no_depth: 0,
    };
    for &d in depth.data() {
        match classify_keypoint_depth(d as f64, close_threshold_m)? {
            DepthClass::Close => counts.close += 1,
            DepthClass::Far => counts.far += 1,
            DepthClass::NoDepth => counts.no_depth += 1,
        }
    }
    Ok(counts)
}

/// Concatenates stationary frames into one accumulated cloud spanning the
/// first frame's start to the last frame's end.
pub fn accumulate_frames(frames: &[PointCloudFrame]) -> Result<PointCloudFrame> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("no frames to accumulate"));
    }
    let mut points = Vec::with_capacity(frames.iter().map(|f| f.len()).sum());
    for f in frames {
        points.extend_from_slice(&f.points);
    }
    Ok(PointCloudFrame {
        points,
        t_s: frames[0].t_s,
        t_e: frames.last().unwrap().t_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EulerAngles;
    use approx::assert_relative_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ts(ns: i64) -> Timestamp {
        Timestamp::from_nanos(ns)
    }

    fn test_intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::new(600.0, 600.0, 760.0, 284.0, 1520, 568).unwrap()
    }

    fn constant_imu(pose: RigidTransform, t0: i64, t1: i64, n: usize) -> Vec<ImuSample> {
        (0..n)
            .map(|i| ImuSample {
                t: ts(t0 + (t1 - t0) * i as i64 / (n as i64 - 1)),
                pose,
            })
            .collect()
    }

    #[test]
    fn undistort_stationary_is_bitwise_identity() {
        let points = vec![
            LidarPoint {
                position: Vector3::new(3.0, 0.5, -0.2),
                reflectivity: 77.0,
                t: ts(10_000_000),
            },
            LidarPoint {
                position: Vector3::new(8.0, -1.0, 1.1),
                reflectivity: 12.0,
                t: ts(60_000_000),
            },
        ];
        let frame = PointCloudFrame::new(points, ts(0), ts(100_000_000)).unwrap();
        let pose = RigidTransform::from_euler(
            EulerAngles::new(0.1, 0.2, 0.3),
            Vector3::new(5.0, 6.0, 7.0),
        );
        let imu = constant_imu(pose, -5_000_000, 105_000_000, 23);
        let out = undistort_frame(&frame, &imu).unwrap();
        assert_eq!(out, frame);
    }

    #[test]
    fn undistort_endpoint_translation() {
        // Platform moves +1 m in x over the frame; a point measured at t_e at
        // the (then) origin sits at (1, 0, 0) in the frame-start coordinates.
        let t_e = 100_000_000;
        let frame = PointCloudFrame::new(
            vec![LidarPoint {
                position: Vector3::zeros(),
                reflectivity: 1.0,
                t: ts(t_e),
            }],
            ts(0),
            ts(t_e),
        )
        .unwrap();
        let imu: Vec<ImuSample> = (0..=10)
            .map(|i| {
                let f = i as f64 / 10.0;
                ImuSample {
                    t: ts((t_e as f64 * f) as i64),
                    pose: RigidTransform::from_translation(Vector3::new(f, 0.0, 0.0)),
                }
            })
            .collect();
        let out = undistort_frame(&frame, &imu).unwrap();
        let p = out.points[0].position;
        assert_relative_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn undistort_reports_interior_gap() {
        let frame = PointCloudFrame::new(
            vec![LidarPoint {
                position: Vector3::new(1.0, 0.0, 0.0),
                reflectivity: 1.0,
                t: ts(50_000_000),
            }],
            ts(0),
            ts(100_000_000),
        )
        .unwrap();
        // 5 ms cadence with a 40 ms hole inside the frame.
        let mut imu = Vec::new();
        for i in 0..=6 {
            imu.push(ImuSample {
                t: ts(-5_000_000 + i * 5_000_000),
                pose: RigidTransform::from_translation(Vector3::new(i as f64 * 0.01, 0.0, 0.0)),
            });
        }
        for i in 0..=12 {
            imu.push(ImuSample {
                t: ts(65_000_000 + i * 5_000_000),
                pose: RigidTransform::from_translation(Vector3::new(1.0 + i as f64 * 0.01, 0.0, 0.0)),
            });
        }
        let err = undistort_frame(&frame, &imu).unwrap_err();
        match err {
            Error::ImuCoverageGap {
                gap_start, gap_end, ..
            } => {
                assert_eq!(gap_start, 25_000_000);
                assert_eq!(gap_end, 65_000_000);
            }
            other => panic!("expected coverage gap, got {other:?}"),
        }
    }

    #[test]
    fn undistort_requires_bracketing_samples() {
        let frame = PointCloudFrame::new(vec![], ts(0), ts(100_000_000)).unwrap();
        let imu = constant_imu(RigidTransform::identity(), 10_000_000, 50_000_000, 9);
        assert!(matches!(
            undistort_frame(&frame, &imu),
            Err(Error::ImuCoverageGap { .. })
        ));
    }

    #[test]
    fn undistort_invariant_under_world_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points: Vec<LidarPoint> = (0..200)
            .map(|i| LidarPoint {
                position: Vector3::new(
                    rng.random_range(2.0..30.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-2.0..5.0),
                ),
                reflectivity: 50.0,
                t: ts(i * 500_000),
            })
            .collect();
        let frame = PointCloudFrame::new(points, ts(0), ts(100_000_000)).unwrap();
        let imu: Vec<ImuSample> = (0..=21)
            .map(|i| {
                let s = i as f64 * 0.005;
                ImuSample {
                    t: ts(i * 5_000_000),
                    pose: RigidTransform::from_euler(
                        EulerAngles::new(0.0, 0.0, 0.2 * s),
                        Vector3::new(2.0 * s, 0.0, 0.0),
                    ),
                }
            })
            .collect();
        let relabel = RigidTransform::from_euler(
            EulerAngles::new(0.4, -0.2, 1.1),
            Vector3::new(100.0, -50.0, 3.0),
        );
        let relabeled: Vec<ImuSample> = imu
            .iter()
            .map(|s| ImuSample {
                t: s.t,
                pose: relabel.compose(&s.pose),
            })
            .collect();
        let a = undistort_frame(&frame, &imu).unwrap();
        let b = undistort_frame(&frame, &relabeled).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_relative_eq!((pa.position - pb.position).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn render_empty_cloud_is_all_zero() {
        let frame = PointCloudFrame::new(vec![], ts(0), ts(1)).unwrap();
        let (d, r) = render_depth_images(&frame, &test_intrinsics(), &RigidTransform::identity());
        assert_eq!(d.count_nonzero(), 0);
        assert_eq!(r.count_nonzero(), 0);
    }

    #[test]
    fn render_principal_point() {
        // Camera frame: z forward, so a point on the optical axis lands on
        // the principal point.
        let frame = PointCloudFrame::new(
            vec![LidarPoint {
                position: Vector3::new(0.0, 0.0, 10.0),
                reflectivity: 100.0,
                t: ts(0),
            }],
            ts(0),
            ts(1),
        )
        .unwrap();
        let k = test_intrinsics();
        let (d, r) = render_depth_images(&frame, &k, &RigidTransform::identity());
        assert_eq!(d.get(760, 284), 10.0);
        assert_eq!(r.get(760, 284), 100.0);
        assert_eq!(d.count_nonzero(), 1);
        assert_eq!(r.count_nonzero(), 1);
    }

    #[test]
    fn render_zbuffer_keeps_nearest() {
        let mk = |z: f64, refl: f32| LidarPoint {
            position: Vector3::new(0.0, 0.0, z),
            reflectivity: refl,
            t: ts(0),
        };
        let frame = PointCloudFrame::new(vec![mk(8.0, 20.0), mk(5.0, 90.0)], ts(0), ts(1)).unwrap();
        let k = test_intrinsics();
        let (d, r) = render_depth_images(&frame, &k, &RigidTransform::identity());
        assert_eq!(d.get(760, 284), 5.0);
        assert_eq!(r.get(760, 284), 90.0);
    }

    #[test]
    fn render_matches_bruteforce_zbuffer() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = CameraIntrinsics::new(300.0, 320.0, 160.0, 120.0, 320, 240).unwrap();
        let points: Vec<LidarPoint> = (0..20_000)
            .map(|_| LidarPoint {
                position: Vector3::new(
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-2.0..40.0),
                ),
                reflectivity: rng.random_range(1.0..255.0),
                t: ts(0),
            })
            .collect();
        let frame = PointCloudFrame::new(points, ts(0), ts(1)).unwrap();
        let pose = RigidTransform::from_euler(
            EulerAngles::new(0.02, -0.01, 0.05),
            Vector3::new(0.1, -0.05, 0.0),
        );
        let (d, r) = render_depth_images(&frame, &k, &pose);

        // Brute force: scan every point per pixel.
        let mut bd = RasterImage::zeros(k.width, k.height);
        let mut br = RasterImage::zeros(k.width, k.height);
        for p in &frame.points {
            if let Some(proj) = project_point(&k, &pose, &p.position) {
                let (u, v) = (proj.u.round(), proj.v.round());
                if u >= 0.0 && u < k.width as f64 && v >= 0.0 && v < k.height as f64 {
                    let (u, v) = (u as u32, v as u32);
                    let z = proj.depth as f32;
                    if bd.get(u, v) == 0.0 || z < bd.get(u, v) {
                        bd.set(u, v, z);
                        br.set(u, v, p.reflectivity);
                    }
                }
            }
        }
        assert_eq!(d, bd);
        assert_eq!(r, br);
    }

    #[test]
    fn depth_and_reflectivity_rasters_are_congruent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = CameraIntrinsics::new(200.0, 200.0, 80.0, 60.0, 160, 120).unwrap();
        let points: Vec<LidarPoint> = (0..5000)
            .map(|_| LidarPoint {
                position: Vector3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(0.5..30.0),
                ),
                // reflectivity of a real return is kept off zero so that 0
                // stays reserved for "no return" in both rasters
                reflectivity: rng.random_range(1.0..255.0),
                t: ts(0),
            })
            .collect();
        let frame = PointCloudFrame::new(points, ts(0), ts(1)).unwrap();
        let (d, r) = render_depth_images(&frame, &k, &RigidTransform::identity());
        for (dv, rv) in d.data().iter().zip(r.data()) {
            assert_eq!(*dv != 0.0, *rv != 0.0);
        }
    }

    #[test]
    fn classify_cases() {
        assert_eq!(classify_keypoint_depth(50.0, 130.0).unwrap(), DepthClass::Close);
        assert_eq!(classify_keypoint_depth(0.0, 130.0).unwrap(), DepthClass::NoDepth);
        assert_eq!(classify_keypoint_depth(200.0, 130.0).unwrap(), DepthClass::Far);
        assert_eq!(classify_keypoint_depth(130.0, 130.0).unwrap(), DepthClass::Close);
        assert!(matches!(
            classify_keypoint_depth(-1.0, 130.0),
            Err(Error::NegativeDepth(_))
        ));
    }

    #[test]
    fn accumulate_concatenates() {
        let f1 = PointCloudFrame::new(
            vec![LidarPoint {
                position: Vector3::new(1.0, 0.0, 0.0),
                reflectivity: 1.0,
                t: ts(5),
            }],
            ts(0),
            ts(10),
        )
        .unwrap();
        let f2 = PointCloudFrame::new(
            vec![
                LidarPoint {
                    position: Vector3::new(2.0, 0.0, 0.0),
                    reflectivity: 2.0,
                    t: ts(15),
                },
                LidarPoint {
                    position: Vector3::new(3.0, 0.0, 0.0),
                    reflectivity: 3.0,
                    t: ts(18),
                },
            ],
            ts(10),
            ts(20),
        )
        .unwrap();
        let single = accumulate_frames(std::slice::from_ref(&f1)).unwrap();
        assert_eq!(single, f1);
        let acc = accumulate_frames(&[f1, f2]).unwrap();
        assert_eq!(acc.len(), 3);
        assert_eq!(acc.t_s, ts(0));
        assert_eq!(acc.t_e, ts(20));
        assert!(matches!(
            accumulate_frames(&[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn trigger_period_validation() {
        let frame = PointCloudFrame::new(vec![], ts(0), ts(100_000_000)).unwrap();
        assert!(frame.validate_trigger_period(0.1, 0.01).is_ok());
        let long = PointCloudFrame::new(vec![], ts(0), ts(200_000_000)).unwrap();
        assert!(long.validate_trigger_period(0.1, 0.01).is_err());
    }
}
