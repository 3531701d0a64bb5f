//! Automatic targetless extrinsic calibration.
//!
//! Camera edges are matched against lidar edges rendered through a candidate
//! extrinsic. The cost is the mean pixel distance between matched edge
//! points plus a penalty proportional to the unmatched fraction, which keeps
//! a pose that aligns only a handful of points from scoring better than the
//! true one. Coordinate descent over (roll, pitch, yaw) minimizes the cost
//! with a golden-section line search per axis; each candidate pose re-renders
//! the lidar rasters and re-extracts edges so occlusion effects stay honest.

mod knn;

pub use knn::{brute_force_knn, Neighbor, NearestNeighborIndex};

use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::{Arc, RwLock};

use nalgebra::Vector3;

use crate::edgemap::{extract_lidar_edges, EdgeMap, EdgePipelineConfig};
use crate::exec;
use crate::geometry::{
    unproject_pixel, CameraIntrinsics, EulerAngles, RigidTransform, Timestamp,
};
use crate::preprocessing::{render_depth_images, ImuSample, PointCloudFrame};
use crate::raster::{RasterImage, RgbImage};
use crate::{Error, Result};

/// Default weight of the unmatched-fraction penalty term.
pub const DEFAULT_MISMATCH_WEIGHT: f64 = 10.0;

/// Default nearest-neighbour count per matched camera edge pixel.
pub const DEFAULT_NEIGHBOR_COUNT: usize = 5;

/// Default match-distance gate in pixels at the reference resolution.
pub const DEFAULT_MAX_MATCH_DISTANCE: f64 = 30.0;

/// Default margin a candidate cost must beat the current cost by.
pub const DEFAULT_UPDATE_MARGIN: f64 = 0.05;

/// A calibration result: the lidar-to-camera extrinsic with its cost and
/// provenance.
#[derive(Debug, Clone)]
pub struct CalibParams {
    pub extrinsic: RigidTransform,
    /// Per-point average cost; comparable across scenes.
    pub cost: f64,
    pub scene_id: String,
    pub t: Timestamp,
}

/// Matching and descent parameters.
#[derive(Debug, Clone, Copy)]
pub struct MatchConfig {
    /// Weight `b` of the unmatched-fraction term.
    pub mismatch_weight: f64,
    /// Number of nearest lidar neighbours `m` averaged per matched pixel.
    pub neighbor_count: usize,
    /// A camera edge pixel is matched when its nearest lidar edge pixel lies
    /// within this many pixels.
    pub max_match_distance: f64,
    /// Maximum coordinate-descent cycles over the three rotation axes.
    pub max_cycles: usize,
    /// Half-width of the first line-search window per axis, radians.
    pub initial_window_rad: f64,
    /// Uniform coarse-scan intervals per line search (step size = window /
    /// (nodes/2)).
    pub coarse_nodes: usize,
    /// Golden-section refinement evaluations per line search.
    pub line_search_evals: usize,
    /// Stop when a full cycle improves the cost by less than this.
    pub cost_tolerance: f64,
    /// Descend (tx, ty, tz) after the rotation phase.
    pub optimize_translation: bool,
    /// Half-width of the translation line-search window, meters.
    pub translation_window_m: f64,
    /// Reproject cached lidar edge points instead of re-rendering rasters
    /// per candidate (faster, ignores occlusion changes).
    pub fast_reproject: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            mismatch_weight: DEFAULT_MISMATCH_WEIGHT,
            neighbor_count: DEFAULT_NEIGHBOR_COUNT,
            max_match_distance: DEFAULT_MAX_MATCH_DISTANCE,
            max_cycles: 8,
            initial_window_rad: 2.0_f64.to_radians(),
            coarse_nodes: 8,
            line_search_evals: 6,
            cost_tolerance: 1e-3,
            optimize_translation: false,
            translation_window_m: 0.05,
            fast_reproject: false,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mismatch_weight <= 0.0 {
            return Err(Error::Invalid("mismatch weight must be positive".into()));
        }
        if self.neighbor_count == 0 {
            return Err(Error::Invalid("neighbor count must be at least 1".into()));
        }
        if self.max_match_distance <= 0.0 {
            return Err(Error::Invalid("match distance gate must be positive".into()));
        }
        if self.line_search_evals < 4 {
            return Err(Error::Invalid("line search needs at least 4 evaluations".into()));
        }
        if self.coarse_nodes < 2 {
            return Err(Error::Invalid("coarse scan needs at least 2 intervals".into()));
        }
        Ok(())
    }
}

/// The default match-distance gate scaled to another resolution in
/// proportion to the image diagonal.
pub fn scaled_max_match_distance(width: u32, height: u32) -> f64 {
    let (rw, rh) = crate::edgemap::REFERENCE_RESOLUTION;
    let ref_diag = ((rw as f64).powi(2) + (rh as f64).powi(2)).sqrt();
    let diag = ((width as f64).powi(2) + (height as f64).powi(2)).sqrt();
    DEFAULT_MAX_MATCH_DISTANCE * diag / ref_diag
}

/// Builds the nearest-neighbour index over a lidar edge map.
pub fn build_index(lidar_edges: &EdgeMap) -> Result<NearestNeighborIndex> {
    NearestNeighborIndex::build(lidar_edges)
}

/// Cost value with its matching diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub cost: f64,
    /// Camera edge pixels whose nearest lidar edge pixel lies within the gate.
    pub matched: usize,
    /// All camera edge pixels.
    pub total: usize,
}

/// Evaluates the edge-matching cost of camera edges against indexed lidar
/// edges:
///
/// `cost = Σ_matched Σ_k distance / (n · m) + b · (N − n) / N`
///
/// where `n` of the `N` camera edge pixels have their nearest lidar pixel
/// within the distance gate and the inner sum runs over each matched pixel's
/// `m` nearest lidar pixels (`m` is clamped to the index size). With no
/// matches the cost is exactly `b`.
pub fn evaluate_cost(
    camera_edges: &EdgeMap,
    index: &NearestNeighborIndex,
    cfg: &MatchConfig,
) -> Result<CostBreakdown> {
    let pixels: Vec<(u32, u32)> = camera_edges.pixels().collect();
    if pixels.is_empty() {
        return Err(Error::EmptyEdgeMap);
    }
    let m = cfg.neighbor_count.min(index.len());
    let per_pixel = exec::map_ordered(&pixels, |&(u, v)| {
        let q = [u as f64, v as f64];
        let neighbors = index.knn(q, m);
        if neighbors[0].distance() <= cfg.max_match_distance {
            Some(neighbors.iter().map(|n| n.distance()).sum::<f64>())
        } else {
            None
        }
    });

    let total = pixels.len();
    let mut matched = 0usize;
    let mut distance_sum = 0.0;
    for sum in per_pixel.into_iter().flatten() {
        matched += 1;
        distance_sum += sum;
    }
    let cost = if matched == 0 {
        cfg.mismatch_weight
    } else {
        distance_sum / (matched as f64 * m as f64)
            + cfg.mismatch_weight * (total - matched) as f64 / total as f64
    };
    if !cost.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    Ok(CostBreakdown {
        cost,
        matched,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DescentAxis {
    Roll,
    Pitch,
    Yaw,
    Tx,
    Ty,
    Tz,
}

/// Applies a single-axis delta to the extrinsic. Rotation deltas act in the
/// camera frame about the optical center, so the camera position is
/// unchanged; translation deltas shift the camera-frame offset directly.
fn apply_axis_delta(t: &RigidTransform, axis: DescentAxis, delta: f64) -> RigidTransform {
    match axis {
        DescentAxis::Roll | DescentAxis::Pitch | DescentAxis::Yaw => {
            let angles = match axis {
                DescentAxis::Roll => EulerAngles::new(delta, 0.0, 0.0),
                DescentAxis::Pitch => EulerAngles::new(0.0, delta, 0.0),
                _ => EulerAngles::new(0.0, 0.0, delta),
            };
            let d = angles.to_rotation();
            RigidTransform::from_parts(d * t.rotation(), d * t.translation())
        }
        DescentAxis::Tx | DescentAxis::Ty | DescentAxis::Tz => {
            let shift = match axis {
                DescentAxis::Tx => Vector3::new(delta, 0.0, 0.0),
                DescentAxis::Ty => Vector3::new(0.0, delta, 0.0),
                _ => Vector3::new(0.0, 0.0, delta),
            };
            RigidTransform::from_parts(*t.rotation(), t.translation() + shift)
        }
    }
}

/// Bounded 1-D minimization: a uniform coarse scan over `[-half, half]`
/// followed by golden-section refinement around the best node.
///
/// The matching cost is flat wherever the pose is off by more than the
/// match-distance gate, with a narrow basin around alignment; plain
/// golden-section stalls on that plateau, so the coarse scan locates the
/// basin first. `current_cost` is the known value at delta 0. Returns the
/// best sampled `(delta, cost)`.
fn line_search_min<F>(
    mut f: F,
    current_cost: f64,
    half: f64,
    coarse_nodes: usize,
    golden_evals: usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let spacing = 2.0 * half / coarse_nodes as f64;
    let (mut best_x, mut best_f) = (0.0, current_cost);
    for j in 0..=coarse_nodes {
        let x = -half + j as f64 * spacing;
        if x == 0.0 {
            continue;
        }
        let fx = f(x)?;
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
    }
    let lo = (best_x - spacing).max(-half);
    let hi = (best_x + spacing).min(half);
    let (gx, gf) = golden_section_min(&mut f, lo, hi, golden_evals)?;
    if gf < best_f {
        Ok((gx, gf))
    } else {
        Ok((best_x, best_f))
    }
}

/// Golden-section search for the minimum of `f` on `[a, b]` with a fixed
/// evaluation budget. Returns the best sampled point.
fn golden_section_min<F>(mut f: F, a: f64, b: f64, evals: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let (mut best_x, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 2..evals {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
            if f1 < best_f {
                best_x = x1;
                best_f = f1;
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
            if f2 < best_f {
                best_x = x2;
                best_f = f2;
            }
        }
    }
    Ok((best_x, best_f))
}

/// Evaluates candidate extrinsics by rendering the lidar cloud and matching
/// edges; optionally through the cached-reprojection shortcut.
struct CostEvaluator<'a> {
    camera_edges: &'a EdgeMap,
    cloud: &'a PointCloudFrame,
    intrinsics: &'a CameraIntrinsics,
    match_cfg: &'a MatchConfig,
    edge_cfg: &'a EdgePipelineConfig,
    /// Lidar-frame positions of the edge pixels extracted at the reference
    /// pose; present only in fast-reprojection mode.
    cached_edge_points: Option<Vec<Vector3<f64>>>,
}

impl<'a> CostEvaluator<'a> {
    fn lidar_edges_at(&self, extrinsic: &RigidTransform) -> Result<(EdgeMap, RasterImage)> {
        let (depth, refl) = render_depth_images(self.cloud, self.intrinsics, extrinsic);
        let edges = extract_lidar_edges(&depth, &refl, self.edge_cfg)?;
        Ok((edges, depth))
    }

    fn cost_at(&self, extrinsic: &RigidTransform) -> Result<f64> {
        if let Some(points) = &self.cached_edge_points {
            let projected: Vec<[f64; 2]> = points
                .iter()
                .filter_map(|p| {
                    crate::geometry::project_point(self.intrinsics, extrinsic, p)
                        .filter(|proj| proj.in_view)
                        .map(|proj| [proj.u.round(), proj.v.round()])
                })
                .collect();
            let index = NearestNeighborIndex::from_points(projected)
                .map_err(|_| Error::InsufficientStructure("no lidar edge points project into view".into()))?;
            return Ok(evaluate_cost(self.camera_edges, &index, self.match_cfg)?.cost);
        }
        let (edges, _) = self.lidar_edges_at(extrinsic)?;
        let index = NearestNeighborIndex::build(&edges).map_err(|_| {
            Error::InsufficientStructure("no lidar edge segments at candidate pose".into())
        })?;
        Ok(evaluate_cost(self.camera_edges, &index, self.match_cfg)?.cost)
    }
}

/// Minimizes the edge-matching cost by cyclic coordinate descent over
/// (roll, pitch, yaw), starting from `t_init`.
///
/// Each axis runs a golden-section line search over a window that halves
/// after every full cycle; the descent stops when a cycle improves the cost
/// by less than the configured tolerance. The returned cost is never above
/// the cost at `t_init`. Requires an accumulated stationary cloud and an
/// initial guess within a few degrees of the truth.
pub fn optimize_extrinsic(
    camera_edges: &EdgeMap,
    lidar_cloud: &PointCloudFrame,
    intrinsics: &CameraIntrinsics,
    t_init: &RigidTransform,
    match_cfg: &MatchConfig,
    edge_cfg: &EdgePipelineConfig,
    scene_id: &str,
) -> Result<CalibParams> {
    match_cfg.validate()?;
    if camera_edges.pixel_count() == 0 {
        return Err(Error::InsufficientStructure(
            "camera edge map is empty".into(),
        ));
    }
    if lidar_cloud.is_empty() {
        return Err(Error::InsufficientStructure("lidar cloud is empty".into()));
    }

    let mut evaluator = CostEvaluator {
        camera_edges,
        cloud: lidar_cloud,
        intrinsics,
        match_cfg,
        edge_cfg,
        cached_edge_points: None,
    };

    // Reference extraction at the initial pose; doubles as the structure
    // check and optionally seeds the fast-reprojection cache.
    let (initial_edges, initial_depth) = evaluator.lidar_edges_at(t_init)?;
    if initial_edges.segments().is_empty() {
        return Err(Error::InsufficientStructure(
            "no lidar edge segments survive filtering at the initial pose".into(),
        ));
    }
    if match_cfg.fast_reproject {
        let cam_from_lidar_inv = t_init.inverse();
        let points: Vec<Vector3<f64>> = initial_edges
            .pixels()
            .filter_map(|(u, v)| {
                let z = initial_depth.get(u, v);
                if z > 0.0 {
                    let cam_point = unproject_pixel(intrinsics, u as f64, v as f64, z as f64);
                    Some(cam_from_lidar_inv.apply(&cam_point))
                } else {
                    None
                }
            })
            .collect();
        if points.is_empty() {
            return Err(Error::InsufficientStructure(
                "no depth-backed lidar edge pixels to cache".into(),
            ));
        }
        evaluator.cached_edge_points = Some(points);
    }

    let mut current = *t_init;
    let mut current_cost = evaluator.cost_at(&current)?;
    let mut window = match_cfg.initial_window_rad;
    let mut translation_window = match_cfg.translation_window_m;

    for _cycle in 0..match_cfg.max_cycles {
        let cycle_start_cost = current_cost;
        let mut axes = vec![DescentAxis::Roll, DescentAxis::Pitch, DescentAxis::Yaw];
        if match_cfg.optimize_translation {
            axes.extend([DescentAxis::Tx, DescentAxis::Ty, DescentAxis::Tz]);
        }
        for axis in axes {
            let half = match axis {
                DescentAxis::Roll | DescentAxis::Pitch | DescentAxis::Yaw => window,
                _ => translation_window,
            };
            let (best_delta, best_cost) = line_search_min(
                |delta| evaluator.cost_at(&apply_axis_delta(&current, axis, delta)),
                current_cost,
                half,
                match_cfg.coarse_nodes,
                match_cfg.line_search_evals,
            )?;
            if best_cost < current_cost {
                current = apply_axis_delta(&current, axis, best_delta);
                current_cost = best_cost;
            }
        }
        let improvement = cycle_start_cost - current_cost;
        window *= 0.5;
        translation_window *= 0.5;
        if improvement < match_cfg.cost_tolerance {
            break;
        }
    }

    if !current_cost.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    Ok(CalibParams {
        extrinsic: current,
        cost: current_cost,
        scene_id: scene_id.to_string(),
        t: lidar_cloud.t_s,
    })
}

/// Outcome of comparing a candidate calibration against the current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateDecision {
    Accept,
    Reject,
}

/// Accepts the candidate only on a strict cost improvement beyond `margin`.
pub fn decide_update(current: &CalibParams, candidate: &CalibParams, margin: f64) -> UpdateDecision {
    debug_assert!(current.cost.is_finite() && candidate.cost.is_finite());
    if candidate.cost < current.cost - margin {
        UpdateDecision::Accept
    } else {
        UpdateDecision::Reject
    }
}

/// Platform motion state over an IMU window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Stationary,
    Moving,
}

/// Default stationary-detection window in nanoseconds (1 s).
pub const DEFAULT_STATIONARY_WINDOW_NS: i64 = 1_000_000_000;

/// Default stationary rotation tolerance (0.1 degrees).
pub fn default_stationary_ang_tol() -> f64 {
    0.1_f64.to_radians()
}

/// Default stationary translation tolerance (5 mm).
pub const DEFAULT_STATIONARY_TRANS_TOL_M: f64 = 0.005;

/// Checks whether the trailing `window_ns` of the IMU stream stays within
/// the rotation and translation tolerances of the window's first pose.
pub fn detect_stationary(
    imu: &[ImuSample],
    window_ns: i64,
    ang_tol_rad: f64,
    trans_tol_m: f64,
) -> Result<Motion> {
    if imu.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 2 IMU samples, got {}",
            imu.len()
        )));
    }
    let t_end = imu.last().unwrap().t.nanos();
    let t_start = t_end - window_ns;
    if imu[0].t.nanos() > t_start {
        return Err(Error::InsufficientSamples(format!(
            "stream spans {} ns, window needs {} ns",
            t_end - imu[0].t.nanos(),
            window_ns
        )));
    }
    let in_window: Vec<&ImuSample> = imu.iter().filter(|s| s.t.nanos() >= t_start).collect();
    if in_window.len() < 2 {
        return Err(Error::InsufficientSamples(
            "fewer than 2 IMU samples inside the window".into(),
        ));
    }
    let reference = in_window[0].pose.inverse();
    for sample in &in_window[1..] {
        let delta = reference.compose(&sample.pose);
        if delta.rotation_angle() >= ang_tol_rad || delta.translation_norm() >= trans_tol_m {
            return Ok(Motion::Moving);
        }
    }
    Ok(Motion::Stationary)
}

/// The published extrinsic parameter cell shared between the preprocessing
/// consumer and the calibration producer.
///
/// Readers take cheap atomic snapshots; `try_update` swaps the whole value
/// in one step so no reader ever observes a torn transform. At most one
/// calibration run may hold the in-flight guard at a time.
pub struct ExtrinsicCell {
    params: RwLock<Arc<CalibParams>>,
    calibrating: AtomicBool,
}

impl ExtrinsicCell {
    pub fn new(initial: CalibParams) -> Self {
        ExtrinsicCell {
            params: RwLock::new(Arc::new(initial)),
            calibrating: AtomicBool::new(false),
        }
    }

    /// Snapshot of the currently published parameters.
    pub fn load(&self) -> Arc<CalibParams> {
        self.params.read().unwrap().clone()
    }

    /// Applies [`decide_update`] and atomically publishes the candidate on
    /// acceptance.
    pub fn try_update(&self, candidate: CalibParams, margin: f64) -> UpdateDecision {
        let mut slot = self.params.write().unwrap();
        let decision = decide_update(&slot, &candidate, margin);
        if decision == UpdateDecision::Accept {
            *slot = Arc::new(candidate);
        }
        decision
    }

    /// Claims the single calibration-in-flight slot; returns `None` when a
    /// run is already active (the caller should log and skip the trigger).
    pub fn begin_calibration(&self) -> Option<CalibrationGuard<'_>> {
        if self
            .calibrating
            .compare_exchange(false, true, AtomicOrdering::AcqRel, AtomicOrdering::Acquire)
            .is_ok()
        {
            Some(CalibrationGuard { cell: self })
        } else {
            None
        }
    }
}

/// RAII guard for the single in-flight calibration slot.
pub struct CalibrationGuard<'a> {
    cell: &'a ExtrinsicCell,
}

impl Drop for CalibrationGuard<'_> {
    fn drop(&mut self) {
        self.cell.calibrating.store(false, AtomicOrdering::Release);
    }
}

/// Renders the match overlay: camera edges in orange, lidar edges in blue,
/// and a red link from every matched camera pixel to its nearest lidar pixel.
pub fn render_match_overlay(
    background: &RasterImage,
    camera_edges: &EdgeMap,
    lidar_edges: &EdgeMap,
    cfg: &MatchConfig,
) -> Result<RgbImage> {
    const CAMERA_COLOR: [u8; 3] = [255, 140, 0];
    const LIDAR_COLOR: [u8; 3] = [0, 120, 255];
    const LINK_COLOR: [u8; 3] = [220, 0, 0];

    let mut img = RgbImage::from_gray(background);
    let index = NearestNeighborIndex::build(lidar_edges)?;
    let lidar_pixels: Vec<(u32, u32)> = lidar_edges.pixels().collect();
    for (u, v) in camera_edges.pixels() {
        let nearest = index.nearest([u as f64, v as f64]);
        if nearest.distance() <= cfg.max_match_distance {
            let (lu, lv) = lidar_pixels[nearest.index];
            img.draw_line((u, v), (lu, lv), LINK_COLOR);
        }
    }
    for (u, v) in lidar_edges.pixels() {
        img.set(u, v, LIDAR_COLOR);
    }
    for (u, v) in camera_edges.pixels() {
        img.set(u, v, CAMERA_COLOR);
    }
    Ok(img)
}
