//! Edge extraction and filtering for cross-modal matching.
//!
//! Grayscale, depth and reflectivity rasters are equalized, run through a
//! Canny detector and linked into 8-connected pixel chains. Two filters keep
//! only edges worth matching: a minimum segment length (short fragments carry
//! little structure) and a clutter rule that drops segments buried in dense
//! texture. Depth and reflectivity edges are merged into a single lidar edge
//! map before filtering.

mod canny;

use std::collections::BTreeSet;

use crate::raster::{close_3x3, RasterImage};
use crate::{Error, Result};

/// Origin modality of an edge map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSource {
    Camera,
    Lidar,
}

/// An ordered chain of 8-connected edge pixels `(u, v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSegment {
    pixels: Vec<(u32, u32)>,
}

impl EdgeSegment {
    /// Builds a segment, rejecting empty chains and breaks in 8-connectivity.
    pub fn new(pixels: Vec<(u32, u32)>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::Invalid("edge segment must hold at least one pixel".into()));
        }
        for pair in pixels.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let du = (a.0 as i64 - b.0 as i64).abs();
            let dv = (a.1 as i64 - b.1 as i64).abs();
            if du > 1 || dv > 1 || (du == 0 && dv == 0) {
                return Err(Error::Invalid(format!(
                    "pixels {a:?} and {b:?} are not 8-connected neighbours"
                )));
            }
        }
        Ok(EdgeSegment { pixels })
    }

    pub fn pixels(&self) -> &[(u32, u32)] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// A set of disjoint edge segments over one raster.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    segments: Vec<EdgeSegment>,
    pub source: EdgeSource,
    width: u32,
    height: u32,
}

impl EdgeMap {
    pub fn new(
        segments: Vec<EdgeSegment>,
        source: EdgeSource,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for seg in &segments {
            for &(u, v) in seg.pixels() {
                if u >= width || v >= height {
                    return Err(Error::Invalid(format!(
                        "edge pixel ({u}, {v}) outside {width}x{height}"
                    )));
                }
                if !seen.insert((u, v)) {
                    return Err(Error::Invalid(format!(
                        "edge pixel ({u}, {v}) appears in more than one segment"
                    )));
                }
            }
        }
        Ok(EdgeMap {
            segments,
            source,
            width,
            height,
        })
    }

    pub fn empty(source: EdgeSource, width: u32, height: u32) -> Self {
        EdgeMap {
            segments: Vec::new(),
            source,
            width,
            height,
        }
    }

    /// Links an arbitrary pixel set into 8-connected chains.
    pub fn from_pixels<I>(pixels: I, source: EdgeSource, width: u32, height: u32) -> Self
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut mask = vec![false; width as usize * height as usize];
        for (u, v) in pixels {
            if u < width && v < height {
                mask[v as usize * width as usize + u as usize] = true;
            }
        }
        let segments = link_chains(&mask, width, height);
        EdgeMap {
            segments,
            source,
            width,
            height,
        }
    }

    pub fn segments(&self) -> &[EdgeSegment] {
        &self.segments
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.segments.iter().map(|s| s.len()).sum()
    }

    /// All edge pixels in segment order; this order defines the pixel index
    /// used by the nearest-neighbour index.
    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.segments.iter().flat_map(|s| s.pixels().iter().copied())
    }

    pub fn pixel_set(&self) -> BTreeSet<(u32, u32)> {
        self.pixels().collect()
    }
}

/// Orders a boolean edge mask into 8-connected chains.
///
/// Chains start at endpoints (pixels with at most one unvisited neighbour)
/// in scan order and walk greedily to the first unvisited neighbour; loops
/// are walked from their scan-order first pixel. The result is deterministic
/// and each pixel lands in exactly one chain.
fn link_chains(mask: &[bool], width: u32, height: u32) -> Vec<EdgeSegment> {
    const NEIGHBOURS: [(i64, i64); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (-1, -1),
        (1, -1),
        (-1, 1),
    ];
    let (w, h) = (width as i64, height as i64);
    let at = |u: i64, v: i64| (v * w + u) as usize;
    let mut visited = vec![false; mask.len()];
    let mut segments = Vec::new();

    let unvisited_degree = |u: i64, v: i64, visited: &[bool]| {
        NEIGHBOURS
            .iter()
            .filter(|(du, dv)| {
                let (nu, nv) = (u + du, v + dv);
                nu >= 0 && nv >= 0 && nu < w && nv < h && mask[at(nu, nv)] && !visited[at(nu, nv)]
            })
            .count()
    };

    let walk = |start: (i64, i64), visited: &mut Vec<bool>| {
        let mut chain = vec![(start.0 as u32, start.1 as u32)];
        visited[at(start.0, start.1)] = true;
        let (mut cu, mut cv) = start;
        loop {
            // Prefer the neighbour that continues with fewest onward options
            // (endpoint-like), falling back to fixed order; this keeps thin
            // chains from short-circuiting across diagonals.
            let mut next = None;
            for (du, dv) in NEIGHBOURS {
                let (nu, nv) = (cu + du, cv + dv);
                if nu >= 0 && nv >= 0 && nu < w && nv < h && mask[at(nu, nv)] && !visited[at(nu, nv)]
                {
                    next = Some((nu, nv));
                    break;
                }
            }
            match next {
                Some((nu, nv)) => {
                    visited[at(nu, nv)] = true;
                    chain.push((nu as u32, nv as u32));
                    (cu, cv) = (nu, nv);
                }
                None => break,
            }
        }
        chain
    };

    // Endpoint-seeded chains first.
    for v in 0..h {
        for u in 0..w {
            if mask[at(u, v)] && !visited[at(u, v)] && unvisited_degree(u, v, &visited) <= 1 {
                segments.push(EdgeSegment {
                    pixels: walk((u, v), &mut visited),
                });
            }
        }
    }
    // Remaining pixels belong to loops.
    for v in 0..h {
        for u in 0..w {
            if mask[at(u, v)] && !visited[at(u, v)] {
                segments.push(EdgeSegment {
                    pixels: walk((u, v), &mut visited),
                });
            }
        }
    }
    segments
}

/// Histogram equalization over the nonzero pixels.
///
/// Zero pixels encode "no data" in lidar rasters and stay zero; nonzero
/// values are remapped by the discrete CDF onto `[1, 255]`. An all-zero
/// raster is returned unchanged.
pub fn equalize_histogram(img: &RasterImage) -> RasterImage {
    let nonzero_count = img.count_nonzero();
    if nonzero_count == 0 {
        return img.clone();
    }
    let max = img.max_value();
    let bin_of = |v: f32| ((v / max * 255.0).round() as i64).clamp(0, 255) as usize;

    let mut histogram = [0u64; 256];
    for &v in img.data() {
        if v != 0.0 {
            histogram[bin_of(v)] += 1;
        }
    }
    let mut cdf = [0u64; 256];
    let mut running = 0;
    for (i, &count) in histogram.iter().enumerate() {
        running += count;
        cdf[i] = running;
    }

    let mut out = RasterImage::zeros(img.width(), img.height());
    for (o, &v) in out.data_mut().iter_mut().zip(img.data()) {
        if v != 0.0 {
            let level = (cdf[bin_of(v)] as f64 / nonzero_count as f64 * 255.0).round() as f32;
            *o = level.max(1.0);
        }
    }
    out
}

/// Minimum segment length in pixels at the reference resolution.
pub const DEFAULT_MIN_EDGE_LENGTH: usize = 200;

/// Reference resolution for the default minimum edge length.
pub const REFERENCE_RESOLUTION: (u32, u32) = (1520, 568);

/// Default clutter-rule radius in pixels.
pub const DEFAULT_CLUTTER_RADIUS: f64 = 10.0;

/// Default clutter-rule mean neighbour count above which a segment is dropped.
pub const DEFAULT_CLUTTER_COUNT: f64 = 20.0;

/// The default minimum segment length scaled to another resolution in
/// proportion to the image diagonal.
pub fn scaled_min_edge_length(width: u32, height: u32) -> usize {
    let diag = ((width as f64).powi(2) + (height as f64).powi(2)).sqrt();
    let (rw, rh) = REFERENCE_RESOLUTION;
    let ref_diag = ((rw as f64).powi(2) + (rh as f64).powi(2)).sqrt();
    ((DEFAULT_MIN_EDGE_LENGTH as f64 * diag / ref_diag).round() as usize).max(1)
}

/// Runs the Canny detector with explicit hysteresis thresholds and links the
/// surviving pixels into segments.
///
/// Requires `high >= low > 0`.
pub fn detect_edges(img: &RasterImage, low: f32, high: f32) -> EdgeMap {
    assert!(high >= low && low > 0.0, "thresholds must satisfy high >= low > 0");
    detect_with(img, 1.4, Some((low, high)), 0.9, 0.4, 1.0).0
}

/// Parameters for [`detect_edges_auto`].
#[derive(Debug, Clone, Copy)]
pub struct CannyParams {
    /// Gaussian pre-smoothing sigma (5x5 kernel).
    pub sigma: f32,
    /// Explicit hysteresis thresholds; when `None` they are derived from the
    /// gradient-magnitude percentile below.
    pub thresholds: Option<(f32, f32)>,
    /// Percentile of nonzero gradient magnitudes anchoring derived thresholds.
    pub magnitude_percentile: f64,
    /// Low threshold as a fraction of the anchor magnitude.
    pub low_factor: f32,
    /// High threshold as a fraction of the anchor magnitude.
    pub high_factor: f32,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            sigma: 1.4,
            thresholds: None,
            magnitude_percentile: 0.90,
            low_factor: 0.4,
            high_factor: 1.0,
        }
    }
}

/// Canny with per-image thresholds derived from the gradient-magnitude
/// distribution. Returns the edge map and the thresholds used.
pub fn detect_edges_auto(img: &RasterImage, params: &CannyParams) -> (EdgeMap, (f32, f32)) {
    detect_with(
        img,
        params.sigma,
        params.thresholds,
        params.magnitude_percentile,
        params.low_factor,
        params.high_factor,
    )
}

fn detect_with(
    img: &RasterImage,
    sigma: f32,
    thresholds: Option<(f32, f32)>,
    percentile: f64,
    low_factor: f32,
    high_factor: f32,
) -> (EdgeMap, (f32, f32)) {
    let trace = std::env::var_os("LICAM_TRACE_CANNY").is_some();
    let mut t = std::time::Instant::now();
    let mut lap = |name: &str| {
        if trace {
            eprintln!("[canny] {name}: {:?}", t.elapsed());
        }
        t = std::time::Instant::now();
    };
    let blurred = canny::gaussian_blur_5x5(img, sigma);
    lap("gauss");
    let (gx, gy) = canny::sobel_gradients(&blurred);
    lap("sobel");
    let mag = canny::gradient_magnitude(&gx, &gy);
    lap("mag");
    let (low, high) = thresholds
        .unwrap_or_else(|| canny::derive_thresholds(&mag, percentile, low_factor, high_factor));
    lap("thresholds");
    let thinned = canny::non_maximum_suppression(&mag, &gx, &gy);
    lap("nms");
    let mask = canny::hysteresis(&thinned, low, high);
    lap("hysteresis");
    let segments = link_chains(&mask, img.width(), img.height());
    lap("link");
    (
        EdgeMap {
            segments,
            source: EdgeSource::Camera,
            width: img.width(),
            height: img.height(),
        },
        (low, high),
    )
}

/// Removes short segments and clutter.
///
/// A segment is dropped when its length is below `min_length`, or when the
/// mean number of *other*-segment edge pixels within `clutter_radius` of its
/// pixels exceeds `clutter_count`. Both rules are evaluated against the
/// length-filtered survivor set and all removals apply at once, which makes
/// the operation idempotent.
pub fn filter_edges(
    edges: &EdgeMap,
    min_length: usize,
    clutter_radius: f64,
    clutter_count: f64,
) -> EdgeMap {
    let survivors: Vec<&EdgeSegment> = edges
        .segments
        .iter()
        .filter(|s| s.len() >= min_length.max(1))
        .collect();

    // Bucket grid over the survivors' pixels for radius queries.
    let cell = clutter_radius.max(1.0);
    let mut grid: std::collections::HashMap<(i64, i64), Vec<(i64, i64, usize)>> =
        std::collections::HashMap::new();
    for (seg_id, seg) in survivors.iter().enumerate() {
        for &(u, v) in seg.pixels() {
            let key = ((u as f64 / cell) as i64, (v as f64 / cell) as i64);
            grid.entry(key).or_default().push((u as i64, v as i64, seg_id));
        }
    }

    let r2 = clutter_radius * clutter_radius;
    let kept: Vec<EdgeSegment> = survivors
        .iter()
        .enumerate()
        .filter(|(seg_id, seg)| {
            let mut neighbour_total = 0usize;
            for &(u, v) in seg.pixels() {
                let (cu, cv) = ((u as f64 / cell) as i64, (v as f64 / cell) as i64);
                for gv in (cv - 1)..=(cv + 1) {
                    for gu in (cu - 1)..=(cu + 1) {
                        if let Some(bucket) = grid.get(&(gu, gv)) {
                            for &(pu, pv, pid) in bucket {
                                if pid != *seg_id {
                                    let du = pu - u as i64;
                                    let dv = pv - v as i64;
                                    if (du * du + dv * dv) as f64 <= r2 {
                                        neighbour_total += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let mean = neighbour_total as f64 / seg.len() as f64;
            mean <= clutter_count
        })
        .map(|(_, seg)| (*seg).clone())
        .collect();

    EdgeMap {
        segments: kept,
        source: edges.source,
        width: edges.width,
        height: edges.height,
    }
}

/// Union of two same-size edge maps with pixels deduplicated and chains
/// re-linked by 8-connectivity. Used to fuse depth and reflectivity edges,
/// which come from the same sensor.
pub fn merge_edge_maps(a: &EdgeMap, b: &EdgeMap) -> Result<EdgeMap> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch {
            lhs_width: a.width,
            lhs_height: a.height,
            rhs_width: b.width,
            rhs_height: b.height,
        });
    }
    let mut merged = EdgeMap::from_pixels(a.pixels().chain(b.pixels()), a.source, a.width, a.height);
    merged.source = a.source;
    Ok(merged)
}

/// Knobs for the full raster-to-edge-map pipeline.
#[derive(Debug, Clone, Copy)]
pub struct EdgePipelineConfig {
    pub canny: CannyParams,
    /// Minimum segment length; `None` scales [`DEFAULT_MIN_EDGE_LENGTH`] by
    /// the image diagonal.
    pub min_segment_length: Option<usize>,
    pub clutter_radius: f64,
    pub clutter_count: f64,
    /// Lidar rasters get a 3x3 morphological closing while their fill ratio
    /// is at or below this value; dense rasters skip it.
    pub closing_max_fill: f64,
}

impl Default for EdgePipelineConfig {
    fn default() -> Self {
        EdgePipelineConfig {
            canny: CannyParams::default(),
            min_segment_length: None,
            clutter_radius: DEFAULT_CLUTTER_RADIUS,
            clutter_count: DEFAULT_CLUTTER_COUNT,
            closing_max_fill: 0.9,
        }
    }
}

impl EdgePipelineConfig {
    pub fn min_length_for(&self, width: u32, height: u32) -> usize {
        self.min_segment_length
            .unwrap_or_else(|| scaled_min_edge_length(width, height))
    }
}

/// Camera pipeline: equalize, detect, filter.
pub fn extract_camera_edges(gray: &RasterImage, cfg: &EdgePipelineConfig) -> EdgeMap {
    let equalized = equalize_histogram(gray);
    let (mut edges, _) = detect_edges_auto(&equalized, &cfg.canny);
    edges.source = EdgeSource::Camera;
    filter_edges(
        &edges,
        cfg.min_length_for(gray.width(), gray.height()),
        cfg.clutter_radius,
        cfg.clutter_count,
    )
}

/// Lidar pipeline: per-raster closing (sparse rasters only) and equalization,
/// Canny on depth and reflectivity, merge, then filter.
pub fn extract_lidar_edges(
    depth: &RasterImage,
    reflectivity: &RasterImage,
    cfg: &EdgePipelineConfig,
) -> Result<EdgeMap> {
    depth.same_dims(reflectivity)?;
    let trace = std::env::var_os("LICAM_TRACE_CANNY").is_some();
    let mut t = std::time::Instant::now();
    let mut lap = |name: &str| {
        if trace {
            eprintln!("[lidar-edges] {name}: {:?}", t.elapsed());
        }
        t = std::time::Instant::now();
    };
    let prep = |img: &RasterImage| {
        let closed = if img.fill_ratio() <= cfg.closing_max_fill {
            close_3x3(img)
        } else {
            img.clone()
        };
        equalize_histogram(&closed)
    };
    let prepped_depth = prep(depth);
    lap("prep depth");
    let (mut depth_edges, _) = detect_edges_auto(&prepped_depth, &cfg.canny);
    depth_edges.source = EdgeSource::Lidar;
    lap("canny depth");
    let prepped_refl = prep(reflectivity);
    lap("prep refl");
    let (mut refl_edges, _) = detect_edges_auto(&prepped_refl, &cfg.canny);
    refl_edges.source = EdgeSource::Lidar;
    lap("canny refl");
    let merged = merge_edge_maps(&depth_edges, &refl_edges)?;
    lap("merge");
    let out = filter_edges(
        &merged,
        cfg.min_length_for(depth.width(), depth.height()),
        cfg.clutter_radius,
        cfg.clutter_count,
    );
    lap("filter");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_image(width: u32, height: u32, value: f32) -> RasterImage {
        RasterImage::from_data(width, height, vec![value; (width * height) as usize]).unwrap()
    }

    fn step_image(width: u32, height: u32, split: u32, left: f32, right: f32) -> RasterImage {
        let mut img = RasterImage::zeros(width, height);
        for v in 0..height {
            for u in 0..width {
                img.set(u, v, if u < split { left } else { right });
            }
        }
        img
    }

    fn horizontal_segment(y: u32, x0: u32, len: u32) -> EdgeSegment {
        EdgeSegment::new((0..len).map(|i| (x0 + i, y)).collect()).unwrap()
    }

    fn vertical_segment(x: u32, y0: u32, len: u32) -> EdgeSegment {
        EdgeSegment::new((0..len).map(|i| (x, y0 + i)).collect()).unwrap()
    }

    #[test]
    fn equalize_constant_image_stays_constant() {
        let img = constant_image(8, 8, 100.0);
        let out = equalize_histogram(&img);
        let first = out.data()[0];
        assert!(out.data().iter().all(|&v| v == first));
    }

    // Hand evaluation of the discrete CDF remap on a two-level image with
    // equal proportions: cdf(50) = N/2 -> round(0.5 * 255) = 128 and
    // cdf(200) = N -> 255.
    #[test]
    fn equalize_two_level_image() {
        let mut img = RasterImage::zeros(16, 2);
        for u in 0..16 {
            img.set(u, 0, 50.0);
            img.set(u, 1, 200.0);
        }
        let out = equalize_histogram(&img);
        for u in 0..16 {
            assert_eq!(out.get(u, 0), 128.0);
            assert_eq!(out.get(u, 1), 255.0);
        }
    }

    #[test]
    fn equalize_all_zero_unchanged() {
        let img = RasterImage::zeros(12, 9);
        assert_eq!(equalize_histogram(&img), img);
    }

    #[test]
    fn equalize_keeps_no_data_pixels_zero() {
        let mut img = RasterImage::zeros(8, 8);
        img.set(3, 3, 40.0);
        img.set(4, 4, 90.0);
        let out = equalize_histogram(&img);
        assert_eq!(out.count_nonzero(), 2);
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn detect_on_zero_image_is_empty() {
        let img = RasterImage::zeros(32, 32);
        let edges = detect_edges(&img, 10.0, 20.0);
        assert!(edges.segments().is_empty());
    }

    // The step between columns 15 and 16 puts the analytic edge locus at
    // u = 15.5; the detector must return a single full-height chain within
    // one pixel of it. (Hand-computed Sobel-of-Gaussian magnitudes peak at
    // 260.4 on columns 15 and 16, with 166.6 one column out.)
    #[test]
    fn detect_vertical_step_edge() {
        let (w, h) = (32u32, 64u32);
        let img = step_image(w, h, 16, 40.0, 160.0);
        let edges = detect_edges(&img, 100.0, 200.0);
        assert_eq!(edges.segments().len(), 1, "expected exactly one segment");
        let seg = &edges.segments()[0];
        assert!(seg.len() >= h as usize - 4, "length {} too short", seg.len());
        for &(u, _) in seg.pixels() {
            assert!((u as f64 - 15.5).abs() <= 1.0, "pixel column {u} off the step");
        }
    }

    #[test]
    fn detect_step_edge_with_noise() {
        let (w, h) = (32u32, 64u32);
        let mut img = step_image(w, h, 16, 40.0, 160.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for v in img.data_mut() {
            // Box-Muller, sigma = 2.
            let u1: f64 = rng.random_range(1e-12..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            let n = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            *v = (*v + 2.0 * n as f32).clamp(0.0, 255.0);
        }
        let edges = detect_edges(&img, 60.0, 120.0);
        let total: usize = edges.pixel_count();
        assert!(total > 0);
        let largest = edges.segments().iter().map(|s| s.len()).max().unwrap();
        assert!(
            largest as f64 >= 0.8 * total as f64,
            "largest segment {largest} of {total} pixels is not dominant"
        );
        for (u, _) in edges.pixels() {
            assert!((u as f64 - 15.5).abs() <= 2.5, "pixel column {u} strays from the edge");
        }
    }

    #[test]
    fn detect_rotated_image_gives_rotated_edges() {
        let (w, h) = (96u32, 64u32);
        let mut img = constant_image(w, h, 20.0);
        for v in 10..30 {
            for u in 12..44 {
                img.set(u, v, 200.0);
            }
        }
        for v in 38..58 {
            for u in 50..88 {
                img.set(u, v, 60.0);
            }
        }
        let mut rotated_data = img.data().to_vec();
        rotated_data.reverse();
        let rotated = RasterImage::from_data(w, h, rotated_data).unwrap();

        let edges = detect_edges(&img, 30.0, 60.0);
        let edges_rot = detect_edges(&rotated, 30.0, 60.0);

        let near = |set: &BTreeSet<(u32, u32)>, u: u32, v: u32| {
            (-1i64..=1).any(|dv| {
                (-1i64..=1).any(|du| {
                    let (nu, nv) = (u as i64 + du, v as i64 + dv);
                    nu >= 0 && nv >= 0 && set.contains(&(nu as u32, nv as u32))
                })
            })
        };
        let set_a = edges.pixel_set();
        let set_b = edges_rot.pixel_set();
        let border = 3;
        for &(u, v) in &set_b {
            if u < border || v < border || u >= w - border || v >= h - border {
                continue;
            }
            let (ru, rv) = (w - 1 - u, h - 1 - v);
            assert!(near(&set_a, ru, rv), "rotated edge pixel ({u},{v}) has no counterpart");
        }
        for &(u, v) in &set_a {
            if u < border || v < border || u >= w - border || v >= h - border {
                continue;
            }
            let (ru, rv) = (w - 1 - u, h - 1 - v);
            assert!(near(&set_b, ru, rv), "edge pixel ({u},{v}) has no rotated counterpart");
        }
    }

    #[test]
    fn filter_length_rule() {
        let map = EdgeMap::new(
            vec![horizontal_segment(10, 0, 150), horizontal_segment(300, 0, 250)],
            EdgeSource::Camera,
            400,
            400,
        )
        .unwrap();
        let kept = filter_edges(&map, 200, DEFAULT_CLUTTER_RADIUS, DEFAULT_CLUTTER_COUNT);
        assert_eq!(kept.segments().len(), 1);
        assert_eq!(kept.segments()[0].len(), 250);
    }

    #[test]
    fn filter_empty_map() {
        let map = EdgeMap::empty(EdgeSource::Camera, 100, 100);
        let kept = filter_edges(&map, 200, DEFAULT_CLUTTER_RADIUS, DEFAULT_CLUTTER_COUNT);
        assert!(kept.segments().is_empty());
    }

    #[test]
    fn filter_clutter_rule_keeps_isolated_contour() {
        // 20 parallel short segments 4 px apart plus one isolated contour far
        // away; only the contour may survive the clutter rule.
        let mut segments: Vec<EdgeSegment> =
            (0..20).map(|i| horizontal_segment(10 + 4 * i, 100, 40)).collect();
        segments.push(vertical_segment(20, 10, 190));
        let map = EdgeMap::new(segments, EdgeSource::Camera, 256, 256).unwrap();
        let kept = filter_edges(&map, 10, DEFAULT_CLUTTER_RADIUS, DEFAULT_CLUTTER_COUNT);
        assert_eq!(kept.segments().len(), 1);
        assert_eq!(kept.segments()[0].len(), 190);
        assert_eq!(kept.segments()[0].pixels()[0].0, 20);
    }

    #[test]
    fn merge_identity_and_idempotence() {
        let a = EdgeMap::new(vec![horizontal_segment(5, 2, 30)], EdgeSource::Lidar, 64, 64).unwrap();
        let empty = EdgeMap::empty(EdgeSource::Lidar, 64, 64);
        assert_eq!(merge_edge_maps(&a, &empty).unwrap().pixel_set(), a.pixel_set());
        assert_eq!(merge_edge_maps(&a, &a).unwrap().pixel_set(), a.pixel_set());

        let b = EdgeMap::new(vec![vertical_segment(50, 10, 20)], EdgeSource::Lidar, 64, 64).unwrap();
        let merged = merge_edge_maps(&a, &b).unwrap();
        assert_eq!(merged.pixel_count(), 50);
        assert_eq!(merged.segments().len(), 2);
    }

    #[test]
    fn merge_rejects_dimension_mismatch() {
        let a = EdgeMap::empty(EdgeSource::Lidar, 10, 10);
        let b = EdgeMap::empty(EdgeSource::Lidar, 11, 10);
        assert!(matches!(
            merge_edge_maps(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn min_length_scales_with_diagonal() {
        let (rw, rh) = REFERENCE_RESOLUTION;
        assert_eq!(scaled_min_edge_length(rw, rh), DEFAULT_MIN_EDGE_LENGTH);
        assert_eq!(scaled_min_edge_length(rw / 2, rh / 2), DEFAULT_MIN_EDGE_LENGTH / 2);
        assert!(scaled_min_edge_length(1, 1) >= 1);
    }

    #[test]
    fn linked_chains_partition_the_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (w, h) = (48u32, 48u32);
        let pixels: Vec<(u32, u32)> = (0..400)
            .map(|_| (rng.random_range(0..w), rng.random_range(0..h)))
            .collect();
        let unique: BTreeSet<(u32, u32)> = pixels.iter().copied().collect();
        let map = EdgeMap::from_pixels(pixels, EdgeSource::Camera, w, h);
        assert_eq!(map.pixel_set(), unique);
        // Re-validating through the checked constructor exercises the
        // disjointness and connectivity invariants.
        EdgeMap::new(map.segments().to_vec(), EdgeSource::Camera, w, h).unwrap();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn filter_is_idempotent_and_shrinking(
            seed in 0u64..1000,
            min_length in 1usize..12,
            clutter_count in 1.0f64..30.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (64u32, 64u32);
            let pixels: Vec<(u32, u32)> = (0..rng.random_range(0..300usize))
                .map(|_| (rng.random_range(0..w), rng.random_range(0..h)))
                .collect();
            let map = EdgeMap::from_pixels(pixels, EdgeSource::Camera, w, h);
            let once = filter_edges(&map, min_length, 8.0, clutter_count);
            let twice = filter_edges(&once, min_length, 8.0, clutter_count);
            prop_assert_eq!(&once, &twice);

            let input_segments: BTreeSet<Vec<(u32, u32)>> =
                map.segments().iter().map(|s| s.pixels().to_vec()).collect();
            for seg in once.segments() {
                prop_assert!(input_segments.contains(&seg.pixels().to_vec()));
            }
        }

        #[test]
        fn merge_is_commutative_and_idempotent(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (48u32, 48u32);
            let mut random_map = || {
                let n = rng.random_range(0..150usize);
                let pixels: Vec<(u32, u32)> = (0..n)
                    .map(|_| (rng.random_range(0..w), rng.random_range(0..h)))
                    .collect();
                EdgeMap::from_pixels(pixels, EdgeSource::Lidar, w, h)
            };
            let a = random_map();
            let b = random_map();
            let ab = merge_edge_maps(&a, &b).unwrap();
            let ba = merge_edge_maps(&b, &a).unwrap();
            prop_assert_eq!(ab.pixel_set(), ba.pixel_set());
            let again = merge_edge_maps(&ab, &b).unwrap();
            prop_assert_eq!(again.pixel_set(), ab.pixel_set());
        }
    }
}
