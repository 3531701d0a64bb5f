//! Canny edge detection on f32 rasters.
//!
//! Gaussian smoothing, Sobel gradients, non-maximum suppression with a
//! deterministic plateau tie-break, and double-threshold hysteresis. The
//! surviving pixels are linked into 8-connected chains by the caller.

use crate::exec;
use crate::raster::RasterImage;

/// Kernel half-width of the 5x5 Gaussian used before gradient computation.
const GAUSS_RADIUS: i64 = 2;

pub(super) fn gaussian_blur_5x5(img: &RasterImage, sigma: f32) -> RasterImage {
    let mut kernel = [0.0f32; 5];
    let s2 = 2.0 * sigma * sigma;
    let mut sum = 0.0;
    for (i, k) in kernel.iter_mut().enumerate() {
        let d = (i as i64 - GAUSS_RADIUS) as f32;
        *k = (-d * d / s2).exp();
        sum += *k;
    }
    for k in &mut kernel {
        *k /= sum;
    }

    let (w, h) = (img.width() as usize, img.height() as usize);
    // Separable passes with replicated borders; interior pixels run on
    // direct slice windows.
    let horiz: Vec<Vec<f32>> = exec::map_indices(h, |row| {
        let line = &img.data()[row * w..(row + 1) * w];
        let mut out = vec![0.0f32; w];
        let clamped = |u: i64| line[u.clamp(0, w as i64 - 1) as usize];
        for (u, slot) in out.iter_mut().enumerate().take((2).min(w)) {
            *slot = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * clamped(u as i64 + i as i64 - GAUSS_RADIUS))
                .sum();
        }
        for u in 2..w.saturating_sub(2) {
            let win = &line[u - 2..u + 3];
            out[u] = kernel[0] * win[0]
                + kernel[1] * win[1]
                + kernel[2] * win[2]
                + kernel[3] * win[3]
                + kernel[4] * win[4];
        }
        for u in w.saturating_sub(2).max(2)..w {
            out[u] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * clamped(u as i64 + i as i64 - GAUSS_RADIUS))
                .sum();
        }
        out
    });

    let mut result = RasterImage::zeros(img.width(), img.height());
    let rows: Vec<Vec<f32>> = exec::map_indices(h, |row| {
        let line_at = |v: i64| &horiz[v.clamp(0, h as i64 - 1) as usize];
        let win: [&Vec<f32>; 5] = [
            line_at(row as i64 - 2),
            line_at(row as i64 - 1),
            line_at(row as i64),
            line_at(row as i64 + 1),
            line_at(row as i64 + 2),
        ];
        (0..w)
            .map(|u| {
                kernel[0] * win[0][u]
                    + kernel[1] * win[1][u]
                    + kernel[2] * win[2][u]
                    + kernel[3] * win[3][u]
                    + kernel[4] * win[4][u]
            })
            .collect()
    });
    for (row, line) in rows.into_iter().enumerate() {
        result.data_mut()[row * w..(row + 1) * w].copy_from_slice(&line);
    }
    result
}

/// Sobel gradients (gx, gy) with replicated borders.
pub(super) fn sobel_gradients(img: &RasterImage) -> (RasterImage, RasterImage) {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut gx = RasterImage::zeros(img.width(), img.height());
    let mut gy = RasterImage::zeros(img.width(), img.height());
    let rows: Vec<(Vec<f32>, Vec<f32>)> = exec::map_indices(h, |row| {
        let line_at = |v: i64| {
            let v = v.clamp(0, h as i64 - 1) as usize;
            &img.data()[v * w..(v + 1) * w]
        };
        let above = line_at(row as i64 - 1);
        let here = line_at(row as i64);
        let below = line_at(row as i64 + 1);
        let mut dx = vec![0.0f32; w];
        let mut dy = vec![0.0f32; w];
        for u in 0..w {
            let l = u.saturating_sub(1);
            let r = (u + 1).min(w - 1);
            dx[u] = (above[r] + 2.0 * here[r] + below[r]) - (above[l] + 2.0 * here[l] + below[l]);
            dy[u] = (below[l] + 2.0 * below[u] + below[r]) - (above[l] + 2.0 * above[u] + above[r]);
        }
        (dx, dy)
    });
    for (row, (dx, dy)) in rows.into_iter().enumerate() {
        gx.data_mut()[row * w..(row + 1) * w].copy_from_slice(&dx);
        gy.data_mut()[row * w..(row + 1) * w].copy_from_slice(&dy);
    }
    (gx, gy)
}

/// Non-maximum suppression along the quantized gradient direction.
///
/// Plateaus of equal magnitude keep exactly one pixel: strictly greater than
/// the neighbor on one side, at least equal on the other.
pub(super) fn non_maximum_suppression(
    mag: &RasterImage,
    gx: &RasterImage,
    gy: &RasterImage,
) -> RasterImage {
    const TAN_22_5: f32 = 0.414_213_56;
    const TAN_67_5: f32 = 2.414_213_6;
    let (w, h) = (mag.width() as usize, mag.height() as usize);
    let mut out = RasterImage::zeros(mag.width(), mag.height());
    if w < 3 || h < 3 {
        return out;
    }
    let rows: Vec<Vec<f32>> = exec::map_indices(h - 2, |i| {
        let v = i + 1;
        let above = &mag.data()[(v - 1) * w..v * w];
        let here = &mag.data()[v * w..(v + 1) * w];
        let below = &mag.data()[(v + 1) * w..(v + 2) * w];
        let gx_row = &gx.data()[v * w..(v + 1) * w];
        let gy_row = &gy.data()[v * w..(v + 1) * w];
        let mut line = vec![0.0f32; w];
        for u in 1..w - 1 {
            let m = here[u];
            if m == 0.0 {
                continue;
            }
            let ax = gx_row[u].abs();
            let ay = gy_row[u].abs();
            // Quantized gradient sectors without atan2.
            let (before, after) = if ay <= ax * TAN_22_5 {
                (here[u - 1], here[u + 1])
            } else if ay >= ax * TAN_67_5 {
                (above[u], below[u])
            } else if gx_row[u] * gy_row[u] > 0.0 {
                (above[u - 1], below[u + 1])
            } else {
                (below[u - 1], above[u + 1])
            };
            if m > before && m >= after {
                line[u] = m;
            }
        }
        line
    });
    for (i, line) in rows.into_iter().enumerate() {
        let row = i + 1;
        out.data_mut()[row * w..(row + 1) * w].copy_from_slice(&line);
    }
    out
}

/// Double-threshold hysteresis: strong pixels seed a flood fill through weak
/// pixels. Returns the binary edge mask.
pub(super) fn hysteresis(thinned: &RasterImage, low: f32, high: f32) -> Vec<bool> {
    let (w, h) = (thinned.width() as i64, thinned.height() as i64);
    let mut mask = vec![false; (w * h) as usize];
    let mut stack = Vec::new();
    for v in 0..h {
        for u in 0..w {
            let idx = (v * w + u) as usize;
            if thinned.data()[idx] >= high && !mask[idx] {
                mask[idx] = true;
                stack.push((u, v));
                while let Some((cu, cv)) = stack.pop() {
                    for dv in -1..=1i64 {
                        for du in -1..=1i64 {
                            if du == 0 && dv == 0 {
                                continue;
                            }
                            let (nu, nv) = (cu + du, cv + dv);
                            if nu < 0 || nv < 0 || nu >= w || nv >= h {
                                continue;
                            }
                            let nidx = (nv * w + nu) as usize;
                            if !mask[nidx] && thinned.data()[nidx] >= low {
                                mask[nidx] = true;
                                stack.push((nu, nv));
                            }
                        }
                    }
                }
            }
        }
    }
    mask
}

/// Gradient magnitude raster plus the hysteresis thresholds derived from it:
/// `(low_factor · m, high_factor · m)` where `m` is the requested percentile
/// of nonzero magnitudes.
pub(super) fn derive_thresholds(
    mag: &RasterImage,
    percentile: f64,
    low_factor: f32,
    high_factor: f32,
) -> (f32, f32) {
    let mut nonzero: Vec<f32> = mag.data().iter().copied().filter(|&m| m > 0.0).collect();
    if nonzero.is_empty() {
        return (f32::MAX, f32::MAX);
    }
    let rank = ((nonzero.len() - 1) as f64 * percentile.clamp(0.0, 1.0)).round() as usize;
    let (_, m, _) = nonzero.select_nth_unstable_by(rank, |a, b| a.partial_cmp(b).unwrap());
    let m = *m;
    (low_factor * m, high_factor * m)
}

pub(super) fn gradient_magnitude(gx: &RasterImage, gy: &RasterImage) -> RasterImage {
    let mut mag = RasterImage::zeros(gx.width(), gx.height());
    for (m, (&x, &y)) in mag
        .data_mut()
        .iter_mut()
        .zip(gx.data().iter().zip(gy.data()))
    {
        *m = x.hypot(y);
    }
    mag
}
