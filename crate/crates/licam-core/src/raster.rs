//! Single-channel and RGB raster containers.
//!
//! `RasterImage` is the one raster type used for grayscale, depth (meters),
//! reflectivity and intermediate gradient planes. Zero encodes "no data" for
//! lidar-derived rasters.

use crate::{Error, Result};

/// Row-major single-channel f32 raster.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl RasterImage {
    pub fn zeros(width: u32, height: u32) -> Self {
        RasterImage {
            width,
            height,
            data: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn from_data(width: u32, height: u32, data: Vec<f32>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Invalid(format!(
                "raster data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> f32 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, value: f32) {
        self.data[v as usize * self.width as usize + u as usize] = value;
    }

    /// Clamped read: coordinates outside the raster are replicated from the
    /// nearest border pixel.
    #[inline]
    pub fn get_clamped(&self, u: i64, v: i64) -> f32 {
        let uu = u.clamp(0, self.width as i64 - 1) as usize;
        let vv = v.clamp(0, self.height as i64 - 1) as usize;
        self.data[vv * self.width as usize + uu]
    }

    pub fn same_dims(&self, other: &RasterImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                lhs_width: self.width,
                lhs_height: self.height,
                rhs_width: other.width,
                rhs_height: other.height,
            });
        }
        Ok(())
    }

    /// Fraction of pixels holding a nonzero value.
    pub fn fill_ratio(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let nonzero = self.data.iter().filter(|&&v| v != 0.0).count();
        nonzero as f64 / self.data.len() as f64
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().fold(0.0f32, |m, &v| m.max(v))
    }
}

/// 3x3 grayscale morphological closing (dilation then erosion), treating 0 as
/// background. Fills single-pixel holes in sparse lidar rasters.
pub fn close_3x3(img: &RasterImage) -> RasterImage {
    let dilated = morph_3x3(img, true);
    morph_3x3(&dilated, false)
}

// The 3x3 min/max filter is separable into a horizontal and a vertical
// 3-tap pass.
fn morph_3x3(img: &RasterImage, dilate: bool) -> RasterImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pick = if dilate { f32::max } else { f32::min };

    let horiz: Vec<Vec<f32>> = crate::exec::map_indices(h, |row| {
        let line = &img.data()[row * w..(row + 1) * w];
        let mut out = vec![0.0f32; w];
        if w == 1 {
            out[0] = line[0];
            return out;
        }
        out[0] = pick(line[0], line[1]);
        for u in 1..w - 1 {
            out[u] = pick(pick(line[u - 1], line[u]), line[u + 1]);
        }
        out[w - 1] = pick(line[w - 2], line[w - 1]);
        out
    });

    let mut result = RasterImage::zeros(img.width(), img.height());
    let rows: Vec<Vec<f32>> = crate::exec::map_indices(h, |row| {
        let above = &horiz[row.saturating_sub(1)];
        let here = &horiz[row];
        let below = &horiz[(row + 1).min(h - 1)];
        (0..w)
            .map(|u| pick(pick(above[u], here[u]), below[u]))
            .collect()
    });
    for (row, line) in rows.into_iter().enumerate() {
        result.data_mut()[row * w..(row + 1) * w].copy_from_slice(&line);
    }
    result
}

/// Interleaved 8-bit RGB raster used for overlays and report images.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32) -> Self {
        RgbImage {
            width,
            height,
            data: vec![0; width as usize * height as usize * 3],
        }
    }

    /// Expands a grayscale raster (already scaled to 0..255) to RGB.
    pub fn from_gray(img: &RasterImage) -> Self {
        let mut out = RgbImage::new(img.width(), img.height());
        for (i, &v) in img.data().iter().enumerate() {
            let g = v.clamp(0.0, 255.0) as u8;
            out.data[i * 3] = g;
            out.data[i * 3 + 1] = g;
            out.data[i * 3 + 2] = g;
        }
        out
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, rgb: [u8; 3]) {
        if u < self.width && v < self.height {
            let i = (v as usize * self.width as usize + u as usize) * 3;
            self.data[i..i + 3].copy_from_slice(&rgb);
        }
    }

    /// Bresenham line between two pixel coordinates.
    pub fn draw_line(&mut self, from: (u32, u32), to: (u32, u32), rgb: [u8; 3]) {
        let (mut x0, mut y0) = (from.0 as i64, from.1 as i64);
        let (x1, y1) = (to.0 as i64, to.1 as i64);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            if x0 >= 0 && y0 >= 0 {
                self.set(x0 as u32, y0 as u32, rgb);
            }
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_ratio_counts_nonzero() {
        let mut img = RasterImage::zeros(4, 2);
        assert_eq!(img.fill_ratio(), 0.0);
        img.set(0, 0, 3.0);
        img.set(3, 1, 1.0);
        assert_eq!(img.fill_ratio(), 0.25);
    }

    #[test]
    fn closing_fills_single_pixel_hole() {
        let mut img = RasterImage::zeros(5, 5);
        for v in 0..5 {
            for u in 0..5 {
                if !(u == 2 && v == 2) {
                    img.set(u, v, 10.0);
                }
            }
        }
        let closed = close_3x3(&img);
        assert_eq!(closed.get(2, 2), 10.0);
    }

    #[test]
    fn closing_keeps_isolated_background() {
        let img = RasterImage::zeros(5, 5);
        let closed = close_3x3(&img);
        assert_eq!(closed.count_nonzero(), 0);
    }
}
