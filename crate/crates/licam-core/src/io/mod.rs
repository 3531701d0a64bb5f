//! On-disk formats.
//!
//! - Point clouds: CSV (`x,y,z,reflectivity,t_ns` per line, no header) and
//!   binary little-endian PLY with the same five properties (`t_ns` stored as
//!   a double, exact for sessions up to 2^53 ns).
//! - Frame boundaries: CSV `t_s,t_e` per line.
//! - IMU: CSV `t_ns,qw,qx,qy,qz,tx,ty,tz` (unit quaternion + translation).
//! - Rasters: 16-bit grayscale PNG in millimeters (clamped at 65.535 m),
//!   full-range raw float32 with an 8-byte width/height header, 8-bit
//!   grayscale and 24-bit RGB PNG.
//! - Extrinsics: JSON with a row-major rotation, translation and an optional
//!   provenance block. Intrinsics: JSON.
//! - Edge maps: CSV `segment_id,u,v` per pixel.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::calib::CalibParams;
use crate::edgemap::EdgeMap;
use crate::geometry::{CameraIntrinsics, RigidTransform, Timestamp};
use crate::preprocessing::{ImuSample, LidarPoint, PointCloudFrame};
use crate::raster::{RasterImage, RgbImage};
use crate::{Error, Result};

fn display_path(path: &Path) -> String {
    path.display().to_string()
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(display_path(path), e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(display_path(path), e))
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    path: &Path,
    line_no: usize,
    what: &str,
) -> Result<T> {
    field.trim().parse::<T>().map_err(|_| {
        Error::parse(
            display_path(path),
            line_no,
            format!("invalid {what} `{}`", field.trim()),
        )
    })
}

// ---------------------------------------------------------------------------
// Point cloud CSV + frame boundaries
// ---------------------------------------------------------------------------

/// Writes `x,y,z,reflectivity,t_ns` per point.
pub fn write_points_csv(path: &Path, points: &[LidarPoint]) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.position.x,
            p.position.y,
            p.position.z,
            p.reflectivity,
            p.t.nanos()
        )
        .map_err(|e| Error::io(display_path(path), e))?;
    }
    Ok(())
}

pub fn read_points_csv(path: &Path) -> Result<Vec<LidarPoint>> {
    let reader = BufReader::new(open(path)?);
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(display_path(path), e))?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                display_path(path),
                line_no,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let x: f64 = parse_field(fields[0], path, line_no, "x")?;
        let y: f64 = parse_field(fields[1], path, line_no, "y")?;
        let z: f64 = parse_field(fields[2], path, line_no, "z")?;
        let reflectivity: f32 = parse_field(fields[3], path, line_no, "reflectivity")?;
        let t_ns: i64 = parse_field(fields[4], path, line_no, "t_ns")?;
        let point = LidarPoint {
            position: Vector3::new(x, y, z),
            reflectivity,
            t: Timestamp::from_nanos(t_ns),
        };
        validate_point(&point, path, line_no)?;
        points.push(point);
    }
    Ok(points)
}

fn validate_point(p: &LidarPoint, path: &Path, line_no: usize) -> Result<()> {
    let range = p.position.norm();
    if !(range > 0.0 && range <= crate::preprocessing::SENSOR_MAX_RANGE_M) {
        return Err(Error::parse(
            display_path(path),
            line_no,
            format!(
                "range {range:.3} m outside (0, {}]",
                crate::preprocessing::SENSOR_MAX_RANGE_M
            ),
        ));
    }
    if !(0.0..=255.0).contains(&p.reflectivity) {
        return Err(Error::parse(
            display_path(path),
            line_no,
            format!("reflectivity {} outside [0, 255]", p.reflectivity),
        ));
    }
    Ok(())
}

/// Writes one `t_s,t_e` line per frame.
pub fn write_frames_csv(path: &Path, frames: &[PointCloudFrame]) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    for f in frames {
        writeln!(w, "{},{}", f.t_s.nanos(), f.t_e.nanos())
            .map_err(|e| Error::io(display_path(path), e))?;
    }
    Ok(())
}

pub fn read_frame_boundaries(path: &Path) -> Result<Vec<(Timestamp, Timestamp)>> {
    let reader = BufReader::new(open(path)?);
    let mut bounds = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(display_path(path), e))?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                display_path(path),
                line_no,
                format!("expected 2 fields, got {}", fields.len()),
            ));
        }
        let t_s: i64 = parse_field(fields[0], path, line_no, "t_s")?;
        let t_e: i64 = parse_field(fields[1], path, line_no, "t_e")?;
        if t_e <= t_s {
            return Err(Error::parse(
                display_path(path),
                line_no,
                format!("frame end {t_e} not after start {t_s}"),
            ));
        }
        bounds.push((Timestamp::from_nanos(t_s), Timestamp::from_nanos(t_e)));
    }
    Ok(bounds)
}

/// Groups a point list into frames by the boundary list. Points belong to a
/// frame when `t_s <= t < t_e` (the final frame includes its end instant);
/// points outside every frame are dropped.
pub fn split_into_frames(
    points: Vec<LidarPoint>,
    boundaries: &[(Timestamp, Timestamp)],
) -> Result<Vec<PointCloudFrame>> {
    if boundaries.is_empty() {
        return Err(Error::EmptyInput("no frame boundaries"));
    }
    let mut buckets: Vec<Vec<LidarPoint>> = vec![Vec::new(); boundaries.len()];
    let last = boundaries.len() - 1;
    for p in points {
        for (i, &(t_s, t_e)) in boundaries.iter().enumerate() {
            let inside = p.t >= t_s && (p.t < t_e || (i == last && p.t == t_e));
            if inside {
                buckets[i].push(p);
                break;
            }
        }
    }
    boundaries
        .iter()
        .zip(buckets)
        .map(|(&(t_s, t_e), points)| PointCloudFrame::new(points, t_s, t_e))
        .collect()
}

// ---------------------------------------------------------------------------
// Binary PLY
// ---------------------------------------------------------------------------

const PLY_PROPERTIES: [(&str, &str); 5] = [
    ("double", "x"),
    ("double", "y"),
    ("double", "z"),
    ("float", "reflectivity"),
    ("double", "t_ns"),
];

pub fn write_points_ply(path: &Path, points: &[LidarPoint]) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    let io_err = |e| Error::io(display_path(path), e);
    writeln!(w, "ply").map_err(io_err)?;
    writeln!(w, "format binary_little_endian 1.0").map_err(io_err)?;
    writeln!(w, "element vertex {}", points.len()).map_err(io_err)?;
    for (ty, name) in PLY_PROPERTIES {
        writeln!(w, "property {ty} {name}").map_err(io_err)?;
    }
    writeln!(w, "end_header").map_err(io_err)?;
    for p in points {
        w.write_all(&p.position.x.to_le_bytes()).map_err(io_err)?;
        w.write_all(&p.position.y.to_le_bytes()).map_err(io_err)?;
        w.write_all(&p.position.z.to_le_bytes()).map_err(io_err)?;
        w.write_all(&p.reflectivity.to_le_bytes()).map_err(io_err)?;
        w.write_all(&(p.t.nanos() as f64).to_le_bytes())
            .map_err(io_err)?;
    }
    Ok(())
}

pub fn read_points_ply(path: &Path) -> Result<Vec<LidarPoint>> {
    let mut reader = BufReader::new(open(path)?);
    let mut line = String::new();
    let mut line_no = 0usize;
    let mut count: Option<usize> = None;
    let mut properties: Vec<(String, String)> = Vec::new();
    loop {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| Error::io(display_path(path), e))?;
        if n == 0 {
            return Err(Error::parse(display_path(path), line_no, "unexpected end of header"));
        }
        line_no += 1;
        let trimmed = line.trim();
        if line_no == 1 && trimmed != "ply" {
            return Err(Error::parse(display_path(path), line_no, "missing `ply` magic"));
        }
        if trimmed.starts_with("format") && trimmed != "format binary_little_endian 1.0" {
            return Err(Error::parse(
                display_path(path),
                line_no,
                "only binary_little_endian 1.0 is supported",
            ));
        }
        if let Some(rest) = trimmed.strip_prefix("element vertex ") {
            count = Some(parse_field(rest, path, line_no, "vertex count")?);
        }
        if let Some(rest) = trimmed.strip_prefix("property ") {
            let mut it = rest.split_whitespace();
            let ty = it.next().unwrap_or_default().to_string();
            let name = it.next().unwrap_or_default().to_string();
            properties.push((ty, name));
        }
        if trimmed == "end_header" {
            break;
        }
    }
    let expected: Vec<(String, String)> = PLY_PROPERTIES
        .iter()
        .map(|(t, n)| (t.to_string(), n.to_string()))
        .collect();
    if properties != expected {
        return Err(Error::parse(
            display_path(path),
            line_no,
            "vertex properties must be double x/y/z, float reflectivity, double t_ns",
        ));
    }
    let count =
        count.ok_or_else(|| Error::parse(display_path(path), line_no, "missing vertex element"))?;

    let mut points = Vec::with_capacity(count);
    let mut record = [0u8; 36];
    for i in 0..count {
        reader.read_exact(&mut record).map_err(|e| {
            Error::parse(display_path(path), line_no, format!("vertex {i}: {e}"))
        })?;
        let f64_at = |o: usize| f64::from_le_bytes(record[o..o + 8].try_into().unwrap());
        let point = LidarPoint {
            position: Vector3::new(f64_at(0), f64_at(8), f64_at(16)),
            reflectivity: f32::from_le_bytes(record[24..28].try_into().unwrap()),
            t: Timestamp::from_nanos(f64_at(28) as i64),
        };
        validate_point(&point, path, line_no)?;
        points.push(point);
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// IMU CSV
// ---------------------------------------------------------------------------

pub fn write_imu_csv(path: &Path, samples: &[ImuSample]) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    for s in samples {
        let rot = Rotation3::from_matrix_unchecked(*s.pose.rotation());
        let q = UnitQuaternion::from_rotation_matrix(&rot);
        let t = s.pose.translation();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.t.nanos(),
            q.w,
            q.i,
            q.j,
            q.k,
            t.x,
            t.y,
            t.z
        )
        .map_err(|e| Error::io(display_path(path), e))?;
    }
    Ok(())
}

pub fn read_imu_csv(path: &Path) -> Result<Vec<ImuSample>> {
    let reader = BufReader::new(open(path)?);
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(display_path(path), e))?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::parse(
                display_path(path),
                line_no,
                format!("expected 8 fields, got {}", fields.len()),
            ));
        }
        let t_ns: i64 = parse_field(fields[0], path, line_no, "t_ns")?;
        let mut q = [0.0f64; 4];
        for (slot, field) in q.iter_mut().zip(&fields[1..5]) {
            *slot = parse_field(field, path, line_no, "quaternion component")?;
        }
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::parse(
                display_path(path),
                line_no,
                format!("quaternion norm {norm} is not 1"),
            ));
        }
        let tx: f64 = parse_field(fields[5], path, line_no, "tx")?;
        let ty: f64 = parse_field(fields[6], path, line_no, "ty")?;
        let tz: f64 = parse_field(fields[7], path, line_no, "tz")?;
        let quat = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
        samples.push(ImuSample {
            t: Timestamp::from_nanos(t_ns),
            pose: RigidTransform::from_parts(
                quat.to_rotation_matrix().into_inner(),
                Vector3::new(tx, ty, tz),
            ),
        });
    }
    Ok(samples)
}

// ---------------------------------------------------------------------------
// Raster images
// ---------------------------------------------------------------------------

/// 16-bit grayscale PNG in millimeters; depths beyond 65.535 m clamp.
pub fn write_depth_png16(path: &Path, depth_m: &RasterImage) -> Result<()> {
    let mut bytes = Vec::with_capacity(depth_m.data().len() * 2);
    for &d in depth_m.data() {
        let mm = ((d as f64) * 1000.0).round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&mm.to_be_bytes());
    }
    write_png(path, depth_m.width(), depth_m.height(), png::ColorType::Grayscale, png::BitDepth::Sixteen, &bytes)
}

pub fn read_depth_png16(path: &Path) -> Result<RasterImage> {
    let (info, data) = read_png(path)?;
    if info.0 != png::ColorType::Grayscale || info.1 != png::BitDepth::Sixteen {
        return Err(Error::Png {
            path: display_path(path),
            message: "expected 16-bit grayscale".into(),
        });
    }
    let pixels: Vec<f32> = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as f32 / 1000.0)
        .collect();
    RasterImage::from_data(info.2, info.3, pixels)
}

/// 8-bit grayscale PNG of values already scaled to `[0, 255]`.
pub fn write_gray_png8(path: &Path, img: &RasterImage) -> Result<()> {
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    write_png(path, img.width(), img.height(), png::ColorType::Grayscale, png::BitDepth::Eight, &bytes)
}

/// Reads an 8-bit PNG as a grayscale raster; RGB inputs use the integer
/// BT.601 luma.
pub fn read_gray_png8(path: &Path) -> Result<RasterImage> {
    let (info, data) = read_png(path)?;
    if info.1 != png::BitDepth::Eight {
        return Err(Error::Png {
            path: display_path(path),
            message: "expected 8-bit PNG".into(),
        });
    }
    let pixels: Vec<f32> = match info.0 {
        png::ColorType::Grayscale => data.iter().map(|&b| b as f32).collect(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|c| {
                ((299 * c[0] as u32 + 587 * c[1] as u32 + 114 * c[2] as u32) / 1000) as f32
            })
            .collect(),
        other => {
            return Err(Error::Png {
                path: display_path(path),
                message: format!("unsupported color type {other:?}"),
            })
        }
    };
    RasterImage::from_data(info.2, info.3, pixels)
}

pub fn write_rgb_png(path: &Path, img: &RgbImage) -> Result<()> {
    write_png(path, img.width(), img.height(), png::ColorType::Rgb, png::BitDepth::Eight, img.data())
}

fn write_png(
    path: &Path,
    width: u32,
    height: u32,
    color: png::ColorType,
    depth: png::BitDepth,
    bytes: &[u8],
) -> Result<()> {
    let file = create(path)?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(color);
    encoder.set_depth(depth);
    let mut writer = encoder.write_header().map_err(|e| Error::Png {
        path: display_path(path),
        message: e.to_string(),
    })?;
    writer.write_image_data(bytes).map_err(|e| Error::Png {
        path: display_path(path),
        message: e.to_string(),
    })?;
    Ok(())
}

type PngInfo = (png::ColorType, png::BitDepth, u32, u32);

fn read_png(path: &Path) -> Result<(PngInfo, Vec<u8>)> {
    let decoder = png::Decoder::new(BufReader::new(open(path)?));
    let mut reader = decoder.read_info().map_err(|e| Error::Png {
        path: display_path(path),
        message: e.to_string(),
    })?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or_default()];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::Png {
        path: display_path(path),
        message: e.to_string(),
    })?;
    buf.truncate(info.buffer_size());
    Ok(((info.color_type, info.bit_depth, info.width, info.height), buf))
}

/// Raw float32 raster: u32 width, u32 height (little-endian), then row-major
/// f32 samples.
pub fn write_raster_f32(path: &Path, img: &RasterImage) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    let io_err = |e| Error::io(display_path(path), e);
    w.write_all(&img.width().to_le_bytes()).map_err(io_err)?;
    w.write_all(&img.height().to_le_bytes()).map_err(io_err)?;
    for &v in img.data() {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_raster_f32(path: &Path) -> Result<RasterImage> {
    let mut r = BufReader::new(open(path)?);
    let io_err = |e| Error::io(display_path(path), e);
    let mut header = [0u8; 8];
    r.read_exact(&mut header).map_err(io_err)?;
    let width = u32::from_le_bytes(header[0..4].try_into().unwrap());
    let height = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err)?;
    if bytes.len() != width as usize * height as usize * 4 {
        return Err(Error::parse(
            display_path(path),
            1,
            format!("payload {} bytes does not match {width}x{height} f32", bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    RasterImage::from_data(width, height, data)
}

// ---------------------------------------------------------------------------
// Intrinsics / extrinsics JSON
// ---------------------------------------------------------------------------

pub fn write_intrinsics_json(path: &Path, k: &CameraIntrinsics) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    let body = serde_json::to_string_pretty(k).expect("intrinsics serialize");
    writeln!(w, "{body}").map_err(|e| Error::io(display_path(path), e))
}

pub fn read_intrinsics_json(path: &Path) -> Result<CameraIntrinsics> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(display_path(path), e))?;
    let k: CameraIntrinsics = serde_json::from_str(&text)
        .map_err(|e| Error::parse(display_path(path), e.line(), e.to_string()))?;
    k.validate()?;
    Ok(k)
}

/// Calibration provenance carried alongside a published extrinsic.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub cost: f64,
    pub scene_id: String,
    pub t_ns: i64,
}

/// The extrinsic file: row-major rotation, translation in meters, optional
/// provenance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExtrinsicFile {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl ExtrinsicFile {
    pub fn from_transform(t: &RigidTransform) -> Self {
        let r = t.rotation();
        ExtrinsicFile {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [t.translation().x, t.translation().y, t.translation().z],
            provenance: None,
        }
    }

    pub fn from_params(params: &CalibParams) -> Self {
        let mut file = Self::from_transform(&params.extrinsic);
        file.provenance = Some(Provenance {
            cost: params.cost,
            scene_id: params.scene_id.clone(),
            t_ns: params.t.nanos(),
        });
        file
    }

    pub fn to_transform(&self) -> Result<RigidTransform> {
        let r = &self.rotation;
        let rotation = Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        );
        RigidTransform::new(
            rotation,
            Vector3::new(self.translation[0], self.translation[1], self.translation[2]),
        )
    }
}

pub fn write_extrinsics_json(path: &Path, file: &ExtrinsicFile) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    let body = serde_json::to_string_pretty(file).expect("extrinsic serialize");
    writeln!(w, "{body}").map_err(|e| Error::io(display_path(path), e))
}

pub fn read_extrinsics_json(path: &Path) -> Result<ExtrinsicFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(display_path(path), e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::parse(display_path(path), e.line(), e.to_string()))
}

// ---------------------------------------------------------------------------
// Edge map CSV
// ---------------------------------------------------------------------------

/// Writes `segment_id,u,v` per edge pixel.
pub fn write_edges_csv(path: &Path, edges: &EdgeMap) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    for (id, seg) in edges.segments().iter().enumerate() {
        for &(u, v) in seg.pixels() {
            writeln!(w, "{id},{u},{v}").map_err(|e| Error::io(display_path(path), e))?;
        }
    }
    Ok(())
}
