//! Lidar-camera fusion preprocessing and targetless extrinsic calibration.
//!
//! The crate covers the full path from a raw, continuously scanned lidar
//! stream to a calibrated camera-aligned RGBD frame:
//!
//! - [`geometry`] — rigid transforms, screw-motion pose interpolation and the
//!   pinhole projection model shared by everything else.
//! - [`preprocessing`] — IMU-based motion undistortion of per-frame point
//!   clouds and projection into pixel-aligned depth/reflectivity rasters.
//! - [`edgemap`] — histogram equalization, Canny edge extraction and the
//!   length/clutter filters that turn rasters into matchable edge maps.
//! - [`calib`] — the edge-matching cost with a mismatch penalty, coordinate
//!   descent over (roll, pitch, yaw), and the accept/reject parameter update.
//! - [`synth`] — a synthetic rosette-scan oracle with analytic scenes and a
//!   matched camera renderer, used to verify the pipeline end to end against
//!   known ground truth.
//! - [`io`] — the on-disk formats (point cloud CSV/PLY, IMU CSV, 16-bit depth
//!   PNG, raw float rasters, extrinsic JSON).
//!
//! Data-parallel inner loops (scan generation, undistortion, rasterization,
//! edge extraction, cost evaluation) run on rayon when the default `parallel`
//! feature is enabled and fall back to sequential iteration without it. All
//! results are deterministic: identical inputs produce identical outputs
//! regardless of thread count.

pub mod calib;
pub mod edgemap;
mod error;
mod exec;
pub mod geometry;
pub mod io;
pub mod preprocessing;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
