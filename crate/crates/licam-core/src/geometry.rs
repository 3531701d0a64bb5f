//! Rigid-body transforms, screw-motion interpolation and the pinhole camera
//! model.
//!
//! Conventions used throughout the crate:
//!
//! - Lidar/body frame: x forward, y left, z up.
//! - Camera frame: z forward (optical axis), x right, y down.
//! - A [`RigidTransform`] maps points from its source frame into its target
//!   frame: `p_target = R * p_source + t`.
//! - Pixel coordinates `(u, v)` are column/row, with `u` growing right and
//!   `v` growing down; the continuous coordinate of pixel index `(i, j)`
//!   center is exactly `(i, j)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nanoseconds since the session epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub fn from_nanos(ns: i64) -> Self {
        Timestamp(ns)
    }

    pub fn from_secs_f64(secs: f64) -> Self {
        Timestamp((secs * 1e9).round() as i64)
    }

    pub fn nanos(&self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(&self) -> f64 {
        self.0 as f64 * 1e-9
    }
}

/// A proper rigid motion: orthonormal rotation with determinant +1 plus a
/// translation in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

/// Maximum per-entry deviation of `RᵀR` from identity accepted by
/// [`RigidTransform::new`].
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a transform, rejecting rotations that are not orthonormal with
    /// determinant +1 within [`ORTHONORMALITY_TOL`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let gram = rotation.transpose() * rotation;
        let max_dev = (gram - Matrix3::identity())
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()));
        if max_dev > ORTHONORMALITY_TOL {
            return Err(Error::Invalid(format!(
                "rotation is not orthonormal (max |R'R - I| entry {max_dev:.3e})"
            )));
        }
        if rotation.determinant() < 0.0 {
            return Err(Error::Invalid(
                "rotation has negative determinant (reflection)".into(),
            ));
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    /// Internal constructor for products of already-validated transforms.
    pub(crate) fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        RigidTransform {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn from_euler(angles: EulerAngles, translation: Vector3<f64>) -> Self {
        RigidTransform {
            rotation: angles.to_rotation(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// Applies the transform to a point: `R * p + t`.
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rot_inv = self.rotation.transpose();
        RigidTransform {
            rotation: rot_inv,
            translation: -(rot_inv * self.translation),
        }
    }

    /// Rotation angle in radians, in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        ((self.rotation.trace() - 1.0) * 0.5).clamp(-1.0, 1.0).acos()
    }

    pub fn translation_norm(&self) -> f64 {
        self.translation.norm()
    }

    /// Screw-linear fraction of the motion: the twist (log) of the transform
    /// scaled by `alpha` and exponentiated.
    ///
    /// `alpha = 0` returns the exact identity and `alpha = 1` returns `self`
    /// bit-for-bit; for a pure translation the result is the linearly scaled
    /// translation.
    pub fn fractional(&self, alpha: f64) -> RigidTransform {
        if alpha == 0.0 {
            return RigidTransform::identity();
        }
        if alpha == 1.0 {
            return *self;
        }
        let (v, omega) = self.log();
        RigidTransform::exp(&(v * alpha), &(omega * alpha))
    }

    /// Twist coordinates `(v, ω)` such that `RigidTransform::exp(v, ω) == self`.
    pub fn log(&self) -> (Vector3<f64>, Vector3<f64>) {
        let omega = rotation_log(&self.rotation);
        let v = left_jacobian_inv(&omega) * self.translation;
        (v, omega)
    }

    /// Exponential of twist coordinates `(v, ω)`.
    pub fn exp(v: &Vector3<f64>, omega: &Vector3<f64>) -> RigidTransform {
        RigidTransform {
            rotation: rotation_exp(omega),
            translation: left_jacobian(omega) * v,
        }
    }
}

fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Rodrigues formula: rotation matrix of an axis-angle vector.
pub fn rotation_exp(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let w = skew(omega);
    if theta2 < 1e-16 {
        let (a, b) = (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0);
        Matrix3::identity() + w * a + w * w * b
    } else {
        let theta = theta2.sqrt();
        let a = theta.sin() / theta;
        let b = (1.0 - theta.cos()) / theta2;
        Matrix3::identity() + w * a + w * w * b
    }
}

/// Axis-angle vector of a rotation matrix, with angle in `[0, π]`.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos_theta = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    let half_skew = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    ) * 0.5;
    if theta < 1e-7 {
        // R ≈ I + θ ω̂: the skew part is sin(θ)·axis.
        half_skew * (1.0 + theta * theta / 6.0)
    } else if theta < std::f64::consts::PI - 1e-6 {
        half_skew * (theta / theta.sin())
    } else {
        // Near π the skew part degenerates; recover the axis from the
        // symmetric part R + Rᵀ = 2I + 2(1 − cosθ)(aaᵀ − I).
        let aat = Matrix3::identity() + (r + r.transpose() - Matrix3::identity() * 2.0)
            / (2.0 * (1.0 - cos_theta));
        let k = (0..3)
            .max_by(|&i, &j| aat[(i, i)].partial_cmp(&aat[(j, j)]).unwrap())
            .unwrap();
        let mut axis = Vector3::new(aat[(0, k)], aat[(1, k)], aat[(2, k)]) / aat[(k, k)].sqrt();
        if axis.dot(&half_skew) < 0.0 {
            axis = -axis;
        }
        axis * theta
    }
}

/// Left Jacobian of SO(3): `V(ω) = I + (1−cosθ)/θ² ω̂ + (θ−sinθ)/θ³ ω̂²`.
fn left_jacobian(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let w = skew(omega);
    if theta2 < 1e-14 {
        let (a, b) = (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0);
        Matrix3::identity() + w * a + w * w * b
    } else {
        let theta = theta2.sqrt();
        let a = (1.0 - theta.cos()) / theta2;
        let b = (theta - theta.sin()) / (theta2 * theta);
        Matrix3::identity() + w * a + w * w * b
    }
}

fn left_jacobian_inv(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let w = skew(omega);
    if theta2 < 1e-14 {
        let c = 1.0 / 12.0 + theta2 / 720.0;
        Matrix3::identity() - w * 0.5 + w * w * c
    } else {
        let theta = theta2.sqrt();
        let c = (1.0 - theta * theta.sin() / (2.0 * (1.0 - theta.cos()))) / theta2;
        Matrix3::identity() - w * 0.5 + w * w * c
    }
}

/// Intrinsic Z-Y-X (yaw, then pitch, then roll) Euler angles in radians.
///
/// Each angle lies in `(−π, π]`; `pitch` returned by [`EulerAngles::from_rotation`]
/// is restricted to `[−π/2, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        EulerAngles { roll, pitch, yaw }
    }

    pub fn zero() -> Self {
        EulerAngles {
            roll: 0.0,
            pitch: 0.0,
            yaw: 0.0,
        }
    }

    /// `R = Rz(yaw) · Ry(pitch) · Rx(roll)`.
    pub fn to_rotation(&self) -> Matrix3<f64> {
        let (sr, cr) = self.roll.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        Matrix3::new(
            cy * cp,
            cy * sp * sr - sy * cr,
            cy * sp * cr + sy * sr,
            sy * cp,
            sy * sp * sr + cy * cr,
            sy * sp * cr - cy * sr,
            -sp,
            cp * sr,
            cp * cr,
        )
    }

    /// Inverse of [`EulerAngles::to_rotation`]. Well conditioned away from
    /// gimbal lock (`|pitch|` near π/2).
    pub fn from_rotation(r: &Matrix3<f64>) -> Self {
        let pitch = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
        let yaw = r[(1, 0)].atan2(r[(0, 0)]);
        let roll = r[(2, 1)].atan2(r[(2, 2)]);
        EulerAngles { roll, pitch, yaw }
    }

    /// Largest absolute component in radians.
    pub fn max_abs(&self) -> f64 {
        self.roll.abs().max(self.pitch.abs()).max(self.yaw.abs())
    }
}

/// Pinhole camera parameters for a rectified (distortion-free) image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub f_u: f64,
    pub f_v: f64,
    pub c_u: f64,
    pub c_v: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(f_u: f64, f_v: f64, c_u: f64, c_v: f64, width: u32, height: u32) -> Result<Self> {
        let k = CameraIntrinsics {
            f_u,
            f_v,
            c_u,
            c_v,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_u > 0.0 && self.f_v > 0.0) {
            return Err(Error::Invalid(format!(
                "focal lengths must be positive, got ({}, {})",
                self.f_u, self.f_v
            )));
        }
        if !(self.c_u >= 0.0 && self.c_u < self.width as f64) {
            return Err(Error::Invalid(format!(
                "principal point u {} outside [0, {})",
                self.c_u, self.width
            )));
        }
        if !(self.c_v >= 0.0 && self.c_v < self.height as f64) {
            return Err(Error::Invalid(format!(
                "principal point v {} outside [0, {})",
                self.c_v, self.height
            )));
        }
        Ok(())
    }

    pub fn diagonal_px(&self) -> f64 {
        ((self.width as f64).powi(2) + (self.height as f64).powi(2)).sqrt()
    }
}

/// A point successfully projected in front of the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelProjection {
    pub u: f64,
    pub v: f64,
    /// Camera-frame depth `z_c` in meters, always positive.
    pub depth: f64,
    /// Whether `(u, v)` lies inside `[0, width) × [0, height)`.
    pub in_view: bool,
}

/// Interpolates the pose covering `[start, end]` to the intermediate time
/// `t`: the screw motion scaled by `α = (t − start)/(end − start)`.
///
/// `α = 0` yields the identity and `α = 1` yields `motion` exactly.
pub fn interpolate_pose(
    motion: &RigidTransform,
    start: Timestamp,
    end: Timestamp,
    t: Timestamp,
) -> Result<RigidTransform> {
    if end.nanos() <= start.nanos() {
        return Err(Error::DegenerateInterval(start.nanos()));
    }
    if t < start || t > end {
        return Err(Error::TimestampOutOfInterval {
            t: t.nanos(),
            start: start.nanos(),
            end: end.nanos(),
        });
    }
    let alpha = (t.nanos() - start.nanos()) as f64 / (end.nanos() - start.nanos()) as f64;
    Ok(motion.fractional(alpha))
}

/// Applies a rigid transform to a point: `R · p + t`.
pub fn transform_point(t: &RigidTransform, p: &Vector3<f64>) -> Vector3<f64> {
    t.apply(p)
}

/// Projects a lidar-frame point through the extrinsic and the pinhole model.
///
/// Returns `None` when the camera-frame depth `z_c` is non-positive (behind
/// the camera); otherwise the pixel coordinates together with the in-view
/// flag. Out-of-bounds pixels are a valid result, not an error.
pub fn project_point(
    k: &CameraIntrinsics,
    lidar_to_cam: &RigidTransform,
    point: &Vector3<f64>,
) -> Option<PixelProjection> {
    let pc = lidar_to_cam.apply(point);
    if pc.z <= 0.0 {
        return None;
    }
    let u = k.f_u * pc.x / pc.z + k.c_u;
    let v = k.f_v * pc.y / pc.z + k.c_v;
    let in_view =
        u >= 0.0 && u < k.width as f64 && v >= 0.0 && v < k.height as f64;
    Some(PixelProjection {
        u,
        v,
        depth: pc.z,
        in_view,
    })
}

/// Inverse of the pinhole projection: the camera-frame point at pixel
/// `(u, v)` and depth `z_c`.
pub fn unproject_pixel(k: &CameraIntrinsics, u: f64, v: f64, depth: f64) -> Vector3<f64> {
    Vector3::new(
        (u - k.c_u) * depth / k.f_u,
        (v - k.c_v) * depth / k.f_v,
        depth,
    )
}
