//! Analytic scene primitives and exact ray casting.

use nalgebra::Vector3;

use crate::geometry::RigidTransform;
use crate::{Error, Result};

/// Per-surface albedo in `[0, 255]`, optionally striped along one in-plane
/// coordinate to give flat surfaces reflectivity structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceTexture {
    Solid(f32),
    Stripes { a: f32, b: f32, period_m: f64 },
}

impl SurfaceTexture {
    pub fn validate(&self) -> Result<()> {
        let check = |v: f32| {
            if !(0.0..=255.0).contains(&v) {
                Err(Error::Invalid(format!("albedo {v} outside [0, 255]")))
            } else {
                Ok(())
            }
        };
        match self {
            SurfaceTexture::Solid(v) => check(*v),
            SurfaceTexture::Stripes { a, b, period_m } => {
                check(*a)?;
                check(*b)?;
                if *period_m <= 0.0 {
                    return Err(Error::Invalid("stripe period must be positive".into()));
                }
                Ok(())
            }
        }
    }

    fn albedo_at(&self, s: f64) -> f32 {
        match self {
            SurfaceTexture::Solid(v) => *v,
            SurfaceTexture::Stripes { a, b, period_m } => {
                let phase = (s / period_m).rem_euclid(2.0);
                if phase < 1.0 {
                    *a
                } else {
                    *b
                }
            }
        }
    }
}

/// A finite textured rectangle: corner plus two orthogonal edge vectors.
/// Stripes run along the first edge's coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    pub corner: Vector3<f64>,
    pub edge_u: Vector3<f64>,
    pub edge_v: Vector3<f64>,
    pub texture: SurfaceTexture,
}

/// An oriented box with per-face textures, ordered +x, -x, +y, -y, +z, -z in
/// the box frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxPrimitive {
    pub pose: RigidTransform,
    pub half_extents: Vector3<f64>,
    pub faces: [SurfaceTexture; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Rect(Rectangle),
    Box(BoxPrimitive),
}

impl Primitive {
    pub fn validate(&self) -> Result<()> {
        match self {
            Primitive::Rect(r) => {
                if r.edge_u.norm() <= 0.0 || r.edge_v.norm() <= 0.0 {
                    return Err(Error::Invalid("rectangle edges must have positive length".into()));
                }
                r.texture.validate()
            }
            Primitive::Box(b) => {
                if b.half_extents.min() <= 0.0 {
                    return Err(Error::Invalid("box extents must be positive".into()));
                }
                b.faces.iter().try_for_each(|f| f.validate())
            }
        }
    }
}

/// A ray-primitive intersection: distance along the (unit) ray direction and
/// the surface albedo at the hit point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub range: f64,
    pub albedo: f32,
}

/// A set of analytic primitives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
}

impl Scene {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        for p in &primitives {
            p.validate()?;
        }
        Ok(Scene { primitives })
    }

    pub fn empty() -> Self {
        Scene {
            primitives: Vec::new(),
        }
    }

    /// Nearest intersection of the ray `origin + range · dir` (unit `dir`)
    /// with any primitive; ties keep the earliest primitive.
    pub fn cast_ray(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        for prim in &self.primitives {
            let hit = match prim {
                Primitive::Rect(r) => intersect_rectangle(r, origin, dir),
                Primitive::Box(b) => intersect_box(b, origin, dir),
            };
            if let Some(h) = hit {
                if best.map_or(true, |b| h.range < b.range) {
                    best = Some(h);
                }
            }
        }
        best
    }
}

const RAY_EPS: f64 = 1e-9;

fn intersect_rectangle(r: &Rectangle, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<RayHit> {
    let normal = r.edge_u.cross(&r.edge_v);
    let denom = dir.dot(&normal);
    if denom.abs() < 1e-14 {
        return None;
    }
    let t = (r.corner - origin).dot(&normal) / denom;
    if t <= RAY_EPS {
        return None;
    }
    let p = origin + dir * t - r.corner;
    let len_u2 = r.edge_u.norm_squared();
    let len_v2 = r.edge_v.norm_squared();
    let a = p.dot(&r.edge_u) / len_u2;
    let b = p.dot(&r.edge_v) / len_v2;
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return None;
    }
    Some(RayHit {
        range: t,
        albedo: r.texture.albedo_at(a * len_u2.sqrt()),
    })
}

fn intersect_box(b: &BoxPrimitive, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<RayHit> {
    // Slab test in the box frame.
    let inv = b.pose.inverse();
    let o = inv.apply(origin);
    let d = inv.rotation() * dir;
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    let mut entry_axis = 0usize;
    for axis in 0..3 {
        let h = b.half_extents[axis];
        if d[axis].abs() < 1e-14 {
            if o[axis].abs() > h {
                return None;
            }
            continue;
        }
        let mut t0 = (-h - o[axis]) / d[axis];
        let mut t1 = (h - o[axis]) / d[axis];
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_min {
            t_min = t0;
            entry_axis = axis;
        }
        t_max = t_max.min(t1);
        if t_min > t_max {
            return None;
        }
    }
    if t_min <= RAY_EPS || !t_min.is_finite() {
        return None;
    }
    let p = o + d * t_min;
    let face = match entry_axis {
        0 => {
            if p.x >= 0.0 {
                0
            } else {
                1
            }
        }
        1 => {
            if p.y >= 0.0 {
                2
            } else {
                3
            }
        }
        _ => {
            if p.z >= 0.0 {
                4
            } else {
                5
            }
        }
    };
    // Stripe coordinate: the first in-face axis.
    let s = match entry_axis {
        0 => p.y,
        1 => p.x,
        _ => p.x,
    };
    Some(RayHit {
        range: t_min,
        albedo: b.faces[face].albedo_at(s),
    })
}
