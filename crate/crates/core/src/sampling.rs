//! Pinhole cameras, ray generation, ray-box intersection, and uniform point
//! sampling along rays.
//!
//! Camera frame convention: x right, y up, z forward (optical axis), so an
//! identity pose looks down world +Z with world +Y up. Pixel (px, py) maps to
//! the image-plane point (px + 0.5, py + 0.5) with py growing downward.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{Aabb, Mat3, Vec3};
use crate::{Error, Result};

/// Pinhole camera with a rigid camera-to-world pose.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub fx: f32,
    pub fy: f32,
    pub cx: f32,
    pub cy: f32,
    pub width: u32,
    pub height: u32,
    /// Rotation mapping camera-frame directions to world.
    pub rotation: Mat3,
    /// Camera origin in world space.
    pub translation: Vec3,
}

impl Camera {
    pub fn new(
        fx: f32,
        fy: f32,
        cx: f32,
        cy: f32,
        width: u32,
        height: u32,
        rotation: Mat3,
        translation: Vec3,
    ) -> Result<Camera> {
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::InvalidArgument {
                field: "focal length",
                reason: "fx and fy must be positive",
            });
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument {
                field: "image size",
                reason: "width and height must be positive",
            });
        }
        if !rotation.is_rotation(1e-4) {
            return Err(Error::InvalidArgument {
                field: "rotation",
                reason: "must be orthonormal with determinant +1",
            });
        }
        Ok(Camera {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            rotation,
            translation,
        })
    }

    /// Camera at `eye` looking toward `target`, with `up` fixing the roll.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        fx: f32,
        fy: f32,
        width: u32,
        height: u32,
    ) -> Result<Camera> {
        let forward = (target - eye).normalized();
        let right = up.cross(forward).normalized();
        let cam_up = forward.cross(right);
        let rotation = Mat3::from_columns(right, cam_up, forward);
        Camera::new(
            fx,
            fy,
            width as f32 * 0.5,
            height as f32 * 0.5,
            width,
            height,
            rotation,
            eye,
        )
    }

    /// Projects a world point to continuous pixel coordinates, or None when
    /// the point lies behind the camera. Inverse of [`pixel_ray`] up to the
    /// half-pixel center offset.
    pub fn project(&self, p: Vec3) -> Option<(f32, f32)> {
        let local = self.rotation.transpose_mul_vec(p - self.translation);
        if local.z <= 0.0 {
            return None;
        }
        let u = self.cx + self.fx * local.x / local.z;
        // Camera y is up; pixel y grows downward.
        let v = self.cy - self.fy * local.y / local.z;
        Some((u, v))
    }
}

/// A world-space ray with its traversal interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub direction: Vec3,
    pub t_near: f32,
    pub t_far: f32,
}

impl Ray {
    #[inline]
    pub fn at(&self, t: f32) -> Vec3 {
        self.origin + self.direction * t
    }

    /// Same ray restricted to [t0, t1].
    #[inline]
    pub fn clipped(&self, t0: f32, t1: f32) -> Ray {
        Ray {
            t_near: t0,
            t_far: t1,
            ..*self
        }
    }
}

/// A position on a ray together with its step length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint {
    pub position: Vec3,
    /// Ray parameter of the sample.
    pub t: f32,
    /// Step length delta in world units.
    pub delta: f32,
}

/// Ray through the center of pixel (px, py). `t_near`/`t_far` seed the ray's
/// traversal interval (callers typically clip it against scene bounds).
pub fn pixel_ray(camera: &Camera, px: f32, py: f32, t_near: f32, t_far: f32) -> Result<Ray> {
    if !(0.0..camera.width as f32).contains(&px) || !(0.0..camera.height as f32).contains(&py) {
        return Err(Error::PixelOutOfRange {
            px,
            py,
            width: camera.width,
            height: camera.height,
        });
    }
    let u = (px + 0.5 - camera.cx) / camera.fx;
    let v = (py + 0.5 - camera.cy) / camera.fy;
    // y up in camera frame, pixel y down in the image.
    let dir_cam = Vec3::new(u, -v, 1.0).normalized();
    Ok(Ray {
        origin: camera.translation,
        direction: camera.rotation.mul_vec(dir_cam),
        t_near,
        t_far,
    })
}

/// Slab-method ray/box intersection, intersected with the ray's own
/// [t_near, t_far]. Returns None when the overlap is empty. An origin inside
/// the box yields t_enter = t_near.
pub fn ray_aabb(ray: &Ray, bbox: &Aabb) -> Option<(f32, f32)> {
    let mut t0 = ray.t_near;
    let mut t1 = ray.t_far;
    for axis in 0..3 {
        let o = ray.origin.axis(axis);
        let d = ray.direction.axis(axis);
        let lo = bbox.min.axis(axis);
        let hi = bbox.max.axis(axis);
        if d.abs() < 1e-12 {
            // Parallel to the slab: either always inside it or never.
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (mut a, mut b) = ((lo - o) * inv, (hi - o) * inv);
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        t0 = t0.max(a);
        t1 = t1.min(b);
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Uniform samples over the ray's [t_near, t_far]: t = t_near + (i + u) * step
/// for i in 0..floor(len / step), with u = 0.5 when jitter is off and
/// u ~ U[0,1) from the seeded generator when on. Every sample carries
/// delta = step.
pub fn sample_ray(ray: &Ray, step: f32, jitter: bool, seed: u64) -> Vec<SamplePoint> {
    debug_assert!(step > 0.0);
    let len = ray.t_far - ray.t_near;
    if !(len > 0.0) {
        return Vec::new();
    }
    let count = (len / step) as usize;
    let mut rng = jitter.then(|| ChaCha8Rng::seed_from_u64(seed));
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let u: f32 = match &mut rng {
            Some(r) => r.gen::<f32>(),
            None => 0.5,
        };
        let t = ray.t_near + (i as f32 + u) * step;
        out.push(SamplePoint {
            position: ray.at(t),
            t,
            delta: step,
        });
    }
    out
}

/// Mixes a base seed with pixel coordinates so every pixel gets an
/// independent, worker-order-invariant jitter stream.
pub fn pixel_seed(seed: u64, px: u32, py: u32) -> u64 {
    let key = ((px as u64) << 32) | py as u64;
    splitmix64(seed ^ splitmix64(key))
}

/// Mixes a base seed with an iteration/ray pair for training-time jitter.
pub fn stream_seed(seed: u64, salt: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_camera() -> Camera {
        Camera::new(
            100.0,
            100.0,
            64.0,
            64.0,
            128,
            128,
            Mat3::IDENTITY,
            Vec3::ZERO,
        )
        .unwrap()
    }

    #[test]
    fn principal_pixel_is_optical_axis() {
        let cam = test_camera();
        // Pixel whose center lands on the principal point: px + 0.5 = cx.
        let ray = pixel_ray(&cam, 63.5, 63.5, 0.0, 10.0).unwrap();
        assert!((ray.direction - Vec3::new(0.0, 0.0, 1.0)).length() < 1e-6);
    }

    #[test]
    fn unit_lateral_offset_gives_diagonal_ray() {
        // Image-plane offset of exactly fx pixels right of the principal
        // point back-projects to a direction proportional to (1, 0, 1).
        let cam = Camera::new(
            50.0,
            50.0,
            27.5,
            63.5,
            128,
            128,
            Mat3::IDENTITY,
            Vec3::ZERO,
        )
        .unwrap();
        let ray = pixel_ray(&cam, 77.0, 63.0, 0.0, 10.0).unwrap();
        let expect = Vec3::new(1.0, 0.0, 1.0).normalized();
        assert!((ray.direction - expect).length() < 1e-6);
    }

    #[test]
    fn directions_are_normalized() {
        let cam = Camera::look_at(
            Vec3::new(1.0, 2.0, -3.0),
            Vec3::ZERO,
            Vec3::new(0.0, 1.0, 0.0),
            150.0,
            150.0,
            200,
            100,
        )
        .unwrap();
        for (px, py) in [(0.0, 0.0), (199.0, 99.0), (57.0, 13.0)] {
            let ray = pixel_ray(&cam, px, py, 0.0, 10.0).unwrap();
            assert!((ray.direction.length() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn out_of_range_pixel_errors() {
        let cam = test_camera();
        assert!(pixel_ray(&cam, 128.0, 0.0, 0.0, 10.0).is_err());
        assert!(pixel_ray(&cam, -0.5, 0.0, 0.0, 10.0).is_err());
        assert!(pixel_ray(&cam, 0.0, 500.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn project_round_trips_pixel_centers() {
        let cam = Camera::look_at(
            Vec3::new(0.3, 1.2, -2.0),
            Vec3::new(0.0, 0.2, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            180.0,
            180.0,
            200,
            200,
        )
        .unwrap();
        for (px, py) in [(10.0f32, 190.0f32), (100.0, 100.0), (3.0, 7.0)] {
            let ray = pixel_ray(&cam, px, py, 0.0, 10.0).unwrap();
            let p = ray.at(2.37);
            let (u, v) = cam.project(p).unwrap();
            assert!((u - (px + 0.5)).abs() < 1e-4, "u {u} px {px}");
            assert!((v - (py + 0.5)).abs() < 1e-4, "v {v} py {py}");
        }
    }

    #[test]
    fn slab_intersection_hand_case() {
        let ray = Ray {
            origin: Vec3::new(-2.0, 0.0, 0.0),
            direction: Vec3::new(1.0, 0.0, 0.0),
            t_near: 0.0,
            t_far: 100.0,
        };
        let bbox = Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5));
        let (t0, t1) = ray_aabb(&ray, &bbox).unwrap();
        assert!((t0 - 1.5).abs() < 1e-6);
        assert!((t1 - 2.5).abs() < 1e-6);
    }

    #[test]
    fn parallel_ray_outside_slab_misses() {
        let ray = Ray {
            origin: Vec3::new(0.0, 2.0, 0.0),
            direction: Vec3::new(1.0, 0.0, 0.0),
            t_near: 0.0,
            t_far: 100.0,
        };
        let bbox = Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5));
        assert_eq!(ray_aabb(&ray, &bbox), None);
    }

    #[test]
    fn origin_inside_box_clamps_to_t_near() {
        let ray = Ray {
            origin: Vec3::ZERO,
            direction: Vec3::new(0.0, 0.0, 1.0),
            t_near: 0.0,
            t_far: 100.0,
        };
        let bbox = Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5));
        let (t0, t1) = ray_aabb(&ray, &bbox).unwrap();
        assert_eq!(t0, 0.0);
        assert!((t1 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn degenerate_interval_yields_no_samples() {
        let ray = Ray {
            origin: Vec3::ZERO,
            direction: Vec3::new(0.0, 0.0, 1.0),
            t_near: 0.0,
            t_far: 0.2,
        };
        assert!(sample_ray(&ray, 0.25, false, 0).is_empty());
    }

    #[test]
    fn uniform_samples_land_on_cell_centers() {
        let ray = Ray {
            origin: Vec3::ZERO,
            direction: Vec3::new(0.0, 0.0, 1.0),
            t_near: 0.0,
            t_far: 1.0,
        };
        let samples = sample_ray(&ray, 0.25, false, 0);
        let expect = [0.125f32, 0.375, 0.625, 0.875];
        assert_eq!(samples.len(), 4);
        for (s, e) in samples.iter().zip(expect) {
            assert!((s.t - e).abs() < 1e-6);
            assert_eq!(s.delta, 0.25);
            assert!((s.position - ray.at(e)).length() < 1e-6);
        }
    }

    #[test]
    fn jittered_sampling_is_deterministic_per_seed() {
        let ray = Ray {
            origin: Vec3::new(0.1, -0.2, 0.3),
            direction: Vec3::new(0.0, 1.0, 0.0),
            t_near: 0.5,
            t_far: 3.0,
        };
        let a = sample_ray(&ray, 0.1, true, 99);
        let b = sample_ray(&ray, 0.1, true, 99);
        assert_eq!(a, b);
        let c = sample_ray(&ray, 0.1, true, 100);
        assert_ne!(a, c);
        // Jittered t stays within each cell.
        for (i, s) in a.iter().enumerate() {
            assert!(s.t >= 0.5 + i as f32 * 0.1);
            assert!(s.t < 0.5 + (i as f32 + 1.0) * 0.1);
        }
    }

    #[test]
    fn total_step_length_bounded_by_interval() {
        let ray = Ray {
            origin: Vec3::ZERO,
            direction: Vec3::new(1.0, 0.0, 0.0),
            t_near: 0.3,
            t_far: 2.11,
        };
        let step = 0.07;
        let samples = sample_ray(&ray, step, false, 0);
        let total: f32 = samples.iter().map(|s| s.delta).sum();
        assert!(total <= (ray.t_far - ray.t_near) + step);
    }
}
