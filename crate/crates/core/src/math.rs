//! Minimal 3D math: vectors, rotation matrices, axis-aligned boxes, and the
//! scalar functions the rest of the crate needs in both std and no_std builds.

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Scalar float routines, routed through std intrinsics when available and
/// libm otherwise.
pub mod scalar {
    #[cfg(feature = "std")]
    mod imp {
        #[inline]
        pub fn exp(x: f32) -> f32 {
            x.exp()
        }
        #[inline]
        pub fn exp_m1(x: f32) -> f32 {
            x.exp_m1()
        }
        #[inline]
        pub fn ln(x: f32) -> f32 {
            x.ln()
        }
        #[inline]
        pub fn ln_1p(x: f32) -> f32 {
            x.ln_1p()
        }
        #[inline]
        pub fn sqrt(x: f32) -> f32 {
            x.sqrt()
        }
        #[inline]
        pub fn floor(x: f32) -> f32 {
            x.floor()
        }
        #[inline]
        pub fn round(x: f32) -> f32 {
            x.round()
        }
        #[inline]
        pub fn abs(x: f32) -> f32 {
            x.abs()
        }
        #[inline]
        pub fn sin(x: f32) -> f32 {
            x.sin()
        }
        #[inline]
        pub fn cos(x: f32) -> f32 {
            x.cos()
        }
        #[inline]
        pub fn log10_f64(x: f64) -> f64 {
            x.log10()
        }
    }

    #[cfg(not(feature = "std"))]
    mod imp {
        #[inline]
        pub fn exp(x: f32) -> f32 {
            libm::expf(x)
        }
        #[inline]
        pub fn exp_m1(x: f32) -> f32 {
            libm::expm1f(x)
        }
        #[inline]
        pub fn ln(x: f32) -> f32 {
            libm::logf(x)
        }
        #[inline]
        pub fn ln_1p(x: f32) -> f32 {
            libm::log1pf(x)
        }
        #[inline]
        pub fn sqrt(x: f32) -> f32 {
            libm::sqrtf(x)
        }
        #[inline]
        pub fn floor(x: f32) -> f32 {
            libm::floorf(x)
        }
        #[inline]
        pub fn round(x: f32) -> f32 {
            libm::roundf(x)
        }
        #[inline]
        pub fn abs(x: f32) -> f32 {
            libm::fabsf(x)
        }
        #[inline]
        pub fn sin(x: f32) -> f32 {
            libm::sinf(x)
        }
        #[inline]
        pub fn cos(x: f32) -> f32 {
            libm::cosf(x)
        }
        #[inline]
        pub fn log10_f64(x: f64) -> f64 {
            libm::log10(x)
        }
    }

    pub use imp::*;

    /// Integer power by squaring, accumulated in f64 for determinism.
    pub fn powi(base: f32, mut exp: u64) -> f32 {
        let mut acc = 1.0f64;
        let mut b = base as f64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= b;
            }
            b *= b;
            exp >>= 1;
        }
        acc as f32
    }
}

/// A 3-component f32 vector (points and directions).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3 {
    pub x: f32,
    pub y: f32,
    pub z: f32,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f32, y: f32, z: f32) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub const fn splat(v: f32) -> Self {
        Vec3 { x: v, y: v, z: v }
    }

    #[inline]
    pub fn dot(self, rhs: Vec3) -> f32 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    #[inline]
    pub fn cross(self, rhs: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * rhs.z - self.z * rhs.y,
            y: self.z * rhs.x - self.x * rhs.z,
            z: self.x * rhs.y - self.y * rhs.x,
        }
    }

    #[inline]
    pub fn length_squared(self) -> f32 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f32 {
        scalar::sqrt(self.length_squared())
    }

    #[inline]
    pub fn normalized(self) -> Vec3 {
        self / self.length()
    }

    #[inline]
    pub fn min(self, rhs: Vec3) -> Vec3 {
        Vec3 {
            x: self.x.min(rhs.x),
            y: self.y.min(rhs.y),
            z: self.z.min(rhs.z),
        }
    }

    #[inline]
    pub fn max(self, rhs: Vec3) -> Vec3 {
        Vec3 {
            x: self.x.max(rhs.x),
            y: self.y.max(rhs.y),
            z: self.z.max(rhs.z),
        }
    }

    #[inline]
    pub fn mul_componentwise(self, rhs: Vec3) -> Vec3 {
        Vec3 {
            x: self.x * rhs.x,
            y: self.y * rhs.y,
            z: self.z * rhs.z,
        }
    }

    #[inline]
    pub fn to_array(self) -> [f32; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [f32; 3]) -> Vec3 {
        Vec3::new(a[0], a[1], a[2])
    }

    #[inline]
    pub fn axis(self, i: usize) -> f32 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f32> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, rhs: f32) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Mul<Vec3> for f32 {
    type Output = Vec3;
    #[inline]
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

impl Div<f32> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, rhs: f32) -> Vec3 {
        Vec3::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix. Used for camera and placement rotations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3 {
    pub rows: [[f32; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    #[inline]
    pub const fn from_rows(rows: [[f32; 3]; 3]) -> Self {
        Mat3 { rows }
    }

    /// Builds the matrix whose columns are the given vectors.
    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3 {
            rows: [
                [c0.x, c1.x, c2.x],
                [c0.y, c1.y, c2.y],
                [c0.z, c1.z, c2.z],
            ],
        }
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3 {
            x: self.rows[0][0] * v.x + self.rows[0][1] * v.y + self.rows[0][2] * v.z,
            y: self.rows[1][0] * v.x + self.rows[1][1] * v.y + self.rows[1][2] * v.z,
            z: self.rows[2][0] * v.x + self.rows[2][1] * v.y + self.rows[2][2] * v.z,
        }
    }

    /// Multiplies the transpose by a vector. For rotations this is the
    /// inverse map, without materializing the transposed matrix.
    #[inline]
    pub fn transpose_mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3 {
            x: self.rows[0][0] * v.x + self.rows[1][0] * v.y + self.rows[2][0] * v.z,
            y: self.rows[0][1] * v.x + self.rows[1][1] * v.y + self.rows[2][1] * v.z,
            z: self.rows[0][2] * v.x + self.rows[1][2] * v.y + self.rows[2][2] * v.z,
        }
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn mul_mat(&self, rhs: &Mat3) -> Mat3 {
        let mut out = [[0.0f32; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.rows[i][0] * rhs.rows[0][j]
                    + self.rows[i][1] * rhs.rows[1][j]
                    + self.rows[i][2] * rhs.rows[2][j];
            }
        }
        Mat3 { rows: out }
    }

    pub fn determinant(&self) -> f32 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    pub fn rotation_x(angle: f32) -> Mat3 {
        let (s, c) = (scalar::sin(angle), scalar::cos(angle));
        Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    pub fn rotation_y(angle: f32) -> Mat3 {
        let (s, c) = (scalar::sin(angle), scalar::cos(angle));
        Mat3::from_rows([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    pub fn rotation_z(angle: f32) -> Mat3 {
        let (s, c) = (scalar::sin(angle), scalar::cos(angle));
        Mat3::from_rows([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// True when columns are orthonormal and the determinant is +1, to `tol`.
    pub fn is_rotation(&self, tol: f32) -> bool {
        let t = self.mul_mat(&self.transpose());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                if scalar::abs(t.rows[i][j] - expect) > tol {
                    return false;
                }
            }
        }
        scalar::abs(self.determinant() - 1.0) <= tol
    }
}

/// Axis-aligned box in world space, inclusive of its boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    #[inline]
    pub const fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    #[inline]
    pub fn is_valid(&self) -> bool {
        self.min.x < self.max.x && self.min.y < self.max.y && self.min.z < self.max.z
    }

    #[inline]
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && self.max.x >= other.min.x
            && self.min.y <= other.max.y
            && self.max.y >= other.min.y
            && self.min.z <= other.max.z
            && self.max.z >= other.min.z
    }

    #[inline]
    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    #[inline]
    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (lo, hi) = (self.min, self.max);
        [
            Vec3::new(lo.x, lo.y, lo.z),
            Vec3::new(hi.x, lo.y, lo.z),
            Vec3::new(lo.x, hi.y, lo.z),
            Vec3::new(hi.x, hi.y, lo.z),
            Vec3::new(lo.x, lo.y, hi.z),
            Vec3::new(hi.x, lo.y, hi.z),
            Vec3::new(lo.x, hi.y, hi.z),
            Vec3::new(hi.x, hi.y, hi.z),
        ]
    }
}
