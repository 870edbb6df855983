//! Dense voxel radiance field: raw density/color parameters on a vertex
//! lattice, trilinearly interpolated and activation-mapped at query time.
//!
//! Raw parameters are unconstrained; queries interpolate the raw values and
//! then apply softplus (density) and sigmoid (color), so activated density is
//! always >= 0 and activated color always lies in [0,1]^3. Interpolation
//! happens before activation, which keeps the parameter gradient an exact
//! chain rule through the trilinear weights.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{scalar, Aabb, Vec3};
use crate::{Error, Result};

/// Raw density written into vertices excluded by [`crop_field`];
/// softplus(-20) < 1e-8, i.e. effectively transparent but still finite.
pub const CROP_RAW_DENSITY: f32 = -20.0;

/// Serialized header size of the field file format: 4-byte magic,
/// 3 x u32 resolution, 6 x f32 bounding box.
pub const FILE_HEADER_BYTES: usize = 4 + 12 + 24;

/// Bytes per lattice vertex in the serialized payload: 4 f32 channels
/// (density + RGB).
pub const BYTES_PER_VERTEX: usize = 16;

/// Numerically stable ln(1 + e^x).
#[inline]
pub fn softplus(x: f32) -> f32 {
    if x > 0.0 {
        x + scalar::ln_1p(scalar::exp(-x))
    } else {
        scalar::ln_1p(scalar::exp(x))
    }
}

/// Inverse of [`softplus`]: ln(e^y - 1) for y > 0.
pub fn softplus_inv(y: f32) -> f32 {
    if y > 0.5 {
        y + scalar::ln(-scalar::exp_m1(-y))
    } else {
        scalar::ln(scalar::exp_m1(y))
    }
}

/// Logistic function, stable in both tails.
#[inline]
pub fn sigmoid(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + scalar::exp(-x))
    } else {
        let e = scalar::exp(x);
        e / (1.0 + e)
    }
}

/// Inverse of [`sigmoid`], clamped away from 0/1 so the result stays finite.
pub fn logit(y: f32) -> f32 {
    let y = y.clamp(1e-9, 1.0 - 1e-7);
    scalar::ln(y) - scalar::ln_1p(-y)
}

/// Per-sample opacity for a step of length `delta` through density `sigma`:
/// alpha = 1 - e^(-sigma * delta).
#[inline]
pub fn alpha_from_density(sigma: f32, delta: f32) -> f32 {
    debug_assert!(sigma >= 0.0 && delta > 0.0);
    -scalar::exp_m1(-sigma * delta)
}

/// An activated field query result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    /// Volumetric density per unit world length, >= 0.
    pub sigma: f32,
    /// RGB in [0,1]^3.
    pub color: [f32; 3],
}

impl FieldSample {
    pub const TRANSPARENT: FieldSample = FieldSample {
        sigma: 0.0,
        color: [0.0, 0.0, 0.0],
    };
}

/// Anything that answers activated (sigma, color) queries over a bounded
/// region. Implemented by [`VoxelField`] and by the composer's scene type.
pub trait RadianceField {
    fn sample_at(&self, p: Vec3) -> FieldSample;
    /// Region outside of which `sample_at` returns vacuum.
    fn bounds(&self) -> Aabb;
}

impl<T: RadianceField + ?Sized> RadianceField for &T {
    fn sample_at(&self, p: Vec3) -> FieldSample {
        (**self).sample_at(p)
    }
    fn bounds(&self) -> Aabb {
        (**self).bounds()
    }
}

/// Sparse gradient of one activated query with respect to the raw parameters
/// of the 8 surrounding lattice vertices.
///
/// For vertex slot `i`: d(sigma)/d(raw_density[v_i]) = `weights[i] * dsigma_draw`
/// and d(color[ch])/d(raw_color[v_i][ch]) = `weights[i] * dcolor_draw[ch]`.
/// All other parameters have zero gradient.
#[derive(Clone, Copy, Debug)]
pub struct ParamGradient {
    /// Linear vertex indices of the surrounding cell corners.
    pub vertices: [u32; 8],
    /// Trilinear weights (convex: non-negative, sum to 1).
    pub weights: [f32; 8],
    /// Softplus derivative at the interpolated raw density.
    pub dsigma_draw: f32,
    /// Sigmoid derivative at the interpolated raw color, per channel.
    pub dcolor_draw: [f32; 3],
}

struct CellWeights {
    idx: [u32; 8],
    w: [f32; 8],
}

/// Dense lattice of raw density and raw color parameters over a world-space
/// box. Vertices sit at the box corners: resolution N means N - 1 cells per
/// axis. Storage is x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelField {
    bbox: Aabb,
    resolution: [usize; 3],
    density: Vec<f32>,
    color: Vec<f32>,
    // (n - 1) / extent per axis, cached for queries.
    grid_scale: Vec3,
}

impl VoxelField {
    /// Creates a field with all raw parameters zero.
    pub fn new(bbox: Aabb, resolution: [usize; 3]) -> Result<Self> {
        let n = Self::validate(bbox, resolution)?;
        Ok(VoxelField {
            bbox,
            resolution,
            density: vec![0.0; n],
            color: vec![0.0; 3 * n],
            grid_scale: Self::compute_grid_scale(bbox, resolution),
        })
    }

    /// Wraps existing raw grids. `density` must have Nx*Ny*Nz entries and
    /// `color` three per vertex, both x-fastest.
    pub fn from_raw_grids(
        bbox: Aabb,
        resolution: [usize; 3],
        density: Vec<f32>,
        color: Vec<f32>,
    ) -> Result<Self> {
        let n = Self::validate(bbox, resolution)?;
        if density.len() != n {
            return Err(Error::InvalidArgument {
                field: "density_grid",
                reason: "length must be Nx*Ny*Nz",
            });
        }
        if color.len() != 3 * n {
            return Err(Error::InvalidArgument {
                field: "color_grid",
                reason: "length must be 3*Nx*Ny*Nz",
            });
        }
        Ok(VoxelField {
            bbox,
            resolution,
            density,
            color,
            grid_scale: Self::compute_grid_scale(bbox, resolution),
        })
    }

    fn validate(bbox: Aabb, resolution: [usize; 3]) -> Result<usize> {
        if !bbox.is_valid() {
            return Err(Error::InvalidArgument {
                field: "bbox",
                reason: "min must be strictly below max componentwise",
            });
        }
        if resolution.iter().any(|&n| n < 2) {
            return Err(Error::InvalidArgument {
                field: "resolution",
                reason: "each axis needs at least 2 vertices",
            });
        }
        Ok(resolution[0] * resolution[1] * resolution[2])
    }

    fn compute_grid_scale(bbox: Aabb, resolution: [usize; 3]) -> Vec3 {
        let e = bbox.extent();
        Vec3::new(
            (resolution[0] - 1) as f32 / e.x,
            (resolution[1] - 1) as f32 / e.y,
            (resolution[2] - 1) as f32 / e.z,
        )
    }

    #[inline]
    pub fn bounds(&self) -> Aabb {
        self.bbox
    }

    #[inline]
    pub fn resolution(&self) -> [usize; 3] {
        self.resolution
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.resolution[0] * self.resolution[1] * self.resolution[2]
    }

    /// World-space edge lengths of one lattice cell.
    pub fn voxel_size(&self) -> Vec3 {
        let e = self.bbox.extent();
        Vec3::new(
            e.x / (self.resolution[0] - 1) as f32,
            e.y / (self.resolution[1] - 1) as f32,
            e.z / (self.resolution[2] - 1) as f32,
        )
    }

    #[inline]
    pub fn vertex_index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.resolution[1] + j) * self.resolution[0] + i
    }

    /// World position of lattice vertex (i, j, k).
    pub fn vertex_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let e = self.bbox.extent();
        Vec3::new(
            self.bbox.min.x + e.x * (i as f32 / (self.resolution[0] - 1) as f32),
            self.bbox.min.y + e.y * (j as f32 / (self.resolution[1] - 1) as f32),
            self.bbox.min.z + e.z * (k as f32 / (self.resolution[2] - 1) as f32),
        )
    }

    pub fn raw_density(&self) -> &[f32] {
        &self.density
    }

    pub fn raw_density_mut(&mut self) -> &mut [f32] {
        &mut self.density
    }

    pub fn raw_color(&self) -> &[f32] {
        &self.color
    }

    pub fn raw_color_mut(&mut self) -> &mut [f32] {
        &mut self.color
    }

    fn cell_weights(&self, p: Vec3) -> Option<CellWeights> {
        if !self.bbox.contains(p) {
            return None;
        }
        let g = (p - self.bbox.min).mul_componentwise(self.grid_scale);
        let [nx, ny, _] = self.resolution;

        let i0 = (scalar::floor(g.x) as usize).min(self.resolution[0] - 2);
        let j0 = (scalar::floor(g.y) as usize).min(self.resolution[1] - 2);
        let k0 = (scalar::floor(g.z) as usize).min(self.resolution[2] - 2);
        let fx = g.x - i0 as f32;
        let fy = g.y - j0 as f32;
        let fz = g.z - k0 as f32;
        let (gx, gy, gz) = (1.0 - fx, 1.0 - fy, 1.0 - fz);

        let base = ((k0 * ny + j0) * nx + i0) as u32;
        let sy = nx as u32;
        let sz = (nx * ny) as u32;
        Some(CellWeights {
            idx: [
                base,
                base + 1,
                base + sy,
                base + sy + 1,
                base + sz,
                base + sz + 1,
                base + sz + sy,
                base + sz + sy + 1,
            ],
            w: [
                gx * gy * gz,
                fx * gy * gz,
                gx * fy * gz,
                fx * fy * gz,
                gx * gy * fz,
                fx * gy * fz,
                gx * fy * fz,
                fx * fy * fz,
            ],
        })
    }

    /// Trilinearly interpolated raw (pre-activation) values, or None outside
    /// the box. Used for resampling a field onto another lattice.
    pub fn query_raw(&self, p: Vec3) -> Option<(f32, [f32; 3])> {
        let cw = self.cell_weights(p)?;
        let mut d = 0.0f32;
        let mut rgb = [0.0f32; 3];
        for s in 0..8 {
            let v = cw.idx[s] as usize;
            let w = cw.w[s];
            d += w * self.density[v];
            let c = &self.color[3 * v..3 * v + 3];
            rgb[0] += w * c[0];
            rgb[1] += w * c[1];
            rgb[2] += w * c[2];
        }
        Some((d, rgb))
    }

    /// Activated query. Total function: points outside the bounding box are
    /// vacuum (sigma = 0, color black).
    #[inline]
    pub fn query_point(&self, p: Vec3) -> FieldSample {
        match self.query_raw(p) {
            None => FieldSample::TRANSPARENT,
            Some((d, rgb)) => FieldSample {
                sigma: softplus(d),
                color: [sigmoid(rgb[0]), sigmoid(rgb[1]), sigmoid(rgb[2])],
            },
        }
    }

    /// Activated query plus the sparse gradient of (sigma, color) with
    /// respect to the raw parameters of the surrounding cell. Errors outside
    /// the bounding box, where no vertex carries weight.
    pub fn query_with_param_gradient(&self, p: Vec3) -> Result<(FieldSample, ParamGradient)> {
        let cw = self.cell_weights(p).ok_or(Error::OutOfBounds {
            position: p.to_array(),
        })?;
        let mut d = 0.0f32;
        let mut rgb = [0.0f32; 3];
        for s in 0..8 {
            let v = cw.idx[s] as usize;
            let w = cw.w[s];
            d += w * self.density[v];
            let c = &self.color[3 * v..3 * v + 3];
            rgb[0] += w * c[0];
            rgb[1] += w * c[1];
            rgb[2] += w * c[2];
        }
        let sig = [sigmoid(rgb[0]), sigmoid(rgb[1]), sigmoid(rgb[2])];
        let sample = FieldSample {
            sigma: softplus(d),
            color: sig,
        };
        let grad = ParamGradient {
            vertices: cw.idx,
            weights: cw.w,
            // d softplus(x) / dx = sigmoid(x)
            dsigma_draw: sigmoid(d),
            // d sigmoid(x) / dx = s (1 - s)
            dcolor_draw: [
                sig[0] * (1.0 - sig[0]),
                sig[1] * (1.0 - sig[1]),
                sig[2] * (1.0 - sig[2]),
            ],
        };
        Ok((sample, grad))
    }

    /// Gradient only; see [`Self::query_with_param_gradient`].
    pub fn query_param_gradient(&self, p: Vec3) -> Result<ParamGradient> {
        self.query_with_param_gradient(p).map(|(_, g)| g)
    }

    /// Returns a copy whose raw density is forced to [`CROP_RAW_DENSITY`] at
    /// every vertex outside `sub_bbox`; vertices inside are bit-identical.
    /// Errors when `sub_bbox` covers no lattice vertex.
    pub fn crop_field(&self, sub_bbox: Aabb) -> Result<VoxelField> {
        let mut out = self.clone();
        let mut kept = 0usize;
        for k in 0..self.resolution[2] {
            for j in 0..self.resolution[1] {
                for i in 0..self.resolution[0] {
                    let pos = self.vertex_position(i, j, k);
                    if sub_bbox.contains(pos) {
                        kept += 1;
                    } else {
                        out.density[self.vertex_index(i, j, k)] = CROP_RAW_DENSITY;
                    }
                }
            }
        }
        if kept == 0 {
            return Err(Error::EmptyCrop);
        }
        Ok(out)
    }

    /// Exact size in bytes of the serialized parameter payload plus the fixed
    /// header. Depends only on resolution.
    pub fn footprint_bytes(&self) -> usize {
        FILE_HEADER_BYTES + self.vertex_count() * BYTES_PER_VERTEX
    }
}

impl RadianceField for VoxelField {
    #[inline]
    fn sample_at(&self, p: Vec3) -> FieldSample {
        self.query_point(p)
    }
    #[inline]
    fn bounds(&self) -> Aabb {
        self.bbox
    }
}
