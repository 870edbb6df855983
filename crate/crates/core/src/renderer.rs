//! Volume-rendering compositor, image synthesis against any queryable scene,
//! and image-quality metrics.
//!
//! Pixel color is the transmittance-weighted sum of sample colors plus an
//! explicit background term: C = sum_i T_i a_i c_i + T_end * bg with
//! T_i = prod_{j<i} (1 - a_j). Keeping the background explicit makes the
//! weights a sub-probability distribution (they sum to exactly 1), which the
//! tests pin down.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{alpha_from_density, RadianceField};
use crate::math::scalar;
use crate::sampling::{pixel_ray, pixel_seed, ray_aabb, sample_ray, Camera};
use crate::{Error, Result};

/// Transmittance below which ray traversal stops when early termination is
/// enabled. Changes any pixel by less than 2e-4 per channel.
pub const EARLY_STOP_TRANSMITTANCE: f64 = 1e-4;

/// PSNR reported for a zero-MSE comparison (and upper cap for near-zero MSE).
pub const PSNR_CAP_DB: f64 = 99.0;

/// Row-major RGB image with channels in [0,1].
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Vec<[f32; 3]>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32) -> ImageBuffer {
        ImageBuffer {
            width,
            height,
            pixels: vec![[0.0; 3]; (width * height) as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<[f32; 3]>) -> Result<ImageBuffer> {
        if pixels.len() != (width * height) as usize {
            return Err(Error::InvalidArgument {
                field: "pixels",
                reason: "length must be width * height",
            });
        }
        Ok(ImageBuffer { width, height, pixels })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [f32; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [f32; 3]) {
        self.pixels[(y * self.width + x) as usize] = rgb;
    }

    pub fn pixels(&self) -> &[[f32; 3]] {
        &self.pixels
    }

    /// Bilinear sample at continuous pixel-index coordinates, clamped to the
    /// image. `(0, 0)` is the center of the top-left pixel.
    pub fn sample_bilinear(&self, x: f32, y: f32) -> [f32; 3] {
        let x = x.clamp(0.0, (self.width - 1) as f32);
        let y = y.clamp(0.0, (self.height - 1) as f32);
        let x0 = (x as u32).min(self.width - 1);
        let y0 = (y as u32).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f32;
        let fy = y - y0 as f32;
        let mut out = [0.0f32; 3];
        for ch in 0..3 {
            let top = self.pixel(x0, y0)[ch] * (1.0 - fx) + self.pixel(x1, y0)[ch] * fx;
            let bottom = self.pixel(x0, y1)[ch] * (1.0 - fx) + self.pixel(x1, y1)[ch] * fx;
            out[ch] = top * (1.0 - fy) + bottom * fy;
        }
        out
    }

    /// Rows as disjoint mutable slices, for data-parallel fills.
    pub fn rows_mut(&mut self) -> core::slice::ChunksMut<'_, [f32; 3]> {
        self.pixels.chunks_mut(self.width as usize)
    }
}

/// Rendering knobs shared by every image/ray synthesis path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderConfig {
    /// Sampling step length delta.
    pub step: f32,
    pub background: [f32; 3],
    pub t_near: f32,
    pub t_far: f32,
    pub jitter: bool,
    pub seed: u64,
    /// Stop traversal once transmittance falls below
    /// [`EARLY_STOP_TRANSMITTANCE`]. Disabled in oracle mode.
    pub early_stop: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            step: 0.04,
            background: [0.0, 0.0, 0.0],
            t_near: 0.0,
            t_far: 100.0,
            jitter: false,
            seed: 0,
            early_stop: true,
        }
    }
}

/// Front-to-back alpha compositing of an ordered sample list.
pub fn composite_ray(samples: &[(f32, [f32; 3])], background: [f32; 3]) -> [f32; 3] {
    let mut t = 1.0f64;
    let mut acc = [0.0f64; 3];
    for &(alpha, color) in samples {
        let w = t * alpha as f64;
        acc[0] += w * color[0] as f64;
        acc[1] += w * color[1] as f64;
        acc[2] += w * color[2] as f64;
        t *= 1.0 - alpha as f64;
    }
    [
        (acc[0] + t * background[0] as f64) as f32,
        (acc[1] + t * background[1] as f64) as f32,
        (acc[2] + t * background[2] as f64) as f32,
    ]
}

/// Per-sample compositing weights T_i * a_i and the final transmittance
/// T_end. The weights plus T_end sum to 1 (sub-probability distribution).
pub fn compositing_weights(alphas: &[f32]) -> (Vec<f32>, f32) {
    let mut t = 1.0f64;
    let mut weights = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        weights.push((t * alpha as f64) as f32);
        t *= 1.0 - alpha as f64;
    }
    (weights, t as f32)
}

/// Reverse-mode derivatives of [`composite_ray`] with respect to every
/// sample's alpha and color, given the upstream dLoss/dC.
pub struct CompositeGradient {
    pub d_alpha: Vec<f32>,
    pub d_color: Vec<[f32; 3]>,
}

pub fn composite_ray_gradient(
    samples: &[(f32, [f32; 3])],
    background: [f32; 3],
    d_output: [f32; 3],
) -> CompositeGradient {
    let n = samples.len();
    let mut d_alpha = vec![0.0f32; n];
    let mut d_color = vec![[0.0f32; 3]; n];

    // Prefix transmittances T_i.
    let mut trans = Vec::with_capacity(n);
    let mut t = 1.0f64;
    for &(alpha, _) in samples {
        trans.push(t);
        t *= 1.0 - alpha as f64;
    }

    // dL/dC . background, the contribution carried by the final term.
    let b = d_output[0] as f64 * background[0] as f64
        + d_output[1] as f64 * background[1] as f64
        + d_output[2] as f64 * background[2] as f64;

    // Backward pass. g holds sum_{k>i} P_{i,k} a_k W_k + P_{i,end} B where
    // P excludes the (1 - a_i) factor, so no division by (1 - a_i) is needed
    // and a_i = 1 stays well defined.
    let mut g = b;
    for i in (0..n).rev() {
        let (alpha, color) = samples[i];
        let w_i = d_output[0] as f64 * color[0] as f64
            + d_output[1] as f64 * color[1] as f64
            + d_output[2] as f64 * color[2] as f64;
        d_alpha[i] = (trans[i] * (w_i - g)) as f32;
        let coeff = (trans[i] * alpha as f64) as f32;
        d_color[i] = [
            coeff * d_output[0],
            coeff * d_output[1],
            coeff * d_output[2],
        ];
        g = alpha as f64 * w_i + (1.0 - alpha as f64) * g;
    }

    CompositeGradient { d_alpha, d_color }
}

/// Renders one pixel: generate the ray, clip it to the scene bounds, sample,
/// query, composite. Pure; identical inputs give bit-identical output.
pub fn render_pixel<S: RadianceField>(
    scene: &S,
    camera: &Camera,
    px: u32,
    py: u32,
    cfg: &RenderConfig,
) -> [f32; 3] {
    let ray = match pixel_ray(camera, px as f32, py as f32, cfg.t_near, cfg.t_far) {
        Ok(r) => r,
        Err(_) => return cfg.background,
    };
    let (t0, t1) = match ray_aabb(&ray, &scene.bounds()) {
        Some(span) => span,
        None => return cfg.background,
    };
    let samples = sample_ray(
        &ray.clipped(t0, t1),
        cfg.step,
        cfg.jitter,
        pixel_seed(cfg.seed, px, py),
    );

    let mut t = 1.0f64;
    let mut acc = [0.0f64; 3];
    for s in &samples {
        let fs = scene.sample_at(s.position);
        let alpha = alpha_from_density(fs.sigma, s.delta) as f64;
        let w = t * alpha;
        acc[0] += w * fs.color[0] as f64;
        acc[1] += w * fs.color[1] as f64;
        acc[2] += w * fs.color[2] as f64;
        t *= 1.0 - alpha;
        if cfg.early_stop && t < EARLY_STOP_TRANSMITTANCE {
            break;
        }
    }
    [
        (acc[0] + t * cfg.background[0] as f64) as f32,
        (acc[1] + t * cfg.background[1] as f64) as f32,
        (acc[2] + t * cfg.background[2] as f64) as f32,
    ]
}

/// Full-image synthesis. Pixels are independent; this sequential loop is the
/// reference any parallel driver must match bit-for-bit.
pub fn render_image<S: RadianceField>(scene: &S, camera: &Camera, cfg: &RenderConfig) -> ImageBuffer {
    let mut img = ImageBuffer::new(camera.width, camera.height);
    for py in 0..camera.height {
        for px in 0..camera.width {
            img.set_pixel(px, py, render_pixel(scene, camera, px, py, cfg));
        }
    }
    img
}

/// Peak signal-to-noise ratio in dB with peak 1.0, MSE over all channels.
/// Identical images return [`PSNR_CAP_DB`].
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch {
            a: (a.width, a.height),
            b: (b.width, b.height),
        });
    }
    let mut sum = 0.0f64;
    for (pa, pb) in a.pixels.iter().zip(&b.pixels) {
        for ch in 0..3 {
            let d = pa[ch] as f64 - pb[ch] as f64;
            sum += d * d;
        }
    }
    let mse = sum / (a.pixels.len() as f64 * 3.0);
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((-10.0 * scalar::log10_f64(mse)).min(PSNR_CAP_DB))
}
