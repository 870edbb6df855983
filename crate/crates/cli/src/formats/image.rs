//! Image output: binary PPM (P6, maxval 255) for viewing and a raw f32 dump
//! for exact metric computation.
//!
//! Raw dump layout, little-endian: u32 width, u32 height, then RGB f32
//! triples row-major. PSNR is always computed on the f32 representation;
//! the PPM is a quantized view (round(clamp(c, 0, 1) * 255)).

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use voxfuse_core::renderer::ImageBuffer;

pub fn encode_ppm(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.pixels().len() * 3);
    for px in img.pixels() {
        for ch in 0..3 {
            out.push((px[ch].clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

pub fn write_ppm(path: &Path, img: &ImageBuffer) -> Result<()> {
    fs::write(path, encode_ppm(img)).with_context(|| format!("writing {}", path.display()))
}

pub fn encode_raw_f32(img: &ImageBuffer) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + img.pixels().len() * 12);
    out.extend_from_slice(&img.width().to_le_bytes());
    out.extend_from_slice(&img.height().to_le_bytes());
    for px in img.pixels() {
        for ch in 0..3 {
            out.extend_from_slice(&px[ch].to_le_bytes());
        }
    }
    out
}

pub fn decode_raw_f32(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.len() < 8 {
        bail!("raw image truncated: {} bytes", bytes.len());
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let n = (width as usize) * (height as usize);
    let expected = 8 + n * 12;
    if bytes.len() != expected {
        bail!(
            "raw image size mismatch: {} bytes, expected {expected} for {width}x{height}",
            bytes.len()
        );
    }
    let mut pixels = Vec::with_capacity(n);
    let mut off = 8;
    for _ in 0..n {
        let mut px = [0.0f32; 3];
        for c in &mut px {
            *c = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            off += 4;
        }
        pixels.push(px);
    }
    ImageBuffer::from_pixels(width, height, pixels).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn write_raw_f32(path: &Path, img: &ImageBuffer) -> Result<()> {
    fs::write(path, encode_raw_f32(img)).with_context(|| format!("writing {}", path.display()))
}

pub fn read_raw_f32(path: &Path) -> Result<ImageBuffer> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_raw_f32(&bytes).with_context(|| format!("decoding {}", path.display()))
}
