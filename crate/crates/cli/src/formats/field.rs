//! Binary field file format.
//!
//! Layout, all little-endian:
//! - magic `FRF1` (4 bytes)
//! - resolution: 3 x u32 (Nx, Ny, Nz)
//! - bounding box: 6 x f32 (min xyz, then max xyz)
//! - density grid: Nx*Ny*Nz x f32, x-fastest
//! - color grid: Nx*Ny*Nz x 3 f32 interleaved RGB, same order
//!
//! Round trips are bit-exact; the serialized size equals
//! `VoxelField::footprint_bytes`.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use voxfuse_core::field::VoxelField;
use voxfuse_core::math::{Aabb, Vec3};

pub const MAGIC: &[u8; 4] = b"FRF1";

pub fn encode_field(field: &VoxelField) -> Vec<u8> {
    let mut out = Vec::with_capacity(field.footprint_bytes());
    out.extend_from_slice(MAGIC);
    for n in field.resolution() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    let bb = field.bounds();
    for v in [bb.min.x, bb.min.y, bb.min.z, bb.max.x, bb.max.y, bb.max.z] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &d in field.raw_density() {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for &c in field.raw_color() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    debug_assert_eq!(out.len(), field.footprint_bytes());
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<VoxelField> {
    if bytes.len() < voxfuse_core::field::FILE_HEADER_BYTES {
        bail!("field file truncated: {} bytes", bytes.len());
    }
    if &bytes[0..4] != MAGIC {
        bail!("bad magic: expected FRF1");
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let f32_at = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());

    let res = [u32_at(4) as usize, u32_at(8) as usize, u32_at(12) as usize];
    let bbox = Aabb::new(
        Vec3::new(f32_at(16), f32_at(20), f32_at(24)),
        Vec3::new(f32_at(28), f32_at(32), f32_at(36)),
    );
    let n = res[0]
        .checked_mul(res[1])
        .and_then(|v| v.checked_mul(res[2]))
        .context("resolution overflow")?;
    let expected = voxfuse_core::field::FILE_HEADER_BYTES + n * 16;
    if bytes.len() != expected {
        bail!(
            "field file size mismatch: {} bytes, expected {expected} for resolution {res:?}",
            bytes.len()
        );
    }
    let mut density = Vec::with_capacity(n);
    let mut off = voxfuse_core::field::FILE_HEADER_BYTES;
    for _ in 0..n {
        density.push(f32_at(off));
        off += 4;
    }
    let mut color = Vec::with_capacity(3 * n);
    for _ in 0..3 * n {
        color.push(f32_at(off));
        off += 4;
    }
    VoxelField::from_raw_grids(bbox, res, density, color)
        .map_err(|e| anyhow::anyhow!("invalid field file: {e}"))
}

pub fn write_field(path: &Path, field: &VoxelField) -> Result<()> {
    fs::write(path, encode_field(field))
        .with_context(|| format!("writing field file {}", path.display()))
}

pub fn read_field(path: &Path) -> Result<VoxelField> {
    let bytes =
        fs::read(path).with_context(|| format!("reading field file {}", path.display()))?;
    decode_field(&bytes).with_context(|| format!("decoding field file {}", path.display()))
}
