//! Scaling benchmark: for each scene size N, time composed rendering, fuse,
//! time fused rendering, and record payload bytes plus fused-vs-composed
//! quality. Timing covers render calls only (no file IO) and averages over
//! `FRAMES_TIMED` frames after one warm-up frame.

use std::time::Instant;

use anyhow::Result;
use voxfuse_core::composer::ComposedScene;
use voxfuse_core::distiller::fuse;
use voxfuse_core::field::{RadianceField, VoxelField};
use voxfuse_core::renderer::psnr;
use voxfuse_core::sampling::Camera;
use voxfuse_core::scenegen::make_bench_scene;

use crate::formats::config::RunConfig;
use crate::parallel::render_image_parallel;
use crate::report::{BenchMode, BenchReport, BenchRow};

pub const FRAMES_TIMED: usize = 5;

/// Per-frame wall milliseconds over the camera list: first frame warms up,
/// the next `FRAMES_TIMED` are averaged. Returns the timing and the timed
/// frames (for quality comparisons).
pub fn time_renders<S: RadianceField + Sync>(
    scene: &S,
    cameras: &[Camera],
    cfg: &RunConfig,
    workers: usize,
) -> (f64, Vec<voxfuse_core::renderer::ImageBuffer>) {
    assert!(
        cameras.len() >= FRAMES_TIMED + 1,
        "need a warm-up frame plus {FRAMES_TIMED} timed frames"
    );
    let _warmup = render_image_parallel(scene, &cameras[0], &cfg.render, workers);
    let mut frames = Vec::with_capacity(FRAMES_TIMED);
    let mut total_ms = 0.0f64;
    for cam in &cameras[1..=FRAMES_TIMED] {
        let t = Instant::now();
        let img = render_image_parallel(scene, cam, &cfg.render, workers);
        total_ms += t.elapsed().as_secs_f64() * 1e3;
        frames.push(img);
    }
    (total_ms / FRAMES_TIMED as f64, frames)
}

/// Sum of serialized payload bytes over all live entries of a composition.
pub fn composed_payload_bytes(scene: &ComposedScene) -> usize {
    scene
        .entries()
        .iter()
        .map(|e| e.field.footprint_bytes())
        .sum()
}

/// One benchmark scene size: times both modes and fuses in between.
pub fn bench_scene_size(
    num_fields: usize,
    seed: u64,
    cfg: &RunConfig,
    workers: usize,
) -> Result<(Vec<BenchRow>, VoxelField)> {
    let gen = make_bench_scene(num_fields, seed)?;
    let cameras = &gen.train_cameras;

    let (composed_ms, composed_frames) = time_renders(&gen.scene, cameras, cfg, workers);
    let composed_row = BenchRow {
        num_fields,
        mode: BenchMode::Composed,
        render_ms_per_frame: composed_ms,
        field_payload_bytes: composed_payload_bytes(&gen.scene),
        psnr_vs_composed: None,
    };

    let fused = fuse(&gen.scene, cameras, &cfg.distill)?;
    let (fused_ms, fused_frames) = time_renders(&fused, cameras, cfg, workers);
    let mut quality = 0.0f64;
    for (a, b) in fused_frames.iter().zip(&composed_frames) {
        quality += psnr(a, b)?;
    }
    let fused_row = BenchRow {
        num_fields,
        mode: BenchMode::Fused,
        render_ms_per_frame: fused_ms,
        field_payload_bytes: fused.footprint_bytes(),
        psnr_vs_composed: Some(quality / fused_frames.len() as f64),
    };

    Ok((vec![composed_row, fused_row], fused))
}

/// Runs the full scaling benchmark over the given scene sizes.
pub fn run_bench(n_list: &[usize], seed: u64, cfg: &RunConfig, workers: usize) -> Result<BenchReport> {
    anyhow::ensure!(!n_list.is_empty(), "bench needs at least one scene size");
    let mut report = BenchReport {
        rows: Vec::new(),
        frames_timed: FRAMES_TIMED,
        image_size: (0, 0),
        workers,
    };
    for &n in n_list {
        let (rows, _) = bench_scene_size(n, seed, cfg, workers)?;
        report.rows.extend(rows);
    }
    let probe = make_bench_scene(n_list[0], seed)?;
    report.image_size = (
        probe.train_cameras[0].width,
        probe.train_cameras[0].height,
    );
    Ok(report)
}
