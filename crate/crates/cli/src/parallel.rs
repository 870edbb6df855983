//! Data-parallel image synthesis. Pixels are independent and the per-pixel
//! computation is exactly `voxfuse_core::renderer::render_pixel`, so output
//! is bit-identical to the sequential renderer for any worker count.

use rayon::prelude::*;
use voxfuse_core::field::RadianceField;
use voxfuse_core::renderer::{render_image, render_pixel, ImageBuffer, RenderConfig};
use voxfuse_core::sampling::Camera;

/// Renders with up to `workers` threads (0 = rayon's default width).
pub fn render_image_parallel<S: RadianceField + Sync>(
    scene: &S,
    camera: &Camera,
    cfg: &RenderConfig,
    workers: usize,
) -> ImageBuffer {
    if workers == 1 {
        return render_image(scene, camera, cfg);
    }
    let run = |img: &mut ImageBuffer| {
        img.rows_mut().enumerate().par_bridge().for_each(|(py, row)| {
            for (px, out) in row.iter_mut().enumerate() {
                *out = render_pixel(scene, camera, px as u32, py as u32, cfg);
            }
        });
    };
    let mut img = ImageBuffer::new(camera.width, camera.height);
    if workers == 0 {
        run(&mut img);
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("worker pool");
        pool.install(|| run(&mut img));
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use voxfuse_core::math::Vec3;
    use voxfuse_core::scenegen::make_desk_scene;

    #[test]
    fn worker_count_does_not_change_pixels() {
        let gen = make_desk_scene("wall", 0).unwrap();
        let cam = Camera::look_at(
            Vec3::new(0.1, 0.0, -1.5),
            Vec3::ZERO,
            Vec3::new(0.0, 1.0, 0.0),
            60.0,
            60.0,
            64,
            64,
        )
        .unwrap();
        let cfg = RenderConfig {
            jitter: true,
            seed: 3,
            ..Default::default()
        };
        let sequential = render_image(&gen.scene, &cam, &cfg);
        for workers in [1usize, 2, 4, 8] {
            let parallel = render_image_parallel(&gen.scene, &cam, &cfg, workers);
            assert_eq!(sequential, parallel, "workers = {workers}");
        }
    }
}
