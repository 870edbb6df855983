//! Scratch calibration: desk-scene convergence diagnostics.

use std::time::Instant;

use voxfuse_core::composer::render_composed;
use voxfuse_core::distiller::{
    fit_from_images_with_observer, fuse_with_observer, init_student, DistillConfig,
};
use voxfuse_core::field::VoxelField;
use voxfuse_core::renderer::{psnr, render_image, ImageBuffer, RenderConfig};
use voxfuse_core::scenegen::make_desk_scene;

fn block_error_map(a: &ImageBuffer, b: &ImageBuffer, blocks: u32) -> String {
    let mut out = String::new();
    let bw = a.width() / blocks;
    let bh = a.height() / blocks;
    for by in 0..blocks {
        for bx in 0..blocks {
            let mut err = 0.0f64;
            let mut n = 0;
            for y in by * bh..(by + 1) * bh {
                for x in bx * bw..(bx + 1) * bw {
                    let pa = a.pixel(x, y);
                    let pb = b.pixel(x, y);
                    for ch in 0..3 {
                        err += (pa[ch] as f64 - pb[ch] as f64).abs();
                        n += 1;
                    }
                }
            }
            out.push_str(&format!("{:4.0} ", 1000.0 * err / n as f64));
        }
        out.push('\n');
    }
    out
}

fn main() {
    let gen = make_desk_scene("room-3obj", 0).unwrap();
    let render_cfg = RenderConfig {
        step: 0.04,
        ..Default::default()
    };

    let holdout_targets: Vec<_> = gen
        .holdout_cameras
        .iter()
        .map(|c| render_composed(&gen.scene, c, &render_cfg))
        .collect();
    let train_target0 = render_composed(&gen.scene, &gen.train_cameras[0], &render_cfg);

    let holdout_eval = |student: &VoxelField| -> f64 {
        let mut total = 0.0;
        for (cam, target) in gen.holdout_cameras.iter().zip(&holdout_targets) {
            let img = render_image(student, cam, &render_cfg);
            total += psnr(&img, target).unwrap();
        }
        total / holdout_targets.len() as f64
    };
    let train_eval = |student: &VoxelField| -> f64 {
        let img = render_image(student, &gen.train_cameras[0], &render_cfg);
        psnr(&img, &train_target0).unwrap()
    };

    // A) initialization quality.
    let init = init_student(&gen.scene);
    println!(
        "init: holdout {:.2} dB  train-view {:.2} dB",
        holdout_eval(&init),
        train_eval(&init)
    );
    let img = render_image(&init, &gen.holdout_cameras[0], &render_cfg);
    println!("init error map (x1000, holdout cam 0):\n{}", block_error_map(&img, &holdout_targets[0], 8));

    // B) full default run.
    let cfg = DistillConfig {
        seed: 0,
        ..Default::default()
    };
    let mut mark = Instant::now();
    let mut train_s = 0.0f64;
    let mut obs = |p: &voxfuse_core::distiller::FuseProgress<'_>| -> bool {
        if (p.iter + 1) % 250 == 0 {
            train_s += mark.elapsed().as_secs_f64();
            println!(
                "{} iter {:4}  loss {:9.4}  holdout {:.2} dB  train-view {:.2} dB  train_s {:.1}",
                p.phase.name(),
                p.iter + 1,
                p.loss,
                holdout_eval(p.student),
                train_eval(p.student),
                train_s
            );
            mark = Instant::now();
        }
        true
    };
    let student = fuse_with_observer(&gen.scene, &gen.train_cameras, &cfg, &mut obs).unwrap();
    let img = render_image(&student, &gen.holdout_cameras[0], &render_cfg);
    println!(
        "supervised-only error map (x1000):\n{}",
        block_error_map(&img, &holdout_targets[0], 8)
    );

    // C) fit from a dense 48-view rendered set.
    let fit_cams = voxfuse_core::scenegen::ring_cameras(
        77,
        48,
        0.85,
        0.55,
        voxfuse_core::math::Vec3::new(0.0, 0.18, 0.0),
    );
    let t_views = Instant::now();
    let train_targets: Vec<_> = fit_cams
        .iter()
        .map(|c| render_composed(&gen.scene, c, &render_cfg))
        .collect();
    println!("baseline view generation: {:.1}s for 48 views", t_views.elapsed().as_secs_f64());
    let fit_cfg = DistillConfig {
        rgb_iters: 8000,
        seed: 0,
        ..Default::default()
    };
    let bounds = gen.scene.union_bounds();
    let res = gen.scene.background().field.resolution();
    let mut mark2 = Instant::now();
    let mut fit_s = 0.0f64;
    let mut fit_obs = |p: &voxfuse_core::distiller::FuseProgress<'_>| -> bool {
        if (p.iter + 1) % 500 == 0 {
            fit_s += mark2.elapsed().as_secs_f64();
            println!(
                "fit iter {:5}  loss {:.6}  holdout {:.2} dB  train-view {:.2} dB  train_s {:.1}",
                p.iter + 1,
                p.loss,
                holdout_eval(p.student),
                train_eval(p.student),
                fit_s
            );
            mark2 = Instant::now();
        }
        true
    };
    let fit = fit_from_images_with_observer(
        &train_targets,
        &fit_cams,
        bounds,
        res,
        &fit_cfg,
        &mut fit_obs,
    )
    .unwrap();
    let img = render_image(&fit, &gen.holdout_cameras[0], &render_cfg);
    println!("fit error map (x1000):\n{}", block_error_map(&img, &holdout_targets[0], 8));
}
