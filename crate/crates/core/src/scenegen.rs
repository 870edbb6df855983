//! Analytic construction of teacher fields and standard desk-scale test
//! scenes: exact ground truth without any capture pipeline.
//!
//! Primitives are signed-distance shapes rasterized onto a lattice with a
//! smoothstep occupancy falloff (hard edges alias under trilinear
//! interpolation and destabilize gradient checks). Raw parameters are
//! recovered by inverting the activations: color logits clamp to +-20,
//! densities floor at -20 (the softplus inverse is already finite above,
//! and capping it would destroy large density targets).

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::composer::{ComposedScene, Placement, SceneEntry};
use crate::field::{logit, softplus_inv, VoxelField};
use crate::math::{scalar, Aabb, Mat3, Vec3};
use crate::sampling::Camera;
use crate::{Error, Result};

/// Raw-parameter clamp for the inverted activations.
pub const RAW_CLAMP: f32 = 20.0;

/// Shape of an analytic primitive, in its own local frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrimitiveShape {
    Sphere { radius: f32 },
    Box { half_extents: Vec3 },
    /// Ring in the local xz plane around the y axis.
    Torus { major_radius: f32, minor_radius: f32 },
}

/// One analytic primitive: a posed shape with target density, albedo, and an
/// edge falloff width (in world units).
#[derive(Clone, Copy, Debug)]
pub struct PrimitiveSpec {
    pub shape: PrimitiveShape,
    pub pose: Placement,
    /// Target activated density inside the shape, >= 0.
    pub density_value: f32,
    /// RGB in [0,1]^3.
    pub albedo: [f32; 3],
    /// Edge falloff width, >= 0.
    pub softness: f32,
}

fn sdf_local(shape: &PrimitiveShape, p: Vec3) -> f32 {
    match *shape {
        PrimitiveShape::Sphere { radius } => p.length() - radius,
        PrimitiveShape::Box { half_extents } => {
            let q = Vec3::new(
                scalar::abs(p.x) - half_extents.x,
                scalar::abs(p.y) - half_extents.y,
                scalar::abs(p.z) - half_extents.z,
            );
            let outside = q.max(Vec3::ZERO).length();
            let inside = q.x.max(q.y).max(q.z).min(0.0);
            outside + inside
        }
        PrimitiveShape::Torus {
            major_radius,
            minor_radius,
        } => {
            let ring = scalar::sqrt(p.x * p.x + p.z * p.z) - major_radius;
            scalar::sqrt(ring * ring + p.y * p.y) - minor_radius
        }
    }
}

/// World-space signed distance to a posed primitive. Exact for the similarity
/// transforms used here (uniform scale preserves distances up to the factor).
pub fn signed_distance(spec: &PrimitiveSpec, p_world: Vec3) -> f32 {
    sdf_local(&spec.shape, spec.pose.to_local(p_world)) * spec.pose.scale
}

/// Smoothstep occupancy: 1 deep inside, 0 outside, 0.5 exactly on the
/// surface, transitioning over `softness` centered on the boundary.
fn occupancy(distance: f32, softness: f32) -> f32 {
    if softness <= 0.0 {
        return if distance <= 0.0 { 1.0 } else { 0.0 };
    }
    let t = ((distance / softness) + 0.5).clamp(0.0, 1.0);
    let s = t * t * (3.0 - 2.0 * t);
    1.0 - s
}

/// Rasterizes primitives onto a fresh lattice. Per vertex, activated density
/// is the max over primitives of density_value * occupancy, the albedo comes
/// from the nearest primitive, and raw parameters invert the activations.
pub fn rasterize_primitives(
    specs: &[PrimitiveSpec],
    bbox: Aabb,
    resolution: [usize; 3],
) -> Result<VoxelField> {
    let mut field = VoxelField::new(bbox, resolution)?;
    let [nx, ny, nz] = resolution;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let pos = field.vertex_position(i, j, k);
                let idx = field.vertex_index(i, j, k);

                let mut sigma = 0.0f32;
                let mut nearest = f32::INFINITY;
                let mut albedo = [0.0f32; 3];
                for spec in specs {
                    let d = signed_distance(spec, pos);
                    sigma = sigma.max(spec.density_value * occupancy(d, spec.softness));
                    if d < nearest {
                        nearest = d;
                        albedo = spec.albedo;
                    }
                }

                field.raw_density_mut()[idx] = if sigma <= 1e-8 {
                    -RAW_CLAMP
                } else {
                    softplus_inv(sigma).max(-RAW_CLAMP)
                };
                let colors = field.raw_color_mut();
                for ch in 0..3 {
                    colors[3 * idx + ch] = logit(albedo[ch]).clamp(-RAW_CLAMP, RAW_CLAMP);
                }
            }
        }
    }
    Ok(field)
}

/// A generated scene plus its camera rig, train and held-out views disjoint.
#[derive(Clone, Debug)]
pub struct GeneratedScene {
    pub scene: ComposedScene,
    pub train_cameras: Vec<Camera>,
    pub holdout_cameras: Vec<Camera>,
}

/// Desk-scale image size used by the generated rigs.
pub const RIG_IMAGE_SIZE: u32 = 200;

const ROOM_BBOX: Aabb = Aabb::new(Vec3::new(-1.3, -0.2, -1.3), Vec3::new(1.3, 1.1, 1.3));
const FIELD_RES: [usize; 3] = [64, 64, 64];
const WALL_SIGMA: f32 = 30.0;
const ROOM_SOFTNESS: f32 = 0.06;

fn room_primitives() -> Vec<PrimitiveSpec> {
    let slab = |center: Vec3, half: Vec3, albedo: [f32; 3]| PrimitiveSpec {
        shape: PrimitiveShape::Box { half_extents: half },
        pose: Placement {
            rotation: Mat3::IDENTITY,
            translation: center,
            scale: 1.0,
        },
        density_value: WALL_SIGMA,
        albedo,
        softness: ROOM_SOFTNESS,
    };
    alloc::vec![
        // Floor.
        slab(
            Vec3::new(0.0, -0.1, 0.0),
            Vec3::new(1.26, 0.08, 1.26),
            [0.72, 0.65, 0.55],
        ),
        // Walls, one color per side so views carry structure.
        slab(
            Vec3::new(1.22, 0.45, 0.0),
            Vec3::new(0.07, 0.62, 1.26),
            [0.55, 0.62, 0.78],
        ),
        slab(
            Vec3::new(-1.22, 0.45, 0.0),
            Vec3::new(0.07, 0.62, 1.26),
            [0.78, 0.55, 0.50],
        ),
        slab(
            Vec3::new(0.0, 0.45, 1.22),
            Vec3::new(1.26, 0.62, 0.07),
            [0.55, 0.74, 0.55],
        ),
        slab(
            Vec3::new(0.0, 0.45, -1.22),
            Vec3::new(1.26, 0.62, 0.07),
            [0.78, 0.74, 0.52],
        ),
    ]
}

/// Cameras on an interior ring, looking at `target`. The seed perturbs the
/// ring phase and per-camera heights, so rigs with different seeds share no
/// poses. Used for scene rigs and for generating dense view sets for the
/// image-fitting baseline.
pub fn ring_cameras(seed: u64, count: usize, radius: f32, height: f32, target: Vec3) -> Vec<Camera> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: f32 = rng.gen::<f32>() * core::f32::consts::TAU;
    let mut cams = Vec::with_capacity(count);
    for i in 0..count {
        let angle = phase + core::f32::consts::TAU * i as f32 / count as f32;
        let jitter_h: f32 = rng.gen_range(-0.04..0.04);
        let eye = Vec3::new(
            radius * scalar::cos(angle),
            height + jitter_h,
            radius * scalar::sin(angle),
        );
        let cam = Camera::look_at(
            eye,
            target,
            Vec3::new(0.0, 1.0, 0.0),
            220.0,
            220.0,
            RIG_IMAGE_SIZE,
            RIG_IMAGE_SIZE,
        )
        .expect("ring rig camera is valid");
        cams.push(cam);
    }
    cams
}

fn ring_rig(
    seed: u64,
    count: usize,
    radius: f32,
    height: f32,
    target: Vec3,
    holdout_every: usize,
) -> (Vec<Camera>, Vec<Camera>) {
    let cams = ring_cameras(seed, count, radius, height, target);
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for (i, cam) in cams.into_iter().enumerate() {
        if holdout_every > 0 && i % holdout_every == holdout_every - 1 {
            holdout.push(cam);
        } else {
            train.push(cam);
        }
    }
    (train, holdout)
}

fn room_background() -> VoxelField {
    rasterize_primitives(&room_primitives(), ROOM_BBOX, FIELD_RES)
        .expect("room rasterization is valid")
}

fn sphere_object(albedo: [f32; 3]) -> VoxelField {
    let half = 0.3f32;
    let bbox = Aabb::new(Vec3::splat(-half), Vec3::splat(half));
    // Falloff sharper than the fused student's lattice pitch: inserted
    // objects carry genuinely sub-voxel boundaries, so a supervised-only
    // student hits a representational floor the pixel-loss phase then
    // improves on.
    let spec = PrimitiveSpec {
        shape: PrimitiveShape::Sphere { radius: 0.22 },
        pose: Placement::IDENTITY,
        density_value: WALL_SIGMA,
        albedo,
        softness: 0.02,
    };
    rasterize_primitives(&[spec], bbox, FIELD_RES).expect("sphere rasterization is valid")
}

fn torus_object(albedo: [f32; 3]) -> VoxelField {
    let half = 0.28f32;
    let bbox = Aabb::new(Vec3::splat(-half), Vec3::splat(half));
    // Sub-voxel world-space falloff after the scaled placement, as for the
    // sphere object.
    let spec = PrimitiveSpec {
        shape: PrimitiveShape::Torus {
            major_radius: 0.16,
            minor_radius: 0.06,
        },
        pose: Placement::IDENTITY,
        density_value: WALL_SIGMA,
        albedo,
        softness: 0.015,
    };
    rasterize_primitives(&[spec], bbox, FIELD_RES).expect("torus rasterization is valid")
}

/// Builds a documented scene by name. Deterministic in (name, seed).
///
/// Scenes:
/// - `"room-3obj"`: box-room background (entry 0) plus a rotated sphere and a
///   scaled, tilted torus; 16 train / 4 held-out cameras on an interior ring.
/// - `"wall"`: a single flat-colored wall field with a 10-camera arc
///   (8 train / 2 held-out); the minimal image-fitting sanity scene.
pub fn make_desk_scene(name: &str, seed: u64) -> Result<GeneratedScene> {
    match name {
        "room-3obj" => {
            let background = room_background();
            let sphere = sphere_object([0.80, 0.18, 0.15]);
            let torus = torus_object([0.15, 0.25, 0.80]);

            let entries = alloc::vec![
                SceneEntry {
                    field: background,
                    placement: Placement::IDENTITY,
                },
                SceneEntry {
                    field: sphere,
                    placement: Placement::new(
                        Mat3::rotation_y(0.5),
                        Vec3::new(-0.38, 0.20, 0.12),
                        1.0,
                    )?,
                },
                SceneEntry {
                    field: torus,
                    placement: Placement::new(
                        Mat3::rotation_y(0.7).mul_mat(&Mat3::rotation_x(0.35)),
                        Vec3::new(0.42, 0.35, -0.18),
                        1.45,
                    )?,
                },
            ];
            let scene = ComposedScene::new(entries, 0)?;
            let (train, holdout) = ring_rig(seed, 20, 0.85, 0.55, Vec3::new(0.0, 0.18, 0.0), 5);
            Ok(GeneratedScene {
                scene,
                train_cameras: train,
                holdout_cameras: holdout,
            })
        }
        "wall" => {
            let bbox = Aabb::new(Vec3::new(-1.0, -1.0, -0.2), Vec3::new(1.0, 1.0, 0.3));
            let spec = PrimitiveSpec {
                shape: PrimitiveShape::Box {
                    half_extents: Vec3::new(0.85, 0.85, 0.1),
                },
                pose: Placement {
                    rotation: Mat3::IDENTITY,
                    translation: Vec3::new(0.0, 0.0, 0.05),
                    scale: 1.0,
                },
                density_value: WALL_SIGMA,
                albedo: [0.70, 0.30, 0.20],
                softness: ROOM_SOFTNESS,
            };
            let field = rasterize_primitives(&[spec], bbox, FIELD_RES)?;
            let scene = ComposedScene::new(
                alloc::vec![SceneEntry {
                    field,
                    placement: Placement::IDENTITY,
                }],
                0,
            )?;

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut train = Vec::new();
            let mut holdout = Vec::new();
            for i in 0..10 {
                let x = -0.6 + 1.2 * i as f32 / 9.0;
                let y: f32 = rng.gen_range(-0.15..0.15);
                let cam = Camera::look_at(
                    Vec3::new(x, y, -1.6),
                    Vec3::new(0.0, 0.0, 0.0),
                    Vec3::new(0.0, 1.0, 0.0),
                    220.0,
                    220.0,
                    RIG_IMAGE_SIZE,
                    RIG_IMAGE_SIZE,
                )?;
                if i % 5 == 4 {
                    holdout.push(cam);
                } else {
                    train.push(cam);
                }
            }
            Ok(GeneratedScene {
                scene,
                train_cameras: train,
                holdout_cameras: holdout,
            })
        }
        other => Err(Error::UnknownScene(other.to_string())),
    }
}

/// Scaling-family scene: the room background plus `num_entries - 1` spheres
/// placed on an interior circle, each its own field. Used by the benchmark
/// harness, where composed render cost must grow with the entry count while
/// the union bounds (and therefore the fused student) stay fixed.
pub fn make_bench_scene(num_entries: usize, seed: u64) -> Result<GeneratedScene> {
    if num_entries == 0 {
        return Err(Error::InvalidArgument {
            field: "num_entries",
            reason: "must be at least 1",
        });
    }
    let mut entries = Vec::with_capacity(num_entries);
    entries.push(SceneEntry {
        field: room_background(),
        placement: Placement::IDENTITY,
    });
    let palette = [
        [0.80, 0.18, 0.15],
        [0.15, 0.25, 0.80],
        [0.18, 0.70, 0.30],
        [0.85, 0.65, 0.15],
        [0.60, 0.20, 0.70],
        [0.20, 0.70, 0.70],
        [0.80, 0.45, 0.25],
    ];
    for i in 0..num_entries.saturating_sub(1) {
        let angle = core::f32::consts::TAU * i as f32 / 7.0;
        let albedo = palette[i % palette.len()];
        entries.push(SceneEntry {
            field: sphere_object(albedo),
            placement: Placement::new(
                Mat3::IDENTITY,
                Vec3::new(0.55 * scalar::cos(angle), 0.20, 0.55 * scalar::sin(angle)),
                1.0,
            )?,
        });
    }
    let scene = ComposedScene::new(entries, 0)?;
    let (train, holdout) = ring_rig(seed, 10, 0.85, 0.55, Vec3::new(0.0, 0.18, 0.0), 5);
    Ok(GeneratedScene {
        scene,
        train_cameras: train,
        holdout_cameras: holdout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spec_list_rasterizes_vacuum() {
        let field = rasterize_primitives(
            &[],
            Aabb::new(Vec3::ZERO, Vec3::splat(1.0)),
            [8, 8, 8],
        )
        .unwrap();
        for &raw in field.raw_density() {
            assert_eq!(raw, -RAW_CLAMP);
        }
        let s = field.query_point(Vec3::splat(0.5));
        assert!(s.sigma < 1e-6);
    }

    #[test]
    fn sphere_center_vertex_hits_target_density() {
        // Odd resolution puts a vertex exactly at the sphere center.
        let spec = PrimitiveSpec {
            shape: PrimitiveShape::Sphere { radius: 0.3 },
            pose: Placement::IDENTITY,
            density_value: 12.5,
            albedo: [0.2, 0.4, 0.6],
            softness: 0.05,
        };
        let field = rasterize_primitives(
            &[spec],
            Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5)),
            [9, 9, 9],
        )
        .unwrap();
        let s = field.query_point(Vec3::ZERO);
        assert!(
            (s.sigma - 12.5).abs() < 1e-4,
            "sigma at center {} vs 12.5",
            s.sigma
        );
        for ch in 0..3 {
            assert!((s.color[ch] - spec.albedo[ch]).abs() < 1e-4);
        }
    }

    #[test]
    fn ball_volume_vertex_count_matches_analytic() {
        let radius = 0.35f32;
        let spec = PrimitiveSpec {
            shape: PrimitiveShape::Sphere { radius },
            pose: Placement::IDENTITY,
            density_value: 40.0,
            albedo: [0.5, 0.5, 0.5],
            softness: 0.03,
        };
        let bbox = Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5));
        let res = 64usize;
        let field = rasterize_primitives(&[spec], bbox, [res; 3]).unwrap();

        // Brute-force classification: occupancy crosses 1/2 exactly on the
        // surface, so sigma > density/2 means strictly inside the ball.
        let mut rasterized = 0usize;
        let mut analytic = 0usize;
        for k in 0..res {
            for j in 0..res {
                for i in 0..res {
                    let pos = field.vertex_position(i, j, k);
                    let s = field.query_point(pos);
                    if s.sigma > 20.0 {
                        rasterized += 1;
                    }
                    if pos.length() < radius {
                        analytic += 1;
                    }
                }
            }
        }
        let rel = (rasterized as f64 - analytic as f64).abs() / analytic as f64;
        assert!(
            rel < 0.05,
            "rasterized {rasterized} vs analytic {analytic} ({rel:.3} relative)"
        );
    }

    #[test]
    fn activation_inversion_round_trips_wide_density_range() {
        for &target in &[1e-3f32, 1e-2, 0.5, 3.0, 40.0, 1e3] {
            let spec = PrimitiveSpec {
                shape: PrimitiveShape::Box {
                    half_extents: Vec3::splat(2.0),
                },
                pose: Placement::IDENTITY,
                density_value: target,
                albedo: [0.3, 0.6, 0.9],
                softness: 0.0,
            };
            let field = rasterize_primitives(
                &[spec],
                Aabb::new(Vec3::splat(-1.0), Vec3::splat(1.0)),
                [5, 5, 5],
            )
            .unwrap();
            let s = field.query_point(field.vertex_position(2, 2, 2));
            let rel = (s.sigma - target).abs() / target;
            assert!(rel < 1e-4, "round trip {target} -> {} ({rel})", s.sigma);
        }
    }

    #[test]
    fn box_sdf_matches_hand_values() {
        let shape = PrimitiveShape::Box {
            half_extents: Vec3::new(1.0, 2.0, 3.0),
        };
        assert!((sdf_local(&shape, Vec3::ZERO) + 1.0).abs() < 1e-6);
        assert!((sdf_local(&shape, Vec3::new(2.0, 0.0, 0.0)) - 1.0).abs() < 1e-6);
        assert!((sdf_local(&shape, Vec3::new(0.0, 2.0, 0.0))).abs() < 1e-6);
    }

    #[test]
    fn torus_sdf_ring_is_zero_level() {
        let shape = PrimitiveShape::Torus {
            major_radius: 0.5,
            minor_radius: 0.1,
        };
        assert!((sdf_local(&shape, Vec3::new(0.6, 0.0, 0.0))).abs() < 1e-6);
        assert!((sdf_local(&shape, Vec3::new(0.5, 0.1, 0.0))).abs() < 1e-6);
        assert!(sdf_local(&shape, Vec3::ZERO) > 0.0);
    }

    #[test]
    fn desk_scene_is_deterministic() {
        let a = make_desk_scene("room-3obj", 7).unwrap();
        let b = make_desk_scene("room-3obj", 7).unwrap();
        assert_eq!(a.scene.entries().len(), b.scene.entries().len());
        for (ea, eb) in a.scene.entries().iter().zip(b.scene.entries()) {
            assert_eq!(ea.field, eb.field);
            assert_eq!(ea.placement, eb.placement);
        }
        assert_eq!(a.train_cameras, b.train_cameras);
        assert_eq!(a.holdout_cameras, b.holdout_cameras);
    }

    #[test]
    fn room_scene_shape() {
        let g = make_desk_scene("room-3obj", 0).unwrap();
        assert_eq!(g.scene.entries().len(), 3);
        assert_eq!(g.scene.background_index(), 0);
        assert_eq!(g.train_cameras.len(), 16);
        assert_eq!(g.holdout_cameras.len(), 4);
        // Objects must stay inside the room so the union bounds equal the
        // background bounds (fused students keep the background lattice).
        assert_eq!(g.scene.union_bounds(), g.scene.background().field.bounds());
    }

    #[test]
    fn holdout_poses_disjoint_from_train() {
        let g = make_desk_scene("room-3obj", 3).unwrap();
        for h in &g.holdout_cameras {
            for t in &g.train_cameras {
                assert!(
                    (h.translation - t.translation).length() > 1e-6,
                    "holdout pose duplicated in train rig"
                );
            }
        }
    }

    #[test]
    fn unknown_scene_name_errors() {
        assert!(matches!(
            make_desk_scene("garden", 0),
            Err(Error::UnknownScene(_))
        ));
    }

    #[test]
    fn bench_scene_counts_entries() {
        for n in [1usize, 2, 4, 8] {
            let g = make_bench_scene(n, 1).unwrap();
            assert_eq!(g.scene.entries().len(), n);
            assert_eq!(g.scene.union_bounds(), g.scene.background().field.bounds());
        }
        assert!(make_bench_scene(0, 1).is_err());
    }

    #[test]
    fn rasterized_fields_satisfy_type_invariants() {
        let g = make_desk_scene("room-3obj", 0).unwrap();
        for e in g.scene.entries() {
            let res = e.field.resolution();
            assert!(res.iter().all(|&n| n >= 2));
            assert_eq!(e.field.raw_density().len(), res[0] * res[1] * res[2]);
            assert_eq!(e.field.raw_color().len(), 3 * res[0] * res[1] * res[2]);
            assert!(e.field.bounds().is_valid());
        }
    }
}
