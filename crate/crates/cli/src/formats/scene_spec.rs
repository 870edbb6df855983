//! Generator scene-spec grammar: analytic fields built from primitives, the
//! entries composing them, and a ring camera rig.
//!
//! ```text
//! # desk.spec
//! field room
//! bbox -1.3 -0.2 -1.3 1.3 1.1 1.3
//! resolution 64 64 64
//! primitive box half=1.26,0.08,1.26 center=0,-0.1,0 density=60 albedo=0.72,0.65,0.55 softness=0.06
//! endfield
//!
//! field ball
//! bbox -0.3 -0.3 -0.3 0.3 0.3 0.3
//! resolution 64 64 64
//! primitive sphere radius=0.22 density=60 albedo=0.8,0.18,0.15 softness=0.014
//! endfield
//!
//! entry room
//! entry ball translation=-0.38,0.2,0.12 rotation_y=0.5 scale=1
//! background_index 0
//!
//! cameras ring count=20 radius=0.85 height=0.55 target=0,0.18,0 focal=220 image=200,200 holdout_every=5
//! ```
//!
//! Primitive kinds and their required keys:
//! - `sphere radius=R`
//! - `box half=HX,HY,HZ`
//! - `torus major=R minor=r`
//!
//! All primitives take `density=`, `albedo=R,G,B`, `softness=`, and an
//! optional pose (`center=X,Y,Z`, `rotation_x/y/z=RAD` composed in the order
//! written, `scale=S`). Entries take the same pose keys with `translation=`
//! instead of `center=`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use voxfuse_core::composer::{ComposedScene, Placement, SceneEntry};
use voxfuse_core::math::{Aabb, Mat3, Vec3};
use voxfuse_core::sampling::Camera;
use voxfuse_core::scenegen::{rasterize_primitives, GeneratedScene, PrimitiveShape, PrimitiveSpec};

use super::{parse_f32_list, parse_f32, parse_u32};

struct KvArgs<'a> {
    line: usize,
    pairs: Vec<(&'a str, &'a str)>,
    used: Vec<bool>,
}

impl<'a> KvArgs<'a> {
    fn parse(tokens: &[&'a str], line: usize) -> Result<KvArgs<'a>> {
        let mut pairs = Vec::new();
        for tok in tokens {
            let Some((k, v)) = tok.split_once('=') else {
                bail!("line {line}: expected key=value, got '{tok}'");
            };
            pairs.push((k, v));
        }
        let used = vec![false; pairs.len()];
        Ok(KvArgs { line, pairs, used })
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if *k == key && !self.used[i] {
                self.used[i] = true;
                return Some(v);
            }
        }
        None
    }

    fn require(&mut self, key: &str) -> Result<&'a str> {
        self.take(key)
            .ok_or_else(|| anyhow::anyhow!("line {}: missing {key}=", self.line))
    }

    /// Pose from optional keys; rotations compose in the order written.
    fn pose(&mut self, translation_key: &str) -> Result<Placement> {
        let translation = match self.take(translation_key) {
            Some(v) => {
                let t = parse_f32_list(v, 3, translation_key, self.line)?;
                Vec3::new(t[0], t[1], t[2])
            }
            None => Vec3::ZERO,
        };
        let mut rotation = Mat3::IDENTITY;
        for (i, (k, v)) in self.pairs.clone().iter().enumerate() {
            if self.used[i] {
                continue;
            }
            let r = match *k {
                "rotation_x" => Mat3::rotation_x(parse_f32(v, k, self.line)?),
                "rotation_y" => Mat3::rotation_y(parse_f32(v, k, self.line)?),
                "rotation_z" => Mat3::rotation_z(parse_f32(v, k, self.line)?),
                _ => continue,
            };
            self.used[i] = true;
            rotation = r.mul_mat(&rotation);
        }
        let scale = match self.take("scale") {
            Some(v) => parse_f32(v, "scale", self.line)?,
            None => 1.0,
        };
        Placement::new(rotation, translation, scale)
            .map_err(|e| anyhow::anyhow!("line {}: {e}", self.line))
    }

    fn finish(self) -> Result<()> {
        for (i, (k, _)) in self.pairs.iter().enumerate() {
            if !self.used[i] {
                bail!("line {}: unknown key '{k}'", self.line);
            }
        }
        Ok(())
    }
}

struct FieldBlock {
    bbox: Option<Aabb>,
    resolution: [usize; 3],
    primitives: Vec<PrimitiveSpec>,
    line: usize,
}

/// Parses and rasterizes a scene spec into a composed scene plus rig.
pub fn build_from_spec(text: &str) -> Result<GeneratedScene> {
    let mut fields: BTreeMap<String, (Aabb, [usize; 3], Vec<PrimitiveSpec>)> = BTreeMap::new();
    let mut entries: Vec<(String, Placement, usize)> = Vec::new();
    let mut background_index = 0usize;
    let mut rig: Option<(Vec<Camera>, Vec<Camera>)> = None;
    let mut current: Option<(String, FieldBlock)> = None;

    for (line, content) in super::meaningful_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let key = tokens[0];
        let rest = &tokens[1..];
        match key {
            "field" => {
                if current.is_some() {
                    bail!("line {line}: nested field block");
                }
                if rest.len() != 1 {
                    bail!("line {line}: field takes a name");
                }
                current = Some((
                    rest[0].to_string(),
                    FieldBlock {
                        bbox: None,
                        resolution: [64, 64, 64],
                        primitives: Vec::new(),
                        line,
                    },
                ));
            }
            "bbox" => {
                let (_, block) = current
                    .as_mut()
                    .ok_or_else(|| anyhow::anyhow!("line {line}: bbox outside field block"))?;
                if rest.len() != 6 {
                    bail!("line {line}: bbox takes 6 values");
                }
                let v: Vec<f32> = rest
                    .iter()
                    .map(|t| parse_f32(t, "bbox", line))
                    .collect::<Result<_>>()?;
                block.bbox = Some(Aabb::new(
                    Vec3::new(v[0], v[1], v[2]),
                    Vec3::new(v[3], v[4], v[5]),
                ));
            }
            "resolution" => {
                let (_, block) = current
                    .as_mut()
                    .ok_or_else(|| anyhow::anyhow!("line {line}: resolution outside field block"))?;
                if rest.len() != 3 {
                    bail!("line {line}: resolution takes 3 values");
                }
                for (i, tok) in rest.iter().enumerate() {
                    block.resolution[i] = parse_u32(tok, "resolution", line)? as usize;
                }
            }
            "primitive" => {
                let (_, block) = current
                    .as_mut()
                    .ok_or_else(|| anyhow::anyhow!("line {line}: primitive outside field block"))?;
                if rest.is_empty() {
                    bail!("line {line}: primitive takes a kind");
                }
                let mut args = KvArgs::parse(&rest[1..], line)?;
                let shape = match rest[0] {
                    "sphere" => PrimitiveShape::Sphere {
                        radius: parse_f32(args.require("radius")?, "radius", line)?,
                    },
                    "box" => {
                        let h = parse_f32_list(args.require("half")?, 3, "half", line)?;
                        PrimitiveShape::Box {
                            half_extents: Vec3::new(h[0], h[1], h[2]),
                        }
                    }
                    "torus" => PrimitiveShape::Torus {
                        major_radius: parse_f32(args.require("major")?, "major", line)?,
                        minor_radius: parse_f32(args.require("minor")?, "minor", line)?,
                    },
                    other => bail!("line {line}: unknown primitive kind '{other}'"),
                };
                let density_value = parse_f32(args.require("density")?, "density", line)?;
                let a = parse_f32_list(args.require("albedo")?, 3, "albedo", line)?;
                let softness = parse_f32(args.require("softness")?, "softness", line)?;
                let pose = args.pose("center")?;
                args.finish()?;
                block.primitives.push(PrimitiveSpec {
                    shape,
                    pose,
                    density_value,
                    albedo: [a[0], a[1], a[2]],
                    softness,
                });
            }
            "endfield" => {
                let (name, block) = current
                    .take()
                    .ok_or_else(|| anyhow::anyhow!("line {line}: endfield without field"))?;
                let bbox = block.bbox.ok_or_else(|| {
                    anyhow::anyhow!("line {}: field '{name}' missing bbox", block.line)
                })?;
                if fields
                    .insert(name.clone(), (bbox, block.resolution, block.primitives))
                    .is_some()
                {
                    bail!("line {line}: duplicate field name '{name}'");
                }
            }
            "entry" => {
                if current.is_some() {
                    bail!("line {line}: entry inside field block");
                }
                if rest.is_empty() {
                    bail!("line {line}: entry takes a field name");
                }
                let mut args = KvArgs::parse(&rest[1..], line)?;
                let placement = args.pose("translation")?;
                args.finish()?;
                entries.push((rest[0].to_string(), placement, line));
            }
            "background_index" => {
                if rest.len() != 1 {
                    bail!("line {line}: background_index takes one value");
                }
                background_index = rest[0]
                    .parse()
                    .with_context(|| format!("line {line}: invalid background_index"))?;
            }
            "cameras" => {
                if rest.is_empty() || rest[0] != "ring" {
                    bail!("line {line}: only 'cameras ring' rigs are supported");
                }
                let mut args = KvArgs::parse(&rest[1..], line)?;
                let count = args
                    .require("count")?
                    .parse::<usize>()
                    .with_context(|| format!("line {line}: invalid count"))?;
                let radius = parse_f32(args.require("radius")?, "radius", line)?;
                let height = parse_f32(args.require("height")?, "height", line)?;
                let t = parse_f32_list(args.require("target")?, 3, "target", line)?;
                let focal = parse_f32(args.require("focal")?, "focal", line)?;
                let img = parse_f32_list(args.require("image")?, 2, "image", line)?;
                let holdout_every = args
                    .require("holdout_every")?
                    .parse::<usize>()
                    .with_context(|| format!("line {line}: invalid holdout_every"))?;
                args.finish()?;

                let mut train = Vec::new();
                let mut holdout = Vec::new();
                for i in 0..count {
                    let angle = std::f32::consts::TAU * i as f32 / count as f32;
                    let eye = Vec3::new(radius * angle.cos(), height, radius * angle.sin());
                    let cam = Camera::look_at(
                        eye,
                        Vec3::new(t[0], t[1], t[2]),
                        Vec3::new(0.0, 1.0, 0.0),
                        focal,
                        focal,
                        img[0] as u32,
                        img[1] as u32,
                    )
                    .map_err(|e| anyhow::anyhow!("line {line}: {e}"))?;
                    if holdout_every > 0 && i % holdout_every == holdout_every - 1 {
                        holdout.push(cam);
                    } else {
                        train.push(cam);
                    }
                }
                rig = Some((train, holdout));
            }
            other => bail!("line {line}: unknown spec key '{other}'"),
        }
    }
    if let Some((name, block)) = current {
        bail!("line {}: field '{name}' never closed with endfield", block.line);
    }
    if entries.is_empty() {
        bail!("spec declares no entries");
    }
    let (train_cameras, holdout_cameras) =
        rig.ok_or_else(|| anyhow::anyhow!("spec declares no cameras"))?;

    let mut scene_entries = Vec::with_capacity(entries.len());
    for (name, placement, line) in entries {
        let (bbox, resolution, primitives) = fields
            .get(&name)
            .ok_or_else(|| anyhow::anyhow!("line {line}: entry references unknown field '{name}'"))?;
        let field = rasterize_primitives(primitives, *bbox, *resolution)
            .map_err(|e| anyhow::anyhow!("line {line}: rasterizing '{name}': {e}"))?;
        scene_entries.push(SceneEntry { field, placement });
    }
    let scene = ComposedScene::new(scene_entries, background_index)
        .map_err(|e| anyhow::anyhow!("invalid composition: {e}"))?;
    Ok(GeneratedScene {
        scene,
        train_cameras,
        holdout_cameras,
    })
}

pub fn build_from_spec_file(path: &Path) -> Result<GeneratedScene> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
    build_from_spec(&text).with_context(|| format!("parsing spec {}", path.display()))
}
