//! Text scene files: placed field entries plus the background index.
//!
//! ```text
//! background 0
//! field fields/room.frf
//! rotation 1 0 0 0 1 0 0 0 1
//! translation 0 0 0
//! scale 1
//! field fields/ball.frf
//! quaternion 0.969 0 0.247 0
//! translation -0.38 0.2 0.12
//! scale 1
//! ```
//!
//! Each `field <path>` opens an entry; `rotation` (row-major 3x3) or
//! `quaternion` (w x y z, normalized on load), `translation`, and `scale`
//! refine its placement and default to the identity. Field paths resolve
//! relative to the scene file's directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use voxfuse_core::composer::{ComposedScene, Placement, SceneEntry};
use voxfuse_core::math::{Mat3, Vec3};

use super::{meaningful_lines, parse_f32};
use crate::formats::field::{read_field, write_field};

/// Scene description as stored on disk: paths plus placements.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneFile {
    pub entries: Vec<(PathBuf, Placement)>,
    pub background_index: usize,
}

pub fn encode_scene(scene: &SceneFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "background {}", scene.background_index);
    for (path, placement) in &scene.entries {
        let _ = writeln!(out, "field {}", path.display());
        let r = placement.rotation.rows;
        let _ = writeln!(
            out,
            "rotation {} {} {} {} {} {} {} {} {}",
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]
        );
        let t = placement.translation;
        let _ = writeln!(out, "translation {} {} {}", t.x, t.y, t.z);
        let _ = writeln!(out, "scale {}", placement.scale);
    }
    out
}

fn quaternion_to_matrix(w: f32, x: f32, y: f32, z: f32, line: usize) -> Result<Mat3> {
    let n = (w * w + x * x + y * y + z * z).sqrt();
    if !(n > 1e-6) {
        bail!("line {line}: quaternion has zero norm");
    }
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    Ok(Mat3::from_rows([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]))
}

pub fn decode_scene(text: &str) -> Result<SceneFile> {
    let mut entries: Vec<(PathBuf, Placement)> = Vec::new();
    let mut background_index = 0usize;
    for (line, content) in meaningful_lines(text) {
        let mut tokens = content.split_whitespace();
        let key = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();
        let current = |entries: &mut Vec<(PathBuf, Placement)>| -> Result<usize> {
            if entries.is_empty() {
                bail!("line {line}: '{key}' before any 'field' entry");
            }
            Ok(entries.len() - 1)
        };
        match key {
            "background" => {
                if rest.len() != 1 {
                    bail!("line {line}: background takes one index");
                }
                background_index = rest[0]
                    .parse::<usize>()
                    .with_context(|| format!("line {line}: invalid background index"))?;
            }
            "field" => {
                if rest.is_empty() {
                    bail!("line {line}: field takes a path");
                }
                entries.push((PathBuf::from(rest.join(" ")), Placement::IDENTITY));
            }
            "rotation" => {
                if rest.len() != 9 {
                    bail!("line {line}: rotation takes 9 row-major values");
                }
                let i = current(&mut entries)?;
                let mut m = [[0.0f32; 3]; 3];
                for (j, tok) in rest.iter().enumerate() {
                    m[j / 3][j % 3] = parse_f32(tok, "rotation entry", line)?;
                }
                let p = &mut entries[i].1;
                *p = Placement::new(Mat3::from_rows(m), p.translation, p.scale)
                    .map_err(|e| anyhow::anyhow!("line {line}: {e}"))?;
            }
            "quaternion" => {
                if rest.len() != 4 {
                    bail!("line {line}: quaternion takes w x y z");
                }
                let i = current(&mut entries)?;
                let q: Vec<f32> = rest
                    .iter()
                    .map(|t| parse_f32(t, "quaternion", line))
                    .collect::<Result<_>>()?;
                let m = quaternion_to_matrix(q[0], q[1], q[2], q[3], line)?;
                let p = &mut entries[i].1;
                *p = Placement::new(m, p.translation, p.scale)
                    .map_err(|e| anyhow::anyhow!("line {line}: {e}"))?;
            }
            "translation" => {
                if rest.len() != 3 {
                    bail!("line {line}: translation takes 3 values");
                }
                let i = current(&mut entries)?;
                entries[i].1.translation = Vec3::new(
                    parse_f32(rest[0], "translation", line)?,
                    parse_f32(rest[1], "translation", line)?,
                    parse_f32(rest[2], "translation", line)?,
                );
            }
            "scale" => {
                if rest.len() != 1 {
                    bail!("line {line}: scale takes one value");
                }
                let i = current(&mut entries)?;
                let s = parse_f32(rest[0], "scale", line)?;
                let p = &mut entries[i].1;
                *p = Placement::new(p.rotation, p.translation, s)
                    .map_err(|e| anyhow::anyhow!("line {line}: {e}"))?;
            }
            other => bail!("line {line}: unknown scene key '{other}'"),
        }
    }
    if entries.is_empty() {
        bail!("scene file lists no fields");
    }
    if background_index >= entries.len() {
        bail!(
            "background index {background_index} out of range for {} entries",
            entries.len()
        );
    }
    Ok(SceneFile {
        entries,
        background_index,
    })
}

pub fn write_scene(path: &Path, scene: &SceneFile) -> Result<()> {
    fs::write(path, encode_scene(scene))
        .with_context(|| format!("writing scene file {}", path.display()))
}

pub fn read_scene_file(path: &Path) -> Result<SceneFile> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading scene file {}", path.display()))?;
    decode_scene(&text).with_context(|| format!("parsing scene file {}", path.display()))
}

/// Reads a scene file and loads every referenced field, resolving relative
/// paths against the scene file's directory.
pub fn load_scene(path: &Path) -> Result<ComposedScene> {
    let file = read_scene_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::with_capacity(file.entries.len());
    for (field_path, placement) in &file.entries {
        let resolved = if field_path.is_absolute() {
            field_path.clone()
        } else {
            base.join(field_path)
        };
        entries.push(SceneEntry {
            field: read_field(&resolved)?,
            placement: *placement,
        });
    }
    ComposedScene::new(entries, file.background_index)
        .map_err(|e| anyhow::anyhow!("invalid scene {}: {e}", path.display()))
}

/// Writes a composed scene as one field file per entry plus a scene file
/// referencing them. Returns the scene file path.
pub fn save_scene(dir: &Path, scene: &ComposedScene) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut file = SceneFile {
        entries: Vec::new(),
        background_index: scene.background_index(),
    };
    for (i, entry) in scene.entries().iter().enumerate() {
        let name = format!("field_{i:03}.frf");
        write_field(&dir.join(&name), &entry.field)?;
        file.entries.push((PathBuf::from(name), entry.placement));
    }
    let scene_path = dir.join("scene.txt");
    write_scene(&scene_path, &file)?;
    Ok(scene_path)
}
