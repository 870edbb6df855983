//! Text camera files: one `camera` ... `end` record per camera.
//!
//! ```text
//! camera
//! fx 220
//! fy 220
//! cx 100
//! cy 100
//! width 200
//! height 200
//! rotation r00 r01 r02 r10 r11 r12 r20 r21 r22
//! translation tx ty tz
//! end
//! ```
//!
//! `rotation` is the row-major camera-to-world matrix; floats print in
//! shortest round-trip form, so write/read cycles are exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use voxfuse_core::math::{Mat3, Vec3};
use voxfuse_core::sampling::Camera;

use super::{meaningful_lines, parse_f32, parse_u32};

pub fn encode_cameras(cameras: &[Camera]) -> String {
    let mut out = String::new();
    for cam in cameras {
        out.push_str("camera\n");
        let _ = writeln!(out, "fx {}", cam.fx);
        let _ = writeln!(out, "fy {}", cam.fy);
        let _ = writeln!(out, "cx {}", cam.cx);
        let _ = writeln!(out, "cy {}", cam.cy);
        let _ = writeln!(out, "width {}", cam.width);
        let _ = writeln!(out, "height {}", cam.height);
        let r = cam.rotation.rows;
        let _ = writeln!(
            out,
            "rotation {} {} {} {} {} {} {} {} {}",
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]
        );
        let t = cam.translation;
        let _ = writeln!(out, "translation {} {} {}", t.x, t.y, t.z);
        out.push_str("end\n");
    }
    out
}

#[derive(Default)]
struct PartialCamera {
    fx: Option<f32>,
    fy: Option<f32>,
    cx: Option<f32>,
    cy: Option<f32>,
    width: Option<u32>,
    height: Option<u32>,
    rotation: Option<Mat3>,
    translation: Option<Vec3>,
}

impl PartialCamera {
    fn build(self, line: usize) -> Result<Camera> {
        let missing = |what: &str| anyhow::anyhow!("line {line}: camera record missing {what}");
        Camera::new(
            self.fx.ok_or_else(|| missing("fx"))?,
            self.fy.ok_or_else(|| missing("fy"))?,
            self.cx.ok_or_else(|| missing("cx"))?,
            self.cy.ok_or_else(|| missing("cy"))?,
            self.width.ok_or_else(|| missing("width"))?,
            self.height.ok_or_else(|| missing("height"))?,
            self.rotation.ok_or_else(|| missing("rotation"))?,
            self.translation.ok_or_else(|| missing("translation"))?,
        )
        .map_err(|e| anyhow::anyhow!("line {line}: {e}"))
    }
}

pub fn decode_cameras(text: &str) -> Result<Vec<Camera>> {
    let mut cameras = Vec::new();
    let mut current: Option<PartialCamera> = None;
    for (line, content) in meaningful_lines(text) {
        let mut tokens = content.split_whitespace();
        let key = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();
        match key {
            "camera" => {
                if current.is_some() {
                    bail!("line {line}: camera record opened before previous 'end'");
                }
                current = Some(PartialCamera::default());
            }
            "end" => {
                let cam = current
                    .take()
                    .ok_or_else(|| anyhow::anyhow!("line {line}: 'end' without 'camera'"))?;
                cameras.push(cam.build(line)?);
            }
            _ => {
                let record = current
                    .as_mut()
                    .ok_or_else(|| anyhow::anyhow!("line {line}: field outside camera record"))?;
                match key {
                    "fx" | "fy" | "cx" | "cy" => {
                        if rest.len() != 1 {
                            bail!("line {line}: {key} takes one value");
                        }
                        let v = parse_f32(rest[0], key, line)?;
                        match key {
                            "fx" => record.fx = Some(v),
                            "fy" => record.fy = Some(v),
                            "cx" => record.cx = Some(v),
                            _ => record.cy = Some(v),
                        }
                    }
                    "width" | "height" => {
                        if rest.len() != 1 {
                            bail!("line {line}: {key} takes one value");
                        }
                        let v = parse_u32(rest[0], key, line)?;
                        if key == "width" {
                            record.width = Some(v);
                        } else {
                            record.height = Some(v);
                        }
                    }
                    "rotation" => {
                        if rest.len() != 9 {
                            bail!("line {line}: rotation takes 9 row-major values");
                        }
                        let mut m = [[0.0f32; 3]; 3];
                        for (i, tok) in rest.iter().enumerate() {
                            m[i / 3][i % 3] = parse_f32(tok, "rotation entry", line)?;
                        }
                        record.rotation = Some(Mat3::from_rows(m));
                    }
                    "translation" => {
                        if rest.len() != 3 {
                            bail!("line {line}: translation takes 3 values");
                        }
                        record.translation = Some(Vec3::new(
                            parse_f32(rest[0], "translation", line)?,
                            parse_f32(rest[1], "translation", line)?,
                            parse_f32(rest[2], "translation", line)?,
                        ));
                    }
                    other => bail!("line {line}: unknown camera field '{other}'"),
                }
            }
        }
    }
    if current.is_some() {
        bail!("unterminated camera record at end of file");
    }
    Ok(cameras)
}

pub fn write_cameras(path: &Path, cameras: &[Camera]) -> Result<()> {
    fs::write(path, encode_cameras(cameras))
        .with_context(|| format!("writing camera file {}", path.display()))
}

pub fn read_cameras(path: &Path) -> Result<Vec<Camera>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading camera file {}", path.display()))?;
    decode_cameras(&text).with_context(|| format!("parsing camera file {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cameras_round_trip_exactly() {
        let cams = vec![
            Camera::look_at(
                Vec3::new(0.3, 0.72, -1.9),
                Vec3::new(0.01, 0.2, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                219.7,
                220.3,
                200,
                200,
            )
            .unwrap(),
            Camera::look_at(
                Vec3::new(-1.1, 0.4, 0.6),
                Vec3::ZERO,
                Vec3::new(0.0, 1.0, 0.0),
                100.0,
                100.0,
                64,
                48,
            )
            .unwrap(),
        ];
        let text = encode_cameras(&cams);
        let back = decode_cameras(&text).unwrap();
        assert_eq!(cams, back);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "camera\nfx 220\nfy oops\n";
        let err = decode_cameras(text).unwrap_err();
        assert!(format!("{err:#}").contains("line 3"), "{err:#}");
    }

    #[test]
    fn rejects_invalid_rotation() {
        let text = "camera\nfx 1\nfy 1\ncx 0\ncy 0\nwidth 8\nheight 8\nrotation 2 0 0 0 1 0 0 0 1\ntranslation 0 0 0\nend\n";
        assert!(decode_cameras(text).is_err());
    }
}
