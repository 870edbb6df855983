//! On-disk formats: binary field files, text camera/scene/config files, PPM
//! and raw f32 image dumps, and the generator scene-spec grammar.

pub mod camera;
pub mod config;
pub mod field;
pub mod image;
pub mod scene;
pub mod scene_spec;

use anyhow::{bail, Context, Result};

/// Iterator over meaningful lines of a text file: trimmed, comments (`#`)
/// and blanks skipped, 1-based line numbers preserved for diagnostics.
pub(crate) fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

pub(crate) fn parse_f32(token: &str, what: &str, line: usize) -> Result<f32> {
    token
        .parse::<f32>()
        .with_context(|| format!("line {line}: invalid {what} '{token}'"))
}

pub(crate) fn parse_u32(token: &str, what: &str, line: usize) -> Result<u32> {
    token
        .parse::<u32>()
        .with_context(|| format!("line {line}: invalid {what} '{token}'"))
}

/// Splits "a,b,c" into exactly `n` floats.
pub(crate) fn parse_f32_list(token: &str, n: usize, what: &str, line: usize) -> Result<Vec<f32>> {
    let parts: Vec<&str> = token.split(',').collect();
    if parts.len() != n {
        bail!("line {line}: {what} needs {n} comma-separated values, got '{token}'");
    }
    parts
        .iter()
        .map(|p| parse_f32(p, what, line))
        .collect()
}
