//! Key-value config files for the distiller and renderer, and the config
//! echo block every report embeds. Unknown keys are errors; omitted keys
//! keep their defaults.
//!
//! ```text
//! prune_alpha_threshold 0.01
//! lambda_sigma 1
//! lambda_color 1
//! supervised_iters 2000
//! rgb_iters 500
//! batch_rays 4096
//! step 0.04
//! learning_rate 0.01
//! beta1 0.9
//! beta2 0.99
//! epsilon 1e-8
//! seed 0
//! # renderer keys
//! background 0 0 0
//! t_near 0
//! t_far 100
//! jitter off
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use voxfuse_core::distiller::DistillConfig;
use voxfuse_core::renderer::RenderConfig;

use super::{meaningful_lines, parse_f32};

/// Everything a pipeline run needs to be reproducible.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub distill: DistillConfig,
    pub render: RenderConfig,
}

pub fn decode_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    // The render step follows the distill step unless set explicitly.
    let mut render_step_set = false;
    for (line, content) in meaningful_lines(text) {
        let mut tokens = content.split_whitespace();
        let key = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();
        let one = || -> Result<&str> {
            if rest.len() == 1 {
                Ok(rest[0])
            } else {
                bail!("line {line}: {key} takes one value")
            }
        };
        match key {
            "prune_alpha_threshold" => cfg.distill.prune_alpha_threshold = parse_f32(one()?, key, line)?,
            "lambda_sigma" => cfg.distill.lambda_sigma = parse_f32(one()?, key, line)?,
            "lambda_color" => cfg.distill.lambda_color = parse_f32(one()?, key, line)?,
            "supervised_iters" => {
                cfg.distill.supervised_iters = one()?
                    .parse()
                    .with_context(|| format!("line {line}: invalid supervised_iters"))?
            }
            "rgb_iters" => {
                cfg.distill.rgb_iters = one()?
                    .parse()
                    .with_context(|| format!("line {line}: invalid rgb_iters"))?
            }
            "batch_rays" => {
                cfg.distill.batch_rays = one()?
                    .parse()
                    .with_context(|| format!("line {line}: invalid batch_rays"))?
            }
            "step" => {
                cfg.distill.step = parse_f32(one()?, key, line)?;
                if !render_step_set {
                    cfg.render.step = cfg.distill.step;
                }
            }
            "render_step" => {
                cfg.render.step = parse_f32(one()?, key, line)?;
                render_step_set = true;
            }
            "learning_rate" => cfg.distill.learning_rate = parse_f32(one()?, key, line)?,
            "beta1" => cfg.distill.beta1 = parse_f32(one()?, key, line)?,
            "beta2" => cfg.distill.beta2 = parse_f32(one()?, key, line)?,
            "epsilon" => cfg.distill.epsilon = parse_f32(one()?, key, line)?,
            "seed" => {
                cfg.distill.seed = one()?
                    .parse()
                    .with_context(|| format!("line {line}: invalid seed"))?;
                cfg.render.seed = cfg.distill.seed;
            }
            "background" => {
                if rest.len() != 3 {
                    bail!("line {line}: background takes r g b");
                }
                for (ch, tok) in rest.iter().enumerate() {
                    cfg.render.background[ch] = parse_f32(tok, "background", line)?;
                }
            }
            "t_near" => cfg.render.t_near = parse_f32(one()?, key, line)?,
            "t_far" => cfg.render.t_far = parse_f32(one()?, key, line)?,
            "jitter" => {
                cfg.render.jitter = match one()? {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    other => bail!("line {line}: jitter must be on/off, got '{other}'"),
                }
            }
            other => bail!("line {line}: unknown config key '{other}'"),
        }
    }
    cfg.distill
        .validate()
        .map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
    if !(cfg.render.step > 0.0) {
        bail!("invalid config: render_step must be positive");
    }
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    decode_config(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Full effective configuration, one `config.<key> <value>` line each; every
/// report embeds this echo so no default stays hidden.
pub fn echo_config(cfg: &RunConfig) -> String {
    let d = &cfg.distill;
    let r = &cfg.render;
    let mut out = String::new();
    let _ = writeln!(out, "config.prune_alpha_threshold {}", d.prune_alpha_threshold);
    let _ = writeln!(out, "config.lambda_sigma {}", d.lambda_sigma);
    let _ = writeln!(out, "config.lambda_color {}", d.lambda_color);
    let _ = writeln!(out, "config.supervised_iters {}", d.supervised_iters);
    let _ = writeln!(out, "config.rgb_iters {}", d.rgb_iters);
    let _ = writeln!(out, "config.batch_rays {}", d.batch_rays);
    let _ = writeln!(out, "config.step {}", d.step);
    let _ = writeln!(out, "config.learning_rate {}", d.learning_rate);
    let _ = writeln!(out, "config.beta1 {}", d.beta1);
    let _ = writeln!(out, "config.beta2 {}", d.beta2);
    let _ = writeln!(out, "config.epsilon {}", d.epsilon);
    let _ = writeln!(out, "config.seed {}", d.seed);
    let _ = writeln!(out, "config.render_step {}", r.step);
    let _ = writeln!(
        out,
        "config.background {} {} {}",
        r.background[0], r.background[1], r.background[2]
    );
    let _ = writeln!(out, "config.t_near {}", r.t_near);
    let _ = writeln!(out, "config.t_far {}", r.t_far);
    let _ = writeln!(out, "config.jitter {}", if r.jitter { "on" } else { "off" });
    let _ = writeln!(out, "config.early_stop {}", if r.early_stop { "on" } else { "off" });
    out
}
