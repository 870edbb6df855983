//! Training and benchmark reports: line-oriented text, always carrying the
//! full effective configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::formats::config::{echo_config, RunConfig};

/// One logged training iteration.
#[derive(Clone, Copy, Debug)]
pub struct TrainEvent {
    pub iter: usize,
    pub phase: &'static str,
    pub loss: f32,
    pub wall_ms: f64,
}

/// Assembled after a fuse/fit run; serialized as `iter ...` lines followed
/// by a key-value summary block and the config echo.
#[derive(Clone, Debug, Default)]
pub struct TrainingReport {
    pub events: Vec<TrainEvent>,
    pub supervised_ms: f64,
    pub rgb_ms: f64,
    pub final_loss_supervised: Option<f32>,
    pub final_loss_rgb: Option<f32>,
    /// Mean train-view PSNR of the fused field against composed renders.
    pub psnr_train_mean: Option<f64>,
    pub psnr_views_used: usize,
}

impl TrainingReport {
    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(
                out,
                "iter {} phase {} loss {:.6e} wall_ms {:.3}",
                e.iter, e.phase, e.loss, e.wall_ms
            );
        }
        let _ = writeln!(out, "summary.phase_supervised_ms {:.3}", self.supervised_ms);
        let _ = writeln!(out, "summary.phase_rgb_ms {:.3}", self.rgb_ms);
        if let Some(l) = self.final_loss_supervised {
            let _ = writeln!(out, "summary.final_loss_supervised {l:.6e}");
        }
        if let Some(l) = self.final_loss_rgb {
            let _ = writeln!(out, "summary.final_loss_rgb {l:.6e}");
        }
        if let Some(p) = self.psnr_train_mean {
            let _ = writeln!(out, "summary.psnr_train_mean {p:.2}");
            let _ = writeln!(out, "summary.psnr_views_used {}", self.psnr_views_used);
        }
        out.push_str(&echo_config(cfg));
        out
    }

    pub fn write(&self, path: &Path, cfg: &RunConfig) -> Result<()> {
        fs::write(path, self.render(cfg))
            .with_context(|| format!("writing report {}", path.display()))
    }
}

/// One benchmark row: a scene size, a render mode, and its measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub num_fields: usize,
    pub mode: BenchMode,
    pub render_ms_per_frame: f64,
    pub field_payload_bytes: usize,
    /// Fused rows only: PSNR against the composed render of the same views.
    pub psnr_vs_composed: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    Composed,
    Fused,
}

impl BenchMode {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMode::Composed => "composed",
            BenchMode::Fused => "fused",
        }
    }
}

/// Scaling report across scene sizes; see `bench::run_bench`.
#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Frames averaged per timing, after one warm-up frame.
    pub frames_timed: usize,
    pub image_size: (u32, u32),
    pub workers: usize,
}

impl BenchReport {
    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "bench.frames_timed {}", self.frames_timed);
        let _ = writeln!(
            out,
            "bench.image_size {}x{}",
            self.image_size.0, self.image_size.1
        );
        let _ = writeln!(out, "bench.workers {}", self.workers);
        for r in &self.rows {
            let psnr = match r.psnr_vs_composed {
                Some(p) => format!("{p:.2}"),
                None => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "row n {} mode {} render_ms_per_frame {:.3} field_payload_bytes {} psnr_vs_composed {}",
                r.num_fields,
                r.mode.name(),
                r.render_ms_per_frame,
                r.field_payload_bytes,
                psnr
            );
        }
        out.push_str(&echo_config(cfg));
        out
    }

    pub fn write(&self, path: &Path, cfg: &RunConfig) -> Result<()> {
        fs::write(path, self.render(cfg))
            .with_context(|| format!("writing bench report {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_report_contains_config_echo_and_phases() {
        let report = TrainingReport {
            events: vec![TrainEvent {
                iter: 0,
                phase: "supervised",
                loss: 1.25,
                wall_ms: 3.5,
            }],
            supervised_ms: 1200.0,
            rgb_ms: 300.0,
            final_loss_supervised: Some(0.5),
            final_loss_rgb: Some(0.01),
            psnr_train_mean: Some(31.4),
            psnr_views_used: 4,
        };
        let text = report.render(&RunConfig::default());
        assert!(text.contains("iter 0 phase supervised"));
        assert!(text.contains("summary.phase_supervised_ms"));
        assert!(text.contains("summary.phase_rgb_ms"));
        assert!(text.contains("summary.psnr_train_mean 31.40"));
        assert!(text.contains("config.learning_rate"));
        assert!(text.contains("config.seed"));
    }

    #[test]
    fn bench_report_rows_are_line_oriented() {
        let report = BenchReport {
            rows: vec![
                BenchRow {
                    num_fields: 2,
                    mode: BenchMode::Composed,
                    render_ms_per_frame: 101.5,
                    field_payload_bytes: 1000,
                    psnr_vs_composed: None,
                },
                BenchRow {
                    num_fields: 2,
                    mode: BenchMode::Fused,
                    render_ms_per_frame: 55.0,
                    field_payload_bytes: 500,
                    psnr_vs_composed: Some(33.1),
                },
            ],
            frames_timed: 5,
            image_size: (200, 200),
            workers: 2,
        };
        let text = report.render(&RunConfig::default());
        assert!(text.contains("row n 2 mode composed"));
        assert!(text.contains("psnr_vs_composed 33.10"));
        assert!(text.contains("psnr_vs_composed -"));
    }
}
