//! Run configuration: one sectioned key = value text file drives the whole
//! pipeline. Unknown sections or keys are rejected so typos cannot silently
//! fall back to defaults.

use std::path::Path;

use ockd_core::corpus::CorpusConfig;
use ockd_core::models::EncoderConfig;

use crate::CliError;

#[derive(Clone, Debug)]
pub struct CorpusSection {
    pub seed: u64,
    pub config: CorpusConfig,
}

#[derive(Clone, Debug)]
pub struct TrainSection {
    pub num_layers: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub ff_dim: usize,
    pub frontend_frame: usize,
    pub frontend_stride: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub augment: bool,
    pub crop_s: f64,
}

#[derive(Clone, Debug)]
pub struct StudentSection {
    pub num_layers: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub augment: bool,
    pub crop_s: f64,
}

#[derive(Clone, Debug)]
pub struct EvalSection {
    pub trim: bool,
    pub trim_threshold_db: f64,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub corpus: CorpusSection,
    pub teacher: TrainSection,
    pub student: StudentSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: CorpusSection {
                seed: 7,
                config: CorpusConfig::default(),
            },
            teacher: TrainSection {
                num_layers: 12,
                d_model: 48,
                n_heads: 4,
                ff_dim: 96,
                frontend_frame: 1024,
                frontend_stride: 320,
                learning_rate: 3e-3,
                epochs: 20,
                batch_size: 16,
                augment: true,
                crop_s: 1.0,
            },
            student: StudentSection {
                num_layers: 4,
                learning_rate: 3e-3,
                epochs: 8,
                batch_size: 16,
                lambda: 1e-5,
                augment: true,
                crop_s: 1.0,
            },
            eval: EvalSection {
                trim: true,
                trim_threshold_db: -30.0,
            },
        }
    }
}

impl RunConfig {
    pub fn teacher_encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            num_layers: self.teacher.num_layers,
            d_model: self.teacher.d_model,
            n_heads: self.teacher.n_heads,
            ff_dim: self.teacher.ff_dim,
            frontend_frame: self.teacher.frontend_frame,
            frontend_stride: self.teacher.frontend_stride,
            num_classes: Some(2),
        }
    }

    pub fn student_encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            num_layers: self.student.num_layers,
            num_classes: None,
            ..self.teacher_encoder_config()
        }
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim().to_string();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                if !matches!(section.as_str(), "corpus" | "teacher" | "student" | "eval") {
                    return Err(CliError::usage(format!(
                        "{origin}:{}: unknown section [{section}]",
                        lineno + 1
                    )));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "{origin}:{}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            apply_key(&mut cfg, &section, key, value).map_err(|msg| {
                CliError::usage(format!("{origin}:{}: {msg}", lineno + 1))
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let (lo, hi) = self.corpus.config.duration_range;
        if !(1.0..=4.0).contains(&lo) || !(1.0..=4.0).contains(&hi) || lo > hi {
            return Err(CliError::usage(format!(
                "corpus duration range [{lo}, {hi}] must sit inside [1, 4] seconds"
            )));
        }
        if self.student.lambda < 0.0 {
            return Err(CliError::usage("student lambda must be >= 0"));
        }
        if self.teacher.batch_size == 0 || self.student.batch_size == 0 {
            return Err(CliError::usage("batch sizes must be >= 1"));
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn apply_key(cfg: &mut RunConfig, section: &str, key: &str, value: &str) -> Result<(), String> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
        value
            .parse::<T>()
            .map_err(|_| format!("invalid value `{value}` for key `{key}`"))
    }
    fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
        match value {
            "true" | "on" | "1" => Ok(true),
            "false" | "off" | "0" => Ok(false),
            _ => Err(format!("invalid value `{value}` for boolean key `{key}`")),
        }
    }

    match section {
        "corpus" => {
            let c = &mut cfg.corpus;
            match key {
                "seed" => c.seed = parse(key, value)?,
                "train_bonafide" => c.config.train_bonafide = parse(key, value)?,
                "train_spoof_per_family" => c.config.train_spoof_per_family = parse(key, value)?,
                "dev_bonafide" => c.config.dev_bonafide = parse(key, value)?,
                "dev_spoof_per_family" => c.config.dev_spoof_per_family = parse(key, value)?,
                "eval_seen_bonafide" => c.config.eval_seen_bonafide = parse(key, value)?,
                "eval_seen_spoof_per_family" => {
                    c.config.eval_seen_spoof_per_family = parse(key, value)?
                }
                "eval_unseen_bonafide" => c.config.eval_unseen_bonafide = parse(key, value)?,
                "eval_unseen_spoof_per_family" => {
                    c.config.eval_unseen_spoof_per_family = parse(key, value)?
                }
                "duration_min_s" => c.config.duration_range.0 = parse(key, value)?,
                "duration_max_s" => c.config.duration_range.1 = parse(key, value)?,
                _ => return Err(format!("unknown key `{key}` in section [corpus]")),
            }
        }
        "teacher" => {
            let t = &mut cfg.teacher;
            match key {
                "num_layers" => t.num_layers = parse(key, value)?,
                "d_model" => t.d_model = parse(key, value)?,
                "n_heads" => t.n_heads = parse(key, value)?,
                "ff_dim" => t.ff_dim = parse(key, value)?,
                "frontend_frame" => t.frontend_frame = parse(key, value)?,
                "frontend_stride" => t.frontend_stride = parse(key, value)?,
                "learning_rate" => t.learning_rate = parse(key, value)?,
                "epochs" => t.epochs = parse(key, value)?,
                "batch_size" => t.batch_size = parse(key, value)?,
                "augment" => t.augment = parse_bool(key, value)?,
                "crop_s" => t.crop_s = parse(key, value)?,
                _ => return Err(format!("unknown key `{key}` in section [teacher]")),
            }
        }
        "student" => {
            let s = &mut cfg.student;
            match key {
                "num_layers" => s.num_layers = parse(key, value)?,
                "learning_rate" => s.learning_rate = parse(key, value)?,
                "epochs" => s.epochs = parse(key, value)?,
                "batch_size" => s.batch_size = parse(key, value)?,
                "lambda" => s.lambda = parse(key, value)?,
                "augment" => s.augment = parse_bool(key, value)?,
                "crop_s" => s.crop_s = parse(key, value)?,
                _ => return Err(format!("unknown key `{key}` in section [student]")),
            }
        }
        "eval" => {
            let e = &mut cfg.eval;
            match key {
                "trim" => e.trim = parse_bool(key, value)?,
                "trim_threshold_db" => e.trim_threshold_db = parse(key, value)?,
                _ => return Err(format!("unknown key `{key}` in section [eval]")),
            }
        }
        "" => return Err(format!("key `{key}` appears before any [section]")),
        other => return Err(format!("unknown section [{other}]")),
    }
    Ok(())
}
