//! The pipeline commands behind the CLI verbs. Each command is a plain
//! function so the acceptance suite can drive the pipeline in-process.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ockd_core::checkpoint::{self, ModelKind};
use ockd_core::corpus::{
    self, atomic_write, CorpusSummary, Label, Split, Utterance,
};
use ockd_core::distill::{
    distill_student, train_teacher, DistillConfig, LossVariant, TeacherTrainConfig,
};
use ockd_core::eval::{
    compute_eer, det_csv, det_points, pooled_eer, read_scores, score_utterance,
    teacher_logit_score, write_scores, EERResult, ScoreRecord,
};
use ockd_core::models::layer_map;
use ockd_core::rng::Rng;
use ockd_core::{Encoder, Result as CoreResult};

use crate::config::RunConfig;
use crate::svg::det_svg;
use crate::CliError;

pub fn corpus_dir(out: &Path) -> PathBuf {
    out.join("corpus")
}

pub fn checkpoint_path(out: &Path, name: &str) -> PathBuf {
    out.join("checkpoints").join(format!("{name}.ockd"))
}

pub fn log_path(out: &Path, name: &str) -> PathBuf {
    out.join("logs").join(format!("{name}_train.tsv"))
}

pub fn scores_path(out: &Path, split: &str, scorer: &str) -> PathBuf {
    out.join("scores").join(format!("{split}_{scorer}.txt"))
}

pub fn reports_dir(out: &Path) -> PathBuf {
    out.join("reports")
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))
}

fn derive_seed(seed: u64, stream: &str) -> u64 {
    Rng::keyed(seed, stream).next_u64()
}

// ── gen-data ─────────────────────────────────────────────────────────

pub fn cmd_gen_data(cfg: &RunConfig, out: &Path, force: bool) -> Result<CorpusSummary, CliError> {
    let dir = corpus_dir(out);
    if dir.exists() && dir.read_dir().map(|mut d| d.next().is_some()).unwrap_or(false) {
        if !force {
            return Err(CliError::usage(format!(
                "{} already contains a corpus; pass --force to regenerate",
                dir.display()
            )));
        }
        fs::remove_dir_all(&dir)
            .map_err(|e| CliError::data(format!("cannot clear {}: {e}", dir.display())))?;
    }
    ensure_dir(&dir)?;
    let summary = corpus::build_corpus(&cfg.corpus.config, cfg.corpus.seed, &dir)?;
    Ok(summary)
}

// ── train-teacher ────────────────────────────────────────────────────

pub fn cmd_train_teacher(cfg: &RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let train = corpus::load_split(&corpus_dir(out), Split::Train)?;
    let train_cfg = TeacherTrainConfig {
        learning_rate: cfg.teacher.learning_rate,
        epochs: cfg.teacher.epochs,
        batch_size: cfg.teacher.batch_size,
        seed: derive_seed(cfg.corpus.seed, "teacher"),
        augment: cfg.teacher.augment,
        crop_s: Some(cfg.teacher.crop_s),
    };
    let (encoder, log) = train_teacher::<f64>(&train, cfg.teacher_encoder_config(), &train_cfg)?;

    let ckpt = checkpoint_path(out, "teacher");
    ensure_dir(ckpt.parent().unwrap())?;
    checkpoint::save(&ckpt, ModelKind::Teacher, &encoder)?;
    let log_file = log_path(out, "teacher");
    ensure_dir(log_file.parent().unwrap())?;
    atomic_write(&log_file, log.to_tsv().as_bytes())?;
    Ok(ckpt)
}

// ── distill ──────────────────────────────────────────────────────────

fn load_teacher(out: &Path) -> Result<Encoder, CliError> {
    let path = checkpoint_path(out, "teacher");
    let (kind, encoder) = checkpoint::load::<f64>(&path)?;
    if kind != ModelKind::Teacher {
        return Err(CliError::data(format!(
            "{} is a {} checkpoint, expected a teacher",
            path.display(),
            kind.name()
        )));
    }
    Ok(encoder)
}

/// Student training list: the train-split bonafide subset by default, or an
/// explicit protocol (which must not contain a single spoof line).
fn student_corpus(out: &Path, protocol: Option<&Path>) -> Result<Vec<Utterance>, CliError> {
    let dir = corpus_dir(out);
    match protocol {
        None => {
            let train = corpus::load_split(&dir, Split::Train)?;
            Ok(train
                .into_iter()
                .filter(|u| u.label == Label::Bonafide)
                .collect())
        }
        Some(path) => {
            let entries = corpus::read_protocol(path)?;
            let wav_dir = dir.join("wav");
            entries
                .into_iter()
                .map(|e| -> CoreResult<Utterance> {
                    let samples = corpus::read_wav(&wav_dir.join(format!("{}.wav", e.utt_id)))?;
                    Ok(Utterance {
                        utt_id: e.utt_id,
                        samples,
                        label: e.label,
                        attack_id: e.attack_id,
                    })
                })
                .collect::<CoreResult<Vec<_>>>()
                .map_err(CliError::from)
        }
    }
}

pub fn cmd_distill(
    cfg: &RunConfig,
    out: &Path,
    objective: LossVariant,
    protocol: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let teacher = load_teacher(out)?;
    let corpus = student_corpus(out, protocol)?;
    let student_config = cfg.student_encoder_config();
    let distill_cfg = DistillConfig {
        lambda: cfg.student.lambda,
        layer_map: layer_map(cfg.teacher.num_layers, cfg.student.num_layers)?,
        learning_rate: cfg.student.learning_rate,
        epochs: cfg.student.epochs,
        batch_size: cfg.student.batch_size,
        seed: derive_seed(cfg.corpus.seed, objective.name()),
        objective,
        augment: cfg.student.augment,
        crop_s: Some(cfg.student.crop_s),
    };
    let (student, log) = distill_student::<f64>(&corpus, &teacher, student_config, &distill_cfg)?;

    let ckpt = checkpoint_path(out, objective.name());
    ensure_dir(ckpt.parent().unwrap())?;
    checkpoint::save(&ckpt, ModelKind::Student, &student)?;
    let log_file = log_path(out, objective.name());
    ensure_dir(log_file.parent().unwrap())?;
    atomic_write(&log_file, log.to_tsv().as_bytes())?;
    Ok(ckpt)
}

// ── score ────────────────────────────────────────────────────────────

fn score_split(
    teacher: &Encoder,
    student: &Encoder,
    utterances: &[Utterance],
) -> Result<(Vec<ScoreRecord>, Vec<ScoreRecord>), CliError> {
    let mut teacher_records = Vec::with_capacity(utterances.len());
    let mut ockd_records = Vec::with_capacity(utterances.len());
    for utt in utterances {
        teacher_records.push(ScoreRecord {
            utt_id: utt.utt_id.clone(),
            label: utt.label,
            score: teacher_logit_score(teacher, utt)?,
        });
        ockd_records.push(ScoreRecord {
            utt_id: utt.utt_id.clone(),
            label: utt.label,
            score: score_utterance(teacher, student, utt)?,
        });
    }
    Ok((teacher_records, ockd_records))
}

fn trim_split(cfg: &RunConfig, utterances: &[Utterance]) -> Result<Vec<Utterance>, CliError> {
    utterances
        .iter()
        .map(|u| corpus::trim_nonspeech(u, cfg.eval.trim_threshold_db))
        .collect::<CoreResult<Vec<_>>>()
        .map_err(CliError::from)
}

/// Emits both score files (teacher logit and OCKD similarity) for a split.
pub fn cmd_score(
    cfg: &RunConfig,
    out: &Path,
    split: Split,
    trim: bool,
    student_name: &str,
) -> Result<(PathBuf, PathBuf), CliError> {
    let teacher = load_teacher(out)?;
    let (_, student) = checkpoint::load::<f64>(&checkpoint_path(out, student_name))?;
    let mut utterances = corpus::load_split(&corpus_dir(out), split)?;
    let mut split_label = split.name().to_string();
    if trim {
        utterances = trim_split(cfg, &utterances)?;
        split_label.push_str("_trim");
    }
    let (teacher_records, ockd_records) = score_split(&teacher, &student, &utterances)?;

    let t_path = scores_path(out, &split_label, "teacher");
    let o_path = scores_path(out, &split_label, "ockd");
    ensure_dir(t_path.parent().unwrap())?;
    write_scores(&t_path, &teacher_records)?;
    write_scores(&o_path, &ockd_records)?;
    Ok((t_path, o_path))
}

// ── eval ─────────────────────────────────────────────────────────────

#[derive(Clone, Debug)]
pub struct EvalRow {
    pub split: String,
    pub num_bonafide: usize,
    pub num_spoof: usize,
    pub teacher_eer: f64,
    pub ockd_eer: f64,
}

#[derive(Clone, Debug, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn row(&self, split: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.split == split)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "{:<18} {:>6} {:>6} {:>13} {:>10}\n",
            "split", "bona", "spoof", "teacher_eer%", "ockd_eer%"
        ));
        for r in &self.rows {
            s.push_str(&format!(
                "{:<18} {:>6} {:>6} {:>13.2} {:>10.2}\n",
                r.split,
                r.num_bonafide,
                r.num_spoof,
                r.teacher_eer * 100.0,
                r.ockd_eer * 100.0
            ));
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("split,num_bonafide,num_spoof,teacher_eer,ockd_eer\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{:.6},{:.6}\n",
                r.split, r.num_bonafide, r.num_spoof, r.teacher_eer, r.ockd_eer
            ));
        }
        s
    }
}

fn eval_row(
    split: &str,
    teacher_records: &[ScoreRecord],
    ockd_records: &[ScoreRecord],
) -> Result<EvalRow, CliError> {
    let t: EERResult = compute_eer(teacher_records)?;
    let o: EERResult = compute_eer(ockd_records)?;
    Ok(EvalRow {
        split: split.to_string(),
        num_bonafide: t.num_bonafide,
        num_spoof: t.num_spoof,
        teacher_eer: t.eer,
        ockd_eer: o.eer,
    })
}

/// Scores both evaluation splits with both scorers, computes per-split and
/// pooled EERs (plus trimmed variants when enabled) and writes the report.
pub fn cmd_eval(cfg: &RunConfig, out: &Path, trim: bool) -> Result<EvalReport, CliError> {
    let teacher = load_teacher(out)?;
    let (_, student) = checkpoint::load::<f64>(&checkpoint_path(out, "student_total"))?;
    let splits = [Split::EvalSeen, Split::EvalUnseen];

    let mut report = EvalReport::default();
    let mut pooled_teacher: Vec<Vec<ScoreRecord>> = Vec::new();
    let mut pooled_ockd: Vec<Vec<ScoreRecord>> = Vec::new();
    let mut pooled_teacher_trim: Vec<Vec<ScoreRecord>> = Vec::new();
    let mut pooled_ockd_trim: Vec<Vec<ScoreRecord>> = Vec::new();

    for split in splits {
        let utterances = corpus::load_split(&corpus_dir(out), split)?;
        let (t_rec, o_rec) = score_split(&teacher, &student, &utterances)?;
        ensure_dir(&out.join("scores"))?;
        write_scores(&scores_path(out, split.name(), "teacher"), &t_rec)?;
        write_scores(&scores_path(out, split.name(), "ockd"), &o_rec)?;
        report.rows.push(eval_row(split.name(), &t_rec, &o_rec)?);
        pooled_teacher.push(t_rec);
        pooled_ockd.push(o_rec);

        if trim {
            let trimmed = trim_split(cfg, &utterances)?;
            let (t_rec, o_rec) = score_split(&teacher, &student, &trimmed)?;
            let label = format!("{}_trim", split.name());
            write_scores(&scores_path(out, &label, "teacher"), &t_rec)?;
            write_scores(&scores_path(out, &label, "ockd"), &o_rec)?;
            report.rows.push(eval_row(&label, &t_rec, &o_rec)?);
            pooled_teacher_trim.push(t_rec);
            pooled_ockd_trim.push(o_rec);
        }
    }

    let pool = |sets: &[Vec<ScoreRecord>]| -> Result<EERResult, CliError> {
        let refs: Vec<&[ScoreRecord]> = sets.iter().map(|s| s.as_slice()).collect();
        pooled_eer(&refs).map_err(CliError::from)
    };
    let pt = pool(&pooled_teacher)?;
    let po = pool(&pooled_ockd)?;
    report.rows.push(EvalRow {
        split: "pooled".into(),
        num_bonafide: pt.num_bonafide,
        num_spoof: pt.num_spoof,
        teacher_eer: pt.eer,
        ockd_eer: po.eer,
    });
    if trim {
        let pt = pool(&pooled_teacher_trim)?;
        let po = pool(&pooled_ockd_trim)?;
        report.rows.push(EvalRow {
            split: "pooled_trim".into(),
            num_bonafide: pt.num_bonafide,
            num_spoof: pt.num_spoof,
            teacher_eer: pt.eer,
            ockd_eer: po.eer,
        });
    }

    let reports = reports_dir(out);
    ensure_dir(&reports)?;
    atomic_write(&reports.join("eer.txt"), report.table().as_bytes())?;
    atomic_write(&reports.join("eer.csv"), report.csv().as_bytes())?;
    Ok(report)
}

// ── ablate ───────────────────────────────────────────────────────────

#[derive(Clone, Debug)]
pub struct AblationRow {
    pub variant: &'static str,
    pub eer_seen: f64,
    pub eer_unseen: f64,
    pub eer_pooled: f64,
}

#[derive(Clone, Debug)]
pub struct AblationReport {
    pub teacher_digest: String,
    pub rows: Vec<AblationRow>,
    /// Set when mse-only beats the combined objective at this scale (the
    /// full-scale reference ordering is the reverse).
    pub mse_beats_total: bool,
}

impl AblationReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("teacher_digest {}\n", self.teacher_digest));
        s.push_str(&format!(
            "{:<14} {:>12} {:>12} {:>12}\n",
            "model", "seen_eer%", "unseen_eer%", "pooled_eer%"
        ));
        for r in &self.rows {
            s.push_str(&format!(
                "{:<14} {:>12.2} {:>12.2} {:>12.2}\n",
                r.variant,
                r.eer_seen * 100.0,
                r.eer_unseen * 100.0,
                r.eer_pooled * 100.0
            ));
        }
        if self.mse_beats_total {
            s.push_str(
                "note: mse-only outperformed the combined objective at this scale; \
                 the reference ordering at full scale is mse worst.\n",
            );
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("model,eer_seen,eer_unseen,eer_pooled\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                r.variant, r.eer_seen, r.eer_unseen, r.eer_pooled
            ));
        }
        s
    }
}

/// Trains the three loss variants against one frozen teacher and compares
/// their similarity-score EERs on the evaluation splits.
pub fn cmd_ablate(cfg: &RunConfig, out: &Path) -> Result<AblationReport, CliError> {
    let teacher_ckpt = checkpoint_path(out, "teacher");
    let digest_before = checkpoint::digest_hex(&teacher_ckpt)?;
    let teacher = load_teacher(out)?;

    let eval_seen = corpus::load_split(&corpus_dir(out), Split::EvalSeen)?;
    let eval_unseen = corpus::load_split(&corpus_dir(out), Split::EvalUnseen)?;

    let mut rows = Vec::new();
    for objective in [LossVariant::MseOnly, LossVariant::CosOnly, LossVariant::Total] {
        let started = Instant::now();
        let ckpt = cmd_distill(cfg, out, objective, None)?;
        let (_, student) = checkpoint::load::<f64>(&ckpt)?;

        let mut records_seen = Vec::new();
        for utt in &eval_seen {
            records_seen.push(ScoreRecord {
                utt_id: utt.utt_id.clone(),
                label: utt.label,
                score: score_utterance(&teacher, &student, utt)?,
            });
        }
        let mut records_unseen = Vec::new();
        for utt in &eval_unseen {
            records_unseen.push(ScoreRecord {
                utt_id: utt.utt_id.clone(),
                label: utt.label,
                score: score_utterance(&teacher, &student, utt)?,
            });
        }
        let seen = compute_eer(&records_seen)?;
        let unseen = compute_eer(&records_unseen)?;
        let pooled = pooled_eer(&[&records_seen, &records_unseen])?;
        rows.push(AblationRow {
            variant: objective.name(),
            eer_seen: seen.eer,
            eer_unseen: unseen.eer,
            eer_pooled: pooled.eer,
        });
        eprintln!(
            "ablation: {} done in {:.1}s (pooled EER {:.2}%)",
            objective.name(),
            started.elapsed().as_secs_f64(),
            pooled.eer * 100.0
        );
    }

    let digest_after = checkpoint::digest_hex(&teacher_ckpt)?;
    if digest_before != digest_after {
        return Err(CliError::data(
            "teacher checkpoint changed during ablation",
        ));
    }
    let pooled_of = |name: &str| rows.iter().find(|r| r.variant == name).map(|r| r.eer_pooled);
    let report = AblationReport {
        teacher_digest: digest_after,
        mse_beats_total: pooled_of("student_mse") < pooled_of("student_total"),
        rows,
    };
    let reports = reports_dir(out);
    ensure_dir(&reports)?;
    atomic_write(&reports.join("ablation.txt"), report.table().as_bytes())?;
    atomic_write(&reports.join("ablation.csv"), report.csv().as_bytes())?;
    Ok(report)
}

// ── plot-det ─────────────────────────────────────────────────────────

/// Reads a score file and writes the DET staircase as CSV and SVG.
pub fn cmd_plot_det(scores: &Path, out_dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let records = read_scores(scores)?;
    if records.is_empty() {
        return Err(CliError::data(format!(
            "{}: score file is empty",
            scores.display()
        )));
    }
    let points = det_points(&records)?;
    let stem = scores
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scores");
    ensure_dir(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}_det.csv"));
    let svg_path = out_dir.join(format!("{stem}_det.svg"));
    atomic_write(&csv_path, det_csv(&points).as_bytes())?;
    atomic_write(&svg_path, det_svg(&points, stem).as_bytes())?;
    Ok((csv_path, svg_path))
}
