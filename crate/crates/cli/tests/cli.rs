//! Command-level integration tests on a miniature corpus and models.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ockd_cli::commands;
use ockd_cli::config::RunConfig;
use ockd_core::checkpoint;
use ockd_core::corpus::Split;
use ockd_core::distill::LossVariant;

fn tiny_config() -> RunConfig {
    RunConfig::parse(
        "\
[corpus]
seed = 11
train_bonafide = 12
train_spoof_per_family = 3
dev_bonafide = 4
dev_spoof_per_family = 1
eval_seen_bonafide = 6
eval_seen_spoof_per_family = 2
eval_unseen_bonafide = 6
eval_unseen_spoof_per_family = 2
duration_min_s = 1.0
duration_max_s = 1.2

[teacher]
num_layers = 2
d_model = 16
n_heads = 2
ff_dim = 32
frontend_frame = 512
frontend_stride = 256
learning_rate = 1e-3
epochs = 1
batch_size = 8
augment = false
crop_s = 1.0

[student]
num_layers = 2
learning_rate = 1e-3
epochs = 1
batch_size = 8
augment = false
crop_s = 1.0

[eval]
trim = false
",
        "tiny",
    )
    .unwrap()
}

fn fresh_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("ockd-cli-tests").join(name);
    fs::remove_dir_all(&dir).ok();
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_pipeline(cfg: &RunConfig, out: &Path) {
    commands::cmd_gen_data(cfg, out, true).unwrap();
    commands::cmd_train_teacher(cfg, out).unwrap();
    commands::cmd_distill(cfg, out, LossVariant::Total, None).unwrap();
}

#[test]
fn gen_data_counts_and_rerun_determinism() {
    let cfg = tiny_config();
    let out = fresh_dir("gen");
    let summary = commands::cmd_gen_data(&cfg, &out, false).unwrap();
    // 12+12 + 4+4 + 6+8 + 6+8 utterances
    assert_eq!(summary.total_utterances, 60);
    let corpus = commands::corpus_dir(&out);
    let wavs = fs::read_dir(corpus.join("wav")).unwrap().count();
    assert_eq!(wavs, 60);
    let protocols: Vec<String> = fs::read_dir(&corpus)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.ends_with(".txt").then_some(name)
        })
        .collect();
    assert_eq!(protocols.len(), 4);

    // a second run without --force is refused, with --force it is identical
    assert!(commands::cmd_gen_data(&cfg, &out, false).is_err());
    let before = fs::read_to_string(corpus.join("train.txt")).unwrap();
    commands::cmd_gen_data(&cfg, &out, true).unwrap();
    let after = fs::read_to_string(corpus.join("train.txt")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn distill_refuses_spoofed_protocol_and_teacher_stays_frozen() {
    let cfg = tiny_config();
    let out = fresh_dir("frozen");
    commands::cmd_gen_data(&cfg, &out, true).unwrap();
    commands::cmd_train_teacher(&cfg, &out).unwrap();
    let teacher_ckpt = commands::checkpoint_path(&out, "teacher");
    let digest_before = checkpoint::digest_hex(&teacher_ckpt).unwrap();

    // the train protocol contains spoof lines → hard error naming the id
    let train_protocol = commands::corpus_dir(&out).join("train.txt");
    let err = commands::cmd_distill(&cfg, &out, LossVariant::Total, Some(&train_protocol))
        .unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("train_A"), "error should name the utterance: {msg}");
    assert_eq!(err.exit_code(), 3);

    commands::cmd_distill(&cfg, &out, LossVariant::Total, None).unwrap();
    assert_eq!(
        checkpoint::digest_hex(&teacher_ckpt).unwrap(),
        digest_before,
        "distillation must not touch the teacher checkpoint"
    );
}

#[test]
fn same_seed_produces_identical_checkpoints() {
    let cfg = tiny_config();
    let out_a = fresh_dir("det-a");
    let out_b = fresh_dir("det-b");
    run_pipeline(&cfg, &out_a);
    run_pipeline(&cfg, &out_b);
    for name in ["teacher", "student_total"] {
        let a = fs::read(commands::checkpoint_path(&out_a, name)).unwrap();
        let b = fs::read(commands::checkpoint_path(&out_b, name)).unwrap();
        assert_eq!(a, b, "checkpoint {name} differs between identical runs");
    }
}

#[test]
fn eval_report_has_one_row_per_split_plus_pooled() {
    let cfg = tiny_config();
    let out = fresh_dir("eval");
    run_pipeline(&cfg, &out);
    let report = commands::cmd_eval(&cfg, &out, false).unwrap();
    let splits: Vec<&str> = report.rows.iter().map(|r| r.split.as_str()).collect();
    assert_eq!(splits, vec!["eval_seen", "eval_unseen", "pooled"]);
    assert!(commands::reports_dir(&out).join("eer.txt").exists());
    assert!(commands::reports_dir(&out).join("eer.csv").exists());

    let trimmed = commands::cmd_eval(&cfg, &out, true).unwrap();
    let splits: Vec<&str> = trimmed.rows.iter().map(|r| r.split.as_str()).collect();
    assert_eq!(
        splits,
        vec![
            "eval_seen",
            "eval_seen_trim",
            "eval_unseen",
            "eval_unseen_trim",
            "pooled",
            "pooled_trim"
        ]
    );
}

#[test]
fn score_command_writes_both_scorers() {
    let cfg = tiny_config();
    let out = fresh_dir("score");
    run_pipeline(&cfg, &out);
    let (teacher_path, ockd_path) =
        commands::cmd_score(&cfg, &out, Split::EvalSeen, false, "student_total").unwrap();
    for path in [&teacher_path, &ockd_path] {
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 14); // 6 bonafide + 8 spoof
        for line in text.lines() {
            assert_eq!(line.split_whitespace().count(), 3);
        }
    }
}

#[test]
fn plot_det_outputs_csv_and_svg() {
    let out = fresh_dir("plot");
    let scores = out.join("scores.txt");
    fs::write(&scores, "u1 bonafide 0.9\nu2 bonafide 0.7\nu3 spoof 0.4\nu4 spoof 0.2\nu5 spoof 0.1\n").unwrap();
    let (csv_path, svg_path) = commands::cmd_plot_det(&scores, &out).unwrap();

    let csv = fs::read_to_string(&csv_path).unwrap();
    // 5 distinct scores → 6 operating points, plus the header
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("far,frr,threshold"));

    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));

    // empty score file → data error
    fs::write(&scores, "").unwrap();
    let err = commands::cmd_plot_det(&scores, &out).unwrap_err();
    assert_eq!(err.exit_code(), 3);

    // malformed line → error carrying the line number
    fs::write(&scores, "u1 bonafide 0.9\nbroken line\n").unwrap();
    let err = commands::cmd_plot_det(&scores, &out).unwrap_err();
    assert!(err.to_string().contains(":2"), "got: {err}");
}

#[test]
fn binary_reports_usage_errors_with_exit_code_2() {
    let exe = env!("CARGO_BIN_EXE_ockd");
    // missing config file: non-zero exit, message names the path
    let output = Command::new(exe)
        .args(["gen-data", "--config", "/nonexistent/x.cfg", "--out", "/tmp/ockd-unused"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("/nonexistent/x.cfg"), "stderr: {stderr}");

    // unknown config key
    let dir = fresh_dir("badcfg");
    let cfg_path = dir.join("bad.cfg");
    fs::write(&cfg_path, "[teacher]\nlayres = 12\n").unwrap();
    let output = Command::new(exe)
        .args(["gen-data", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("layres"));
}
