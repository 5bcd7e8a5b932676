use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ockd_cli::commands;
use ockd_cli::config::RunConfig;
use ockd_cli::CliError;
use ockd_core::corpus::Split;
use ockd_core::distill::LossVariant;

/// One-class knowledge distillation for spoofed-speech detection.
#[derive(Parser)]
#[command(name = "ockd", version, about)]
struct Cli {
    /// Run configuration file (sectioned key = value text).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the corpus/training seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for corpus, checkpoints, scores and reports.
    #[arg(long, global = true, default_value = "runs/desk")]
    out: PathBuf,

    /// Allow overwriting existing outputs.
    #[arg(long, global = true)]
    force: bool,

    /// Trim non-speech segments before evaluation (hidden-track analog).
    #[arg(long, global = true)]
    trim: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Total,
    Mse,
    Cos,
}

impl From<Objective> for LossVariant {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Total => LossVariant::Total,
            Objective::Mse => LossVariant::MseOnly,
            Objective::Cos => LossVariant::CosOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Dev,
    EvalSeen,
    EvalUnseen,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Dev => Split::Dev,
            SplitArg::EvalSeen => Split::EvalSeen,
            SplitArg::EvalUnseen => Split::EvalUnseen,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus and protocol files.
    GenData,
    /// Train the binary teacher on the train split.
    TrainTeacher,
    /// Distill a bonafide-only student against the frozen teacher.
    Distill {
        /// Student objective (the ablation harness trains all three).
        #[arg(long, value_enum, default_value = "total")]
        objective: Objective,
        /// Explicit training protocol; must not contain spoof lines.
        #[arg(long)]
        protocol: Option<PathBuf>,
    },
    /// Score one split with the teacher-logit and OCKD similarity scorers.
    Score {
        #[arg(long, value_enum, default_value = "eval-seen")]
        split: SplitArg,
    },
    /// Evaluate both eval splits and report per-split + pooled EERs.
    Eval,
    /// Train and compare the mse-only / cos-only / total students.
    Ablate,
    /// Render a score file's DET curve as CSV and SVG.
    PlotDet {
        /// Score file (`<utt_id> <label> <score>` lines).
        #[arg(long)]
        scores: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.corpus.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli)?;
    let out = cli.out.clone();
    match cli.command {
        Command::GenData => {
            let summary = commands::cmd_gen_data(&cfg, &out, cli.force)?;
            println!(
                "generated {} utterances into {}",
                summary.total_utterances,
                commands::corpus_dir(&out).display()
            );
            for (split, bonafide, spoof) in &summary.per_split {
                println!("  {split:<12} bonafide {bonafide:>5}  spoof {spoof:>5}");
            }
            println!("  attack families: {}", summary.attack_ids.join(" "));
        }
        Command::TrainTeacher => {
            let ckpt = commands::cmd_train_teacher(&cfg, &out)?;
            println!("teacher checkpoint: {}", ckpt.display());
        }
        Command::Distill { objective, protocol } => {
            let ckpt =
                commands::cmd_distill(&cfg, &out, objective.into(), protocol.as_deref())?;
            println!("student checkpoint: {}", ckpt.display());
        }
        Command::Score { split } => {
            let (teacher, ockd) =
                commands::cmd_score(&cfg, &out, split.into(), cli.trim, "student_total")?;
            println!("score files:\n  {}\n  {}", teacher.display(), ockd.display());
        }
        Command::Eval => {
            let report = commands::cmd_eval(&cfg, &out, cli.trim || cfg.eval.trim)?;
            print!("{}", report.table());
            println!(
                "reports written under {}",
                commands::reports_dir(&out).display()
            );
        }
        Command::Ablate => {
            let report = commands::cmd_ablate(&cfg, &out)?;
            print!("{}", report.table());
        }
        Command::PlotDet { scores } => {
            let (csv, svg) =
                commands::cmd_plot_det(&scores, &commands::reports_dir(&out))?;
            println!("det curve:\n  {}\n  {}", csv.display(), svg.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
