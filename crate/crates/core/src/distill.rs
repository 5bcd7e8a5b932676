//! Learning objectives and training: weighted cross-entropy for the binary
//! teacher, and bonafide-only student distillation against a frozen teacher
//! through layer-mapped cosine + MSE losses combined as
//! `L_total = L_cos + lambda * L_mse`.

use std::time::Instant;

use crate::autodiff::{Adam, Tensor};
use crate::corpus::{Label, Utterance, SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::models::{Encoder, EncoderConfig, HiddenStack, LayerMap};
use crate::rng::Rng;
use crate::Scalar;

fn k<F: Scalar>(x: f64) -> F {
    F::from(x).expect("constant not representable in scalar type")
}

fn to_f64<F: Scalar>(x: F) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).expect("scalar convertible to f64")
}

/// Which objective the student minimizes; `Total` is the combined loss,
/// the other two are its single-objective ablations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossVariant {
    MseOnly,
    CosOnly,
    Total,
}

impl LossVariant {
    pub fn name(&self) -> &'static str {
        match self {
            LossVariant::MseOnly => "student_mse",
            LossVariant::CosOnly => "student_cos",
            LossVariant::Total => "student_total",
        }
    }
}

/// Student distillation hyperparameters.
#[derive(Clone, Debug)]
pub struct DistillConfig {
    pub lambda: f64,
    pub layer_map: LayerMap,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub objective: LossVariant,
    /// Additive-noise augmentation at a random SNR in [15, 40] dB.
    pub augment: bool,
    /// Center-crop training waveforms to this many seconds.
    pub crop_s: Option<f64>,
}

impl DistillConfig {
    /// Defaults: lambda 1e-5, learning rate 1e-3 (desk scale; 1e-6
    /// reproduces the original setting), 100 epochs, batch size 32.
    pub fn new(layer_map: LayerMap) -> Self {
        DistillConfig {
            lambda: 1e-5,
            layer_map,
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            objective: LossVariant::Total,
            augment: true,
            crop_s: Some(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 {
            return Err(Error::InvalidConfig("lambda must be >= 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Teacher training hyperparameters.
#[derive(Clone, Debug)]
pub struct TeacherTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub augment: bool,
    pub crop_s: Option<f64>,
}

impl Default for TeacherTrainConfig {
    fn default() -> Self {
        TeacherTrainConfig {
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            augment: true,
            crop_s: Some(1.0),
        }
    }
}

/// Per-batch loss breakdown over the mapped pairs.
#[derive(Clone, Debug)]
pub struct PairLossReport {
    /// One entry per pair, e.g. `s2:t6`; the backend pair is `sA:tA`.
    pub pair_labels: Vec<String>,
    pub pair_cos: Vec<f64>,
    pub pair_mse: Vec<f64>,
    pub l_cos: f64,
    pub l_mse: f64,
    /// Value of the optimized objective (for `Total` this equals
    /// `l_cos + lambda * l_mse`).
    pub l_total: f64,
}

/// Per-epoch training trace, serialized as `epoch<TAB>loss<TAB>wallclock_ms`.
#[derive(Clone, Debug, Default)]
pub struct TrainLog {
    pub entries: Vec<(usize, f64, u128)>,
}

impl TrainLog {
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (epoch, loss, ms) in &self.entries {
            s.push_str(&format!("{epoch}\t{loss:.6}\t{ms}\n"));
        }
        s
    }

    pub fn first_loss(&self) -> Option<f64> {
        self.entries.first().map(|e| e.1)
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.entries.last().map(|e| e.1)
    }
}

// ── losses ───────────────────────────────────────────────────────────

/// Mean over the batch of the squared L2 distance between embeddings:
/// `(1/N) * sum_i ||T(b_i) - S(b_i)||^2`.
pub fn loss_mse<F: Scalar>(teacher_emb: &Tensor<F>, student_emb: &Tensor<F>) -> Result<Tensor<F>> {
    check_batch_shapes("loss_mse", teacher_emb, student_emb)?;
    teacher_emb
        .sub(student_emb)?
        .square()
        .sum_axis(1)?
        .mean_axis(0)
}

/// Mean over the batch of `1 - cos(T(b_i), S(b_i))`; errors on any
/// embedding with near-zero norm, reporting its batch index.
pub fn loss_cos<F: Scalar>(teacher_emb: &Tensor<F>, student_emb: &Tensor<F>) -> Result<Tensor<F>> {
    let shape = check_batch_shapes("loss_cos", teacher_emb, student_emb)?;
    let n = shape[0];

    let norm_t = teacher_emb.square().sum_axis(1)?.sqrt_elem();
    let norm_s = student_emb.square().sum_axis(1)?.sqrt_elem();
    for i in 0..n {
        if to_f64(norm_t.data()[i]) < 1e-12 || to_f64(norm_s.data()[i]) < 1e-12 {
            return Err(Error::DegenerateEmbedding {
                index: i,
                utt_id: None,
            });
        }
    }

    let dots = teacher_emb.mul(student_emb)?.sum_axis(1)?;
    let cos = dots.div(&norm_t.mul(&norm_s)?)?;
    let ones = Tensor::from_vec(vec![n], vec![F::one(); n])?;
    ones.sub(&cos)?.mean_axis(0)
}

fn check_batch_shapes<F: Scalar>(
    op: &'static str,
    a: &Tensor<F>,
    b: &Tensor<F>,
) -> Result<Vec<usize>> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa.len() != 2 || sa != sb {
        return Err(Error::ShapeMismatch {
            op,
            lhs: sa,
            rhs: sb,
        });
    }
    Ok(sa)
}

/// Stacks one embedding per utterance into an `[N, d]` batch tensor.
fn stack_rows<F: Scalar>(embeddings: Vec<Tensor<F>>) -> Result<Tensor<F>> {
    let d = embeddings[0].numel();
    let rows: Vec<Tensor<F>> = embeddings
        .into_iter()
        .map(|e| e.reshape(vec![1, d]))
        .collect::<Result<_>>()?;
    Tensor::concat(&rows, 0)
}

/// Combined distillation loss over all mapped pairs for one batch of
/// teacher/student hidden stacks. `L_cos` and `L_mse` are each the
/// unweighted mean over the pairs (layer pairs plus the backend pair).
pub fn loss_total<F: Scalar>(
    teacher_stacks: &[HiddenStack<F>],
    student_stacks: &[HiddenStack<F>],
    map: &LayerMap,
    lambda: F,
    objective: LossVariant,
) -> Result<(Tensor<F>, PairLossReport)> {
    assert_eq!(teacher_stacks.len(), student_stacks.len());
    let mut pair_batches: Vec<(String, Tensor<F>, Tensor<F>)> = Vec::new();
    for &(s_idx, t_idx) in &map.pairs {
        let t_rows: Vec<Tensor<F>> = teacher_stacks
            .iter()
            .map(|st| st.layer(t_idx, "teacher").cloned())
            .collect::<Result<_>>()?;
        let s_rows: Vec<Tensor<F>> = student_stacks
            .iter()
            .map(|st| st.layer(s_idx, "student").cloned())
            .collect::<Result<_>>()?;
        pair_batches.push((
            format!("s{s_idx}:t{t_idx}"),
            stack_rows(t_rows)?,
            stack_rows(s_rows)?,
        ));
    }
    if map.includes_backend {
        let t_rows: Vec<Tensor<F>> = teacher_stacks
            .iter()
            .map(|st| st.backend_embedding.clone())
            .collect();
        let s_rows: Vec<Tensor<F>> = student_stacks
            .iter()
            .map(|st| st.backend_embedding.clone())
            .collect();
        pair_batches.push(("sA:tA".into(), stack_rows(t_rows)?, stack_rows(s_rows)?));
    }

    let num_pairs = pair_batches.len();
    let mut pair_labels = Vec::with_capacity(num_pairs);
    let mut pair_cos = Vec::with_capacity(num_pairs);
    let mut pair_mse = Vec::with_capacity(num_pairs);
    let mut cos_sum: Option<Tensor<F>> = None;
    let mut mse_sum: Option<Tensor<F>> = None;
    for (label, t_batch, s_batch) in pair_batches {
        let c = loss_cos(&t_batch, &s_batch)?;
        let m = loss_mse(&t_batch, &s_batch)?;
        pair_labels.push(label);
        pair_cos.push(to_f64(c.item()));
        pair_mse.push(to_f64(m.item()));
        cos_sum = Some(match cos_sum {
            Some(acc) => acc.add(&c)?,
            None => c,
        });
        mse_sum = Some(match mse_sum {
            Some(acc) => acc.add(&m)?,
            None => m,
        });
    }
    let inv = F::one() / k::<F>(num_pairs as f64);
    let l_cos = cos_sum.expect("at least one pair").scalar_mul(inv);
    let l_mse = mse_sum.expect("at least one pair").scalar_mul(inv);

    let loss = match objective {
        LossVariant::MseOnly => l_mse.clone(),
        LossVariant::CosOnly => l_cos.clone(),
        LossVariant::Total => l_cos.add(&l_mse.scalar_mul(lambda))?,
    };
    let report = PairLossReport {
        pair_labels,
        pair_cos,
        pair_mse,
        l_cos: to_f64(l_cos.item()),
        l_mse: to_f64(l_mse.item()),
        l_total: to_f64(loss.item()),
    };
    Ok((loss, report))
}

/// Class weights for the teacher's cross-entropy: 0.9 on bonafide, 0.1 on
/// spoof (the training set has many more spoofed utterances).
pub const CE_WEIGHT_BONAFIDE: f64 = 0.9;
pub const CE_WEIGHT_SPOOF: f64 = 0.1;

/// Logit index per class: `[bonafide, spoof]`.
pub const LOGIT_BONAFIDE: usize = 0;
pub const LOGIT_SPOOF: usize = 1;

/// Weighted cross-entropy of one 2-class logit vector.
pub fn weighted_ce<F: Scalar>(logits: &Tensor<F>, label: Label) -> Result<Tensor<F>> {
    let shape = logits.shape();
    if shape != vec![2] {
        return Err(Error::InvalidShape {
            op: "weighted_ce",
            shape,
            reason: "expected 2-class logits".into(),
        });
    }
    let (index, weight) = match label {
        Label::Bonafide => (LOGIT_BONAFIDE, CE_WEIGHT_BONAFIDE),
        Label::Spoof => (LOGIT_SPOOF, CE_WEIGHT_SPOOF),
    };
    let mut one_hot = vec![F::zero(); 2];
    one_hot[index] = F::one();
    let picked = logits
        .log_softmax_last()
        .mul(&Tensor::from_vec(vec![2], one_hot)?)?
        .sum_all();
    Ok(picked.scalar_mul(k(-weight)))
}

// ── batch assembly ───────────────────────────────────────────────────

fn prepare_waveform<F: Scalar>(
    utt: &Utterance,
    crop_s: Option<f64>,
    augment: Option<&mut Rng>,
) -> Vec<F> {
    let mut samples: Vec<f64> = match crop_s {
        Some(secs) => {
            let want = (secs * SAMPLE_RATE as f64).round() as usize;
            if utt.samples.len() > want {
                let start = (utt.samples.len() - want) / 2;
                utt.samples[start..start + want].to_vec()
            } else {
                utt.samples.clone()
            }
        }
        None => utt.samples.clone(),
    };
    if let Some(rng) = augment {
        let snr_db = rng.range(15.0, 40.0);
        let rms = crate::corpus::dsp::rms(&samples).max(1e-9);
        let noise_rms = rms * 10f64.powf(-snr_db / 20.0);
        for s in samples.iter_mut() {
            *s = (*s + noise_rms * rng.normal()).clamp(-1.0, 1.0);
        }
    }
    samples.into_iter().map(|s| k(s)).collect()
}

fn check_finite_loss(loss: f64, context: &str) -> Result<()> {
    if !loss.is_finite() {
        return Err(Error::NumericFailure {
            what: "training loss",
            detail: format!("{context}: loss = {loss}"),
        });
    }
    Ok(())
}

// ── teacher training ─────────────────────────────────────────────────

/// Trains the binary teacher on a corpus holding both classes with weighted
/// cross-entropy. Shuffling and augmentation are keyed by the seed, never by
/// arrival order, so the result is a pure function of (corpus, configs).
pub fn train_teacher<F: Scalar>(
    corpus: &[Utterance],
    encoder_config: EncoderConfig,
    cfg: &TeacherTrainConfig,
) -> Result<(Encoder<F>, TrainLog)> {
    let n_bonafide = corpus.iter().filter(|u| u.label == Label::Bonafide).count();
    let n_spoof = corpus.len() - n_bonafide;
    if n_bonafide == 0 || n_spoof == 0 {
        let only = if n_bonafide == 0 { "spoof" } else { "bonafide" };
        return Err(Error::SingleClassCorpus(only.into()));
    }
    if encoder_config.num_classes != Some(2) {
        return Err(Error::InvalidConfig(
            "teacher config must declare 2 classes".into(),
        ));
    }

    let encoder = Encoder::<F>::new(encoder_config, cfg.seed)?;
    let sizes: Vec<usize> = encoder.params().iter().map(|(_, p)| p.numel()).collect();
    let mut opt = Adam::new(k(cfg.learning_rate), &sizes);
    let mut log = TrainLog::default();
    let started = Instant::now();

    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        Rng::keyed(cfg.seed, &format!("teacher-epoch-{epoch}")).shuffle(&mut order);

        let mut epoch_loss = 0.0;
        let mut num_batches = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut sum: Option<Tensor<F>> = None;
            for &idx in batch {
                let utt = &corpus[idx];
                let mut aug_rng = Rng::keyed(
                    cfg.seed,
                    &format!("teacher-aug/{}/{epoch}", utt.utt_id),
                );
                let wave =
                    prepare_waveform::<F>(utt, cfg.crop_s, cfg.augment.then_some(&mut aug_rng));
                let stack = encoder.forward(&wave)?;
                let logits = stack.logits.as_ref().expect("teacher emits logits");
                let ce = weighted_ce(logits, utt.label)?;
                sum = Some(match sum {
                    Some(acc) => acc.add(&ce)?,
                    None => ce,
                });
            }
            let loss = sum
                .expect("non-empty batch")
                .scalar_mul(F::one() / k::<F>(batch.len() as f64));
            let loss_value = to_f64(loss.item());
            check_finite_loss(loss_value, &format!("teacher epoch {epoch}"))?;
            loss.backward()?;
            opt.step(encoder.params())?;
            encoder.zero_grads();
            epoch_loss += loss_value;
            num_batches += 1;
        }
        log.entries.push((
            epoch,
            epoch_loss / num_batches as f64,
            started.elapsed().as_millis(),
        ));
    }
    Ok((encoder, log))
}

// ── student distillation ─────────────────────────────────────────────

/// Distills a student on bonafide speech only against a frozen teacher.
/// Any spoof-labeled utterance in the corpus aborts with the offending id;
/// the teacher's parameters are never part of the gradient graph.
pub fn distill_student<F: Scalar>(
    bonafide_corpus: &[Utterance],
    teacher: &Encoder<F>,
    student_config: EncoderConfig,
    cfg: &DistillConfig,
) -> Result<(Encoder<F>, TrainLog)> {
    cfg.validate()?;
    if let Some(spoofed) = bonafide_corpus.iter().find(|u| u.label != Label::Bonafide) {
        return Err(Error::SpoofInStudentCorpus(spoofed.utt_id.clone()));
    }
    if bonafide_corpus.is_empty() {
        return Err(Error::SingleClassCorpus("an empty corpus".into()));
    }
    teacher.config().check_embedding_compatible(&student_config)?;
    for &(s_idx, t_idx) in &cfg.layer_map.pairs {
        if s_idx == 0 || s_idx > student_config.num_layers {
            return Err(Error::LayerIndexOutOfRange {
                side: "student",
                index: s_idx,
                available: student_config.num_layers,
            });
        }
        if t_idx == 0 || t_idx > teacher.config().num_layers {
            return Err(Error::LayerIndexOutOfRange {
                side: "teacher",
                index: t_idx,
                available: teacher.config().num_layers,
            });
        }
    }

    teacher.set_trainable(false);
    let student = Encoder::<F>::new(student_config, cfg.seed)?;
    let sizes: Vec<usize> = student.params().iter().map(|(_, p)| p.numel()).collect();
    let mut opt = Adam::new(k(cfg.learning_rate), &sizes);
    let mut log = TrainLog::default();
    let started = Instant::now();
    let lambda: F = k(cfg.lambda);

    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..bonafide_corpus.len()).collect();
        Rng::keyed(cfg.seed, &format!("student-epoch-{epoch}")).shuffle(&mut order);

        let mut epoch_loss = 0.0;
        let mut num_batches = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut teacher_stacks = Vec::with_capacity(batch.len());
            let mut student_stacks = Vec::with_capacity(batch.len());
            for &idx in batch {
                let utt = &bonafide_corpus[idx];
                let mut aug_rng = Rng::keyed(
                    cfg.seed,
                    &format!("student-aug/{}/{epoch}", utt.utt_id),
                );
                let wave =
                    prepare_waveform::<F>(utt, cfg.crop_s, cfg.augment.then_some(&mut aug_rng));
                teacher_stacks.push(teacher.forward(&wave)?);
                student_stacks.push(student.forward(&wave)?);
            }
            let (loss, report) = loss_total(
                &teacher_stacks,
                &student_stacks,
                &cfg.layer_map,
                lambda,
                cfg.objective,
            )?;
            check_finite_loss(report.l_total, &format!("student epoch {epoch}"))?;
            loss.backward()?;
            opt.step(student.params())?;
            student.zero_grads();
            epoch_loss += report.l_total;
            num_batches += 1;
        }
        log.entries.push((
            epoch,
            epoch_loss / num_batches as f64,
            started.elapsed().as_millis(),
        ));
    }
    Ok((student, log))
}
