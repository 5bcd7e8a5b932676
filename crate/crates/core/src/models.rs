//! Teacher/student encoders and the student→teacher layer mapping.
//!
//! Both models share one architecture: a strided linear frontend over raw
//! waveform frames, sinusoidal positions, a stack of pre-norm transformer
//! blocks, and an attention-pooling backend. The teacher carries an extra
//! two-class linear head; the student differs only in transformer depth.

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::Scalar;

fn k<F: Scalar>(x: f64) -> F {
    F::from(x).expect("constant not representable in scalar type")
}

/// Architecture hyperparameters shared by teacher and student.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderConfig {
    pub num_layers: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub ff_dim: usize,
    pub frontend_frame: usize,
    pub frontend_stride: usize,
    /// `Some(2)` for the teacher's classification head; `None` for the student.
    pub num_classes: Option<usize>,
}

impl EncoderConfig {
    /// Desk-scale teacher: 12 transformer layers (the full-scale 24 stays
    /// constructible through the public fields).
    pub fn desk_teacher() -> Self {
        EncoderConfig {
            num_layers: 12,
            d_model: 48,
            n_heads: 4,
            ff_dim: 96,
            frontend_frame: 1024,
            frontend_stride: 320,
            num_classes: Some(2),
        }
    }

    /// Desk-scale student: 4 layers, preserving the 3x depth compression.
    pub fn desk_student() -> Self {
        EncoderConfig {
            num_classes: None,
            num_layers: 4,
            ..Self::desk_teacher()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0
            || self.d_model == 0
            || self.ff_dim == 0
            || self.frontend_frame == 0
            || self.frontend_stride == 0
        {
            return Err(Error::InvalidConfig(
                "all extents must be positive".into(),
            ));
        }
        if self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return Err(Error::InvalidConfig(format!(
                "n_heads {} must divide d_model {}",
                self.n_heads, self.d_model
            )));
        }
        if let Some(c) = self.num_classes {
            if c != 2 {
                return Err(Error::InvalidConfig(format!(
                    "classifier head supports exactly 2 classes, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// Teacher and student must agree on everything that makes their
    /// embeddings comparable.
    pub fn check_embedding_compatible(&self, student: &EncoderConfig) -> Result<()> {
        if self.d_model != student.d_model {
            return Err(Error::ConfigMismatch(format!(
                "d_model {} vs {}",
                self.d_model, student.d_model
            )));
        }
        if self.frontend_frame != student.frontend_frame
            || self.frontend_stride != student.frontend_stride
        {
            return Err(Error::ConfigMismatch(format!(
                "frontend {}x{} vs {}x{}",
                self.frontend_frame, self.frontend_stride,
                student.frontend_frame, student.frontend_stride
            )));
        }
        Ok(())
    }
}

/// Per-layer time-pooled embeddings plus the backend embedding, for one
/// utterance. Layer i (1-based) lives at `layer_embeddings[i-1]`.
pub struct HiddenStack<F: Scalar> {
    pub layer_embeddings: Vec<Tensor<F>>,
    pub backend_embedding: Tensor<F>,
    pub logits: Option<Tensor<F>>,
}

impl<F: Scalar> HiddenStack<F> {
    /// 1-based lookup; index 0 is rejected.
    pub fn layer(&self, index: usize, side: &'static str) -> Result<&Tensor<F>> {
        if index == 0 || index > self.layer_embeddings.len() {
            return Err(Error::LayerIndexOutOfRange {
                side,
                index,
                available: self.layer_embeddings.len(),
            });
        }
        Ok(&self.layer_embeddings[index - 1])
    }
}

/// Which student layer learns from which teacher layer, plus the backend pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerMap {
    /// (student_layer, teacher_layer), 1-based.
    pub pairs: Vec<(usize, usize)>,
    pub includes_backend: bool,
}

impl LayerMap {
    /// Total number of learning pairs including the backend pair.
    pub fn num_pairs(&self) -> usize {
        self.pairs.len() + usize::from(self.includes_backend)
    }
}

/// Every even student layer 2k learns from teacher layer 2k·(L_T/L_S);
/// the backend embeddings always form one extra pair.
pub fn layer_map(teacher_layers: usize, student_layers: usize) -> Result<LayerMap> {
    if student_layers == 0 || student_layers % 2 != 0 {
        return Err(Error::InvalidLayerMap {
            teacher_layers,
            student_layers,
            reason: "student layer count must be even and positive".into(),
        });
    }
    if teacher_layers == 0 || teacher_layers % student_layers != 0 {
        return Err(Error::InvalidLayerMap {
            teacher_layers,
            student_layers,
            reason: "teacher layer count must be a positive multiple of the student's".into(),
        });
    }
    let ratio = teacher_layers / student_layers;
    let pairs = (1..=student_layers / 2)
        .map(|k| (2 * k, 2 * k * ratio))
        .collect();
    Ok(LayerMap {
        pairs,
        includes_backend: true,
    })
}

struct Block<F: Scalar> {
    ln1_g: Tensor<F>,
    ln1_b: Tensor<F>,
    wq: Vec<Tensor<F>>,
    wk: Vec<Tensor<F>>,
    wv: Vec<Tensor<F>>,
    wo: Tensor<F>,
    bo: Tensor<F>,
    ln2_g: Tensor<F>,
    ln2_b: Tensor<F>,
    ff_w1: Tensor<F>,
    ff_b1: Tensor<F>,
    ff_w2: Tensor<F>,
    ff_b2: Tensor<F>,
}

/// Waveform encoder with per-layer embedding taps.
pub struct Encoder<F: Scalar> {
    config: EncoderConfig,
    frontend_w: Tensor<F>,
    frontend_b: Tensor<F>,
    blocks: Vec<Block<F>>,
    pool_query: Tensor<F>,
    cls_w: Option<Tensor<F>>,
    cls_b: Option<Tensor<F>>,
    /// Ordered registry backing checkpoints and the optimizer; the handles
    /// above share storage with these.
    params: Vec<(String, Tensor<F>)>,
}

impl<F: Scalar> std::fmt::Debug for Encoder<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Encoder")
            .field("config", &self.config)
            .field("num_params", &self.params.len())
            .finish()
    }
}

impl<F: Scalar> Encoder<F> {
    pub fn new(config: EncoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = Rng::keyed(seed, "encoder-init");
        let mut params: Vec<(String, Tensor<F>)> = Vec::new();

        fn linear<F: Scalar>(
            params: &mut Vec<(String, Tensor<F>)>,
            rng: &mut Rng,
            name: String,
            rows: usize,
            cols: usize,
        ) -> Tensor<F> {
            let bound = 1.0 / (rows as f64).sqrt();
            let data: Vec<F> = (0..rows * cols).map(|_| k(rng.range(-bound, bound))).collect();
            let t = Tensor::param(vec![rows, cols], data).unwrap();
            params.push((name, t.clone()));
            t
        }
        fn vector<F: Scalar>(
            params: &mut Vec<(String, Tensor<F>)>,
            name: String,
            len: usize,
            fill: F,
        ) -> Tensor<F> {
            let t = Tensor::param(vec![len], vec![fill; len]).unwrap();
            params.push((name, t.clone()));
            t
        }

        let d = config.d_model;
        let dh = d / config.n_heads;
        // The frontend starts as a Hann-windowed sine/cosine filterbank over
        // log-spaced frequencies instead of uniform noise: random projections
        // of raw waveform frames carry almost no usable signal at this scale,
        // and the projection stays learnable either way.
        let frontend_w = {
            let rows = config.frontend_frame;
            let mut data = vec![F::zero(); rows * d];
            let n_freqs = (d / 2).max(1);
            let (f_lo, f_hi) = (60.0f64, 7600.0f64);
            for j in 0..d {
                let fi = (j / 2).min(n_freqs - 1) as f64;
                let frac = if n_freqs > 1 { fi / (n_freqs - 1) as f64 } else { 0.0 };
                let freq = f_lo * (f_hi / f_lo).powf(frac);
                let omega = 2.0 * std::f64::consts::PI * freq / 16000.0;
                let mut col = vec![0.0f64; rows];
                let mut norm = 0.0;
                for (t, c) in col.iter_mut().enumerate() {
                    let window = 0.5
                        - 0.5
                            * (2.0 * std::f64::consts::PI * t as f64 / rows as f64).cos();
                    let phase = omega * t as f64;
                    *c = window * if j % 2 == 0 { phase.sin() } else { phase.cos() };
                    norm += *c * *c;
                }
                let norm = norm.sqrt().max(1e-12);
                for (t, c) in col.iter().enumerate() {
                    data[t * d + j] = k(c / norm);
                }
            }
            let t = Tensor::param(vec![rows, d], data).unwrap();
            params.push(("frontend.w".into(), t.clone()));
            t
        };
        let frontend_b = vector(&mut params, "frontend.b".into(), d, F::zero());

        let mut blocks = Vec::with_capacity(config.num_layers);
        for li in 0..config.num_layers {
            let p = |s: &str| format!("layer{li:02}.{s}");
            let ln1_g = vector(&mut params, p("ln1.g"), d, F::one());
            let ln1_b = vector(&mut params, p("ln1.b"), d, F::zero());
            let mut wq = Vec::new();
            let mut wk = Vec::new();
            let mut wv = Vec::new();
            for h in 0..config.n_heads {
                wq.push(linear(&mut params, &mut rng, p(&format!("attn.q{h}.w")), d, dh));
                wk.push(linear(&mut params, &mut rng, p(&format!("attn.k{h}.w")), d, dh));
                wv.push(linear(&mut params, &mut rng, p(&format!("attn.v{h}.w")), d, dh));
            }
            let wo = linear(&mut params, &mut rng, p("attn.o.w"), d, d);
            let bo = vector(&mut params, p("attn.o.b"), d, F::zero());
            let ln2_g = vector(&mut params, p("ln2.g"), d, F::one());
            let ln2_b = vector(&mut params, p("ln2.b"), d, F::zero());
            let ff_w1 = linear(&mut params, &mut rng, p("ff.w1"), d, config.ff_dim);
            let ff_b1 = vector(&mut params, p("ff.b1"), config.ff_dim, F::zero());
            let ff_w2 = linear(&mut params, &mut rng, p("ff.w2"), config.ff_dim, d);
            let ff_b2 = vector(&mut params, p("ff.b2"), d, F::zero());
            blocks.push(Block {
                ln1_g, ln1_b, wq, wk, wv, wo, bo, ln2_g, ln2_b, ff_w1, ff_b1, ff_w2, ff_b2,
            });
        }

        let pool_query = {
            let bound = 1.0 / (d as f64).sqrt();
            let data: Vec<F> = (0..d).map(|_| k(rng.range(-bound, bound))).collect();
            let t = Tensor::param(vec![d], data).unwrap();
            params.push(("pool.query".into(), t.clone()));
            t
        };
        let (cls_w, cls_b) = match config.num_classes {
            Some(c) => {
                let w = linear(&mut params, &mut rng, "cls.w".into(), d, c);
                let b = vector(&mut params, "cls.b".into(), c, F::zero());
                (Some(w), Some(b))
            }
            None => (None, None),
        };

        Ok(Encoder {
            config,
            frontend_w,
            frontend_b,
            blocks,
            pool_query,
            cls_w,
            cls_b,
            params,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn params(&self) -> &[(String, Tensor<F>)] {
        &self.params
    }

    pub fn zero_grads(&self) {
        for (_, p) in &self.params {
            p.zero_grad();
        }
    }

    /// Frozen models never enter the computation graph.
    pub fn set_trainable(&self, trainable: bool) {
        for (_, p) in &self.params {
            p.set_requires_grad(trainable);
        }
    }

    /// Number of frames the frontend produces for a waveform length.
    pub fn num_frames(&self, waveform_len: usize) -> Result<usize> {
        if waveform_len < self.config.frontend_frame {
            return Err(Error::WaveformTooShort {
                len: waveform_len,
                frame: self.config.frontend_frame,
            });
        }
        Ok((waveform_len - self.config.frontend_frame) / self.config.frontend_stride + 1)
    }

    /// Strided linear projection of overlapping waveform frames, then GELU.
    pub fn conv_frontend(&self, waveform: &[F]) -> Result<Tensor<F>> {
        let frame = self.config.frontend_frame;
        let stride = self.config.frontend_stride;
        let t = self.num_frames(waveform.len())?;
        let mut frames = Vec::with_capacity(t * frame);
        for i in 0..t {
            frames.extend_from_slice(&waveform[i * stride..i * stride + frame]);
        }
        let frames = Tensor::from_vec(vec![t, frame], frames)?;
        Ok(frames
            .matmul(&self.frontend_w)?
            .add_row(&self.frontend_b)?
            .gelu())
    }

    fn positional_encoding(&self, t: usize) -> Tensor<F> {
        let d = self.config.d_model;
        // kept an order of magnitude below the frame features so position
        // information does not drown the quiet channels
        let scale = 0.1;
        let mut pe = vec![F::zero(); t * d];
        for pos in 0..t {
            for i in 0..d / 2 {
                let freq = 1.0 / 10000f64.powf(2.0 * i as f64 / d as f64);
                let angle = pos as f64 * freq;
                pe[pos * d + 2 * i] = k(scale * angle.sin());
                pe[pos * d + 2 * i + 1] = k(scale * angle.cos());
            }
        }
        Tensor::from_vec(vec![t, d], pe).unwrap()
    }

    /// Runs the transformer stack over a frame tensor; returns the per-layer
    /// time-pooled embeddings (one per block) and the final hidden sequence.
    pub fn encoder_forward(&self, frames: &Tensor<F>) -> Result<(Vec<Tensor<F>>, Tensor<F>)> {
        let shape = frames.shape();
        if shape.len() != 2 || shape[1] != self.config.d_model {
            return Err(Error::InvalidShape {
                op: "encoder_forward",
                shape,
                reason: format!("expected [time, {}]", self.config.d_model),
            });
        }
        let t = shape[0];
        let dh = self.config.d_model / self.config.n_heads;
        let scale: F = k(1.0 / (dh as f64).sqrt());
        let eps: F = k(1e-5);

        let mut x = frames.add(&self.positional_encoding(t))?;
        let mut layer_embeddings = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let h = x.layer_norm(&block.ln1_g, &block.ln1_b, eps)?;
            let mut heads = Vec::with_capacity(block.wq.len());
            for ((wq, wk), wv) in block.wq.iter().zip(&block.wk).zip(&block.wv) {
                let q = h.matmul(wq)?;
                let kk = h.matmul(wk)?;
                let v = h.matmul(wv)?;
                let scores = q.matmul(&kk.transpose2()?)?.scalar_mul(scale);
                let attn = scores.softmax_last();
                heads.push(attn.matmul(&v)?);
            }
            let ctx = Tensor::concat(&heads, 1)?
                .matmul(&block.wo)?
                .add_row(&block.bo)?;
            x = x.add(&ctx)?;

            let h2 = x.layer_norm(&block.ln2_g, &block.ln2_b, eps)?;
            let ff = h2
                .matmul(&block.ff_w1)?
                .add_row(&block.ff_b1)?
                .gelu()
                .matmul(&block.ff_w2)?
                .add_row(&block.ff_b2)?;
            x = x.add(&ff)?;

            layer_embeddings.push(x.mean_axis(0)?);
        }
        Ok((layer_embeddings, x))
    }

    /// Learned-query attention pooling over time; the teacher also maps the
    /// pooled embedding through its two-class linear head.
    pub fn backend_head(&self, final_seq: &Tensor<F>) -> Result<(Tensor<F>, Option<Tensor<F>>)> {
        let shape = final_seq.shape();
        let (t, d) = (shape[0], shape[1]);
        let scale: F = k(1.0 / (d as f64).sqrt());
        let scores = final_seq
            .matmul(&self.pool_query.reshape(vec![d, 1])?)?
            .reshape(vec![t])?
            .scalar_mul(scale);
        let weights = scores.softmax_last().reshape(vec![1, t])?;
        let pooled = weights.matmul(final_seq)?.reshape(vec![d])?;

        let logits = match (&self.cls_w, &self.cls_b) {
            (Some(w), Some(b)) => {
                let c = w.shape()[1];
                Some(
                    pooled
                        .reshape(vec![1, d])?
                        .matmul(w)?
                        .add_row(b)?
                        .reshape(vec![c])?,
                )
            }
            _ => None,
        };
        Ok((pooled, logits))
    }

    /// Full pass: waveform → frontend → transformer stack → backend head.
    pub fn forward(&self, waveform: &[F]) -> Result<HiddenStack<F>> {
        let frames = self.conv_frontend(waveform)?;
        let (layer_embeddings, final_seq) = self.encoder_forward(&frames)?;
        let (backend_embedding, logits) = self.backend_head(&final_seq)?;
        Ok(HiddenStack {
            layer_embeddings,
            backend_embedding,
            logits,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(num_classes: Option<usize>) -> EncoderConfig {
        EncoderConfig {
            num_layers: 1,
            d_model: 8,
            n_heads: 2,
            ff_dim: 16,
            frontend_frame: 40,
            frontend_stride: 20,
            num_classes,
        }
    }

    #[test]
    fn frontend_frame_count_matches_formula() {
        let mut cfg = tiny_config(None);
        cfg.frontend_frame = 400;
        cfg.frontend_stride = 200;
        let enc = Encoder::<f64>::new(cfg, 1).unwrap();
        assert_eq!(enc.num_frames(4000).unwrap(), 19);
    }

    #[test]
    fn frontend_non_overlapping_stride() {
        let mut cfg = tiny_config(None);
        cfg.frontend_frame = 40;
        cfg.frontend_stride = 40;
        let enc = Encoder::<f64>::new(cfg, 1).unwrap();
        // floor((330 - 40)/40) + 1 = 8, one short of 330/40 rounded down with remainder
        assert_eq!(enc.num_frames(330).unwrap(), 8);
        assert_eq!(enc.num_frames(320).unwrap(), 8);
    }

    #[test]
    fn frontend_rejects_short_waveform() {
        let enc = Encoder::<f64>::new(tiny_config(None), 1).unwrap();
        let err = enc.conv_frontend(&[0.0; 10]).unwrap_err();
        assert!(matches!(err, Error::WaveformTooShort { len: 10, frame: 40 }));
    }

    #[test]
    fn zero_waveform_yields_finite_bias_pattern() {
        let enc = Encoder::<f64>::new(tiny_config(None), 1).unwrap();
        let frames = enc.conv_frontend(&vec![0.0; 100]).unwrap();
        assert!(frames.all_finite());
        // every frame sees the same (zero) input, so all rows agree
        let data = frames.data();
        let d = 8;
        for r in 1..frames.shape()[0] {
            assert_eq!(&data[r * d..(r + 1) * d], &data[..d]);
        }
    }

    #[test]
    fn residual_passthrough_when_projections_are_zero() {
        let cfg = tiny_config(None);
        let enc = Encoder::<f64>::new(cfg, 3).unwrap();
        for (name, p) in enc.params() {
            if name.contains("attn.o.") || name.contains("ff.w2") || name.contains("ff.b2") {
                p.set_data(vec![0.0; p.numel()]);
            }
        }
        let frames = Tensor::from_vec(vec![5, 8], (0..40).map(|i| 0.01 * i as f64).collect())
            .unwrap();
        let (embs, _) = enc.encoder_forward(&frames).unwrap();
        let block_input = frames.add(&enc.positional_encoding(5)).unwrap();
        let pooled_input = block_input.mean_axis(0).unwrap().data();
        let emb = embs[0].data();
        for (a, b) in emb.iter().zip(&pooled_input) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn permuting_frames_changes_embeddings() {
        let enc = Encoder::<f64>::new(tiny_config(None), 5).unwrap();
        let data: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let frames = Tensor::from_vec(vec![5, 8], data.clone()).unwrap();
        let mut permuted = data;
        permuted.rotate_left(8); // cyclic shift of the frame rows
        let frames_p = Tensor::from_vec(vec![5, 8], permuted).unwrap();
        let (e1, _) = enc.encoder_forward(&frames).unwrap();
        let (e2, _) = enc.encoder_forward(&frames_p).unwrap();
        let diff: f64 = e1[0]
            .data()
            .iter()
            .zip(e2[0].data())
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(diff > 1e-6, "positional encoding should break permutation symmetry");
    }

    #[test]
    fn zero_query_pools_to_time_mean() {
        let enc = Encoder::<f64>::new(tiny_config(None), 7).unwrap();
        enc.pool_query.set_data(vec![0.0; 8]);
        let seq = Tensor::from_vec(vec![4, 8], (0..32).map(|i| i as f64 * 0.1).collect()).unwrap();
        let (pooled, logits) = enc.backend_head(&seq).unwrap();
        assert!(logits.is_none());
        let mean = seq.mean_axis(0).unwrap().data();
        for (a, b) in pooled.data().iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn teacher_logits_have_two_classes_and_softmax_sums_to_one() {
        let enc = Encoder::<f64>::new(tiny_config(Some(2)), 9).unwrap();
        let wave: Vec<f64> = (0..200).map(|i| (i as f64 * 0.05).sin() * 0.5).collect();
        let stack = enc.forward(&wave).unwrap();
        let logits = stack.logits.expect("teacher emits logits");
        assert_eq!(logits.shape(), vec![2]);
        let probs = logits.softmax_last().data();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_is_deterministic_and_embeddings_sized() {
        let enc = Encoder::<f64>::new(tiny_config(Some(2)), 11).unwrap();
        let wave: Vec<f64> = (0..300).map(|i| (i as f64 * 0.03).cos() * 0.3).collect();
        let s1 = enc.forward(&wave).unwrap();
        let s2 = enc.forward(&wave).unwrap();
        assert_eq!(s1.layer_embeddings.len(), 1);
        for (a, b) in s1
            .layer_embeddings
            .iter()
            .chain(std::iter::once(&s1.backend_embedding))
            .zip(s2.layer_embeddings.iter().chain(std::iter::once(&s2.backend_embedding)))
        {
            assert_eq!(a.shape(), vec![8]);
            let (da, db) = (a.data(), b.data());
            assert!(da.iter().all(|v| v.is_finite()));
            assert_eq!(
                da.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                db.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn full_scale_depths_are_constructible() {
        let mut teacher_cfg = tiny_config(Some(2));
        teacher_cfg.num_layers = 24;
        let mut student_cfg = tiny_config(None);
        student_cfg.num_layers = 8;
        let teacher = Encoder::<f64>::new(teacher_cfg, 1).unwrap();
        let student = Encoder::<f64>::new(student_cfg, 2).unwrap();
        let wave: Vec<f64> = (0..200).map(|i| 0.2 * (i as f64 * 0.11).sin()).collect();
        assert_eq!(teacher.forward(&wave).unwrap().layer_embeddings.len(), 24);
        assert_eq!(student.forward(&wave).unwrap().layer_embeddings.len(), 8);
    }

    #[test]
    fn layer_map_full_scale() {
        let map = layer_map(24, 8).unwrap();
        assert_eq!(map.pairs, vec![(2, 6), (4, 12), (6, 18), (8, 24)]);
        assert!(map.includes_backend);
        assert_eq!(map.num_pairs(), 5);
    }

    #[test]
    fn layer_map_desk_scale() {
        let map = layer_map(12, 4).unwrap();
        assert_eq!(map.pairs, vec![(2, 6), (4, 12)]);
        assert_eq!(map.num_pairs(), 3);
    }

    #[test]
    fn layer_map_rejects_odd_student() {
        assert!(layer_map(8, 3).is_err());
        assert!(layer_map(8, 0).is_err());
    }

    #[test]
    fn layer_map_rejects_indivisible_depths() {
        assert!(layer_map(10, 4).is_err());
    }

    #[test]
    fn config_rejects_bad_heads() {
        let mut cfg = tiny_config(None);
        cfg.n_heads = 3;
        assert!(Encoder::<f64>::new(cfg, 1).is_err());
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = Encoder::<f64>::new(tiny_config(Some(2)), 42).unwrap();
        let b = Encoder::<f64>::new(tiny_config(Some(2)), 42).unwrap();
        for ((na, pa), (nb, pb)) in a.params().iter().zip(b.params()) {
            assert_eq!(na, nb);
            assert_eq!(
                pa.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                pb.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
