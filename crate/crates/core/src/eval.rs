//! Inference scoring and equal-error-rate evaluation.
//!
//! An utterance's detection score is the mean cosine similarity between the
//! teacher's and student's embeddings over the mapped pairs (higher means
//! more bonafide-like). EER is read off the FAR/FRR staircase, linearly
//! interpolated between adjacent operating points when the two rates never
//! meet exactly.

use std::path::Path;

use crate::corpus::{atomic_write, Label, Utterance};
use crate::distill::{LOGIT_BONAFIDE, LOGIT_SPOOF};
use crate::error::{Error, Result};
use crate::models::{layer_map, Encoder, HiddenStack, LayerMap};
use crate::Scalar;

fn to_f64<F: Scalar>(x: F) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).expect("scalar convertible to f64")
}

/// One scored utterance; higher score means more bonafide-like.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRecord {
    pub utt_id: String,
    pub label: Label,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EERResult {
    pub eer: f64,
    pub threshold: f64,
    pub num_bonafide: usize,
    pub num_spoof: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetPoint {
    pub far: f64,
    pub frr: f64,
    pub threshold: f64,
}

// ── similarity scoring ───────────────────────────────────────────────

fn cosine<F: Scalar>(a: &[F], b: &[F]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| to_f64(*x) * to_f64(*y)).sum();
    let na: f64 = a.iter().map(|x| to_f64(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| to_f64(*x).powi(2)).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        return None;
    }
    Some(dot / (na * nb))
}

/// Mean cosine similarity over all mapped pairs of two hidden stacks.
pub fn similarity_from_stacks<F: Scalar>(
    teacher: &HiddenStack<F>,
    student: &HiddenStack<F>,
    map: &LayerMap,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for &(s_idx, t_idx) in &map.pairs {
        let t = teacher.layer(t_idx, "teacher")?;
        let s = student.layer(s_idx, "student")?;
        let cos = cosine(&t.data(), &s.data()).ok_or(Error::DegenerateEmbedding {
            index: count,
            utt_id: None,
        })?;
        sum += cos;
        count += 1;
    }
    if map.includes_backend {
        let cos = cosine(
            &teacher.backend_embedding.data(),
            &student.backend_embedding.data(),
        )
        .ok_or(Error::DegenerateEmbedding {
            index: count,
            utt_id: None,
        })?;
        sum += cos;
        count += 1;
    }
    Ok(sum / count as f64)
}

/// OCKD similarity score for one utterance: both models forward the same
/// waveform, and the mapped embeddings are compared.
pub fn score_utterance<F: Scalar>(
    teacher: &Encoder<F>,
    student: &Encoder<F>,
    utt: &Utterance,
) -> Result<f64> {
    teacher
        .config()
        .check_embedding_compatible(student.config())?;
    let map = layer_map(teacher.config().num_layers, student.config().num_layers)?;
    let wave: Vec<F> = utt
        .samples
        .iter()
        .map(|&s| F::from(s).expect("sample convertible"))
        .collect();
    let t_stack = teacher.forward(&wave)?;
    let s_stack = student.forward(&wave)?;
    similarity_from_stacks(&t_stack, &s_stack, &map).map_err(|e| match e {
        Error::DegenerateEmbedding { index, .. } => Error::DegenerateEmbedding {
            index,
            utt_id: Some(utt.utt_id.clone()),
        },
        other => other,
    })
}

/// Teacher-only baseline score: bonafide logit minus spoof logit.
pub fn teacher_logit_score<F: Scalar>(teacher: &Encoder<F>, utt: &Utterance) -> Result<f64> {
    let wave: Vec<F> = utt
        .samples
        .iter()
        .map(|&s| F::from(s).expect("sample convertible"))
        .collect();
    let stack = teacher.forward(&wave)?;
    let logits = stack.logits.ok_or_else(|| {
        Error::InvalidConfig("logit scoring requires a model with a classifier head".into())
    })?;
    let data = logits.data();
    Ok(to_f64(data[LOGIT_BONAFIDE]) - to_f64(data[LOGIT_SPOOF]))
}

// ── EER / DET ────────────────────────────────────────────────────────

fn class_counts(records: &[ScoreRecord]) -> Result<(usize, usize)> {
    let num_bonafide = records.iter().filter(|r| r.label == Label::Bonafide).count();
    let num_spoof = records.len() - num_bonafide;
    if num_bonafide == 0 || num_spoof == 0 {
        return Err(Error::SingleClassScores {
            bonafide: num_bonafide,
            spoof: num_spoof,
        });
    }
    Ok((num_bonafide, num_spoof))
}

/// The FAR/FRR staircase over `distinct scores + 1` thresholds: one below
/// the minimum, one between each pair of adjacent distinct scores, one
/// above the maximum. FAR is non-increasing and FRR non-decreasing.
pub fn det_points(records: &[ScoreRecord]) -> Result<Vec<DetPoint>> {
    let (num_bonafide, num_spoof) = class_counts(records)?;
    let mut sorted: Vec<(f64, Label)> = records.iter().map(|r| (r.score, r.label)).collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));

    let mut distinct: Vec<f64> = Vec::new();
    for (s, _) in &sorted {
        if distinct.last().is_none_or(|last| last < s) {
            distinct.push(*s);
        }
    }

    // thresholds: accept (call bonafide) iff score >= threshold
    let mut thresholds = Vec::with_capacity(distinct.len() + 1);
    thresholds.push(distinct[0] - 1.0);
    for w in distinct.windows(2) {
        thresholds.push(0.5 * (w[0] + w[1]));
    }
    thresholds.push(distinct[distinct.len() - 1] + 1.0);

    // walk scores once per threshold boundary, tracking cumulative counts
    let mut points = Vec::with_capacity(thresholds.len());
    let mut idx = 0usize; // records with score < current threshold
    let mut bonafide_below = 0usize;
    let mut spoof_below = 0usize;
    for theta in thresholds {
        while idx < sorted.len() && sorted[idx].0 < theta {
            match sorted[idx].1 {
                Label::Bonafide => bonafide_below += 1,
                Label::Spoof => spoof_below += 1,
            }
            idx += 1;
        }
        points.push(DetPoint {
            far: (num_spoof - spoof_below) as f64 / num_spoof as f64,
            frr: bonafide_below as f64 / num_bonafide as f64,
            threshold: theta,
        });
    }
    Ok(points)
}

/// EER at the FAR/FRR crossing, linearly interpolated between adjacent
/// operating points when the rates never coincide exactly.
pub fn compute_eer(records: &[ScoreRecord]) -> Result<EERResult> {
    let (num_bonafide, num_spoof) = class_counts(records)?;
    let points = det_points(records)?;

    // the staircase starts at (FAR 1, FRR 0) and ends at (FAR 0, FRR 1)
    let cross = points
        .iter()
        .position(|p| p.frr >= p.far)
        .expect("staircase always reaches FRR >= FAR");
    let (eer, threshold) = if points[cross].frr == points[cross].far || cross == 0 {
        (points[cross].far, points[cross].threshold)
    } else {
        let a = &points[cross - 1];
        let b = &points[cross];
        let gap_a = a.far - a.frr; // > 0
        let gap_b = b.frr - b.far; // >= 0
        let t = gap_a / (gap_a + gap_b);
        (
            a.far + t * (b.far - a.far),
            a.threshold + t * (b.threshold - a.threshold),
        )
    };
    Ok(EERResult {
        eer,
        threshold,
        num_bonafide,
        num_spoof,
    })
}

/// EER over the union of several record sets under one global threshold.
pub fn pooled_eer(sets: &[&[ScoreRecord]]) -> Result<EERResult> {
    let pooled: Vec<ScoreRecord> = sets.iter().flat_map(|s| s.iter().cloned()).collect();
    compute_eer(&pooled)
}

// ── score files ──────────────────────────────────────────────────────

/// Writes `<utt_id> <label> <score:%.6f>` lines.
pub fn write_scores(path: &Path, records: &[ScoreRecord]) -> Result<()> {
    let mut body = String::new();
    for r in records {
        body.push_str(&format!(
            "{} {} {:.6}\n",
            r.utt_id,
            r.label.as_str(),
            r.score
        ));
    }
    atomic_write(path, body.as_bytes())
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::ScoreParse {
                path: path.display().to_string(),
                line: i + 1,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let label = Label::parse(fields[1]).ok_or_else(|| Error::ScoreParse {
            path: path.display().to_string(),
            line: i + 1,
            reason: format!("unknown label `{}`", fields[1]),
        })?;
        let score: f64 = fields[2].parse().map_err(|_| Error::ScoreParse {
            path: path.display().to_string(),
            line: i + 1,
            reason: format!("bad score `{}`", fields[2]),
        })?;
        out.push(ScoreRecord {
            utt_id: fields[0].to_string(),
            label,
            score,
        });
    }
    Ok(out)
}

/// DET staircase as CSV with a `far,frr,threshold` header.
pub fn det_csv(points: &[DetPoint]) -> String {
    let mut s = String::from("far,frr,threshold\n");
    for p in points {
        s.push_str(&format!("{:.6},{:.6},{:.6}\n", p.far, p.frr, p.threshold));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::layer_map;
    use crate::rng::Rng;
    use crate::Tensor;

    fn rec(label: Label, score: f64) -> ScoreRecord {
        ScoreRecord {
            utt_id: format!("u{}", (score * 1000.0) as i64),
            label,
            score,
        }
    }

    fn recs(bonafide: &[f64], spoof: &[f64]) -> Vec<ScoreRecord> {
        let mut out: Vec<ScoreRecord> =
            bonafide.iter().map(|&s| rec(Label::Bonafide, s)).collect();
        out.extend(spoof.iter().map(|&s| rec(Label::Spoof, s)));
        out
    }

    #[test]
    fn perfectly_separated_scores_have_zero_eer() {
        let r = recs(&[0.9, 0.8], &[0.2, 0.1]);
        let e = compute_eer(&r).unwrap();
        assert_eq!(e.eer, 0.0);
        assert_eq!(e.num_bonafide, 2);
        assert_eq!(e.num_spoof, 2);
    }

    #[test]
    fn alternating_ranks_sit_at_chance() {
        let r = recs(&[0.1, 0.3, 0.5, 0.7], &[0.2, 0.4, 0.6, 0.8]);
        let e = compute_eer(&r).unwrap();
        assert!((e.eer - 0.5).abs() <= 0.25, "eer {}", e.eer);
    }

    #[test]
    fn single_class_is_rejected() {
        let r: Vec<ScoreRecord> = [0.4, 0.5].iter().map(|&s| rec(Label::Spoof, s)).collect();
        assert!(matches!(
            compute_eer(&r),
            Err(Error::SingleClassScores { bonafide: 0, spoof: 2 })
        ));
        assert!(det_points(&r).is_err());
    }

    #[test]
    fn det_endpoints_and_monotonicity() {
        let r = recs(&[0.9], &[0.1]);
        let pts = det_points(&r).unwrap();
        assert_eq!(pts.len(), 3); // distinct scores + 1
        assert_eq!((pts[0].far, pts[0].frr), (1.0, 0.0));
        assert_eq!((pts[2].far, pts[2].frr), (0.0, 1.0));
        for w in pts.windows(2) {
            assert!(w[1].far <= w[0].far);
            assert!(w[1].frr >= w[0].frr);
            assert!(w[1].threshold > w[0].threshold);
        }
    }

    #[test]
    fn det_point_count_on_five_distinct_scores() {
        let r = recs(&[0.9, 0.7, 0.5], &[0.3, 0.1]);
        assert_eq!(det_points(&r).unwrap().len(), 6);
        // with ties: 3 distinct scores → 4 points
        let tied = recs(&[0.5, 0.5, 0.9], &[0.1, 0.1]);
        assert_eq!(det_points(&tied).unwrap().len(), 4);
    }

    /// Brute-force oracle: evaluates FAR/FRR by a full pass at every
    /// midpoint threshold, then interpolates the crossing linearly.
    fn eer_oracle(records: &[ScoreRecord]) -> f64 {
        let n_b = records.iter().filter(|r| r.label == Label::Bonafide).count() as f64;
        let n_s = records.len() as f64 - n_b;
        let mut scores: Vec<f64> = records.iter().map(|r| r.score).collect();
        scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
        scores.dedup();
        let mut thetas = vec![scores[0] - 1.0];
        for w in scores.windows(2) {
            thetas.push(0.5 * (w[0] + w[1]));
        }
        thetas.push(scores[scores.len() - 1] + 1.0);

        let rates = |theta: f64| -> (f64, f64) {
            let mut fa = 0.0;
            let mut fr = 0.0;
            for r in records {
                match r.label {
                    Label::Spoof if r.score >= theta => fa += 1.0,
                    Label::Bonafide if r.score < theta => fr += 1.0,
                    _ => {}
                }
            }
            (fa / n_s, fr / n_b)
        };
        let mut prev = rates(thetas[0]);
        for &theta in &thetas[1..] {
            let cur = rates(theta);
            if cur.1 >= cur.0 {
                if cur.1 == cur.0 {
                    return cur.0;
                }
                let gap_a = prev.0 - prev.1;
                let gap_b = cur.1 - cur.0;
                let t = gap_a / (gap_a + gap_b);
                return prev.0 + t * (cur.0 - prev.0);
            }
            prev = cur;
        }
        unreachable!("staircase always crosses");
    }

    #[test]
    fn eer_matches_brute_force_oracle_on_random_sets() {
        let mut rng = Rng::new(51);
        for case in 0..200 {
            let n_b = 1 + rng.below(25);
            let n_s = 1 + rng.below(25);
            // quantized scores so ties actually happen
            let mut records = Vec::new();
            for i in 0..n_b {
                let s = (rng.range(-1.0, 1.0) * 8.0).round() / 8.0 + 0.05;
                records.push(ScoreRecord {
                    utt_id: format!("b{i}"),
                    label: Label::Bonafide,
                    score: s,
                });
            }
            for i in 0..n_s {
                let s = (rng.range(-1.0, 1.0) * 8.0).round() / 8.0;
                records.push(ScoreRecord {
                    utt_id: format!("s{i}"),
                    label: Label::Spoof,
                    score: s,
                });
            }
            let fast = compute_eer(&records).unwrap().eer;
            let slow = eer_oracle(&records);
            assert!(
                (fast - slow).abs() < 1e-9,
                "case {case}: {fast} vs oracle {slow}"
            );
        }
    }

    #[test]
    fn eer_invariant_under_strictly_increasing_transforms() {
        let mut rng = Rng::new(53);
        for _ in 0..50 {
            let n_b = 2 + rng.below(20);
            let n_s = 2 + rng.below(20);
            let mut records = Vec::new();
            for i in 0..n_b {
                records.push(ScoreRecord {
                    utt_id: format!("b{i}"),
                    label: Label::Bonafide,
                    score: rng.range(-1.0, 1.5),
                });
            }
            for i in 0..n_s {
                records.push(ScoreRecord {
                    utt_id: format!("s{i}"),
                    label: Label::Spoof,
                    score: rng.range(-1.5, 1.0),
                });
            }
            let base = compute_eer(&records).unwrap().eer;
            let transforms: [fn(f64) -> f64; 3] = [
                |s| 3.0 * s + 7.0,
                |s| s.exp(),
                |s| s.powi(3) + 0.5 * s,
            ];
            for f in transforms {
                let mapped: Vec<ScoreRecord> = records
                    .iter()
                    .map(|r| ScoreRecord {
                        score: f(r.score),
                        ..r.clone()
                    })
                    .collect();
                let e = compute_eer(&mapped).unwrap().eer;
                assert!((e - base).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eer_symmetric_under_negation_and_label_swap() {
        let mut rng = Rng::new(57);
        for _ in 0..20 {
            let records: Vec<ScoreRecord> = (0..20)
                .map(|i| ScoreRecord {
                    utt_id: format!("u{i}"),
                    label: if rng.below(2) == 0 { Label::Bonafide } else { Label::Spoof },
                    score: rng.range(-1.0, 1.0),
                })
                .collect();
            if class_counts(&records).is_err() {
                continue;
            }
            let flipped: Vec<ScoreRecord> = records
                .iter()
                .map(|r| ScoreRecord {
                    utt_id: r.utt_id.clone(),
                    label: match r.label {
                        Label::Bonafide => Label::Spoof,
                        Label::Spoof => Label::Bonafide,
                    },
                    score: -r.score,
                })
                .collect();
            let a = compute_eer(&records).unwrap().eer;
            let b = compute_eer(&flipped).unwrap().eer;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_eer_iff_separated() {
        let sep = recs(&[0.6, 0.9], &[0.5, 0.1]);
        assert_eq!(compute_eer(&sep).unwrap().eer, 0.0);
        let overlap = recs(&[0.6, 0.4], &[0.5, 0.1]);
        assert!(compute_eer(&overlap).unwrap().eer > 0.0);
    }

    #[test]
    fn pooled_matches_concatenation_and_can_exceed_per_set() {
        let set1 = recs(&[0.8, 0.9], &[0.1, 0.2]);
        let set2 = recs(&[0.85], &[0.15, 0.25]);
        let single = pooled_eer(&[&set1]).unwrap();
        assert_eq!(single, compute_eer(&set1).unwrap());

        let mut concat = set1.clone();
        concat.extend(set2.clone());
        let pooled = pooled_eer(&[&set1, &set2]).unwrap();
        assert_eq!(pooled, compute_eer(&concat).unwrap());

        // opposite calibration offsets: each set separates perfectly, the
        // union under one threshold does not
        let shifted_a = recs(&[0.2, 0.3], &[0.0, 0.1]);
        let shifted_b = recs(&[1.2, 1.3], &[1.0, 1.1]);
        assert_eq!(compute_eer(&shifted_a).unwrap().eer, 0.0);
        assert_eq!(compute_eer(&shifted_b).unwrap().eer, 0.0);
        let pooled_shift = pooled_eer(&[&shifted_a, &shifted_b]).unwrap();
        let max_per_set = 0.0f64;
        assert!(pooled_shift.eer > max_per_set);
        // and the brute-force oracle agrees
        let mut union = shifted_a.clone();
        union.extend(shifted_b.clone());
        assert!((pooled_shift.eer - eer_oracle(&union)).abs() < 1e-9);
    }

    fn stack_from(vecs: Vec<Vec<f64>>, backend: Vec<f64>) -> HiddenStack<f64> {
        HiddenStack {
            layer_embeddings: vecs
                .into_iter()
                .map(|v| Tensor::from_vec(vec![v.len()], v).unwrap())
                .collect(),
            backend_embedding: Tensor::from_vec(vec![backend.len()], backend).unwrap(),
            logits: None,
        }
    }

    #[test]
    fn similarity_mean_over_hand_built_pairs() {
        // map (2,2): one layer pair (2,2) + backend; cosines {1.0, 0.5} → 0.75
        let map = layer_map(2, 2).unwrap();
        let teacher = stack_from(
            vec![vec![9.9, 9.9], vec![1.0, 0.0]],
            vec![1.0, 0.0],
        );
        let student = stack_from(
            vec![vec![0.0, 0.0], vec![2.0, 0.0]], // layer 1 unused by the map
            vec![1.0, 3.0f64.sqrt()],             // cos 60° with backend = 0.5
        );
        let sim = similarity_from_stacks(&teacher, &student, &map).unwrap();
        assert!((sim - 0.75).abs() < 1e-12);
    }

    #[test]
    fn similarity_orthogonal_everywhere_is_zero() {
        let map = layer_map(2, 2).unwrap();
        let teacher = stack_from(vec![vec![0.0; 2], vec![1.0, 0.0]], vec![1.0, 0.0]);
        let student = stack_from(vec![vec![0.0; 2], vec![0.0, 1.0]], vec![0.0, 1.0]);
        let sim = similarity_from_stacks(&teacher, &student, &map).unwrap();
        assert!(sim.abs() < 1e-12);
    }

    #[test]
    fn degenerate_embedding_is_reported() {
        let map = layer_map(2, 2).unwrap();
        let teacher = stack_from(vec![vec![0.0; 2], vec![0.0, 0.0]], vec![1.0, 0.0]);
        let student = stack_from(vec![vec![0.0; 2], vec![1.0, 0.0]], vec![1.0, 0.0]);
        assert!(matches!(
            similarity_from_stacks(&teacher, &student, &map),
            Err(Error::DegenerateEmbedding { .. })
        ));
    }

    #[test]
    fn identical_encoders_score_one() {
        use crate::models::EncoderConfig;
        let cfg = EncoderConfig {
            num_layers: 2,
            d_model: 8,
            n_heads: 2,
            ff_dim: 16,
            frontend_frame: 160,
            frontend_stride: 80,
            num_classes: None,
        };
        let enc_a = Encoder::<f64>::new(cfg.clone(), 77).unwrap();
        let enc_b = Encoder::<f64>::new(cfg, 77).unwrap(); // same seed → same weights
        let utt = Utterance {
            utt_id: "self".into(),
            samples: (0..4000).map(|i| 0.4 * (i as f64 * 0.02).sin()).collect(),
            label: Label::Bonafide,
            attack_id: "-".into(),
        };
        let score = score_utterance(&enc_a, &enc_b, &utt).unwrap();
        assert!((score - 1.0).abs() < 1e-9);
    }

    #[test]
    fn score_file_round_trip_and_errors() {
        let dir = std::env::temp_dir().join("ockd-score-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("scores.txt");
        let records = recs(&[0.91234567, 0.2], &[-0.5]);
        write_scores(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().ends_with("0.912346"));
        let back = read_scores(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert!((back[0].score - 0.912346).abs() < 1e-9);

        std::fs::write(&path, "only two\n").unwrap();
        assert!(matches!(
            read_scores(&path),
            Err(Error::ScoreParse { line: 1, .. })
        ));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn det_csv_shape() {
        let pts = det_points(&recs(&[0.9], &[0.1])).unwrap();
        let csv = det_csv(&pts);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("far,frr,threshold"));
        assert_eq!(lines.count(), pts.len());
    }
}
