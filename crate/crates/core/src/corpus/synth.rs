//! Source-filter synthesis of speech-like utterances, and the attack-family
//! transforms layered on top of a bonafide draw.
//!
//! Seen families (A01-A04) and unseen families (U01-U04) use disjoint
//! mechanisms: pitch statistics, spectral phase, spectral magnitude and
//! waveform dynamics on the seen side; time structure, additive content,
//! formant structure and bandwidth on the unseen side.

use std::f64::consts::PI;

use crate::rng::Rng;

use super::dsp;

pub const SAMPLE_RATE: usize = 16000;

/// Discrete F0 targets used by the constant-pitch family.
const A01_PITCH_PRESETS: [f64; 3] = [95.0, 150.0, 235.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PitchMode {
    /// Jitter, vibrato and slow drift on the pitch contour.
    Natural,
    /// One integer pitch period for the whole utterance (A01).
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FormantMode {
    Natural,
    /// One broad resonance instead of distinct formants (U03).
    Flattened,
}

/// Per-utterance draw of every random synthesis parameter.
#[derive(Clone, Debug)]
struct Draw {
    duration_s: f64,
    lead_silence_s: f64,
    tail_silence_s: f64,
    f0: f64,
    drift_depth: f64,
    drift_rate: f64,
    drift_phase: f64,
    vibrato_depth: f64,
    vibrato_rate: f64,
    vibrato_phase: f64,
    jitter: f64,
    formants: Vec<(f64, f64, f64)>, // (center, bandwidth, gain)
    am_rate: f64,
    am_depth: f64,
    am_phase: f64,
    snr_db: f64,
}

fn draw_params(rng: &mut Rng, duration_range: (f64, f64)) -> Draw {
    let f0 = rng.range(100.0, 220.0);
    let num_formants = 2 + rng.below(2); // 2 or 3
    let mut formants = Vec::with_capacity(num_formants);
    formants.push((rng.range(350.0, 850.0), rng.range(60.0, 120.0), 1.0));
    formants.push((rng.range(950.0, 2200.0), rng.range(80.0, 160.0), 0.63));
    if num_formants == 3 {
        formants.push((rng.range(2300.0, 3100.0), rng.range(100.0, 200.0), 0.4));
    }
    Draw {
        duration_s: rng.range(duration_range.0, duration_range.1),
        lead_silence_s: rng.range(0.15, 0.3),
        tail_silence_s: rng.range(0.15, 0.3),
        f0,
        drift_depth: rng.range(0.01, 0.04),
        drift_rate: rng.range(0.1, 0.5),
        drift_phase: rng.range(0.0, 2.0 * PI),
        vibrato_depth: rng.range(0.005, 0.02),
        vibrato_rate: rng.range(4.5, 6.5),
        vibrato_phase: rng.range(0.0, 2.0 * PI),
        jitter: rng.range(0.008, 0.02),
        formants,
        am_rate: rng.range(1.5, 3.5),
        am_depth: rng.range(0.1, 0.3),
        am_phase: rng.range(0.0, 2.0 * PI),
        snr_db: rng.range(40.0, 55.0),
    }
}

struct Rendered {
    samples: Vec<f64>,
    envelope: Vec<f64>,
    f0_mean: f64,
}

/// Harmonic pulse train through parallel formant resonators, shaped by an
/// amplitude envelope with leading/trailing silence.
fn render(draw: &Draw, rng: &mut Rng, pitch: PitchMode, formant_mode: FormantMode) -> Rendered {
    let fs = SAMPLE_RATE as f64;
    let n = (draw.duration_s * fs).round() as usize;
    let voiced_start = (draw.lead_silence_s * fs).round() as usize;
    let voiced_end = n.saturating_sub((draw.tail_silence_s * fs).round() as usize);

    // glottal source: impulse train following the pitch contour
    let preset_f0 = A01_PITCH_PRESETS[(draw.f0 * 1000.0) as usize % A01_PITCH_PRESETS.len()];
    let f0_at = |t: f64| match pitch {
        PitchMode::Constant => preset_f0,
        PitchMode::Natural => {
            draw.f0
                * (1.0
                    + draw.drift_depth * (2.0 * PI * draw.drift_rate * t + draw.drift_phase).sin()
                    + draw.vibrato_depth
                        * (2.0 * PI * draw.vibrato_rate * t + draw.vibrato_phase).sin())
        }
    };
    let mut source = vec![0.0f64; n];
    let mut pos = voiced_start as f64;
    while (pos as usize) < voiced_end {
        source[pos as usize] = 1.0;
        let period = match pitch {
            // integer period: the pitch is exactly constant sample-to-sample
            PitchMode::Constant => (fs / preset_f0).round(),
            PitchMode::Natural => {
                let base = fs / f0_at(pos / fs);
                base * (1.0 + draw.jitter * rng.range(-1.0, 1.0))
            }
        };
        pos += period.max(2.0);
    }
    // gentle glottal rolloff before the vocal-tract filter
    let source = dsp::one_pole_lp(&source, 0.7);

    let filtered = match formant_mode {
        FormantMode::Natural => {
            let mut acc = vec![0.0f64; n];
            for &(center, bw, gain) in &draw.formants {
                let band = dsp::resonator(&source, fs, center, bw);
                for (a, b) in acc.iter_mut().zip(&band) {
                    *a += gain * b;
                }
            }
            acc
        }
        FormantMode::Flattened => dsp::resonator(&source, fs, 1200.0, 1600.0),
    };

    // envelope: silence, 50 ms raised-cosine ramps, slow AM in the sustain
    let ramp = (0.05 * fs) as usize;
    let mut envelope = vec![0.0f64; n];
    for (i, e) in envelope.iter_mut().enumerate() {
        if i < voiced_start || i >= voiced_end {
            continue;
        }
        let up = (i - voiced_start) as f64 / ramp as f64;
        let down = (voiced_end - 1 - i) as f64 / ramp as f64;
        let edge = up.min(down).min(1.0);
        let shape = 0.5 - 0.5 * (PI * edge).cos();
        let t = i as f64 / fs;
        let am = match pitch {
            // robotic delivery: constant pitch comes with flat dynamics
            PitchMode::Constant => 1.0,
            PitchMode::Natural => {
                1.0 - draw.am_depth * 0.5
                    + draw.am_depth * 0.5 * (2.0 * PI * draw.am_rate * t + draw.am_phase).sin()
            }
        };
        *e = shape * am;
    }

    let aspiration = {
        let raw: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        match formant_mode {
            FormantMode::Natural => dsp::resonator(&raw, fs, 5500.0, 3000.0),
            FormantMode::Flattened => dsp::resonator(&raw, fs, 1200.0, 1600.0),
        }
    };
    let speech_rms = dsp::rms(&filtered).max(1e-9);
    let asp_gain = speech_rms / dsp::rms(&aspiration).max(1e-9) * 10f64.powf(-20.0 / 20.0);

    let samples: Vec<f64> = filtered
        .iter()
        .zip(&aspiration)
        .zip(&envelope)
        .map(|((s, a), e)| (s + asp_gain * a) * e)
        .collect();
    Rendered {
        samples,
        envelope,
        f0_mean: match pitch {
            PitchMode::Constant => preset_f0,
            PitchMode::Natural => draw.f0,
        },
    }
}

/// Noise floor at the drawn SNR, then peak normalization to 0.89.
fn finalize(mut samples: Vec<f64>, draw: &Draw, rng: &mut Rng) -> Vec<f64> {
    let signal_rms = dsp::rms(&samples).max(1e-9);
    let noise_rms = signal_rms * 10f64.powf(-draw.snr_db / 20.0);
    for s in samples.iter_mut() {
        *s += noise_rms * rng.normal();
    }
    let pk = dsp::peak(&samples).max(1e-9);
    let scale = 0.89 / pk;
    for s in samples.iter_mut() {
        *s *= scale;
    }
    samples
}

/// Spoofing transforms. Seen and unseen mechanisms are disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackFamily {
    /// Seen: pitch contour frozen to a constant period.
    A01,
    /// Seen: per-frame spectral phase randomization.
    A02,
    /// Seen: spectral magnitude quantization (vocoder-artifact analog).
    A03,
    /// Seen: hard clipping followed by mu-law companding.
    A04,
    /// Unseen: overlap-add time smearing across adjacent frames.
    U01,
    /// Unseen: additive inharmonic tones under the speech envelope.
    U02,
    /// Unseen: formant structure flattened to one broad resonance.
    U03,
    /// Unseen: band-limited resynthesis (3 kHz lowpass + requantization).
    U04,
}

impl AttackFamily {
    pub const SEEN: [AttackFamily; 4] = [
        AttackFamily::A01,
        AttackFamily::A02,
        AttackFamily::A03,
        AttackFamily::A04,
    ];
    pub const UNSEEN: [AttackFamily; 4] = [
        AttackFamily::U01,
        AttackFamily::U02,
        AttackFamily::U03,
        AttackFamily::U04,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            AttackFamily::A01 => "A01",
            AttackFamily::A02 => "A02",
            AttackFamily::A03 => "A03",
            AttackFamily::A04 => "A04",
            AttackFamily::U01 => "U01",
            AttackFamily::U02 => "U02",
            AttackFamily::U03 => "U03",
            AttackFamily::U04 => "U04",
        }
    }

    pub fn parse(s: &str) -> Option<AttackFamily> {
        Self::SEEN
            .iter()
            .chain(Self::UNSEEN.iter())
            .copied()
            .find(|f| f.id() == s)
    }

    pub fn is_seen(&self) -> bool {
        Self::SEEN.contains(self)
    }
}

/// Renders the bonafide waveform for `(seed, utt_id)`.
pub fn synth_bonafide(seed: u64, utt_id: &str, duration_range: (f64, f64)) -> Vec<f64> {
    let mut rng = Rng::keyed(seed, utt_id);
    let draw = draw_params(&mut rng, duration_range);
    let rendered = render(&draw, &mut rng, PitchMode::Natural, FormantMode::Natural);
    finalize(rendered.samples, &draw, &mut rng)
}

/// Renders a spoofed waveform: the bonafide draw keyed by `base_key` with
/// the family's artifact applied. Pairing spoofs with bonafide draws keeps
/// utterance identity (pitch range, formants, timing) carrying no class
/// information, the way spoofed corpora reuse the bonafide speakers.
pub fn synth_spoof(
    family: AttackFamily,
    seed: u64,
    base_key: &str,
    utt_id: &str,
    duration_range: (f64, f64),
) -> Vec<f64> {
    let mut rng = Rng::keyed(seed, base_key);
    let draw = draw_params(&mut rng, duration_range);
    let mut fx_rng = Rng::keyed(seed, &format!("{utt_id}/{}", family.id()));

    let (pitch, formant_mode) = match family {
        AttackFamily::A01 => (PitchMode::Constant, FormantMode::Natural),
        AttackFamily::U03 => (PitchMode::Natural, FormantMode::Flattened),
        _ => (PitchMode::Natural, FormantMode::Natural),
    };
    let rendered = render(&draw, &mut rng, pitch, formant_mode);
    let samples = match family {
        AttackFamily::A01 | AttackFamily::U03 => rendered.samples,
        AttackFamily::A02 => phase_randomize(&rendered.samples, &mut fx_rng),
        AttackFamily::A03 => magnitude_quantize(&rendered.samples),
        AttackFamily::A04 => clip_and_compand(&rendered.samples),
        AttackFamily::U01 => time_smear(&rendered.samples),
        AttackFamily::U02 => {
            add_inharmonic_tones(&rendered.samples, &rendered.envelope, rendered.f0_mean, &mut fx_rng)
        }
        AttackFamily::U04 => bandlimit_requantize(&rendered.samples),
    };
    finalize(samples, &draw, &mut rng)
}

/// Whole-utterance phase randomization: the long-term magnitude spectrum
/// is kept while every phase is redrawn, which turns the utterance into
/// stationary speech-shaped noise (the magnitude-only resynthesis
/// artifact).
fn phase_randomize(x: &[f64], rng: &mut Rng) -> Vec<f64> {
    let n2 = x.len().next_power_of_two();
    let mut re = vec![0.0; n2];
    let mut im = vec![0.0; n2];
    re[..x.len()].copy_from_slice(x);
    dsp::fft_in_place(&mut re, &mut im, false);
    for k in 1..n2 / 2 {
        let mag = (re[k] * re[k] + im[k] * im[k]).sqrt();
        let phi = rng.range(0.0, 2.0 * PI);
        re[k] = mag * phi.cos();
        im[k] = mag * phi.sin();
        re[n2 - k] = re[k];
        im[n2 - k] = -im[k];
    }
    dsp::fft_in_place(&mut re, &mut im, true);
    re.truncate(x.len());
    re
}

fn magnitude_quantize(x: &[f64]) -> Vec<f64> {
    let frame = 512;
    dsp::stft_process(x, frame, frame / 2, |_, re, im| {
        let max_mag = re
            .iter()
            .zip(im.iter())
            .map(|(r, i)| (r * r + i * i).sqrt())
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let floor = max_mag / 2.0;
        for k in 0..frame {
            let mag = (re[k] * re[k] + im[k] * im[k]).sqrt();
            if mag < 1e-15 {
                continue;
            }
            let q = if mag < floor { 0.0 } else { max_mag };
            let scale = q / mag;
            re[k] *= scale;
            im[k] *= scale;
        }
    })
}

fn clip_and_compand(x: &[f64]) -> Vec<f64> {
    let clip = 0.25 * dsp::peak(x).max(1e-9);
    let mu = 255.0f64;
    x.iter()
        .map(|&s| {
            let c = s.clamp(-clip, clip) / clip;
            c.signum() * (1.0 + mu * c.abs()).ln() / (1.0 + mu).ln()
        })
        .collect()
}

fn time_smear(x: &[f64]) -> Vec<f64> {
    let frame = 1024;
    let hop = frame / 2;
    let window = dsp::hann(frame);
    let mut out = vec![0.0; x.len() + frame];
    let mut weight = vec![0.0; x.len() + frame];
    let mut prev = vec![0.0; frame];
    let mut prev2 = vec![0.0; frame];
    let mut start = 0usize;
    while start < x.len() {
        let mut cur = vec![0.0; frame];
        for i in 0..frame {
            let s = if start + i < x.len() { x[start + i] } else { 0.0 };
            cur[i] = s * window[i];
        }
        for i in 0..frame {
            let smeared = (cur[i] + prev[i] + prev2[i]) / 3.0;
            out[start + i] += smeared * window[i];
            weight[start + i] += window[i] * window[i];
        }
        prev2 = std::mem::take(&mut prev);
        prev = cur;
        start += hop;
    }
    out.truncate(x.len());
    for (o, w) in out.iter_mut().zip(&weight) {
        if *w > 1e-9 {
            *o /= *w;
        }
    }
    out
}

fn add_inharmonic_tones(x: &[f64], envelope: &[f64], f0: f64, rng: &mut Rng) -> Vec<f64> {
    let fs = SAMPLE_RATE as f64;
    let level = dsp::rms(x) * 10f64.powf(-5.0 / 20.0);
    let ratios = [2.41, 3.73, 5.19];
    let phases: Vec<f64> = ratios.iter().map(|_| rng.range(0.0, 2.0 * PI)).collect();
    x.iter()
        .enumerate()
        .map(|(i, &s)| {
            let t = i as f64 / fs;
            let mut tone = 0.0;
            for (r, phi) in ratios.iter().zip(&phases) {
                tone += (2.0 * PI * f0 * r * t + phi).sin();
            }
            s + level * envelope[i] * tone
        })
        .collect()
}

fn bandlimit_requantize(x: &[f64]) -> Vec<f64> {
    let low = dsp::lowpass_fir(x, SAMPLE_RATE as f64, 3000.0, 129);
    let pk = dsp::peak(&low).max(1e-9);
    let levels = 128.0; // 8-bit magnitude
    low.iter()
        .map(|&s| (s / pk * levels).round() / levels * pk)
        .collect()
}
