//! Small signal-processing toolbox for the synthetic corpus: radix-2 FFT,
//! windowed STFT round-trips, resonators and FIR filtering.

use std::f64::consts::PI;

/// In-place radix-2 complex FFT. `re.len()` must be a power of two.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    assert_eq!(n, im.len());

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let (wr, wi) = (ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let (mut cur_r, mut cur_i) = (1.0f64, 0.0f64);
            for k in 0..len / 2 {
                let (ur, ui) = (re[i + k], im[i + k]);
                let (vr, vi) = (
                    re[i + k + len / 2] * cur_r - im[i + k + len / 2] * cur_i,
                    re[i + k + len / 2] * cur_i + im[i + k + len / 2] * cur_r,
                );
                re[i + k] = ur + vr;
                im[i + k] = ui + vi;
                re[i + k + len / 2] = ur - vr;
                im[i + k + len / 2] = ui - vi;
                let next_r = cur_r * wr - cur_i * wi;
                cur_i = cur_r * wi + cur_i * wr;
                cur_r = next_r;
            }
            i += len;
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
}

pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// STFT round-trip: windows the signal, hands each spectrum to `edit`,
/// resynthesizes by weighted overlap-add. Output has the input's length.
pub fn stft_process(
    x: &[f64],
    frame: usize,
    hop: usize,
    mut edit: impl FnMut(usize, &mut [f64], &mut [f64]),
) -> Vec<f64> {
    let window = hann(frame);
    let mut out = vec![0.0; x.len() + frame];
    let mut weight = vec![0.0; x.len() + frame];
    let mut idx = 0usize;
    let mut start = 0usize;
    while start < x.len() {
        let mut re = vec![0.0; frame];
        let mut im = vec![0.0; frame];
        for i in 0..frame {
            let s = if start + i < x.len() { x[start + i] } else { 0.0 };
            re[i] = s * window[i];
        }
        fft_in_place(&mut re, &mut im, false);
        edit(idx, &mut re, &mut im);
        fft_in_place(&mut re, &mut im, true);
        for i in 0..frame {
            out[start + i] += re[i] * window[i];
            weight[start + i] += window[i] * window[i];
        }
        idx += 1;
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

/// Two-pole resonator, gain-normalized to roughly unity at the center
/// frequency.
pub fn resonator(x: &[f64], sample_rate: f64, center_hz: f64, bandwidth_hz: f64) -> Vec<f64> {
    let r = (-PI * bandwidth_hz / sample_rate).exp();
    let w0 = 2.0 * PI * center_hz / sample_rate;
    let b1 = 2.0 * r * w0.cos();
    let b2 = -r * r;
    let gain = (1.0 - r) * (1.0 - 2.0 * r * (2.0 * w0).cos() + r * r).sqrt();
    let mut out = vec![0.0; x.len()];
    let (mut y1, mut y2) = (0.0f64, 0.0f64);
    for (i, &s) in x.iter().enumerate() {
        let y = gain * s + b1 * y1 + b2 * y2;
        out[i] = y;
        y2 = y1;
        y1 = y;
    }
    out
}

/// One-pole lowpass, `a` in (0, 1]; smaller `a` means darker output.
pub fn one_pole_lp(x: &[f64], a: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut y = 0.0f64;
    for (i, &s) in x.iter().enumerate() {
        y = a * s + (1.0 - a) * y;
        out[i] = y;
    }
    out
}

/// Linear-phase windowed-sinc lowpass (Hamming), delay-compensated so the
/// output aligns with the input.
pub fn lowpass_fir(x: &[f64], sample_rate: f64, cutoff_hz: f64, taps: usize) -> Vec<f64> {
    assert!(taps % 2 == 1, "taps must be odd");
    let fc = cutoff_hz / sample_rate;
    let mid = (taps / 2) as isize;
    let mut h = vec![0.0; taps];
    let mut sum = 0.0;
    for i in 0..taps {
        let m = i as isize - mid;
        let sinc = if m == 0 {
            2.0 * fc
        } else {
            (2.0 * PI * fc * m as f64).sin() / (PI * m as f64)
        };
        let win = 0.54 - 0.46 * (2.0 * PI * i as f64 / (taps - 1) as f64).cos();
        h[i] = sinc * win;
        sum += h[i];
    }
    for v in h.iter_mut() {
        *v /= sum;
    }
    let mut out = vec![0.0; x.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (ti, &hv) in h.iter().enumerate() {
            let src = i as isize + mid - ti as isize;
            if src >= 0 && (src as usize) < x.len() {
                acc += hv * x[src as usize];
            }
        }
        *o = acc;
    }
    out
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn peak(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
