//! Short-time Fourier transform spectrograms.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynsys::Trajectory;
use crate::error::{param_err, Result};

use super::{ImageKind, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftParams {
    pub window: usize,
    pub hop: usize,
}

impl Default for StftParams {
    fn default() -> Self {
        Self { window: 32, hop: 8 }
    }
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()).collect()
}

/// Hann-windowed STFT magnitudes, `frames × (window/2 + 1)` bins.
pub fn stft_magnitude(values: &[f64], window: usize, hop: usize) -> Result<Vec<Vec<f64>>> {
    if hop == 0 {
        return param_err("STFT hop must be positive");
    }
    if window < 2 || window > values.len() {
        return param_err(format!(
            "STFT window must be in [2, {}], got {window}",
            values.len()
        ));
    }
    let taper = hann(window);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window);
    let frames = 1 + (values.len() - window) / hop;
    let bins = window / 2 + 1;
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let seg = &values[f * hop..f * hop + window];
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&taper) {
            *b = Complex::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        out.push(buf[..bins].iter().map(|c| c.norm()).collect());
    }
    Ok(out)
}

/// Log-magnitude spectrogram resampled to `res × res` and scaled to `[0, 1]`.
///
/// Columns run over frames, rows over frequency with the highest bin at the top.
pub fn spectrogram(traj: &Trajectory, res: usize, window: usize, hop: usize) -> Result<RasterImage> {
    if res < 2 {
        return param_err(format!("spectrogram resolution must be >= 2, got {res}"));
    }
    let mag = stft_magnitude(&traj.values, window, hop)?;
    let frames = mag.len();
    let bins = mag[0].len();
    let logmag: Vec<Vec<f64>> = mag.iter().map(|f| f.iter().map(|m| m.ln_1p()).collect()).collect();

    let sample = |fpos: f64, bpos: f64| -> f64 {
        let (f0, ft) = split(fpos, frames);
        let (b0, bt) = split(bpos, bins);
        let f1 = (f0 + 1).min(frames - 1);
        let b1 = (b0 + 1).min(bins - 1);
        let top = logmag[f0][b0] * (1.0 - ft) + logmag[f1][b0] * ft;
        let bot = logmag[f0][b1] * (1.0 - ft) + logmag[f1][b1] * ft;
        top * (1.0 - bt) + bot * bt
    };
    let coord = |i: usize, n: usize| -> f64 {
        if n == 1 {
            0.0
        } else {
            i as f64 * (n - 1) as f64 / (res - 1) as f64
        }
    };
    let mut raw = vec![0.0; res * res];
    for row in 0..res {
        let bpos = coord(res - 1 - row, bins);
        for col in 0..res {
            raw[row * res + col] = sample(coord(col, frames), bpos);
        }
    }
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let pixels = if hi > lo {
        raw.iter().map(|v| ((v - lo) / (hi - lo)) as f32).collect()
    } else {
        vec![0.0; res * res]
    };
    Ok(RasterImage { res, pixels, kind: ImageKind::Spectrogram })
}

fn split(pos: f64, n: usize) -> (usize, f64) {
    let base = (pos.floor() as usize).min(n - 1);
    (base, if base + 1 < n { pos - base as f64 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::linspace;

    fn argmax(v: &[f64]) -> usize {
        v.iter().enumerate().fold(0, |best, (i, &x)| if x > v[best] { i } else { best })
    }

    /// Direct O(n²) DFT as an independent check of the FFT path.
    fn dft_mag(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n / 2 + 1)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (k * j) as f64 / n as f64;
                    re += v * a.cos();
                    im += v * a.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn fft_path_matches_direct_dft() {
        let x: Vec<f64> = (0..40).map(|i| (0.37 * i as f64).sin() + 0.1 * i as f64).collect();
        let frames = stft_magnitude(&x, 16, 8).unwrap();
        let w = hann(16);
        for (f, row) in frames.iter().enumerate() {
            let seg: Vec<f64> = x[f * 8..f * 8 + 16].iter().zip(&w).map(|(a, b)| a * b).collect();
            for (a, b) in row.iter().zip(dft_mag(&seg)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sinusoid_peaks_at_expected_bin() {
        // 1001 samples over one unit of time: sample rate 1000.
        let n = 1001;
        let rate = (n - 1) as f64;
        let t = linspace(0.0, 1.0, n);
        let window = 512;
        for f in [2.0, 5.0, 10.0] {
            let x: Vec<f64> = t.iter().map(|s| (2.0 * PI * f * s).sin()).collect();
            let frames = stft_magnitude(&x, window, 128).unwrap();
            assert!(frames.len() >= 3);
            let expect = (f * window as f64 / rate).round() as usize;
            for frame in &frames[1..frames.len() - 1] {
                assert_eq!(argmax(frame), expect, "f = {f}");
            }
        }
    }

    #[test]
    fn zero_signal_gives_zero_image() {
        let t = Trajectory::new(linspace(0.0, 1.0, 101), vec![0.0; 101]).unwrap();
        let img = spectrogram(&t, 16, 32, 8).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 0.0));
        assert_eq!(img.kind, ImageKind::Spectrogram);
    }

    #[test]
    fn constant_signal_concentrates_in_dc() {
        let frames = stft_magnitude(&[1.0; 101], 32, 8).unwrap();
        for f in frames {
            assert_eq!(argmax(&f), 0);
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(stft_magnitude(&[0.0; 10], 4, 0).is_err());
        assert!(stft_magnitude(&[0.0; 10], 16, 2).is_err());
    }

    #[test]
    fn image_is_unit_range() {
        let t = linspace(0.0, 1.0, 101);
        let v: Vec<f64> = t.iter().map(|s| (2.0 * PI * 7.0 * s * s).sin()).collect();
        let img = spectrogram(&Trajectory::new(t, v).unwrap(), 32, 32, 8).unwrap();
        let max = img.pixels.iter().cloned().fold(0.0f32, f32::max);
        let min = img.pixels.iter().cloned().fold(1.0f32, f32::min);
        assert_eq!((min, max), (0.0, 1.0));
    }
}
