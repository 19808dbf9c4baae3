//! Signal harness: direct convolution with each channel and tone levels.

use std::f64::consts::PI;
use std::path::Path;

use modfrm::Fir;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Causal direct-form output `y[n] = sum_k h[k] x[n - k]` for `n < x.len()`.
pub fn convolve(x: &[Complex64], h: &Fir) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let taps: Vec<(usize, Complex64)> = h
        .coeffs()
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, c)| *c != zero)
        .collect();
    (0..x.len())
        .map(|n| {
            let mut acc = zero;
            for &(k, c) in &taps {
                if k > n {
                    break;
                }
                acc += c * x[n - k];
            }
            acc
        })
        .collect()
}

pub fn channelize(x: &[Complex64], channels: &[Fir]) -> Vec<Vec<Complex64>> {
    channels.iter().map(|h| convolve(x, h)).collect()
}

/// Sum of complex exponentials `a e^{j w n}`.
pub fn synth_tones(tones: &[(f64, f64)], samples: usize) -> Vec<Complex64> {
    (0..samples)
        .map(|n| {
            tones
                .iter()
                .map(|&(w, a)| Complex64::from_polar(a, (w * n as f64) % (2.0 * PI)))
                .sum()
        })
        .collect()
}

/// Interleaved little-endian `f32` real/imaginary pairs.
pub fn read_raw(path: &Path) -> CliResult<Vec<Complex64>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(CliError::Argument(format!(
            "{}: {} bytes is not a whole number of f32 pairs",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

pub fn encode_raw(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub channel: usize,
    pub members: Vec<usize>,
    pub signs: Vec<i8>,
    pub output_power_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToneReport {
    pub frequency: f64,
    pub frequency_pi: f64,
    pub amplitude: f64,
    /// Output with the strongest response to the tone.
    pub home_channel: usize,
    /// Level of the tone in every output relative to its input amplitude.
    pub levels_db: Vec<f64>,
    pub co_channel_loss_db: f64,
    /// Smallest gap between the home level and any other output.
    pub min_rejection_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SnrReport {
    pub samples: usize,
    pub settle: usize,
    pub channels: Vec<ChannelReport>,
    pub tones: Vec<ToneReport>,
}

/// 4-term Blackman-Harris window.
fn window(n: usize) -> Vec<f64> {
    let a = [0.35875, 0.48829, 0.14128, 0.01168];
    let d = (n.max(2) - 1) as f64;
    (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / d;
            a[0] - a[1] * x.cos() + a[2] * (2.0 * x).cos() - a[3] * (3.0 * x).cos()
        })
        .collect()
}

/// Windowed single-bin amplitude of `e^{j w n}` in `y[start..]`.
fn tone_amplitude(y: &[Complex64], start: usize, w: f64, win: &[f64]) -> f64 {
    let norm: f64 = win.iter().sum();
    let acc: Complex64 = y[start..]
        .iter()
        .zip(win)
        .enumerate()
        .map(|(i, (v, c))| {
            v * c * Complex64::from_polar(1.0, -((w * (start + i) as f64) % (2.0 * PI)))
        })
        .sum();
    acc.norm() / norm
}

fn db(x: f64) -> f64 {
    if x > 0.0 {
        20.0 * x.log10()
    } else {
        -400.0
    }
}

/// Output powers after the filters settle and, for known tones, the level of
/// each tone in each output.
pub fn measure(
    outputs: &[Vec<Complex64>],
    settle: usize,
    tones: &[(f64, f64)],
    members: &[Vec<usize>],
    signs: &[Vec<i8>],
) -> CliResult<SnrReport> {
    let samples = outputs.first().map_or(0, Vec::len);
    if samples < settle + 256 && !tones.is_empty() {
        return Err(CliError::Argument(format!(
            "{samples} samples leave fewer than 256 after the {settle}-sample settling time"
        )));
    }
    let start = settle.min(samples);
    let channels = outputs
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let tail = &y[start..];
            let power = if tail.is_empty() {
                0.0
            } else {
                tail.iter().map(|v| v.norm_sqr()).sum::<f64>() / tail.len() as f64
            };
            ChannelReport {
                channel: i,
                members: members[i].clone(),
                signs: signs[i].clone(),
                output_power_db: if power > 0.0 {
                    10.0 * power.log10()
                } else {
                    -400.0
                },
            }
        })
        .collect();
    let win = window(samples.saturating_sub(start));
    let tones = tones
        .iter()
        .map(|&(w, a)| {
            let levels_db: Vec<f64> = outputs
                .iter()
                .map(|y| db(tone_amplitude(y, start, w, &win) / a.abs()))
                .collect();
            let home = levels_db
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let others = levels_db
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != home)
                .map(|(_, l)| levels_db[home] - l)
                .fold(f64::INFINITY, f64::min);
            ToneReport {
                frequency: w,
                frequency_pi: w / PI,
                amplitude: a,
                home_channel: home,
                co_channel_loss_db: -levels_db[home],
                min_rejection_db: others,
                levels_db,
            }
        })
        .collect();
    Ok(SnrReport {
        samples,
        settle,
        channels,
        tones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_is_causal_and_truncated() {
        let x: Vec<Complex64> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let h = Fir::from_real(&[1.0, 1.0]).unwrap();
        let y = convolve(&x, &h);
        assert_eq!(
            y,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(5.0, 0.0)
            ]
        );
    }

    #[test]
    fn raw_round_trip() {
        let s = vec![Complex64::new(0.5, -1.25), Complex64::new(3.0, 0.0)];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.f32");
        std::fs::write(&p, encode_raw(&s)).unwrap();
        assert_eq!(read_raw(&p).unwrap(), s);
        std::fs::write(&p, [0u8; 5]).unwrap();
        assert!(read_raw(&p).is_err());
    }

    #[test]
    fn tone_level_of_identity_channel() {
        let w = 0.3 * PI;
        let x = synth_tones(&[(w, 0.5)], 2048);
        let r = measure(&[x], 0, &[(w, 0.5)], &[vec![0]], &[vec![1]]).unwrap();
        assert!(r.tones[0].levels_db[0].abs() < 1e-9);
    }
}
