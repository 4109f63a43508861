//! Dominant-tone estimation for complex field records.
//!
//! Frequency convention: a component evolving as e^{−i·2π·f·t} is reported at
//! +f. A forward FFT puts such a tone at bin −f, so bin frequencies are negated.

use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tone {
    /// Interpolated peak frequency, MHz (for sample spacing in µs).
    pub freq: f64,
    /// Peak power divided by the median bin power.
    pub contrast: f64,
    /// Bin spacing, MHz.
    pub resolution: f64,
}

pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let m = n as f64;
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / m).cos())
        .collect()
}

/// Power spectrum of the Hann-windowed record, indexed by FFT bin.
pub fn power_spectrum(samples: &[Complex64]) -> Vec<f64> {
    let win = hann(samples.len());
    let mut buf: Vec<Complex64> = samples.iter().zip(&win).map(|(z, w)| z * *w).collect();
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf.iter().map(|z| z.norm_sqr()).collect()
}

/// Signed bin index of FFT bin `k` out of `n`.
fn signed_bin(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Dominant tone of `samples` taken every `spacing` µs, refined by a parabola
/// through the log-power of the peak bin and its two neighbours.
pub fn dominant_tone(samples: &[Complex64], spacing: f64) -> Option<Tone> {
    let n = samples.len();
    if n < 3 {
        return None;
    }
    let power = power_spectrum(samples);
    let (k, &peak) = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(peak > 0.0) {
        return None;
    }
    let mut sorted = power.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    let contrast = if median > 0.0 { peak / median } else { f64::INFINITY };

    let left = power[(k + n - 1) % n];
    let right = power[(k + 1) % n];
    let offset = if left > 0.0 && right > 0.0 {
        let (l, c, r) = (left.ln(), peak.ln(), right.ln());
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let resolution = 1.0 / (n as f64 * spacing);
    Some(Tone {
        freq: -(signed_bin(k, n) + offset) * resolution,
        contrast,
        resolution,
    })
}
