//! Band-limited sample-rate conversion by windowed-sinc interpolation.
//!
//! The converter steps through the input at the exact rational ratio of the
//! two rates (polyphase: one interpolation kernel per fractional phase) and
//! low-passes at the narrower of the two Nyquist frequencies, which provides
//! the anti-alias filtering required when downsampling. Signal edges are
//! extended by reflection to limit boundary error.

use std::collections::HashMap;

use crate::audio::AudioSignal;
use crate::error::Result;

/// Zero crossings of the sinc kernel on each side at the cutoff frequency.
const KERNEL_ZERO_CROSSINGS: usize = 32;
/// Cutoff placed slightly below Nyquist to leave transition-band headroom.
const CUTOFF_ROLLOFF: f64 = 0.97;
/// Phase kernels are cached only when the phase count stays reasonable.
const MAX_CACHED_PHASES: usize = 1 << 14;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn blackman(x: f64) -> f64 {
    // x in [-1, 1]
    let t = std::f64::consts::PI * (x + 1.0);
    0.42 - 0.5 * (t).cos() + 0.08 * (2.0 * t).cos()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Read with mirror extension about the end points.
fn reflect(samples: &[f64], idx: i64) -> f64 {
    let n = samples.len() as i64;
    let mut i = idx;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * n - 2 - i;
        } else {
            return samples[i as usize];
        }
    }
}

/// Resample to `target_rate`. Output duration equals input duration within
/// one sample period; identical rates return the signal unchanged.
pub fn resample(signal: &AudioSignal, target_rate: u32) -> Result<AudioSignal> {
    if target_rate == signal.sample_rate() {
        return Ok(signal.clone());
    }
    if target_rate == 0 {
        return Err(crate::Error::InvalidSampleRate(0));
    }
    let from = signal.sample_rate() as u64;
    let to = target_rate as u64;
    let g = gcd(from, to);
    let up = to / g; // L: output samples per block
    let down = from / g; // M: input samples per block

    let ratio = to as f64 / from as f64;
    // Cutoff as a fraction of the input sample rate.
    let cutoff = 0.5 * ratio.min(1.0) * CUTOFF_ROLLOFF;
    // Kernel half-width in input samples; widened when downsampling so the
    // stopband stays sharp relative to the lowered cutoff.
    let half_width = (KERNEL_ZERO_CROSSINGS as f64 / (2.0 * cutoff)).ceil() as i64;

    let in_len = signal.len() as u64;
    let out_len = ((in_len * to + from / 2) / from).max(1) as usize;
    let samples = signal.samples();

    let mut phase_cache: HashMap<u64, Vec<f64>> = HashMap::new();
    let cache_phases = (up as usize) <= MAX_CACHED_PHASES;

    let mut out = Vec::with_capacity(out_len);
    for k in 0..out_len as u64 {
        let num = k * down; // position in units of 1/up input samples
        let i0 = (num / up) as i64;
        let phase = num % up; // fractional part is phase/up

        let built;
        let kernel: &[f64] = if cache_phases {
            phase_cache
                .entry(phase)
                .or_insert_with(|| build_kernel(phase, up, cutoff, half_width))
        } else {
            built = build_kernel(phase, up, cutoff, half_width);
            &built
        };

        let mut acc = 0.0;
        for (j, &w) in kernel.iter().enumerate() {
            let idx = i0 - half_width + 1 + j as i64;
            acc += w * reflect(samples, idx);
        }
        out.push(acc);
    }
    AudioSignal::new(out, target_rate)
}

/// Kernel weights for fractional offset `phase/up`, normalized to unit sum so
/// DC passes exactly.
fn build_kernel(phase: u64, up: u64, cutoff: f64, half_width: i64) -> Vec<f64> {
    let tau = phase as f64 / up as f64;
    let mut weights = Vec::with_capacity((2 * half_width) as usize);
    let mut sum = 0.0;
    for j in (1 - half_width)..=half_width {
        let u = j as f64 - tau; // distance from interpolation point
        let w = 2.0 * cutoff * sinc(2.0 * cutoff * u) * blackman(u / half_width as f64);
        weights.push(w);
        sum += w;
    }
    for w in &mut weights {
        *w /= sum;
    }
    weights
}
