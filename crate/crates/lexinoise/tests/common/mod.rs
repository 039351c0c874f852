//! Shared generators for the integration suites.
//!
//! Each test target links its own copy, so not every helper is used by every
//! target.
#![allow(dead_code)]

use std::f64::consts::PI;

use lexinoise::audio::AudioSignal;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Harmonic stack with syllabic-rate amplitude modulation standing in for a
/// speech recording; deterministic per seed, peak-normalized to 0.5.
pub fn speech_like(rate: u32, secs: f64, seed: u64) -> AudioSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (secs * rate as f64) as usize;
    let f0 = rng.gen_range(90.0..220.0);
    let mut samples = vec![0.0; len];
    for h in 1..=24 {
        let f = f0 * h as f64;
        if f > 4500.0 {
            break;
        }
        let a = 1.0 / (h as f64).sqrt();
        let phase = rng.gen_range(0.0..2.0 * PI);
        for (i, s) in samples.iter_mut().enumerate() {
            *s += a * (2.0 * PI * f * i as f64 / rate as f64 + phase).sin();
        }
    }
    let mod_rate = rng.gen_range(3.0..6.0);
    for (i, s) in samples.iter_mut().enumerate() {
        let t = i as f64 / rate as f64;
        *s *= 0.55 + 0.45 * (2.0 * PI * mod_rate * t).sin();
    }
    let peak = samples.iter().fold(0f64, |p, s| p.max(s.abs()));
    for s in &mut samples {
        *s *= 0.5 / peak;
    }
    AudioSignal::new(samples, rate).unwrap()
}

/// Multi-talker babble stand-in: several overlapping speech-like signals.
pub fn babble_like(rate: u32, secs: f64, seed: u64) -> AudioSignal {
    let len = (secs * rate as f64) as usize;
    let mut samples = vec![0.0; len];
    for talker in 0..6 {
        let voice = speech_like(rate, secs, seed.wrapping_mul(31).wrapping_add(talker));
        for (s, v) in samples.iter_mut().zip(voice.samples()) {
            *s += v / 6.0;
        }
    }
    AudioSignal::new(samples, rate).unwrap()
}

pub fn white_noise(rate: u32, secs: f64, amp: f64, seed: u64) -> AudioSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (secs * rate as f64) as usize;
    let samples = (0..len).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
    AudioSignal::new(samples, rate).unwrap()
}

/// Spearman rank correlation (no tie correction; callers supply distinct
/// values).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        for (r, &i) in idx.iter().enumerate() {
            ranks[i] = r as f64;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        num += (a - mean) * (b - mean);
        dx += (a - mean).powi(2);
        dy += (b - mean).powi(2);
    }
    num / (dx * dy).sqrt()
}
