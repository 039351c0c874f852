//! Score intelligibility of progressively noisier mixtures with STOI.
//!
//! Run with: cargo run --example stoi_score

use std::f64::consts::PI;

use lexinoise::audio::{mix_at_snr, AudioSignal, NoiseCondition};
use lexinoise::stoi::compute_stoi;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn speech_like(rate: u32, secs: f64, seed: u64) -> AudioSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (secs * rate as f64) as usize;
    let f0 = rng.gen_range(90.0..220.0);
    let mut samples = vec![0.0; len];
    for h in 1..=20 {
        let f = f0 * h as f64;
        if f > 4000.0 {
            break;
        }
        let phase = rng.gen_range(0.0..2.0 * PI);
        for (i, s) in samples.iter_mut().enumerate() {
            *s += (2.0 * PI * f * i as f64 / rate as f64 + phase).sin() / (h as f64).sqrt();
        }
    }
    for (i, s) in samples.iter_mut().enumerate() {
        let t = i as f64 / rate as f64;
        *s *= 0.55 + 0.45 * (2.0 * PI * 4.5 * t).sin();
    }
    let peak = samples.iter().fold(0f64, |p, s| p.max(s.abs()));
    for s in &mut samples {
        *s *= 0.5 / peak;
    }
    AudioSignal::new(samples, rate).unwrap()
}

fn white_noise(rate: u32, secs: f64, seed: u64) -> AudioSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (secs * rate as f64) as usize;
    let samples = (0..len).map(|_| 0.3 * rng.gen_range(-1.0..1.0)).collect();
    AudioSignal::new(samples, rate).unwrap()
}

fn main() {
    let rate = 16_000;
    let clean = speech_like(rate, 1.0, 7);
    let noise = white_noise(rate, 1.4, 8);

    let identity = compute_stoi(&clean, &clean).unwrap();
    println!("clean vs clean: {identity:.6}");

    println!("{:>8} {:>8}", "SNR(dB)", "STOI");
    for snr in [20.0, 10.0, 5.0, 0.0, -5.0, -10.0] {
        let condition = NoiseCondition::new(snr, "white").unwrap();
        let mix = mix_at_snr(&clean, &noise, &condition, 0).unwrap();
        let score = compute_stoi(&clean, &mix.signal).unwrap();
        println!("{snr:>8} {score:>8.4}");
    }
}
