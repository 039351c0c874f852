//! Mix a synthetic utterance with multi-talker babble at exact SNRs and
//! verify the achieved level from the mixture itself.
//!
//! Run with: cargo run --example mix_noise

use std::f64::consts::PI;

use lexinoise::audio::{mix_at_snr, save_wav, AudioSignal, NoiseCondition};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Harmonic stack with syllabic amplitude modulation standing in for speech.
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
        *s *= 0.55 + 0.45 * (2.0 * PI * 4.0 * t).sin();
    }
    let peak = samples.iter().fold(0f64, |p, s| p.max(s.abs()));
    for s in &mut samples {
        *s *= 0.5 / peak;
    }
    AudioSignal::new(samples, rate).unwrap()
}

fn babble(rate: u32, secs: f64, seed: u64) -> AudioSignal {
    let len = (secs * rate as f64) as usize;
    let mut samples = vec![0.0; len];
    for talker in 0..6 {
        let voice = speech_like(rate, secs, seed * 31 + talker);
        for (s, v) in samples.iter_mut().zip(voice.samples()) {
            *s += v / 6.0;
        }
    }
    AudioSignal::new(samples, rate).unwrap()
}

fn main() {
    let rate = 16_000;
    let speech = speech_like(rate, 1.0, 1);
    let noise = babble(rate, 1.5, 2);
    let out_dir = std::env::temp_dir();

    println!("speech: {:.2} s, rms {:.4}", speech.duration_secs(), speech.rms());
    for snr in [5.0, 0.0, -5.0] {
        let condition = NoiseCondition::new(snr, "babble").unwrap();
        let mix = mix_at_snr(&speech, &noise, &condition, 4321).unwrap();

        // Verify the achieved SNR by separating the noise part back out.
        let scale = mix.rescale.unwrap_or(1.0);
        let noise_part: Vec<f64> = mix
            .signal
            .samples()
            .iter()
            .zip(speech.samples())
            .map(|(m, s)| m - scale * s)
            .collect();
        let noise_rms =
            (noise_part.iter().map(|x| x * x).sum::<f64>() / noise_part.len() as f64).sqrt();
        let achieved = 20.0 * (scale * speech.rms() / noise_rms).log10();

        let path = out_dir.join(format!("lexinoise_mix_snr{snr}.wav"));
        save_wav(&path, &mix.signal).unwrap();
        println!(
            "snr {snr:>4} dB: noise_gain {:.4}, achieved {achieved:.4} dB -> {}",
            mix.noise_gain,
            path.display()
        );
    }
}
