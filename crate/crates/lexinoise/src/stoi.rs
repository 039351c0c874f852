//! Short-Time Objective Intelligibility (STOI) between a clean and a
//! degraded signal.
//!
//! The score is the mean, over all one-third-octave bands and analysis
//! windows, of the correlation between short temporal envelope segments of
//! the clean signal and the normalized, clipped envelope segments of the
//! degraded signal. Higher means more intelligible; the score lies in
//! [-1, 1].

use crate::audio::AudioSignal;
use crate::error::{Error, Result};
use crate::resample::resample;
use rustfft::{num_complex::Complex, FftPlanner};

/// STOI analysis parameters. [`StoiConfig::default`] gives the canonical
/// values (10 kHz working rate, 256/128 frames, 512-point FFT, 15 bands from
/// 150 Hz, 30-frame segments, -15 dB clipping, 40 dB silence range), which
/// keep scores comparable to published STOI numbers.
#[derive(Debug, Clone)]
pub struct StoiConfig {
    pub working_rate: u32,
    pub frame_len: usize,
    pub frame_shift: usize,
    pub fft_len: usize,
    pub band_count: usize,
    pub band_start_cf: f64,
    pub analysis_len: usize,
    pub clip_db: f64,
    pub silence_range_db: f64,
}

impl Default for StoiConfig {
    fn default() -> Self {
        Self {
            working_rate: 10_000,
            frame_len: 256,
            frame_shift: 128,
            fft_len: 512,
            band_count: 15,
            band_start_cf: 150.0,
            analysis_len: 30,
            clip_db: -15.0,
            silence_range_db: 40.0,
        }
    }
}

impl StoiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_shift * 2 != self.frame_len {
            return Err(Error::InvalidStoiConfig(format!(
                "frame_shift must be frame_len/2 (got {} and {})",
                self.frame_shift, self.frame_len
            )));
        }
        if self.band_count < 1 {
            return Err(Error::InvalidStoiConfig("band_count must be ≥ 1".into()));
        }
        if self.analysis_len < 1 {
            return Err(Error::InvalidStoiConfig("analysis_len must be ≥ 1".into()));
        }
        if self.fft_len < self.frame_len {
            return Err(Error::InvalidStoiConfig(
                "fft_len must be ≥ frame_len".into(),
            ));
        }
        Ok(())
    }

    /// One-third-octave band center frequencies: band_start_cf · 2^(k/3).
    pub fn center_frequencies(&self) -> Vec<f64> {
        (0..self.band_count)
            .map(|k| self.band_start_cf * 2f64.powf(k as f64 / 3.0))
            .collect()
    }
}

/// Band × frame grid of non-negative band envelopes.
#[derive(Debug, Clone)]
pub struct EnvelopeMatrix {
    values: Vec<f64>, // band-major
    bands: usize,
    frames: usize,
}

impl EnvelopeMatrix {
    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn get(&self, band: usize, frame: usize) -> f64 {
        self.values[band * self.frames + frame]
    }
}

/// Hann window matching the reference STOI analysis (nonzero endpoints).
fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            0.5 - 0.5
                * (2.0 * std::f64::consts::PI * (n + 1) as f64 / (len + 1) as f64).cos()
        })
        .collect()
}

fn frame_count(len: usize, frame_len: usize, shift: usize) -> usize {
    if len < frame_len {
        0
    } else {
        (len - frame_len) / shift + 1
    }
}

/// Drop frames in which the clean signal is more than `silence_range_db`
/// below its loudest frame, excising the same positions from both signals.
/// Kept frames are windowed and overlap-added back into time signals.
pub fn remove_silent_frames(
    clean: &AudioSignal,
    degraded: &AudioSignal,
    config: &StoiConfig,
) -> Result<(AudioSignal, AudioSignal)> {
    config.validate()?;
    if clean.len() != degraded.len() {
        return Err(Error::LengthMismatch {
            left: clean.len(),
            right: degraded.len(),
        });
    }
    if clean.sample_rate() != degraded.sample_rate() {
        return Err(Error::SampleRateMismatch {
            left: clean.sample_rate(),
            right: degraded.sample_rate(),
        });
    }
    let n_frames = frame_count(clean.len(), config.frame_len, config.frame_shift);
    if n_frames == 0 {
        return Err(Error::SignalTooShort {
            len: clean.len(),
            frame_len: config.frame_len,
        });
    }
    let window = hann_window(config.frame_len);
    let x = clean.samples();
    let y = degraded.samples();

    // Frame energies of the windowed clean signal, in dB.
    let mut energies = Vec::with_capacity(n_frames);
    for m in 0..n_frames {
        let start = m * config.frame_shift;
        let e: f64 = (0..config.frame_len)
            .map(|n| {
                let v = x[start + n] * window[n];
                v * v
            })
            .sum();
        energies.push(10.0 * (e + f64::MIN_POSITIVE).log10());
    }
    let max_e = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = (0..n_frames)
        .filter(|&m| energies[m] > max_e - config.silence_range_db)
        .collect();
    if kept.is_empty() || clean.rms() == 0.0 {
        return Err(Error::AllFramesSilent);
    }

    let out_len = (kept.len() - 1) * config.frame_shift + config.frame_len;
    let mut out_x = vec![0.0; out_len];
    let mut out_y = vec![0.0; out_len];
    for (i, &m) in kept.iter().enumerate() {
        let src = m * config.frame_shift;
        let dst = i * config.frame_shift;
        for n in 0..config.frame_len {
            out_x[dst + n] += x[src + n] * window[n];
            out_y[dst + n] += y[src + n] * window[n];
        }
    }
    Ok((
        AudioSignal::new(out_x, clean.sample_rate())?,
        AudioSignal::new(out_y, degraded.sample_rate())?,
    ))
}

/// Indices of FFT bins belonging to each one-third-octave band.
fn band_bins(config: &StoiConfig) -> Vec<Vec<usize>> {
    let bin_hz = config.working_rate as f64 / config.fft_len as f64;
    let half = 2f64.powf(1.0 / 6.0);
    config
        .center_frequencies()
        .iter()
        .map(|cf| {
            let lo = cf / half;
            let hi = cf * half;
            (0..=config.fft_len / 2)
                .filter(|&i| {
                    let f = i as f64 * bin_hz;
                    f >= lo && f < hi
                })
                .collect()
        })
        .collect()
}

/// Hann-windowed STFT magnitudes grouped into one-third-octave band
/// envelopes: entry (j, m) is sqrt of the summed squared bin magnitudes of
/// band j in frame m.
pub fn third_octave_envelopes(signal: &AudioSignal, config: &StoiConfig) -> Result<EnvelopeMatrix> {
    config.validate()?;
    let n_frames = frame_count(signal.len(), config.frame_len, config.frame_shift);
    if n_frames == 0 {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            frame_len: config.frame_len,
        });
    }
    let window = hann_window(config.frame_len);
    let bins = band_bins(config);
    let fft = FftPlanner::new().plan_fft_forward(config.fft_len);
    let x = signal.samples();

    let mut values = vec![0.0; config.band_count * n_frames];
    let mut buf = vec![Complex::new(0.0, 0.0); config.fft_len];
    for m in 0..n_frames {
        let start = m * config.frame_shift;
        for n in 0..config.fft_len {
            buf[n] = if n < config.frame_len {
                Complex::new(x[start + n] * window[n], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        for (j, band) in bins.iter().enumerate() {
            let power: f64 = band.iter().map(|&i| buf[i].norm_sqr()).sum();
            values[j * n_frames + m] = power.sqrt();
        }
    }
    Ok(EnvelopeMatrix {
        values,
        bands: config.band_count,
        frames: n_frames,
    })
}

/// STOI with the canonical configuration.
pub fn compute_stoi(clean: &AudioSignal, degraded: &AudioSignal) -> Result<f64> {
    compute_stoi_with(clean, degraded, &StoiConfig::default())
}

/// STOI with an explicit configuration. Signals at a rate other than the
/// working rate are resampled internally; durations must agree within one
/// frame.
pub fn compute_stoi_with(
    clean: &AudioSignal,
    degraded: &AudioSignal,
    config: &StoiConfig,
) -> Result<f64> {
    config.validate()?;
    if clean.sample_rate() != degraded.sample_rate() {
        return Err(Error::SampleRateMismatch {
            left: clean.sample_rate(),
            right: degraded.sample_rate(),
        });
    }
    let frame_secs = config.frame_len as f64 / config.working_rate as f64;
    if (clean.duration_secs() - degraded.duration_secs()).abs() > frame_secs {
        return Err(Error::DurationMismatch {
            left: clean.len(),
            right: degraded.len(),
        });
    }
    let clean = resample(clean, config.working_rate)?;
    let degraded = resample(degraded, config.working_rate)?;
    let n = clean.len().min(degraded.len());
    let clean = clean.slice(0, n)?;
    let degraded = degraded.slice(0, n)?;
    if clean.rms() == 0.0 {
        return Err(Error::SilentClean);
    }

    let (clean, degraded) = remove_silent_frames(&clean, &degraded, config)?;
    let env_x = third_octave_envelopes(&clean, config)?;
    let env_y = third_octave_envelopes(&degraded, config)?;

    let frames = env_x.frames();
    let seg = config.analysis_len;
    if frames < seg {
        return Err(Error::SegmentTooShort {
            frames,
            required: seg,
        });
    }
    let clip = 1.0 + 10f64.powf(-config.clip_db / 20.0);
    let eps = 1e-15;

    let mut total = 0.0;
    let mut cells = 0usize;
    let mut xs = vec![0.0; seg];
    let mut ys = vec![0.0; seg];
    for m in seg - 1..frames {
        for j in 0..env_x.bands() {
            for i in 0..seg {
                xs[i] = env_x.get(j, m + 1 - seg + i);
                ys[i] = env_y.get(j, m + 1 - seg + i);
            }
            let x_norm: f64 = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
            if x_norm <= eps {
                // No clean speech energy in this band segment: nothing to
                // correlate against.
                continue;
            }
            let y_norm: f64 = ys.iter().map(|v| v * v).sum::<f64>().sqrt();
            let alpha = x_norm / (y_norm + eps);
            let mut x_mean = 0.0;
            let mut y_mean = 0.0;
            let mut yc = vec![0.0; seg];
            for i in 0..seg {
                yc[i] = (alpha * ys[i]).min(xs[i] * clip);
                x_mean += xs[i];
                y_mean += yc[i];
            }
            x_mean /= seg as f64;
            y_mean /= seg as f64;
            let mut num = 0.0;
            let mut dx = 0.0;
            let mut dy = 0.0;
            for i in 0..seg {
                let a = xs[i] - x_mean;
                let b = yc[i] - y_mean;
                num += a * b;
                dx += a * a;
                dy += b * b;
            }
            let denom = (dx * dy).sqrt();
            let corr = if denom <= eps { 0.0 } else { num / denom };
            total += corr;
            cells += 1;
        }
    }
    if cells == 0 {
        return Err(Error::SegmentTooShort {
            frames,
            required: seg,
        });
    }
    Ok(total / cells as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tone(freq: f64, rate: u32, secs: f64, amp: f64) -> AudioSignal {
        let len = (secs * rate as f64) as usize;
        let samples = (0..len)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioSignal::new(samples, rate).unwrap()
    }

    fn white_noise(rate: u32, secs: f64, amp: f64, seed: u64) -> AudioSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = (secs * rate as f64) as usize;
        let samples = (0..len).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
        AudioSignal::new(samples, rate).unwrap()
    }

    /// Broadband amplitude-modulated signal standing in for speech.
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
        // Syllabic-rate amplitude modulation.
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

    #[test]
    fn config_invariants_enforced() {
        let cfg = StoiConfig { frame_shift: 100, ..StoiConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = StoiConfig { band_count: 0, ..StoiConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn silence_removal_truncates_both() {
        let cfg = StoiConfig::default();
        let rate = cfg.working_rate;
        let half = (0.5 * rate as f64) as usize;
        let mut clean = speech_like(rate, 0.5, 1).samples().to_vec();
        clean.extend(std::iter::repeat_n(0.0, half));
        let deg = white_noise(rate, 1.0, 0.3, 2);
        let clean = AudioSignal::new(clean, rate).unwrap();
        let (c2, d2) = remove_silent_frames(&clean, &deg, &cfg).unwrap();
        assert_eq!(c2.len(), d2.len());
        let secs = c2.duration_secs();
        assert!(
            (secs - 0.5).abs() < 0.06,
            "expected ≈0.5 s after excision, got {secs}"
        );
    }

    #[test]
    fn silence_removal_no_op_when_loud() {
        let cfg = StoiConfig::default();
        let clean = white_noise(cfg.working_rate, 1.0, 0.4, 3);
        let deg = white_noise(cfg.working_rate, 1.0, 0.4, 4);
        let (c2, _) = remove_silent_frames(&clean, &deg, &cfg).unwrap();
        // Only windowing-boundary-length change.
        assert!((c2.len() as i64 - clean.len() as i64).abs() <= cfg.frame_len as i64);
    }

    #[test]
    fn silence_removal_all_zero_errors() {
        let cfg = StoiConfig::default();
        let zeros = AudioSignal::new(vec![0.0; 10_000], cfg.working_rate).unwrap();
        let deg = white_noise(cfg.working_rate, 1.0, 0.3, 5);
        assert!(matches!(
            remove_silent_frames(&zeros, &deg, &cfg),
            Err(Error::AllFramesSilent)
        ));
    }

    #[test]
    fn envelope_tone_concentrates_in_band() {
        let cfg = StoiConfig::default();
        let cfs = cfg.center_frequencies();
        let target_band = 7;
        let s = tone(cfs[target_band], cfg.working_rate, 1.0, 0.5);
        let env = third_octave_envelopes(&s, &cfg).unwrap();
        // Mean envelope of the tone's band exceeds every other band by ≥ 20 dB.
        let mean = |j: usize| -> f64 {
            (0..env.frames()).map(|m| env.get(j, m)).sum::<f64>() / env.frames() as f64
        };
        let target = mean(target_band);
        for j in 0..env.bands() {
            if j == target_band {
                continue;
            }
            let ratio_db = 20.0 * (target / (mean(j) + 1e-30)).log10();
            assert!(
                ratio_db >= 20.0,
                "band {j} within {ratio_db:.1} dB of tone band"
            );
        }
    }

    #[test]
    fn envelope_zero_signal_is_zero() {
        let cfg = StoiConfig::default();
        let zeros = AudioSignal::new(vec![0.0; cfg.frame_len * 4], cfg.working_rate).unwrap();
        let env = third_octave_envelopes(&zeros, &cfg).unwrap();
        for j in 0..env.bands() {
            for m in 0..env.frames() {
                assert_eq!(env.get(j, m), 0.0);
            }
        }
    }

    #[test]
    fn envelope_white_noise_all_bands_nonzero() {
        let cfg = StoiConfig::default();
        let s = white_noise(cfg.working_rate, 2.0, 0.5, 7);
        let env = third_octave_envelopes(&s, &cfg).unwrap();
        assert!(env.frames() >= 100);
        for j in 0..env.bands() {
            for m in 0..100 {
                assert!(env.get(j, m) > 0.0, "band {j} frame {m} is zero");
            }
        }
    }

    #[test]
    fn envelope_frame_accounting() {
        let cfg = StoiConfig::default();
        let len = 5000;
        let s = white_noise(cfg.working_rate, len as f64 / cfg.working_rate as f64, 0.4, 8);
        let env = third_octave_envelopes(&s, &cfg).unwrap();
        let expected = (s.len() - cfg.frame_len) / cfg.frame_shift + 1;
        assert_eq!(env.frames(), expected);
        assert_eq!(env.bands(), cfg.band_count);
    }

    #[test]
    fn stoi_self_identity() {
        let s = speech_like(10_000, 1.0, 11);
        let score = compute_stoi(&s, &s).unwrap();
        assert_abs_diff_eq!(score, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn stoi_gain_invariance() {
        let s = speech_like(10_000, 1.0, 12);
        for c in [0.5, 2.0] {
            let scaled = AudioSignal::new(
                s.samples().iter().map(|v| c * v).collect(),
                s.sample_rate(),
            )
            .unwrap();
            let score = compute_stoi(&s, &scaled).unwrap();
            assert_abs_diff_eq!(score, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn stoi_bounded() {
        for seed in 0..5 {
            let clean = speech_like(10_000, 1.0, 100 + seed);
            let deg = white_noise(10_000, 1.0, 0.5, 200 + seed);
            let n = clean.len().min(deg.len());
            let score =
                compute_stoi(&clean.slice(0, n).unwrap(), &deg.slice(0, n).unwrap()).unwrap();
            assert!((-1.0..=1.0).contains(&score), "score {score}");
        }
    }

    #[test]
    fn stoi_resamples_internally() {
        let s = speech_like(16_000, 1.0, 13);
        let score = compute_stoi(&s, &s).unwrap();
        assert_abs_diff_eq!(score, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn stoi_duration_mismatch_rejected() {
        let a = speech_like(10_000, 1.0, 14);
        let b = speech_like(10_000, 1.5, 14);
        assert!(matches!(
            compute_stoi(&a, &b),
            Err(Error::DurationMismatch { .. })
        ));
    }

    #[test]
    fn stoi_short_segment_rejected() {
        // 0.2 s of speech is below the 30-frame (≈384 ms) minimum.
        let s = speech_like(10_000, 0.2, 15);
        assert!(matches!(
            compute_stoi(&s, &s),
            Err(Error::SegmentTooShort { .. })
        ));
    }

    #[test]
    fn stoi_silent_clean_rejected() {
        let zeros = AudioSignal::new(vec![0.0; 10_000], 10_000).unwrap();
        let deg = white_noise(10_000, 1.0, 0.3, 16);
        assert!(compute_stoi(&zeros, &deg).is_err());
    }
}
