//! Mono audio signals, WAV I/O, and SNR-exact additive noise mixing.

use std::path::Path;

use crate::error::{Error, Result};

/// A mono sampled waveform. Amplitudes are dimensionless with nominal range
/// [-1, 1]; values outside that range are representable but will clip on
/// PCM16 export.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSampleRate(sample_rate));
        }
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Root-mean-square amplitude: sqrt(mean(samples²)).
    pub fn rms(&self) -> f64 {
        let sum_sq: f64 = self.samples.iter().map(|s| s * s).sum();
        (sum_sq / self.samples.len() as f64).sqrt()
    }

    /// A copy restricted to the half-open sample range [start, end).
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples.len() {
            return Err(Error::Other(format!(
                "invalid sample range {start}..{end} for signal of length {}",
                self.samples.len()
            )));
        }
        AudioSignal::new(self.samples[start..end].to_vec(), self.sample_rate)
    }
}

/// A listening environment: target SNR in dB plus a label identifying the
/// noise source.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCondition {
    pub snr_db: f64,
    pub noise_id: String,
}

impl NoiseCondition {
    pub fn new(snr_db: f64, noise_id: impl Into<String>) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::NonFiniteSnr(snr_db));
        }
        Ok(Self {
            snr_db,
            noise_id: noise_id.into(),
        })
    }
}

/// Output of [`mix_at_snr`]: the mixture plus the gains that produced it.
#[derive(Debug, Clone)]
pub struct Mixture {
    pub signal: AudioSignal,
    /// Gain applied to the noise segment before addition.
    pub noise_gain: f64,
    /// Uniform rescale applied to the whole mixture to avoid clipping, if any.
    /// The rescale preserves the achieved SNR.
    pub rescale: Option<f64>,
}

/// Load a RIFF/WAVE file as a mono signal.
///
/// PCM16 samples are scaled by 1/32768; float32 files are taken as-is.
/// Stereo is downmixed by channel average.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|source| Error::Wav {
        path: path.to_path_buf(),
        source,
    })?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: format!("{} channels (mono or stereo only)", spec.channels),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| {
                s.map(|v| v as f64 / 32768.0).map_err(|source| Error::Wav {
                    path: path.to_path_buf(),
                    source,
                })
            })
            .collect::<Result<_>>()?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| {
                s.map(|v| v as f64).map_err(|source| Error::Wav {
                    path: path.to_path_buf(),
                    source,
                })
            })
            .collect::<Result<_>>()?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{fmt:?} {bits}-bit (PCM16 or IEEE float32 only)"),
            })
        }
    };
    if interleaved.is_empty() {
        return Err(Error::ZeroLengthAudio);
    }
    let samples = if spec.channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|lr| (lr[0] + lr[1]) / 2.0)
            .collect()
    } else {
        interleaved
    };
    AudioSignal::new(samples, spec.sample_rate)
}

/// Write a signal as mono PCM16 little-endian WAV. Samples are clamped to
/// [-1, 1] before quantization.
pub fn save_wav(path: impl AsRef<Path>, signal: &AudioSignal) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|source| Error::Wav {
        path: path.to_path_buf(),
        source,
    })?;
    for &s in signal.samples() {
        // Inverse of the loader's 1/32768 scaling, clamped to the i16 range.
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|source| Error::Wav {
            path: path.to_path_buf(),
            source,
        })?;
    }
    writer.finalize().map_err(|source| Error::Wav {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Add noise to speech so that the mixture hits the condition's SNR exactly.
///
/// The noise segment starts at `noise_offset` (wrapping circularly if the
/// noise recording is shorter than the speech) and is scaled by
/// g = (rms(speech) / rms(segment)) · 10^(−snr_db / 20), which makes
/// 20·log10(rms(speech) / rms(g·segment)) equal `snr_db` by construction.
/// The same gain applies across the whole utterance, target and context
/// alike. If the mixture would clip, the whole mixture is uniformly rescaled
/// to peak 0.999 and the factor reported in [`Mixture::rescale`].
pub fn mix_at_snr(
    speech: &AudioSignal,
    noise: &AudioSignal,
    condition: &NoiseCondition,
    noise_offset: usize,
) -> Result<Mixture> {
    if speech.sample_rate() != noise.sample_rate() {
        return Err(Error::SampleRateMismatch {
            left: speech.sample_rate(),
            right: noise.sample_rate(),
        });
    }
    let speech_rms = speech.rms();
    if speech_rms == 0.0 {
        return Err(Error::ZeroRms { which: "speech" });
    }
    let noise_samples = noise.samples();
    let segment: Vec<f64> = (0..speech.len())
        .map(|i| noise_samples[(noise_offset + i) % noise_samples.len()])
        .collect();
    let seg_sum_sq: f64 = segment.iter().map(|s| s * s).sum();
    let seg_rms = (seg_sum_sq / segment.len() as f64).sqrt();
    if seg_rms == 0.0 {
        return Err(Error::ZeroRms { which: "noise" });
    }
    let gain = speech_rms / seg_rms * 10f64.powf(-condition.snr_db / 20.0);
    let mut mixed: Vec<f64> = speech
        .samples()
        .iter()
        .zip(&segment)
        .map(|(s, n)| s + gain * n)
        .collect();
    let peak = mixed.iter().fold(0f64, |p, s| p.max(s.abs()));
    let rescale = if peak > 1.0 {
        let factor = 0.999 / peak;
        for s in &mut mixed {
            *s *= factor;
        }
        Some(factor)
    } else {
        None
    };
    Ok(Mixture {
        signal: AudioSignal::new(mixed, speech.sample_rate())?,
        noise_gain: gain,
        rescale,
    })
}
