//! WAV ingestion and emission. Samples are handled as `f64` per channel.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub sample_rate: u32,
    /// One vector per channel, all the same length.
    pub channels: Vec<Vec<f64>>,
}

impl Audio {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }
}

fn wav_error(path: &Path, err: hound::Error) -> CliError {
    match err {
        hound::Error::IoError(e) => CliError::io(path, e),
        other => CliError::UnsupportedWav {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    }
}

/// Reads PCM16, PCM24 or float32 WAV files.
pub fn read_wav(path: &Path) -> Result<Audio> {
    let mut reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    let n_channels = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32_768.0))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Int, 24) => reader
            .samples::<i32>()
            .map(|s| s.map(|v| v as f64 / 8_388_608.0))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        (format, bits) => {
            return Err(CliError::UnsupportedWav {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?}"),
            })
        }
    }
    .map_err(|e| wav_error(path, e))?;

    let mut channels = vec![Vec::with_capacity(interleaved.len() / n_channels.max(1)); n_channels];
    for frame in interleaved.chunks_exact(n_channels) {
        for (ch, &v) in channels.iter_mut().zip(frame) {
            ch.push(v);
        }
    }
    Ok(Audio {
        sample_rate: spec.sample_rate,
        channels,
    })
}

fn spec(audio: &Audio, bits: u16, format: SampleFormat) -> WavSpec {
    WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate,
        bits_per_sample: bits,
        sample_format: format,
    }
}

/// Quantizes to `f32` exactly as [`write_wav_f32`] stores the samples.
pub fn quantize_f32(audio: &Audio) -> Audio {
    Audio {
        sample_rate: audio.sample_rate,
        channels: audio
            .channels
            .iter()
            .map(|c| c.iter().map(|&v| v as f32 as f64).collect())
            .collect(),
    }
}

pub fn write_wav_f32(path: &Path, audio: &Audio) -> Result<()> {
    let mut writer = WavWriter::create(path, spec(audio, 32, SampleFormat::Float)).map_err(|e| wav_error(path, e))?;
    for i in 0..audio.len() {
        for ch in &audio.channels {
            writer.write_sample(ch[i] as f32).map_err(|e| wav_error(path, e))?;
        }
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

/// Quantizes to 16-bit steps with triangular dither from a fixed seed, so
/// repeated exports are byte-identical. Returned samples are exact multiples
/// of 1/32768 and are stored losslessly by [`write_wav_pcm16`].
pub fn quantize_pcm16_dithered(audio: &Audio, seed: u64) -> Audio {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut channels = vec![Vec::with_capacity(audio.len()); audio.num_channels()];
    for i in 0..audio.len() {
        for (out, ch) in channels.iter_mut().zip(&audio.channels) {
            let dither: f64 = rng.random::<f64>() - rng.random::<f64>();
            let q = (ch[i] * 32_768.0 + dither).round().clamp(-32_768.0, 32_767.0);
            out.push(q / 32_768.0);
        }
    }
    Audio {
        sample_rate: audio.sample_rate,
        channels,
    }
}

/// Writes 16-bit PCM, rounding each sample to the nearest step without dither.
pub fn write_wav_pcm16(path: &Path, audio: &Audio) -> Result<()> {
    let mut writer = WavWriter::create(path, spec(audio, 16, SampleFormat::Int)).map_err(|e| wav_error(path, e))?;
    for i in 0..audio.len() {
        for ch in &audio.channels {
            let v = (ch[i] * 32_768.0).round().clamp(-32_768.0, 32_767.0) as i16;
            writer.write_sample(v).map_err(|e| wav_error(path, e))?;
        }
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}
