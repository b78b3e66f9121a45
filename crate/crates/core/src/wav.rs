//! RIFF WAV ingestion (mono, 16-bit PCM or 32-bit float) and export.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{DoaError, Result};
use crate::scalar::Real;
use crate::simulate::MultichannelRecording;

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> DoaError + '_ {
    move |source| DoaError::Wav {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a mono file and scales it to unit peak. Returns samples and rate.
pub fn read_mono(path: &Path) -> Result<(Vec<f64>, u32)> {
    let mut reader = WavReader::open(path).map_err(wav_err(path))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(DoaError::InvalidParameter(format!(
            "{}: expected mono, found {} channels",
            path.display(),
            spec.channels
        )));
    }
    let mut samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        (fmt, bits) => {
            return Err(DoaError::InvalidParameter(format!(
                "{}: unsupported sample format {fmt:?}/{bits} bit",
                path.display()
            )))
        }
    };
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        samples.iter_mut().for_each(|v| *v /= peak);
    }
    Ok((samples, spec.sample_rate))
}

fn float_spec(channels: u16, sample_rate: u32) -> WavSpec {
    WavSpec {
        channels,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    }
}

/// Writes every mic as one interleaved 32-bit float file.
pub fn write_multichannel<T: Real>(path: &Path, rec: &MultichannelRecording<T>) -> Result<()> {
    let rate = rec.sample_rate.to_f64_lossy().round() as u32;
    let mut w = WavWriter::create(path, float_spec(rec.num_mics() as u16, rate)).map_err(wav_err(path))?;
    for t in 0..rec.num_samples() {
        for ch in &rec.samples {
            w.write_sample(ch[t].to_f64_lossy() as f32).map_err(wav_err(path))?;
        }
    }
    w.finalize().map_err(wav_err(path))
}

/// Writes `mic_00.wav`, `mic_01.wav`, ... into `dir`.
pub fn write_per_mic<T: Real>(dir: &Path, rec: &MultichannelRecording<T>) -> Result<()> {
    let rate = rec.sample_rate.to_f64_lossy().round() as u32;
    for (m, ch) in rec.samples.iter().enumerate() {
        let path = dir.join(format!("mic_{m:02}.wav"));
        let mut w = WavWriter::create(&path, float_spec(1, rate)).map_err(wav_err(&path))?;
        for &v in ch {
            w.write_sample(v.to_f64_lossy() as f32).map_err(wav_err(&path))?;
        }
        w.finalize().map_err(wav_err(&path))?;
    }
    Ok(())
}
