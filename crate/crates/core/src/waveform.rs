//! Uniformly sampled real time series and their file formats.
//!
//! The native format is raw little-endian `f32` samples with a JSON sidecar
//! `<file>.json` holding `{"sample_rate": …, "t0": …}`. Mono PCM WAV files
//! (16-bit integer or 32-bit float) are accepted for external recordings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Real samples at `t0 + i / sample_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T = f64> {
    sample_rate: T,
    t0: T,
    samples: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    sample_rate: f64,
    t0: f64,
}

impl<T: Real> Waveform<T> {
    pub fn new(sample_rate: T, t0: T, samples: Vec<T>) -> Result<Self> {
        if !(sample_rate > T::zero()) || !sample_rate.is_finite() {
            return Err(Error::out_of_range(
                "sample rate",
                sample_rate.to_f64_lossy(),
                "(0, inf)",
            ));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("start time must be finite"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            sample_rate,
            t0,
            samples,
        })
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> T {
        self.sample_rate.recip()
    }

    /// Time of sample `i`.
    pub fn time(&self, i: usize) -> T {
        self.t0 + T::from_usize_lossy(i) / self.sample_rate
    }

    /// Time of the last sample (t0 for an empty waveform).
    pub fn end_time(&self) -> T {
        self.time(self.len().saturating_sub(1))
    }

    pub fn duration(&self) -> T {
        T::from_usize_lossy(self.len()) / self.sample_rate
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> T {
        self.samples.iter().fold(T::zero(), |s, &v| s + v * v)
    }

    /// Samples with times in `[t_start, t_end]`, keeping the time base.
    pub fn crop(&self, t_start: T, t_end: T) -> Self {
        let fs = self.sample_rate;
        let first = ((t_start - self.t0) * fs).ceil().max(T::zero());
        let last = ((t_end - self.t0) * fs).floor();
        let n = self.len();
        let (a, b) = match (first.to_usize(), last.to_usize()) {
            (Some(a), Some(b)) if a <= b && a < n => (a, (b + 1).min(n)),
            _ => (0, 0),
        };
        Self {
            sample_rate: fs,
            t0: self.time(a),
            samples: self.samples[a..b].to_vec(),
        }
    }

    /// Same time base with every sample outside `[t_start, t_end]` set to zero.
    pub fn gate(&self, t_start: T, t_end: T) -> Self {
        let mut out = self.clone();
        for (i, v) in out.samples.iter_mut().enumerate() {
            let t = self.time(i);
            if t < t_start || t > t_end {
                *v = T::zero();
            }
        }
        out
    }

    /// Central interval holding `fraction` of the energy, trimming equal
    /// shares from both ends. Returns `None` for an all-zero signal.
    pub fn energy_interval(&self, fraction: T) -> Option<(T, T)> {
        let total = self.energy();
        if !(total > T::zero()) {
            return None;
        }
        let tail = (T::one() - fraction) * T::lit(0.5) * total;
        let mut acc = T::zero();
        let mut start = None;
        let mut end = self.len() - 1;
        for (i, &v) in self.samples.iter().enumerate() {
            acc = acc + v * v;
            if start.is_none() && acc > tail {
                start = Some(i);
            }
            if acc >= total - tail {
                end = i;
                break;
            }
        }
        let start = start.unwrap_or(0);
        Some((self.time(start), self.time(end)))
    }

    /// Duration of [`Waveform::energy_interval`].
    pub fn energy_duration(&self, fraction: T) -> Option<T> {
        self.energy_interval(fraction).map(|(a, b)| b - a)
    }

    /// Normalized correlation with `other` over their common time span.
    ///
    /// Both waveforms must share a sample rate; sample alignment is by
    /// nearest sample of the start-time offset.
    pub fn correlation(&self, other: &Self) -> Result<T> {
        let tol = T::lit(1e-9) * self.sample_rate;
        if (self.sample_rate - other.sample_rate).abs() > tol {
            return Err(Error::invalid("correlation needs equal sample rates"));
        }
        let offset = ((other.t0 - self.t0) * self.sample_rate).round().to_i64().unwrap_or(0);
        let (a, b) = if offset >= 0 {
            let o = offset as usize;
            (self.samples.get(o..).unwrap_or(&[]), &other.samples[..])
        } else {
            let o = (-offset) as usize;
            (&self.samples[..], other.samples.get(o..).unwrap_or(&[]))
        };
        let n = a.len().min(b.len());
        Ok(crate::dsp::normalized_correlation(&a[..n], &b[..n]))
    }

    /// Scales every sample by `k`.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            sample_rate: self.sample_rate,
            t0: self.t0,
            samples: self.samples.iter().map(|&v| v * k).collect(),
        }
    }

    /// Sample-wise sum of waveforms that share a time base.
    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        let mut it = parts.into_iter();
        let first = it.next().ok_or_else(|| Error::invalid("nothing to sum"))?;
        let mut out = first.clone();
        for w in it {
            if w.len() != out.len() || w.sample_rate != out.sample_rate || w.t0 != out.t0 {
                return Err(Error::invalid("summed waveforms must share a time base"));
            }
            for (o, &v) in out.samples.iter_mut().zip(&w.samples) {
                *o = *o + v;
            }
        }
        Ok(out)
    }

    /// Writes raw little-endian `f32` samples to `path` and the sidecar next to it.
    pub fn write_raw(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(4 * self.len());
        for &v in &self.samples {
            bytes.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
        }
        fs::write(path, bytes)?;
        fs::write(sidecar_path(path), self.sidecar_json())?;
        Ok(())
    }

    /// JSON text of the sidecar for this waveform.
    pub fn sidecar_json(&self) -> String {
        let s = Sidecar {
            sample_rate: self.sample_rate.to_f64_lossy(),
            t0: self.t0.to_f64_lossy(),
        };
        serde_json::to_string(&s).expect("plain struct serializes") + "\n"
    }

    /// Reads the raw format written by [`Waveform::write_raw`].
    pub fn read_raw(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        if bytes.len() % 4 != 0 {
            return Err(Error::invalid(format!(
                "{}: length {} is not a multiple of 4 bytes",
                path.display(),
                bytes.len()
            )));
        }
        let text = fs::read_to_string(sidecar_path(path))?;
        let meta: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", sidecar_path(path).display()),
        })?;
        let samples = bytes
            .chunks_exact(4)
            .map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
            .collect();
        Self::new(T::lit(meta.sample_rate), T::lit(meta.t0), samples)
    }

    /// Reads a mono WAV file (16-bit PCM or 32-bit float) with t0 = `t0`.
    pub fn read_wav(path: &Path, t0: T) -> Result<Self> {
        let mut reader = hound::WavReader::open(path)?;
        let spec = reader.spec();
        if spec.channels != 1 {
            return Err(Error::invalid(format!(
                "{}: expected mono audio, found {} channels",
                path.display(),
                spec.channels
            )));
        }
        let samples: Vec<T> = match (spec.sample_format, spec.bits_per_sample) {
            (hound::SampleFormat::Int, 16) => reader
                .samples::<i16>()
                .map(|s| s.map(|v| T::lit(v as f64 / 32768.0)))
                .collect::<Result<_, _>>()?,
            (hound::SampleFormat::Float, 32) => reader
                .samples::<f32>()
                .map(|s| s.map(|v| T::lit(v as f64)))
                .collect::<Result<_, _>>()?,
            (fmt, bits) => {
                return Err(Error::invalid(format!(
                    "{}: unsupported sample format {fmt:?} with {bits} bits",
                    path.display()
                )))
            }
        };
        Self::new(T::lit(spec.sample_rate as f64), t0, samples)
    }

    /// Writes a mono 32-bit float WAV file (the start time is not stored).
    pub fn write_wav(&self, path: &Path) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate.round().to_u32().unwrap_or(0),
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(path, spec)?;
        for &v in &self.samples {
            w.write_sample(v.to_f32().unwrap_or(0.0))?;
        }
        w.finalize()?;
        Ok(())
    }

    /// Reads either format: `.wav` by extension, raw `f32` otherwise.
    pub fn read_any(path: &Path) -> Result<Self> {
        let is_wav = path
            .extension()
            .and_then(|e| e.to_str())
            .map_or(false, |e| e.eq_ignore_ascii_case("wav"));
        if is_wav {
            Self::read_wav(path, T::zero())
        } else {
            Self::read_raw(path)
        }
    }
}

/// Sidecar path `<file>.json` for a raw waveform file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
