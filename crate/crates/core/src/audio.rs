//! Mono 16-bit PCM clips: WAV I/O, slicing, and crossfade concatenation.
//!
//! Everything stays in the source sample rate; there is no resampling. Mixed
//! rates are a hard [`AudioError::RateMismatch`] so unit provenance is never
//! silently blurred by interpolation.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum AudioError {
    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("slice [{start}s, {end}s) is outside the clip ({duration}s)")]
    OutOfRange { start: f64, end: f64, duration: f64 },
    #[error("sample rate mismatch: {expected} Hz vs {found} Hz")]
    RateMismatch { expected: u32, found: u32 },
    #[error("crossfade of {requested_ms} ms exceeds half of a {clip_ms} ms clip")]
    CrossfadeTooLong { requested_ms: f64, clip_ms: f64 },
    #[error("crossfade must be finite and non-negative, got {0}")]
    InvalidCrossfade(f64),
    #[error("cannot concatenate an empty clip list")]
    EmptyConcat,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A mono clip of signed 16-bit samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioClip {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> AudioClip {
        AudioClip {
            samples,
            sample_rate,
        }
    }

    /// An all-zero clip of `round(duration * rate)` samples.
    pub fn silence(duration_seconds: f64, sample_rate: u32) -> AudioClip {
        let n = (duration_seconds * sample_rate as f64).round().max(0.0) as usize;
        AudioClip {
            samples: vec![0; n],
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Copies out `[start, end)` seconds. Boundaries convert to sample indices
    /// by round-to-nearest, so the length error versus `(end - start) * rate`
    /// is at most one sample. `end` may overshoot the clip by up to half a
    /// sample period.
    pub fn slice(&self, start_seconds: f64, end_seconds: f64) -> Result<AudioClip, AudioError> {
        let rate = self.sample_rate as f64;
        let duration = self.duration_seconds();
        let out_of_range = || AudioError::OutOfRange {
            start: start_seconds,
            end: end_seconds,
            duration,
        };
        if !start_seconds.is_finite()
            || !end_seconds.is_finite()
            || start_seconds < 0.0
            || end_seconds <= start_seconds
            || end_seconds > duration + 0.5 / rate + 1e-9
        {
            return Err(out_of_range());
        }
        let i0 = ((start_seconds * rate).round() as usize).min(self.samples.len());
        let i1 = ((end_seconds * rate).round() as usize).min(self.samples.len());
        Ok(AudioClip {
            samples: self.samples[i0.min(i1)..i1].to_vec(),
            sample_rate: self.sample_rate,
        })
    }
}

/// Joins clips end to end. With `crossfade_ms > 0`, each join overlaps
/// `round(crossfade_ms * rate / 1000)` samples under linear equal-gain ramps,
/// so the output length is the sample sum minus `(n - 1) * overlap`. The
/// crossfade may not exceed half of any clip.
pub fn concat(clips: &[AudioClip], crossfade_ms: f64) -> Result<AudioClip, AudioError> {
    if !crossfade_ms.is_finite() || crossfade_ms < 0.0 {
        return Err(AudioError::InvalidCrossfade(crossfade_ms));
    }
    let first = clips.first().ok_or(AudioError::EmptyConcat)?;
    let rate = first.sample_rate;
    for clip in clips {
        if clip.sample_rate != rate {
            return Err(AudioError::RateMismatch {
                expected: rate,
                found: clip.sample_rate,
            });
        }
    }
    if clips.len() == 1 {
        return Ok(first.clone());
    }

    let overlap = (crossfade_ms * rate as f64 / 1000.0).round() as usize;
    if overlap > 0 {
        for clip in clips {
            if overlap * 2 > clip.len() {
                return Err(AudioError::CrossfadeTooLong {
                    requested_ms: crossfade_ms,
                    clip_ms: clip.len() as f64 * 1000.0 / rate as f64,
                });
            }
        }
    }

    let total: usize = clips.iter().map(AudioClip::len).sum();
    let mut samples = Vec::with_capacity(total - (clips.len() - 1) * overlap);
    samples.extend_from_slice(&clips[0].samples);
    for clip in &clips[1..] {
        if overlap == 0 {
            samples.extend_from_slice(&clip.samples);
            continue;
        }
        let tail = samples.len() - overlap;
        for (k, incoming) in clip.samples[..overlap].iter().enumerate() {
            // Midpoint ramp: gains sum to one at every sample, so the mix is a
            // convex combination and cannot leave the int16 range.
            let alpha = (k as f64 + 0.5) / overlap as f64;
            let outgoing = samples[tail + k] as f64;
            let mixed = outgoing * (1.0 - alpha) + *incoming as f64 * alpha;
            samples[tail + k] = mixed.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        }
        samples.extend_from_slice(&clip.samples[overlap..]);
    }
    Ok(AudioClip {
        samples,
        sample_rate: rate,
    })
}

const RIFF_FORMAT_PCM: u16 = 1;

/// Reads a PCM WAV stream. Accepts 16-bit mono or stereo; stereo is downmixed
/// to mono by per-sample average. Anything else is [`AudioError::UnsupportedEncoding`].
pub fn read_wav<R: Read>(mut reader: R) -> Result<AudioClip, AudioError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_wav(&bytes)
}

pub fn read_wav_file<P: AsRef<Path>>(path: P) -> Result<AudioClip, AudioError> {
    read_wav(BufReader::new(File::open(path)?))
}

fn parse_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    let corrupt = |msg: &str| AudioError::CorruptHeader(msg.to_string());
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(corrupt("missing RIFF/WAVE magic"));
    }

    let mut format: Option<(u16, u32)> = None; // (channels, sample_rate)
    let mut offset = 12usize;
    while offset + 8 <= bytes.len() {
        let id = &bytes[offset..offset + 4];
        let size = u32::from_le_bytes(bytes[offset + 4..offset + 8].try_into().unwrap()) as usize;
        let body_start = offset + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| corrupt("chunk extends past end of file"))?;
        let body = &bytes[body_start..body_end];

        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(corrupt("fmt chunk too small"));
                }
                let audio_format = u16::from_le_bytes([body[0], body[1]]);
                let channels = u16::from_le_bytes([body[2], body[3]]);
                let sample_rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes([body[14], body[15]]);
                if audio_format != RIFF_FORMAT_PCM {
                    return Err(AudioError::UnsupportedEncoding(format!(
                        "format code {audio_format}, only PCM (1) is supported"
                    )));
                }
                if bits != 16 {
                    return Err(AudioError::UnsupportedEncoding(format!(
                        "{bits}-bit samples, only 16-bit is supported"
                    )));
                }
                if channels == 0 || channels > 2 {
                    return Err(AudioError::UnsupportedEncoding(format!(
                        "{channels} channels, only mono and stereo are supported"
                    )));
                }
                if sample_rate == 0 {
                    return Err(corrupt("zero sample rate"));
                }
                format = Some((channels, sample_rate));
            }
            b"data" => {
                let (channels, sample_rate) =
                    format.ok_or_else(|| corrupt("data chunk before fmt chunk"))?;
                let frame = 2 * channels as usize;
                if body.len() % frame != 0 {
                    return Err(corrupt("data chunk is not a whole number of frames"));
                }
                let mut samples = Vec::with_capacity(body.len() / frame);
                match channels {
                    1 => {
                        for pair in body.chunks_exact(2) {
                            samples.push(i16::from_le_bytes([pair[0], pair[1]]));
                        }
                    }
                    _ => {
                        for quad in body.chunks_exact(4) {
                            let left = i16::from_le_bytes([quad[0], quad[1]]) as i32;
                            let right = i16::from_le_bytes([quad[2], quad[3]]) as i32;
                            samples.push(((left + right) / 2) as i16);
                        }
                    }
                }
                return Ok(AudioClip {
                    samples,
                    sample_rate,
                });
            }
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        offset = body_end + (size & 1);
    }
    Err(corrupt("no data chunk"))
}

/// Writes the clip as a canonical 44-byte-header mono PCM16 WAV. Reading the
/// result back yields a bit-exact copy of the input.
pub fn write_wav<W: Write>(clip: &AudioClip, mut writer: W) -> Result<(), AudioError> {
    let data_len = (clip.samples.len() * 2) as u32;
    let byte_rate = clip.sample_rate * 2;
    writer.write_all(b"RIFF")?;
    writer.write_all(&(36 + data_len).to_le_bytes())?;
    writer.write_all(b"WAVE")?;
    writer.write_all(b"fmt ")?;
    writer.write_all(&16u32.to_le_bytes())?;
    writer.write_all(&RIFF_FORMAT_PCM.to_le_bytes())?;
    writer.write_all(&1u16.to_le_bytes())?;
    writer.write_all(&clip.sample_rate.to_le_bytes())?;
    writer.write_all(&byte_rate.to_le_bytes())?;
    writer.write_all(&2u16.to_le_bytes())?;
    writer.write_all(&16u16.to_le_bytes())?;
    writer.write_all(b"data")?;
    writer.write_all(&data_len.to_le_bytes())?;
    for sample in &clip.samples {
        writer.write_all(&sample.to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_wav_file<P: AsRef<Path>>(clip: &AudioClip, path: P) -> Result<(), AudioError> {
    write_wav(clip, BufWriter::new(File::create(path)?))
}

/// In-memory WAV encoding, used for content-addressed unit blobs.
pub fn wav_bytes(clip: &AudioClip) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(44 + clip.samples.len() * 2);
    write_wav(clip, &mut bytes).expect("writing to a Vec cannot fail");
    bytes
}
