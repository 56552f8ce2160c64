//! Reading scalar time series from audio and text files, and cutting them
//! into analysis windows.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    rate: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::invalid(format!("sample rate must be positive, got {rate}")));
        }
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Samples per second.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    /// Drops the first `seconds` of the signal (lead-in trimming).
    pub fn skip_seconds(&self, seconds: f64) -> Result<TimeSeries> {
        if !(seconds.is_finite() && seconds >= 0.0) {
            return Err(Error::invalid(format!(
                "skip must be a nonnegative number of seconds, got {seconds}"
            )));
        }
        let skip = samples_in(seconds, self.rate);
        if skip > self.samples.len() {
            return Err(Error::InsufficientData {
                what: format!("skipping {seconds} s"),
                required: skip,
                available: self.samples.len(),
            });
        }
        Ok(TimeSeries {
            samples: self.samples[skip..].to_vec(),
            rate: self.rate,
        })
    }

    /// Rescales so that the largest absolute amplitude is 1. An all-zero
    /// signal is returned unchanged.
    pub fn peak_normalized(&self) -> TimeSeries {
        let peak = self.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if peak == 0.0 || !peak.is_finite() {
            return self.clone();
        }
        TimeSeries {
            samples: self.samples.iter().map(|x| x / peak).collect(),
            rate: self.rate,
        }
    }
}

/// Number of whole samples covering `seconds` at `rate`.
///
/// The small slack absorbs products like `0.05 * 44100` landing a hair
/// below the integer they denote.
pub(crate) fn samples_in(seconds: f64, rate: f64) -> usize {
    (seconds * rate + 1e-9).floor().max(0.0) as usize
}

/// How a series is cut into analysis windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    /// Window length in seconds.
    pub duration: f64,
    pub count: usize,
    /// Consecutive, non-overlapping windows from the start of the series.
    /// When false, the windows are spread evenly over the whole series and
    /// may overlap.
    pub disjoint: bool,
}

impl WindowSpec {
    pub fn disjoint(duration: f64, count: usize) -> Self {
        Self {
            duration,
            count,
            disjoint: true,
        }
    }
}

/// Cuts `ts` into windows of `⌊duration × rate⌋` samples each.
pub fn windows(ts: &TimeSeries, spec: &WindowSpec) -> Result<Vec<TimeSeries>> {
    if !(spec.duration.is_finite() && spec.duration > 0.0) {
        return Err(Error::invalid(format!(
            "window duration must be positive, got {}",
            spec.duration
        )));
    }
    if spec.count == 0 {
        return Err(Error::invalid("window count must be positive"));
    }
    let width = samples_in(spec.duration, ts.rate);
    if width == 0 {
        return Err(Error::invalid(format!(
            "a {} s window holds no samples at {} Hz",
            spec.duration, ts.rate
        )));
    }
    let required = if spec.disjoint { width * spec.count } else { width };
    if required > ts.len() {
        return Err(Error::InsufficientData {
            what: format!("{} windows of {} s", spec.count, spec.duration),
            required,
            available: ts.len(),
        });
    }

    let starts: Vec<usize> = if spec.disjoint {
        (0..spec.count).map(|k| k * width).collect()
    } else if spec.count == 1 {
        vec![0]
    } else {
        let span = (ts.len() - width) as f64;
        (0..spec.count)
            .map(|k| (k as f64 * span / (spec.count - 1) as f64).round() as usize)
            .collect()
    };

    Ok(starts
        .into_iter()
        .map(|s| TimeSeries {
            samples: ts.samples[s..s + width].to_vec(),
            rate: ts.rate,
        })
        .collect())
}

/// Reads a RIFF/WAVE file as a mono series with amplitudes in [-1, 1].
///
/// Integer PCM is scaled by `2^(bits-1)`; multi-channel audio is averaged.
pub fn read_wav(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format("WAV header declares zero channels".into()));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (fmt, bits) => return Err(Error::Unsupported(format!("{bits}-bit {fmt:?} WAV encoding"))),
    };

    let samples = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    TimeSeries::new(samples, f64::from(spec.sample_rate))
}

fn wav_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Format(format!("{}: truncated WAV data", path.display()))
        }
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::FormatError(msg) => Error::Format(format!("{}: {msg}", path.display())),
        hound::Error::Unsupported => Error::Unsupported(format!("{}: WAV encoding", path.display())),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Writes `ts` as 16-bit mono PCM. Amplitudes are clipped to [-1, 1].
pub fn write_wav_pcm16(path: impl AsRef<Path>, ts: &TimeSeries) -> Result<()> {
    let path = path.as_ref();
    let rate = ts.rate.round();
    if rate < 1.0 || rate > f64::from(u32::MAX) {
        return Err(Error::invalid(format!(
            "sample rate {} does not fit a WAV header",
            ts.rate
        )));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &x in &ts.samples {
        let v = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

/// Reads one real number per line. A non-numeric first line is treated as a
/// header; blank lines are ignored.
pub fn read_csv(path: impl AsRef<Path>, rate: f64) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let samples = parse_column(&text)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput(format!("{} contains no samples", path.display())));
    }
    TimeSeries::new(samples, rate)
}

fn parse_column(text: &str) -> Result<Vec<f64>> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(v),
            _ if idx == 0 => {}
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected a real number, found {line:?}"),
                })
            }
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(n: usize, rate: f64) -> TimeSeries {
        TimeSeries::new((0..n).map(|i| i as f64).collect(), rate).unwrap()
    }

    fn write_spec(
        path: &Path,
        spec: hound::WavSpec,
        f: impl FnOnce(&mut hound::WavWriter<std::io::BufWriter<fs::File>>),
    ) {
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        f(&mut w);
        w.finalize().unwrap();
    }

    fn pcm(channels: u16, bits: u16) -> hound::WavSpec {
        hound::WavSpec {
            channels,
            sample_rate: 44100,
            bits_per_sample: bits,
            sample_format: hound::SampleFormat::Int,
        }
    }

    #[test]
    fn silence_reads_as_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("silence.wav");
        write_spec(&path, pcm(1, 16), |w| {
            for _ in 0..441 {
                w.write_sample(0i16).unwrap();
            }
        });
        let ts = read_wav(&path).unwrap();
        assert_eq!(ts.rate(), 44100.0);
        assert_eq!(ts.samples(), vec![0.0; 441].as_slice());
    }

    #[test]
    fn pcm16_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("half.wav");
        write_spec(&path, pcm(1, 16), |w| {
            w.write_sample(16384i16).unwrap();
            w.write_sample(-32768i16).unwrap();
        });
        assert_eq!(read_wav(&path).unwrap().samples(), &[0.5, -1.0]);
    }

    #[test]
    fn stereo_is_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stereo.wav");
        write_spec(&path, pcm(2, 16), |w| {
            for _ in 0..10 {
                w.write_sample(16384i16).unwrap();
                w.write_sample(-16384i16).unwrap();
            }
        });
        let ts = read_wav(&path).unwrap();
        assert_eq!(ts.len(), 10);
        assert!(ts.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn other_bit_depths() {
        let dir = tempfile::tempdir().unwrap();
        let p8 = dir.path().join("8.wav");
        write_spec(&p8, pcm(1, 8), |w| {
            w.write_sample(64i8).unwrap();
            w.write_sample(-128i8).unwrap();
        });
        assert_eq!(read_wav(&p8).unwrap().samples(), &[0.5, -1.0]);

        let p24 = dir.path().join("24.wav");
        write_spec(&p24, pcm(1, 24), |w| {
            w.write_sample(1i32 << 22).unwrap();
        });
        assert_eq!(read_wav(&p24).unwrap().samples(), &[0.5]);

        let pf = dir.path().join("f.wav");
        let spec = hound::WavSpec {
            sample_format: hound::SampleFormat::Float,
            ..pcm(1, 32)
        };
        write_spec(&pf, spec, |w| {
            w.write_sample(-0.25f32).unwrap();
        });
        assert_eq!(read_wav(&pf).unwrap().samples(), &[-0.25]);
    }

    #[test]
    fn malformed_and_compressed_wav() {
        let dir = tempfile::tempdir().unwrap();
        let junk = dir.path().join("junk.wav");
        fs::write(&junk, b"not a riff file at all").unwrap();
        assert!(matches!(read_wav(&junk), Err(Error::Format(_))));

        // Otherwise consistent header declaring format tag 2 (MS ADPCM).
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&36u32.to_le_bytes());
        bytes.extend_from_slice(b"WAVEfmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&44100u32.to_le_bytes());
        bytes.extend_from_slice(&88200u32.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&16u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&0u32.to_le_bytes());
        let adpcm = dir.path().join("adpcm.wav");
        fs::write(&adpcm, bytes).unwrap();
        assert!(matches!(read_wav(&adpcm), Err(Error::Unsupported(_))));

        let missing = dir.path().join("missing.wav");
        let err = read_wav(&missing).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("missing.wav"));
    }

    #[test]
    fn csv_reading() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "0.0\n1.0\n0.0").unwrap();
        let ts = read_csv(&p, 10.0).unwrap();
        assert_eq!(ts.samples(), &[0.0, 1.0, 0.0]);
        assert_eq!(ts.rate(), 10.0);

        fs::write(&p, "x\n1\n2\n").unwrap();
        assert_eq!(read_csv(&p, 3.0).unwrap().samples(), &[1.0, 2.0]);

        fs::write(&p, "1\n2\nabc\n").unwrap();
        match read_csv(&p, 3.0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        fs::write(&p, "").unwrap();
        assert!(matches!(read_csv(&p, 3.0), Err(Error::EmptyInput(_))));
        fs::write(&p, "header\n").unwrap();
        assert!(matches!(read_csv(&p, 3.0), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn window_arithmetic() {
        let one_second = series(44100, 44100.0);
        let w = windows(&one_second, &WindowSpec::disjoint(0.05, 20)).unwrap();
        assert_eq!(w.len(), 20);
        assert!(w.iter().all(|x| x.len() == 2205));

        match windows(&one_second, &WindowSpec::disjoint(0.05, 25)) {
            Err(Error::InsufficientData {
                required, available, ..
            }) => {
                assert_eq!(required, 55125);
                assert_eq!(available, 44100);
            }
            other => panic!("expected insufficient data, got {other:?}"),
        }
    }

    #[test]
    fn disjoint_window_starts() {
        // Sample value equals its index, so each window's first value is its start.
        let two_seconds = series(88200, 44100.0);
        let w = windows(&two_seconds, &WindowSpec::disjoint(0.05, 25)).unwrap();
        let mut expected = Vec::new();
        let mut start = 0usize;
        for _ in 0..25 {
            expected.push(start as f64);
            start += 2205;
        }
        let got: Vec<f64> = w.iter().map(|x| x.samples()[0]).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn overlapping_windows_span_the_series() {
        let ts = series(100, 10.0);
        let spec = WindowSpec {
            duration: 2.0,
            count: 5,
            disjoint: false,
        };
        let w = windows(&ts, &spec).unwrap();
        let starts: Vec<f64> = w.iter().map(|x| x.samples()[0]).collect();
        assert_eq!(starts, vec![0.0, 20.0, 40.0, 60.0, 80.0]);
    }

    #[test]
    fn skip_and_normalize() {
        let ts = TimeSeries::new(vec![0.0, 0.0, 2.0, -4.0], 2.0).unwrap();
        let s = ts.skip_seconds(1.0).unwrap();
        assert_eq!(s.samples(), &[2.0, -4.0]);
        assert_eq!(s.peak_normalized().samples(), &[0.5, -1.0]);
        assert!(ts.skip_seconds(3.0).is_err());
        assert!(TimeSeries::new(vec![1.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn disjoint_windows_do_not_overlap(n in 50usize..2000, count in 1usize..8, width in 1usize..40) {
            let ts = series(n, 100.0);
            let spec = WindowSpec::disjoint(width as f64 / 100.0, count);
            if let Ok(w) = windows(&ts, &spec) {
                for pair in w.windows(2) {
                    let end = pair[0].samples().last().copied().unwrap();
                    prop_assert!(pair[1].samples()[0] > end);
                }
            } else {
                prop_assert!(width * count > n);
            }
        }

        #[test]
        fn pcm16_round_trip(samples in proptest::collection::vec(-1.0f64..=1.0, 1..200)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.wav");
            let ts = TimeSeries::new(samples, 8000.0).unwrap();
            write_wav_pcm16(&path, &ts).unwrap();
            let back = read_wav(&path).unwrap();
            prop_assert_eq!(back.len(), ts.len());
            for (a, b) in ts.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 1.0 / 32768.0);
            }
        }
    }
}
