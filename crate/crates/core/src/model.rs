//! Plain-text model files.
//!
//! ```text
//! witness-tda-model,1,prf
//! [config]
//! key,value
//! ...
//! [sigma]
//! 0.0123
//! [mean]
//! a,b,value        (prf)   or   freq,value   (fft)
//! ...
//! ```
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so a saved model reloads bit-for-bit.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::classify::{FftModel, MembershipModel, PipelineConfig, PrfModel};
use crate::embed::DelayParams;
use crate::error::{Error, Result};
use crate::ingest::TimeSeries;
use crate::prf::PrfGrid;
use crate::spectrum::{feature_frequencies, FEATURE_LEN};

const MAGIC: &str = "witness-tda-model";
const VERSION: u32 = 1;

/// A trained classifier of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Prf(PrfModel),
    Fft(FftModel),
}

impl ClassifierModel {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Prf(_) => "prf",
            Self::Fft(_) => "fft",
        }
    }

    pub fn window_len(&self) -> usize {
        match self {
            Self::Prf(m) => m.window_len,
            Self::Fft(m) => m.window_len,
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            Self::Prf(m) => m.rate,
            Self::Fft(m) => m.rate,
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{MAGIC},{VERSION},{}", self.kind())?;
        writeln!(out, "[config]")?;
        writeln!(out, "key,value")?;
        match self {
            Self::Prf(m) => {
                let c = &m.config;
                writeln!(out, "rate,{}", m.rate)?;
                writeln!(out, "window_len,{}", m.window_len)?;
                writeln!(out, "tau,{}", c.delay.tau)?;
                writeln!(out, "dim,{}", c.delay.dim)?;
                writeln!(out, "landmarks,{}", c.landmarks)?;
                writeln!(out, "strategy,{}", c.strategy)?;
                writeln!(out, "resolution,{}", c.resolution)?;
                writeln!(out, "eps_max,{}", m.eps_max())?;
                writeln!(out, "max_dim,{}", c.max_dim)?;
                writeln!(out, "stop_dim,{}", c.stop_dim)?;
                writeln!(out, "homology_dim,{}", c.homology_dim)?;
                if let Some(w) = c.max_witnesses {
                    writeln!(out, "max_witnesses,{w}")?;
                }
                writeln!(out, "[sigma]")?;
                writeln!(out, "{}", m.sigma)?;
                writeln!(out, "[mean]")?;
                m.mean.write_csv(&mut out)
            }
            Self::Fft(m) => {
                writeln!(out, "rate,{}", m.rate)?;
                writeln!(out, "window_len,{}", m.window_len)?;
                writeln!(out, "taper,{}", m.taper)?;
                writeln!(out, "[sigma]")?;
                writeln!(out, "{}", m.sigma)?;
                writeln!(out, "[mean]")?;
                writeln!(out, "freq,value")?;
                for (f, v) in feature_frequencies().iter().zip(&m.mean) {
                    writeln!(out, "{f},{v}")?;
                }
                Ok(())
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| parse_error(i + 1, e.to_string()))?;
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                lines.push((i + 1, trimmed.to_string()));
            }
        }
        let Some((_, header)) = lines.first() else {
            return Err(Error::EmptyInput("model file is empty".into()));
        };
        let fields: Vec<&str> = header.split(',').collect();
        if fields.len() != 3 || fields[0] != MAGIC {
            return Err(parse_error(1, format!("not a model file (header {header:?})")));
        }
        let version: u32 = parse_field(1, fields[1], "version")?;
        if version != VERSION {
            return Err(Error::Unsupported(format!("model file version {version}")));
        }
        let kind = fields[2].to_string();
        let sections = split_sections(&lines[1..])?;
        let config = parse_config(section(&sections, "config")?)?;
        let sigma_lines = section(&sections, "sigma")?;
        let [(line, sigma)] = sigma_lines else {
            return Err(parse_error(
                sigma_lines.first().map_or(1, |l| l.0),
                "[sigma] must hold exactly one value",
            ));
        };
        let sigma: f64 = parse_field(*line, sigma, "sigma")?;
        let mean = section(&sections, "mean")?;
        let rate: f64 = config.get("rate")?;
        let window_len: usize = config.get("window_len")?;

        match kind.as_str() {
            "prf" => {
                let delay = DelayParams::new(config.get("tau")?, config.get("dim")?)?;
                let mut pipeline = PipelineConfig::new(delay, config.get("landmarks")?);
                pipeline.strategy = config.get("strategy")?;
                pipeline.resolution = config.get("resolution")?;
                let eps_max: f64 = config.get("eps_max")?;
                pipeline.eps_max = Some(eps_max);
                pipeline.max_dim = config.get("max_dim")?;
                pipeline.stop_dim = config.get("stop_dim")?;
                pipeline.homology_dim = config.get("homology_dim")?;
                pipeline.max_witnesses = config.get_opt("max_witnesses")?;
                let mean = parse_prf_mean(mean, pipeline.resolution, eps_max)?;
                Ok(Self::Prf(PrfModel {
                    config: pipeline,
                    mean,
                    sigma,
                    window_len,
                    rate,
                }))
            }
            "fft" => {
                let taper: bool = config.get("taper")?;
                let rows = parse_rows(mean, "freq,value", 2)?;
                if rows.len() != FEATURE_LEN {
                    return Err(parse_error(
                        mean.first().map_or(1, |l| l.0),
                        format!("expected {FEATURE_LEN} spectrum values, found {}", rows.len()),
                    ));
                }
                Ok(Self::Fft(FftModel {
                    mean: rows.into_iter().map(|r| r[1]).collect(),
                    sigma,
                    taper,
                    window_len,
                    rate,
                }))
            }
            other => Err(Error::Unsupported(format!("model kind {other:?}"))),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }
}

impl MembershipModel for ClassifierModel {
    fn distance(&self, sample: &TimeSeries) -> Result<f64> {
        match self {
            Self::Prf(m) => m.distance(sample),
            Self::Fft(m) => m.distance(sample),
        }
    }

    fn sigma(&self) -> f64 {
        match self {
            Self::Prf(m) => m.sigma,
            Self::Fft(m) => m.sigma,
        }
    }
}

type Lines<'a> = &'a [(usize, String)];

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_field<T: FromStr>(line: usize, raw: &str, what: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| parse_error(line, format!("bad {what} {raw:?}")))
}

fn split_sections(lines: Lines<'_>) -> Result<Vec<(String, Lines<'_>)>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, (line, text)) in lines.iter().enumerate() {
        if let Some(name) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            if let Some((prev, s)) = start.take() {
                out.push((prev, &lines[s..i]));
            }
            start = Some((name.to_string(), i + 1));
        } else if start.is_none() {
            return Err(parse_error(*line, format!("content outside a section: {text:?}")));
        }
    }
    if let Some((prev, s)) = start {
        out.push((prev, &lines[s..]));
    }
    Ok(out)
}

fn section<'a>(sections: &[(String, Lines<'a>)], name: &str) -> Result<Lines<'a>> {
    sections
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, l)| *l)
        .ok_or_else(|| Error::Format(format!("model file lacks a [{name}] section")))
}

struct Config(BTreeMap<String, (usize, String)>);

impl Config {
    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get_opt(key)?
            .ok_or_else(|| Error::Format(format!("model config lacks {key:?}")))
    }

    fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|(line, raw)| parse_field(*line, raw, key))
            .transpose()
    }
}

fn parse_config(lines: Lines<'_>) -> Result<Config> {
    let mut map = BTreeMap::new();
    for (line, text) in lines {
        if text == "key,value" {
            continue;
        }
        let (k, v) = text
            .split_once(',')
            .ok_or_else(|| parse_error(*line, format!("expected key,value: {text:?}")))?;
        map.insert(k.trim().to_string(), (*line, v.trim().to_string()));
    }
    Ok(Config(map))
}

fn parse_rows(lines: Lines<'_>, header: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    lines
        .iter()
        .filter(|(_, t)| t != header)
        .map(|(line, text)| {
            let row = text
                .split(',')
                .map(|f| parse_field(*line, f, "number"))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != width {
                return Err(parse_error(
                    *line,
                    format!("expected {width} fields, found {}", row.len()),
                ));
            }
            Ok(row)
        })
        .collect()
}

fn parse_prf_mean(lines: Lines<'_>, resolution: usize, eps_max: f64) -> Result<PrfGrid> {
    let rows = parse_rows(lines, "a,b,value", 3)?;
    if rows.len() != resolution * resolution {
        return Err(Error::Format(format!(
            "expected {} rank-function cells, found {}",
            resolution * resolution,
            rows.len()
        )));
    }
    PrfGrid::from_fn(resolution, eps_max, |i, j| rows[i * resolution + j][2])
}
