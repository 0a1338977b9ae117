//! Amplitude sequences that drive bit decisions.
//!
//! Every [`SignalSource`] is normalized to `[-1/2, +1/2]`, the range the
//! threshold tree operates on. Sources are immutable once built and are
//! shared read-only between parallel measurements.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound of the normalized amplitude range.
pub const AMPLITUDE_MIN: f64 = -0.5;
/// Upper bound of the normalized amplitude range.
pub const AMPLITUDE_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Recorded,
    UniformIid,
    LogisticMap,
}

/// On-disk layout of a recorded trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceFormat {
    /// One signed byte per sample (oscilloscope dump).
    Int8Binary,
    /// One decimal float per line.
    FloatText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    UniformIid,
    LogisticMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSource {
    samples: Vec<f64>,
    origin: Origin,
    seed: Option<u64>,
}

impl SignalSource {
    /// Wraps already-normalized samples. Fails if any sample is outside
    /// `[-1/2, 1/2]` or the sequence is empty.
    pub fn from_normalized(samples: Vec<f64>, origin: Origin) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument(
                "signal must contain at least one sample".into(),
            ));
        }
        if let Some(bad) = samples
            .iter()
            .find(|s| !(AMPLITUDE_MIN..=AMPLITUDE_MAX).contains(*s))
        {
            return Err(Error::InvalidArgument(format!(
                "sample {bad} outside [-0.5, 0.5]"
            )));
        }
        Ok(Self {
            samples,
            origin,
            seed: None,
        })
    }

    /// Affinely maps raw values so the observed minimum lands on -1/2 and the
    /// maximum on +1/2. A constant trace maps to all zeros.
    pub fn from_raw(raw: &[f64], origin: Origin) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidArgument(
                "signal must contain at least one sample".into(),
            ));
        }
        if let Some(bad) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample {bad}")));
        }
        let (lo, hi) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        let samples = if span > 0.0 {
            raw.iter()
                .map(|&v| ((v - lo) / span - 0.5).clamp(AMPLITUDE_MIN, AMPLITUDE_MAX))
                .collect()
        } else {
            vec![0.0; raw.len()]
        };
        Ok(Self {
            samples,
            origin,
            seed: None,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Sample at `index`, wrapping around the end of the trace.
    #[inline]
    pub fn sample_at(&self, index: u64) -> f64 {
        let len = self.samples.len() as u64;
        self.samples[(index % len) as usize]
    }
}

/// Loads a recorded trace and normalizes it over its observed range.
pub fn load_recorded(path: &Path, format: TraceFormat) -> Result<SignalSource> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let raw: Vec<f64> = match format {
        TraceFormat::Int8Binary => fs::read(path)
            .map_err(io_err)?
            .into_iter()
            .map(|b| f64::from(b as i8))
            .collect(),
        TraceFormat::FloatText => {
            let text = fs::read_to_string(path).map_err(io_err)?;
            let mut values = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let parse_err = |message: String| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message,
                };
                let v: f64 = line
                    .parse()
                    .map_err(|e| parse_err(format!("{e} (`{line}`)")))?;
                if !v.is_finite() {
                    return Err(parse_err(format!("non-finite value `{line}`")));
                }
                values.push(v);
            }
            values
        }
    };
    if raw.is_empty() {
        return Err(Error::EmptyTrace(path.to_path_buf()));
    }
    SignalSource::from_raw(&raw, Origin::Recorded)
}

/// Generates a synthetic source. The logistic-map starting point is derived
/// from `seed`; use [`logistic_from`] to force a specific one.
pub fn gen_synthetic(kind: SyntheticKind, length: usize, seed: u64) -> Result<SignalSource> {
    if length == 0 {
        return Err(Error::InvalidArgument(
            "signal length must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut src = match kind {
        SyntheticKind::UniformIid => {
            let samples = (0..length).map(|_| rng.random::<f64>() - 0.5).collect();
            SignalSource {
                samples,
                origin: Origin::UniformIid,
                seed: None,
            }
        }
        SyntheticKind::LogisticMap => {
            let x0 = loop {
                let x: f64 = rng.random();
                // 0, 1/4, 1/2, 3/4 and 1 land on fixed points within two iterations.
                if x > 0.0 && ![0.25, 0.5, 0.75].contains(&x) {
                    break x;
                }
            };
            logistic_from(x0, length)?
        }
    };
    src.seed = Some(seed);
    Ok(src)
}

/// Iterates `x <- 4x(1-x)` from `x0` and emits `x - 1/2`.
///
/// The invariant density of this map is arcsine, not uniform, so threshold
/// dynamics differ from the uniform-signal analysis in [`crate::theory`].
pub fn logistic_from(x0: f64, length: usize) -> Result<SignalSource> {
    if length == 0 {
        return Err(Error::InvalidArgument(
            "signal length must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::InvalidArgument(format!(
            "logistic starting point {x0} outside [0, 1]"
        )));
    }
    let mut x = x0;
    let samples = (0..length)
        .map(|_| {
            let out = x - 0.5;
            x = (4.0 * x * (1.0 - x)).clamp(0.0, 1.0);
            out
        })
        .collect();
    Ok(SignalSource {
        samples,
        origin: Origin::LogisticMap,
        seed: None,
    })
}

/// True for starting points that collapse onto a fixed point of the map.
pub fn is_degenerate_logistic_start(x0: f64) -> bool {
    [0.0, 0.25, 0.5, 0.75, 1.0].contains(&x0)
}
