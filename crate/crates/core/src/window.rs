//! Asymmetric analysis/synthesis window pair.
//!
//! The analysis window `w1` rises over `n1` samples, stays flat up to `n2` and
//! decays over the final hop. The synthesis window `w2` is zero everywhere
//! except the last `2 * hop` samples of the frame, which is what bounds the
//! overlap-add latency to two hops.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};

/// Smallest overlap-add envelope value [`normalize_synthesis`] will divide by.
pub const ENVELOPE_FLOOR: f64 = 1e-6;

/// Shape of the analysis window's decaying tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TailVariant {
    /// `sin(pi * (n2 + hop - n) / (4 * hop))`. Discontinuous at `n2` and not
    /// COLA without normalization.
    Verbatim,
    /// `sin(pi * (n2 + hop - n) / (2 * hop))`. Continuous at `n2`; the product
    /// `w1 * w2` overlap-adds to exactly one.
    #[default]
    Continuous,
}

impl TailVariant {
    fn denominator(self) -> f64 {
        match self {
            TailVariant::Verbatim => 4.0,
            TailVariant::Continuous => 2.0,
        }
    }
}

impl std::str::FromStr for TailVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "verbatim" => Ok(TailVariant::Verbatim),
            "continuous" => Ok(TailVariant::Continuous),
            other => Err(Error::params(format!(
                "unknown tail variant `{other}` (expected `verbatim` or `continuous`)"
            ))),
        }
    }
}

impl std::fmt::Display for TailVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailVariant::Verbatim => f.write_str("verbatim"),
            TailVariant::Continuous => f.write_str("continuous"),
        }
    }
}

/// Parameters of one window pair. All lengths are in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowParams {
    /// Length of the analysis window's rising edge.
    pub n1: usize,
    /// Index where the synthesis window peaks; the flat part of `w1` ends here.
    pub n2: usize,
    pub hop: usize,
    pub sample_rate: u32,
    pub tail_variant: TailVariant,
}

impl Default for WindowParams {
    /// 16 ms window, 2 ms hop at 32 kHz.
    fn default() -> Self {
        Self {
            n1: 64,
            n2: 448,
            hop: 64,
            sample_rate: crate::DEFAULT_SAMPLE_RATE,
            tail_variant: TailVariant::Continuous,
        }
    }
}

impl WindowParams {
    pub fn new(n1: usize, n2: usize, hop: usize, sample_rate: u32, tail_variant: TailVariant) -> Result<Self> {
        let params = Self {
            n1,
            n2,
            hop,
            sample_rate,
            tail_variant,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 {
            return Err(Error::params("hop must be > 0"));
        }
        if self.n1 == 0 {
            return Err(Error::params("n1 must be > 0 (0 < n1 < n2 - hop)"));
        }
        if self.n2 <= self.hop || self.n1 >= self.n2 - self.hop {
            return Err(Error::params(format!(
                "n1 < n2 - hop violated: n1={}, n2={}, hop={}",
                self.n1, self.n2, self.hop
            )));
        }
        if self.len() % 2 != 0 {
            return Err(Error::params(format!(
                "window length n2 + hop = {} must be even",
                self.len()
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::params("sample rate must be > 0"));
        }
        Ok(())
    }

    /// Window length `n2 + hop`.
    pub fn len(&self) -> usize {
        self.n2 + self.hop
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Latency of the overlap-add chain in samples.
    pub fn latency_samples(&self) -> usize {
        2 * self.hop
    }

    pub fn samples_to_ms(&self, samples: usize) -> f64 {
        samples as f64 * 1000.0 / self.sample_rate as f64
    }
}

/// Analysis window `w1` at index `n`.
fn analysis_value(p: &WindowParams, n: usize) -> f64 {
    let (n1, n2, hop) = (p.n1 as f64, p.n2 as f64, p.hop as f64);
    let x = n as f64;
    if n < p.n1 {
        (x * PI / (2.0 * n1)).sin().powi(2)
    } else if n <= p.n2 {
        1.0
    } else {
        (PI * (n2 + hop - x) / (p.tail_variant.denominator() * hop)).sin()
    }
}

/// Synthesis window `w2` at index `n`.
fn synthesis_value(p: &WindowParams, n: usize) -> f64 {
    let (n2, hop) = (p.n2 as f64, p.hop as f64);
    let x = n as f64;
    if n < p.n2 - p.hop {
        0.0
    } else if n <= p.n2 {
        (PI * (x - n2) / (2.0 * hop)).cos().powi(2)
    } else {
        (PI * (n2 + hop - x) / (2.0 * hop)).sin()
    }
}

/// An analysis/synthesis window pair of length `n2 + hop`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPair {
    w1: Vec<f64>,
    w2: Vec<f64>,
    params: WindowParams,
    normalized: bool,
}

impl WindowPair {
    /// Builds a pair from explicit tables. Both tables must have length
    /// `params.len()` and contain finite values.
    pub fn from_parts(w1: Vec<f64>, w2: Vec<f64>, params: WindowParams, normalized: bool) -> Result<Self> {
        if params.hop == 0 {
            return Err(Error::params("hop must be > 0"));
        }
        let len = params.len();
        if w1.len() != len || w2.len() != len {
            return Err(Error::shape(format!(
                "window tables have lengths {} and {}, expected {len}",
                w1.len(),
                w2.len()
            )));
        }
        if w1.iter().chain(&w2).any(|v| !v.is_finite()) {
            return Err(Error::params("window tables must be finite"));
        }
        Ok(Self {
            w1,
            w2,
            params,
            normalized,
        })
    }

    pub fn analysis(&self) -> &[f64] {
        &self.w1
    }

    pub fn synthesis(&self) -> &[f64] {
        &self.w2
    }

    pub fn params(&self) -> &WindowParams {
        &self.params
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.w1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w1.is_empty()
    }

    pub fn hop(&self) -> usize {
        self.params.hop
    }

    /// Writes the tables as CSV, one `index,w1,w2` line per sample, no header.
    /// Values use the shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (n, (a, s)) in self.w1.iter().zip(&self.w2).enumerate() {
            writeln!(out, "{n},{a},{s}")?;
        }
        Ok(())
    }
}

/// Evaluates the window pair on `0..n2 + hop`.
pub fn make_window_pair(params: WindowParams) -> Result<WindowPair> {
    params.validate()?;
    let len = params.len();
    let w1 = (0..len).map(|n| analysis_value(&params, n)).collect();
    let w2 = (0..len).map(|n| synthesis_value(&params, n)).collect();
    Ok(WindowPair {
        w1,
        w2,
        params,
        normalized: false,
    })
}

/// Steady-state overlap-add envelope of `w1 * w2` at hop `R`.
///
/// Entry `s` is the gain applied to every output sample whose position within
/// a frame is congruent to `s` modulo the hop.
pub fn cola_envelope(pair: &WindowPair) -> Vec<f64> {
    let hop = pair.hop();
    let mut env = vec![0.0; hop];
    for (n, (a, s)) in pair.w1.iter().zip(&pair.w2).enumerate() {
        env[n % hop] += a * s;
    }
    env
}

/// Divides the synthesis window by the overlap-add envelope so the pair
/// reconstructs with unit gain at every phase.
pub fn normalize_synthesis(pair: &WindowPair) -> Result<WindowPair> {
    let env = cola_envelope(pair);
    if let Some((phase, &value)) = env
        .iter()
        .enumerate()
        .find(|(_, v)| v.is_nan() || v.abs() < ENVELOPE_FLOOR)
    {
        return Err(Error::DegenerateWindow { phase, value });
    }
    let hop = pair.hop();
    let w2 = pair.w2.iter().enumerate().map(|(n, s)| s / env[n % hop]).collect();
    Ok(WindowPair {
        w1: pair.w1.clone(),
        w2,
        params: pair.params,
        normalized: true,
    })
}

/// Largest `|E[s] - 1|` and the phase where it occurs.
pub fn max_envelope_deviation(envelope: &[f64]) -> (f64, usize) {
    envelope
        .iter()
        .enumerate()
        .map(|(s, e)| ((e - 1.0).abs(), s))
        .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
}
