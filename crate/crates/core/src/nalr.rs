//! NAL-R linear prescription and its linear-phase FIR realization.

use std::f64::consts::PI;

use realfft::num_complex::Complex;
use realfft::RealFftPlanner;

use crate::error::{Error, Result};

/// Audiometric frequencies the prescription is defined on, in Hz.
pub const CATALOG_FREQUENCIES: [f64; 6] = [250.0, 500.0, 1000.0, 2000.0, 4000.0, 6000.0];

/// Frequency-dependent offsets `k(f)` in dB.
const K_TABLE: [f64; 6] = [-17.0, -8.0, 1.0, -1.0, -2.0, -2.0];
const THREE_FREQ_FACTOR: f64 = 0.05;
const SLOPE: f64 = 0.31;

pub const MAX_HEARING_LEVEL: f64 = 120.0;
/// At 32 kHz this puts every catalog frequency on the 125 Hz design grid.
pub const DEFAULT_NFIR: usize = 256;
pub const MIN_NFIR: usize = 32;

/// One ear's hearing levels in dB HL at [`CATALOG_FREQUENCIES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Audiogram {
    levels: [f64; 6],
}

impl Audiogram {
    /// Levels are clamped to `[0, 120]` dB HL; non-finite values are rejected.
    pub fn new(levels: [f64; 6]) -> Result<Self> {
        if let Some(bad) = levels.iter().find(|l| !l.is_finite()) {
            return Err(Error::params(format!("hearing level {bad} is not finite")));
        }
        Ok(Self {
            levels: levels.map(|l| l.clamp(0.0, MAX_HEARING_LEVEL)),
        })
    }

    pub fn flat(level: f64) -> Result<Self> {
        Self::new([level; 6])
    }

    pub fn from_slice(levels: &[f64]) -> Result<Self> {
        let levels: [f64; 6] = levels
            .try_into()
            .map_err(|_| Error::params(format!("an audiogram needs exactly 6 levels, got {}", levels.len())))?;
        Self::new(levels)
    }

    pub fn levels(&self) -> &[f64; 6] {
        &self.levels
    }

    pub fn frequencies(&self) -> &'static [f64; 6] {
        &CATALOG_FREQUENCIES
    }

    /// Parses the text format: one line per ear, six whitespace-separated
    /// dB HL values in catalog-frequency order. Blank lines and lines starting
    /// with `#` are ignored.
    pub fn parse_ears(text: &str) -> Result<Vec<Audiogram>> {
        let mut ears = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::params(format!("line {}: `{tok}` is not a number", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            let ear = Audiogram::from_slice(&values).map_err(|e| Error::params(format!("line {}: {e}", lineno + 1)))?;
            ears.push(ear);
        }
        if ears.is_empty() {
            return Err(Error::params("audiogram file contains no ears"));
        }
        Ok(ears)
    }
}

/// Insertion gains in dB at the catalog frequencies, floored at 0 dB.
pub fn nalr_gains(audiogram: &Audiogram) -> [f64; 6] {
    let hl = audiogram.levels;
    let x = THREE_FREQ_FACTOR * (hl[1] + hl[2] + hl[3]);
    let mut gains = [0.0; 6];
    for ((g, level), k) in gains.iter_mut().zip(hl).zip(K_TABLE) {
        *g = (x + SLOPE * level + k).max(0.0);
    }
    gains
}

/// Target gain in dB at `freq`, interpolated linearly in log frequency and
/// held flat outside the catalog range.
pub fn interpolate_gain_db(gains_db: &[f64; 6], freq: f64) -> f64 {
    let f = &CATALOG_FREQUENCIES;
    if freq <= f[0] {
        return gains_db[0];
    }
    if freq >= f[5] {
        return gains_db[5];
    }
    let i = f.iter().rposition(|&c| c <= freq).unwrap_or(0).min(4);
    let t = (freq / f[i]).ln() / (f[i + 1] / f[i]).ln();
    gains_db[i] + t * (gains_db[i + 1] - gains_db[i])
}

/// Frequency-sampling design of a zero-phase filter, shifted to be causal.
///
/// Returns `nfir + 1` taps, exactly symmetric about tap `nfir / 2`. The two
/// end taps share the half-length sample of the inverse DFT, so the response
/// passes exactly through the target on the grid `j * sample_rate / nfir`.
/// Catalog frequencies off that grid are only approximated.
pub fn design_fir(gains_db: &[f64; 6], nfir: usize, sample_rate: f64) -> Result<Vec<f64>> {
    if nfir % 2 != 0 || nfir < MIN_NFIR {
        return Err(Error::params(format!(
            "nfir must be even and >= {MIN_NFIR}, got {nfir}"
        )));
    }
    let nyquist_needed = 2.0 * CATALOG_FREQUENCIES[5];
    if sample_rate.is_nan() || sample_rate < nyquist_needed {
        return Err(Error::params(format!(
            "sample rate {sample_rate} Hz is below {nyquist_needed} Hz"
        )));
    }
    if gains_db.iter().any(|g| !g.is_finite()) {
        return Err(Error::params("gains must be finite"));
    }

    let half = nfir / 2;
    let mut spectrum: Vec<Complex<f64>> = (0..=half)
        .map(|j| {
            let freq = j as f64 * sample_rate / nfir as f64;
            Complex::new(10f64.powf(interpolate_gain_db(gains_db, freq) / 20.0), 0.0)
        })
        .collect();
    let inverse = RealFftPlanner::<f64>::new().plan_fft_inverse(nfir);
    let mut impulse = inverse.make_output_vec();
    inverse
        .process(&mut spectrum, &mut impulse)
        .expect("buffers are sized by the planner");
    let scale = 1.0 / nfir as f64;

    let mut taps = vec![0.0; nfir + 1];
    for d in 0..half {
        let v = impulse[d] * scale;
        taps[half + d] = v;
        taps[half - d] = v;
    }
    let end = 0.5 * impulse[half] * scale;
    taps[0] = end;
    taps[nfir] = end;
    Ok(taps)
}

/// Magnitude response of `taps` at `freq`, in dB.
pub fn response_db(taps: &[f64], freq: f64, sample_rate: f64) -> f64 {
    let omega = 2.0 * PI * freq / sample_rate;
    let h: Complex<f64> = taps
        .iter()
        .enumerate()
        .map(|(n, &t)| Complex::from_polar(t, -omega * n as f64))
        .sum();
    20.0 * h.norm().log10()
}

/// A listener-specific prescription and the filter realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct NalrPrescription {
    pub gains_db: [f64; 6],
    pub fir: Vec<f64>,
    /// Group delay of the filter in samples.
    pub delay: usize,
}

impl NalrPrescription {
    pub fn new(audiogram: &Audiogram, nfir: usize, sample_rate: f64) -> Result<Self> {
        let gains_db = nalr_gains(audiogram);
        let fir = design_fir(&gains_db, nfir, sample_rate)?;
        Ok(Self {
            gains_db,
            fir,
            delay: nfir / 2,
        })
    }

    /// Filters `signal` and removes the group delay; output length equals
    /// input length.
    pub fn apply(&self, signal: &[f64]) -> Vec<f64> {
        let taps = &self.fir;
        let len = signal.len();
        let mut out = vec![0.0; len];
        // out[n] = sum_k taps[k] * signal[n + delay - k]
        for (n, y) in out.iter_mut().enumerate() {
            let centre = n + self.delay;
            let k_lo = (centre + 1).saturating_sub(len);
            let k_hi = centre.min(taps.len() - 1);
            let mut acc = 0.0;
            for k in k_lo..=k_hi {
                acc += taps[k] * signal[centre - k];
            }
            *y = acc;
        }
        out
    }
}

/// Applies each channel's prescription (one audiogram per channel) with delay
/// compensation.
pub fn apply_amplification<S: AsRef<[f64]>>(
    signal: &[S],
    audiograms: &[Audiogram],
    nfir: usize,
    sample_rate: f64,
) -> Result<Vec<Vec<f64>>> {
    if signal.len() != audiograms.len() {
        return Err(Error::shape(format!(
            "{} channels but {} audiograms",
            signal.len(),
            audiograms.len()
        )));
    }
    signal
        .iter()
        .zip(audiograms)
        .map(|(channel, ear)| {
            let channel = channel.as_ref();
            if channel.iter().any(|v| !v.is_finite()) {
                return Err(Error::params("signal contains non-finite samples"));
            }
            Ok(NalrPrescription::new(ear, nfir, sample_rate)?.apply(channel))
        })
        .collect()
}
