//! Evaluation metrics: multi-resolution magnitude loss and delay/SNR.

use std::f64::consts::PI;

use realfft::num_complex::Complex;
use realfft::RealFftPlanner;

use crate::error::{Error, Result};

/// Resolutions of the multi-resolution magnitude loss.
///
/// Each resolution uses a periodic Hann window of the given size, an FFT of
/// the same size and a hop of `size / hop_divisor`. Only frames that fit
/// entirely inside the signal are used (no padding).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiResConfig {
    pub window_sizes: Vec<usize>,
    pub hop_divisor: usize,
}

impl Default for MultiResConfig {
    fn default() -> Self {
        Self {
            window_sizes: vec![128, 256, 512, 1024, 2048],
            hop_divisor: 4,
        }
    }
}

impl MultiResConfig {
    pub fn single(window_size: usize) -> Self {
        Self {
            window_sizes: vec![window_size],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hop_divisor == 0 {
            return Err(Error::params("hop_divisor must be > 0"));
        }
        if self.window_sizes.is_empty() {
            return Err(Error::params("at least one window size is required"));
        }
        for &w in &self.window_sizes {
            if w % 2 != 0 || w < 2 * self.hop_divisor {
                return Err(Error::params(format!(
                    "window size {w} must be even and >= 2 * hop_divisor"
                )));
            }
        }
        Ok(())
    }

    pub fn max_window(&self) -> usize {
        self.window_sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Periodic Hann window of length `size`.
pub fn periodic_hann(size: usize) -> Vec<f64> {
    (0..size)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / size as f64).cos())
        .collect()
}

/// Per-resolution and aggregate loss values.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiResLoss {
    /// `(window_size, loss)` in configuration order.
    pub per_resolution: Vec<(usize, f64)>,
    /// Mean of the per-resolution values.
    pub total: f64,
}

/// Mean over resolutions of the mean squared magnitude-spectrogram difference.
pub fn multires_mag_loss(reference: &[f64], estimate: &[f64], config: &MultiResConfig) -> Result<f64> {
    Ok(multires_mag_loss_detailed(reference, estimate, config)?.total)
}

pub fn multires_mag_loss_detailed(
    reference: &[f64],
    estimate: &[f64],
    config: &MultiResConfig,
) -> Result<MultiResLoss> {
    config.validate()?;
    if reference.len() != estimate.len() {
        return Err(Error::shape(format!(
            "signals differ in length: {} vs {}",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.len() < config.max_window() {
        return Err(Error::shape(format!(
            "signal length {} is shorter than the largest window {}",
            reference.len(),
            config.max_window()
        )));
    }

    let mut planner = RealFftPlanner::<f64>::new();
    let mut per_resolution = Vec::with_capacity(config.window_sizes.len());
    for &size in &config.window_sizes {
        let hop = size / config.hop_divisor;
        let window = periodic_hann(size);
        let fft = planner.plan_fft_forward(size);
        let mut buf = fft.make_input_vec();
        let mut spec_ref = fft.make_output_vec();
        let mut spec_est = fft.make_output_vec();

        let mut sum = 0.0;
        let mut count = 0usize;
        let mut start = 0;
        while start + size <= reference.len() {
            for (spec, signal) in [(&mut spec_ref, reference), (&mut spec_est, estimate)] {
                for ((b, x), w) in buf.iter_mut().zip(&signal[start..start + size]).zip(&window) {
                    *b = x * w;
                }
                fft.process(&mut buf, spec).expect("buffers are sized by the planner");
            }
            for (a, b) in spec_ref.iter().zip(&spec_est) {
                let d = a.norm() - b.norm();
                sum += d * d;
            }
            count += spec_ref.len();
            start += hop;
        }
        per_resolution.push((size, sum / count as f64));
    }
    let total = per_resolution.iter().map(|(_, l)| l).sum::<f64>() / per_resolution.len() as f64;
    Ok(MultiResLoss { per_resolution, total })
}

/// Result of [`measure_delay_snr`]. `snr_db` is `f64::INFINITY` when the
/// aligned residual is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySnr {
    pub delay: usize,
    pub snr_db: f64,
}

/// Finds the lag `d` in `0..=max_delay` maximizing `sum_t reference[t] * estimate[t + d]`
/// and reports the SNR of `estimate[d..]` against `reference[..len - d]`.
pub fn measure_delay_snr(reference: &[f64], estimate: &[f64], max_delay: usize) -> Result<DelaySnr> {
    let len = reference.len();
    if estimate.len() != len {
        return Err(Error::shape(format!(
            "signals differ in length: {len} vs {}",
            estimate.len()
        )));
    }
    if 2 * max_delay >= len {
        return Err(Error::shape(format!(
            "max_delay {max_delay} must be below half the signal length {len}"
        )));
    }
    if reference.iter().chain(estimate).any(|v| !v.is_finite()) {
        return Err(Error::params("signals must be finite"));
    }
    if reference.iter().all(|&v| v == 0.0) {
        return Err(Error::UndefinedSnr);
    }

    let delay = best_lag(reference, estimate, max_delay);
    let aligned_ref = &reference[..len - delay];
    let aligned_est = &estimate[delay..];
    let signal: f64 = aligned_ref.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    let residual: f64 = aligned_ref
        .iter()
        .zip(aligned_est)
        .map(|(r, e)| (r - e) * (r - e))
        .sum();
    let snr_db = if residual == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal / residual).log10()
    };
    Ok(DelaySnr { delay, snr_db })
}

/// Cross-correlation peak over non-negative lags, computed via FFT.
fn best_lag(reference: &[f64], estimate: &[f64], max_delay: usize) -> usize {
    let size = (reference.len() + max_delay + 1).next_power_of_two();
    let mut planner = RealFftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let spectrum = |signal: &[f64]| {
        let mut buf = forward.make_input_vec();
        buf[..signal.len()].copy_from_slice(signal);
        let mut spec = forward.make_output_vec();
        forward.process(&mut buf, &mut spec).expect("sized by planner");
        spec
    };
    let a = spectrum(reference);
    let b = spectrum(estimate);
    let mut cross: Vec<Complex<f64>> = a.iter().zip(&b).map(|(x, y)| x.conj() * y).collect();
    let last = cross.len() - 1;
    cross[0].im = 0.0;
    cross[last].im = 0.0;
    let mut corr = inverse.make_output_vec();
    inverse.process(&mut cross, &mut corr).expect("sized by planner");

    corr[..=max_delay]
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |best, (d, &c)| if c > best.1 { (d, c) } else { best },
        )
        .0
}
