//! Frame processors: the stage between analysis and synthesis.
//!
//! A processor sees each channel's frames in order and rewrites the bins in
//! place. It must be causal (frame `k` may only depend on frames `0..=k` of
//! its channel), keep the bin count and channel id, and be deterministic.

use crate::error::{Error, Result};
use crate::stft::SpectrumFrame;

pub trait FrameProcessor {
    fn process(&mut self, frame: &mut SpectrumFrame);
}

impl<P: FrameProcessor + ?Sized> FrameProcessor for Box<P> {
    fn process(&mut self, frame: &mut SpectrumFrame) {
        (**self).process(frame)
    }
}

impl<P: FrameProcessor + ?Sized> FrameProcessor for &mut P {
    fn process(&mut self, frame: &mut SpectrumFrame) {
        (**self).process(frame)
    }
}

/// Passes frames through untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl FrameProcessor for Identity {
    fn process(&mut self, _frame: &mut SpectrumFrame) {}
}

pub fn identity_processor() -> Identity {
    Identity
}

/// Parameters of [`MagnitudeGain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainConfig {
    /// Noise-floor smoothing constant in `(0, 1)`.
    pub alpha: f64,
    /// Over-subtraction factor, `> 0`.
    pub beta: f64,
    /// Gain floor in `(0, 1]`.
    pub gain_floor: f64,
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.98,
            beta: 1.0,
            gain_floor: 0.1,
        }
    }
}

impl GainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::params(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::params(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.gain_floor > 0.0 && self.gain_floor <= 1.0) {
            return Err(Error::params(format!(
                "gain floor must be in (0, 1], got {}",
                self.gain_floor
            )));
        }
        Ok(())
    }
}

const MAGNITUDE_EPS: f64 = 1e-12;

/// Per-bin spectral subtraction with a recursive minimum noise-floor tracker.
///
/// The floor follows `N = min(alpha * N_prev + (1 - alpha) * |X|, |X|)` and
/// starts at the first frame's magnitude. Each bin is scaled by
/// `max(gain_floor, 1 - beta * N / |X|)`; phase is untouched.
#[derive(Debug, Clone)]
pub struct MagnitudeGain {
    config: GainConfig,
    /// Noise floor per channel, allocated on the channel's first frame.
    floors: Vec<Option<Vec<f64>>>,
    last_gains: Vec<Vec<f64>>,
}

impl MagnitudeGain {
    pub fn config(&self) -> &GainConfig {
        &self.config
    }

    pub fn noise_floor(&self, channel: usize) -> Option<&[f64]> {
        self.floors.get(channel)?.as_deref()
    }

    /// Gains applied to the most recent frame of `channel`.
    pub fn last_gains(&self, channel: usize) -> Option<&[f64]> {
        self.last_gains
            .get(channel)
            .map(Vec::as_slice)
            .filter(|g| !g.is_empty())
    }
}

pub fn magnitude_gain_processor(config: GainConfig) -> Result<MagnitudeGain> {
    config.validate()?;
    Ok(MagnitudeGain {
        config,
        floors: Vec::new(),
        last_gains: Vec::new(),
    })
}

impl FrameProcessor for MagnitudeGain {
    fn process(&mut self, frame: &mut SpectrumFrame) {
        let ch = frame.channel;
        if self.floors.len() <= ch {
            self.floors.resize(ch + 1, None);
            self.last_gains.resize(ch + 1, Vec::new());
        }
        let GainConfig {
            alpha,
            beta,
            gain_floor,
        } = self.config;
        let floor = self.floors[ch].get_or_insert_with(|| frame.bins.iter().map(|b| b.norm()).collect());
        let gains = &mut self.last_gains[ch];
        gains.resize(frame.bins.len(), 1.0);
        for ((bin, n), g) in frame.bins.iter_mut().zip(floor.iter_mut()).zip(gains.iter_mut()) {
            let mag = bin.norm();
            *n = (alpha * *n + (1.0 - alpha) * mag).min(mag);
            *g = (1.0 - beta * *n / mag.max(MAGNITUDE_EPS)).max(gain_floor);
            *bin *= *g;
        }
    }
}

/// Runs several processors in sequence on every frame.
pub struct Chain {
    stages: Vec<Box<dyn FrameProcessor + Send>>,
}

impl std::fmt::Debug for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Chain").field("stages", &self.stages.len()).finish()
    }
}

impl Chain {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

pub fn chain(stages: Vec<Box<dyn FrameProcessor + Send>>) -> Result<Chain> {
    if stages.is_empty() {
        return Err(Error::params("processor chain must not be empty"));
    }
    Ok(Chain { stages })
}

impl FrameProcessor for Chain {
    fn process(&mut self, frame: &mut SpectrumFrame) {
        for stage in &mut self.stages {
            stage.process(frame);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use realfft::num_complex::Complex;

    fn frame(channel: usize, seed: u64) -> SpectrumFrame {
        let bins = (0..9)
            .map(|k| {
                let x = ((k as u64 + 1) * 2_654_435_761 + seed * 97) % 1000;
                Complex::new(x as f64 / 100.0 - 5.0, (x % 37) as f64 / 10.0 - 1.8)
            })
            .collect();
        SpectrumFrame {
            bins,
            frame_index: seed,
            channel,
        }
    }

    #[test]
    fn identity_leaves_frames_alone() {
        let mut id = identity_processor();
        for ch in 0..2 {
            let original = frame(ch, 3);
            let mut f = original.clone();
            id.process(&mut f);
            assert_eq!(f, original);
        }
    }

    #[test]
    fn config_validation() {
        let ok = GainConfig::default();
        assert!(magnitude_gain_processor(ok).is_ok());
        for bad in [
            GainConfig { alpha: 0.0, ..ok },
            GainConfig { alpha: 1.0, ..ok },
            GainConfig { beta: 0.0, ..ok },
            GainConfig { gain_floor: 0.0, ..ok },
            GainConfig { gain_floor: 1.5, ..ok },
            GainConfig { alpha: f64::NAN, ..ok },
        ] {
            assert!(matches!(magnitude_gain_processor(bad), Err(Error::InvalidParams(_))));
        }
    }

    #[test]
    fn unit_floor_is_identity() {
        let mut g = magnitude_gain_processor(GainConfig {
            gain_floor: 1.0,
            ..GainConfig::default()
        })
        .unwrap();
        for k in 0..20 {
            let original = frame(0, k);
            let mut f = original.clone();
            g.process(&mut f);
            assert_eq!(f, original);
        }
    }

    #[test]
    fn first_frame_is_floored() {
        let mut g = magnitude_gain_processor(GainConfig::default()).unwrap();
        let mut f = frame(0, 1);
        g.process(&mut f);
        assert!(g.last_gains(0).unwrap().iter().all(|&x| x == 0.1));
    }

    #[test]
    fn empty_chain_rejected() {
        assert!(matches!(chain(Vec::new()), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn chain_applies_in_order() {
        let a = GainConfig::default();
        let b = GainConfig {
            alpha: 0.5,
            beta: 0.7,
            gain_floor: 0.3,
        };
        let mut chained = chain(vec![
            Box::new(magnitude_gain_processor(a).unwrap()),
            Box::new(magnitude_gain_processor(b).unwrap()),
        ])
        .unwrap();
        let mut g1 = magnitude_gain_processor(a).unwrap();
        let mut g2 = magnitude_gain_processor(b).unwrap();
        for k in 0..30 {
            let mut via_chain = frame(0, k);
            let mut manual = via_chain.clone();
            chained.process(&mut via_chain);
            g1.process(&mut manual);
            g2.process(&mut manual);
            assert_eq!(via_chain, manual);
        }
    }
}
