//! Streaming STFT analysis and overlap-add synthesis.
//!
//! [`StftEngine`] turns input hops into spectra and spectra back into
//! finalized output hops. [`Pipeline`] wraps an engine and a
//! [`FrameProcessor`] into a sample-synchronous stream: every call returns as
//! many samples per channel as it was given, delayed by exactly two hops.
//!
//! Timing, for frame `m` (zero based) and hop `R`:
//! - the frame is complete once input sample `(m + 1) * R - 1` arrives;
//! - its analysis buffer covers input times `(m + 1) * R - L ..= (m + 1) * R - 1`;
//! - after overlap-adding it, output times `(m - 1) * R .. m * R` are final,
//!   because the synthesis window only spans the last `2 * R` samples.
//!
//! Those `R` final samples are played during the next input hop, so sample
//! `t` leaves the pipeline at stream position `t + 2 * R`.

use std::collections::VecDeque;
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::process::FrameProcessor;
use crate::window::WindowPair;

/// Static configuration shared by any number of streams.
#[derive(Debug, Clone, PartialEq)]
pub struct StftConfig {
    window_pair: WindowPair,
    fft_size: usize,
    num_channels: usize,
}

impl StftConfig {
    /// Configuration with `fft_size` equal to the window length.
    pub fn new(window_pair: WindowPair, num_channels: usize) -> Result<Self> {
        let fft_size = window_pair.len();
        Self::with_fft_size(window_pair, fft_size, num_channels)
    }

    /// Configuration with frames zero-padded at the tail to `fft_size`.
    pub fn with_fft_size(window_pair: WindowPair, fft_size: usize, num_channels: usize) -> Result<Self> {
        let len = window_pair.len();
        let hop = window_pair.hop();
        if num_channels == 0 {
            return Err(Error::params("num_channels must be > 0"));
        }
        if fft_size < len || fft_size % 2 != 0 {
            return Err(Error::params(format!(
                "fft_size must be even and >= window length {len}, got {fft_size}"
            )));
        }
        if len < 2 * hop {
            return Err(Error::params("window length must be at least two hops"));
        }
        // The two-hop latency contract only holds if w2 vanishes before the last 2R samples.
        if window_pair.synthesis()[..len - 2 * hop].iter().any(|&v| v != 0.0) {
            return Err(Error::params(
                "synthesis window must be zero outside the final 2 * hop samples",
            ));
        }
        Ok(Self {
            window_pair,
            fft_size,
            num_channels,
        })
    }

    pub fn window_pair(&self) -> &WindowPair {
        &self.window_pair
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn hop(&self) -> usize {
        self.window_pair.hop()
    }

    pub fn window_len(&self) -> usize {
        self.window_pair.len()
    }

    pub fn sample_rate(&self) -> u32 {
        self.window_pair.params().sample_rate
    }
}

/// Algorithmic latency of the analysis/synthesis chain: two hops.
pub fn algorithmic_latency(config: &StftConfig) -> usize {
    2 * config.hop()
}

/// Pushes a unit impulse through an identity pipeline built on `config` and
/// returns the offset between the impulse and the first output sample whose
/// magnitude exceeds `1e-9`. The impulse is placed one window length into the
/// stream, clear of the zero-history start.
pub fn measure_impulse_latency(config: Arc<StftConfig>) -> Option<usize> {
    let single = if config.num_channels() == 1 {
        config
    } else {
        Arc::new(StftConfig::with_fft_size(config.window_pair().clone(), config.fft_size(), 1).ok()?)
    };
    let position = single.window_len();
    let mut x = vec![0.0; 3 * single.window_len() + 4 * single.hop()];
    x[position] = 1.0;
    let y = Pipeline::new(single, crate::process::Identity)
        .run(&[x])
        .ok()?
        .remove(0);
    y.iter().position(|v| v.abs() > 1e-9).map(|first| first - position)
}

/// One channel's spectrum for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    /// `fft_size / 2 + 1` bins of an unnormalized forward real DFT.
    pub bins: Vec<Complex<f64>>,
    pub frame_index: u64,
    pub channel: usize,
}

struct ChannelState {
    /// Last `L` input samples; the newest hop is filled in place.
    history: Vec<f64>,
    /// Overlap-add accumulator aligned with the frame; only the final `2R` are ever nonzero.
    accumulator: Vec<f64>,
    next_synthesis_index: u64,
}

/// Per-stream analysis/synthesis state.
///
/// Single owner; create one engine per stream and share the [`StftConfig`].
pub struct StftEngine {
    config: Arc<StftConfig>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    channels: Vec<ChannelState>,
    /// Samples of the current, incomplete hop.
    fill: usize,
    samples_consumed: u64,
    frames_emitted: u64,
    time_scratch: Vec<f64>,
    spectrum_scratch: Vec<Complex<f64>>,
}

impl std::fmt::Debug for StftEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StftEngine")
            .field("config", &self.config)
            .field("fill", &self.fill)
            .field("samples_consumed", &self.samples_consumed)
            .field("frames_emitted", &self.frames_emitted)
            .finish_non_exhaustive()
    }
}

impl StftEngine {
    pub fn new(config: Arc<StftConfig>) -> Self {
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(config.fft_size);
        let inverse = planner.plan_fft_inverse(config.fft_size);
        let len = config.window_len();
        let channels = (0..config.num_channels)
            .map(|_| ChannelState {
                history: vec![0.0; len],
                accumulator: vec![0.0; len],
                next_synthesis_index: 0,
            })
            .collect();
        Self {
            time_scratch: forward.make_input_vec(),
            spectrum_scratch: forward.make_output_vec(),
            forward,
            inverse,
            channels,
            fill: 0,
            samples_consumed: 0,
            frames_emitted: 0,
            config,
        }
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn samples_consumed(&self) -> u64 {
        self.samples_consumed
    }

    /// Frames emitted per channel so far.
    pub fn frames_emitted(&self) -> u64 {
        self.frames_emitted
    }

    /// Samples buffered towards the next frame.
    pub fn pending_samples(&self) -> usize {
        self.fill
    }

    /// Consumes one block (one slice per channel, equal lengths) and returns
    /// the frames completed by it, grouped per channel in frame order.
    pub fn analyze<S: AsRef<[f64]>>(&mut self, block: &[S]) -> Result<Vec<Vec<SpectrumFrame>>> {
        let block_len = check_block(block, self.config.num_channels)?;
        let hop = self.config.hop();
        let len = self.config.window_len();
        let mut frames: Vec<Vec<SpectrumFrame>> = vec![Vec::new(); self.channels.len()];

        let mut pos = 0;
        while pos < block_len {
            let take = (hop - self.fill).min(block_len - pos);
            let dst = len - hop + self.fill;
            for (state, input) in self.channels.iter_mut().zip(block) {
                state.history[dst..dst + take].copy_from_slice(&input.as_ref()[pos..pos + take]);
            }
            self.fill += take;
            pos += take;
            if self.fill == hop {
                for (ch, out) in frames.iter_mut().enumerate() {
                    let frame = self.analyze_channel(ch);
                    out.push(frame);
                    self.channels[ch].history.copy_within(hop.., 0);
                }
                self.fill = 0;
                self.frames_emitted += 1;
            }
        }
        self.samples_consumed += block_len as u64;
        Ok(frames)
    }

    fn analyze_channel(&mut self, ch: usize) -> SpectrumFrame {
        let len = self.config.window_len();
        let w1 = self.config.window_pair.analysis();
        let history = &self.channels[ch].history;
        for ((dst, x), w) in self.time_scratch[..len].iter_mut().zip(history).zip(w1) {
            *dst = x * w;
        }
        self.time_scratch[len..].fill(0.0);
        self.forward
            .process(&mut self.time_scratch, &mut self.spectrum_scratch)
            .expect("forward FFT buffers are sized by the planner");
        SpectrumFrame {
            bins: self.spectrum_scratch.clone(),
            frame_index: self.frames_emitted,
            channel: ch,
        }
    }

    /// Overlap-adds one frame and returns the `hop` output samples it
    /// finalizes for that channel.
    ///
    /// Frames must arrive in `frame_index` order per channel. Imaginary parts
    /// of the DC and Nyquist bins are discarded.
    pub fn synthesize(&mut self, frame: &SpectrumFrame) -> Result<Vec<f64>> {
        let ch = frame.channel;
        if ch >= self.channels.len() {
            return Err(Error::shape(format!(
                "frame channel {ch} out of range for {} channels",
                self.channels.len()
            )));
        }
        if frame.bins.len() != self.config.num_bins() {
            return Err(Error::shape(format!(
                "frame has {} bins, expected {}",
                frame.bins.len(),
                self.config.num_bins()
            )));
        }
        let expected = self.channels[ch].next_synthesis_index;
        if frame.frame_index != expected {
            return Err(Error::Sequencing {
                channel: ch,
                expected,
                got: frame.frame_index,
            });
        }

        self.spectrum_scratch.copy_from_slice(&frame.bins);
        let last = self.spectrum_scratch.len() - 1;
        self.spectrum_scratch[0].im = 0.0;
        self.spectrum_scratch[last].im = 0.0;
        self.inverse
            .process(&mut self.spectrum_scratch, &mut self.time_scratch)
            .expect("inverse FFT buffers are sized by the planner");

        let hop = self.config.hop();
        let len = self.config.window_len();
        let scale = 1.0 / self.config.fft_size as f64;
        let w2 = self.config.window_pair.synthesis();
        let start = len - 2 * hop;
        let state = &mut self.channels[ch];
        for ((acc, t), w) in state.accumulator[start..len]
            .iter_mut()
            .zip(&self.time_scratch[start..len])
            .zip(&w2[start..len])
        {
            *acc += t * scale * w;
        }
        let out = state.accumulator[start..start + hop].to_vec();
        state.accumulator.copy_within(start + hop.., start);
        state.accumulator[len - hop..].fill(0.0);
        state.next_synthesis_index += 1;
        Ok(out)
    }
}

fn check_block<S: AsRef<[f64]>>(block: &[S], channels: usize) -> Result<usize> {
    if block.len() != channels {
        return Err(Error::shape(format!(
            "block has {} channels, expected {channels}",
            block.len()
        )));
    }
    let len = block.first().map_or(0, |c| c.as_ref().len());
    if block.iter().any(|c| c.as_ref().len() != len) {
        return Err(Error::shape("channels in a block must have equal length"));
    }
    Ok(len)
}

/// Sample-synchronous analysis -> processing -> synthesis stream.
///
/// Output lags input by [`algorithmic_latency`] samples. After the last block,
/// [`Pipeline::flush`] returns the remaining `2 * hop` samples.
pub struct Pipeline<P> {
    engine: StftEngine,
    processor: P,
    queues: Vec<VecDeque<f64>>,
    flushed: bool,
}

impl<P: FrameProcessor> Pipeline<P> {
    pub fn new(config: Arc<StftConfig>, processor: P) -> Self {
        let hop = config.hop();
        let queues = (0..config.num_channels)
            .map(|_| {
                // Output during the first hop, before any frame exists.
                let mut q = VecDeque::with_capacity(3 * hop);
                q.extend(std::iter::repeat(0.0).take(hop));
                q
            })
            .collect();
        Self {
            engine: StftEngine::new(config),
            processor,
            queues,
            flushed: false,
        }
    }

    pub fn engine(&self) -> &StftEngine {
        &self.engine
    }

    pub fn processor(&self) -> &P {
        &self.processor
    }

    pub fn latency(&self) -> usize {
        algorithmic_latency(self.engine.config())
    }

    /// Processes one block and returns the same number of samples per channel.
    pub fn process<S: AsRef<[f64]>>(&mut self, block: &[S]) -> Result<Vec<Vec<f64>>> {
        if self.flushed {
            return Err(Error::State("pipeline already flushed".into()));
        }
        self.process_inner(block)
    }

    fn process_inner<S: AsRef<[f64]>>(&mut self, block: &[S]) -> Result<Vec<Vec<f64>>> {
        let frames = self.engine.analyze(block)?;
        let block_len = block.first().map_or(0, |c| c.as_ref().len());
        for (ch, channel_frames) in frames.into_iter().enumerate() {
            for mut frame in channel_frames {
                self.processor.process(&mut frame);
                let out = self.engine.synthesize(&frame)?;
                self.queues[ch].extend(out);
            }
        }
        Ok(self.queues.iter_mut().map(|q| q.drain(..block_len).collect()).collect())
    }

    /// Feeds zeros to push the last input samples through and returns the
    /// final `2 * hop` samples per channel. A stream that never received
    /// input yields empty channels.
    pub fn flush(&mut self) -> Result<Vec<Vec<f64>>> {
        if self.flushed {
            return Err(Error::State("pipeline already flushed".into()));
        }
        self.flushed = true;
        let channels = self.queues.len();
        if self.engine.samples_consumed() == 0 {
            return Ok(vec![Vec::new(); channels]);
        }
        let zeros = vec![vec![0.0; self.latency()]; channels];
        self.process_inner(&zeros)
    }

    /// Runs a whole signal through the pipeline and flushes it. Output length
    /// is the input length plus the latency.
    pub fn run<S: AsRef<[f64]>>(&mut self, input: &[S]) -> Result<Vec<Vec<f64>>> {
        let mut out = self.process(input)?;
        for (dst, tail) in out.iter_mut().zip(self.flush()?) {
            dst.extend(tail);
        }
        Ok(out)
    }
}
