//! Low-latency STFT analysis/synthesis built around an asymmetric window pair.
//!
//! The analysis window is long (good frequency resolution) while the synthesis
//! window only covers the final two hops of each frame, so the algorithmic
//! latency of the overlap-add chain is `2 * hop` regardless of window length.
//!
//! Modules:
//! - [`window`]: window pair generation, overlap-add envelope, normalization.
//! - [`stft`]: streaming analysis/synthesis engine and the sample-synchronous
//!   [`stft::Pipeline`].
//! - [`process`]: the [`process::FrameProcessor`] seam plus reference processors.
//! - [`nalr`]: NAL-R prescription, linear-phase FIR design and amplification.
//! - [`metrics`]: multi-resolution magnitude loss, delay and SNR measurement.

pub mod error;
pub mod metrics;
pub mod nalr;
pub mod process;
pub mod stft;
pub mod window;

pub use error::{Error, Result};
pub use metrics::{measure_delay_snr, multires_mag_loss, DelaySnr, MultiResConfig};
pub use nalr::{apply_amplification, design_fir, nalr_gains, Audiogram, NalrPrescription};
pub use process::{chain, identity_processor, magnitude_gain_processor, FrameProcessor};
pub use stft::{algorithmic_latency, measure_impulse_latency, Pipeline, SpectrumFrame, StftConfig, StftEngine};
pub use window::{cola_envelope, make_window_pair, normalize_synthesis, TailVariant, WindowPair, WindowParams};

/// Sampling rate the default configuration is tuned for.
pub const DEFAULT_SAMPLE_RATE: u32 = 32_000;
