//! Command-line definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lowlat_core::nalr::DEFAULT_NFIR;
use lowlat_core::window::TailVariant;
use lowlat_core::{WindowParams, DEFAULT_SAMPLE_RATE};

use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "lowlat", version, about = "Low-latency STFT processing and verification")]
pub struct Cli {
    /// Report format written to stdout.
    #[arg(long, global = true, default_value = "text", value_parser = parse_format)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tail {
    Continuous,
    Verbatim,
}

impl From<Tail> for TailVariant {
    fn from(t: Tail) -> Self {
        match t {
            Tail::Continuous => TailVariant::Continuous,
            Tail::Verbatim => TailVariant::Verbatim,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Length of the analysis window's rising edge.
    #[arg(long, default_value_t = 64)]
    pub n1: usize,
    /// Peak position of the synthesis window.
    #[arg(long, default_value_t = 448)]
    pub n2: usize,
    /// Frame advance in samples.
    #[arg(long, default_value_t = 64)]
    pub hop: usize,
    /// Processing sample rate in Hz.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    pub sample_rate: u32,
    /// Shape of the analysis window's falling edge.
    #[arg(long, value_enum, default_value_t = Tail::Continuous)]
    pub tail: Tail,
}

impl WindowArgs {
    pub fn params(&self) -> lowlat_core::Result<WindowParams> {
        WindowParams::new(self.n1, self.n2, self.hop, self.sample_rate, self.tail.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessorKind {
    Identity,
    Gain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the window pair as CSV (index,w1,w2) and print a summary.
    GenWindows {
        #[command(flatten)]
        window: WindowArgs,
        /// Destination CSV file.
        #[arg(short, long)]
        output: PathBuf,
        /// Export the COLA-normalized synthesis window.
        #[arg(long)]
        normalize: bool,
    },
    /// Check the overlap-add envelope of the window pair.
    VerifyCola {
        #[command(flatten)]
        window: WindowArgs,
        /// Largest accepted |E - 1|.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Also verify after normalizing the synthesis window.
        #[arg(long)]
        normalize: bool,
    },
    /// Run a WAV file through the streaming pipeline.
    Process(ProcessArgs),
    /// Measure latency with an impulse and sweep the window length.
    MeasureLatency {
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Compare two WAV files with the multi-resolution magnitude loss.
    EvalLoss {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        estimate: PathBuf,
        /// Resample inputs to --sample-rate when rates differ.
        #[arg(long)]
        resample: bool,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
        sample_rate: u32,
        /// Largest delay searched by the cross-correlation.
        #[arg(long, default_value_t = 1024)]
        max_delay: usize,
        /// Additionally write the report as CSV to this file.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ProcessArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Use the synthesis window as designed, without COLA normalization.
    #[arg(long)]
    pub no_normalize: bool,
    /// Spectral processor stage; repeat to chain stages in order.
    #[arg(long = "processor", value_enum, default_values_t = [ProcessorKind::Identity])]
    pub processors: Vec<ProcessorKind>,
    /// Noise-floor smoothing factor for the gain processor.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Over-subtraction factor for the gain processor.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Minimum gain for the gain processor.
    #[arg(long)]
    pub gain_floor: Option<f64>,
    /// Audiogram file; enables NAL-R amplification after synthesis.
    #[arg(long)]
    pub nalr: Option<PathBuf>,
    /// FIR order for NAL-R amplification.
    #[arg(long, requires = "nalr", default_value_t = DEFAULT_NFIR)]
    pub nfir: usize,
    /// Resample the input to --sample-rate when rates differ.
    #[arg(long)]
    pub resample: bool,
    /// Clean reference for delay, SNR and loss reporting.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Write 16-bit PCM with dither instead of float32.
    #[arg(long)]
    pub pcm16: bool,
    /// Largest delay searched when a reference is given.
    #[arg(long, default_value_t = 1024)]
    pub max_delay: usize,
}
