//! Subcommand implementations. Each returns a [`Report`]; only `main` prints.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use lowlat_core::metrics::multires_mag_loss_detailed;
use lowlat_core::process::{Chain, GainConfig};
use lowlat_core::window::max_envelope_deviation;
use lowlat_core::{
    apply_amplification, chain, cola_envelope, identity_processor, magnitude_gain_processor, make_window_pair,
    measure_delay_snr, measure_impulse_latency, normalize_synthesis, Audiogram, Error as CoreError, FrameProcessor,
    MultiResConfig, Pipeline, StftConfig, WindowPair, WindowParams,
};

use crate::args::{Command, ProcessArgs, ProcessorKind, WindowArgs};
use crate::audio::{quantize_f32, quantize_pcm16_dithered, read_wav, write_wav_f32, write_wav_pcm16, Audio};
use crate::error::{CliError, Result};
use crate::report::{Format, Report};
use crate::resample::Resampler;

/// Seed for PCM16 dither.
pub const DITHER_SEED: u64 = 0x6c6f_776c_6174;

/// Window lengths swept by `measure-latency`.
pub const LATENCY_SWEEP: [usize; 3] = [256, 512, 1024];

pub fn run(command: &Command) -> Result<Report> {
    match command {
        Command::GenWindows {
            window,
            output,
            normalize,
        } => gen_windows(window, output, *normalize),
        Command::VerifyCola {
            window,
            tolerance,
            normalize,
        } => verify_cola(window, *tolerance, *normalize),
        Command::Process(args) => process(args),
        Command::MeasureLatency { window } => measure_latency(window),
        Command::EvalLoss {
            reference,
            estimate,
            resample,
            sample_rate,
            max_delay,
            csv_out,
        } => {
            let report = eval_loss(reference, estimate, *resample, *sample_rate, *max_delay)?;
            if let Some(path) = csv_out {
                let file = File::create(path).map_err(|e| CliError::io(path, e))?;
                report
                    .write(Format::Csv, BufWriter::new(file))
                    .map_err(|e| CliError::io(path, e))?;
            }
            Ok(report)
        }
    }
}

fn window_pair(params: WindowParams, normalize: bool) -> Result<WindowPair> {
    let pair = make_window_pair(params)?;
    Ok(if normalize { normalize_synthesis(&pair)? } else { pair })
}

fn push_timing(report: &mut Report, params: &WindowParams) {
    let latency = params.latency_samples();
    report.push("window_samples", params.len());
    report.push("window_ms", params.samples_to_ms(params.len()));
    report.push("hop_samples", params.hop);
    report.push("hop_ms", params.samples_to_ms(params.hop));
    report.push("latency_samples", latency);
    report.push("latency_ms", params.samples_to_ms(latency));
}

pub fn gen_windows(window: &WindowArgs, output: &Path, normalize: bool) -> Result<Report> {
    let params = window.params()?;
    let pair = window_pair(params, normalize)?;
    let file = File::create(output).map_err(|e| CliError::io(output, e))?;
    pair.write_csv(BufWriter::new(file))
        .map_err(|e| CliError::io(output, e))?;

    let mut report = Report::new();
    push_timing(&mut report, &params);
    report.push("normalized", if normalize { "yes" } else { "no" });
    report.push("rows", pair.len());
    Ok(report)
}

fn push_cola(report: &mut Report, prefix: &str, pair: &WindowPair, tolerance: f64) -> bool {
    let envelope = cola_envelope(pair);
    let (deviation, phase) = max_envelope_deviation(&envelope);
    let minimum = envelope.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = deviation <= tolerance;
    report.push(format!("{prefix}max_deviation"), deviation);
    report.push(format!("{prefix}phase"), phase);
    report.push(format!("{prefix}envelope_min"), minimum);
    report.push(format!("{prefix}status"), if pass { "pass" } else { "fail" });
    pass
}

/// Builds the COLA report and the overall verdict.
pub fn verify_cola_report(window: &WindowArgs, tolerance: f64, normalize: bool) -> Result<(Report, bool)> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(CliError::Params(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    let pair = make_window_pair(window.params()?)?;
    let mut report = Report::new();
    report.push("tolerance", tolerance);
    let mut pass = push_cola(&mut report, "", &pair, tolerance);
    if normalize {
        let normalized = normalize_synthesis(&pair)?;
        pass = push_cola(&mut report, "normalized.", &normalized, tolerance);
    }
    Ok((report, pass))
}

fn verify_cola(window: &WindowArgs, tolerance: f64, normalize: bool) -> Result<Report> {
    let (report, pass) = verify_cola_report(window, tolerance, normalize)?;
    if pass {
        Ok(report)
    } else {
        Err(CliError::Verification(report))
    }
}

pub fn measure_latency(window: &WindowArgs) -> Result<Report> {
    let params = window.params()?;
    let config = Arc::new(StftConfig::new(window_pair(params, true)?, 1)?);
    let measured = measure_impulse_latency(config).ok_or_else(|| CliError::Params("no impulse response".into()))?;

    let mut report = Report::new();
    report.push("latency_samples", measured);
    report.push("latency_ms", params.samples_to_ms(measured));
    report.push("algorithmic_samples", params.latency_samples());
    for len in LATENCY_SWEEP {
        let key = format!("sweep.window_{len}");
        let swept = len
            .checked_sub(params.hop)
            .and_then(|n2| WindowParams::new(params.n1, n2, params.hop, params.sample_rate, params.tail_variant).ok())
            .and_then(|p| window_pair(p, true).ok())
            .and_then(|pair| StftConfig::new(pair, 1).ok())
            .and_then(|c| measure_impulse_latency(Arc::new(c)));
        match swept {
            Some(samples) => report.push(key, samples),
            None => report.push(key, "invalid"),
        }
    }
    Ok(report)
}

/// Reads a WAV file and brings it to `rate`, resampling only when allowed.
pub fn load(path: &Path, rate: u32, resample: bool) -> Result<Audio> {
    let audio = read_wav(path)?;
    if audio.sample_rate == rate {
        return Ok(audio);
    }
    if !resample {
        return Err(CliError::SampleRateMismatch {
            path: path.to_path_buf(),
            found: audio.sample_rate,
            expected: rate,
        });
    }
    let resampler = Resampler::new(audio.sample_rate, rate)?;
    Ok(Audio {
        sample_rate: rate,
        channels: audio.channels.iter().map(|c| resampler.process(c)).collect(),
    })
}

fn gain_config(args: &ProcessArgs) -> Result<Option<GainConfig>> {
    let uses_gain = args.processors.contains(&ProcessorKind::Gain);
    let tuned = args.alpha.is_some() || args.beta.is_some() || args.gain_floor.is_some();
    if tuned && !uses_gain {
        return Err(CliError::Params(
            "--alpha, --beta and --gain-floor require --processor gain".into(),
        ));
    }
    if !uses_gain {
        return Ok(None);
    }
    let defaults = GainConfig::default();
    let config = GainConfig {
        alpha: args.alpha.unwrap_or(defaults.alpha),
        beta: args.beta.unwrap_or(defaults.beta),
        gain_floor: args.gain_floor.unwrap_or(defaults.gain_floor),
    };
    config.validate()?;
    Ok(Some(config))
}

fn build_chain(kinds: &[ProcessorKind], gain: Option<GainConfig>) -> Result<Chain> {
    let stages = kinds
        .iter()
        .map(|kind| -> Result<Box<dyn FrameProcessor + Send>> {
            Ok(match kind {
                ProcessorKind::Identity => Box::new(identity_processor()),
                ProcessorKind::Gain => Box::new(magnitude_gain_processor(gain.expect("validated above"))?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chain(stages)?)
}

fn load_audiograms(path: &Path) -> Result<Vec<Audiogram>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingAudiogram(path.to_path_buf())
        } else {
            CliError::io(path, e)
        }
    })?;
    Ok(Audiogram::parse_ears(&text)?)
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Level change in dB between two signals over `[margin, len - margin)`.
pub fn interior_gain_db(before: &[f64], after: &[f64], margin: usize) -> Option<f64> {
    let len = before.len().min(after.len());
    if len <= 2 * margin {
        return None;
    }
    let (b, a) = (rms(&before[margin..len - margin]), rms(&after[margin..len - margin]));
    (b > 0.0).then(|| 20.0 * (a / b).log10())
}

/// Delay, SNR and loss of `estimate` against `reference`, one channel.
///
/// The reference is zero-padded to the estimate's length for the delay
/// search; the loss compares the reference with the delay-compensated
/// estimate over the reference's length.
pub fn reference_metrics(
    report: &mut Report,
    prefix: &str,
    reference: &[f64],
    estimate: &[f64],
    max_delay: usize,
) -> Result<()> {
    if reference.len() > estimate.len() {
        return Err(CliError::Shape(format!(
            "reference has {} samples but the estimate only {}",
            reference.len(),
            estimate.len()
        )));
    }
    let mut padded = reference.to_vec();
    padded.resize(estimate.len(), 0.0);
    let max_delay = max_delay.min(estimate.len().saturating_sub(1) / 2);
    let delay = match measure_delay_snr(&padded, estimate, max_delay) {
        Ok(r) => {
            report.push(format!("{prefix}delay_samples"), r.delay);
            report.push(format!("{prefix}snr_db"), r.snr_db);
            r.delay
        }
        Err(CoreError::UndefinedSnr) => {
            report.push(format!("{prefix}delay_samples"), "undefined");
            report.push(format!("{prefix}snr_db"), "undefined");
            0
        }
        Err(e) => return Err(e.into()),
    };
    let n = reference.len().min(estimate.len() - delay);
    let loss = multires_mag_loss_detailed(&reference[..n], &estimate[delay..delay + n], &MultiResConfig::default())?;
    for (size, value) in &loss.per_resolution {
        report.push(format!("{prefix}loss.w{size}"), *value);
    }
    report.push(format!("{prefix}loss.total"), loss.total);
    Ok(())
}

pub fn process(args: &ProcessArgs) -> Result<Report> {
    // Everything that can be rejected without touching the filesystem.
    let params = args.window.params()?;
    let gain = gain_config(args)?;
    let stages = build_chain(&args.processors, gain)?;
    let audiograms = args.nalr.as_deref().map(load_audiograms).transpose()?;

    let rate = params.sample_rate;
    let input = load(&args.input, rate, args.resample)?;
    let reference = args
        .reference
        .as_deref()
        .map(|p| load(p, rate, args.resample))
        .transpose()?;
    if let Some(r) = &reference {
        if r.num_channels() != input.num_channels() {
            return Err(CliError::Shape(format!(
                "reference has {} channels, input has {}",
                r.num_channels(),
                input.num_channels()
            )));
        }
    }

    let config = Arc::new(StftConfig::new(
        window_pair(params, !args.no_normalize)?,
        input.num_channels(),
    )?);
    let mut pipeline = Pipeline::new(config.clone(), stages);
    let mut channels = pipeline.run(&input.channels)?;

    let mut report = Report::new();
    report.push("channels", input.num_channels());
    report.push("input_samples", input.len());
    report.push("output_samples", channels.first().map_or(0, Vec::len));
    let latency = measure_impulse_latency(config).ok_or_else(|| CliError::Params("no impulse response".into()))?;
    report.push("latency_samples", latency);
    report.push("latency_ms", params.samples_to_ms(latency));

    if let Some(ears) = audiograms {
        let ears = match ears.len() {
            1 => vec![ears[0]; channels.len()],
            n if n == channels.len() => ears,
            n => {
                return Err(CliError::Shape(format!(
                    "audiogram has {n} ears but the input has {} channels",
                    channels.len()
                )))
            }
        };
        let amplified = apply_amplification(&channels, &ears, args.nfir, rate as f64)?;
        for (c, (before, after)) in channels.iter().zip(&amplified).enumerate() {
            let key = format!("ch{c}.nalr.gain_db");
            match interior_gain_db(before, after, args.nfir) {
                Some(g) => report.push(key, g),
                None => report.push(key, "undefined"),
            }
        }
        channels = amplified;
    }

    let output = Audio {
        sample_rate: rate,
        channels,
    };
    let stored = if args.pcm16 {
        let q = quantize_pcm16_dithered(&output, DITHER_SEED);
        write_wav_pcm16(&args.output, &q)?;
        q
    } else {
        write_wav_f32(&args.output, &output)?;
        quantize_f32(&output)
    };

    if let Some(reference) = reference {
        for (c, (r, e)) in reference.channels.iter().zip(&stored.channels).enumerate() {
            reference_metrics(&mut report, &format!("ch{c}."), r, e, args.max_delay)?;
        }
    }
    Ok(report)
}

pub fn eval_loss(reference: &Path, estimate: &Path, resample: bool, rate: u32, max_delay: usize) -> Result<Report> {
    let r = load(reference, rate, resample)?;
    let e = load(estimate, rate, resample)?;
    if r.num_channels() != e.num_channels() || r.len() != e.len() {
        return Err(CliError::Shape(format!(
            "reference is {}x{} but estimate is {}x{} (channels x samples)",
            r.num_channels(),
            r.len(),
            e.num_channels(),
            e.len()
        )));
    }
    let mut report = Report::new();
    report.push("channels", r.num_channels());
    report.push("samples", r.len());
    for (c, (x, y)) in r.channels.iter().zip(&e.channels).enumerate() {
        let prefix = format!("ch{c}.");
        let loss = multires_mag_loss_detailed(x, y, &MultiResConfig::default())?;
        for (size, value) in &loss.per_resolution {
            report.push(format!("{prefix}loss.w{size}"), *value);
        }
        report.push(format!("{prefix}loss.total"), loss.total);
        let max_delay = max_delay.min(x.len().saturating_sub(1) / 2);
        match measure_delay_snr(x, y, max_delay) {
            Ok(d) => {
                report.push(format!("{prefix}delay_samples"), d.delay);
                report.push(format!("{prefix}snr_db"), d.snr_db);
            }
            Err(CoreError::UndefinedSnr) => {
                report.push(format!("{prefix}delay_samples"), "undefined");
                report.push(format!("{prefix}snr_db"), "undefined");
            }
            Err(err) => return Err(err.into()),
        }
    }
    Ok(report)
}
