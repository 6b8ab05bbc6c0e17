use std::sync::Arc;

use lowlat_core::stft::Pipeline;
use lowlat_core::{
    identity_processor, make_window_pair, measure_delay_snr, normalize_synthesis, StftConfig, StftEngine, TailVariant,
    WindowParams,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn white_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn config_for(params: WindowParams, normalize: bool, channels: usize) -> Arc<StftConfig> {
    let pair = make_window_pair(params).unwrap();
    let pair = if normalize {
        normalize_synthesis(&pair).unwrap()
    } else {
        pair
    };
    Arc::new(StftConfig::new(pair, channels).unwrap())
}

fn default_config() -> Arc<StftConfig> {
    config_for(WindowParams::default(), true, 1)
}

fn run(config: Arc<StftConfig>, x: &[f64]) -> Vec<f64> {
    Pipeline::new(config, identity_processor()).run(&[x]).unwrap().remove(0)
}

/// Relative L2 error of `y` against `x` delayed by `delay`, skipping `mask`
/// samples at each end.
fn relative_error(x: &[f64], y: &[f64], delay: usize, mask: usize) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for t in mask..x.len() - mask {
        let e = y[t + delay] - x[t];
        num += e * e;
        den += x[t] * x[t];
    }
    (num / den).sqrt()
}

#[test]
fn reconstruction_of_ten_seconds_of_noise() {
    let x = white_noise(320_000, 7);
    let y = run(default_config(), &x);
    assert_eq!(y.len() - x.len(), 128);
    assert!(relative_error(&x, &y, 128, 512) < 1e-10);

    let mut padded = x.clone();
    padded.resize(y.len(), 0.0);
    let r = measure_delay_snr(&padded, &y, 1024).unwrap();
    assert_eq!(r.delay, 128);
    assert!(r.snr_db >= 200.0, "{}", r.snr_db);
}

#[test]
fn reconstruction_across_parameterizations() {
    let sweep = [(32, 200, 24), (16, 112, 16), (100, 960, 64), (8, 57, 7), (40, 480, 160)];
    for (n1, n2, hop) in sweep {
        for (tail, normalize) in [
            (TailVariant::Continuous, false),
            (TailVariant::Continuous, true),
            (TailVariant::Verbatim, true),
        ] {
            let p = WindowParams::new(n1, n2, hop, 32_000, tail).unwrap();
            let x = white_noise(20_000, 11);
            let y = run(config_for(p, normalize, 1), &x);
            assert_eq!(y.len(), x.len() + 2 * hop);
            assert!(
                relative_error(&x, &y, 2 * hop, n2 + hop) < 1e-10,
                "{n1},{n2},{hop} {tail:?}"
            );
        }
    }
}

#[test]
fn unnormalized_verbatim_does_not_reconstruct() {
    let p = WindowParams {
        tail_variant: TailVariant::Verbatim,
        ..WindowParams::default()
    };
    let x = white_noise(20_000, 3);
    let y = run(config_for(p, false, 1), &x);
    assert!(relative_error(&x, &y, 128, 512) > 0.05);
}

#[test]
fn impulse_latency_is_two_hops() {
    let sweep = [
        (64, 448, 64),
        (64, 192, 64),
        (64, 960, 64),
        (32, 200, 24),
        (16, 112, 16),
        (8, 57, 7),
        (16, 96, 32),
        (40, 480, 160),
    ];
    for (n1, n2, hop) in sweep {
        let p = WindowParams::new(n1, n2, hop, 32_000, TailVariant::Continuous).unwrap();
        let len = n2 + hop;
        for p_imp in [len, len + 1, len + hop / 2, 3 * len + 5] {
            let mut x = vec![0.0; 4 * len + 16];
            x[p_imp] = 1.0;
            let y = run(config_for(p, true, 1), &x);
            let first = y.iter().position(|v| v.abs() > 1e-9).unwrap();
            assert_eq!(first, p_imp + 2 * hop, "{n1},{n2},{hop} impulse at {p_imp}");
            assert!((y[first] - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn dc_bin_equals_window_sum() {
    let config = default_config();
    let w1_sum: f64 = config.window_pair().analysis().iter().sum();
    // Closed form: rising sin^2 edge sums to (N1 - 1)/2, flat part N2 - N1 + 1,
    // and the continuous tail sum_{t=1}^{R-1} sin(pi t / 2R).
    let r = 64.0;
    let tail: f64 = (1..64)
        .map(|t| (std::f64::consts::PI * t as f64 / (2.0 * r)).sin())
        .sum();
    assert!((w1_sum - (31.5 + 385.0 + tail)).abs() < 1e-9);

    let mut engine = StftEngine::new(config);
    let frames = engine.analyze(&[vec![1.0; 1024]]).unwrap().remove(0);
    let steady = frames.last().unwrap();
    assert!((steady.bins[0].re - w1_sum).abs() < 1e-9);
    assert_eq!(steady.bins[0].im, 0.0);
    assert_eq!(steady.bins[256].im, 0.0);
}

#[test]
fn cosine_peaks_at_its_bin() {
    let config = default_config();
    let k0 = 37usize;
    let x: Vec<f64> = (0..2048)
        .map(|n| (2.0 * std::f64::consts::PI * k0 as f64 * n as f64 / 512.0).cos())
        .collect();
    let mut engine = StftEngine::new(config.clone());
    let frames = engine.analyze(&[x.as_slice()]).unwrap().remove(0);
    let frame = frames.last().unwrap();

    // Brute-force DFT of the same windowed buffer.
    let w1 = config.window_pair().analysis();
    let start = x.len() - 512;
    let naive: Vec<f64> = (0..=256)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for n in 0..512 {
                let v = x[start + n] * w1[n];
                let ang = -2.0 * std::f64::consts::PI * (k * n) as f64 / 512.0;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect();
    let argmax = |v: &[f64]| v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let mags: Vec<f64> = frame.bins.iter().map(|b| b.norm()).collect();
    assert_eq!(argmax(&naive), k0);
    assert_eq!(argmax(&mags), k0);
    for (a, b) in mags.iter().zip(&naive) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn zero_padding_keeps_latency_and_reconstruction() {
    let pair = normalize_synthesis(&make_window_pair(WindowParams::default()).unwrap()).unwrap();
    let config = Arc::new(StftConfig::with_fft_size(pair, 1024, 1).unwrap());
    let x = white_noise(8000, 5);
    let y = run(config, &x);
    assert!(relative_error(&x, &y, 128, 512) < 1e-10);
}

fn run_in_blocks(config: Arc<StftConfig>, x: &[Vec<f64>], block: usize) -> Vec<Vec<f64>> {
    let mut pipe = Pipeline::new(config, identity_processor());
    let mut out = vec![Vec::new(); x.len()];
    let len = x[0].len();
    let mut pos = 0;
    while pos < len {
        let end = (pos + block).min(len);
        let chunk: Vec<&[f64]> = x.iter().map(|c| &c[pos..end]).collect();
        for (o, c) in out.iter_mut().zip(pipe.process(&chunk).unwrap()) {
            o.extend(c);
        }
        pos = end;
    }
    for (o, c) in out.iter_mut().zip(pipe.flush().unwrap()) {
        o.extend(c);
    }
    out
}

#[test]
fn block_size_does_not_change_output() {
    let x = vec![white_noise(64_000, 9)];
    let reference = run_in_blocks(default_config(), &x, 64_000);
    for block in [1, 7, 64, 4096] {
        let out = run_in_blocks(default_config(), &x, block);
        let same = out[0]
            .iter()
            .zip(&reference[0])
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same && out[0].len() == reference[0].len(), "block {block}");
    }
}

#[test]
fn frames_are_identical_across_block_sizes() {
    let x = white_noise(5000, 2);
    let collect = |block: usize| {
        let mut engine = StftEngine::new(default_config());
        let mut frames = Vec::new();
        for chunk in x.chunks(block) {
            frames.extend(engine.analyze(&[chunk]).unwrap().remove(0));
        }
        frames
    };
    let reference = collect(5000);
    for block in [1, 7, 64, 4096] {
        assert_eq!(collect(block), reference);
    }
    assert!(reference.iter().enumerate().all(|(i, f)| f.frame_index == i as u64));
}

#[test]
fn channels_are_independent() {
    let a = white_noise(10_000, 21);
    let b = white_noise(10_000, 22);
    let joint = Pipeline::new(config_for(WindowParams::default(), true, 2), identity_processor())
        .run(&[&a, &b])
        .unwrap();
    let solo_a = run(default_config(), &a);
    let solo_b = run(default_config(), &b);
    assert_eq!(joint[0], solo_a);
    assert_eq!(joint[1], solo_b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analysis_is_linear(seed in any::<u64>(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
        let x = white_noise(1500, seed);
        let y = white_noise(1500, seed ^ 0xdead_beef);
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let frames = |s: &[f64]| StftEngine::new(default_config()).analyze(&[s]).unwrap().remove(0);
        let (fx, fy, fm) = (frames(&x), frames(&y), frames(&mix));
        for ((px, py), pm) in fx.iter().zip(&fy).zip(&fm) {
            for ((bx, by), bm) in px.bins.iter().zip(&py.bins).zip(&pm.bins) {
                prop_assert!((bx * a + by * b - bm).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn output_length_accounting(len in 0usize..3000) {
        let mut pipe = Pipeline::new(default_config(), identity_processor());
        let x = white_noise(len, len as u64);
        let out = pipe.run(&[x]).unwrap();
        let expected = if len == 0 { 0 } else { len + 128 };
        prop_assert_eq!(out[0].len(), expected);
    }
}
