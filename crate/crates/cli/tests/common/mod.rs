#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lowlat_cli::audio::{write_wav_f32, Audio};
use lowlat_cli::report::parse_float;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn lowlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowlat"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Parses a `--format csv` report.
pub fn csv_report(out: &Output) -> BTreeMap<String, String> {
    let text = stdout(out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"), "{text}");
    lines
        .map(|l| {
            let (k, v) = l.split_once(',').expect("key,value row");
            (k.to_string(), v.to_string())
        })
        .collect()
}

pub fn float(report: &BTreeMap<String, String>, key: &str) -> f64 {
    let raw = report.get(key).unwrap_or_else(|| panic!("missing {key} in {report:?}"));
    parse_float(raw).unwrap_or_else(|| panic!("{key}={raw} is not a number"))
}

pub fn int(report: &BTreeMap<String, String>, key: &str) -> i64 {
    report[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key}={} is not an integer", report[key]))
}

/// Uniform noise already quantized to f32 so a float WAV stores it exactly.
pub fn noise(len: usize, seed: u64, amp: f64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len)
        .map(|_| (amp * rng.random_range(-1.0..1.0)) as f32 as f64)
        .collect()
}

pub fn tone(freq: f64, rate: u32, len: usize, amp: f64) -> Vec<f64> {
    (0..len)
        .map(|n| (amp * (2.0 * std::f64::consts::PI * freq * n as f64 / rate as f64).sin()) as f32 as f64)
        .collect()
}

pub fn write(dir: &Path, name: &str, rate: u32, channels: Vec<Vec<f64>>) -> PathBuf {
    let path = dir.join(name);
    write_wav_f32(
        &path,
        &Audio {
            sample_rate: rate,
            channels,
        },
    )
    .unwrap();
    path
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
