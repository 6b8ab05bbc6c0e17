use std::f64::consts::PI;

use lowlat_core::metrics::multires_mag_loss_detailed;
use lowlat_core::{measure_delay_snr, multires_mag_loss, MultiResConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Explicit frame loop with a naive DFT. Twiddles come from a table indexed by
/// `(k * n) mod size`, evaluated directly with cos/sin.
fn brute_force_loss(reference: &[f64], estimate: &[f64], size: usize, hop: usize) -> f64 {
    let window: Vec<f64> = (0..size)
        .map(|n| {
            let s = (PI * n as f64 / size as f64).sin();
            s * s
        })
        .collect();
    let twiddles: Vec<(f64, f64)> = (0..size)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / size as f64;
            (a.cos(), -a.sin())
        })
        .collect();
    let magnitudes = |frame: &[f64]| -> Vec<f64> {
        (0..=size / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for n in 0..size {
                    let (c, s) = twiddles[(k * n) % size];
                    let v = frame[n] * window[n];
                    re += v * c;
                    im += v * s;
                }
                re.hypot(im)
            })
            .collect()
    };
    let mut total = 0.0;
    let mut count = 0usize;
    let mut frames = 0usize;
    while frames * hop + size <= reference.len() {
        let start = frames * hop;
        let a = magnitudes(&reference[start..start + size]);
        let b = magnitudes(&estimate[start..start + size]);
        for (x, y) in a.iter().zip(&b) {
            total += (x - y) * (x - y);
            count += 1;
        }
        frames += 1;
    }
    total / count as f64
}

#[test]
fn matches_brute_force_at_every_resolution() {
    let config = MultiResConfig::default();
    for fixture in 0..4u64 {
        let a = noise(8192, 100 + fixture);
        let b: Vec<f64> = noise(8192, 200 + fixture)
            .iter()
            .zip(&a)
            .map(|(n, x)| 0.7 * x + 0.3 * n)
            .collect();
        let detailed = multires_mag_loss_detailed(&a, &b, &config).unwrap();
        let mut oracle_total = 0.0;
        for &(size, loss) in &detailed.per_resolution {
            let oracle = brute_force_loss(&a, &b, size, size / 4);
            assert!(
                ((loss - oracle) / oracle).abs() < 1e-9,
                "size {size}: {loss} vs {oracle}"
            );
            let single = multires_mag_loss(&a, &b, &MultiResConfig::single(size)).unwrap();
            assert_eq!(single, loss);
            oracle_total += oracle;
        }
        let oracle_total = oracle_total / 5.0;
        assert!(((detailed.total - oracle_total) / oracle_total).abs() < 1e-9);
    }
}

#[test]
fn symmetric_and_homogeneous() {
    let config = MultiResConfig::default();
    let x = noise(8192, 1);
    let y = noise(8192, 2);
    assert_eq!(
        multires_mag_loss(&x, &y, &config).unwrap(),
        multires_mag_loss(&y, &x, &config).unwrap()
    );
    let zeros = vec![0.0; 8192];
    let base = multires_mag_loss(&x, &zeros, &config).unwrap();
    for a in [0.5, 2.0, 3.7, -1.3] {
        let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
        let loss = multires_mag_loss(&scaled, &zeros, &config).unwrap();
        assert!(((loss - a * a * base) / (a * a * base)).abs() < 1e-9);
    }
}

#[test]
fn magnitude_only_differences_are_invisible() {
    // A sign flip leaves every magnitude spectrum unchanged.
    let config = MultiResConfig::default();
    let x = noise(8192, 3);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert_eq!(multires_mag_loss(&x, &neg, &config).unwrap(), 0.0);

    // A periodic signal shifted by whole periods has the same frame spectra.
    let period = 64;
    let cycle = noise(period, 4);
    let p: Vec<f64> = (0..8192).map(|n| cycle[n % period]).collect();
    let q: Vec<f64> = (0..8192).map(|n| cycle[(n + 3 * period) % period]).collect();
    assert_eq!(multires_mag_loss(&p, &q, &config).unwrap(), 0.0);

    let other = noise(8192, 9);
    assert!(multires_mag_loss(&p, &other, &config).unwrap() > 1.0);
}

/// Direct cross-correlation search, independent of the FFT path.
fn direct_delay(reference: &[f64], estimate: &[f64], max_delay: usize) -> usize {
    (0..=max_delay)
        .map(|d| {
            let c: f64 = reference[..reference.len() - d]
                .iter()
                .zip(&estimate[d..])
                .map(|(a, b)| a * b)
                .sum();
            (d, c)
        })
        .fold(
            (0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
        .0
}

#[test]
fn delay_agrees_with_direct_search() {
    for (seed, shift) in [(1u64, 0usize), (2, 17), (3, 128), (4, 299)] {
        let x = noise(5000, seed);
        let mut y = vec![0.0; 5000];
        y[shift..].copy_from_slice(&x[..5000 - shift]);
        for (v, n) in y.iter_mut().zip(noise(5000, seed + 50)) {
            *v += 0.2 * n;
        }
        let r = measure_delay_snr(&x, &y, 300).unwrap();
        assert_eq!(r.delay, shift);
        assert_eq!(r.delay, direct_delay(&x, &y, 300));
    }
}

#[test]
fn snr_of_constructed_fixture() {
    let x = noise(32_000, 10);
    let n = noise(32_000, 11);
    let (ex, en) = (
        x.iter().map(|v| v * v).sum::<f64>(),
        n.iter().map(|v| v * v).sum::<f64>(),
    );
    let scale = (ex / en * 1e-4).sqrt();
    let y: Vec<f64> = x.iter().zip(&n).map(|(a, b)| a + scale * b).collect();
    let r = measure_delay_snr(&x, &y, 1000).unwrap();
    assert_eq!(r.delay, 0);
    assert!((r.snr_db - 40.0).abs() < 0.1, "{}", r.snr_db);
}
