//! Rational polyphase resampling with a Kaiser-windowed sinc kernel.

use crate::error::{CliError, Result};

/// Taps contributed by each polyphase branch.
pub const TAPS_PER_PHASE: usize = 64;
pub const KAISER_BETA: f64 = 8.6;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

#[derive(Debug, Clone)]
pub struct Resampler {
    up: usize,
    down: usize,
    /// Prototype filter at the upsampled rate, symmetric about `half`.
    kernel: Vec<f64>,
    half: usize,
}

impl Resampler {
    pub fn new(from_rate: u32, to_rate: u32) -> Result<Self> {
        if from_rate == 0 || to_rate == 0 {
            return Err(CliError::Params("sample rates must be positive".into()));
        }
        let g = gcd(from_rate as u64, to_rate as u64);
        let up = (to_rate as u64 / g) as usize;
        let down = (from_rate as u64 / g) as usize;
        let half = TAPS_PER_PHASE / 2 * up;
        // Cutoff in cycles per upsampled sample, below the narrower Nyquist.
        let cutoff = 0.5 / up.max(down) as f64;
        let i0_beta = bessel_i0(KAISER_BETA);
        let kernel = (0..=2 * half)
            .map(|k| {
                let t = k as f64 - half as f64;
                let r = t / half as f64;
                let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
                up as f64 * 2.0 * cutoff * sinc(2.0 * cutoff * t) * w
            })
            .collect();
        Ok(Self { up, down, kernel, half })
    }

    pub fn ratio(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len * self.up).div_ceil(self.down)
    }

    /// Resamples one channel. The kernel is centred, so there is no net delay.
    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        if self.up == 1 && self.down == 1 {
            return input.to_vec();
        }
        let (up, down, half) = (self.up as i64, self.down as i64, self.half as i64);
        let n_in = input.len() as i64;
        (0..self.output_len(input.len()) as i64)
            .map(|m| {
                let centre = m * down;
                // Input indices n with |centre - n * up| <= half.
                let lo = ((centre - half).max(0) + up - 1) / up;
                let hi = ((centre + half) / up).min(n_in - 1);
                (lo..=hi)
                    .map(|n| input[n as usize] * self.kernel[(centre - n * up + half) as usize])
                    .sum()
            })
            .collect()
    }
}
