use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// One millisecond at 16 kHz; above the largest spherical-head ITD.
pub const DEFAULT_MAX_LAG: usize = 16;

const PHAT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GccResult {
    /// Positive when the second signal lags the first.
    pub lag: i64,
    /// Correlation at lags `-max_lag..=max_lag`.
    pub curve: Vec<f64>,
    /// False when either frame is silent; `lag` is then 0.
    pub defined: bool,
}

/// GCC-PHAT for a fixed frame length, with plans cached.
#[derive(Clone)]
pub struct GccPhat {
    frame_len: usize,
    fft_len: usize,
    max_lag: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl GccPhat {
    pub fn new(frame_len: usize, max_lag: usize) -> Result<Self> {
        if frame_len == 0 || max_lag >= frame_len {
            return Err(Error::InvalidParams(format!("max_lag {max_lag} must be below frame length {frame_len}")));
        }
        let fft_len = (2 * frame_len).next_power_of_two();
        let mut planner = FftPlanner::new();
        Ok(Self {
            frame_len,
            fft_len,
            max_lag,
            fwd: planner.plan_fft_forward(fft_len),
            inv: planner.plan_fft_inverse(fft_len),
        })
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn process(&self, first: &[f64], second: &[f64]) -> Result<GccResult> {
        if first.len() != self.frame_len || second.len() != self.frame_len {
            return Err(Error::ShapeMismatch(format!(
                "gcc frames must both be {} samples (got {} and {})",
                self.frame_len,
                first.len(),
                second.len()
            )));
        }
        let width = 2 * self.max_lag + 1;
        let silent = |x: &[f64]| x.iter().all(|&v| v == 0.0);
        if silent(first) || silent(second) {
            return Ok(GccResult { lag: 0, curve: vec![0.0; width], defined: false });
        }

        let pad = |x: &[f64]| {
            let mut b: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            b.resize(self.fft_len, Complex64::default());
            b
        };
        let mut a = pad(first);
        let mut b = pad(second);
        self.fwd.process(&mut a);
        self.fwd.process(&mut b);
        let mut cross: Vec<Complex64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| {
                let g = x.conj() * y;
                g / (g.norm() + PHAT_EPS)
            })
            .collect();
        self.inv.process(&mut cross);

        let scale = 1.0 / self.fft_len as f64;
        let max_lag = self.max_lag as i64;
        let curve: Vec<f64> = (-max_lag..=max_lag)
            .map(|lag| cross[lag.rem_euclid(self.fft_len as i64) as usize].re * scale)
            .collect();

        // ties go to the smaller |lag|
        let mut best = self.max_lag;
        for (i, &v) in curve.iter().enumerate() {
            let closer = (i as i64 - max_lag).abs() < (best as i64 - max_lag).abs();
            if v > curve[best] || (v == curve[best] && closer) {
                best = i;
            }
        }
        Ok(GccResult { lag: best as i64 - max_lag, curve, defined: true })
    }
}

/// Delay of `right` relative to `left` by phase-transform cross-correlation,
/// searched over `[-max_lag, max_lag]`.
pub fn gcc_phat(left: &[f64], right: &[f64], max_lag: usize) -> Result<GccResult> {
    if left.len() != right.len() {
        return Err(Error::ShapeMismatch("gcc frames differ in length".into()));
    }
    GccPhat::new(left.len(), max_lag)?.process(left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// `x` delayed by `d` samples (zero-filled), truncated to `n`.
    fn delayed(x: &[f64], d: i64, n: usize, offset: usize) -> Vec<f64> {
        (0..n).map(|i| x[(offset as i64 + i as i64 - d) as usize]).collect()
    }

    #[test]
    fn identical_channels_zero_lag() {
        let x = noise(512, 1);
        let r = gcc_phat(&x, &x, 16).unwrap();
        assert_eq!(r.lag, 0);
        assert!(r.defined);
        assert_eq!(r.curve.len(), 33);
    }

    #[test]
    fn delayed_right_channel() {
        let src = noise(1024, 2);
        let left = delayed(&src, 0, 512, 100);
        let right = delayed(&src, 3, 512, 100);
        assert_eq!(gcc_phat(&left, &right, 16).unwrap().lag, 3);
        assert_eq!(gcc_phat(&right, &left, 16).unwrap().lag, -3);
    }

    #[test]
    fn silent_frame_is_undefined() {
        let r = gcc_phat(&[0.0; 64], &noise(64, 3), 8).unwrap();
        assert!(!r.defined);
        assert_eq!(r.lag, 0);
    }

    #[test]
    fn max_lag_must_fit() {
        assert!(gcc_phat(&[1.0; 8], &[1.0; 8], 8).is_err());
        assert!(gcc_phat(&[1.0; 8], &[1.0; 7], 2).is_err());
    }
}
