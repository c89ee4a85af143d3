//! Correlation, angular error and spectrogram distance metrics.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Spectrogram};

/// Two equal-length finite series of at least three points.
#[derive(Clone, Copy, Debug)]
pub struct PairedSeries<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
}

impl<'a> PairedSeries<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch(format!("series lengths {} and {}", x.len(), y.len())));
        }
        if x.len() < 3 {
            return Err(Error::InvalidParams("need at least 3 paired points".into()));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite value in series".into()));
        }
        Ok(Self { x, y })
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Product-moment correlation. Zero variance in either series is an error.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let p = PairedSeries::new(x, y)?;
    let (mx, my) = (mean(p.x), mean(p.y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in p.x.iter().zip(p.y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance: correlation undefined".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Rank correlation: Pearson of the average-rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    PairedSeries::new(x, y)?;
    pearson(&ranks(x), &ranks(y))
}

/// Angular distance in degrees, in `[0, 180]`.
pub fn circular_error_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum L1Mode {
    /// Mean of `|Re Δ| + |Im Δ|`.
    Complex,
    /// Mean of `||pred| − |target||`.
    Magnitude,
}

/// Mean L1 distance over every time-frequency bin of every channel.
pub fn l1_spec(pred: &Spectrogram, target: &Spectrogram, mode: L1Mode) -> Result<f64> {
    if pred.n_channels() != target.n_channels()
        || pred.frames() != target.frames()
        || pred.bins() != target.bins()
    {
        return Err(Error::ShapeMismatch(format!(
            "spectrograms {}x{}x{} vs {}x{}x{}",
            pred.frames(),
            pred.bins(),
            pred.n_channels(),
            target.frames(),
            target.bins(),
            target.n_channels()
        )));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (p, t) in pred.channels().iter().zip(target.channels()) {
        for (a, b) in p.iter().zip(t) {
            total += match mode {
                L1Mode::Complex => {
                    let d = a - b;
                    d.re.abs() + d.im.abs()
                }
                L1Mode::Magnitude => (a.norm() - b.norm()).abs(),
            };
        }
        count += p.len();
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

/// Mean absolute difference between magnitude arrays of identical shape.
pub fn l1_magnitudes(pred: &[Vec<f64>], target: &[Vec<f64>]) -> Result<f64> {
    if pred.len() != target.len() || pred.iter().zip(target).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::ShapeMismatch("magnitude arrays differ in shape".into()));
    }
    let count: usize = pred.iter().map(Vec::len).sum();
    let total: f64 = pred
        .iter()
        .zip(target)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .sum();
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
        // cov = 0.5 over var 1 * 1 -> 0.5 (population or sample, same ratio)
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_flagged() {
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::Degenerate(_))));
        assert!(matches!(spearman(&[1.0, 2.0, 3.0], &[5.0; 3]), Err(Error::Degenerate(_))));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_cases() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = x.iter().rev().cloned().collect();
        assert!((spearman(&x, &rev).unwrap() + 1.0).abs() < 1e-12);
        // 1 - 6 * 2 / (4 * 15)
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 3.0]).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn ties_share_average_rank() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn circular_error_cases() {
        assert_eq!(circular_error_deg(350.0, 10.0), 20.0);
        assert_eq!(circular_error_deg(0.0, 180.0), 180.0);
        assert_eq!(circular_error_deg(-170.0, 170.0), 20.0);
    }

    #[test]
    fn magnitude_offset() {
        let a = vec![vec![0.5, 1.0, 2.0]];
        let b: Vec<Vec<f64>> = vec![a[0].iter().map(|v| v + 0.1).collect()];
        assert!((l1_magnitudes(&b, &a).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(l1_magnitudes(&a, &a).unwrap(), 0.0);
        assert!(l1_magnitudes(&a, &[vec![1.0]]).is_err());
    }

    proptest! {
        #[test]
        fn correlations_affine_invariant(
            x in prop::collection::vec(-10.0f64..10.0, 5..40),
            noise in prop::collection::vec(-1.0f64..1.0, 40),
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let y: Vec<f64> = x.iter().zip(&noise).map(|(a, n)| a + n).collect();
            let xs: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
            if let (Ok(r0), Ok(r1)) = (pearson(&x, &y), pearson(&xs, &y)) {
                prop_assert!((r0 - r1).abs() < 1e-9);
            }
            if let (Ok(r0), Ok(r1)) = (spearman(&x, &y), spearman(&xs, &y)) {
                prop_assert!((r0 - r1).abs() < 1e-9);
            }
        }

        #[test]
        fn circular_error_is_a_metric(a in -720.0f64..720.0, b in -720.0f64..720.0, c in -720.0f64..720.0) {
            let ab = circular_error_deg(a, b);
            prop_assert!((0.0..=180.0).contains(&ab));
            prop_assert!((ab - circular_error_deg(b, a)).abs() < 1e-9);
            prop_assert!(ab <= circular_error_deg(a, c) + circular_error_deg(c, b) + 1e-9);
        }

        #[test]
        fn l1_triangle_inequality(
            a in prop::collection::vec(-1.0f64..1.0, 16),
            b in prop::collection::vec(-1.0f64..1.0, 16),
            c in prop::collection::vec(-1.0f64..1.0, 16),
        ) {
            let (a, b, c) = (vec![a], vec![b], vec![c]);
            let ac = l1_magnitudes(&a, &c).unwrap();
            prop_assert!(ac <= l1_magnitudes(&a, &b).unwrap() + l1_magnitudes(&b, &c).unwrap() + 1e-12);
        }
    }
}
