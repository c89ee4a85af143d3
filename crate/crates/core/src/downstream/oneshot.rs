use serde::{Deserialize, Serialize};

use crate::dsp::CueParams;
use crate::metrics::circular_error_deg;
use crate::model::extract_audio_embedding;
use crate::{AlignmentModel, AudioClip, Error, Result};

/// Azimuth classes at 10° spacing around the horizontal plane.
pub const ONE_SHOT_CLASSES: usize = 36;

pub fn class_azimuth_deg(class: usize) -> f64 {
    class as f64 * 360.0 / ONE_SHOT_CLASSES as f64
}

/// Audio embedding averaged over all frames of the clip.
pub fn pooled_embedding(model: &AlignmentModel, clip: &AudioClip, params: &CueParams) -> Result<Vec<f64>> {
    let frames = extract_audio_embedding(model, clip, params)?;
    let mut out = vec![0.0; model.hidden];
    for f in &frames {
        for (o, v) in out.iter_mut().zip(f) {
            *o += v / frames.len() as f64;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneShotResult {
    pub predictions: Vec<usize>,
    pub errors_deg: Vec<f64>,
    pub mean_circular_error_deg: f64,
}

/// Nearest-neighbour classification against one labelled support embedding
/// per azimuth class. Equal distances resolve to the lower class index.
pub fn one_shot_doa(support: &[(usize, Vec<f64>)], queries: &[(usize, Vec<f64>)]) -> Result<OneShotResult> {
    let mut by_class: Vec<Option<&[f64]>> = vec![None; ONE_SHOT_CLASSES];
    for (c, e) in support {
        let slot = by_class.get_mut(*c).ok_or(Error::MissingClass(*c))?;
        *slot = Some(e);
    }
    let by_class: Vec<&[f64]> = by_class
        .into_iter()
        .enumerate()
        .map(|(c, e)| e.ok_or(Error::MissingClass(c)))
        .collect::<Result<_>>()?;
    if queries.is_empty() {
        return Err(Error::InvalidParams("no queries".into()));
    }
    let mut out = OneShotResult { predictions: Vec::new(), errors_deg: Vec::new(), mean_circular_error_deg: 0.0 };
    for (truth, q) in queries {
        let mut best = (f64::INFINITY, 0);
        for (c, s) in by_class.iter().enumerate() {
            if s.len() != q.len() {
                return Err(Error::ShapeMismatch(format!("embedding sizes {} and {}", s.len(), q.len())));
            }
            let d: f64 = s.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, c);
            }
        }
        let err = circular_error_deg(class_azimuth_deg(best.1), class_azimuth_deg(*truth));
        out.predictions.push(best.1);
        out.errors_deg.push(err);
    }
    out.mean_circular_error_deg = out.errors_deg.iter().sum::<f64>() / out.errors_deg.len() as f64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn support() -> Vec<(usize, Vec<f64>)> {
        (0..ONE_SHOT_CLASSES).map(|c| (c, vec![c as f64, (c * c) as f64 * 0.1])).collect()
    }

    #[test]
    fn memorized_queries_have_zero_error() {
        let s = support();
        let r = one_shot_doa(&s, &s).unwrap();
        assert_eq!(r.mean_circular_error_deg, 0.0);
        assert_eq!(r.predictions, (0..36).collect::<Vec<_>>());
    }

    #[test]
    fn wraparound_error() {
        let s = support();
        let r = one_shot_doa(&s, &[(35, s[0].1.clone())]).unwrap();
        assert_eq!(r.errors_deg, vec![10.0]);
    }

    #[test]
    fn missing_class() {
        let mut s = support();
        s.remove(7);
        assert!(matches!(one_shot_doa(&s, &[(0, vec![0.0, 0.0])]), Err(Error::MissingClass(7))));
    }
}
