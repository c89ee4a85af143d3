use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Layout, Result};

/// Grid rate of stored trajectories, matching the frame rate of the visual
/// stream the trajectory stands in for.
pub const TRAJECTORY_RATE_HZ: f64 = 6.0;

/// Wraps an angle into `[-π, π)`.
pub fn wrap_pi(angle: f64) -> f64 {
    let a = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU
    if a >= PI {
        a - TAU
    } else {
        a
    }
}

/// Admissible azimuth interval for a layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AzimuthRange {
    /// Frontal half-plane `[-π/2, π/2]` (stereo scenes).
    Frontal,
    /// Full circle `[-π, π)` (ambisonic scenes).
    Full,
}

impl AzimuthRange {
    pub fn for_layout(layout: Layout) -> Self {
        match layout {
            Layout::Foa => AzimuthRange::Full,
            _ => AzimuthRange::Frontal,
        }
    }

    pub fn bounds(self) -> (f64, f64) {
        match self {
            AzimuthRange::Frontal => (-FRAC_PI_2, FRAC_PI_2),
            AzimuthRange::Full => (-PI, PI),
        }
    }

    pub fn contains(self, az: f64) -> bool {
        match self {
            AzimuthRange::Frontal => (-FRAC_PI_2..=FRAC_PI_2).contains(&az),
            AzimuthRange::Full => (-PI..PI).contains(&az),
        }
    }
}

/// Time-stamped source direction. Azimuth is counterclockwise from the front
/// in ambisonic scenes; in stereo scenes positive azimuth is the listener's
/// right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceTrajectory {
    pub times_s: Vec<f64>,
    pub azimuth_rad: Vec<f64>,
    pub elevation_rad: Vec<f64>,
}

impl SourceTrajectory {
    pub fn new(times_s: Vec<f64>, azimuth_rad: Vec<f64>, elevation_rad: Vec<f64>) -> Result<Self> {
        let t = Self { times_s, azimuth_rad, elevation_rad };
        t.validate()?;
        Ok(t)
    }

    /// Constant azimuth on the 6 Hz grid covering `[0, duration_s]`.
    pub fn constant(azimuth_rad: f64, duration_s: f64) -> Self {
        let times_s = trajectory_grid(duration_s);
        let n = times_s.len();
        Self { times_s, azimuth_rad: vec![azimuth_rad; n], elevation_rad: vec![0.0; n] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times_s.len();
        if n == 0 {
            return Err(Error::InvalidTrajectory("empty trajectory".into()));
        }
        if self.azimuth_rad.len() != n || self.elevation_rad.len() != n {
            return Err(Error::InvalidTrajectory("array lengths differ".into()));
        }
        if self.times_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTrajectory("times are not strictly ascending".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.times_s) || !finite(&self.azimuth_rad) || !finite(&self.elevation_rad) {
            return Err(Error::InvalidTrajectory("non-finite value".into()));
        }
        Ok(())
    }

    pub fn check_range(&self, range: AzimuthRange) -> Result<()> {
        match self.azimuth_rad.iter().find(|&&a| !range.contains(a)) {
            Some(a) => Err(Error::InvalidTrajectory(format!("azimuth {a} outside {range:?} range"))),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }

    pub fn end_s(&self) -> f64 {
        *self.times_s.last().unwrap_or(&0.0)
    }

    /// Fails unless the track covers every sample instant of a clip.
    pub fn check_covers(&self, n_samples: usize, sample_rate_hz: u32) -> Result<()> {
        let clip_end_s = n_samples.saturating_sub(1) as f64 / sample_rate_hz as f64;
        let start_ok = self.times_s.first().is_some_and(|&t0| t0 <= 1e-9);
        if !start_ok || self.end_s() + 1e-9 < clip_end_s {
            return Err(Error::Coverage { traj_end_s: self.end_s(), clip_end_s });
        }
        Ok(())
    }

    /// Azimuth at time `t`, interpolated along the shorter arc between grid
    /// points and held constant outside the grid.
    pub fn azimuth_at(&self, t: f64) -> f64 {
        self.interp(t, &self.azimuth_rad, true)
    }

    pub fn elevation_at(&self, t: f64) -> f64 {
        self.interp(t, &self.elevation_rad, false)
    }

    fn interp(&self, t: f64, values: &[f64], circular: bool) -> f64 {
        let times = &self.times_s;
        let last = times.len() - 1;
        if t <= times[0] {
            return values[0];
        }
        if t >= times[last] {
            return values[last];
        }
        let hi = times.partition_point(|&x| x <= t);
        let lo = hi - 1;
        let frac = (t - times[lo]) / (times[hi] - times[lo]);
        let (a, b) = (values[lo], values[hi]);
        if circular {
            let delta = wrap_pi(b - a);
            let out = a + frac * delta;
            if (-PI..PI).contains(&out) {
                out
            } else {
                wrap_pi(out)
            }
        } else {
            a + frac * (b - a)
        }
    }

    /// Azimuth at every sample instant `n / sample_rate_hz`, `n < n_samples`.
    /// Equivalent to calling [`Self::azimuth_at`] per sample.
    pub fn azimuth_track(&self, n_samples: usize, sample_rate_hz: u32) -> Vec<f64> {
        if self.azimuth_rad.iter().all(|&a| a == self.azimuth_rad[0]) {
            return vec![self.azimuth_rad[0]; n_samples];
        }
        (0..n_samples).map(|n| self.azimuth_at(n as f64 / sample_rate_hz as f64)).collect()
    }

    pub fn has_elevation(&self) -> bool {
        self.elevation_rad.iter().any(|&e| e != 0.0)
    }

    /// Azimuth sampled at each of `times`.
    pub fn resample(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.azimuth_at(t)).collect()
    }
}

/// 6 Hz time grid `0, 1/6, ...` reaching at least `duration_s`.
pub fn trajectory_grid(duration_s: f64) -> Vec<f64> {
    let steps = (duration_s * TRAJECTORY_RATE_HZ - 1e-9).ceil().max(0.0) as usize;
    (0..=steps).map(|i| i as f64 / TRAJECTORY_RATE_HZ).collect()
}

pub fn load_trajectory(path: &Path) -> Result<SourceTrajectory> {
    let text = std::fs::read_to_string(path)?;
    let traj: SourceTrajectory = serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    traj.validate()?;
    Ok(traj)
}

pub fn save_trajectory(traj: &SourceTrajectory, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string(traj)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_three_seconds_with_nineteen_points() {
        let g = trajectory_grid(3.0);
        assert_eq!(g.len(), 19);
        assert_eq!(g[18], 3.0);
    }

    #[test]
    fn interpolation_takes_short_arc_across_pi() {
        let t = SourceTrajectory::new(vec![0.0, 1.0], vec![3.0, -3.0], vec![0.0, 0.0]).unwrap();
        let mid = t.azimuth_at(0.5);
        assert!((mid.abs() - PI).abs() < 1e-12, "{mid}");
    }

    #[test]
    fn rejects_non_ascending_times() {
        assert!(SourceTrajectory::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn wrap_pi_is_half_open() {
        assert_eq!(wrap_pi(PI), -PI);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_pi(0.25), 0.25);
    }

    #[test]
    fn coverage_check() {
        let t = SourceTrajectory::constant(0.0, 1.0);
        assert!(t.check_covers(16_000, 16_000).is_ok());
        assert!(t.check_covers(32_000, 16_000).is_err());
    }
}
