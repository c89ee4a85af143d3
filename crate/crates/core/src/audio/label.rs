use serde::{Deserialize, Serialize};

/// How an example's audio was misaligned with its trajectory, if at all.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "MisalignmentRepr", into = "MisalignmentRepr")]
pub enum Misalignment {
    None,
    ChannelFlip,
    Rotation { theta_rad: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MisalignmentRepr {
    Unit(UnitKind),
    Rotation { rotation_rad: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum UnitKind {
    None,
    Flip,
}

impl From<MisalignmentRepr> for Misalignment {
    fn from(r: MisalignmentRepr) -> Self {
        match r {
            MisalignmentRepr::Unit(UnitKind::None) => Misalignment::None,
            MisalignmentRepr::Unit(UnitKind::Flip) => Misalignment::ChannelFlip,
            MisalignmentRepr::Rotation { rotation_rad } => Misalignment::Rotation { theta_rad: rotation_rad },
        }
    }
}

impl From<Misalignment> for MisalignmentRepr {
    fn from(m: Misalignment) -> Self {
        match m {
            Misalignment::None => MisalignmentRepr::Unit(UnitKind::None),
            Misalignment::ChannelFlip => MisalignmentRepr::Unit(UnitKind::Flip),
            Misalignment::Rotation { theta_rad } => MisalignmentRepr::Rotation { rotation_rad: theta_rad },
        }
    }
}

/// Target of the pretext classifier: `aligned` is y = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentLabel {
    pub aligned: bool,
    pub misalignment: Misalignment,
}

impl AlignmentLabel {
    pub const ALIGNED: Self = Self { aligned: true, misalignment: Misalignment::None };
    pub const FLIPPED: Self = Self { aligned: false, misalignment: Misalignment::ChannelFlip };

    pub fn rotated(theta_rad: f64) -> Self {
        Self { aligned: false, misalignment: Misalignment::Rotation { theta_rad } }
    }

    /// Label after `n` audio-only channel flips of an aligned pair.
    pub fn from_flip_count(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Self::ALIGNED
        } else {
            Self::FLIPPED
        }
    }

    /// One more audio-only flip.
    pub fn flipped(self) -> Self {
        if self.aligned {
            Self::FLIPPED
        } else {
            Self::ALIGNED
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.aligned == (self.misalignment == Misalignment::None)
    }

    /// 1.0 for aligned, 0.0 otherwise.
    pub fn target(&self) -> f64 {
        if self.aligned {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shapes() {
        let s = serde_json::to_string(&AlignmentLabel::ALIGNED).unwrap();
        assert_eq!(s, r#"{"aligned":true,"misalignment":"none"}"#);
        let s = serde_json::to_string(&AlignmentLabel::FLIPPED).unwrap();
        assert_eq!(s, r#"{"aligned":false,"misalignment":"flip"}"#);
        let s = serde_json::to_string(&AlignmentLabel::rotated(3.0)).unwrap();
        assert_eq!(s, r#"{"aligned":false,"misalignment":{"rotation_rad":3.0}}"#);
        let back: AlignmentLabel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, AlignmentLabel::rotated(3.0));
    }

    #[test]
    fn flip_parity() {
        for n in 0..6 {
            assert_eq!(AlignmentLabel::from_flip_count(n).aligned, n % 2 == 0);
        }
        assert_eq!(AlignmentLabel::ALIGNED.flipped().flipped(), AlignmentLabel::ALIGNED);
    }
}
