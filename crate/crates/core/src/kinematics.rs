//! Joint trajectories and their conversion into synthetic accelerometer series.
//!
//! Motion files carry 22 SMPL joints per frame. A sensor placement selects one
//! joint, and the joint's position series is finite-differenced into triaxial
//! acceleration.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of joints in the SMPL body skeleton emitted by text-to-motion models.
pub const SMPL_JOINTS: usize = 22;

/// Frame rate assumed when a motion file does not declare one.
pub const DEFAULT_FRAME_RATE_HZ: f64 = 46.0;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("need at least {needed} frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },
    #[error("frame rate must be positive and finite, got {0}")]
    InvalidFrameRate(f64),
    #[error("frame interval must be positive and finite, got {0}")]
    InvalidInterval(f64),
    #[error("expected {expected} position values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite position at frame {frame}")]
    NonFinite { frame: usize },
    #[error("unknown sensor placement `{0}`")]
    UnknownPlacement(String),
}

/// Class label carried by series and windows. ADL is the negative class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Adl,
    Fall,
}

impl Label {
    pub fn as_target(self) -> u8 {
        match self {
            Label::Adl => 0,
            Label::Fall => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Adl => "adl",
            Label::Fall => "fall",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Synthetic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Real => "real",
            Provenance::Synthetic => "synthetic",
        })
    }
}

/// Body location a wearable sensor is emulated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorPlacement {
    LeftWrist,
    RightWrist,
    WaistPelvis,
    LeftFoot,
    RightHip,
}

impl SensorPlacement {
    pub const ALL: [SensorPlacement; 5] = [
        SensorPlacement::LeftWrist,
        SensorPlacement::RightWrist,
        SensorPlacement::WaistPelvis,
        SensorPlacement::LeftFoot,
        SensorPlacement::RightHip,
    ];

    /// SMPL joint index for this placement.
    pub fn joint_index(self) -> usize {
        match self {
            SensorPlacement::LeftWrist => 20,
            SensorPlacement::RightWrist => 21,
            SensorPlacement::WaistPelvis => 0,
            SensorPlacement::LeftFoot => 10,
            SensorPlacement::RightHip => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SensorPlacement::LeftWrist => "left_wrist",
            SensorPlacement::RightWrist => "right_wrist",
            SensorPlacement::WaistPelvis => "waist_pelvis",
            SensorPlacement::LeftFoot => "left_foot",
            SensorPlacement::RightHip => "right_hip",
        }
    }
}

/// Free-function form of [`SensorPlacement::joint_index`].
pub fn joint_index_for(placement: SensorPlacement) -> usize {
    placement.joint_index()
}

impl fmt::Display for SensorPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorPlacement {
    type Err = KinematicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "left_wrist" => Ok(SensorPlacement::LeftWrist),
            "right_wrist" => Ok(SensorPlacement::RightWrist),
            "waist" | "pelvis" | "waist_pelvis" => Ok(SensorPlacement::WaistPelvis),
            "left_foot" => Ok(SensorPlacement::LeftFoot),
            "right_hip" => Ok(SensorPlacement::RightHip),
            _ => Err(KinematicsError::UnknownPlacement(s.to_string())),
        }
    }
}

/// F frames of 22 joints with xyz positions in meters, stored frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    positions: Vec<[f64; 3]>,
    frame_rate: f64,
}

impl JointTrajectory {
    /// `positions` is laid out as `frame * 22 + joint`.
    pub fn new(positions: Vec<[f64; 3]>, frame_rate: f64) -> Result<Self, KinematicsError> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(KinematicsError::InvalidFrameRate(frame_rate));
        }
        if !positions.len().is_multiple_of(SMPL_JOINTS) {
            let frames = positions.len() / SMPL_JOINTS + 1;
            return Err(KinematicsError::ShapeMismatch {
                expected: frames * SMPL_JOINTS * 3,
                got: positions.len() * 3,
            });
        }
        let frames = positions.len() / SMPL_JOINTS;
        if frames < 2 {
            return Err(KinematicsError::InsufficientFrames { needed: 2, got: frames });
        }
        if let Some(i) = positions.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(KinematicsError::NonFinite { frame: i / SMPL_JOINTS });
        }
        Ok(Self { positions, frame_rate })
    }

    /// Builds a trajectory from a flat `F × 22 × 3` C-order buffer.
    pub fn from_flat(values: &[f64], frame_rate: f64) -> Result<Self, KinematicsError> {
        if !values.len().is_multiple_of(SMPL_JOINTS * 3) {
            return Err(KinematicsError::ShapeMismatch {
                expected: (values.len() / (SMPL_JOINTS * 3) + 1) * SMPL_JOINTS * 3,
                got: values.len(),
            });
        }
        let positions = values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(positions, frame_rate)
    }

    pub fn frames(&self) -> usize {
        self.positions.len() / SMPL_JOINTS
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn position(&self, frame: usize, joint: usize) -> [f64; 3] {
        self.positions[frame * SMPL_JOINTS + joint]
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    /// Overrides the declared frame rate.
    pub fn with_frame_rate(mut self, frame_rate: f64) -> Result<Self, KinematicsError> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(KinematicsError::InvalidFrameRate(frame_rate));
        }
        self.frame_rate = frame_rate;
        Ok(self)
    }
}

/// Positions of one joint over time.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSeries {
    samples: Vec<[f64; 3]>,
    dt: f64,
}

impl PositionSeries {
    pub fn new(samples: Vec<[f64; 3]>, dt: f64) -> Result<Self, KinematicsError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(KinematicsError::InvalidInterval(dt));
        }
        if let Some(frame) = samples.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(KinematicsError::NonFinite { frame });
        }
        Ok(Self { samples, dt })
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Identity and labelling shared by every sample of a series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub label: Label,
    pub provenance: Provenance,
    pub subject_id: Option<Arc<str>>,
    /// Dataset or generator name, e.g. `"umafall"` or `"t2m"`.
    pub source: Arc<str>,
}

impl SeriesMeta {
    pub fn new(label: Label, provenance: Provenance) -> Self {
        Self { label, provenance, subject_id: None, source: Arc::from("") }
    }

    pub fn with_subject(mut self, subject: impl AsRef<str>) -> Self {
        self.subject_id = Some(Arc::from(subject.as_ref()));
        self
    }

    pub fn with_source(mut self, source: impl AsRef<str>) -> Self {
        self.source = Arc::from(source.as_ref());
        self
    }
}

/// Triaxial acceleration in m/s² at a fixed sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelSeries {
    pub samples: Vec<[f64; 3]>,
    pub sampling_rate: f64,
    pub meta: SeriesMeta,
}

impl AccelSeries {
    pub fn new(samples: Vec<[f64; 3]>, sampling_rate: f64, meta: SeriesMeta) -> Result<Self, KinematicsError> {
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(KinematicsError::InvalidFrameRate(sampling_rate));
        }
        if let Some(frame) = samples.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(KinematicsError::NonFinite { frame });
        }
        Ok(Self { samples, sampling_rate, meta })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn label(&self) -> Label {
        self.meta.label
    }

    pub fn provenance(&self) -> Provenance {
        self.meta.provenance
    }
}

/// Finite-difference scheme used to turn positions into acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Differencing {
    /// `(p(f+1) - p(f)) / dt²`, F-1 output samples.
    #[default]
    ForwardOverDtSquared,
    /// `(p(f+1) - 2p(f) + p(f-1)) / dt²`, F-2 output samples.
    CentralSecondDifference,
}

pub fn extract_joint(traj: &JointTrajectory, placement: SensorPlacement) -> PositionSeries {
    let joint = placement.joint_index();
    let samples = (0..traj.frames()).map(|f| traj.position(f, joint)).collect();
    PositionSeries { samples, dt: 1.0 / traj.frame_rate() }
}

/// Acceleration from the forward difference `(p(f+1) - p(f)) / dt²`.
///
/// The output is labelled as a synthetic fall; callers relabel through
/// [`differentiate_with`] when they know better.
pub fn differentiate_to_accel(pos: &PositionSeries) -> Result<AccelSeries, KinematicsError> {
    differentiate_with(pos, Differencing::ForwardOverDtSquared, SeriesMeta::new(Label::Fall, Provenance::Synthetic))
}

pub fn differentiate_with(
    pos: &PositionSeries,
    scheme: Differencing,
    meta: SeriesMeta,
) -> Result<AccelSeries, KinematicsError> {
    let p = &pos.samples;
    let inv_dt2 = 1.0 / (pos.dt * pos.dt);
    let samples: Vec<[f64; 3]> = match scheme {
        Differencing::ForwardOverDtSquared => {
            if p.len() < 2 {
                return Err(KinematicsError::InsufficientFrames { needed: 2, got: p.len() });
            }
            p.windows(2)
                .map(|w| std::array::from_fn(|axis| (w[1][axis] - w[0][axis]) * inv_dt2))
                .collect()
        }
        Differencing::CentralSecondDifference => {
            if p.len() < 3 {
                return Err(KinematicsError::InsufficientFrames { needed: 3, got: p.len() });
            }
            p.windows(3)
                .map(|w| std::array::from_fn(|axis| (w[2][axis] - 2.0 * w[1][axis] + w[0][axis]) * inv_dt2))
                .collect()
        }
    };
    AccelSeries::new(samples, 1.0 / pos.dt, meta)
}
