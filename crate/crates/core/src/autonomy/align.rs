use serde::{Deserialize, Serialize};

use super::blend::ControlVector;
use crate::sim::{arm_axis_heading, wrap_angle, Pose2, RobotParams, RobotState};

/// Detection confidence below which no assistance is given.
pub const ASSIST_FLOOR: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignGains {
    pub k_heading: f64,
    pub k_lift: f64,
    pub max_rotate: f64,
    pub max_lift: f64,
    /// Detections older than this are ignored.
    pub stale_after_ms: f64,
}

impl Default for AlignGains {
    fn default() -> Self {
        Self {
            k_heading: 1.5,
            k_lift: 2.0,
            max_rotate: 0.3,
            max_lift: 0.1,
            stale_after_ms: 2000.0 / 3.0,
        }
    }
}

/// Confidence to assistance level: zero at the floor, one at full confidence.
pub fn assist_level(confidence: f64) -> f64 {
    ((confidence - ASSIST_FLOOR) / (1.0 - ASSIST_FLOOR)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlignOutput {
    pub u_a: ControlVector,
    pub alpha: f64,
    pub heading_error: f64,
    pub lift_error: f64,
    pub stale: bool,
}

/// Assistive command toward an object centroid given in the current robot
/// frame. Rotates the base so the arm axis passes through the centroid and
/// moves the lift to its height.
pub fn alignment_command(
    state: &RobotState,
    params: &RobotParams,
    centroid: [f64; 3],
    confidence: f64,
    age_ms: f64,
    gains: &AlignGains,
) -> AlignOutput {
    if age_ms > gains.stale_after_ms {
        return AlignOutput {
            stale: true,
            ..Default::default()
        };
    }
    let local = RobotState {
        pose: Pose2::default(),
        ..*state
    };
    let heading_error = arm_axis_heading(&local, params, centroid[0], centroid[1])
        .map_or(0.0, |(h, _)| wrap_angle(h));
    let lift_error = params.lift.clamp(centroid[2]) - state.lift;
    let u_a = ControlVector {
        base_rotate: (gains.k_heading * heading_error).clamp(-gains.max_rotate, gains.max_rotate),
        lift: (gains.k_lift * lift_error).clamp(-gains.max_lift, gains.max_lift),
        ..Default::default()
    };
    AlignOutput {
        u_a,
        alpha: assist_level(confidence),
        heading_error,
        lift_error,
        stale: false,
    }
}
