use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::map::wrap_angle;
use super::robot::{RobotParams, RobotState};

#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
pub enum ReachError {
    #[error("target is {shortfall:.3} m beyond maximum extension")]
    Beyond { shortfall: f64 },
    #[error("target is {by:.3} m inside minimum extension")]
    TooClose { by: f64 },
    #[error("target height {z:.3} m is outside the lift range")]
    Height { z: f64 },
}

/// Joint and base targets that put the gripper on a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IkSolution {
    pub heading: f64,
    pub extension: f64,
    pub lift: f64,
    pub d_heading: f64,
    pub d_extension: f64,
    pub d_lift: f64,
}

/// Base heading that makes the arm axis pass through `(tx, ty)` with the
/// point on the reaching side, and the resulting distance from the mast.
pub fn arm_axis_heading(
    state: &RobotState,
    params: &RobotParams,
    tx: f64,
    ty: f64,
) -> Option<(f64, f64)> {
    let (dx, dy) = (tx - state.pose.x, ty - state.pose.y);
    let r = dx.hypot(dy);
    let m = params.mast_x;
    if r <= m.abs() {
        return None;
    }
    let heading = wrap_angle(dy.atan2(dx) + (m / r).acos());
    Some((heading, (r * r - m * m).sqrt()))
}

/// Closed-form alignment for the base-rotation, lift and extension chain.
pub fn align_ik(
    state: &RobotState,
    params: &RobotParams,
    target: [f64; 3],
) -> Result<IkSolution, ReachError> {
    let Some((heading, s)) = arm_axis_heading(state, params, target[0], target[1]) else {
        return Err(ReachError::TooClose {
            by: params.arm_base_offset + params.extension.min,
        });
    };
    let extension = s - params.arm_base_offset;
    if extension > params.extension.max {
        return Err(ReachError::Beyond {
            shortfall: extension - params.extension.max,
        });
    }
    if extension < params.extension.min {
        return Err(ReachError::TooClose {
            by: params.extension.min - extension,
        });
    }
    if !params.lift.contains(target[2]) {
        return Err(ReachError::Height { z: target[2] });
    }
    Ok(IkSolution {
        heading,
        extension,
        lift: target[2],
        d_heading: wrap_angle(heading - state.pose.theta),
        d_extension: extension - state.extension,
        d_lift: target[2] - state.lift,
    })
}

/// Distance from a point to the arm axis line in the ground plane.
pub fn distance_to_arm_axis(state: &RobotState, params: &RobotParams, x: f64, y: f64) -> f64 {
    let (bx, _) = state.pose.to_body(x, y);
    (bx - params.mast_x).abs()
}
