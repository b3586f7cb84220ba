//! Assistance laws: alignment blending, room-navigation blending over a
//! costmap planner with a pure-pursuit tracker, and the LiDAR speed governor.

mod align;
mod blend;
mod costmap;
mod governor;
mod room;
mod tracker;

use thiserror::Error;

pub use align::{alignment_command, assist_level, AlignGains, AlignOutput, ASSIST_FLOOR};
pub use blend::{blend_alignment, Axis, ControlVector};
pub use costmap::{plan_global, shortest_path, Costmap, CostmapParams, CostmapPlan};
pub use governor::{govern, governor_scale, GovernorConfig, GovernorOutput};
pub use room::{forward_scale, room_blend, sgn, AssistGains, BaseInput, PlannerVelocity};
pub use tracker::{PurePursuit, TrackOutput, TrackerParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutonomyError {
    #[error("assistive command touches operator-only axis {0:?}")]
    GuardedAxis(Axis),
    #[error("start is inside an inflated obstacle")]
    StartBlocked,
    #[error("no path to goal")]
    NoPath,
    #[error("pose is off the map")]
    OffMap,
}
