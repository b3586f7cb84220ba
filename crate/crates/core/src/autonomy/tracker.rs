use serde::{Deserialize, Serialize};

use super::costmap::CostmapPlan;
use super::room::PlannerVelocity;
use super::AutonomyError;
use crate::sim::{wrap_angle, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerParams {
    pub lookahead: f64,
    pub k_heading: f64,
    pub goal_tolerance: f64,
    /// Turn in place to the goal heading once in the goal region.
    pub final_heading: bool,
    pub heading_tolerance: f64,
    pub v_max: f64,
    pub w_max: f64,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            lookahead: 0.35,
            k_heading: 1.5,
            goal_tolerance: 0.1,
            final_heading: true,
            heading_tolerance: 0.05,
            v_max: 0.3,
            w_max: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrackOutput {
    pub velocity: PlannerVelocity,
    pub heading_error: f64,
    pub reached: bool,
}

/// Pure-pursuit follower for one plan. Progress along the path is
/// monotone so the tracker does not skip back across loops.
#[derive(Debug, Clone)]
pub struct PurePursuit {
    plan: CostmapPlan,
    params: TrackerParams,
    progress: usize,
}

const SEARCH_WINDOW: usize = 60;

impl PurePursuit {
    pub fn new(plan: CostmapPlan, params: TrackerParams) -> Self {
        Self {
            plan,
            params,
            progress: 0,
        }
    }

    pub fn plan(&self) -> &CostmapPlan {
        &self.plan
    }

    pub fn progress(&self) -> usize {
        self.progress
    }

    fn steer(&self, err: f64) -> f64 {
        (self.params.k_heading * err).clamp(-self.params.w_max, self.params.w_max)
    }

    pub fn track(&mut self, pose: &Pose2) -> Result<TrackOutput, AutonomyError> {
        let [x0, y0, x1, y1] = self.plan.extent;
        if !(pose.x >= x0 && pose.x < x1 && pose.y >= y0 && pose.y < y1) {
            return Err(AutonomyError::OffMap);
        }
        let pts = &self.plan.waypoints;
        let last = pts.len() - 1;
        let goal = pts[last];
        if pose.distance_to(goal.0, goal.1) <= self.params.goal_tolerance {
            self.progress = last;
            let err = wrap_angle(self.plan.goal.theta - pose.theta);
            if !self.params.final_heading || err.abs() <= self.params.heading_tolerance {
                return Ok(TrackOutput {
                    reached: true,
                    ..Default::default()
                });
            }
            return Ok(TrackOutput {
                velocity: PlannerVelocity {
                    v_nav: 0.0,
                    w_nav: self.steer(err),
                },
                heading_error: err,
                reached: false,
            });
        }
        let end = (self.progress + SEARCH_WINDOW).min(last);
        let nearest = (self.progress..=end)
            .min_by(|&a, &b| {
                let da = pose.distance_to(pts[a].0, pts[a].1);
                let db = pose.distance_to(pts[b].0, pts[b].1);
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .unwrap_or(self.progress);
        self.progress = nearest;
        let target = (nearest..=last)
            .find(|&i| pose.distance_to(pts[i].0, pts[i].1) >= self.params.lookahead)
            .map_or(goal, |i| pts[i]);
        let err = wrap_angle((target.1 - pose.y).atan2(target.0 - pose.x) - pose.theta);
        Ok(TrackOutput {
            velocity: PlannerVelocity {
                v_nav: self.params.v_max * err.cos().max(0.0),
                w_nav: self.steer(err),
            },
            heading_error: err,
            reached: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line_plan() -> CostmapPlan {
        let waypoints: Vec<(f64, f64)> = (0..=40).map(|i| (i as f64 * 0.05, 0.0)).collect();
        CostmapPlan {
            cells: (0..=40).map(|c| (0, c)).collect(),
            waypoints,
            cost: 2.0,
            goal: Pose2::new(2.0, 0.0, 0.0),
            extent: [-5.0, -5.0, 5.0, 5.0],
        }
    }

    #[test]
    fn aligned_on_path_full_speed() {
        let mut t = PurePursuit::new(line_plan(), TrackerParams::default());
        let out = t.track(&Pose2::new(0.5, 0.0, 0.0)).unwrap();
        assert!(out.velocity.w_nav.abs() < 1e-12);
        assert!((out.velocity.v_nav - 0.3).abs() < 1e-12);
    }

    #[test]
    fn target_behind_turns_in_place() {
        let mut t = PurePursuit::new(line_plan(), TrackerParams::default());
        let out = t.track(&Pose2::new(0.5, 0.0, PI)).unwrap();
        assert_eq!(out.velocity.v_nav, 0.0);
        assert_eq!(out.velocity.w_nav.abs(), 0.6);
    }

    #[test]
    fn goal_region() {
        let mut t = PurePursuit::new(line_plan(), TrackerParams::default());
        let out = t.track(&Pose2::new(1.95, 0.02, 0.01)).unwrap();
        assert!(out.reached);
        assert_eq!(out.velocity, PlannerVelocity::default());
        let turning = t.track(&Pose2::new(1.95, 0.02, 1.0)).unwrap();
        assert!(!turning.reached && turning.velocity.v_nav == 0.0 && turning.velocity.w_nav < 0.0);
    }

    #[test]
    fn off_map_is_an_error() {
        let mut t = PurePursuit::new(line_plan(), TrackerParams::default());
        assert_eq!(
            t.track(&Pose2::new(6.0, 0.0, 0.0)),
            Err(AutonomyError::OffMap)
        );
    }
}
