//! Fixed-step home simulation: unicycle base with a Stretch-like arm,
//! grid LiDAR, object detector surrogate, closed-form alignment IK and
//! grasp attachment.

mod detector;
mod ik;
mod lidar;
mod map;
mod robot;
mod scene;
mod world;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use detector::{Ambiguity, Detection, Detector, DetectorParams, CAMERA_YAW};
pub use ik::{align_ik, arm_axis_heading, distance_to_arm_axis, IkSolution, ReachError};
pub use lidar::{cast_ray, lidar, LidarParams, Scan};
pub use map::{wrap_angle, Cell, OccupancyGrid, Pose2, Room, WorldMap};
pub use robot::{
    integrate_unicycle, step_robot, AxisSpeeds, JointVelocities, Limits, RobotParams, RobotState,
    STEP_MS, STEP_S,
};
pub use scene::{GraspEvent, Scene, SceneObject, CAPTURE_RADIUS};
pub use world::{World, WorldFile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid world: {0}")]
    BadWorld(String),
    #[error("{0}")]
    Io(String),
}

/// Base and joint velocities for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub v: f64,
    pub omega: f64,
    pub joints: JointVelocities,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub blocked: bool,
    pub grasp: Option<GraspEvent>,
    /// Present on detector ticks while a query is armed.
    pub detections: Option<Vec<Detection>>,
}

/// Single-writer simulation loop state.
#[derive(Debug, Clone)]
pub struct Sim {
    world: World,
    state: RobotState,
    scene: Scene,
    detector: Detector,
    query: Option<String>,
    t_ms: u64,
}

impl Sim {
    pub fn new(world: World, seed: u64) -> Self {
        Self {
            state: RobotState::at(world.start),
            scene: Scene::new(world.objects.clone()),
            detector: Detector::new(world.detector.clone(), seed),
            query: None,
            t_ms: 0,
            world,
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn set_state(&mut self, state: RobotState) {
        self.state = state;
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn t_ms(&self) -> u64 {
        self.t_ms
    }

    pub fn query(&self) -> Option<&str> {
        self.query.as_deref()
    }

    pub fn set_query(&mut self, query: Option<String>) {
        self.query = query;
    }

    /// Teleports a free object. Returns false for an unknown or held id.
    pub fn move_object(&mut self, id: &str, position: [f64; 3]) -> bool {
        match self
            .scene
            .objects
            .iter_mut()
            .find(|o| o.id == id && !o.grasped)
        {
            Some(o) => {
                o.position = position;
                true
            }
            None => false,
        }
    }

    /// Ids of free objects inside the camera frustum.
    pub fn visible_objects(&self) -> Vec<String> {
        self.scene
            .objects
            .iter()
            .filter(|o| {
                !o.grasped
                    && self
                        .detector
                        .in_view(&self.state.pose, o.position)
                        .is_some()
            })
            .map(|o| o.id.clone())
            .collect()
    }

    pub fn params(&self) -> &RobotParams {
        &self.world.robot
    }

    pub fn room(&self) -> Option<&str> {
        let p = self.state.pose;
        self.world.map.room_at(p.x, p.y).map(|r| r.name.as_str())
    }

    pub fn scan(&self) -> Scan {
        lidar(&self.world.map.grid, &self.state.pose, &self.world.lidar)
    }

    /// Advances one 10 ms step.
    pub fn step(&mut self, cmd: &ActuatorCommand) -> StepReport {
        self.t_ms += STEP_MS;
        let params = &self.world.robot;
        let blocked = step_robot(
            &mut self.state,
            params,
            &self.world.map.grid,
            cmd.v,
            cmd.omega,
            &cmd.joints,
            STEP_S,
        );
        if let Some(min) = self.scene.min_aperture() {
            self.state.gripper = self.state.gripper.max(min);
        }
        let grasp = self
            .scene
            .grasp_check(&self.state, params, cmd.joints.gripper);
        self.scene.follow(&self.state, params);
        let detections = if self.detector.due(self.t_ms) {
            self.query.clone().map(|q| {
                self.detector
                    .detect(&self.scene.objects, &self.state.pose, &q, self.t_ms)
            })
        } else {
            None
        };
        StepReport {
            blocked,
            grasp,
            detections,
        }
    }
}
