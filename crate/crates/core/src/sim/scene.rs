use serde::{Deserialize, Serialize};

use super::robot::{RobotParams, RobotState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub label: String,
    pub position: [f64; 3],
    pub radius: f64,
    #[serde(default)]
    pub grasped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event", content = "object")]
pub enum GraspEvent {
    Grasped(String),
    Released(String),
}

pub const CAPTURE_RADIUS: f64 = 0.06;
/// Slack on the object diameter for the gripper to count as closed on it.
const CLOSE_SLACK: f64 = 0.005;

/// Objects plus the grasp attachment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    /// Held object index and its offset from the gripper point.
    held: Option<(usize, [f64; 3])>,
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>) -> Self {
        Self {
            objects,
            held: None,
        }
    }

    pub fn object(&self, id: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn held(&self) -> Option<&SceneObject> {
        self.held.map(|(i, _)| &self.objects[i])
    }

    /// Smallest aperture allowed for the current state: a held object
    /// blocks the fingers.
    pub fn min_aperture(&self) -> Option<f64> {
        self.held().map(|o| 2.0 * o.radius)
    }

    /// Grasp and release transitions after a step. `gripper_rate` is the
    /// commanded aperture velocity.
    pub fn grasp_check(
        &mut self,
        state: &RobotState,
        params: &RobotParams,
        gripper_rate: f64,
    ) -> Option<GraspEvent> {
        let g = state.gripper_point(params);
        if let Some((i, _)) = self.held {
            if gripper_rate > 0.0 {
                self.held = None;
                self.objects[i].grasped = false;
                return Some(GraspEvent::Released(self.objects[i].id.clone()));
            }
            return None;
        }
        if gripper_rate >= 0.0 {
            return None;
        }
        let best = self
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| {
                dist3(o.position, g) <= CAPTURE_RADIUS
                    && state.gripper <= 2.0 * o.radius + CLOSE_SLACK
            })
            .min_by(|a, b| dist3(a.1.position, g).total_cmp(&dist3(b.1.position, g)))
            .map(|(i, _)| i)?;
        let o = &mut self.objects[best];
        o.grasped = true;
        let offset = [
            o.position[0] - g[0],
            o.position[1] - g[1],
            o.position[2] - g[2],
        ];
        self.held = Some((best, offset));
        Some(GraspEvent::Grasped(o.id.clone()))
    }

    /// Moves the held object with the gripper.
    pub fn follow(&mut self, state: &RobotState, params: &RobotParams) {
        if let Some((i, off)) = self.held {
            let g = state.gripper_point(params);
            self.objects[i].position = [g[0] + off[0], g[1] + off[1], g[2] + off[2]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::map::Pose2;

    fn setup(obj_at: [f64; 3]) -> (Scene, RobotState, RobotParams) {
        let p = RobotParams::default();
        let mut s = RobotState::at(Pose2::default());
        s.gripper = 0.08;
        let scene = Scene::new(vec![SceneObject {
            id: "cup".into(),
            label: "cup".into(),
            position: obj_at,
            radius: 0.04,
            grasped: false,
        }]);
        (scene, s, p)
    }

    #[test]
    fn grasp_at_gripper() {
        let p = RobotParams::default();
        let g = RobotState::at(Pose2::default()).gripper_point(&p);
        let (mut scene, s, p) = setup(g);
        assert_eq!(
            scene.grasp_check(&s, &p, -0.05),
            Some(GraspEvent::Grasped("cup".into()))
        );
        assert_eq!(
            scene.grasp_check(&s, &p, 0.05),
            Some(GraspEvent::Released("cup".into()))
        );
    }

    #[test]
    fn far_object_ignored() {
        let (mut scene, s, p) = setup([0.5, 0.0, 0.5]);
        assert_eq!(scene.grasp_check(&s, &p, -0.05), None);
    }

    #[test]
    fn held_object_follows() {
        let p = RobotParams::default();
        let mut s = RobotState::at(Pose2::default());
        let g = s.gripper_point(&p);
        let (mut scene, _, _) = setup([g[0] + 0.01, g[1], g[2]]);
        s.gripper = 0.08;
        scene.grasp_check(&s, &p, -0.05).unwrap();
        s.pose = Pose2::new(1.0, 2.0, 1.0);
        s.extension = 0.3;
        s.lift = 0.9;
        scene.follow(&s, &p);
        let g2 = s.gripper_point(&p);
        let o = scene.object("cup").unwrap().position;
        let d = dist3(o, g2);
        assert!((d - 0.01).abs() < 1e-9);
        assert!((o[2] - 0.9).abs() < 1e-9);
    }
}
