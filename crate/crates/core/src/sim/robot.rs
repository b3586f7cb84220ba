use serde::{Deserialize, Serialize};

use super::map::{wrap_angle, OccupancyGrid, Pose2};

/// Simulation step.
pub const STEP_MS: u64 = 10;
pub const STEP_S: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub min: f64,
    pub max: f64,
}

impl Limits {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// Per-axis speeds. Used both for the slow teleop tier and for the
/// actuator limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpeeds {
    pub base: f64,
    pub turn: f64,
    pub lift: f64,
    pub extension: f64,
    pub wrist: f64,
    pub gripper: f64,
}

/// Stretch-like mobile manipulator. Body frame: x forward, y left. The
/// telescoping arm extends along body -y from a mast at `(mast_x, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotParams {
    pub radius: f64,
    pub mast_x: f64,
    /// Gripper distance from the mast at zero extension.
    pub arm_base_offset: f64,
    pub lift: Limits,
    pub extension: Limits,
    pub wrist_yaw: Limits,
    pub wrist_pitch: Limits,
    pub wrist_roll: Limits,
    pub gripper: Limits,
    pub slow: AxisSpeeds,
    pub max: AxisSpeeds,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            radius: 0.18,
            mast_x: -0.08,
            arm_base_offset: 0.25,
            lift: Limits::new(0.2, 1.1),
            extension: Limits::new(0.0, 0.52),
            wrist_yaw: Limits::new(-1.75, 4.0),
            wrist_pitch: Limits::new(-1.57, 0.56),
            wrist_roll: Limits::new(-3.14, 3.14),
            gripper: Limits::new(0.0, 0.1),
            slow: AxisSpeeds {
                base: 0.1,
                turn: 0.15,
                lift: 0.05,
                extension: 0.05,
                wrist: 0.25,
                gripper: 0.05,
            },
            max: AxisSpeeds {
                base: 0.3,
                turn: 0.6,
                lift: 0.1,
                extension: 0.1,
                wrist: 0.5,
                gripper: 0.05,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose2,
    pub lift: f64,
    pub extension: f64,
    pub wrist_yaw: f64,
    pub wrist_pitch: f64,
    pub wrist_roll: f64,
    pub gripper: f64,
}

impl RobotState {
    pub fn at(pose: Pose2) -> Self {
        Self {
            pose,
            lift: 0.5,
            extension: 0.0,
            wrist_yaw: 0.0,
            wrist_pitch: 0.0,
            wrist_roll: 0.0,
            gripper: 0.1,
        }
    }

    /// Gripper center in world coordinates.
    pub fn gripper_point(&self, p: &RobotParams) -> [f64; 3] {
        let (x, y) = self
            .pose
            .to_world(p.mast_x, -(p.arm_base_offset + self.extension));
        [x, y, self.lift]
    }

    pub fn within_limits(&self, p: &RobotParams) -> bool {
        p.lift.contains(self.lift)
            && p.extension.contains(self.extension)
            && p.wrist_yaw.contains(self.wrist_yaw)
            && p.wrist_pitch.contains(self.wrist_pitch)
            && p.wrist_roll.contains(self.wrist_roll)
            && p.gripper.contains(self.gripper)
    }

    /// Bit pattern of every field, for determinism checks.
    pub fn bits(&self) -> [u64; 9] {
        [
            self.pose.x,
            self.pose.y,
            self.pose.theta,
            self.lift,
            self.extension,
            self.wrist_yaw,
            self.wrist_pitch,
            self.wrist_roll,
            self.gripper,
        ]
        .map(f64::to_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointVelocities {
    pub lift: f64,
    pub extension: f64,
    pub wrist_yaw: f64,
    pub wrist_pitch: f64,
    pub wrist_roll: f64,
    pub gripper: f64,
}

/// Unicycle displacement over `dt`, exact arc when turning.
pub fn integrate_unicycle(pose: Pose2, v: f64, omega: f64, dt: f64) -> Pose2 {
    let th = pose.theta;
    let th1 = th + omega * dt;
    let (x, y) = if omega.abs() > 1e-6 {
        let r = v / omega;
        (
            pose.x + r * (th1.sin() - th.sin()),
            pose.y - r * (th1.cos() - th.cos()),
        )
    } else {
        let mid = th + 0.5 * omega * dt;
        (pose.x + v * mid.cos() * dt, pose.y + v * mid.sin() * dt)
    };
    Pose2::new(x, y, wrap_angle(th1))
}

/// Advances the robot one step. Returns whether base translation was
/// rejected because the footprint would overlap an obstacle.
pub fn step_robot(
    state: &mut RobotState,
    params: &RobotParams,
    grid: &OccupancyGrid,
    v: f64,
    omega: f64,
    joints: &JointVelocities,
    dt: f64,
) -> bool {
    let next = integrate_unicycle(state.pose, v, omega, dt);
    let blocked = v != 0.0 && grid.disc_collides(next.x, next.y, params.radius);
    state.pose = if blocked {
        integrate_unicycle(state.pose, 0.0, omega, dt)
    } else {
        next
    };
    state.lift = params.lift.clamp(state.lift + joints.lift * dt);
    state.extension = params
        .extension
        .clamp(state.extension + joints.extension * dt);
    state.wrist_yaw = params
        .wrist_yaw
        .clamp(state.wrist_yaw + joints.wrist_yaw * dt);
    state.wrist_pitch = params
        .wrist_pitch
        .clamp(state.wrist_pitch + joints.wrist_pitch * dt);
    state.wrist_roll = params
        .wrist_roll
        .clamp(state.wrist_roll + joints.wrist_roll * dt);
    state.gripper = params.gripper.clamp(state.gripper + joints.gripper * dt);
    blocked
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn open() -> OccupancyGrid {
        OccupancyGrid::new(200, 200, 0.05, (-5.0, -5.0))
    }

    fn run(s: &mut RobotState, g: &OccupancyGrid, v: f64, w: f64, steps: usize) {
        for _ in 0..steps {
            step_robot(
                s,
                &RobotParams::default(),
                g,
                v,
                w,
                &JointVelocities::default(),
                STEP_S,
            );
        }
    }

    #[test]
    fn idle_is_identity() {
        let mut s = RobotState::at(Pose2::new(0.3, -0.2, 0.4));
        let before = s;
        run(&mut s, &open(), 0.0, 0.0, 100);
        assert_eq!(s, before);
    }

    #[test]
    fn straight_line() {
        let mut s = RobotState::at(Pose2::new(0.0, 0.0, 0.5));
        run(&mut s, &open(), 0.1, 0.0, 1000);
        assert!((s.pose.distance_to(0.0, 0.0) - 1.0).abs() < 1e-9);
        assert!((s.pose.y.atan2(s.pose.x) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn pure_rotation() {
        let mut s = RobotState::at(Pose2::new(1.0, 2.0, 0.0));
        run(&mut s, &open(), 0.0, PI / 10.0, 1000);
        assert!((s.pose.theta.abs() - PI).abs() < 1e-9);
        assert_eq!((s.pose.x, s.pose.y), (1.0, 2.0));
    }

    #[test]
    fn joints_clamp() {
        let p = RobotParams::default();
        let mut s = RobotState::at(Pose2::default());
        let j = JointVelocities {
            lift: 1.0,
            extension: -1.0,
            gripper: 1.0,
            ..Default::default()
        };
        for _ in 0..200 {
            step_robot(&mut s, &p, &open(), 0.0, 0.0, &j, STEP_S);
        }
        assert_eq!((s.lift, s.extension, s.gripper), (1.1, 0.0, 0.1));
    }

    #[test]
    fn wall_blocks_translation() {
        let mut g = open();
        g.fill_rect(1.0, -5.0, 1.2, 5.0);
        let mut s = RobotState::at(Pose2::new(0.0, 0.0, 0.0));
        run(&mut s, &g, 0.3, 0.0, 1000);
        assert!(!g.disc_collides(s.pose.x, s.pose.y, 0.18));
        assert!(s.pose.x > 0.75 && s.pose.x < 0.82);
    }

    proptest! {
        #[test]
        fn no_lateral_slip_and_no_penetration(
            cmds in proptest::collection::vec((-0.3f64..0.3, -0.6f64..0.6), 1..200),
        ) {
            let mut g = open();
            g.fill_rect(0.5, -1.0, 0.7, 1.0);
            let mut s = RobotState::at(Pose2::new(0.0, 0.0, 0.0));
            for (v, w) in cmds {
                let before = s.pose;
                step_robot(&mut s, &RobotParams::default(), &g, v, w, &JointVelocities::default(), STEP_S);
                let mid = before.theta + 0.5 * w * STEP_S;
                let (dx, dy) = (s.pose.x - before.x, s.pose.y - before.y);
                prop_assert!((-mid.sin() * dx + mid.cos() * dy).abs() < 1e-12);
                prop_assert!(!g.disc_collides(s.pose.x, s.pose.y, 0.18));
            }
        }
    }
}
