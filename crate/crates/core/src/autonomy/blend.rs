use serde::{Deserialize, Serialize};

use super::AutonomyError;
use crate::sim::{ActuatorCommand, AxisSpeeds, JointVelocities};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    BaseForward,
    BaseRotate,
    Lift,
    Extension,
    WristYaw,
    WristPitch,
    WristRoll,
    Gripper,
}

impl Axis {
    pub const ALL: [Axis; 8] = [
        Axis::BaseForward,
        Axis::BaseRotate,
        Axis::Lift,
        Axis::Extension,
        Axis::WristYaw,
        Axis::WristPitch,
        Axis::WristRoll,
        Axis::Gripper,
    ];

    /// Axes the alignment assistant may drive. Extension (approach toward
    /// the object), the wrist and the gripper stay with the operator.
    pub fn is_alignment(self) -> bool {
        matches!(self, Axis::BaseForward | Axis::BaseRotate | Axis::Lift)
    }

    pub fn limit(self, max: &AxisSpeeds) -> f64 {
        match self {
            Axis::BaseForward => max.base,
            Axis::BaseRotate => max.turn,
            Axis::Lift => max.lift,
            Axis::Extension => max.extension,
            Axis::WristYaw | Axis::WristPitch | Axis::WristRoll => max.wrist,
            Axis::Gripper => max.gripper,
        }
    }
}

/// Velocity command over every actuated axis (m/s or rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlVector {
    pub base_forward: f64,
    pub base_rotate: f64,
    pub lift: f64,
    pub extension: f64,
    pub wrist_yaw: f64,
    pub wrist_pitch: f64,
    pub wrist_roll: f64,
    pub gripper: f64,
}

impl ControlVector {
    pub fn get(&self, a: Axis) -> f64 {
        match a {
            Axis::BaseForward => self.base_forward,
            Axis::BaseRotate => self.base_rotate,
            Axis::Lift => self.lift,
            Axis::Extension => self.extension,
            Axis::WristYaw => self.wrist_yaw,
            Axis::WristPitch => self.wrist_pitch,
            Axis::WristRoll => self.wrist_roll,
            Axis::Gripper => self.gripper,
        }
    }

    pub fn set(&mut self, a: Axis, v: f64) {
        *match a {
            Axis::BaseForward => &mut self.base_forward,
            Axis::BaseRotate => &mut self.base_rotate,
            Axis::Lift => &mut self.lift,
            Axis::Extension => &mut self.extension,
            Axis::WristYaw => &mut self.wrist_yaw,
            Axis::WristPitch => &mut self.wrist_pitch,
            Axis::WristRoll => &mut self.wrist_roll,
            Axis::Gripper => &mut self.gripper,
        } = v;
    }

    pub fn is_zero(&self) -> bool {
        Axis::ALL.iter().all(|&a| self.get(a) == 0.0)
    }

    /// Every axis clamped to `±max`.
    pub fn clamped(&self, max: &AxisSpeeds) -> Self {
        let mut out = *self;
        for a in Axis::ALL {
            let l = a.limit(max);
            out.set(a, self.get(a).clamp(-l, l));
        }
        out
    }

    pub fn to_actuator(&self) -> ActuatorCommand {
        ActuatorCommand {
            v: self.base_forward,
            omega: self.base_rotate,
            joints: JointVelocities {
                lift: self.lift,
                extension: self.extension,
                wrist_yaw: self.wrist_yaw,
                wrist_pitch: self.wrist_pitch,
                wrist_roll: self.wrist_roll,
                gripper: self.gripper,
            },
        }
    }
}

/// `u = u_h + alpha * u_a` on the alignment axes, clamped to the actuator
/// limits. Operator-only axes pass through from `u_h` unchanged.
pub fn blend_alignment(
    u_h: &ControlVector,
    u_a: &ControlVector,
    alpha: f64,
    max: &AxisSpeeds,
) -> Result<ControlVector, AutonomyError> {
    if let Some(a) = Axis::ALL
        .iter()
        .find(|a| !a.is_alignment() && u_a.get(**a) != 0.0)
    {
        return Err(AutonomyError::GuardedAxis(*a));
    }
    let alpha = alpha.clamp(0.0, 1.0);
    let mut u = *u_h;
    for a in Axis::ALL.into_iter().filter(|a| a.is_alignment()) {
        let l = a.limit(max);
        u.set(a, (u_h.get(a) + alpha * u_a.get(a)).clamp(-l, l));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RobotParams;
    use proptest::prelude::*;

    fn max() -> AxisSpeeds {
        RobotParams::default().max
    }

    fn cv(fwd: f64, rot: f64) -> ControlVector {
        ControlVector {
            base_forward: fwd,
            base_rotate: rot,
            ..Default::default()
        }
    }

    #[test]
    fn examples() {
        let u_h = cv(0.2, 0.0);
        let u_a = cv(0.0, 0.3);
        assert_eq!(blend_alignment(&u_h, &u_a, 0.0, &max()).unwrap(), u_h);
        assert_eq!(
            blend_alignment(&ControlVector::default(), &u_a, 1.0, &max()).unwrap(),
            u_a
        );
        assert_eq!(
            blend_alignment(&u_h, &u_a, 0.5, &max()).unwrap(),
            cv(0.2, 0.15)
        );
    }

    #[test]
    fn clamps_to_limits() {
        let u = blend_alignment(&cv(0.25, 0.5), &cv(0.2, 0.5), 1.0, &max()).unwrap();
        assert_eq!(u, cv(0.3, 0.6));
    }

    #[test]
    fn guarded_axis_is_an_error() {
        let u_a = ControlVector {
            gripper: -0.01,
            ..Default::default()
        };
        assert_eq!(
            blend_alignment(&ControlVector::default(), &u_a, 0.5, &max()),
            Err(AutonomyError::GuardedAxis(Axis::Gripper))
        );
    }

    fn any_cv() -> impl Strategy<Value = ControlVector> {
        proptest::array::uniform8(-1.0f64..1.0).prop_map(|v| {
            let mut c = ControlVector::default();
            for (a, x) in Axis::ALL.iter().zip(v) {
                c.set(*a, x);
            }
            c
        })
    }

    proptest! {
        #[test]
        fn operator_axes_pass_through(u_h in any_cv(), u_a in any_cv(), alpha in -0.5f64..1.5) {
            let mut u_a = u_a;
            for a in Axis::ALL.into_iter().filter(|a| !a.is_alignment()) {
                u_a.set(a, 0.0);
            }
            let u = blend_alignment(&u_h, &u_a, alpha, &max()).unwrap();
            let al = alpha.clamp(0.0, 1.0);
            for a in Axis::ALL {
                if a.is_alignment() {
                    let l = a.limit(&max());
                    prop_assert_eq!(u.get(a), (u_h.get(a) + al * u_a.get(a)).clamp(-l, l));
                } else {
                    prop_assert_eq!(u.get(a).to_bits(), u_h.get(a).to_bits());
                }
            }
        }
    }
}
