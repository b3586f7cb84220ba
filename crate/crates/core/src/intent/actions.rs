use serde::{Deserialize, Serialize};

use super::mode::ControlMode;
use crate::gesture::{Arm, Gesture};

/// Holds longer than this switch to the fast tier.
pub const FAST_AFTER_MS: u64 = 3_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotAction {
    BaseForward,
    BaseBackward,
    TurnLeft,
    TurnRight,
    /// Moves the arm while held; each new onset flips extend/retract.
    ArmToggle,
    LiftUp,
    LiftDown,
    ArmExtend,
    ArmRetract,
    /// Each onset flips the gripper between open and closed.
    GripperToggle,
    GripperClose,
    PitchUp,
    PitchDown,
    RollLeft,
    RollRight,
    /// Moves wrist yaw while held; each new onset flips direction.
    YawToggle,
}

impl RobotAction {
    pub fn is_base_rotation(self) -> bool {
        matches!(self, RobotAction::TurnLeft | RobotAction::TurnRight)
    }

    pub fn is_base(self) -> bool {
        matches!(
            self,
            RobotAction::BaseForward
                | RobotAction::BaseBackward
                | RobotAction::TurnLeft
                | RobotAction::TurnRight
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBinding {
    pub mode: ControlMode,
    pub arm: Arm,
    pub gesture: Gesture,
    pub action: RobotAction,
}

/// Gesture to action assignments per mode. Loaded from config; the default
/// is the table below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionTable {
    pub bindings: Vec<ActionBinding>,
}

impl Default for ActionTable {
    fn default() -> Self {
        use ControlMode::*;
        use Gesture::*;
        use RobotAction::*;
        let b = |mode, arm, gesture, action| ActionBinding {
            mode,
            arm,
            gesture,
            action,
        };
        Self {
            bindings: vec![
                b(ArmDrive, Arm::Left, WristForward, BaseForward),
                b(ArmDrive, Arm::Left, WristBack, BaseBackward),
                b(ArmDrive, Arm::Left, WristSupination, TurnLeft),
                b(ArmDrive, Arm::Left, WristPronation, TurnRight),
                b(ArmDrive, Arm::Right, WristBack, ArmToggle),
                b(ArmGripper, Arm::Left, WristForward, LiftUp),
                b(ArmGripper, Arm::Left, WristBack, LiftDown),
                b(ArmGripper, Arm::Left, WristSupination, ArmExtend),
                b(ArmGripper, Arm::Left, WristPronation, ArmRetract),
                b(ArmGripper, Arm::Right, WristBack, GripperToggle),
                b(ArmGripper, Arm::Right, WristSupination, GripperClose),
                b(Wrist, Arm::Left, WristForward, PitchUp),
                b(Wrist, Arm::Left, WristBack, PitchDown),
                b(Wrist, Arm::Left, WristSupination, RollLeft),
                b(Wrist, Arm::Left, WristPronation, RollRight),
                b(Wrist, Arm::Right, WristBack, YawToggle),
            ],
        }
    }
}

impl ActionTable {
    pub fn lookup(&self, mode: ControlMode, arm: Arm, gesture: Gesture) -> Option<RobotAction> {
        self.bindings
            .iter()
            .find(|b| b.mode == mode && b.arm == arm && b.gesture == gesture)
            .map(|b| b.action)
    }

    pub fn for_mode(&self, mode: ControlMode) -> Vec<ActionBinding> {
        self.bindings
            .iter()
            .filter(|b| b.mode == mode)
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappedActions {
    pub left: Option<RobotAction>,
    pub right: Option<RobotAction>,
    pub warnings: Vec<String>,
}

/// Actions for a label pair. Labels outside an arm's vocabulary map to
/// nothing and produce a warning. Both arms in wrist-back is the mode switch
/// gesture and maps to nothing.
pub fn map_action(
    table: &ActionTable,
    vocabulary: &[Vec<Gesture>; 2],
    mode: ControlMode,
    left: Gesture,
    right: Gesture,
) -> MappedActions {
    let mut out = MappedActions::default();
    if left == Gesture::WristBack && right == Gesture::WristBack {
        return out;
    }
    for (arm, g) in [(Arm::Left, left), (Arm::Right, right)] {
        if g.is_rest() {
            continue;
        }
        let action = if vocabulary[arm.index()].contains(&g) {
            table.lookup(mode, arm, g)
        } else {
            out.warnings
                .push(format!("{arm} label {g} is not in the vocabulary"));
            None
        };
        match arm {
            Arm::Left => out.left = action,
            Arm::Right => out.right = action,
        }
    }
    out
}

/// Speed multiplier for an action held for `hold_ms`.
pub fn speed_tier(action: RobotAction, hold_ms: u64) -> u8 {
    if hold_ms <= FAST_AFTER_MS {
        1
    } else if action.is_base_rotation() {
        4
    } else {
        2
    }
}

/// Time since the label last changed. Any change, including to Rest,
/// restarts the timer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoldTimer {
    label: Gesture,
    since_ms: u64,
}

impl Default for HoldTimer {
    fn default() -> Self {
        Self {
            label: Gesture::Rest,
            since_ms: 0,
        }
    }
}

impl HoldTimer {
    pub fn update(&mut self, t_ms: u64, label: Gesture) {
        if label != self.label {
            self.label = label;
            self.since_ms = t_ms;
        }
    }

    pub fn label(&self) -> Gesture {
        self.label
    }

    pub fn held_ms(&self, t_ms: u64) -> u64 {
        t_ms.saturating_sub(self.since_ms)
    }
}
