use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gesture::Gesture;

/// Dual wrist-back hold that cycles the mode.
pub const MODE_HOLD_MS: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    ArmDrive,
    ArmGripper,
    Wrist,
}

impl ControlMode {
    pub const ALL: [ControlMode; 3] = [
        ControlMode::ArmDrive,
        ControlMode::ArmGripper,
        ControlMode::Wrist,
    ];

    pub fn next(self) -> Self {
        match self {
            ControlMode::ArmDrive => ControlMode::ArmGripper,
            ControlMode::ArmGripper => ControlMode::Wrist,
            ControlMode::Wrist => ControlMode::ArmDrive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControlMode::ArmDrive => "arm_drive",
            ControlMode::ArmGripper => "arm_gripper",
            ControlMode::Wrist => "wrist",
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mode state with the dual-hold trigger. The trigger is edge-based: after
/// firing, both arms must leave wrist-back before it can fire again.
#[derive(Debug, Clone)]
pub struct ModeMachine {
    mode: ControlMode,
    entered_at_ms: u64,
    dual_since: Option<u64>,
    latched: bool,
    hold_ms: u64,
}

impl Default for ModeMachine {
    fn default() -> Self {
        Self::new(ControlMode::ArmDrive, MODE_HOLD_MS)
    }
}

impl ModeMachine {
    pub fn new(mode: ControlMode, hold_ms: u64) -> Self {
        Self {
            mode,
            entered_at_ms: 0,
            dual_since: None,
            latched: false,
            hold_ms,
        }
    }

    pub fn mode(&self) -> ControlMode {
        self.mode
    }

    pub fn entered_at_ms(&self) -> u64 {
        self.entered_at_ms
    }

    /// True while both arms are in wrist-back, i.e. the combination is
    /// reserved for mode switching.
    pub fn dual_active(&self) -> bool {
        self.dual_since.is_some()
    }

    /// Feeds the labels observed at `t_ms`; returns the new mode on a cycle.
    pub fn step(&mut self, t_ms: u64, left: Gesture, right: Gesture) -> Option<ControlMode> {
        let dual = left == Gesture::WristBack && right == Gesture::WristBack;
        if !dual {
            self.dual_since = None;
            self.latched = false;
            return None;
        }
        let since = *self.dual_since.get_or_insert(t_ms);
        if !self.latched && t_ms - since >= self.hold_ms {
            self.latched = true;
            return Some(self.advance(t_ms));
        }
        None
    }

    /// Text "next mode" request.
    pub fn advance(&mut self, t_ms: u64) -> ControlMode {
        self.mode = self.mode.next();
        self.entered_at_ms = t_ms;
        self.mode
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Gesture::*;

    fn run(m: &mut ModeMachine, from: u64, to: u64, l: Gesture, r: Gesture) -> usize {
        (from..=to)
            .step_by(40)
            .filter_map(|t| m.step(t, l, r))
            .count()
    }

    #[test]
    fn quarter_second_hold_cycles_once() {
        let mut m = ModeMachine::default();
        assert_eq!(run(&mut m, 40, 280, WristBack, WristBack), 1);
        assert_eq!(m.mode(), ControlMode::ArmGripper);
    }

    #[test]
    fn sustained_hold_cycles_once() {
        let mut m = ModeMachine::default();
        assert_eq!(run(&mut m, 40, 1_040, WristBack, WristBack), 1);
        run(&mut m, 1_080, 1_200, Rest, Rest);
        assert_eq!(run(&mut m, 1_240, 1_480, WristBack, WristBack), 1);
        assert_eq!(m.mode(), ControlMode::Wrist);
    }

    #[test]
    fn one_arm_or_short_hold_does_nothing() {
        let mut m = ModeMachine::default();
        assert_eq!(run(&mut m, 40, 2_000, WristBack, Rest), 0);
        assert_eq!(run(&mut m, 2_040, 2_200, WristBack, WristBack), 0);
        assert_eq!(m.mode(), ControlMode::ArmDrive);
    }

    #[test]
    fn three_cycles_close_the_loop() {
        let mut m = ModeMachine::default();
        for t in 1..=3 {
            m.advance(t);
        }
        assert_eq!(m.mode(), ControlMode::ArmDrive);
    }
}
