use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::operator::{Operator, OperatorInput, OperatorView};
use crate::autonomy::plan_global;
use crate::gesture::Gesture::{self, *};
use crate::intent::{ControlMode, LabelInput, LABEL_PERIOD_MS};
use crate::sim::{align_ik, wrap_angle, IkSolution, Pose2};

/// Time from a label change to the robot reacting: quorum fill plus at
/// most one command period.
const LAG_S: f64 = 0.3;
const LOOKAHEAD: f64 = 0.4;
const TURN_START: f64 = 0.25;
const HEADING_TOL: f64 = 0.02;
const JOINT_TOL: f64 = 0.01;
const GOAL_TOL: f64 = 0.15;
/// Label ticks to wait for an assist to converge before acting anyway.
const ALIGN_PATIENCE: u32 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertStyle {
    /// Every motion by gesture, mode switches by dual wrist-back.
    Teleop,
    /// Room navigation and auto-alignment by text, gestures for the rest.
    Assisted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertTask {
    pub object: String,
    pub pickup_room: String,
    pub home_room: String,
}

impl Default for ExpertTask {
    fn default() -> Self {
        Self {
            object: "cup".into(),
            pickup_room: "kitchen".into(),
            home_room: "bedroom".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    Out,
    Home,
}

#[derive(Debug, Clone, PartialEq)]
enum Phase {
    Start,
    Drive(Leg),
    Face,
    Mode(ControlMode),
    Lift,
    Extend,
    Close,
    /// Room navigation; the flag records that the request was spoken.
    RoomDrive(Leg, bool),
    AssistReach,
    AssistSettle(u32),
    /// Short arm-toggle press to flip its direction.
    Flip(u32),
    Pause(u32, Box<Phase>),
    Done,
}

/// Closed-loop scripted operator that fetches an object from one room and
/// brings it to another. It watches the robot the way a person watching the
/// console would, and compensates for the filter delay when letting go.
pub struct ExpertOperator {
    style: ExpertStyle,
    task: ExpertTask,
    phase: Phase,
    path: Vec<(f64, f64)>,
    idx: usize,
    hold: (Gesture, Gesture),
    texts: VecDeque<String>,
    holding: bool,
}

/// Signed command for driving an axis toward `err` given its current rate.
fn servo(err: f64, rate: f64, tol: f64) -> f64 {
    let predicted = err - rate * LAG_S;
    if predicted.abs() <= tol || predicted.signum() != err.signum() {
        0.0
    } else {
        predicted.signum()
    }
}

impl ExpertOperator {
    pub fn new(style: ExpertStyle, task: ExpertTask) -> Self {
        Self {
            style,
            task,
            phase: Phase::Start,
            path: Vec::new(),
            idx: 0,
            hold: (Rest, Rest),
            texts: VecDeque::new(),
            holding: false,
        }
    }

    pub fn done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn say(&mut self, t: &str) {
        self.texts.push_back(t.to_string());
    }

    fn object_ik(&self, view: &OperatorView) -> Option<IkSolution> {
        let sim = view.robot.sim();
        let o = sim.scene().object(&self.task.object)?;
        align_ik(sim.state(), sim.params(), o.position).ok()
    }

    fn plan_to(&mut self, view: &OperatorView, room: &str) -> bool {
        let sim = view.robot.sim();
        let Some(r) = sim.world().map.room(room) else {
            return false;
        };
        let p = sim.state().pose;
        match plan_global(view.robot.costmap(), (p.x, p.y), r.goal) {
            Ok(plan) => {
                self.path = plan.waypoints;
                self.idx = 0;
                true
            }
            Err(_) => false,
        }
    }

    /// Discrete path following: turn in place or drive forward.
    fn drive(&mut self, view: &OperatorView) -> Option<(Gesture, Gesture)> {
        let p: Pose2 = view.robot.sim().state().pose;
        let act = view.robot.actuator();
        let &(gx, gy) = self.path.last()?;
        let d_goal = p.distance_to(gx, gy);
        if d_goal <= GOAL_TOL.max(act.v.abs() * LAG_S) {
            return (act.v != 0.0 || act.omega != 0.0).then_some((Rest, Rest));
        }
        let last = self.path.len() - 1;
        while self.idx < last
            && p.distance_to(self.path[self.idx].0, self.path[self.idx].1) < LOOKAHEAD
        {
            self.idx += 1;
        }
        let (tx, ty) = self.path[self.idx];
        let e = wrap_angle((ty - p.y).atan2(tx - p.x) - p.theta);
        let turning = matches!(self.hold.0, WristSupination | WristPronation);
        let turn = if turning {
            servo(e, act.omega, 0.03)
        } else if e.abs() > TURN_START {
            e.signum()
        } else {
            0.0
        };
        Some(if turn > 0.0 {
            (WristSupination, Rest)
        } else if turn < 0.0 {
            (WristPronation, Rest)
        } else if turning && act.omega != 0.0 {
            (Rest, Rest)
        } else {
            (WristForward, Rest)
        })
    }

    fn after_mode(&mut self, view: &OperatorView, mode: ControlMode) -> Phase {
        match (self.style, mode, self.holding) {
            (_, ControlMode::ArmGripper, true) | (_, ControlMode::Wrist, _) => {
                Phase::Mode(mode.next())
            }
            (ExpertStyle::Teleop, ControlMode::ArmGripper, false) => Phase::Lift,
            (ExpertStyle::Assisted, ControlMode::ArmGripper, false) => Phase::Close,
            (ExpertStyle::Teleop, ControlMode::ArmDrive, _) => {
                let room = self.task.home_room.clone();
                self.plan_to(view, &room);
                Phase::Drive(Leg::Home)
            }
            (ExpertStyle::Assisted, ControlMode::ArmDrive, _) => Phase::RoomDrive(Leg::Home, false),
        }
    }

    fn step(&mut self, view: &OperatorView) -> (Gesture, Gesture) {
        let act = *view.robot.actuator();
        let ik = self.object_ik(view);
        match self.phase.clone() {
            Phase::Start => {
                self.say("start gesture mode");
                let room = self.task.pickup_room.clone();
                self.phase = match self.style {
                    ExpertStyle::Teleop => {
                        self.plan_to(view, &room);
                        Phase::Drive(Leg::Out)
                    }
                    ExpertStyle::Assisted => Phase::RoomDrive(Leg::Out, false),
                };
                (Rest, Rest)
            }
            Phase::Drive(leg) => self.drive(view).unwrap_or_else(|| {
                self.phase = match leg {
                    Leg::Out => Phase::Face,
                    Leg::Home => Phase::Done,
                };
                (Rest, Rest)
            }),
            Phase::Face => {
                let Some(ik) = ik else { return self.give_up() };
                match servo(ik.d_heading, act.omega, HEADING_TOL) {
                    s if s > 0.0 => (WristSupination, Rest),
                    s if s < 0.0 => (WristPronation, Rest),
                    _ => {
                        if act.omega == 0.0 && ik.d_heading.abs() <= 2.0 * HEADING_TOL {
                            self.phase = Phase::Mode(ControlMode::ArmGripper);
                        }
                        (Rest, Rest)
                    }
                }
            }
            Phase::Mode(target) => {
                if view.mode != target {
                    return (WristBack, WristBack);
                }
                let next = self.after_mode(view, target);
                self.phase = Phase::Pause(3, Box::new(next));
                (Rest, Rest)
            }
            Phase::Lift => {
                let Some(ik) = ik else { return self.give_up() };
                match servo(ik.d_lift, act.joints.lift, JOINT_TOL) {
                    s if s > 0.0 => (WristForward, Rest),
                    s if s < 0.0 => (WristBack, Rest),
                    _ => {
                        if act.joints.lift == 0.0 {
                            self.phase = Phase::Extend;
                        }
                        (Rest, Rest)
                    }
                }
            }
            Phase::Extend => {
                let Some(ik) = ik else { return self.give_up() };
                match servo(ik.d_extension, act.joints.extension, JOINT_TOL) {
                    s if s > 0.0 => (WristSupination, Rest),
                    s if s < 0.0 => (WristPronation, Rest),
                    _ => {
                        if act.joints.extension == 0.0 {
                            self.phase = Phase::Close;
                        }
                        (Rest, Rest)
                    }
                }
            }
            Phase::Close => {
                if !self.holding {
                    return (Rest, WristSupination);
                }
                self.phase = match self.style {
                    ExpertStyle::Teleop => {
                        Phase::Pause(3, Box::new(Phase::Mode(ControlMode::Wrist)))
                    }
                    ExpertStyle::Assisted => {
                        self.say("next mode");
                        self.say("next mode");
                        Phase::Pause(3, Box::new(Phase::RoomDrive(Leg::Home, false)))
                    }
                };
                (Rest, Rest)
            }
            Phase::RoomDrive(leg, requested) => {
                if !requested {
                    self.say("room mode");
                    let room = match leg {
                        Leg::Out => self.task.pickup_room.clone(),
                        Leg::Home => self.task.home_room.clone(),
                    };
                    self.say(&format!("go to the {room}"));
                    self.phase = Phase::RoomDrive(leg, true);
                    return (Rest, Rest);
                }
                if view.robot.room_goal().is_some() {
                    return (WristForward, Rest);
                }
                self.phase = match leg {
                    Leg::Out => {
                        let object = self.task.object.clone();
                        self.say(&format!("align {object}"));
                        Phase::AssistReach
                    }
                    Leg::Home => Phase::Done,
                };
                (Rest, Rest)
            }
            Phase::AssistReach => {
                let Some(ik) = ik else { return self.give_up() };
                let s = servo(ik.d_extension, act.joints.extension, JOINT_TOL);
                let stopped = act.joints.extension == 0.0 && self.hold.1 == Rest;
                // One toggle onset moves further than the settle band, so
                // re-trying inside it just oscillates.
                if stopped && ik.d_extension.abs() <= 2.0 * JOINT_TOL {
                    self.phase = Phase::AssistSettle(0);
                    (Rest, Rest)
                } else if s == 0.0 {
                    if act.joints.extension == 0.0 {
                        self.phase = Phase::AssistSettle(0);
                    }
                    (Rest, Rest)
                } else if self.hold.1 == WristBack || view.robot.next_arm_direction() == s {
                    (Rest, WristBack)
                } else {
                    self.phase = Phase::Flip(0);
                    (Rest, Rest)
                }
            }
            Phase::Flip(n) => {
                // Long enough to reach quorum, then rest until it clears.
                self.phase = if n >= 16 {
                    Phase::AssistReach
                } else {
                    Phase::Flip(n + 1)
                };
                if n < 7 {
                    (Rest, WristBack)
                } else {
                    (Rest, Rest)
                }
            }
            Phase::AssistSettle(n) => {
                let Some(ik) = ik else { return self.give_up() };
                let settled = ik.d_heading.abs() <= HEADING_TOL && ik.d_lift.abs() <= JOINT_TOL;
                self.phase = if ik.d_extension.abs() > 2.0 * JOINT_TOL {
                    Phase::AssistReach
                } else if settled || n >= ALIGN_PATIENCE {
                    self.say("next mode");
                    Phase::Pause(2, Box::new(Phase::Close))
                } else {
                    Phase::AssistSettle(n + 1)
                };
                (Rest, Rest)
            }
            Phase::Pause(n, next) => {
                self.phase = if n <= 1 {
                    *next
                } else {
                    Phase::Pause(n - 1, next)
                };
                (Rest, Rest)
            }
            Phase::Done => (Rest, Rest),
        }
    }

    fn give_up(&mut self) -> (Gesture, Gesture) {
        log::warn!("expert: `{}` is out of reach, stopping", self.task.object);
        self.phase = Phase::Done;
        (Rest, Rest)
    }
}

impl Operator for ExpertOperator {
    fn poll(&mut self, t_ms: u64, view: &OperatorView) -> OperatorInput {
        if t_ms % LABEL_PERIOD_MS != 0 {
            return OperatorInput::default();
        }
        self.holding = view
            .robot
            .sim()
            .scene()
            .held()
            .is_some_and(|o| o.id == self.task.object);
        let (l, r) = self.step(view);
        self.hold = (l, r);
        OperatorInput {
            window: Some([LabelInput::Label(l), LabelInput::Label(r)]),
            texts: self.texts.drain(..).collect(),
            ..Default::default()
        }
    }
}
