use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::ControlConfig;
use super::text::Intent;
use crate::autonomy::{
    alignment_command, blend_alignment, govern, plan_global, room_blend, BaseInput, ControlVector,
    Costmap, PurePursuit,
};
use crate::gesture::{Arm, Gesture};
use crate::intent::{
    map_action, ActionTable, ControlMode, GestureCommand, RobotAction, COMMAND_PERIOD_MS,
};
use crate::sim::{ActuatorCommand, AxisSpeeds, Detection, GraspEvent, Pose2, Sim};

/// One robot-side log event.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub kind: String,
    pub payload: Value,
}

fn ev(kind: &str, payload: Value) -> Emitted {
    Emitted {
        kind: kind.to_string(),
        payload,
    }
}

/// Event kinds produced by [`RobotSide`]. Replay regenerates exactly these.
pub const ROBOT_KINDS: [&str; 14] = [
    "control",
    "governor",
    "blocked",
    "grasp",
    "detection",
    "plan",
    "arrived",
    "room_abort",
    "refusal",
    "gesture_mode",
    "room_mode",
    "align",
    "photo",
    "status",
];

/// World-frame copy of the latest detection for the armed query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignTarget {
    pub position: [f64; 3],
    pub confidence: f64,
    pub detected_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Authority {
    Idle,
    Direct,
    Align,
    Room,
}

/// Simulation plus everything downstream of the command channel: action
/// mapping, the assistance laws and the governor. Only this type writes
/// actuator commands.
#[derive(Debug, Clone)]
pub struct RobotSide {
    sim: Sim,
    control: ControlConfig,
    actions: ActionTable,
    vocabulary: [Vec<Gesture>; 2],
    costmap: Costmap,
    gesture_active: bool,
    room_mode: bool,
    tracker: Option<(String, PurePursuit)>,
    align_query: Option<String>,
    target: Option<AlignTarget>,
    last_cmd: Option<GestureCommand>,
    prev_action: [Option<RobotAction>; 2],
    arm_dir: f64,
    yaw_dir: f64,
    gripper_closed: bool,
    actuator: ActuatorCommand,
    authority: Authority,
    blocked: bool,
    /// Set on arrival; base input is ignored until the operator lets go.
    base_latch: bool,
}

fn speed(slow: f64, max: f64, tier: u8) -> f64 {
    (slow * tier as f64).min(max)
}

impl RobotSide {
    pub fn new(
        sim: Sim,
        control: ControlConfig,
        actions: ActionTable,
        vocabulary: [Vec<Gesture>; 2],
    ) -> Self {
        let costmap =
            Costmap::from_grid(&sim.world().map.grid, sim.params().radius, &control.costmap);
        Self {
            sim,
            control,
            actions,
            vocabulary,
            costmap,
            gesture_active: false,
            room_mode: false,
            tracker: None,
            align_query: None,
            target: None,
            last_cmd: None,
            prev_action: [None, None],
            arm_dir: -1.0,
            yaw_dir: -1.0,
            gripper_closed: false,
            actuator: ActuatorCommand::default(),
            authority: Authority::Idle,
            blocked: false,
            base_latch: false,
        }
    }

    pub fn sim(&self) -> &Sim {
        &self.sim
    }

    pub fn costmap(&self) -> &Costmap {
        &self.costmap
    }

    pub fn gesture_active(&self) -> bool {
        self.gesture_active
    }

    pub fn room_mode(&self) -> bool {
        self.room_mode
    }

    pub fn room_goal(&self) -> Option<&str> {
        self.tracker.as_ref().map(|(r, _)| r.as_str())
    }

    pub fn plan(&self) -> Option<&PurePursuit> {
        self.tracker.as_ref().map(|(_, p)| p)
    }

    pub fn align_query(&self) -> Option<&str> {
        self.align_query.as_deref()
    }

    pub fn target(&self) -> Option<&AlignTarget> {
        self.target.as_ref()
    }

    pub fn actuator(&self) -> &ActuatorCommand {
        &self.actuator
    }

    pub fn authority(&self) -> Authority {
        self.authority
    }

    pub fn last_command(&self) -> Option<&GestureCommand> {
        self.last_cmd.as_ref()
    }

    /// The last physics step ran into an obstacle.
    pub fn is_blocked(&self) -> bool {
        self.blocked
    }

    pub fn gripper_closed(&self) -> bool {
        self.gripper_closed
    }

    /// Direction the next arm-toggle hold moves the arm, `+1` extends.
    pub fn next_arm_direction(&self) -> f64 {
        -self.arm_dir
    }

    fn mapped(&self, cmd: &GestureCommand) -> [Option<RobotAction>; 2] {
        if cmd.stale {
            return [None, None];
        }
        let m = map_action(
            &self.actions,
            &self.vocabulary,
            cmd.mode,
            cmd.left,
            cmd.right,
        );
        [m.left, m.right]
    }

    /// Latest command from the intent filter. Toggle actions flip on onset.
    pub fn apply_command(&mut self, cmd: &GestureCommand) {
        let now = self.mapped(cmd);
        for (i, a) in now.iter().enumerate() {
            if *a != self.prev_action[i] {
                match a {
                    Some(RobotAction::ArmToggle) => self.arm_dir = -self.arm_dir,
                    Some(RobotAction::YawToggle) => self.yaw_dir = -self.yaw_dir,
                    Some(RobotAction::GripperToggle) => self.gripper_closed = !self.gripper_closed,
                    Some(RobotAction::GripperClose) => self.gripper_closed = true,
                    _ => {}
                }
            }
        }
        self.prev_action = now;
        self.last_cmd = Some(cmd.clone());
    }

    fn clear_assist(&mut self) {
        self.tracker = None;
        self.align_query = None;
        self.target = None;
        self.sim.set_query(None);
    }

    fn refuse(&self, reason: String) -> Vec<Emitted> {
        vec![ev("refusal", json!({ "reason": reason }))]
    }

    /// Robot-side effect of a parsed text command. Mode advances belong to
    /// the intent filter and are ignored here.
    pub fn apply_intent(&mut self, t_ms: u64, intent: &Intent) -> Vec<Emitted> {
        match intent {
            Intent::StartGestureMode => {
                self.gesture_active = true;
                vec![ev("gesture_mode", json!({ "active": true }))]
            }
            Intent::StopGestureMode => {
                self.gesture_active = false;
                self.room_mode = false;
                self.clear_assist();
                self.actuator = ActuatorCommand::default();
                self.authority = Authority::Idle;
                vec![ev("gesture_mode", json!({ "active": false }))]
            }
            Intent::NextMode => Vec::new(),
            Intent::RoomMode => {
                self.room_mode = true;
                vec![ev("room_mode", json!({ "active": true }))]
            }
            Intent::ExitRoomMode => {
                self.room_mode = false;
                self.tracker = None;
                vec![ev("room_mode", json!({ "active": false }))]
            }
            Intent::GoTo { room } => {
                if !self.room_mode {
                    return self.refuse(format!("`go to {room}` needs room mode"));
                }
                let Some(r) = self.sim.world().map.room(room) else {
                    return self.refuse(format!("unknown room `{room}`"));
                };
                let (name, goal) = (r.name.clone(), r.goal);
                let pose = self.sim.state().pose;
                match plan_global(&self.costmap, (pose.x, pose.y), goal) {
                    Ok(plan) => {
                        let payload = json!({
                            "room": name,
                            "goal": [goal.x, goal.y, goal.theta],
                            "cost": plan.cost,
                            "waypoints": plan.waypoints.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>(),
                        });
                        self.tracker = Some((name, PurePursuit::new(plan, self.control.tracker)));
                        vec![ev("plan", payload)]
                    }
                    Err(e) => self.refuse(format!("cannot plan to `{name}`: {e}")),
                }
            }
            Intent::Align { query } => {
                let labels = self.sim.world().detector.matching_labels(query);
                let known = self
                    .sim
                    .scene()
                    .objects
                    .iter()
                    .any(|o| labels.contains(&o.label));
                if !known {
                    return self.refuse(format!("no object matches `{query}`"));
                }
                self.align_query = Some(query.clone());
                self.target = None;
                self.sim.set_query(Some(query.clone()));
                vec![ev("align", json!({ "query": query, "armed": true }))]
            }
            Intent::Cancel => {
                self.room_mode = false;
                self.clear_assist();
                vec![ev("align", json!({ "query": null, "armed": false }))]
            }
            Intent::TakePhoto => {
                let p = self.sim.state().pose;
                vec![ev(
                    "photo",
                    json!({ "t_ms": t_ms, "pose": [p.x, p.y, p.theta], "visible": self.sim.visible_objects() }),
                )]
            }
            Intent::Status => vec![ev("status", self.status())],
            Intent::Unknown { text } => self.refuse(format!("did not understand `{text}`")),
        }
    }

    pub fn status(&self) -> Value {
        let s = self.sim.state();
        json!({
            "gesture_active": self.gesture_active,
            "room_mode": self.room_mode,
            "room_goal": self.room_goal(),
            "align_query": self.align_query,
            "room": self.sim.room(),
            "held": self.sim.scene().held().map(|o| o.id.clone()),
            "pose": [s.pose.x, s.pose.y, s.pose.theta],
        })
    }

    pub fn move_object(&mut self, id: &str, position: [f64; 3]) -> bool {
        self.sim.move_object(id, position)
    }

    fn direct(&self, actions: &[Option<RobotAction>; 2], tiers: [u8; 2]) -> ControlVector {
        let slow = &self.sim.params().slow;
        let max = &self.sim.params().max;
        let mut u = ControlVector::default();
        for (a, &tier) in actions.iter().zip(&tiers) {
            let Some(a) = a else { continue };
            let s = |f: fn(&AxisSpeeds) -> f64| speed(f(slow), f(max), tier);
            use RobotAction::*;
            match a {
                BaseForward => u.base_forward += s(|x| x.base),
                BaseBackward => u.base_forward -= s(|x| x.base),
                TurnLeft => u.base_rotate += s(|x| x.turn),
                TurnRight => u.base_rotate -= s(|x| x.turn),
                ArmToggle => u.extension += self.arm_dir * s(|x| x.extension),
                LiftUp => u.lift += s(|x| x.lift),
                LiftDown => u.lift -= s(|x| x.lift),
                ArmExtend => u.extension += s(|x| x.extension),
                ArmRetract => u.extension -= s(|x| x.extension),
                PitchUp => u.wrist_pitch += s(|x| x.wrist),
                PitchDown => u.wrist_pitch -= s(|x| x.wrist),
                RollLeft => u.wrist_roll += s(|x| x.wrist),
                RollRight => u.wrist_roll -= s(|x| x.wrist),
                YawToggle => u.wrist_yaw += self.yaw_dir * s(|x| x.wrist),
                GripperToggle | GripperClose => {}
            }
        }
        u.gripper = if self.gripper_closed {
            -slow.gripper
        } else {
            slow.gripper
        };
        u.clamped(max)
    }

    fn base_input(&self, actions: &[Option<RobotAction>; 2], tiers: [u8; 2]) -> BaseInput {
        let mut u = BaseInput::default();
        for (a, &tier) in actions.iter().zip(&tiers) {
            let unit = (self.control.input_unit * tier as f64).min(1.0);
            match a {
                Some(RobotAction::BaseForward) => u.u_f = unit,
                Some(RobotAction::BaseBackward) => u.u_b = unit,
                Some(RobotAction::TurnLeft) => u.u_l = unit,
                Some(RobotAction::TurnRight) => u.u_r = unit,
                _ => {}
            }
        }
        u
    }

    fn control_tick(&mut self, t_ms: u64, out: &mut Vec<Emitted>) {
        if !self.gesture_active {
            self.actuator = ActuatorCommand::default();
            self.authority = Authority::Idle;
            out.push(ev(
                "control",
                json!({ "authority": Authority::Idle, "v": 0.0, "omega": 0.0, "mu": 1.0 }),
            ));
            return;
        }
        let (actions, tiers) = match &self.last_cmd {
            Some(c) => (self.mapped(c), c.tier),
            None => ([None, None], [1, 1]),
        };
        let max = self.sim.params().max;
        let mut u = self.direct(&actions, tiers);
        if self.base_latch {
            if actions.iter().flatten().any(|a| a.is_base()) {
                u.base_forward = 0.0;
                u.base_rotate = 0.0;
            } else {
                self.base_latch = false;
            }
        }
        let mut authority = Authority::Direct;
        let pose = self.sim.state().pose;

        if self.room_mode && self.tracker.is_some() {
            let input = self.base_input(&actions, tiers);
            let (room, tracker) = self.tracker.as_mut().expect("checked");
            match tracker.track(&pose) {
                Ok(tr) if tr.reached => {
                    out.push(ev(
                        "arrived",
                        json!({ "room": room, "pose": [pose.x, pose.y, pose.theta] }),
                    ));
                    self.tracker = None;
                    self.room_mode = false;
                    self.base_latch = true;
                    out.push(ev("room_mode", json!({ "active": false })));
                    u.base_forward = 0.0;
                    u.base_rotate = 0.0;
                    authority = Authority::Room;
                }
                Ok(tr) => {
                    let (v, w) = room_blend(&input, &tr.velocity, &self.control.assist);
                    u.base_forward = v.clamp(-max.base, max.base);
                    u.base_rotate = w.clamp(-max.turn, max.turn);
                    authority = Authority::Room;
                }
                Err(e) => {
                    out.push(ev(
                        "room_abort",
                        json!({ "room": room, "reason": e.to_string() }),
                    ));
                    self.tracker = None;
                }
            }
        } else if let Some(target) = self.target {
            let (bx, by) = pose.to_body(target.position[0], target.position[1]);
            let age = t_ms.saturating_sub(target.detected_ms) as f64;
            let a = alignment_command(
                self.sim.state(),
                self.sim.params(),
                [bx, by, target.position[2]],
                target.confidence,
                age,
                &self.control.align,
            );
            if !a.stale {
                u = blend_alignment(&u, &a.u_a, a.alpha, &max).expect("alignment axes only");
                authority = Authority::Align;
            }
        }

        let scan = self.sim.scan();
        let g = govern(&scan, u.base_forward, &self.control.governor);
        if g.mu < 1.0 && u.base_forward != 0.0 {
            out.push(ev(
                "governor",
                json!({ "v_in": u.base_forward, "v_out": g.v, "mu": g.mu, "d": g.d, "nearby": g.nearby }),
            ));
        }
        if g.empty_scan && u.base_forward != 0.0 {
            log::warn!("governor: empty scan at t={t_ms}");
        }
        u.base_forward = g.v;
        self.actuator = u.to_actuator();
        self.authority = authority;
        out.push(ev(
            "control",
            json!({ "authority": authority, "v": u.base_forward, "omega": u.base_rotate, "mu": g.mu }),
        ));
    }

    fn on_detections(&mut self, dets: Vec<Detection>, out: &mut Vec<Emitted>) {
        let pose = self.sim.state().pose;
        if let Some(best) = dets.first() {
            let (x, y) = pose.to_world(best.centroid[0], best.centroid[1]);
            self.target = Some(AlignTarget {
                position: [x, y, best.centroid[2]],
                confidence: best.confidence,
                detected_ms: best.t_ms,
            });
        }
        out.push(ev(
            "detection",
            json!({
                "query": self.align_query,
                "detections": dets,
                "pose": [pose.x, pose.y, pose.theta],
            }),
        ));
    }

    /// One 10 ms physics step at `t_ms`, preceded by a control tick on
    /// command boundaries.
    pub fn step(&mut self, t_ms: u64) -> Vec<Emitted> {
        let mut out = Vec::new();
        if t_ms % COMMAND_PERIOD_MS == 0 {
            self.control_tick(t_ms, &mut out);
        }
        let report = self.sim.step(&self.actuator);
        if report.blocked && !self.blocked {
            let p = self.sim.state().pose;
            out.push(ev("blocked", json!({ "pose": [p.x, p.y, p.theta] })));
        }
        self.blocked = report.blocked;
        if let Some(g) = report.grasp {
            if matches!(g, GraspEvent::Grasped(_)) {
                self.clear_assist();
            }
            out.push(ev("grasp", serde_json::to_value(&g).expect("enum")));
        }
        if let Some(dets) = report.detections {
            self.on_detections(dets, &mut out);
        }
        out
    }

    pub fn pose(&self) -> Pose2 {
        self.sim.state().pose
    }

    pub fn mode_map(&self, mode: ControlMode) -> Value {
        let rows: Vec<Value> = self
            .actions
            .for_mode(mode)
            .into_iter()
            .map(|b| json!({ "arm": b.arm, "gesture": b.gesture, "action": b.action }))
            .collect();
        json!({ "mode": mode, "bindings": rows })
    }

    /// True while an arm's mapped action is the given one.
    pub fn action_active(&self, arm: Arm, action: RobotAction) -> bool {
        self.prev_action[arm.index()] == Some(action)
    }
}
