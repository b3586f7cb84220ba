use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use super::config::{apply_room_goals, load_room_goals, ServiceConfig};
use super::expert::ExpertOperator;
use super::log::{LogRecord, SessionLog};
use super::operator::{
    EmgOperator, IdleOperator, Operator, OperatorInput, OperatorView, ScriptOperator, TaskMarker,
};
use super::robot::{Emitted, RobotSide};
use super::scenario::{OperatorSpec, Perturbation, Scenario};
use super::task::{TaskResult, TaskTimer};
use super::text::{parse_text, Intent};
use super::ServiceError;
use crate::dsp::Heatmap;
use crate::gesture::Arm;
use crate::intent::{
    CommandAssembler, GestureCommand, LabelInput, UdpCommandSender, WindowResult, COMMAND_PERIOD_MS,
};
use crate::ml::{load_model, ArmModel};
use crate::sim::{Pose2, Sim, World, STEP_MS};

/// Resolved session inputs, recorded in the log header so a replay can
/// rebuild the robot side.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SessionHeader {
    pub world_hash: String,
    pub seed: u64,
    pub config: ServiceConfig,
    pub scenario: Scenario,
    /// Room goal overrides applied on top of the world file.
    pub room_goals: BTreeMap<String, [f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub end_ms: u64,
    pub task: Option<TaskResult>,
    pub final_bits: [u64; 9],
    pub final_pose: Pose2,
    pub commands: u64,
}

pub fn load_models(config: &ServiceConfig) -> Result<[ArmModel; 2], ServiceError> {
    let paths = config.models.as_ref().ok_or_else(|| ServiceError::Model {
        path: "<unset>".into(),
        reason: "config has no `models` entry".into(),
    })?;
    let load = |arm: Arm, p: &Path| -> Result<ArmModel, ServiceError> {
        if !p.exists() {
            return Err(ServiceError::Model {
                path: p.display().to_string(),
                reason: "file not found".into(),
            });
        }
        let m = load_model(p).map_err(|e| ServiceError::Model {
            path: p.display().to_string(),
            reason: e.to_string(),
        })?;
        if m.arm != arm {
            return Err(ServiceError::Model {
                path: p.display().to_string(),
                reason: format!("model is for the {} arm, expected {arm}", m.arm),
            });
        }
        Ok(m)
    };
    Ok([
        load(Arm::Left, &paths.left)?,
        load(Arm::Right, &paths.right)?,
    ])
}

fn operator_for(
    config: &ServiceConfig,
    scenario: &Scenario,
    seed: u64,
) -> Result<Box<dyn Operator>, ServiceError> {
    Ok(match &scenario.operator {
        OperatorSpec::Idle => Box::new(IdleOperator),
        OperatorSpec::Script { steps } => Box::new(ScriptOperator::new(steps.clone())),
        OperatorSpec::Expert { style, task } => Box::new(ExpertOperator::new(*style, task.clone())),
        OperatorSpec::Emg { schedule, script } => Box::new(EmgOperator::new(
            schedule.clone(),
            script.clone(),
            load_models(config)?,
            seed,
            scenario.duration_ms,
        )?),
    })
}

/// One teleoperation session on a simulated clock. Each [`Session::step`]
/// covers 10 ms: operator input, text handling, the label stage, the 10 Hz
/// command tick and one physics step, all logged.
pub struct Session {
    header: SessionHeader,
    assembler: CommandAssembler,
    robot: RobotSide,
    log: SessionLog,
    timer: Option<TaskTimer>,
    operator: Box<dyn Operator>,
    udp: Option<UdpCommandSender>,
    t_ms: u64,
    last_window_ms: Option<u64>,
    window_wall: Option<Instant>,
    live: bool,
    heatmaps: Option<[Heatmap; 2]>,
    commands: u64,
    done: bool,
}

impl Session {
    pub fn new(
        config: ServiceConfig,
        world: World,
        scenario: Scenario,
        seed: u64,
        log: SessionLog,
    ) -> Result<Self, ServiceError> {
        let operator = operator_for(&config, &scenario, seed)?;
        Self::with_operator(config, world, scenario, seed, log, operator)
    }

    pub fn with_operator(
        config: ServiceConfig,
        mut world: World,
        scenario: Scenario,
        seed: u64,
        mut log: SessionLog,
        operator: Box<dyn Operator>,
    ) -> Result<Self, ServiceError> {
        scenario.validate()?;
        let world_hash = world.hash();
        let goals = match &config.room_goals {
            Some(p) => load_room_goals(p)?,
            None => BTreeMap::new(),
        };
        apply_room_goals(&mut world, &goals)?;
        let udp = match &config.command_udp {
            Some(addr) => Some(
                UdpCommandSender::connect(addr)
                    .map_err(|e| ServiceError::Io(format!("udp {addr}: {e}")))?,
            ),
            None => None,
        };
        let header = SessionHeader {
            world_hash,
            seed,
            config: config.clone(),
            scenario: scenario.clone(),
            room_goals: goals
                .iter()
                .map(|(k, p)| (k.clone(), [p.x, p.y, p.theta]))
                .collect(),
        };
        log.append(0, "header", serde_json::to_value(&header).expect("header"))?;
        let robot = RobotSide::new(
            Sim::new(world, seed),
            config.control.clone(),
            config.intent.actions.clone(),
            config.intent.vocabulary.clone(),
        );
        Ok(Self {
            assembler: CommandAssembler::with_config(config.intent.clone()),
            robot,
            log,
            timer: scenario.task.clone().map(TaskTimer::new),
            operator,
            udp,
            t_ms: 0,
            last_window_ms: None,
            window_wall: None,
            live: false,
            heatmaps: None,
            commands: 0,
            done: false,
            header,
        })
    }

    /// Wall-clock latency is added to command events in live sessions.
    pub fn set_live(&mut self, live: bool) {
        self.live = live;
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn t_ms(&self) -> u64 {
        self.t_ms
    }

    pub fn robot(&self) -> &RobotSide {
        &self.robot
    }

    pub fn assembler(&self) -> &CommandAssembler {
        &self.assembler
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn records(&self) -> &[LogRecord] {
        self.log.records()
    }

    pub fn heatmaps(&self) -> Option<&[Heatmap; 2]> {
        self.heatmaps.as_ref()
    }

    pub fn task(&self) -> Option<&TaskResult> {
        self.timer.as_ref().and_then(|t| t.result())
    }

    pub fn udp(&self) -> Option<&UdpCommandSender> {
        self.udp.as_ref()
    }

    /// The scenario's duration elapsed, or the task ended a stop-on-task run.
    pub fn is_done(&self) -> bool {
        self.done || self.t_ms >= self.header.scenario.duration_ms
    }

    fn append(&mut self, kind: &str, payload: Value) -> Result<(), ServiceError> {
        self.log.append(self.t_ms, kind, payload).map(|_| ())
    }

    fn append_emitted(&mut self, events: Vec<Emitted>) -> Result<(), ServiceError> {
        for e in events {
            self.append(&e.kind, e.payload)?;
        }
        Ok(())
    }

    /// Logs a runtime fault of a named pipeline stage.
    pub fn degradation(&mut self, stage: &str, detail: Value) -> Result<(), ServiceError> {
        self.append("degradation", json!({ "stage": stage, "detail": detail }))
    }

    pub fn handle_text(&mut self, text: &str) -> Result<Intent, ServiceError> {
        let t = self.t_ms;
        self.append("text", json!({ "text": text }))?;
        let intent = parse_text(text);
        self.append("intent", serde_json::to_value(&intent).expect("intent"))?;
        if intent == Intent::NextMode {
            let mode = self.assembler.next_mode(t);
            self.append("mode", json!({ "mode": mode, "source": "text" }))?;
        }
        let events = self.robot.apply_intent(t, &intent);
        self.append_emitted(events)?;
        Ok(intent)
    }

    pub fn handle_marker(&mut self, marker: TaskMarker) -> Result<(), ServiceError> {
        let t = self.t_ms;
        self.append("task_marker", json!({ "marker": marker }))?;
        let Some(timer) = self.timer.as_mut() else {
            return Ok(());
        };
        let result = match marker {
            TaskMarker::Start => {
                timer.arm(t);
                None
            }
            TaskMarker::Finish => timer.mark_finish(t, self.robot.sim()),
        };
        if let Some(r) = result {
            self.task_result(r)?;
        }
        Ok(())
    }

    fn task_result(&mut self, r: TaskResult) -> Result<(), ServiceError> {
        self.append("task_result", serde_json::to_value(&r).expect("result"))?;
        if self.header.scenario.stop_on_task {
            self.done = true;
        }
        Ok(())
    }

    fn on_window(&mut self, mut inputs: [LabelInput; 2]) -> Result<WindowResult, ServiceError> {
        let t = self.t_ms;
        for arm in Arm::BOTH {
            if self.header.scenario.dropped(arm, t) {
                inputs[arm.index()] = LabelInput::Missing;
            }
        }
        let [l, r] = inputs;
        let res = self.assembler.on_window(t, l, r);
        for arm in Arm::BOTH {
            match &res.steps[arm.index()] {
                Some(step) => self.append(
                    "window",
                    json!({ "arm": arm, "gated": step.gated, "voted": step.voted, "smoothed": step.smoothed }),
                )?,
                None => self.append("dropout", json!({ "arm": arm }))?,
            }
        }
        if let Some(mode) = res.mode_change {
            self.append("mode", json!({ "mode": mode, "source": "gesture" }))?;
        }
        self.last_window_ms = Some(t);
        if self.live {
            self.window_wall = Some(Instant::now());
        }
        Ok(res)
    }

    fn command_tick(&mut self) -> Result<GestureCommand, ServiceError> {
        let t = self.t_ms;
        let cmd = self.assembler.tick(t);
        let mut payload = json!({
            "command": cmd,
            "latency_ms": self.last_window_ms.map(|w| t - w),
        });
        if let Some(w) = self.window_wall {
            payload["wall_latency_ms"] = json!(w.elapsed().as_secs_f64() * 1000.0);
        }
        self.append("command", payload)?;
        self.commands += 1;
        if let Some(udp) = self.udp.as_mut() {
            if let Err(e) = udp.send(cmd.clone()) {
                log::warn!("udp send failed: {e}");
            }
        }
        self.robot.apply_command(&cmd);
        Ok(cmd)
    }

    /// Applies operator input for the current step without advancing time.
    pub fn apply_input(&mut self, input: OperatorInput) -> Result<(), ServiceError> {
        for (stage, detail) in input.degradations {
            self.degradation(&stage, detail)?;
        }
        for text in input.texts {
            self.handle_text(&text)?;
        }
        for m in input.markers {
            self.handle_marker(m)?;
        }
        if input.heatmaps.is_some() {
            self.heatmaps = input.heatmaps;
        }
        if let Some(w) = input.window {
            self.on_window(w)?;
        }
        Ok(())
    }

    fn perturb(&mut self) -> Result<(), ServiceError> {
        let t = self.t_ms;
        let moves: Vec<(String, [f64; 3])> = self
            .header
            .scenario
            .perturbations
            .iter()
            .filter_map(|p| match p {
                Perturbation::MoveObject {
                    at_ms,
                    object,
                    position,
                } if *at_ms == t => Some((object.clone(), *position)),
                _ => None,
            })
            .collect();
        for (object, position) in moves {
            let moved = self.robot.move_object(&object, position);
            self.append(
                "perturbation",
                json!({ "type": "move_object", "object": object, "position": position, "applied": moved }),
            )?;
        }
        Ok(())
    }

    /// Advances 10 ms, taking input from the session's operator.
    pub fn step(&mut self) -> Result<(), ServiceError> {
        let view = OperatorView {
            robot: &self.robot,
            mode: self.assembler.mode(),
        };
        let input = self.operator.poll(self.t_ms, &view);
        self.step_with(input)
    }

    /// Advances 10 ms with externally supplied input (live sessions).
    pub fn step_with(&mut self, input: OperatorInput) -> Result<(), ServiceError> {
        if self.is_done() {
            return Ok(());
        }
        self.perturb()?;
        self.apply_input(input)?;
        if self.t_ms % COMMAND_PERIOD_MS == 0 {
            self.command_tick()?;
        }
        let events = self.robot.step(self.t_ms);
        self.append_emitted(events)?;
        if let Some(timer) = self.timer.as_mut() {
            if let Some(r) = timer.check(self.t_ms, self.robot.sim()) {
                self.task_result(r)?;
            }
        }
        self.t_ms += STEP_MS;
        Ok(())
    }

    /// Writes the closing record and flushes the log.
    pub fn finish(mut self) -> Result<(SessionOutcome, SessionLog), ServiceError> {
        let state = *self.robot.sim().state();
        let outcome = SessionOutcome {
            end_ms: self.t_ms,
            task: self.task().cloned(),
            final_bits: state.bits(),
            final_pose: state.pose,
            commands: self.commands,
        };
        self.append(
            "end",
            json!({
                "state_bits": state.bits(),
                "pose": [state.pose.x, state.pose.y, state.pose.theta],
                "task": outcome.task,
                "commands": self.commands,
                "udp": self.udp.as_ref().map(|u| json!({ "sent": u.sent(), "lost": u.lost() })),
            }),
        )?;
        self.log
            .flush()
            .map_err(|e| ServiceError::Io(e.to_string()))?;
        Ok((outcome, self.log))
    }

    /// Runs to completion on the simulated clock.
    pub fn run(mut self) -> Result<(SessionOutcome, SessionLog), ServiceError> {
        while !self.is_done() {
            self.step()?;
        }
        self.finish()
    }
}

/// Headless run with an in-memory log.
pub fn run_headless(
    config: ServiceConfig,
    world: World,
    scenario: Scenario,
    seed: u64,
) -> Result<(SessionOutcome, SessionLog), ServiceError> {
    Session::new(config, world, scenario, seed, SessionLog::new())?.run()
}
