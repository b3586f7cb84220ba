use std::time::{Duration, Instant};

use serde_json::Value;

use super::config::apply_room_goals;
use super::log::{verify_chain, LogRecord};
use super::operator::TaskMarker;
use super::robot::{RobotSide, ROBOT_KINDS};
use super::session::SessionHeader;
use super::task::{TaskResult, TaskTimer};
use super::text::Intent;
use super::ServiceError;
use crate::intent::GestureCommand;
use crate::sim::{Pose2, Sim, World, STEP_MS};

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub end_ms: u64,
    pub final_bits: [u64; 9],
    pub final_pose: Pose2,
    /// Robot-side events regenerated and matched against the log.
    pub events_matched: usize,
    pub task: Option<TaskResult>,
}

fn bad(t_ms: u64, detail: impl Into<String>) -> ServiceError {
    ServiceError::Diverged {
        t_ms,
        detail: detail.into(),
    }
}

fn field<T: serde::de::DeserializeOwned>(r: &LogRecord, v: &Value) -> Result<T, ServiceError> {
    serde_json::from_value(v.clone())
        .map_err(|e| bad(r.t_ms, format!("bad {} payload: {e}", r.kind)))
}

fn regenerated(kind: &str) -> bool {
    ROBOT_KINDS.contains(&kind) || kind == "task_result"
}

/// Re-drives the robot side from the logged commands, intents and
/// perturbations and checks that every robot-side event and the final state
/// come out bit-identical. `speed` paces the run against the wall clock
/// (`Some(10.0)` is ten times real time); `None` runs flat out.
pub fn replay(
    records: &[LogRecord],
    mut world: World,
    speed: Option<f64>,
) -> Result<ReplayReport, ServiceError> {
    verify_chain(records)?;
    let first = records
        .first()
        .ok_or_else(|| ServiceError::Log("empty log".into()))?;
    if first.kind != "header" {
        return Err(ServiceError::Log("first record is not a header".into()));
    }
    let header: SessionHeader = field(first, &first.payload)?;
    let actual = world.hash();
    if actual != header.world_hash {
        return Err(ServiceError::WorldMismatch {
            logged: header.world_hash,
            actual,
        });
    }
    let end = records
        .last()
        .filter(|r| r.kind == "end")
        .ok_or_else(|| ServiceError::Log("log has no end record".into()))?;
    let goals = header
        .room_goals
        .iter()
        .map(|(k, g)| (k.clone(), Pose2::new(g[0], g[1], g[2])))
        .collect();
    apply_room_goals(&mut world, &goals)?;
    let cfg = &header.config;
    let mut robot = RobotSide::new(
        Sim::new(world, header.seed),
        cfg.control.clone(),
        cfg.intent.actions.clone(),
        cfg.intent.vocabulary.clone(),
    );
    let mut timer = header.scenario.task.clone().map(TaskTimer::new);

    let expected: Vec<&LogRecord> = records.iter().filter(|r| regenerated(&r.kind)).collect();
    let mut produced: Vec<(u64, String, Value)> = Vec::new();
    let mut next = 1;
    let started = Instant::now();
    let mut t = 0;
    while t < end.t_ms {
        while next < records.len() && records[next].t_ms == t {
            let r = &records[next];
            match r.kind.as_str() {
                "intent" => {
                    let intent: Intent = field(r, &r.payload)?;
                    produced.extend(
                        robot
                            .apply_intent(t, &intent)
                            .into_iter()
                            .map(|e| (t, e.kind, e.payload)),
                    );
                }
                "command" => {
                    let cmd: GestureCommand = field(r, &r.payload["command"])?;
                    robot.apply_command(&cmd);
                }
                "perturbation" => {
                    let object: String = field(r, &r.payload["object"])?;
                    let position: [f64; 3] = field(r, &r.payload["position"])?;
                    robot.move_object(&object, position);
                }
                "task_marker" => {
                    let marker: TaskMarker = field(r, &r.payload["marker"])?;
                    if let Some(tm) = timer.as_mut() {
                        let res = match marker {
                            TaskMarker::Start => {
                                tm.arm(t);
                                None
                            }
                            TaskMarker::Finish => tm.mark_finish(t, robot.sim()),
                        };
                        if let Some(res) = res {
                            produced.push((
                                t,
                                "task_result".into(),
                                serde_json::to_value(res).expect("result"),
                            ));
                        }
                    }
                }
                _ => {}
            }
            next += 1;
        }
        produced.extend(robot.step(t).into_iter().map(|e| (t, e.kind, e.payload)));
        if let Some(tm) = timer.as_mut() {
            if let Some(res) = tm.check(t, robot.sim()) {
                produced.push((
                    t,
                    "task_result".into(),
                    serde_json::to_value(res).expect("result"),
                ));
            }
        }
        t += STEP_MS;
        if let Some(s) = speed {
            let due = Duration::from_secs_f64(t as f64 / 1000.0 / s);
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                std::thread::sleep(wait);
            }
        }
    }

    for (i, (pt, kind, payload)) in produced.iter().enumerate() {
        let Some(e) = expected.get(i) else {
            return Err(bad(*pt, format!("extra `{kind}` event")));
        };
        if e.t_ms != *pt || &e.kind != kind || &e.payload != payload {
            return Err(bad(
                e.t_ms.min(*pt),
                format!(
                    "logged `{}` at {} but replay produced `{kind}` at {pt}",
                    e.kind, e.t_ms
                ),
            ));
        }
    }
    if produced.len() != expected.len() {
        let e = expected[produced.len()];
        return Err(bad(
            e.t_ms,
            format!("logged `{}` was not reproduced", e.kind),
        ));
    }
    let state = robot.sim().state();
    let logged_bits: [u64; 9] = field(end, &end.payload["state_bits"])?;
    if state.bits() != logged_bits {
        return Err(bad(end.t_ms, "final state differs"));
    }
    Ok(ReplayReport {
        end_ms: end.t_ms,
        final_bits: state.bits(),
        final_pose: state.pose,
        events_matched: produced.len(),
        task: timer.and_then(|tm| tm.result().cloned()),
    })
}
