use serde::{Deserialize, Serialize};

use crate::sim::Sim;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Predicate {
    Grasped { object: String },
    InRoom { room: String },
    Near { x: f64, y: f64, tolerance: f64 },
    All { of: Vec<Predicate> },
    Any { of: Vec<Predicate> },
}

impl Predicate {
    pub fn holds(&self, sim: &Sim) -> bool {
        match self {
            Predicate::Grasped { object } => sim.scene().held().is_some_and(|o| &o.id == object),
            Predicate::InRoom { room } => sim.room().is_some_and(|r| r.eq_ignore_ascii_case(room)),
            Predicate::Near { x, y, tolerance } => {
                sim.state().pose.distance_to(*x, *y) <= *tolerance
            }
            Predicate::All { of } => of.iter().all(|p| p.holds(sim)),
            Predicate::Any { of } => of.iter().any(|p| p.holds(sim)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimerStart {
    /// At session start.
    Session,
    /// On a `start` task marker.
    Marker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub goal: Predicate,
    #[serde(default = "default_start")]
    pub start: TimerStart,
    #[serde(default)]
    pub timeout_ms: Option<u64>,
}

fn default_start() -> TimerStart {
    TimerStart::Session
}

impl TaskSpec {
    /// Cup in hand, back in the bedroom.
    pub fn drink() -> Self {
        Self {
            name: "drink".into(),
            goal: Predicate::All {
                of: vec![
                    Predicate::Grasped {
                        object: "cup".into(),
                    },
                    Predicate::InRoom {
                        room: "bedroom".into(),
                    },
                ],
            },
            start: TimerStart::Session,
            timeout_ms: Some(600_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub name: String,
    pub completed: bool,
    pub started_ms: u64,
    pub elapsed_ms: u64,
    pub elapsed_s: f64,
    /// Control ticks (100 ms) elapsed.
    pub ticks: u64,
}

/// Runs from arm time to the first tick where the goal holds.
#[derive(Debug, Clone)]
pub struct TaskTimer {
    spec: TaskSpec,
    started: Option<u64>,
    result: Option<TaskResult>,
}

impl TaskTimer {
    pub fn new(spec: TaskSpec) -> Self {
        let started = (spec.start == TimerStart::Session).then_some(0);
        Self {
            spec,
            started,
            result: None,
        }
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    pub fn result(&self) -> Option<&TaskResult> {
        self.result.as_ref()
    }

    pub fn arm(&mut self, t_ms: u64) {
        if self.result.is_none() {
            self.started = Some(t_ms);
        }
    }

    fn finish(&mut self, t_ms: u64, started: u64, completed: bool) -> Option<TaskResult> {
        let elapsed_ms = t_ms - started;
        let r = TaskResult {
            name: self.spec.name.clone(),
            completed,
            started_ms: started,
            elapsed_ms,
            elapsed_s: elapsed_ms as f64 / 1000.0,
            ticks: elapsed_ms / 100,
        };
        self.result = Some(r.clone());
        Some(r)
    }

    /// Evaluates at `t_ms`; returns the result once, when decided.
    pub fn check(&mut self, t_ms: u64, sim: &Sim) -> Option<TaskResult> {
        let started = self.started?;
        if self.result.is_some() {
            return None;
        }
        if self.spec.goal.holds(sim) {
            return self.finish(t_ms, started, true);
        }
        if self
            .spec
            .timeout_ms
            .is_some_and(|limit| t_ms - started >= limit)
        {
            return self.finish(t_ms, started, false);
        }
        None
    }

    /// Manual finish marker: records the current state of the goal.
    pub fn mark_finish(&mut self, t_ms: u64, sim: &Sim) -> Option<TaskResult> {
        let started = self.started?;
        if self.result.is_some() {
            return None;
        }
        let done = self.spec.goal.holds(sim);
        self.finish(t_ms, started, done)
    }
}
