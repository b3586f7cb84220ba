//! Session orchestration: text commands, robot-side control, task timing,
//! hash-chained logs, replay and the console channel.

mod config;
mod console;
mod expert;
mod live;
mod log;
mod operator;
mod replay;
mod robot;
mod scenario;
mod session;
mod task;
mod text;

use thiserror::Error;

pub use self::log::{
    chain_hash, parse_log, read_log, verify_chain, LogRecord, SessionLog, GENESIS,
};
pub use config::{
    apply_room_goals, load_room_goals, ConsoleConfig, ControlConfig, ModelPaths, ServiceConfig,
};
pub use console::{
    from_record, heatmap_messages, parse_inbound, snapshot, ConsoleClient, ConsoleHub, ConsoleIn,
    ConsoleOut, StateSnapshot, TaskStatus,
};
pub use expert::{ExpertOperator, ExpertStyle, ExpertTask};
pub use live::{serve, serve_with, LiveOperator, Publisher, ServeOptions, KEY_HOLD_MS};
pub use operator::{
    classify_window, EmgOperator, IdleOperator, Operator, OperatorInput, OperatorView,
    ScriptOperator, ScriptStep, TaskMarker,
};
pub use replay::{replay, ReplayReport};
pub use robot::{AlignTarget, Authority, Emitted, RobotSide, ROBOT_KINDS};
pub use scenario::{OperatorSpec, Perturbation, Scenario};
pub use session::{load_models, run_headless, Session, SessionHeader, SessionOutcome};
pub use task::{Predicate, TaskResult, TaskSpec, TaskTimer, TimerStart};
pub use text::{parse_text, Intent};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("log: {0}")]
    Log(String),
    #[error("{0}")]
    Io(String),
    #[error("config: {0}")]
    Config(String),
    #[error("log chain broken at line {line}: {reason}")]
    ChainBroken { line: usize, reason: String },
    #[error("world hash mismatch: log has {logged}, world is {actual}")]
    WorldMismatch { logged: String, actual: String },
    #[error("replay diverged at t={t_ms}: {detail}")]
    Diverged { t_ms: u64, detail: String },
    #[error("model {path}: {reason}")]
    Model { path: String, reason: String },
    #[error("scenario: {0}")]
    Scenario(String),
}
