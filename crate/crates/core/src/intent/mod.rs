//! Temporal filtering of per-window predictions into debounced 10 Hz
//! gesture commands, plus mode switching and the gesture-to-action table.

mod actions;
mod emitter;
mod filter;
mod mode;

pub use actions::{
    map_action, speed_tier, ActionBinding, ActionTable, HoldTimer, MappedActions, RobotAction,
    FAST_AFTER_MS,
};
pub use emitter::{
    CommandAssembler, GestureCommand, IntentConfig, LabelInput, UdpCommandReceiver,
    UdpCommandSender, WindowResult, COMMAND_PERIOD_MS, LABEL_PERIOD_MS, MAX_DATAGRAM,
    STALE_AFTER_MS,
};
pub use filter::{
    ema_update, gate, ArmFilter, ArmStep, VoteBuffer, EMA_ALPHA, GATE_THRESHOLD, VOTE_LEN,
    VOTE_QUORUM,
};
pub use mode::{ControlMode, ModeMachine, MODE_HOLD_MS};
