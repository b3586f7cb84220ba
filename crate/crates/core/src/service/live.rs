use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, Receiver, Sender, TryRecvError, TrySendError};
use serde_json::{json, Value};

use super::config::ServiceConfig;
use super::console::{from_record, heatmap_messages, snapshot, ConsoleHub, ConsoleIn, ConsoleOut};
use super::log::SessionLog;
use super::operator::{classify_window, Operator, OperatorInput, OperatorView};
use super::scenario::Scenario;
use super::session::{load_models, Session, SessionOutcome};
use super::ServiceError;
use crate::dsp::{Heatmap, Preprocessor};
use crate::gesture::Gesture;
use crate::intent::{LabelInput, COMMAND_PERIOD_MS, LABEL_PERIOD_MS};
use crate::ml::ArmModel;
use crate::sim::World;
use crate::stream::{consume_stream, SleeveLayout, StreamEvent};

/// A keyboard hold lapses when no refresh arrives for this long.
pub const KEY_HOLD_MS: u64 = 120;
const EMG_QUEUE: usize = 16;
/// Wall-clock lag behind the simulated clock that counts as a missed rate.
const LAG_BUDGET_MS: f64 = 100.0;

enum EmgMsg {
    Window {
        inputs: [LabelInput; 2],
        maps: Option<[Heatmap; 2]>,
        /// Windows lost to a full queue since the previous message.
        dropped: u64,
    },
    Fault {
        stage: &'static str,
        detail: Value,
    },
}

fn push(tx: &Sender<EmgMsg>, msg: EmgMsg, dropped: &mut u64) -> bool {
    match tx.try_send(msg) {
        Ok(()) => {
            *dropped = 0;
            true
        }
        Err(TrySendError::Full(_)) => {
            *dropped += 1;
            true
        }
        Err(TrySendError::Disconnected(_)) => false,
    }
}

/// Stream ingest, preprocessing and classification on their own thread.
fn spawn_emg_worker(
    endpoint: String,
    models: [ArmModel; 2],
) -> Result<Receiver<EmgMsg>, ServiceError> {
    let consumer = consume_stream(endpoint.as_str())
        .map_err(|e| ServiceError::Io(format!("stream {endpoint}: {e}")))?;
    let (tx, rx) = bounded(EMG_QUEUE);
    thread::Builder::new()
        .name("emg-ingest".into())
        .spawn(move || {
            let mut pre = Preprocessor::default();
            let layout = SleeveLayout::default();
            let mut dropped = 0u64;
            for ev in consumer {
                let msg = match ev {
                    StreamEvent::Frame(f) => {
                        for w in pre.push_frame(&f) {
                            let msg = match classify_window(&w, &layout, &models) {
                                Ok((inputs, maps)) => EmgMsg::Window {
                                    inputs,
                                    maps,
                                    dropped,
                                },
                                Err(e) => EmgMsg::Fault {
                                    stage: "classifier",
                                    detail: json!(e.to_string()),
                                },
                            };
                            if !push(&tx, msg, &mut dropped) {
                                return;
                            }
                        }
                        continue;
                    }
                    StreamEvent::Dropout { expected, got } => EmgMsg::Fault {
                        stage: "stream",
                        detail: json!({ "lost_from": expected, "lost_to": got }),
                    },
                    StreamEvent::Ended { reason } => EmgMsg::Fault {
                        stage: "stream",
                        detail: json!({ "ended": reason }),
                    },
                };
                if !push(&tx, msg, &mut dropped) {
                    return;
                }
            }
        })
        .map_err(|e| ServiceError::Io(e.to_string()))?;
    Ok(rx)
}

/// Operator fed by console clients and, optionally, a live EMG stream.
/// Held keyboard labels take precedence over EMG windows.
pub struct LiveOperator {
    inbound: Receiver<ConsoleIn>,
    emg: Option<Receiver<EmgMsg>>,
    keys: Option<(Gesture, Gesture, u64)>,
}

impl LiveOperator {
    pub fn new(inbound: Receiver<ConsoleIn>) -> Self {
        Self {
            inbound,
            emg: None,
            keys: None,
        }
    }

    /// Connects to an EMG stream and classifies it with `models`.
    pub fn with_stream(
        mut self,
        endpoint: &str,
        models: [ArmModel; 2],
    ) -> Result<Self, ServiceError> {
        self.emg = Some(spawn_emg_worker(endpoint.to_string(), models)?);
        Ok(self)
    }

    fn held(&self, t_ms: u64) -> Option<(Gesture, Gesture)> {
        self.keys
            .filter(|&(_, _, at)| t_ms.saturating_sub(at) <= KEY_HOLD_MS)
            .map(|(l, r, _)| (l, r))
    }
}

impl Operator for LiveOperator {
    fn poll(&mut self, t_ms: u64, _: &OperatorView) -> OperatorInput {
        let mut out = OperatorInput::default();
        for msg in self.inbound.try_iter() {
            match msg {
                ConsoleIn::TextCommand { text } => out.texts.push(text),
                ConsoleIn::TaskMarker { marker } => out.markers.push(marker),
                ConsoleIn::KeyboardGesture { left, right } => self.keys = Some((left, right, t_ms)),
            }
        }
        let held = self.held(t_ms);
        if let Some(rx) = &self.emg {
            // At most one window per step keeps the label stage in order.
            loop {
                match rx.try_recv() {
                    Ok(EmgMsg::Fault { stage, detail }) => {
                        out.degradations.push((stage.into(), detail))
                    }
                    Ok(EmgMsg::Window {
                        inputs,
                        maps,
                        dropped,
                    }) => {
                        if dropped > 0 {
                            out.degradations
                                .push(("classifier".into(), json!({ "windows_dropped": dropped })));
                        }
                        if held.is_none() {
                            out.window = Some(inputs);
                            out.heatmaps = maps;
                        }
                        break;
                    }
                    Err(TryRecvError::Empty) => break,
                    Err(TryRecvError::Disconnected) => {
                        out.degradations
                            .push(("stream".into(), json!("ingest worker stopped")));
                        self.emg = None;
                        break;
                    }
                }
            }
        }
        if t_ms % LABEL_PERIOD_MS == 0 {
            if let Some((l, r)) = held {
                out.window = Some([LabelInput::Label(l), LabelInput::Label(r)]);
            } else if self.emg.is_none() {
                out.window = Some([
                    LabelInput::Label(Gesture::Rest),
                    LabelInput::Label(Gesture::Rest),
                ]);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    /// Hash-chained JSONL written as the session runs.
    pub log_path: Option<PathBuf>,
    /// Simulated seconds per wall second.
    pub speed: f64,
    /// Set to end the session early.
    pub stop: Option<Arc<AtomicBool>>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            log_path: None,
            speed: 1.0,
            stop: None,
        }
    }
}

/// Publishes session output to console clients.
pub struct Publisher {
    hub: ConsoleHub,
    sent: usize,
    heatmap_index: Option<u64>,
}

impl Publisher {
    pub fn new(hub: ConsoleHub) -> Self {
        Self {
            hub,
            sent: 0,
            heatmap_index: None,
        }
    }

    pub fn hub(&self) -> &ConsoleHub {
        &self.hub
    }

    /// Sends log records appended since the last call, fresh heatmaps and,
    /// on command ticks, a state snapshot.
    pub fn publish(&mut self, session: &Session) {
        let records = session.records();
        for rec in &records[self.sent.min(records.len())..] {
            for m in from_record(rec, session.robot()) {
                self.hub.broadcast(&m);
            }
        }
        self.sent = records.len();
        if let Some(maps) = session.heatmaps() {
            let idx = maps[0].window_start_index;
            if self.heatmap_index != Some(idx) {
                self.heatmap_index = Some(idx);
                for m in heatmap_messages(session.t_ms(), maps) {
                    self.hub.broadcast(&m);
                }
            }
        }
        if session.t_ms() % COMMAND_PERIOD_MS == 0 {
            self.hub.broadcast(&ConsoleOut::State(snapshot(session)));
        }
    }
}

/// Runs a live session against the wall clock with the console attached.
/// The scenario's operator is replaced by console and stream input.
pub fn serve(
    config: ServiceConfig,
    world: World,
    scenario: Scenario,
    seed: u64,
    opts: ServeOptions,
) -> Result<(SessionOutcome, SessionLog), ServiceError> {
    let (hub, inbound) =
        ConsoleHub::bind(&config.console).map_err(|e| ServiceError::Io(format!("console: {e}")))?;
    if let Some(a) = hub.tcp_addr() {
        log::info!("console tcp on {a}");
    }
    if let Some(a) = hub.ws_addr() {
        log::info!("console websocket on {a}");
    }
    serve_with(
        config,
        world,
        scenario,
        seed,
        opts,
        Publisher::new(hub),
        inbound,
    )
}

/// [`serve`] with an already bound console.
pub fn serve_with(
    config: ServiceConfig,
    world: World,
    scenario: Scenario,
    seed: u64,
    opts: ServeOptions,
    mut publisher: Publisher,
    inbound: Receiver<ConsoleIn>,
) -> Result<(SessionOutcome, SessionLog), ServiceError> {
    if !(opts.speed > 0.0) {
        return Err(ServiceError::Config(format!(
            "speed must be positive, got {}",
            opts.speed
        )));
    }
    let mut operator = LiveOperator::new(inbound);
    if let Some(endpoint) = &config.stream_endpoint {
        let models = load_models(&config)?;
        operator = operator.with_stream(endpoint, models)?;
    }
    let log = match &opts.log_path {
        Some(p) => {
            SessionLog::to_file(p).map_err(|e| ServiceError::Io(format!("{}: {e}", p.display())))?
        }
        None => SessionLog::new(),
    };
    let mut session =
        Session::with_operator(config, world, scenario, seed, log, Box::new(operator))?;
    session.set_live(true);
    let mode = session.assembler().mode();
    publisher.hub().broadcast(&ConsoleOut::Mode {
        t_ms: 0,
        mode,
        source: "initial".into(),
        mapping: session.robot().mode_map(mode),
    });
    let start = Instant::now();
    let mut last_lag_report: Option<u64> = None;
    while !session.is_done()
        && !opts
            .stop
            .as_ref()
            .is_some_and(|s| s.load(Ordering::Relaxed))
    {
        session.step()?;
        publisher.publish(&session);
        let t = session.t_ms();
        let due = Duration::from_secs_f64(t as f64 / 1000.0 / opts.speed);
        let now = start.elapsed();
        if let Some(wait) = due.checked_sub(now) {
            thread::sleep(wait);
        } else {
            let lag = (now - due).as_secs_f64() * 1000.0;
            if lag > LAG_BUDGET_MS && last_lag_report.is_none_or(|at| t >= at + 1000) {
                last_lag_report = Some(t);
                session.degradation("control", json!({ "lag_ms": lag }))?;
            }
        }
    }
    session.finish()
}
