use std::io;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::actions::{speed_tier, ActionTable, HoldTimer};
use super::filter::{ArmFilter, ArmStep, EMA_ALPHA, GATE_THRESHOLD};
use super::mode::{ControlMode, ModeMachine, MODE_HOLD_MS};
use crate::gesture::{default_vocabulary, Arm, Gesture};

pub const LABEL_PERIOD_MS: u64 = 40;
pub const COMMAND_PERIOD_MS: u64 = 100;
pub const STALE_AFTER_MS: u64 = 500;
pub const MAX_DATAGRAM: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntentConfig {
    pub ema_alpha: f64,
    pub gate_threshold: f64,
    pub mode_hold_ms: u64,
    pub stale_after_ms: u64,
    pub vocabulary: [Vec<Gesture>; 2],
    pub actions: ActionTable,
}

impl Default for IntentConfig {
    fn default() -> Self {
        Self {
            ema_alpha: EMA_ALPHA,
            gate_threshold: GATE_THRESHOLD,
            mode_hold_ms: MODE_HOLD_MS,
            stale_after_ms: STALE_AFTER_MS,
            vocabulary: [
                default_vocabulary(Arm::Left),
                default_vocabulary(Arm::Right),
            ],
            actions: ActionTable::default(),
        }
    }
}

/// One command datagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GestureCommand {
    pub seq: u64,
    pub t_ms: u64,
    pub mode: ControlMode,
    pub left: Gesture,
    pub right: Gesture,
    /// Speed multiplier per arm, `[left, right]`.
    pub tier: [u8; 2],
    pub stale: bool,
}

impl GestureCommand {
    pub fn label(&self, arm: Arm) -> Gesture {
        match arm {
            Arm::Left => self.left,
            Arm::Right => self.right,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

/// Per-window input for one arm.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelInput {
    /// Classifier output; runs EMA, gate and vote.
    Probs(Vec<f64>),
    /// Label-stage injection (keyboard, script); runs the vote only.
    Label(Gesture),
    /// Invalid window; nothing is pushed.
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub steps: [Option<ArmStep>; 2],
    pub mode_change: Option<ControlMode>,
}

/// Turns per-arm label streams into 10 Hz commands.
#[derive(Debug, Clone)]
pub struct CommandAssembler {
    config: IntentConfig,
    filters: [ArmFilter; 2],
    mode: ModeMachine,
    gated: [Gesture; 2],
    holds: [HoldTimer; 2],
    last_input_ms: u64,
    seq: u64,
}

impl CommandAssembler {
    pub fn new(
        config: IntentConfig,
        left_labels: Vec<Gesture>,
        right_labels: Vec<Gesture>,
    ) -> Self {
        let f = |labels| ArmFilter::new(labels, config.ema_alpha, config.gate_threshold);
        Self {
            filters: [f(left_labels), f(right_labels)],
            mode: ModeMachine::new(ControlMode::ArmDrive, config.mode_hold_ms),
            gated: [Gesture::Rest; 2],
            holds: [HoldTimer::default(); 2],
            last_input_ms: 0,
            seq: 0,
            config,
        }
    }

    /// Assembler whose classifiers emit the configured vocabularies.
    pub fn with_config(config: IntentConfig) -> Self {
        let [l, r] = config.vocabulary.clone();
        Self::new(config, l, r)
    }

    pub fn config(&self) -> &IntentConfig {
        &self.config
    }

    pub fn mode(&self) -> ControlMode {
        self.mode.mode()
    }

    pub fn voted(&self, arm: Arm) -> Gesture {
        self.filters[arm.index()].voted().unwrap_or(Gesture::Rest)
    }

    pub fn gated(&self, arm: Arm) -> Gesture {
        self.gated[arm.index()]
    }

    /// Feeds one window period. The mode trigger watches the gated labels;
    /// actions only ever see voted labels.
    pub fn on_window(&mut self, t_ms: u64, left: LabelInput, right: LabelInput) -> WindowResult {
        let mut steps = [None, None];
        for (arm, input) in [(Arm::Left, left), (Arm::Right, right)] {
            let i = arm.index();
            let step = match input {
                LabelInput::Probs(p) => self.filters[i].push_probs(&p),
                LabelInput::Label(g) => self.filters[i].push_label(g),
                LabelInput::Missing => continue,
            };
            self.gated[i] = step.gated;
            self.holds[i].update(t_ms, step.voted.unwrap_or(Gesture::Rest));
            self.last_input_ms = t_ms;
            steps[i] = Some(step);
        }
        let mode_change = self.mode.step(t_ms, self.gated[0], self.gated[1]);
        WindowResult { steps, mode_change }
    }

    pub fn next_mode(&mut self, t_ms: u64) -> ControlMode {
        self.mode.advance(t_ms)
    }

    /// Builds the command for the control tick at `t_ms`.
    pub fn tick(&mut self, t_ms: u64) -> GestureCommand {
        self.seq += 1;
        let stale = t_ms.saturating_sub(self.last_input_ms) >= self.config.stale_after_ms;
        let mode = self.mode.mode();
        let mut labels = [Gesture::Rest; 2];
        let mut tier = [1u8; 2];
        if !stale {
            for arm in Arm::BOTH {
                let i = arm.index();
                labels[i] = self.voted(arm);
                if let Some(a) = self.config.actions.lookup(mode, arm, labels[i]) {
                    tier[i] = speed_tier(a, self.holds[i].held_ms(t_ms));
                }
            }
        }
        GestureCommand {
            seq: self.seq,
            t_ms,
            mode,
            left: labels[0],
            right: labels[1],
            tier,
            stale,
        }
    }
}

/// Fire-and-forget command sender. An undeliverable command is kept until
/// the next send; a newer command replaces it and the old one counts as lost.
pub struct UdpCommandSender {
    socket: UdpSocket,
    pending: Option<GestureCommand>,
    sent: u64,
    lost: u64,
}

fn undeliverable(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::WouldBlock
            | io::ErrorKind::ConnectionRefused
            | io::ErrorKind::NetworkUnreachable
    )
}

impl UdpCommandSender {
    pub fn connect<A: ToSocketAddrs>(target: A) -> io::Result<Self> {
        let socket = UdpSocket::bind(("0.0.0.0", 0))?;
        socket.connect(target)?;
        socket.set_nonblocking(true)?;
        Ok(Self {
            socket,
            pending: None,
            sent: 0,
            lost: 0,
        })
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn lost(&self) -> u64 {
        self.lost
    }

    pub fn pending(&self) -> Option<&GestureCommand> {
        self.pending.as_ref()
    }

    /// Returns whether `cmd` left the socket.
    pub fn send(&mut self, cmd: GestureCommand) -> io::Result<bool> {
        if self.pending.take().is_some() {
            self.lost += 1;
        }
        self.try_send(cmd)
    }

    /// Retries the buffered command, if any.
    pub fn flush(&mut self) -> io::Result<bool> {
        match self.pending.take() {
            Some(cmd) => self.try_send(cmd),
            None => Ok(true),
        }
    }

    fn try_send(&mut self, cmd: GestureCommand) -> io::Result<bool> {
        let json = cmd.to_json();
        debug_assert!(json.len() <= MAX_DATAGRAM);
        match self.socket.send(json.as_bytes()) {
            Ok(_) => {
                self.sent += 1;
                Ok(true)
            }
            Err(e) if undeliverable(&e) => {
                self.pending = Some(cmd);
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }
}

/// Robot-side endpoint for command datagrams.
pub struct UdpCommandReceiver {
    socket: UdpSocket,
}

impl UdpCommandReceiver {
    pub fn bind<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        Ok(Self {
            socket: UdpSocket::bind(addr)?,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    /// Next valid command, or `None` on timeout. Malformed datagrams are
    /// logged and skipped.
    pub fn recv(&self, timeout: Duration) -> io::Result<Option<GestureCommand>> {
        self.socket.set_read_timeout(Some(timeout))?;
        let mut buf = [0u8; MAX_DATAGRAM];
        loop {
            match self.socket.recv(&mut buf) {
                Ok(n) => match serde_json::from_slice(&buf[..n]) {
                    Ok(cmd) => return Ok(Some(cmd)),
                    Err(e) => log::warn!("dropping malformed command datagram: {e}"),
                },
                Err(e)
                    if matches!(
                        e.kind(),
                        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                    ) =>
                {
                    return Ok(None)
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Gesture::*;

    fn assembler() -> CommandAssembler {
        CommandAssembler::with_config(IntentConfig::default())
    }

    /// Runs label-stage input at 40 ms and ticks at 100 ms up to `end_ms`.
    fn drive(
        a: &mut CommandAssembler,
        end_ms: u64,
        label: impl Fn(u64) -> (Gesture, Gesture),
    ) -> Vec<GestureCommand> {
        let mut out = Vec::new();
        for t in (10..=end_ms).step_by(10) {
            if t % LABEL_PERIOD_MS == 0 {
                let (l, r) = label(t);
                a.on_window(t, LabelInput::Label(l), LabelInput::Label(r));
            }
            if t % COMMAND_PERIOD_MS == 0 {
                out.push(a.tick(t));
            }
        }
        out
    }

    #[test]
    fn five_seconds_is_fifty_commands() {
        let mut a = assembler();
        let cmds = drive(&mut a, 5_000, |_| (Rest, Rest));
        assert_eq!(cmds.len(), 50);
        assert!(cmds
            .windows(2)
            .all(|w| w[1].seq > w[0].seq && w[1].t_ms - w[0].t_ms == 100));
        assert!(cmds.iter().all(|c| !c.stale && c.left == Rest));
    }

    #[test]
    fn stale_after_half_a_second() {
        let mut a = assembler();
        let cmds = drive(&mut a, 2_000, |t| {
            if t <= 1_000 {
                (WristForward, Rest)
            } else {
                (Rest, Rest)
            }
        });
        let _ = cmds;
        let late = a.tick(1_000 + 40 * 26 + 500);
        assert!(late.stale && late.left == Rest);
        let mut b = assembler();
        b.on_window(40, LabelInput::Label(WristForward), LabelInput::Label(Rest));
        assert!(!b.tick(500).stale);
        assert!(b.tick(540).stale);
    }

    #[test]
    fn tiers_follow_hold_time() {
        let mut a = assembler();
        let cmds = drive(&mut a, 8_000, |_| (WristSupination, Rest));
        let at = |t: u64| cmds.iter().find(|c| c.t_ms == t).unwrap().clone();
        // first voted label at 240 ms
        assert_eq!(at(2_000).tier, [1, 1]);
        assert_eq!(at(3_200).tier, [1, 1]);
        assert_eq!(at(3_300).tier, [4, 1]);
        let json = at(3_300).to_json();
        assert!(json.len() <= MAX_DATAGRAM);
        assert!(json.contains("\"tier\":[4,1]"));
    }

    #[test]
    fn dual_hold_cycles_mode_once() {
        let mut a = assembler();
        drive(&mut a, 1_000, |t| {
            if t <= 250 {
                (WristBack, WristBack)
            } else {
                (Rest, Rest)
            }
        });
        assert_eq!(a.mode(), ControlMode::ArmGripper);
        drive(&mut a, 2_000, |_| (WristBack, WristBack));
        assert_eq!(a.mode(), ControlMode::Wrist);
    }

    #[test]
    fn unreachable_receiver_keeps_only_latest() {
        let closed = UdpSocket::bind("127.0.0.1:0").unwrap();
        let addr = closed.local_addr().unwrap();
        drop(closed);
        let mut s = UdpCommandSender::connect(addr).unwrap();
        let mut a = assembler();
        for k in 0..20 {
            let cmd = a.tick(100 * k);
            s.send(cmd).unwrap();
            std::thread::sleep(Duration::from_millis(2));
        }
        assert!(
            s.lost() > 0,
            "refusals should surface on a connected socket"
        );
        assert_eq!(s.sent() + s.lost() + s.pending().is_some() as u64, 20);
        if let Some(p) = s.pending() {
            assert_eq!(p.seq, 20);
        }
    }

    #[test]
    fn datagrams_arrive() {
        let rx = UdpCommandReceiver::bind("127.0.0.1:0").unwrap();
        let mut tx = UdpCommandSender::connect(rx.local_addr().unwrap()).unwrap();
        let mut a = assembler();
        let cmd = a.tick(100);
        assert!(tx.send(cmd.clone()).unwrap());
        assert_eq!(rx.recv(Duration::from_secs(1)).unwrap(), Some(cmd));
    }
}
