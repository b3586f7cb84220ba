use std::net::UdpSocket;
use std::time::{Duration, Instant};

use serde_json::Value;

use myoteleop::gesture::Gesture;
use myoteleop::service::{
    load_models, parse_log, replay, run_headless, verify_chain, ExpertStyle, LogRecord, ModelPaths,
    OperatorSpec, Scenario, ScriptStep, ServiceConfig, ServiceError,
};
use myoteleop::sim::World;
use myoteleop::stream::GestureSchedule;

fn text(at_ms: u64, t: &str) -> ScriptStep {
    ScriptStep::Text {
        at_ms,
        text: t.into(),
    }
}

fn hold(from_ms: u64, to_ms: u64, left: Gesture, right: Gesture) -> ScriptStep {
    ScriptStep::Hold {
        from_ms,
        to_ms,
        left,
        right,
    }
}

fn scripted(duration_ms: u64, steps: Vec<ScriptStep>) -> Scenario {
    Scenario {
        name: "scripted".into(),
        operator: OperatorSpec::Script { steps },
        ..Scenario::idle(duration_ms)
    }
}

fn run(scenario: Scenario) -> Vec<LogRecord> {
    let (_, log) = run_headless(ServiceConfig::default(), World::two_room(), scenario, 3).unwrap();
    log.records().to_vec()
}

fn of_kind<'a>(records: &'a [LogRecord], kind: &str) -> Vec<&'a LogRecord> {
    records.iter().filter(|r| r.kind == kind).collect()
}

#[test]
fn sixty_second_session_rates() {
    let records = run(scripted(
        60_000,
        vec![
            text(0, "start gesture mode"),
            hold(1_000, 20_000, Gesture::WristForward, Gesture::Rest),
        ],
    ));
    let commands = of_kind(&records, "command").len();
    let windows = of_kind(&records, "window");
    for arm in ["left", "right"] {
        let n = windows.iter().filter(|r| r.payload["arm"] == arm).count();
        assert_eq!(n, 60_000 / 40, "{arm} windows");
    }
    assert_eq!(commands, 60_000 / 100);
    let seqs: Vec<u64> = of_kind(&records, "command")
        .iter()
        .map(|r| r.payload["command"]["seq"].as_u64().unwrap())
        .collect();
    assert!(seqs.windows(2).all(|w| w[1] == w[0] + 1));
}

#[test]
fn missing_model_names_path() {
    let mut cfg = ServiceConfig::default();
    cfg.models = Some(ModelPaths {
        left: "/nonexistent/left.json".into(),
        right: "/nonexistent/right.json".into(),
    });
    let err = load_models(&cfg).unwrap_err().to_string();
    assert!(err.contains("/nonexistent/left.json"), "{err}");

    let scenario = Scenario {
        operator: OperatorSpec::Emg {
            schedule: GestureSchedule::default(),
            script: Vec::new(),
        },
        ..Scenario::idle(1_000)
    };
    let err = run_headless(cfg, World::two_room(), scenario, 1).unwrap_err();
    assert!(matches!(err, ServiceError::Model { .. }), "{err}");
    assert!(err.to_string().contains("/nonexistent/"), "{err}");
}

#[test]
fn text_commands() {
    let records = run(scripted(
        3_000,
        vec![
            text(0, "start gesture mode"),
            text(100, "open the pod bay doors"),
            text(200, "go to the kitchen"),
            text(300, "room mode"),
            text(400, "go to the attic"),
            text(500, "go to the kitchen"),
            text(600, "exit room mode"),
            text(700, "next mode"),
            text(800, "align cup with lid"),
        ],
    ));
    let refusals: Vec<String> = of_kind(&records, "refusal")
        .iter()
        .map(|r| r.payload["reason"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(refusals.len(), 3, "{refusals:?}");
    assert!(refusals[0].contains("open the pod bay doors"));
    assert!(refusals[1].contains("room mode"));
    assert!(refusals[2].contains("attic"));

    let plans = of_kind(&records, "plan");
    assert_eq!(plans.len(), 1);
    let kitchen = World::two_room().map.room("kitchen").unwrap().goal;
    assert_eq!(
        plans[0].payload["goal"],
        serde_json::json!([kitchen.x, kitchen.y, kitchen.theta])
    );
    let modes = of_kind(&records, "mode");
    assert_eq!(modes.len(), 1);
    assert_eq!(modes[0].payload["mode"], "arm_gripper");
    let align = of_kind(&records, "align");
    assert_eq!(align[0].payload["query"], "cup with lid");
}

#[test]
fn tampering_breaks_chain_and_replay() {
    let scenario = scripted(
        2_000,
        vec![
            text(0, "start gesture mode"),
            hold(0, 1_500, Gesture::WristForward, Gesture::Rest),
        ],
    );
    let (_, log) = run_headless(ServiceConfig::default(), World::two_room(), scenario, 1).unwrap();
    let text = log.to_jsonl();
    let records = parse_log(&text).unwrap();
    verify_chain(&records).unwrap();

    let mut lines: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let i = lines
        .iter()
        .position(|l| l["kind"] == "command" && l["payload"]["command"]["left"] == "wrist_forward")
        .expect("a forward command");
    lines[i]["payload"]["command"]["left"] = "wrist_back".into();
    let edited: String = lines.iter().map(|l| format!("{l}\n")).collect();
    let tampered = parse_log(&edited).unwrap();
    assert!(matches!(
        verify_chain(&tampered),
        Err(ServiceError::ChainBroken { .. })
    ));
    assert!(replay(&tampered, World::two_room(), None).is_err());
}

#[test]
fn replay_refuses_other_world() {
    let records = run(scripted(1_000, vec![text(0, "start gesture mode")]));
    let mut world = World::two_room();
    world.map.grid.fill_rect(2.0, 1.0, 2.2, 1.2);
    let err = replay(&records, world, None).unwrap_err();
    assert!(matches!(err, ServiceError::WorldMismatch { .. }), "{err}");
}

#[test]
fn replay_speed_only_changes_wall_clock() {
    let scenario = scripted(
        3_000,
        vec![
            text(0, "start gesture mode"),
            hold(0, 2_500, Gesture::WristForward, Gesture::WristSupination),
        ],
    );
    let (out, log) =
        run_headless(ServiceConfig::default(), World::two_room(), scenario, 5).unwrap();
    let fast = replay(log.records(), World::two_room(), None).unwrap();
    let t0 = Instant::now();
    let paced = replay(log.records(), World::two_room(), Some(10.0)).unwrap();
    let wall = t0.elapsed();
    assert_eq!(paced.final_bits, out.final_bits);
    assert_eq!(fast.final_bits, out.final_bits);
    assert_eq!(paced.events_matched, fast.events_matched);
    assert!(wall >= Duration::from_millis(250), "{wall:?}");
    assert!(wall < Duration::from_millis(1_500), "{wall:?}");
}

#[test]
fn expert_replay_matches_task_time() {
    let (out, log) = run_headless(
        ServiceConfig::default(),
        World::two_room(),
        Scenario::drink(ExpertStyle::Assisted),
        2,
    )
    .unwrap();
    let result = out.task.clone().expect("task result");
    assert!(result.completed);
    let report = replay(log.records(), World::two_room(), None).unwrap();
    assert_eq!(report.task, out.task);
    assert_eq!(report.end_ms, out.end_ms);
}

#[test]
fn commands_go_out_over_udp() {
    let sock = UdpSocket::bind("127.0.0.1:0").unwrap();
    sock.set_read_timeout(Some(Duration::from_secs(2))).unwrap();
    let mut cfg = ServiceConfig::default();
    cfg.command_udp = Some(sock.local_addr().unwrap().to_string());
    let scenario = scripted(1_000, vec![text(0, "start gesture mode")]);
    let (out, log) = run_headless(cfg, World::two_room(), scenario, 1).unwrap();
    assert_eq!(out.commands, 10);
    let mut buf = [0u8; 1024];
    let mut seqs = Vec::new();
    while seqs.len() < 10 {
        let n = sock.recv(&mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf[..n]).unwrap();
        seqs.push(v["seq"].as_u64().unwrap());
    }
    assert_eq!(seqs, (1..=10).collect::<Vec<_>>());
    let end = log.records().last().unwrap();
    assert_eq!(end.kind, "end");
    assert_eq!(end.payload["udp"]["sent"], 10);
}
