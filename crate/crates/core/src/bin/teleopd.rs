use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use myoteleop::gesture::{default_vocabulary, Arm};
use myoteleop::ml::{
    build_dataset, evaluate, load_model, save_model, split, train, ArmModel, CueSchedule, Dataset,
    TrainConfig,
};
use myoteleop::service::{
    read_log, replay, run_headless, serve, Scenario, ServeOptions, ServiceConfig,
};
use myoteleop::sim::World;
use myoteleop::stream::{
    consume_stream, playback, record_session, serve_stream, EmgFrame, Pacing, SessionHeader,
    SleeveLayout, StreamEvent,
};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "teleopd", about = "Bimanual EMG teleoperation service")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// World file; the built-in two-room apartment when absent.
    #[arg(long)]
    world: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulated clock, no console.
    #[arg(long)]
    headless: bool,
    /// Write the session log here.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Live session with the console channel attached.
    Serve {
        #[command(flatten)]
        run: RunArgs,
        /// Simulated seconds per wall second.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        /// Session length when no scenario is given.
        #[arg(long, default_value_t = 3600)]
        duration_s: u64,
    },
    /// Run a scenario on the simulated clock.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train one arm's classifier from a recorded cue session.
    Train {
        /// Session file with cues in its header; synthetic when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        arm: Arm,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Training hyperparameters as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a model on every labeled window of a recorded cue session.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Verify a session log and re-run it.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        world: Option<PathBuf>,
        /// Wall-clock pacing multiple; unpaced when absent.
        #[arg(long)]
        speed: Option<f64>,
    },
    /// EMG stream tools.
    Stream {
        #[command(subcommand)]
        cmd: StreamCmd,
    },
}

#[derive(Subcommand)]
enum StreamCmd {
    /// Serve a session file, or the synthetic cue session, to one consumer.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7800")]
        endpoint: String,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        realtime: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Record a stream to a session file. Without an endpoint the synthetic
    /// cue session is recorded with its cues in the header.
    Record {
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Read a session file and summarize it.
    Playback {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        realtime: bool,
    },
}

fn load_world(path: Option<&Path>) -> Result<World> {
    Ok(match path {
        Some(p) => World::load(p)?,
        None => World::two_room(),
    })
}

fn load_config(path: Option<&Path>) -> Result<ServiceConfig> {
    Ok(match path {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    })
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn simulate(run: &RunArgs, scenario: Scenario) -> Result<()> {
    let (outcome, log) = run_headless(
        load_config(run.config.as_deref())?,
        load_world(run.world.as_deref())?,
        scenario,
        run.seed,
    )?;
    if let Some(p) = &run.log {
        log.write(p)?;
    }
    let p = outcome.final_pose;
    print_json(&serde_json::json!({
        "end_ms": outcome.end_ms,
        "task": outcome.task,
        "commands": outcome.commands,
        "final_pose": [p.x, p.y, p.theta],
        "records": log.records().len(),
        "last_hash": log.last_hash(),
    }))
}

fn cue_data(data: Option<&Path>, seed: u64) -> Result<[Dataset; 2]> {
    let layout = SleeveLayout::default();
    Ok(match data {
        Some(p) => {
            let reader = playback(p)?;
            let cues = reader
                .header()
                .cues
                .clone()
                .ok_or_else(|| format!("{}: header has no cue schedule", p.display()))?;
            let frames: Vec<EmgFrame> = reader.read_all()?;
            build_dataset(frames, &cues, &layout)?
        }
        None => {
            let cues = CueSchedule::default_session();
            build_dataset(cues.synthetic_source(seed, 1)?, &cues, &layout)?
        }
    })
}

fn stream_cmd(cmd: StreamCmd) -> Result<()> {
    match cmd {
        StreamCmd::Serve {
            endpoint,
            file,
            realtime,
            seed,
        } => {
            let listener = TcpListener::bind(&endpoint)?;
            eprintln!("serving on {}", listener.local_addr()?);
            let pacing = if realtime {
                Pacing::RealTime
            } else {
                Pacing::Headless
            };
            let report = match file {
                Some(f) => serve_stream(playback(&f)?.map_while(|r| r.ok()), &listener, pacing)?,
                None => serve_stream(
                    CueSchedule::default_session().synthetic_source(seed, 1)?,
                    &listener,
                    pacing,
                )?,
            };
            eprintln!("sent {} frames", report.frames_sent);
        }
        StreamCmd::Record {
            endpoint,
            file,
            seed,
        } => {
            let n = match endpoint {
                Some(ep) => {
                    let frames = consume_stream(ep.as_str())?.filter_map(|ev| match ev {
                        StreamEvent::Frame(f) => Some(f),
                        StreamEvent::Dropout { expected, got } => {
                            eprintln!("dropout: samples [{expected}, {got})");
                            None
                        }
                        StreamEvent::Ended { reason } => {
                            eprintln!("stream ended: {reason}");
                            None
                        }
                    });
                    record_session(frames, &SessionHeader::new(0), &file)?
                }
                None => {
                    let cues = CueSchedule::default_session();
                    let mut header = SessionHeader::new(1);
                    header.gesture_schedule = Some(cues.gesture_schedule());
                    header.cues = Some(cues.clone());
                    record_session(cues.synthetic_source(seed, 1)?, &header, &file)?
                }
            };
            eprintln!("recorded {n} frames to {}", file.display());
        }
        StreamCmd::Playback { file, realtime } => {
            let mut reader = playback(&file)?;
            let header = reader.header().clone();
            if realtime {
                reader = reader.realtime();
            }
            let mut frames = 0u64;
            let mut samples = 0u64;
            for f in reader {
                let f = f?;
                frames += 1;
                samples += f.n_samples() as u64;
            }
            print_json(&serde_json::json!({
                "session_id": header.session_id,
                "start_time_ms": header.start_time_ms,
                "frames": frames,
                "samples": samples,
                "has_cues": header.cues.is_some(),
            }))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Serve {
            run,
            speed,
            duration_s,
        } => {
            let scenario = match &run.scenario {
                Some(p) => Scenario::load(p)?,
                None => Scenario::live(duration_s * 1000),
            };
            if run.headless {
                return simulate(&run, scenario);
            }
            let opts = ServeOptions {
                log_path: run.log.clone(),
                speed,
                stop: None,
            };
            let (outcome, log) = serve(
                load_config(run.config.as_deref())?,
                load_world(run.world.as_deref())?,
                scenario,
                run.seed,
                opts,
            )?;
            eprintln!(
                "session ended at {} ms, {} records",
                outcome.end_ms,
                log.records().len()
            );
        }
        Cmd::Simulate { run } => {
            let scenario = match &run.scenario {
                Some(p) => Scenario::load(p)?,
                None => Scenario::idle(60_000),
            };
            simulate(&run, scenario)?;
        }
        Cmd::Train {
            data,
            arm,
            seed,
            out,
            config,
        } => {
            let cfg: TrainConfig = match config {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => TrainConfig::default(),
            };
            let datasets = cue_data(data.as_deref(), seed)?;
            let ds = split(
                &datasets[arm.index()].restrict(&default_vocabulary(arm)),
                seed,
            )?;
            let (cnn, report) = train(&ds, &cfg, seed)?;
            save_model(&ArmModel { arm, cnn }, &out)?;
            let report_path = out.with_extension("report.json");
            std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
            eprintln!(
                "model written to {}, report to {}",
                out.display(),
                report_path.display()
            );
            print_json(&report)?;
        }
        Cmd::Evaluate { model, data, seed } => {
            if !model.exists() {
                return Err(format!("model file not found: {}", model.display()).into());
            }
            let m = load_model(&model)?;
            let datasets = cue_data(data.as_deref(), seed)?;
            let ds = datasets[m.arm.index()].restrict(&m.cnn.labels);
            let samples: Vec<_> = ds.samples.iter().collect();
            print_json(&evaluate(&m.cnn, &samples)?)?;
        }
        Cmd::Replay { log, world, speed } => {
            let records = read_log(&log)?;
            let report = replay(&records, load_world(world.as_deref())?, speed)?;
            let p = report.final_pose;
            print_json(&serde_json::json!({
                "end_ms": report.end_ms,
                "events_matched": report.events_matched,
                "task": report.task,
                "final_pose": [p.x, p.y, p.theta],
                "final_state_identical": true,
            }))?;
        }
        Cmd::Stream { cmd } => stream_cmd(cmd)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("teleopd: {e}");
            ExitCode::FAILURE
        }
    }
}
