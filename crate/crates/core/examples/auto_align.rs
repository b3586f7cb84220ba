//! Parks the robot at the kitchen table, arms the detector for the cup and
//! runs the assistive alignment until the arm axis points at it.
//!
//!     cargo run --release --example auto_align [query]

use myoteleop::autonomy::{alignment_command, AlignGains};
use myoteleop::sim::{align_ik, ActuatorCommand, RobotState, Sim, World};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "cup".into());
    let world = World::two_room();
    let mut goal = world.map.room("kitchen").ok_or("no kitchen")?.goal;
    // Slightly off the aligned heading so there is something to correct.
    goal.theta += 0.25;
    let params = world.robot.clone();
    let mut sim = Sim::new(world, 1);
    sim.set_state(RobotState::at(goal));
    sim.set_query(Some(query.clone()));
    let gains = AlignGains::default();
    let mut target: Option<([f64; 3], f64, u64)> = None;
    let mut cmd = ActuatorCommand::default();
    for step in 0..3000u64 {
        let report = sim.step(&cmd);
        if let Some(best) = report.detections.and_then(|d| {
            d.into_iter()
                .max_by(|a, b| a.confidence.total_cmp(&b.confidence))
        }) {
            // Keep the centroid in the world frame so it survives base motion.
            let (wx, wy) = sim
                .state()
                .pose
                .to_world(best.centroid[0], best.centroid[1]);
            target = Some(([wx, wy, best.centroid[2]], best.confidence, sim.t_ms()));
        }
        if step % 10 != 9 {
            continue;
        }
        let Some((w, conf, seen)) = target else {
            continue;
        };
        let state = sim.state().clone();
        let (bx, by) = state.pose.to_body(w[0], w[1]);
        let out = alignment_command(
            &state,
            &params,
            [bx, by, w[2]],
            conf,
            (sim.t_ms() - seen) as f64,
            &gains,
        );
        cmd = out.u_a.to_actuator();
        if step % 100 == 99 {
            println!(
                "{:4.1} s  heading err {:+.3} rad  lift err {:+.3} m  assist {:.2}",
                sim.t_ms() as f64 / 1000.0,
                out.heading_error,
                out.lift_error,
                out.alpha
            );
        }
        if out.heading_error.abs() < 0.01 && out.lift_error.abs() < 0.005 {
            let ik = align_ik(&state, &params, w);
            println!(
                "aligned with `{query}` after {:.1} s; remaining reach {:?}",
                sim.t_ms() as f64 / 1000.0,
                ik.map(|s| s.extension)
            );
            return Ok(());
        }
    }
    Err(format!("no alignment on `{query}`").into())
}
