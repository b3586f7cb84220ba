//! Drives straight at a wall at full speed with and without the collision
//! governor and prints the closing distance.
//!
//!     cargo run --release --example collision_governor

use std::f64::consts::PI;

use myoteleop::autonomy::{govern, GovernorConfig};
use myoteleop::sim::{ActuatorCommand, JointVelocities, Pose2, RobotState, Sim, World};

fn main() {
    let world = World::two_room();
    let v_max = world.robot.max.base;
    let radius = world.robot.radius;
    let grid = world.map.grid.clone();
    let cfg = GovernorConfig::default();
    for governed in [false, true] {
        let mut sim = Sim::new(world.clone(), 1);
        sim.set_state(RobotState::at(Pose2::new(1.5, 2.5, PI)));
        let mut contacts = 0;
        println!("governor {}:", if governed { "on" } else { "off" });
        for tick in 0..80 {
            let out = govern(&sim.scan(), v_max, &cfg);
            let v = if governed { out.v } else { v_max };
            let cmd = ActuatorCommand {
                v,
                omega: 0.0,
                joints: JointVelocities::default(),
            };
            for _ in 0..10 {
                contacts += sim.step(&cmd).blocked as u32;
            }
            if tick % 8 == 0 {
                let p = sim.state().pose;
                let gap = grid.clearance(p.x, p.y, 2.0) - radius;
                println!(
                    "  {:4.1} s  gap {gap:.3} m  d {}  mu {:.2}  v {v:.3}",
                    tick as f64 / 10.0,
                    out.d.map_or("-".into(), |d| format!("{d:.3}")),
                    out.mu
                );
            }
        }
        println!("  steps blocked by the wall: {contacts}");
    }
}
