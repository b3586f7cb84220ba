//! Drives from the bedroom to the kitchen in room mode: global plan on the
//! inflated costmap, pure-pursuit tracking, the operator holding forward at
//! half strength, and the collision governor on the base.
//!
//!     cargo run --release --example room_navigation [u_f]

use myoteleop::autonomy::{
    govern, plan_global, room_blend, AssistGains, BaseInput, Costmap, CostmapParams,
    GovernorConfig, PurePursuit, TrackerParams,
};
use myoteleop::sim::{ActuatorCommand, JointVelocities, Sim, World};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u_f: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.5);
    let world = World::two_room();
    let goal = world.map.room("kitchen").ok_or("no kitchen")?.goal;
    let params = world.robot.clone();
    let costmap = Costmap::from_grid(&world.map.grid, params.radius, &CostmapParams::default());
    let mut sim = Sim::new(world, 1);
    let start = sim.state().pose;
    let plan = plan_global(&costmap, (start.x, start.y), goal)?;
    println!(
        "plan: {} cells, cost {:.2}, goal ({:.2}, {:.2})",
        plan.cells.len(),
        plan.cost,
        goal.x,
        goal.y
    );
    let mut tracker = PurePursuit::new(plan, TrackerParams::default());
    let input = BaseInput {
        u_f,
        ..Default::default()
    };
    let (gains, governor) = (AssistGains::default(), GovernorConfig::default());
    for tick in 0..3000 {
        let pose = sim.state().pose;
        let track = tracker.track(&pose)?;
        if track.reached {
            println!(
                "reached {} after {:.1} s at ({:.2}, {:.2}, {:.2})",
                sim.room().unwrap_or("?"),
                tick as f64 / 10.0,
                pose.x,
                pose.y,
                pose.theta
            );
            return Ok(());
        }
        let (v, w) = room_blend(&input, &track.velocity, &gains);
        let g = govern(&sim.scan(), v, &governor);
        let cmd = ActuatorCommand {
            v: g.v.clamp(-params.max.base, params.max.base),
            omega: w.clamp(-params.max.turn, params.max.turn),
            joints: JointVelocities::default(),
        };
        if tick % 20 == 0 {
            println!(
                "{:5.1} s  ({:.2}, {:.2})  {:<8} v {:+.2}  w {:+.2}  mu {:.2}",
                tick as f64 / 10.0,
                pose.x,
                pose.y,
                sim.room().unwrap_or("-"),
                cmd.v,
                cmd.omega,
                g.mu
            );
        }
        for _ in 0..10 {
            sim.step(&cmd);
        }
    }
    Err("did not reach the kitchen".into())
}
