//! The arena and robot without a controller: sensor readings at a few
//! poses, then a short scripted drive that runs into the central box.
//!
//! ```bash
//! cargo run -p bnplast --example robot_sensing
//! ```

use std::f64::consts::PI;

use bnplast::{ArenaGeometry, RobotParams, RobotPose, World};

fn show(label: &str, world: &World) {
    let r = world.sense();
    let bars: String = r.0.iter().map(|&v| [' ', '.', ':', '*', '#'][(v * 4.0).round() as usize]).collect();
    let p = world.pose();
    println!("{label:<22} ({:+.3}, {:+.3}, {:+.2} rad) |{bars}| p_max {:.2}", p.x, p.y, p.heading, r.p_max());
}

fn main() {
    let arena = ArenaGeometry::default();
    let params = RobotParams::default();
    let mut world = World::new(arena, params, RobotPose::new(-1.2, 0.0, 0.0)).expect("pose is free");

    show("open floor", &world);
    world.set_pose(RobotPose::new(-0.6, 0.0, 0.0));
    show("facing the box", &world);
    world.set_pose(RobotPose::new(-0.6, 0.0, PI));
    show("box behind", &world);
    world.set_pose(RobotPose::new(-1.87, -1.87, PI / 4.0));
    show("corner", &world);

    println!("\nstraight ahead from x = -1.2 toward the box:");
    world.set_pose(RobotPose::new(-1.2, 0.0, 0.0));
    for step in 1..=80 {
        world.drive(true, true);
        if step % 10 == 0 {
            show(&format!("step {step}"), &world);
        }
    }
    println!("\nspinning in place (left wheel only) keeps the position:");
    for _ in 0..10 {
        world.drive(true, false);
    }
    show("after 10 steps", &world);
}
