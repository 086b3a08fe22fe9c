//! Generate a random Boolean network, run it freely, find its attractor and
//! check that the dual network mirrors the complemented trajectory.
//!
//! ```bash
//! cargo run -p bnplast --example network_dynamics -- 0.21
//! ```

use bnplast::bn::{find_attractor, generate_free_network};
use bnplast::rng::seeded_stream;
use bnplast::NetworkState;

fn main() {
    let bias: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.21);
    let mut rng = seeded_stream(11, 0);
    let net = generate_free_network(64, 3, bias, 0.5, &mut rng).expect("valid parameters");
    let init = NetworkState::random(net.n(), &mut rng);

    println!("n = {}, k = {}, bias = {bias}", net.n(), net.k());
    let mut state = init.clone();
    for t in 0..12 {
        let row: String = state.iter().map(|b| if b { '#' } else { '.' }).collect();
        println!("{t:>3} {row}  ({} on)", state.count_ones());
        state = net.step(&state);
    }

    match find_attractor(&net, &init, 100_000) {
        Some(a) => println!("attractor: transient {} steps, period {}", a.transient, a.period),
        None => println!("no attractor within 100000 steps"),
    }

    let dual = net.dual();
    let (mut x, mut y) = (init.clone(), init.complement());
    for _ in 0..50 {
        x = net.step(&x);
        y = dual.step(&y);
    }
    println!("dual network (bias {:.2}) tracks the complement: {}", dual.bias(), y == x.complement());

    let json = net.to_json();
    println!("JSON document: {} bytes, round trip ok: {}", json.len(), bnplast::BooleanNetwork::from_json(&json).is_ok());
}
