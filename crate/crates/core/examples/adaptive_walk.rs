//! One robot adapting its sensor wiring: a single adaptive walk, printing
//! every accepted rewiring. Some replicas never leave F = 0 (try replica 3).
//!
//! ```bash
//! cargo run --release -p bnplast --example adaptive_walk -- 0.21 1
//! ```

use bnplast::experiment::{setup_replica, ConfigKey};
use bnplast::{adaptive_walk, Encoding, Stream, SweepConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let bias: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.21);
    let replica: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let cfg = SweepConfig::default();
    let key = ConfigKey { n: 100, bias, encoding: Encoding::Positive };
    let seed = key.replica_seed(cfg.base_seed, replica);
    let mut setup = setup_replica(&cfg, key, seed).expect("valid configuration");
    println!("n = {}, bias = {bias}, seed = {seed:#x}, outputs {:?}", setup.network.n(), setup.network.output_nodes());
    println!("initial sensor targets {:?}", setup.mapping.targets());

    let mut rng = setup.streams.stream(Stream::Rewire);
    let walk = adaptive_walk(
        &setup.network,
        setup.mapping.clone(),
        &mut setup.world,
        &cfg.walk_config(Encoding::Positive),
        &mut rng,
        |_| {},
    );

    println!("\n iter  q  F_trial  F_best");
    for r in walk.records.iter().filter(|r| r.accepted) {
        println!(" {:>4}  {}  {:.4}   {:.4}", r.iteration, r.q, r.f_trial, r.f_best);
    }
    println!(
        "\nfinal F_best {:.4}; {} of 24 sensors moved from the initial wiring",
        walk.final_best(),
        walk.mapping.differences(&setup.mapping)
    );
}
