//! Desk-scale bias sweep: replicas of the adaptive walk for each bias, then
//! the boxplot statistics and one-sided rank-sum tests against the lower
//! critical bias.
//!
//! ```bash
//! cargo run --release -p bnplast --example bias_sweep -- 20
//! cargo run --release -p bnplast --example bias_sweep -- 20 negative
//! ```

use std::time::Instant;

use bnplast::experiment::{compare_biases, summarize, SweepConfig};
use bnplast::{run_sweep, Encoding};

fn main() {
    let mut args = std::env::args().skip(1);
    let replicas = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let encoding = match args.next().as_deref() {
        Some("negative") => Encoding::Negative,
        _ => Encoding::Positive,
    };
    let reference = match encoding {
        Encoding::Positive => 0.21,
        Encoding::Negative => 0.79,
    };

    let cfg = SweepConfig {
        replicas,
        encodings: vec![encoding],
        ..SweepConfig::default()
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let started = Instant::now();
    let results = run_sweep(&cfg, workers).expect("valid configuration");
    println!(
        "{} replicas x {} iterations x {} steps in {:.1} s",
        results.len(),
        cfg.iterations,
        cfg.steps_per_trial,
        started.elapsed().as_secs_f64()
    );

    println!("\n bias   min    q1     median q3     max    good(>0.7)");
    for row in summarize(&results) {
        println!(
            " {:<5}  {:.3}  {:.3}  {:.3}  {:.3}  {:.3}  {:.2}",
            row.key.bias, row.min, row.q1, row.median, row.q3, row.max, row.good_fraction
        );
    }

    println!("\n{reference} better than ...   (one-sided rank-sum, alpha = {})", cfg.alpha);
    for c in compare_biases(&results, 100, encoding, reference, cfg.alpha) {
        println!(
            " {:<5}  U = {:<7} p = {:.2e}  {}",
            c.bias_other,
            c.u,
            c.p_value,
            if c.significant { "significant" } else { "-" }
        );
    }
}
