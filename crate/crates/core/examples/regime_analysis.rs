//! Derrida sensitivity across bias: analytic ensemble value, exact
//! per-network value and the sampled estimate, with the regime label.
//!
//! ```bash
//! cargo run --release -p bnplast --example regime_analysis
//! ```

use bnplast::bn::generate_network;
use bnplast::regime::{classify, critical_bias, ensemble_sensitivity, estimate_sensitivity, exact_sensitivity};
use bnplast::regime::DEFAULT_EPSILON;
use bnplast::rng::{mix_seed, seeded_stream};

fn main() {
    let k = 3;
    let (lo, hi) = critical_bias(k).unwrap();
    println!("critical biases for k = {k}: {lo:.4} and {hi:.4}\n");

    println!(" bias   2b(1-b)k  exact    sampled  +-      regime");
    for i in 1..=19 {
        let bias = i as f64 * 0.05;
        let seed = mix_seed(&[42, i]);
        let net = generate_network(500, k, bias, 0.5, &mut seeded_stream(seed, 0)).unwrap();
        let est = estimate_sensitivity(&net, 5_000, seed);
        println!(
            " {bias:.2}   {:.4}    {:.4}   {:.4}   {:.4}  {}",
            ensemble_sensitivity(k, bias),
            exact_sensitivity(&net),
            est.lambda,
            est.std_error,
            classify(&est, DEFAULT_EPSILON)
        );
    }
}
