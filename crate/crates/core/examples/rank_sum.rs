//! The rank-sum test used to compare biases: exact p values for small
//! samples, the tie-corrected normal approximation beyond twelve
//! observations.
//!
//! ```bash
//! cargo run -p bnplast --example rank_sum
//! ```

use bnplast::experiment::{rank_sum_test, Alternative};

fn show(a: &[f64], b: &[f64]) {
    let g = rank_sum_test(a, b, Alternative::Greater);
    let t = rank_sum_test(a, b, Alternative::TwoSided);
    println!(
        "|a| = {:<2} |b| = {:<2} U = {:<5} p(greater) = {:.4}  p(two-sided) = {:.4}  {}",
        a.len(),
        b.len(),
        g.u,
        g.p_value,
        t.p_value,
        if g.exact { "exact" } else { "normal" }
    );
}

fn main() {
    show(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]);
    show(&[0.7, 0.7, 0.9, 0.2], &[0.0, 0.0, 0.7, 0.1]);
    show(&[0.81, 0.77, 0.9, 0.65, 0.88, 0.93, 0.71], &[0.4, 0.55, 0.62, 0.3, 0.79, 0.5]);

    // replica outcomes are often zero, so ties dominate
    let many_zeros: Vec<f64> = (0..30).map(|i| if i % 3 == 0 { 0.0 } else { i as f64 / 40.0 }).collect();
    let mostly_zeros: Vec<f64> = (0..30).map(|i| if i % 4 == 0 { i as f64 / 40.0 } else { 0.0 }).collect();
    show(&many_zeros, &mostly_zeros);
}
