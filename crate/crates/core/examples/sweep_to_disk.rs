//! A small sweep written to disk exactly as `bnplast run` writes it, then
//! re-run from its manifest to show the outputs reproduce.
//!
//! ```bash
//! cargo run --release -p bnplast --example sweep_to_disk -- /tmp/bnplast-demo
//! ```

use std::fs;
use std::path::PathBuf;

use bnplast::cli::{execute_sweep, load_manifest};
use bnplast::SweepConfig;

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bnplast-demo".into()));
    let cfg = SweepConfig {
        replicas: 4,
        iterations: 20,
        ..SweepConfig::default()
    };
    execute_sweep(&cfg, &out, 2, false).expect("sweep runs");
    print!("{}", fs::read_to_string(out.join("summary.csv")).unwrap());

    let manifest = load_manifest(&out.join("manifest.json")).unwrap();
    let again = out.with_extension("rerun");
    execute_sweep(&manifest.config, &again, 1, false).unwrap();
    let same = ["summary.csv", "stats.csv"]
        .iter()
        .all(|f| fs::read(out.join(f)).unwrap() == fs::read(again.join(f)).unwrap());
    println!("\nre-run from manifest into {} identical: {same}", again.display());
}
