//! Bisects the largest constant positive attention `b` for which the `thm3`
//! setup still diverges in at least 95% of trials.
//!
//! ```text
//! cargo run --release --example calibrate_b_star -- [batch] [iterations]
//! ```

use signed_consensus::harness::calibrate_b_star;
use signed_consensus::{preset_config, PresetName};

fn main() {
    let mut args = std::env::args().skip(1);
    let batch = args.next().map_or(100, |a| a.parse().expect("batch"));
    let iterations = args.next().map_or(12, |a| a.parse().expect("iterations"));
    let cfg = preset_config(PresetName::Thm3).expect("thm3 preset");
    match calibrate_b_star(&cfg, 1e-3, 0.999, iterations, batch, 0.95) {
        Some(c) => {
            for (b, f) in &c.probes {
                println!("b = {b:.6}  diverged = {f:.3}");
            }
            println!("b_star = {:.6}", c.b_star);
        }
        None => println!("no divergence even at the lower bracket"),
    }
}
