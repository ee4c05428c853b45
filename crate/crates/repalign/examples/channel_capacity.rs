//! Binary-symmetric-channel capacity and the triplet query lower bound.
//!
//! ```bash
//! cargo run --example channel_capacity
//! ```

use repalign::channel::{bsc_capacity, query_lower_bound};

fn main() -> repalign::Result<()> {
    println!("{:>8} {:>10} {:>16}", "epsilon", "capacity", "queries(n=32,d=2)");
    for i in 0..=10 {
        let epsilon = i as f64 / 10.0;
        let capacity = bsc_capacity(epsilon)?;
        let bound = query_lower_bound(32, 2, 1, epsilon)?;
        println!("{epsilon:>8.2} {capacity:>10.6} {bound:>16.2}");
    }
    println!("\nthe bound is symmetric: a channel that always lies is as good as one that never does;");
    println!("only epsilon = 0.5 carries nothing (infinite queries).");
    Ok(())
}
