//! A short run of the splitting benchmark.
//!
//! `cargo run --release --example bench -- table3` runs the model-fitting
//! suite instead.

use unisplit::cli::{bench, BenchArgs, Suite};

fn main() -> unisplit::Result<()> {
    let suite = match std::env::args().nth(1).as_deref() {
        Some("table3") => Suite::Table3,
        _ => Suite::Table5,
    };
    let args = BenchArgs {
        suite,
        replicates: 5,
        m: 100,
        alpha: 0.01,
        seed: 0,
        only: Vec::new(),
        out: None,
    };
    let report = bench(&args)?;
    print!("{}", report.to_text());
    Ok(())
}
