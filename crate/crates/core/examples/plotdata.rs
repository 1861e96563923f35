//! Print the histogram, ecdf and hull data behind a split as CSV.

use unisplit::cli::plot_data;
use unisplit::synth::{builtin_with_m, rng_from_seed, sample_mixture};

fn main() -> unisplit::Result<()> {
    let (values, _) = sample_mixture(&builtin_with_m("D1", 10)?, &mut rng_from_seed(0))?;
    let csv = plot_data(&values, 20, 0.01)?;
    // the ecdf rows are long; keep everything else
    for line in csv.lines().filter(|l| !l.starts_with("ecdf,")) {
        println!("{line}");
    }
    Ok(())
}
