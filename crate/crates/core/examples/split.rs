//! Split a two-Gaussian sample at its density valley.

use unisplit::synth::{builtin, rng_from_seed, sample_mixture};
use unisplit::{nmi, unisplit_samples};

fn main() -> unisplit::Result<()> {
    let (values, truth) = sample_mixture(&builtin("D1")?, &mut rng_from_seed(1))?;
    let res = unisplit_samples(&values, 0.01)?;
    println!("{} values, k = {}", values.len(), res.k());
    println!("valley points: {:?}", res.valley_points);
    for (i, s) in res.subsets.iter().enumerate() {
        println!(
            "  subset {i}: {} points in [{:.3}, {:.3}]",
            s.total(),
            s.min(),
            s.max()
        );
    }
    let labels: Vec<i64> = res.labels.iter().map(|&l| l as i64).collect();
    println!("nmi vs generating labels: {:.4}", nmi(&truth, &labels)?);
    Ok(())
}
