//! Fit a unimodal mixture, round-trip it through JSON and compare a model
//! sample with fresh data.

use unisplit::synth::{builtin, rng_from_seed, sample_mixture};
use unisplit::{fit_udmm, ks_two_sample, Dataset, Udmm};

fn main() -> unisplit::Result<()> {
    let specs = builtin("D4")?;
    let mut rng = rng_from_seed(7);
    let (values, _) = sample_mixture(&specs, &mut rng)?;
    let data = Dataset::from_raw(&values)?;
    let model = fit_udmm(&data, 0.01)?;

    println!("K = {}, weights = {:?}", model.k(), model.weights());
    for (j, c) in model.components().iter().enumerate() {
        println!(
            "  component {j}: {} uniforms on {:?}",
            c.n_components(),
            c.support()
        );
    }
    println!(
        "mean log-likelihood: {:.4}",
        model.log_likelihood(&values) / values.len() as f64
    );

    let json = model.to_json();
    let back = Udmm::from_json(&json)?;
    assert_eq!(back, model);
    println!("model file is {} bytes", json.len());

    let (fresh, _) = sample_mixture(&specs, &mut rng)?;
    let synthetic = back.sample(fresh.len(), &mut rng);
    let ks = ks_two_sample(&Dataset::from_raw(&fresh)?, &Dataset::from_raw(&synthetic)?);
    println!("two-sample KS, model vs fresh data: {ks:.4}");
    Ok(())
}
