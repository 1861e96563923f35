//! Convex-hull critical points of an ecdf and the unimodality test built on
//! them.

use unisplit::synth::{rng_from_seed, sample_spec, DistSpec, Family};
use unisplit::{gl_set, uu_test, Dataset, UuOutcome};

fn main() -> unisplit::Result<()> {
    let d = Dataset::from_raw(&[0.0, 1.0, 1.5, 2.0, 2.2, 2.4, 2.5, 3.0, 4.5, 7.0])?;
    for p in gl_set(&d)?.points {
        println!("{:?} at x = {} (F = {:.2})", p.kind, p.x, p.f);
    }

    let mut rng = rng_from_seed(4);
    let one = sample_spec(
        &DistSpec::new(
            Family::Normal {
                mu: 0.0,
                sigma: 1.0,
            },
            2000,
        ),
        &mut rng,
    )?;
    let mut two = sample_spec(
        &DistSpec::new(
            Family::Normal {
                mu: 0.0,
                sigma: 1.0,
            },
            1000,
        ),
        &mut rng,
    )?;
    two.extend(sample_spec(
        &DistSpec::new(
            Family::Normal {
                mu: 5.0,
                sigma: 1.0,
            },
            1000,
        ),
        &mut rng,
    )?);
    for (name, v) in [("one gaussian", one), ("two gaussians", two)] {
        match uu_test(&Dataset::from_raw(&v)?, 0.01)? {
            UuOutcome::Unimodal(m) => {
                println!("{name}: unimodal, {} uniform pieces", m.n_components())
            }
            UuOutcome::Multimodal(c) => {
                println!("{name}: multimodal, {} non-uniform intervals", c.len())
            }
        }
    }
    Ok(())
}
