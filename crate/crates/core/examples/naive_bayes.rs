//! Naive Bayes with mixture densities against the Gaussian baseline on data
//! where one class occupies two separated rectangles.

use unisplit::nb::{fit_nb, kfold_accuracy, rectangles, NbMode};

fn main() -> unisplit::Result<()> {
    let table = rectangles(300, 11);
    for mode in [NbMode::Udmm, NbMode::Gaussian] {
        let (mean, std) = kfold_accuracy(&table, 10, mode, 0.01, 0)?;
        println!("{mode:?}: 10-fold accuracy {mean:.3} ± {std:.3}");
    }
    let model = fit_nb(&table, NbMode::Udmm, 0.01)?;
    for x in [0.5, 1.75, 3.0, 10.0] {
        let class = model.predict(&[x, 0.5]);
        println!("x = {x:>4}: class {}", table.class_names[class]);
    }
    Ok(())
}
