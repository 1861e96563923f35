//! Segment a synthetic three-band grayscale image and write the result.

use unisplit::imgseg::{read_pnm, recolor, segment, write_pgm, GrayImage};
use unisplit::synth::{rng_from_seed, sample_spec, DistSpec, Family};

fn main() -> unisplit::Result<()> {
    let (w, h) = (120, 90);
    let noise = sample_spec(
        &DistSpec::new(
            Family::Normal {
                mu: 0.0,
                sigma: 8.0,
            },
            w * h,
        ),
        &mut rng_from_seed(2),
    )?;
    let px = (0..w * h)
        .map(|i| {
            let level = [40.0, 128.0, 210.0][(i % w) * 3 / w];
            (level + noise[i]).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    let img = GrayImage::new(w, h, px)?;

    let seg = segment(&img, 0.01)?;
    print!("{}", seg.report());

    let out = std::env::temp_dir().join("unisplit_bands.pgm");
    write_pgm(&recolor(&img, &seg.labels)?, std::fs::File::create(&out)?)?;
    let back = read_pnm(std::fs::File::open(&out)?)?;
    println!(
        "wrote {} ({}x{})",
        out.display(),
        back.width(),
        back.height()
    );
    Ok(())
}
