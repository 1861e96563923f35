//! Unimodal Mixture Model: one UMM per unimodal subset, mixed by subset
//! size.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::split::{unisplit, SplitResult, MIN_SPLIT_SIZE};
use crate::synth::rng_from_seed;
use crate::uutest::{uu_test, Umm, UuOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UdmmFile")]
pub struct Udmm {
    weights: Vec<f64>,
    valley_points: Vec<f64>,
    components: Vec<Umm>,
}

/// Unvalidated on-disk shape.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UdmmFile {
    weights: Vec<f64>,
    valley_points: Vec<f64>,
    components: Vec<RawUmm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUmm {
    breakpoints: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<UdmmFile> for Udmm {
    type Error = Error;

    fn try_from(f: UdmmFile) -> Result<Self> {
        let components = f
            .components
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                Umm::new(c.breakpoints, c.weights).map_err(|e| match e {
                    Error::InvalidModel(msg) => {
                        Error::InvalidModel(format!("components[{j}].{msg}"))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Udmm::new(components, f.weights, f.valley_points)
    }
}

impl Udmm {
    pub fn new(components: Vec<Umm>, weights: Vec<f64>, valley_points: Vec<f64>) -> Result<Self> {
        let m = Udmm {
            weights,
            valley_points,
            components,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let k = self.components.len();
        if k == 0 {
            return bad("components: empty".into());
        }
        if self.weights.len() != k {
            return bad(format!(
                "weights: expected {k} entries, found {}",
                self.weights.len()
            ));
        }
        if self.valley_points.len() + 1 != k {
            return bad(format!(
                "valley_points: expected {} entries, found {}",
                k - 1,
                self.valley_points.len()
            ));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return bad("weights: entries must be positive".into());
        }
        let s: f64 = self.weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return bad(format!("weights: sum {s} is not 1"));
        }
        if self.valley_points.iter().any(|v| !v.is_finite())
            || self.valley_points.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("valley_points: must be finite and strictly increasing".into());
        }
        for j in 1..k {
            let prev = self.components[j - 1].support().1;
            let next = self.components[j].support().0;
            if prev > next {
                return bad(format!("components[{j}]: overlaps the previous component"));
            }
        }
        Ok(())
    }

    pub fn components(&self) -> &[Umm] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn valley_points(&self) -> &[f64] {
        &self.valley_points
    }

    /// Number of unimodal components `K`.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.components[0].support().0,
            self.components[self.k() - 1].support().1,
        )
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.pdf(x))
            .sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let f: f64 = self
            .components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.cdf(x))
            .sum();
        f.min(1.0)
    }

    /// Sum of log densities; `-inf` as soon as a point falls outside the
    /// support. Each component counts its right end as inside, otherwise
    /// the likelihood of the fitting data itself would always be `-inf`.
    pub fn log_likelihood(&self, xs: &[f64]) -> f64 {
        xs.iter()
            .map(|&x| {
                let p: f64 = self
                    .components
                    .iter()
                    .zip(&self.weights)
                    .map(|(c, w)| w * c.pdf_closed(x))
                    .sum();
                p.ln()
            })
            .sum()
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut j = self.k() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                j = i;
                break;
            }
        }
        self.components[j].sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_seeded(&self, count: usize, seed: u64) -> Vec<f64> {
        self.sample(count, &mut rng_from_seed(seed))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json().as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut s = String::new();
        r.read_to_string(&mut s)?;
        Self::from_json(&s)
    }

    /// Builds the mixture from a finished split.
    pub fn from_split(split: &SplitResult, alpha: f64) -> Result<Self> {
        let n: u64 = split.subsets.iter().map(Dataset::total).sum();
        let mut components = Vec::with_capacity(split.k());
        for s in &split.subsets {
            let umm = match uu_test(s, alpha)? {
                UuOutcome::Unimodal(m) => m,
                // too small to have been split; its points are the breakpoints
                UuOutcome::Multimodal(_) if s.total() < MIN_SPLIT_SIZE => {
                    Umm::through_all_points(s)
                }
                UuOutcome::Multimodal(_) => return Err(Error::UnstablePartition),
            };
            components.push(umm);
        }
        let mut weights: Vec<f64> = split
            .subsets
            .iter()
            .map(|s| s.total() as f64 / n as f64)
            .collect();
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        Udmm::new(components, weights, split.valley_points.clone())
    }
}

/// Splits `data` into unimodal subsets and fits a UMM to each.
pub fn fit_udmm(data: &Dataset, alpha: f64) -> Result<Udmm> {
    Udmm::from_split(&unisplit(data, alpha)?, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_two_sample;
    use crate::synth::{builtin, sample_mixture, sample_spec, DistSpec, Family};

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    /// Integral of a piecewise-constant density, exact per piece.
    fn integrate(m: &Udmm) -> f64 {
        let mut cuts: Vec<f64> = m
            .components()
            .iter()
            .flat_map(|c| c.breakpoints().to_vec())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                simpson(
                    |x| m.pdf(x),
                    w[0] + 1e-12 * (w[1] - w[0]),
                    w[1] - 1e-12 * (w[1] - w[0]),
                    2,
                )
            })
            .sum()
    }

    fn two_boxes() -> Udmm {
        Udmm::new(
            vec![
                Umm::new(vec![0., 1.], vec![1.]).unwrap(),
                Umm::new(vec![2., 3.], vec![1.]).unwrap(),
            ],
            vec![0.5, 0.5],
            vec![1.5],
        )
        .unwrap()
    }

    #[test]
    fn hand_example() {
        let m = two_boxes();
        assert_eq!(m.pdf(0.5), 0.5);
        assert_eq!(m.pdf(1.5), 0.0);
        assert_eq!(m.pdf(-1.0), 0.0);
        assert_eq!(m.cdf(1.5), 0.5);
        assert_eq!(m.cdf(3.0), 1.0);
        assert!((simpson(|x| m.pdf(x), 0.0, 0.999_999, 2) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn unimodal_fit_is_single_component() {
        let raw = sample_spec(
            &DistSpec::new(Family::Normal { mu: 0., sigma: 1. }, 800),
            &mut rng_from_seed(1),
        )
        .unwrap();
        let d = Dataset::from_raw(&raw).unwrap();
        let m = fit_udmm(&d, 0.01).unwrap();
        assert_eq!(m.k(), 1);
        assert_eq!(m.weights(), &[1.0]);
        let umm = uu_test(&d, 0.01).unwrap().model().unwrap().clone();
        for x in [-2.0, -0.3, 0.0, 0.7, 1.9] {
            assert_eq!(m.pdf(x), umm.pdf(x));
        }
    }

    #[test]
    fn d1_weights_and_density() {
        let (raw, _) = sample_mixture(&builtin("D1").unwrap(), &mut rng_from_seed(2)).unwrap();
        let m = fit_udmm(&Dataset::from_raw(&raw).unwrap(), 0.01).unwrap();
        assert_eq!(m.k(), 2);
        assert!((m.weights()[0] - 5.0 / 13.0).abs() < 0.02);
        assert!((integrate(&m) - 1.0).abs() < 1e-6);
        let (lo, hi) = m.support();
        assert_eq!(m.cdf(lo - 1.0), 0.0);
        assert_eq!(m.cdf(hi), 1.0);
    }

    #[test]
    fn d9_has_six_components() {
        for seed in 0..3 {
            let (raw, _) =
                sample_mixture(&builtin("D9").unwrap(), &mut rng_from_seed(seed)).unwrap();
            assert_eq!(
                fit_udmm(&Dataset::from_raw(&raw).unwrap(), 0.01)
                    .unwrap()
                    .k(),
                6
            );
        }
    }

    #[test]
    fn cdf_matches_pdf() {
        let (raw, _) = sample_mixture(&builtin("D4").unwrap(), &mut rng_from_seed(3)).unwrap();
        let m = fit_udmm(&Dataset::from_raw(&raw).unwrap(), 0.01).unwrap();
        let (lo, hi) = m.support();
        let mut prev = 0.0;
        let e = 1e-7;
        for i in 1..400 {
            let x = lo + (hi - lo) * i as f64 / 400.0;
            let f = m.cdf(x);
            assert!(f >= prev);
            prev = f;
            let near_break = m
                .components()
                .iter()
                .flat_map(|c| c.breakpoints())
                .any(|b| (b - x).abs() < 2.0 * e);
            if !near_break {
                let fd = (m.cdf(x + e) - m.cdf(x - e)) / (2.0 * e);
                assert!((fd - m.pdf(x)).abs() < 1e-6 * m.pdf(x).max(1.0));
            }
        }
    }

    #[test]
    fn sampling() {
        let one = Udmm::new(
            vec![Umm::new(vec![0., 1.], vec![1.]).unwrap()],
            vec![1.0],
            vec![],
        )
        .unwrap();
        let xs = one.sample_seeded(100_000, 4);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.005);
        assert_eq!(xs, one.sample_seeded(100_000, 4));

        let (raw, _) = sample_mixture(&builtin("D1").unwrap(), &mut rng_from_seed(5)).unwrap();
        let m = fit_udmm(&Dataset::from_raw(&raw).unwrap(), 0.01).unwrap();
        let a = Dataset::from_raw(&m.sample_seeded(100_000, 6)).unwrap();
        let b = Dataset::from_raw(&m.sample_seeded(100_000, 7)).unwrap();
        assert!(ks_two_sample(&a, &b) < 0.01);
    }

    #[test]
    fn refit_recovers_k() {
        let (raw, _) = sample_mixture(&builtin("D1").unwrap(), &mut rng_from_seed(8)).unwrap();
        let m = fit_udmm(&Dataset::from_raw(&raw).unwrap(), 0.01).unwrap();
        for seed in 0..5 {
            let again = fit_udmm(
                &Dataset::from_raw(&m.sample_seeded(1300, seed)).unwrap(),
                0.01,
            )
            .unwrap();
            assert!(again.k().abs_diff(m.k()) <= 1);
        }
    }

    #[test]
    fn log_likelihood() {
        let m = two_boxes();
        assert!((m.log_likelihood(&[0.5, 2.5]) - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(m.log_likelihood(&[1.5]), f64::NEG_INFINITY);
        // right ends count, though the pdf there is 0
        assert_eq!(m.pdf(3.0), 0.0);
        assert!(m.log_likelihood(&[3.0]).is_finite());
    }

    #[test]
    fn json_round_trip() {
        let (raw, _) = sample_mixture(&builtin("D4").unwrap(), &mut rng_from_seed(9)).unwrap();
        let m = fit_udmm(&Dataset::from_raw(&raw).unwrap(), 0.01).unwrap();
        assert_eq!(Udmm::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn hand_written_file() {
        let src = r#"{"weights": [1.0], "valley_points": [],
            "components": [{"breakpoints": [0.0, 1.0, 3.0], "weights": [0.5, 0.5]}]}"#;
        let m = Udmm::from_json(src).unwrap();
        assert_eq!(m.pdf(0.5), 0.5);
        assert_eq!(m.pdf(2.0), 0.25);
    }

    #[test]
    fn invalid_files_name_the_field() {
        let err = |s: &str| match Udmm::from_json(s) {
            Err(Error::Parse(msg)) => msg,
            other => panic!("{other:?}"),
        };
        let m = err(
            r#"{"weights": [0.8], "valley_points": [], "components": [{"breakpoints": [0, 1], "weights": [1]}]}"#,
        );
        assert!(m.contains("weights"), "{m}");
        let m = err(
            r#"{"weights": [1.0], "valley_points": [], "components": [{"breakpoints": [1, 0], "weights": [1]}]}"#,
        );
        assert!(m.contains("components[0].breakpoints"), "{m}");
        let m = err(r#"{"weights": [1.0], "components": []}"#);
        assert!(m.contains("valley_points"), "{m}");
        let m = err(
            r#"{"weights": [0.5, 0.5], "valley_points": [], "components": [{"breakpoints": [0, 1], "weights": [1]}, {"breakpoints": [2, 3], "weights": [1]}]}"#,
        );
        assert!(m.contains("valley_points"), "{m}");
    }
}
