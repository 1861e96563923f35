//! Seeded generators for the unimodal building blocks and the composite
//! benchmark distributions `D1`..`D22`.
//!
//! All randomness flows through [`SynthRng`] (ChaCha8 seeded from a `u64`),
//! so a seed pins every stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Gamma, Normal, StudentT, Triangular, Uniform};

use crate::error::{Error, Result};

pub type SynthRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SynthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Normal {
        mu: f64,
        sigma: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    /// Lower limit, mode, upper limit.
    Triangular {
        l: f64,
        d: f64,
        u: f64,
    },
    StudentT {
        nu: f64,
        loc: f64,
        scale: f64,
    },
    Cauchy {
        loc: f64,
        scale: f64,
    },
    /// Shape `k`, scale `theta`, shifted by `loc`.
    Gamma {
        k: f64,
        theta: f64,
        loc: f64,
    },
    /// The half of `N(mu, sigma)` at or above `mu`.
    HalfNormalRight {
        mu: f64,
        sigma: f64,
    },
    /// The half of `N(mu, sigma)` at or below `mu`.
    HalfNormalLeft {
        mu: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistSpec {
    pub family: Family,
    pub n: usize,
}

impl DistSpec {
    pub fn new(family: Family, n: usize) -> Self {
        DistSpec { family, n }
    }

    pub fn validate(&self) -> Result<()> {
        use Family::*;
        let ok = match self.family {
            Normal { sigma, .. } | HalfNormalRight { sigma, .. } | HalfNormalLeft { sigma, .. } => {
                sigma > 0.0
            }
            Uniform { a, b } => a < b,
            Triangular { l, d, u } => l <= d && d <= u && l < u,
            StudentT { nu, scale, .. } => nu > 0.0 && scale > 0.0,
            Cauchy { scale, .. } => scale > 0.0,
            Gamma { k, theta, .. } => k > 0.0 && theta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{:?}", self.family)))
        }
    }
}

/// `n` i.i.d. draws from `spec`.
pub fn sample_spec<R: Rng + ?Sized>(spec: &DistSpec, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n;
    let bad = |e: String| Error::InvalidParameter(e);
    let out = match spec.family {
        Family::Normal { mu, sigma } => {
            let d = Normal::new(mu, sigma).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| d.sample(rng)).collect()
        }
        Family::Uniform { a, b } => {
            let d = Uniform::new(a, b).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| d.sample(rng)).collect()
        }
        Family::Triangular { l, d, u } => {
            let t = Triangular::new(l, u, d).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| t.sample(rng)).collect()
        }
        Family::StudentT { nu, loc, scale } => {
            let t = StudentT::new(nu).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| loc + scale * t.sample(rng)).collect()
        }
        Family::Cauchy { loc, scale } => {
            let c = Cauchy::new(loc, scale).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| c.sample(rng)).collect()
        }
        Family::Gamma { k, theta, loc } => {
            let g = Gamma::new(k, theta).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| loc + g.sample(rng)).collect()
        }
        Family::HalfNormalRight { mu, sigma } => {
            let d = Normal::new(mu, sigma).map_err(|e| bad(e.to_string()))?;
            (0..n)
                .map(|_| rejection(|| d.sample(rng), |x| x >= mu))
                .collect()
        }
        Family::HalfNormalLeft { mu, sigma } => {
            let d = Normal::new(mu, sigma).map_err(|e| bad(e.to_string()))?;
            (0..n)
                .map(|_| rejection(|| d.sample(rng), |x| x <= mu))
                .collect()
        }
    };
    Ok(out)
}

fn rejection(mut draw: impl FnMut() -> f64, keep: impl Fn(f64) -> bool) -> f64 {
    loop {
        let x = draw();
        if keep(x) {
            return x;
        }
    }
}

/// Draws every component of a mixture; labels are component indices.
pub fn sample_mixture<R: Rng + ?Sized>(
    specs: &[DistSpec],
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<i64>)> {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (k, s) in specs.iter().enumerate() {
        let v = sample_spec(s, rng)?;
        labels.extend(std::iter::repeat_n(k as i64, v.len()));
        values.extend(v);
    }
    Ok((values, labels))
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 22] = [
    "D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8", "D9", "D10", "D11", "D12", "D13", "D14", "D15",
    "D16", "D17", "D18", "D19", "D20", "D21", "D22",
];

/// Built-in distribution with the default multiplier `m = 100`.
pub fn builtin(name: &str) -> Result<Vec<DistSpec>> {
    builtin_with_m(name, 100)
}

/// Built-in distribution; sizes of `D1`..`D12` are multiples of `m`, those
/// of `D13`..`D22` absolute.
pub fn builtin_with_m(name: &str, m: usize) -> Result<Vec<DistSpec>> {
    use Family::*;
    let sz = |f: f64| (f * m as f64).round() as usize;
    let nrm = |mu, sigma, n| DistSpec::new(Normal { mu, sigma }, n);
    let uni = |a, b, n| DistSpec::new(Uniform { a, b }, n);
    let tri = |l, d, u, n| DistSpec::new(Triangular { l, d, u }, n);
    let st = |nu, loc, scale, n| DistSpec::new(StudentT { nu, loc, scale }, n);
    let cau = |loc, scale, n| DistSpec::new(Cauchy { loc, scale }, n);
    let gam = |k, theta, loc, n| DistSpec::new(Gamma { k, theta, loc }, n);
    let specs = match name.to_ascii_uppercase().as_str() {
        "D1" => vec![nrm(0., 1., sz(5.)), nrm(6., 1., sz(8.))],
        "D2" => vec![nrm(-1., 0.8, sz(20.)), nrm(4., 1.5, sz(25.))],
        "D3" => vec![
            st(2., 0., 1., sz(5.)),
            uni(4., 7., sz(2.)),
            nrm(10., 1., sz(4.)),
        ],
        "D4" => vec![
            tri(-5., -4., 0., sz(3.)),
            tri(1., 5., 6., sz(5.)),
            uni(7., 10., sz(2.)),
        ],
        "D5" => vec![
            gam(1., 2., 0., sz(5.)),
            tri(5., 6., 7., sz(5.)),
            nrm(10., 0.2, sz(5.)),
            st(10., 15., 1., sz(8.)),
        ],
        "D6" => vec![
            cau(0., 2., sz(1.)),
            uni(50., 55., sz(3.)),
            uni(100., 105., sz(3.)),
            st(1., 200., 1., sz(1.)),
        ],
        "D7" => vec![uni(-1., 1., sz(10.)), uni(2., 7., sz(12.))],
        "D8" => vec![
            st(1., -10., 1., sz(2.)),
            st(2., 0., 1., sz(3.)),
            st(1., 5., 1., sz(3.5)),
            st(3., 15., 1., sz(2.5)),
            st(5., 20., 1., sz(4.)),
        ],
        "D9" => vec![
            uni(-20., -15., sz(10.)),
            uni(-10., 0., sz(25.)),
            uni(1., 10., sz(30.)),
            uni(12., 14., sz(20.)),
            uni(20., 50., sz(15.)),
            uni(55., 60., sz(5.)),
        ],
        "D10" => vec![
            uni(-15., -7., sz(50.)),
            nrm(-2., 4., sz(40.)),
            nrm(9., 3., sz(30.)),
            uni(15., 20., sz(20.)),
        ],
        "D11" => vec![
            st(5., -2., 1., sz(2.)),
            nrm(5., 0.5, sz(2.)),
            uni(7., 10., sz(2.)),
            gam(2., 3., 12., sz(2.)),
            uni(25., 30., sz(2.)),
            tri(40., 45., 50., sz(2.)),
            tri(55., 56., 60., sz(2.)),
        ],
        "D12" => vec![
            st(1., -50., 1., sz(1.)),
            cau(0., 2., sz(1.)),
            uni(30., 60., sz(1.)),
        ],
        "D13" => vec![nrm(0., 1.7, 700), nrm(5., 1., 500)],
        "D14" => vec![uni(-1., 3., 300), uni(8., 10., 200)],
        "D15" => vec![tri(0.8, 1., 5., 1000), tri(3., 7.8, 8., 1000)],
        "D16" => vec![
            DistSpec::new(HalfNormalRight { mu: 0., sigma: 1. }, 1000),
            DistSpec::new(HalfNormalLeft { mu: 4., sigma: 1. }, 1000),
        ],
        "D17" => vec![tri(-3.3, 1., 2.5, 1000), nrm(4., 1., 1000)],
        "D18" => vec![uni(-2., 0., 200), uni(1., 5., 300), uni(6., 7., 450)],
        "D19" => vec![
            nrm(0., 1., 500),
            nrm(6., 1., 80),
            nrm(12., 1., 500),
            nrm(18., 1., 100),
        ],
        "D20" => vec![
            nrm(0., 1., 500),
            nrm(4., 1., 300),
            nrm(11., 1., 500),
            uni(14., 15., 50),
        ],
        "D21" => vec![
            nrm(0., 1., 500),
            nrm(4., 1., 300),
            uni(10., 11., 100),
            uni(14., 15., 50),
        ],
        "D22" => vec![
            nrm(0., 1., 500),
            uni(2.5, 4., 200),
            uni(10., 11., 100),
            uni(14., 15., 50),
        ],
        _ => return Err(Error::UnknownDistribution(name.to_string())),
    };
    Ok(specs)
}
