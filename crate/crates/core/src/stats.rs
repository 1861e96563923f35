//! Kolmogorov-Smirnov uniformity test, two-sample KS distance and
//! normalized mutual information.

use std::collections::HashMap;

use crate::data::{Dataset, Span};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: u64,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form converges fast for small lambda
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 0..50 {
            let m = (2 * k + 1) as f64;
            let term = (-m * m * c).exp();
            cdf += term;
            if term < 1e-16 {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Survival function of the maximum of a standard Brownian excursion,
/// `P(M > lambda)`.
pub fn excursion_q(lambda: f64) -> f64 {
    if lambda < 0.5 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k2 = (k * k) as f64;
        let term = (4.0 * k2 * lambda * lambda - 1.0) * (-2.0 * k2 * lambda * lambda).exp();
        sum += term;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value of a KS statistic measured between two successive hull
/// vertices. The ecdf there is known to stay on one side of the chord, so
/// under uniformity the scaled deviation follows the excursion maximum
/// rather than the Kolmogorov law.
pub fn hull_segment_p_value(statistic: f64, n: u64) -> f64 {
    let sn = (n as f64).sqrt();
    excursion_q((sn + 0.12 + 0.11 / sn) * statistic)
}

/// Asymptotic p-value with the usual finite-sample correction.
pub fn ks_p_value(statistic: f64, n: u64) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * statistic)
}

/// `sup |F_n - F_U|` of the span's observations against `U(a, b)`.
pub(crate) fn uniform_statistic(span: &Span<'_>, a: f64, b: f64) -> f64 {
    let n = span.total() as f64;
    let width = b - a;
    let mut d: f64 = 0.0;
    let mut prev = 0.0;
    for i in span.lo()..=span.hi() {
        let u = ((span.x(i) - a) / width).clamp(0.0, 1.0);
        let c = span.count_through(i) as f64 / n;
        d = d.max(c - u).max(u - prev);
        prev = c;
    }
    d
}

/// Uniformity test of a span against `U(a, b)`; the bool is `true` when
/// uniformity is accepted at level `alpha`.
pub(crate) fn uniform_test_span(span: &Span<'_>, a: f64, b: f64, alpha: f64) -> (bool, KsResult) {
    let n = span.total();
    let statistic = uniform_statistic(span, a, b);
    let p_value = ks_p_value(statistic, n);
    // two observations cannot reject anything
    let accept = n <= 2 || p_value > alpha;
    (
        accept,
        KsResult {
            statistic,
            p_value,
            n_effective: n,
        },
    )
}

/// One-sample KS test of `X(a, b)` against the uniform distribution on
/// `[a, b]`.
pub fn ks_uniformity(data: &Dataset, a: f64, b: f64, alpha: f64) -> Result<(bool, KsResult)> {
    if !(a < b) {
        return Err(Error::DegenerateInterval);
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0, 0.5]"
        )));
    }
    let (lo, hi) = data.index_range(a, b).ok_or(Error::EmptyInterval)?;
    Ok(uniform_test_span(&Span::new(data, lo, hi), a, b, alpha))
}

/// Exact sup-norm distance between two weighted ecdfs.
pub fn ks_two_sample(a: &Dataset, b: &Dataset) -> f64 {
    let (na, nb) = (a.total() as f64, b.total() as f64);
    let (xa, xb) = (a.values(), b.values());
    let (ca, cb) = (a.cum(), b.cum());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        let fa = if i == 0 { 0.0 } else { ca[i - 1] as f64 / na };
        let fb = if j == 0 { 0.0 } else { cb[j - 1] as f64 / nb };
        d = d.max((fa - fb).abs());
    }
    d
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with the arithmetic-mean normalizer.
///
/// Two single-class labelings score 1.
pub fn nmi(labels_a: &[i64], labels_b: &[i64]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch(labels_a.len(), labels_b.len()));
    }
    if labels_a.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = labels_a.len() as f64;
    let mut ca: HashMap<i64, usize> = HashMap::new();
    let mut cb: HashMap<i64, usize> = HashMap::new();
    let mut joint: HashMap<(i64, i64), usize> = HashMap::new();
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        *ca.entry(a).or_default() += 1;
        *cb.entry(b).or_default() += 1;
        *joint.entry((a, b)).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    if ca.len() == 1 && cb.len() == 1 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (&(a, b), &c) in &joint {
        let pab = c as f64 / n;
        let pa = ca[&a] as f64 / n;
        let pb = cb[&b] as f64 / n;
        mi += pab * (pab / (pa * pb)).ln();
    }
    let norm = 0.5 * (ha + hb);
    if norm <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / norm).clamp(0.0, 1.0))
}
