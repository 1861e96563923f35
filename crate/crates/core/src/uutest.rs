//! Unimodality decision over gcm/lcm critical points and the Uniform
//! Mixture Model it produces.
//!
//! Every pair of successive gcm points and successive lcm points is tested
//! for uniformity. A unimodal piecewise-linear cdf uses gcm points up to
//! some switch point and lcm points after it, so the longest uniform gcm
//! prefix and lcm suffix are kept and the stretch between them is either
//! uniform or refined with its own gcm/lcm points, and so on inwards. When a
//! level makes no progress (its first gcm pair and last lcm pair both fail)
//! the sample is multimodal and the rejected pairs of that level are the
//! candidate splitting intervals. Otherwise the kept points are the UMM
//! breakpoints.
//!
//! Pair tests account for the data sitting on one side of a hull chord and
//! for the number of pairs tested at once; a plain KS test at level `alpha`
//! on each pair rejects uniform samples far more often than `alpha`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Span};
use crate::error::{Error, Result};
use crate::hull::{lower_hull, upper_hull};
use crate::stats::{hull_segment_p_value, uniform_statistic, uniform_test_span};

const MAX_MIDDLE_DEPTH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Gcm,
    Lcm,
}

/// A non-uniform interval between successive same-kind critical points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub a: f64,
    pub b: f64,
    pub kind: PairKind,
    pub(crate) lo: usize,
    pub(crate) hi: usize,
}

/// Uniform Mixture Model: component `i` is uniform on
/// `[breakpoints[i], breakpoints[i + 1])` with mixing weight `weights[i]`.
///
/// A single component with equal breakpoints is a point mass; its cdf steps
/// at the point and its pdf is zero everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Umm {
    breakpoints: Vec<f64>,
    weights: Vec<f64>,
}

impl Umm {
    pub fn new(breakpoints: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let m = Self {
            breakpoints,
            weights,
        };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if self.weights.is_empty() || self.breakpoints.len() != self.weights.len() + 1 {
            return bad(format!(
                "breakpoints: expected {} entries for {} weights, found {}",
                self.weights.len() + 1,
                self.weights.len(),
                self.breakpoints.len()
            ));
        }
        if self.breakpoints.iter().any(|b| !b.is_finite()) {
            return bad("breakpoints: non-finite value".into());
        }
        let strict = self.weights.len() > 1;
        if self
            .breakpoints
            .windows(2)
            .any(|w| if strict { w[0] >= w[1] } else { w[0] > w[1] })
        {
            return bad("breakpoints: must be strictly increasing".into());
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("weights: negative or non-finite entry".into());
        }
        let s: f64 = self.weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return bad(format!("weights: sum {s} is not 1"));
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of uniform components `M`.
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// Per-segment densities `pi_i / (s_{i+1} - s_i)`.
    pub fn densities(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(w, s)| if s[1] > s[0] { w / (s[1] - s[0]) } else { 0.0 })
            .collect()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x < hi) {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&s| s <= x) - 1;
        let width = self.breakpoints[i + 1] - self.breakpoints[i];
        self.weights[i] / width
    }

    /// [`Umm::pdf`] with the last segment closed on the right, so the
    /// sample maximum a model was fitted to keeps a positive density.
    pub fn pdf_closed(&self, x: f64) -> f64 {
        let m = self.n_components();
        if x == self.support().1 {
            self.weights[m - 1] / (self.breakpoints[m] - self.breakpoints[m - 1])
        } else {
            self.pdf(x)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let i = self.breakpoints.partition_point(|&s| s <= x) - 1;
        let below: f64 = self.weights[..i].iter().sum();
        let (s0, s1) = (self.breakpoints[i], self.breakpoints[i + 1]);
        (below + self.weights[i] * (x - s0) / (s1 - s0)).min(1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut i = self.weights.len() - 1;
        for (k, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                i = k;
                break;
            }
        }
        let (s0, s1) = (self.breakpoints[i], self.breakpoints[i + 1]);
        s0 + (s1 - s0) * rng.random::<f64>()
    }

    /// UMM with a breakpoint at every distinct value of `data`.
    pub fn through_all_points(data: &Dataset) -> Umm {
        let span = data.span();
        let knots: Vec<usize> = (span.lo()..=span.hi()).collect();
        Umm::from_knots(&span, &knots)
    }

    /// `pi_i = N_i / N` with `N_i` counting `[s_i, s_{i+1})`, the last
    /// segment closed.
    pub(crate) fn from_knots(span: &Span<'_>, knots: &[usize]) -> Umm {
        let n = span.total() as f64;
        let breakpoints: Vec<f64> = knots.iter().map(|&k| span.x(k)).collect();
        if knots.len() == 1 {
            return Umm {
                breakpoints: vec![breakpoints[0]; 2],
                weights: vec![1.0],
            };
        }
        let last = knots.len() - 2;
        let mut weights = Vec::with_capacity(knots.len() - 1);
        for (i, w) in knots.windows(2).enumerate() {
            let before = |k: usize| {
                if k == span.lo() {
                    0
                } else {
                    span.count_through(k - 1)
                }
            };
            let end = if i == last {
                span.count_through(w[1])
            } else {
                before(w[1])
            };
            weights.push((end - before(w[0])) as f64 / n);
        }
        // absorb rounding so the invariant holds to the last bit
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        Umm {
            breakpoints,
            weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UuOutcome {
    Unimodal(Umm),
    Multimodal(Vec<Candidate>),
}

impl UuOutcome {
    pub fn is_unimodal(&self) -> bool {
        matches!(self, UuOutcome::Unimodal(_))
    }

    pub fn model(&self) -> Option<&Umm> {
        match self {
            UuOutcome::Unimodal(m) => Some(m),
            UuOutcome::Multimodal(_) => None,
        }
    }

    pub fn candidates(&self) -> &[Candidate] {
        match self {
            UuOutcome::Unimodal(_) => &[],
            UuOutcome::Multimodal(c) => c,
        }
    }
}

/// Candidates found in `span`, or the knot indices of a unimodal fit when
/// there are none.
pub(crate) fn analyze(span: &Span<'_>, alpha: f64) -> (Vec<Candidate>, Vec<usize>) {
    // every vertex pair of one level is tested; Bonferroni keeps the
    // level's family-wise error at alpha
    let pair_uniform = |lo: usize, hi: usize, pairs: usize| {
        let sub = Span::new(span.dataset(), lo, hi);
        let n = sub.total();
        n <= 2
            || hull_segment_p_value(uniform_statistic(&sub, sub.a(), sub.b()), n)
                > alpha / pairs as f64
    };

    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut cur = *span;
    for depth in 0.. {
        if cur.len() <= 2 {
            left.extend(cur.lo()..=cur.hi());
            break;
        }
        let g = lower_hull(&cur);
        let l = upper_hull(&cur);
        let mut found = Vec::new();
        let np = g.len() + l.len() - 2;
        let g_ok: Vec<bool> = g.windows(2).map(|w| pair_uniform(w[0], w[1], np)).collect();
        let l_ok: Vec<bool> = l.windows(2).map(|w| pair_uniform(w[0], w[1], np)).collect();
        for (w, &ok) in g.windows(2).zip(&g_ok) {
            if !ok {
                found.push(Candidate {
                    a: cur.x(w[0]),
                    b: cur.x(w[1]),
                    kind: PairKind::Gcm,
                    lo: w[0],
                    hi: w[1],
                });
            }
        }
        for (w, &ok) in l.windows(2).zip(&l_ok) {
            if !ok {
                found.push(Candidate {
                    a: cur.x(w[0]),
                    b: cur.x(w[1]),
                    kind: PairKind::Lcm,
                    lo: w[0],
                    hi: w[1],
                });
            }
        }
        // longest uniform gcm prefix and lcm suffix
        let gi = g_ok.iter().take_while(|&&ok| ok).count();
        let lj = l.len() - 1 - l_ok.iter().rev().take_while(|&&ok| ok).count();
        let lj = lj.max(l.partition_point(|&i| i < g[gi]));
        if gi == 0 && lj == l.len() - 1 {
            return (found, Vec::new());
        }
        left.extend_from_slice(&g[..=gi]);
        right.extend_from_slice(&l[lj..]);
        let mid = cur.sub(g[gi], l[lj]);
        if mid.len() <= 2
            || depth >= MAX_MIDDLE_DEPTH
            || uniform_test_span(&mid, mid.a(), mid.b(), alpha).0
        {
            break;
        }
        cur = mid;
    }
    left.extend(right);
    left.sort_unstable();
    left.dedup();
    (Vec::new(), left)
}

pub(crate) fn uu_span(span: &Span<'_>, alpha: f64) -> UuOutcome {
    let (candidates, knots) = analyze(span, alpha);
    if candidates.is_empty() {
        UuOutcome::Unimodal(Umm::from_knots(span, &knots))
    } else {
        UuOutcome::Multimodal(candidates)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0, 0.5]"
        )))
    }
}

/// Decides unimodality of `data` at significance level `alpha`.
pub fn uu_test(data: &Dataset, alpha: f64) -> Result<UuOutcome> {
    check_alpha(alpha)?;
    Ok(uu_span(&data.span(), alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PiecewiseLinearCdf;
    use crate::stats::ks_uniformity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, Uniform};

    fn normal(mu: f64, sd: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = Normal::new(mu, sd).unwrap();
        (0..n).map(|_| d.sample(rng)).collect()
    }

    fn is_unimodal_sequence(v: &[f64]) -> bool {
        let peak = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, &x)| if x > v[best] { i } else { best });
        v[..=peak].windows(2).all(|w| w[0] <= w[1]) && v[peak..].windows(2).all(|w| w[0] >= w[1])
    }

    fn chord_slopes(d: &Dataset, knots: &[f64]) -> Vec<f64> {
        let f = d.ecdf();
        knots
            .windows(2)
            .map(|w| (f.eval(w[1]) - f.eval(w[0])) / (w[1] - w[0]))
            .collect()
    }

    #[test]
    fn gaussian_is_unimodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = Dataset::from_raw(&normal(0.0, 1.0, 1000, &mut rng)).unwrap();
        let out = uu_test(&d, 0.01).unwrap();
        let m = out.model().expect("unimodal");
        assert!(m.breakpoints().len() >= 2);
        assert_eq!(m.support(), (d.min(), d.max()));
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // PL through the knots is unimodal and reproduces the ecdf there
        assert!(is_unimodal_sequence(&chord_slopes(&d, m.breakpoints())));
        let pl = PiecewiseLinearCdf::from_knots(&d, m.breakpoints()).unwrap();
        for &k in m.breakpoints() {
            assert_eq!(pl.eval(k), d.ecdf().eval(k));
        }
    }

    #[test]
    fn bimodal_gives_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut raw = normal(0.0, 1.0, 500, &mut rng);
        raw.extend(normal(6.0, 1.0, 800, &mut rng));
        let d = Dataset::from_raw(&raw).unwrap();
        let out = uu_test(&d, 0.01).unwrap();
        assert!(!out.is_unimodal());
        assert!(out.candidates().iter().any(|c| c.a < 4.5 && c.b > 1.5));
        for c in out.candidates() {
            let (ok, _) = ks_uniformity(&d, c.a, c.b, 0.01).unwrap();
            assert!(!ok);
        }
    }

    #[test]
    fn two_points_single_component() {
        let d = Dataset::from_raw(&[1.0, 4.0]).unwrap();
        let m = uu_test(&d, 0.01).unwrap().model().cloned().unwrap();
        assert_eq!(m.breakpoints(), &[1.0, 4.0]);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn single_value_is_point_mass() {
        let d = Dataset::from_raw(&[2.0, 2.0, 2.0]).unwrap();
        let m = uu_test(&d, 0.01).unwrap().model().cloned().unwrap();
        assert_eq!(m.support(), (2.0, 2.0));
        assert_eq!(m.cdf(1.999), 0.0);
        assert_eq!(m.cdf(2.0), 1.0);
        assert_eq!(m.pdf(2.0), 0.0);
    }

    #[test]
    fn umm_examples() {
        let m = Umm::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(m.pdf(0.5), 1.0);
        let m = Umm::new(vec![0.0, 1.0, 3.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.pdf(2.0), 0.25);
        assert_eq!(m.pdf(-1.0), 0.0);
        assert_eq!(m.pdf(3.0), 0.0);
        assert_eq!(m.cdf(1.0), 0.5);
        assert_eq!(m.cdf(2.0), 0.75);
        assert_eq!(m.cdf(10.0), 1.0);
        assert_eq!(m.cdf(-0.1), 0.0);
    }

    #[test]
    fn umm_validation() {
        assert!(Umm::new(vec![0.0, 1.0], vec![0.8]).is_err());
        assert!(Umm::new(vec![0.0, 1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(Umm::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(Umm::new(vec![0.0, 1.0, 2.0], vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn umm_integrates_to_one_and_cdf_is_antiderivative() {
        let m = Umm::new(vec![-1.0, 0.0, 0.5, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        // Simpson on each segment's interior (pdf is constant there)
        let (lo, hi) = (-2.0, 4.0);
        let panels = 100_000;
        let h = (hi - lo) / panels as f64;
        let mut s = m.pdf(lo) + m.pdf(hi);
        for k in 1..panels {
            let x = lo + h * k as f64;
            s += m.pdf(x) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        assert!((s * h / 3.0 - 1.0).abs() < 1e-4);
        for w in m.breakpoints().windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let e = 1e-6;
            let fd = (m.cdf(mid + e) - m.cdf(mid - e)) / (2.0 * e);
            assert!((fd - m.pdf(mid)).abs() < 1e-6);
        }
    }

    #[test]
    fn uniform_samples_rarely_rejected() {
        let mut accepted = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let u = Uniform::new(-3.0, 5.0).unwrap();
            let raw: Vec<f64> = (0..500).map(|_| u.sample(&mut rng)).collect();
            let d = Dataset::from_raw(&raw).unwrap();
            if uu_test(&d, 0.01).unwrap().is_unimodal() {
                accepted += 1;
            }
        }
        assert!(accepted >= 95, "accepted {accepted}/100");
    }

    #[test]
    fn affine_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // dyadic values make 4x + 1024 exact
        let raw: Vec<f64> = normal(0.0, 1.0, 800, &mut rng)
            .into_iter()
            .chain(normal(5.0, 1.0, 300, &mut rng))
            .map(|v| (v * 1024.0).round() / 1024.0)
            .collect();
        for take in [800, 1100] {
            let d = Dataset::from_raw(&raw[..take]).unwrap();
            let e = Dataset::from_raw(
                &raw[..take]
                    .iter()
                    .map(|v| 4.0 * v + 1024.0)
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let (o1, o2) = (uu_test(&d, 0.01).unwrap(), uu_test(&e, 0.01).unwrap());
            assert_eq!(o1.is_unimodal(), o2.is_unimodal());
            if let (Some(m1), Some(m2)) = (o1.model(), o2.model()) {
                let mapped: Vec<f64> = m1.breakpoints().iter().map(|v| 4.0 * v + 1024.0).collect();
                assert_eq!(mapped, m2.breakpoints());
            }
            for (c1, c2) in o1.candidates().iter().zip(o2.candidates()) {
                assert_eq!(4.0 * c1.a + 1024.0, c2.a);
                assert_eq!(4.0 * c1.b + 1024.0, c2.b);
            }
        }
    }
}
