//! Valley-point detection and recursive splitting into a minimal unimodal
//! partition.

use std::collections::HashSet;

use crate::data::{Dataset, Span};
use crate::error::{Error, Result};
use crate::uutest::{check_alpha, uu_span, Candidate, PairKind, UuOutcome};

/// Subsets with fewer raw observations are never split.
pub const MIN_SPLIT_SIZE: u64 = 4;

/// Point of maximum deviation of an interval's ecdf from the uniform cdf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdPoint {
    pub x: f64,
    pub deviation: f64,
}

/// Output of [`unisplit`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    /// Strictly increasing, strictly inside the sample range.
    pub valley_points: Vec<f64>,
    /// `valley_points.len() + 1` contiguous pieces of the input.
    pub subsets: Vec<Dataset>,
    /// Subset index of every raw observation, in the order the input was
    /// given (sorted order for [`unisplit`]).
    pub labels: Vec<usize>,
}

impl SplitResult {
    pub fn k(&self) -> usize {
        self.subsets.len()
    }

    /// Subset index for an arbitrary value: values `<= vp` fall left.
    pub fn label_of(&self, x: f64) -> usize {
        self.valley_points.partition_point(|&vp| vp < x)
    }
}

/// `(index, deviation)` of the MD point over values strictly inside `(a, b)`.
pub(crate) fn md_span(span: &Span<'_>, a: f64, b: f64) -> Option<(usize, f64)> {
    let n = span.total() as f64;
    let width = b - a;
    let mut best: Option<(usize, f64)> = None;
    for i in span.lo()..=span.hi() {
        let x = span.x(i);
        if x <= a || x >= b {
            continue;
        }
        let dev = (span.count_through(i) as f64 / n - (x - a) / width).abs();
        // strict comparison keeps the smaller x on ties
        if best.is_none_or(|(_, d)| dev > d) {
            best = Some((i, dev));
        }
    }
    best
}

/// Multimodality degree of `X(a, b)`.
pub fn multimodality_degree(data: &Dataset, a: f64, b: f64) -> Result<MdPoint> {
    if !(a < b) {
        return Err(Error::DegenerateInterval);
    }
    let (lo, hi) = data.index_range(a, b).ok_or(Error::DegenerateInterval)?;
    let span = Span::new(data, lo, hi);
    if span.total() < 2 {
        return Err(Error::DegenerateInterval);
    }
    let (i, deviation) = md_span(&span, a, b).ok_or(Error::DegenerateInterval)?;
    Ok(MdPoint {
        x: data.values()[i],
        deviation,
    })
}

fn candidate_degree(data: &Dataset, c: &Candidate) -> f64 {
    md_span(&Span::new(data, c.lo, c.hi), c.a, c.b).map_or(0.0, |(_, d)| d)
}

/// Candidate with the largest multimodality degree; ties go to the wider
/// interval, then the smaller left end.
fn best_interval(data: &Dataset, candidates: &[Candidate]) -> Candidate {
    let mut best = candidates[0];
    let mut best_deg = candidate_degree(data, &best);
    for c in &candidates[1..] {
        let deg = candidate_degree(data, c);
        let better = deg > best_deg
            || (deg == best_deg
                && ((c.b - c.a) > (best.b - best.a)
                    || ((c.b - c.a) == (best.b - best.a) && c.a < best.a)));
        if better {
            best = *c;
            best_deg = deg;
        }
    }
    best
}

/// Moves a valley point off a data value, keeping that value on the left.
fn avoid_data_value(data: &Dataset, vp: f64) -> f64 {
    let v = data.values();
    match v.binary_search_by(|x| x.total_cmp(&vp)) {
        Ok(j) if j + 1 < v.len() => 0.5 * (v[j] + v[j + 1]),
        Ok(j) if j > 0 => 0.5 * (v[j - 1] + v[j]),
        _ => vp,
    }
}

fn valley_from(span: &Span<'_>, t: &Candidate) -> f64 {
    let vp = match md_span(span, t.a, t.b) {
        Some((i, _)) => {
            let x_md = span.x(i);
            match t.kind {
                PairKind::Gcm => 0.5 * (x_md + t.b),
                PairKind::Lcm => 0.5 * (t.a + x_md),
            }
        }
        None => 0.5 * (t.a + t.b),
    };
    avoid_data_value(span.dataset(), vp)
}

/// Valley point of a multimodal span given its uu-test outcome.
pub(crate) fn find_vp_span(span: &Span<'_>, outcome: UuOutcome, alpha: f64) -> Option<f64> {
    let data = span.dataset();
    let mut candidates = match outcome {
        UuOutcome::Unimodal(_) => return None,
        UuOutcome::Multimodal(c) => c,
    };
    let mut cur = (span.lo(), span.hi());
    loop {
        // a candidate covering the whole span cannot be narrowed further
        let narrower: Vec<Candidate> = candidates
            .iter()
            .copied()
            .filter(|c| (c.lo, c.hi) != cur)
            .collect();
        if narrower.is_empty() {
            let t = best_interval(data, &candidates);
            return Some(valley_from(&Span::new(data, t.lo, t.hi), &t));
        }
        let t = best_interval(data, &narrower);
        let sub = Span::new(data, t.lo, t.hi);
        match uu_span(&sub, alpha) {
            UuOutcome::Unimodal(_) => return Some(valley_from(&sub, &t)),
            UuOutcome::Multimodal(c) => candidates = c,
        }
        cur = (t.lo, t.hi);
    }
}

/// Valley point of multimodal data.
pub fn find_vp(data: &Dataset, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let span = data.span();
    let outcome = uu_span(&span, alpha);
    find_vp_span(&span, outcome, alpha).ok_or(Error::NoValley)
}

/// Recursive splitting of `span` into unimodal pieces. Returns the ordered
/// index ranges and, for every cut, the last index left of it with the
/// valley point that produced it.
fn split_spans(span: &Span<'_>, alpha: f64) -> (Vec<(usize, usize)>, Vec<(usize, f64)>) {
    let data = span.dataset();
    let mut leaves = Vec::new();
    let mut cuts = Vec::new();
    let mut work = vec![(span.lo(), span.hi())];
    while let Some((lo, hi)) = work.pop() {
        let s = Span::new(data, lo, hi);
        if s.total() < MIN_SPLIT_SIZE || s.len() < 2 {
            leaves.push((lo, hi));
            continue;
        }
        let outcome = uu_span(&s, alpha);
        let Some(vp) = find_vp_span(&s, outcome, alpha) else {
            leaves.push((lo, hi));
            continue;
        };
        let cut = data.values()[lo..=hi].partition_point(|&x| x <= vp) + lo;
        debug_assert!(cut > lo && cut <= hi);
        cuts.push((cut - 1, vp));
        work.push((cut, hi));
        work.push((lo, cut - 1));
    }
    leaves.sort_unstable();
    cuts.sort_unstable_by_key(|c| c.0);
    (leaves, cuts)
}

/// Left-to-right merging of adjacent pieces whose union is unimodal,
/// restarted after every merge.
fn merge_spans(data: &Dataset, mut parts: Vec<(usize, usize)>, alpha: f64) -> Vec<(usize, usize)> {
    let mut rejected: HashSet<(usize, usize)> = HashSet::new();
    'sweep: loop {
        for i in 0..parts.len().saturating_sub(1) {
            let union = (parts[i].0, parts[i + 1].1);
            if rejected.contains(&union) {
                continue;
            }
            if uu_span(&Span::new(data, union.0, union.1), alpha).is_unimodal() {
                parts[i] = union;
                parts.remove(i + 1);
                continue 'sweep;
            }
            rejected.insert(union);
        }
        return parts;
    }
}

/// Splits `data` into a minimal unimodal partition.
pub fn unisplit(data: &Dataset, alpha: f64) -> Result<SplitResult> {
    check_alpha(alpha)?;
    let (leaves, cuts) = split_spans(&data.span(), alpha);
    let parts = merge_spans(data, leaves, alpha);
    let valley_points = parts
        .windows(2)
        .map(|w| {
            let i = cuts
                .binary_search_by_key(&w[0].1, |c| c.0)
                .expect("boundary has a cut");
            cuts[i].1
        })
        .collect();
    let subsets = parts.iter().map(|&(lo, hi)| data.slice(lo, hi)).collect();
    let mut labels = Vec::with_capacity(data.total() as usize);
    for (k, &(lo, hi)) in parts.iter().enumerate() {
        let n: u64 = data.weights()[lo..=hi].iter().sum();
        labels.extend(std::iter::repeat_n(k, n as usize));
    }
    Ok(SplitResult {
        valley_points,
        subsets,
        labels,
    })
}

/// [`unisplit`] on raw observations; labels follow the input order.
pub fn unisplit_samples(raw: &[f64], alpha: f64) -> Result<SplitResult> {
    let data = Dataset::from_raw(raw)?;
    let mut out = unisplit(&data, alpha)?;
    out.labels = raw.iter().map(|&x| out.label_of(x)).collect();
    Ok(out)
}

/// Merges adjacent unimodal unions of ordered, contiguous subsets.
pub fn merge_pass(subsets: &[Dataset], alpha: f64) -> Result<Vec<Dataset>> {
    check_alpha(alpha)?;
    if subsets.is_empty() {
        return Ok(Vec::new());
    }
    let all = Dataset::concat(subsets)?;
    let mut parts = Vec::with_capacity(subsets.len());
    let mut start = 0;
    for s in subsets {
        parts.push((start, start + s.len() - 1));
        start += s.len();
    }
    Ok(merge_spans(&all, parts, alpha)
        .into_iter()
        .map(|(lo, hi)| all.slice(lo, hi))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{builtin, rng_from_seed, sample_mixture, sample_spec, DistSpec, Family};
    use crate::uutest::uu_test;

    const ALPHA: f64 = 0.01;

    fn mixture(name: &str, seed: u64) -> Vec<f64> {
        sample_mixture(&builtin(name).unwrap(), &mut rng_from_seed(seed))
            .unwrap()
            .0
    }

    fn normals(parts: &[(f64, f64, usize)], seed: u64) -> Vec<f64> {
        let specs: Vec<DistSpec> = parts
            .iter()
            .map(|&(mu, sigma, n)| DistSpec::new(Family::Normal { mu, sigma }, n))
            .collect();
        sample_mixture(&specs, &mut rng_from_seed(seed)).unwrap().0
    }

    /// Lowest-count bin of a fine histogram over `[lo, hi]`.
    fn histogram_valley(xs: &[f64], lo: f64, hi: f64) -> f64 {
        let bins = 40;
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in xs {
            if x >= lo && x < hi {
                counts[((x - lo) / w) as usize] += 1;
            }
        }
        let i = (0..bins).min_by_key(|&i| counts[i]).unwrap();
        lo + (i as f64 + 0.5) * w
    }

    fn assert_minimal(res: &SplitResult) {
        for w in res.subsets.windows(2) {
            let union = Dataset::concat(w).unwrap();
            assert!(!uu_test(&union, ALPHA).unwrap().is_unimodal());
        }
    }

    #[test]
    fn md_example() {
        let d = Dataset::from_raw(&[1., 1.5, 2., 8., 8.5, 9.]).unwrap();
        let md = multimodality_degree(&d, 0., 10.).unwrap();
        assert_eq!(md.x, 2.0);
        assert!((md.deviation - 0.3).abs() < 1e-12);
    }

    #[test]
    fn md_grid_is_small_and_mirrors() {
        let n = 101;
        let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let d = Dataset::from_raw(&grid).unwrap();
        assert!(multimodality_degree(&d, 0., 1.).unwrap().deviation <= 1.0 / n as f64);

        let xs = [0.1, 0.2, 0.25, 0.7, 0.9];
        let d = Dataset::from_raw(&xs).unwrap();
        let m = Dataset::from_raw(&xs.map(|x| 1.0 - x)).unwrap();
        let a = multimodality_degree(&d, 0., 1.).unwrap();
        let b = multimodality_degree(&m, 0., 1.).unwrap();
        // mirroring turns F into 1 - F(x-), shifting the deviation by at most 1/n
        assert!((a.deviation - b.deviation).abs() <= 1.0 / xs.len() as f64 + 1e-12);
    }

    #[test]
    fn md_errors() {
        let d = Dataset::from_raw(&[1., 2., 3.]).unwrap();
        assert_eq!(
            multimodality_degree(&d, 2., 2.),
            Err(Error::DegenerateInterval)
        );
        assert_eq!(
            multimodality_degree(&d, 1.5, 1.9),
            Err(Error::DegenerateInterval)
        );
    }

    #[test]
    fn symmetric_bimodal_valley() {
        let raw = normals(&[(-3., 0.5, 1000), (3., 0.5, 1000)], 11);
        let d = Dataset::from_raw(&raw).unwrap();
        let vp = find_vp(&d, ALPHA).unwrap();
        assert!(vp > -1.0 && vp < 1.0, "vp {vp}");
        let oracle = histogram_valley(&raw, -4.0, 4.0);
        assert!((vp - oracle).abs() < 1.5, "vp {vp} oracle {oracle}");
    }

    #[test]
    fn uniform_blocks_valley() {
        let d = Dataset::from_raw(&mixture("D14", 3)).unwrap();
        let vp = find_vp(&d, ALPHA).unwrap();
        assert!(vp > 3.0 && vp < 8.0, "vp {vp}");
        assert!(d.values().binary_search_by(|x| x.total_cmp(&vp)).is_err());
    }

    #[test]
    fn unimodal_has_no_valley() {
        let raw = sample_spec(
            &DistSpec::new(Family::Normal { mu: 0., sigma: 1. }, 500),
            &mut rng_from_seed(2),
        )
        .unwrap();
        let d = Dataset::from_raw(&raw).unwrap();
        assert_eq!(find_vp(&d, ALPHA), Err(Error::NoValley));
        let r = unisplit(&d, ALPHA).unwrap();
        assert_eq!(r.k(), 1);
        assert!(r.valley_points.is_empty());
    }

    #[test]
    fn three_modes_need_recursion() {
        let raw = normals(&[(0., 1., 600), (8., 1., 600), (16., 1., 600)], 4);
        let r = unisplit_samples(&raw, ALPHA).unwrap();
        assert_eq!(r.k(), 3);
        assert!(r.valley_points[0] > 2.0 && r.valley_points[0] < 6.0);
        assert!(r.valley_points[1] > 10.0 && r.valley_points[1] < 14.0);
    }

    #[test]
    fn three_uniform_blocks() {
        for seed in 0..5 {
            let r = unisplit_samples(&mixture("D18", seed), ALPHA).unwrap();
            assert_eq!(r.valley_points.len(), 2, "seed {seed}");
            assert!(r.valley_points[0] > 0.0 && r.valley_points[0] < 1.0);
            assert!(r.valley_points[1] > 5.0 && r.valley_points[1] < 6.0);
        }
    }

    #[test]
    fn four_gaussians() {
        let r = unisplit_samples(&mixture("D19", 1), ALPHA).unwrap();
        assert_eq!(r.valley_points.len(), 3);
        for (vp, want) in r.valley_points.iter().zip([3.0, 9.0, 15.0]) {
            assert!((vp - want).abs() < 1.5, "vp {vp} want {want}");
        }
    }

    #[test]
    fn labels_follow_input_order() {
        let raw = mixture("D14", 8);
        let r = unisplit_samples(&raw, ALPHA).unwrap();
        for (&x, &l) in raw.iter().zip(&r.labels) {
            assert_eq!(l, usize::from(x > r.valley_points[0]));
        }
        let sorted = unisplit(&Dataset::from_raw(&raw).unwrap(), ALPHA).unwrap();
        assert!(sorted.labels.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(sorted.labels.len(), raw.len());
    }

    #[test]
    fn merge_restores_split_gaussian() {
        let raw = sample_spec(
            &DistSpec::new(Family::Normal { mu: 0., sigma: 1. }, 1000),
            &mut rng_from_seed(6),
        )
        .unwrap();
        let d = Dataset::from_raw(&raw).unwrap();
        let mid = d.len() / 2;
        let halves = [d.slice(0, mid - 1), d.slice(mid, d.len() - 1)];
        let merged = merge_pass(&halves, ALPHA).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0], d);
    }

    #[test]
    fn merge_keeps_only_unimodal_unions() {
        // left mode cut in two, then a separate right mode
        let raw = normals(&[(0., 1., 800), (10., 1., 800)], 12);
        let d = Dataset::from_raw(&raw).unwrap();
        let (a, b) = (
            d.index_range(f64::MIN, 0.0).unwrap().1,
            d.index_range(f64::MIN, 5.0).unwrap().1,
        );
        let parts = [
            d.slice(0, a),
            d.slice(a + 1, b),
            d.slice(b + 1, d.len() - 1),
        ];
        let merged = merge_pass(&parts, ALPHA).unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].max(), parts[1].max());
    }

    #[test]
    fn merge_fixed_point() {
        let r = unisplit_samples(&mixture("D4", 2), ALPHA).unwrap();
        assert_eq!(merge_pass(&r.subsets, ALPHA).unwrap(), r.subsets);
        assert!(merge_pass(&[], ALPHA).unwrap().is_empty());
    }

    #[test]
    fn small_sets_never_split() {
        let d = Dataset::from_raw(&[0., 0.01, 100.]).unwrap();
        assert_eq!(unisplit(&d, ALPHA).unwrap().k(), 1);
    }

    #[test]
    fn rejects_bad_alpha() {
        let d = Dataset::from_raw(&[0., 1., 2., 3.]).unwrap();
        assert!(matches!(unisplit(&d, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(find_vp(&d, 0.7), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn affine_equivariance() {
        // dyadic values keep 4x + 1024 and the midpoints exact
        let raw: Vec<f64> = mixture("D1", 5)
            .iter()
            .map(|x| (x * 64.0).round() / 64.0)
            .collect();
        let mapped: Vec<f64> = raw.iter().map(|x| 4.0 * x + 1024.0).collect();
        let r = unisplit_samples(&raw, ALPHA).unwrap();
        let m = unisplit_samples(&mapped, ALPHA).unwrap();
        assert_eq!(r.k(), m.k());
        for (a, b) in r.valley_points.iter().zip(&m.valley_points) {
            assert!(((4.0 * a + 1024.0) - b).abs() <= 1e-9 * b.abs());
        }
        assert_eq!(r.labels, m.labels);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn partition_invariants(seed in 0u64..10_000, which in 0usize..4) {
                let name = ["D1", "D4", "D14", "D18"][which];
                let raw = mixture(name, seed);
                let d = Dataset::from_raw(&raw).unwrap();
                let r = unisplit(&d, ALPHA).unwrap();

                // tiling
                prop_assert_eq!(Dataset::concat(&r.subsets).unwrap(), d.clone());
                prop_assert_eq!(r.valley_points.len() + 1, r.k());
                prop_assert!(r.valley_points.windows(2).all(|w| w[0] < w[1]));
                for (i, s) in r.subsets.iter().enumerate() {
                    if i > 0 {
                        prop_assert!(s.min() > r.valley_points[i - 1]);
                    }
                    if i + 1 < r.k() {
                        prop_assert!(s.max() <= r.valley_points[i]);
                    }
                }

                // every piece unimodal and idempotent
                for s in &r.subsets {
                    prop_assert!(s.total() < MIN_SPLIT_SIZE || uu_test(s, ALPHA).unwrap().is_unimodal());
                    prop_assert_eq!(unisplit(s, ALPHA).unwrap().k(), 1);
                }
                assert_minimal(&r);

                // determinism
                prop_assert_eq!(unisplit(&d, ALPHA).unwrap(), r);
            }
        }
    }
}
