//! Greatest convex minorant / least concave majorant vertices of an ecdf.
//!
//! Both are read off the convex hull of the step-top points `(x_i, F(x_i))`
//! with a monotone-chain scan over the already sorted values. Points lying
//! exactly on a hull chord are kept as vertices.

use crate::data::{Dataset, Span};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Gcm,
    Lcm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub x: f64,
    pub f: f64,
    pub kind: PointKind,
}

/// Ordered union of gcm and lcm points.
#[derive(Debug, Clone, PartialEq)]
pub struct GlSet {
    pub points: Vec<CriticalPoint>,
    /// Largest gcm point other than the sample maximum.
    pub max_g: Option<f64>,
    /// Smallest lcm point other than the sample minimum.
    pub min_l: Option<f64>,
}

impl GlSet {
    pub fn gcm(&self) -> impl Iterator<Item = f64> + '_ {
        self.points
            .iter()
            .filter(|p| p.kind != PointKind::Lcm)
            .map(|p| p.x)
    }

    pub fn lcm(&self) -> impl Iterator<Item = f64> + '_ {
        self.points
            .iter()
            .filter(|p| p.kind != PointKind::Gcm)
            .map(|p| p.x)
    }
}

#[inline]
fn cross(span: &Span<'_>, o: usize, a: usize, p: usize) -> f64 {
    let (ox, oy) = (span.x(o), span.count_through(o) as f64);
    let (ax, ay) = (span.x(a), span.count_through(a) as f64);
    let (px, py) = (span.x(p), span.count_through(p) as f64);
    (ax - ox) * (py - oy) - (ay - oy) * (px - ox)
}

fn chain(span: &Span<'_>, lower: bool) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in span.lo()..=span.hi() {
        while hull.len() >= 2 {
            let c = cross(span, hull[hull.len() - 2], hull[hull.len() - 1], i);
            let pop = if lower { c < 0.0 } else { c > 0.0 };
            if !pop {
                break;
            }
            hull.pop();
        }
        hull.push(i);
    }
    hull
}

/// Indices of the gcm vertices of the span, endpoints included.
pub(crate) fn lower_hull(span: &Span<'_>) -> Vec<usize> {
    chain(span, true)
}

/// Indices of the lcm vertices of the span, endpoints included.
pub(crate) fn upper_hull(span: &Span<'_>) -> Vec<usize> {
    chain(span, false)
}

fn span_between(data: &Dataset, lo: f64, hi: f64) -> Result<Span<'_>> {
    if !(lo < hi) {
        return Err(Error::DegenerateInterval);
    }
    match data.index_range(lo, hi) {
        Some((a, b)) if b > a => Ok(Span::new(data, a, b)),
        _ => Err(Error::DegenerateInterval),
    }
}

/// gcm vertices of the ecdf of `X(lo, hi)`.
pub fn gcm_points(data: &Dataset, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let span = span_between(data, lo, hi)?;
    Ok(lower_hull(&span)
        .into_iter()
        .map(|i| data.values()[i])
        .collect())
}

/// lcm vertices of the ecdf of `X(lo, hi)`.
pub fn lcm_points(data: &Dataset, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let span = span_between(data, lo, hi)?;
    Ok(upper_hull(&span)
        .into_iter()
        .map(|i| data.values()[i])
        .collect())
}

/// Merges gcm and lcm index lists of `span` into a [`GlSet`].
pub(crate) fn merge_gl(span: &Span<'_>, g: &[usize], l: &[usize]) -> GlSet {
    let total = span.total() as f64;
    let mut points = Vec::with_capacity(g.len() + l.len());
    let (mut i, mut j) = (0, 0);
    while i < g.len() || j < l.len() {
        let (idx, kind) = match (g.get(i), l.get(j)) {
            (Some(&a), Some(&b)) if a == b => {
                i += 1;
                j += 1;
                (a, PointKind::Both)
            }
            (Some(&a), Some(&b)) if a < b => {
                i += 1;
                (a, PointKind::Gcm)
            }
            (Some(_), Some(&b)) => {
                j += 1;
                (b, PointKind::Lcm)
            }
            (Some(&a), None) => {
                i += 1;
                (a, PointKind::Gcm)
            }
            (None, Some(&b)) => {
                j += 1;
                (b, PointKind::Lcm)
            }
            (None, None) => unreachable!(),
        };
        points.push(CriticalPoint {
            x: span.x(idx),
            f: span.count_through(idx) as f64 / total,
            kind,
        });
    }
    GlSet {
        points,
        max_g: (g.len() >= 2).then(|| span.x(g[g.len() - 2])),
        min_l: (l.len() >= 2).then(|| span.x(l[1])),
    }
}

/// The GL set of the whole dataset.
pub fn gl_set(data: &Dataset) -> Result<GlSet> {
    if data.len() < 2 {
        return Err(Error::DegenerateInterval);
    }
    let span = data.span();
    let g = lower_hull(&span);
    let l = upper_hull(&span);
    Ok(merge_gl(&span, &g, &l))
}
