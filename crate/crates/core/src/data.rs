//! Weighted univariate samples, their empirical CDF and piecewise-linear
//! CDF approximations.
//!
//! Tied observations are collapsed into integer multiplicities. Every
//! cumulative quantity downstream (ecdf, hulls, KS statistics) is computed
//! from those multiplicities, so quantized data needs no jitter.

use std::io::BufRead;

use crate::error::{Error, Result};

/// A sorted sample of distinct values with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    weights: Vec<u64>,
    // cum[i] = weights[0] + ... + weights[i]
    cum: Vec<u64>,
}

impl Dataset {
    /// Sorts `raw` and collapses exact duplicates into weights.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut sorted = raw.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut values = Vec::new();
        let mut weights: Vec<u64> = Vec::new();
        for v in sorted {
            // -0.0 and 0.0 compare equal and are merged
            match values.last() {
                Some(&last) if last == v => *weights.last_mut().unwrap() += 1,
                _ => {
                    values.push(v);
                    weights.push(1);
                }
            }
        }
        Ok(Self::assemble(values, weights))
    }

    /// Builds a dataset from already-collapsed `(value, weight)` pairs.
    pub fn from_weighted(values: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::LengthMismatch(values.len(), weights.len()));
        }
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "values must be strictly increasing".into(),
            ));
        }
        if weights.contains(&0) {
            return Err(Error::InvalidParameter("weights must be >= 1".into()));
        }
        Ok(Self::assemble(values, weights))
    }

    fn assemble(values: Vec<f64>, weights: Vec<u64>) -> Self {
        let cum = weights
            .iter()
            .scan(0u64, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Dataset {
            values,
            weights,
            cum,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Cumulative weights; `cum()[i]` counts observations `<= values()[i]`.
    pub fn cum(&self) -> &[u64] {
        &self.cum
    }

    /// Number of distinct values.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of raw observations, `N`.
    pub fn total(&self) -> u64 {
        *self.cum.last().unwrap()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn ecdf(&self) -> Ecdf<'_> {
        Ecdf { data: self }
    }

    /// Expands back to the sorted raw sample.
    pub fn to_raw(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.weights)
            .flat_map(|(&v, &w)| std::iter::repeat_n(v, w as usize))
            .collect()
    }

    /// Index range `lo..=hi` of the values inside `[a, b]`, if any.
    pub fn index_range(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        let lo = self.values.partition_point(|&v| v < a);
        let end = self.values.partition_point(|&v| v <= b);
        (lo < end).then(|| (lo, end - 1))
    }

    /// `X(a, b)`: the observations inside the closed interval `[a, b]`.
    pub fn subset(&self, a: f64, b: f64) -> Option<Dataset> {
        self.index_range(a, b).map(|(lo, hi)| self.slice(lo, hi))
    }

    /// Copies the distinct values `lo..=hi` into a new dataset.
    pub fn slice(&self, lo: usize, hi: usize) -> Dataset {
        Self::assemble(
            self.values[lo..=hi].to_vec(),
            self.weights[lo..=hi].to_vec(),
        )
    }

    pub fn span(&self) -> Span<'_> {
        Span {
            data: self,
            lo: 0,
            hi: self.len() - 1,
        }
    }

    /// Concatenates ordered, non-overlapping datasets.
    pub fn concat(parts: &[Dataset]) -> Result<Dataset> {
        let values: Vec<f64> = parts
            .iter()
            .flat_map(|p| p.values.iter().copied())
            .collect();
        let weights: Vec<u64> = parts
            .iter()
            .flat_map(|p| p.weights.iter().copied())
            .collect();
        Self::from_weighted(values, weights)
    }
}

/// Right-continuous empirical CDF of a [`Dataset`].
#[derive(Debug, Clone, Copy)]
pub struct Ecdf<'a> {
    data: &'a Dataset,
}

impl<'a> Ecdf<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    /// `F(x_i)` at the i-th distinct value.
    pub fn at(&self, i: usize) -> f64 {
        self.data.cum[i] as f64 / self.data.total() as f64
    }

    /// Cumulative fractions at every distinct value.
    pub fn cum(&self) -> Vec<f64> {
        (0..self.data.len()).map(|i| self.at(i)).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.data.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.at(k - 1)
        }
    }
}

/// A piecewise-linear CDF through `(s_i, F(s_i))`, zero left of the first
/// knot and one from the last knot on.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf {
    knots: Vec<f64>,
    cdfvals: Vec<f64>,
}

impl PiecewiseLinearCdf {
    pub fn new(knots: Vec<f64>, cdfvals: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != cdfvals.len() {
            return Err(Error::InvalidParameter(
                "knots and cdf values must be non-empty and of equal length".into(),
            ));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("knots must increase".into()));
        }
        if cdfvals.windows(2).any(|w| w[0] > w[1]) || cdfvals[0] <= 0.0 {
            return Err(Error::InvalidParameter(
                "cdf values must be positive and non-decreasing".into(),
            ));
        }
        if *cdfvals.last().unwrap() != 1.0 {
            return Err(Error::InvalidParameter("last cdf value must be 1".into()));
        }
        Ok(Self { knots, cdfvals })
    }

    /// Takes `F` of `data` at the given knots, which must be dataset values
    /// including the minimum and maximum.
    pub fn from_knots(data: &Dataset, knots: &[f64]) -> Result<Self> {
        let ecdf = data.ecdf();
        let mut vals = Vec::with_capacity(knots.len());
        for &k in knots {
            let i = data
                .values
                .binary_search_by(|v| v.total_cmp(&k))
                .map_err(|_| Error::InvalidParameter(format!("knot {k} is not a data value")))?;
            vals.push(ecdf.at(i));
        }
        if knots.first() != Some(&data.min()) || knots.last() != Some(&data.max()) {
            return Err(Error::InvalidParameter(
                "knots must include the sample minimum and maximum".into(),
            ));
        }
        Self::new(knots.to_vec(), vals)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cdfvals(&self) -> &[f64] {
        &self.cdfvals
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.knots.len() - 1;
        if x < self.knots[0] {
            return 0.0;
        }
        if x >= self.knots[last] {
            return 1.0;
        }
        let j = self.knots.partition_point(|&k| k <= x);
        let (x0, x1) = (self.knots[j - 1], self.knots[j]);
        let (f0, f1) = (self.cdfvals[j - 1], self.cdfvals[j]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }
}

/// A contiguous run `lo..=hi` of a dataset's distinct values, viewed as a
/// sample of its own. Cumulative counts are relative to the run.
#[derive(Debug, Clone, Copy)]
pub struct Span<'a> {
    pub(crate) data: &'a Dataset,
    pub(crate) lo: usize,
    pub(crate) hi: usize,
}

impl<'a> Span<'a> {
    pub fn new(data: &'a Dataset, lo: usize, hi: usize) -> Self {
        debug_assert!(lo <= hi && hi < data.len());
        Span { data, lo, hi }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    /// Number of distinct values in the span.
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.data.values[i]
    }

    #[inline]
    fn base(&self) -> u64 {
        if self.lo == 0 {
            0
        } else {
            self.data.cum[self.lo - 1]
        }
    }

    /// Observations in the span up to and including index `i`.
    #[inline]
    pub fn count_through(&self, i: usize) -> u64 {
        self.data.cum[i] - self.base()
    }

    /// Observations in the span.
    pub fn total(&self) -> u64 {
        self.count_through(self.hi)
    }

    pub fn a(&self) -> f64 {
        self.x(self.lo)
    }

    pub fn b(&self) -> f64 {
        self.x(self.hi)
    }

    pub fn sub(&self, lo: usize, hi: usize) -> Span<'a> {
        debug_assert!(self.lo <= lo && lo <= hi && hi <= self.hi);
        Span::new(self.data, lo, hi)
    }

    pub fn to_dataset(&self) -> Dataset {
        self.data.slice(self.lo, self.hi)
    }
}

/// Reads one value per line; blank lines and `#` comments are skipped.
pub fn read_values<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: `{t}` is not a number", lineno + 1)))?;
        out.push(v);
    }
    Ok(out)
}

/// Reads a CSV whose first column is the value and optional second column an
/// integer label. A non-numeric first row is treated as a header.
pub fn read_labeled_csv<R: std::io::Read>(reader: R) -> Result<(Vec<f64>, Option<Vec<i64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut labeled = None;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let Some(first) = rec.get(0) else { continue };
        if first.is_empty() {
            continue;
        }
        let v: f64 = match first.parse() {
            Ok(v) => v,
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(Error::Parse(format!(
                    "row {}: `{first}` is not a number",
                    row + 1
                )))
            }
        };
        let has_label = rec.get(1).is_some_and(|s| !s.is_empty());
        if *labeled.get_or_insert(has_label) != has_label {
            return Err(Error::Parse(format!(
                "row {}: inconsistent label column",
                row + 1
            )));
        }
        if has_label {
            let l = rec[1].parse::<i64>().map_err(|_| {
                Error::Parse(format!(
                    "row {}: label `{}` is not an integer",
                    row + 1,
                    &rec[1]
                ))
            })?;
            labels.push(l);
        }
        values.push(v);
    }
    Ok((values, labeled.unwrap_or(false).then_some(labels)))
}
