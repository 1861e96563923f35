//! Naive Bayes with a UDMM per (class, feature) cell, and the Gaussian
//! baseline.

use std::collections::HashMap;
use std::io::Read;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::synth::{rng_from_seed, sample_spec, DistSpec, Family};
use crate::udmm::{fit_udmm, Udmm};

/// Densities below this are floored before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Fewest rows a class may have.
pub const MIN_CLASS_ROWS: usize = 4;

/// Feature rows with a class index per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Label text for each class index, in order of first appearance.
    pub class_names: Vec<String>,
}

impl Table {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch(rows.len(), labels.len()));
        }
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Parse("rows have differing feature counts".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if labels.iter().any(|&l| l >= class_names.len()) {
            return Err(Error::InvalidParameter("label without a class name".into()));
        }
        Ok(Table {
            rows,
            labels,
            class_names,
        })
    }

    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn select(&self, idx: &[usize]) -> Table {
        Table {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }
}

/// Reads a CSV whose last column is the class label. A first row whose
/// feature columns do not all parse as numbers is taken as a header.
pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (lineno, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() < 2 {
            return Err(Error::Parse(format!(
                "line {}: need features and a label",
                lineno + 1
            )));
        }
        let feats: std::result::Result<Vec<f64>, _> = rec
            .iter()
            .take(rec.len() - 1)
            .map(str::parse::<f64>)
            .collect();
        let feats = match feats {
            Ok(f) => f,
            Err(_) if lineno == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
        };
        let label = rec[rec.len() - 1].to_string();
        let k = *index.entry(label.clone()).or_insert_with(|| {
            names.push(label);
            names.len() - 1
        });
        rows.push(feats);
        labels.push(k);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Table::new(rows, labels, names)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbMode {
    Udmm,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureModel {
    Udmm(Udmm),
    Gaussian { mu: f64, sigma: f64 },
}

impl FeatureModel {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            FeatureModel::Udmm(m) => m.pdf(x),
            FeatureModel::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    pub priors: Vec<f64>,
    /// `cells[class][feature]`.
    pub cells: Vec<Vec<FeatureModel>>,
}

impl NbModel {
    /// Log prior plus summed floored log densities, per class.
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.priors
            .iter()
            .zip(&self.cells)
            .map(|(p, cell)| {
                p.ln()
                    + cell
                        .iter()
                        .zip(row)
                        .map(|(m, &x)| m.pdf(x).max(DENSITY_FLOOR).ln())
                        .sum::<f64>()
            })
            .collect()
    }

    /// Class with the largest score; ties go to the smaller index.
    pub fn predict(&self, row: &[f64]) -> usize {
        let s = self.scores(row);
        let mut best = 0;
        for (k, &v) in s.iter().enumerate() {
            if v > s[best] {
                best = k;
            }
        }
        best
    }

    pub fn accuracy(&self, table: &Table) -> f64 {
        let hits = table
            .rows
            .iter()
            .zip(&table.labels)
            .filter(|(r, &l)| self.predict(r) == l)
            .count();
        hits as f64 / table.len() as f64
    }
}

fn gaussian_cell(xs: &[f64], range: f64, class: usize, feature: usize) -> Result<FeatureModel> {
    let n = xs.len() as f64;
    let mu = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0);
    let sigma = var.sqrt().max(1e-9 * range);
    if sigma > 0.0 {
        Ok(FeatureModel::Gaussian { mu, sigma })
    } else {
        Err(Error::ZeroVariance {
            class: class as i64,
            feature,
        })
    }
}

pub fn fit_nb(table: &Table, mode: NbMode, alpha: f64) -> Result<NbModel> {
    let c = table.n_classes();
    let d = table.n_features();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, &l) in table.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    if by_class.iter().filter(|v| !v.is_empty()).count() < 2 {
        return Err(Error::InvalidParameter("need at least two classes".into()));
    }
    if let Some(k) = by_class.iter().position(|v| v.len() < MIN_CLASS_ROWS) {
        return Err(Error::InvalidParameter(format!(
            "class {} has fewer than {MIN_CLASS_ROWS} rows",
            table.class_names[k]
        )));
    }
    let ranges: Vec<f64> = (0..d)
        .map(|j| {
            let (lo, hi) = table
                .rows
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[j]), hi.max(r[j]))
                });
            hi - lo
        })
        .collect();
    let n = table.len() as f64;
    let priors = by_class.iter().map(|v| v.len() as f64 / n).collect();
    let cells = by_class
        .iter()
        .enumerate()
        .map(|(k, idx)| {
            (0..d)
                .map(|j| {
                    let xs: Vec<f64> = idx.iter().map(|&i| table.rows[i][j]).collect();
                    match mode {
                        NbMode::Gaussian => gaussian_cell(&xs, ranges[j], k, j),
                        NbMode::Udmm => Ok(FeatureModel::Udmm(fit_udmm(
                            &Dataset::from_raw(&xs)?,
                            alpha,
                        )?)),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NbModel { priors, cells })
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || labels.len() < k {
        return Err(Error::InvalidParameter(format!(
            "{} rows cannot form {k} folds",
            labels.len()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for c in 0..classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Mean and sample standard deviation of k-fold test accuracy.
pub fn kfold_accuracy(
    table: &Table,
    k: usize,
    mode: NbMode,
    alpha: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let folds = stratified_folds(&table.labels, k, seed)?;
    let accs = folds
        .par_iter()
        .map(|test| {
            let train: Vec<usize> = (0..table.len())
                .filter(|i| test.binary_search(i).is_err())
                .collect();
            let model = fit_nb(&table.select(&train), mode, alpha)?;
            Ok(model.accuracy(&table.select(test)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = accs.len() as f64;
    let mean = accs.iter().sum::<f64>() / m;
    let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (m - 1.0);
    Ok((mean, var.sqrt()))
}

/// Three unit squares side by side with gaps of 0.25; the outer two are
/// class `A`, the middle one class `B`.
pub fn rectangles(per_rect: usize, seed: u64) -> Table {
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (x0, class) in [(0.0, 0), (1.25, 1), (2.5, 0)] {
        let xs = sample_spec(
            &DistSpec::new(Family::Uniform { a: x0, b: x0 + 1.0 }, per_rect),
            &mut rng,
        )
        .expect("valid");
        let ys = sample_spec(
            &DistSpec::new(Family::Uniform { a: 0.0, b: 1.0 }, per_rect),
            &mut rng,
        )
        .expect("valid");
        for (x, y) in xs.into_iter().zip(ys) {
            rows.push(vec![x, y]);
            labels.push(class);
        }
    }
    Table::new(rows, labels, vec!["A".into(), "B".into()]).expect("well-formed")
}
