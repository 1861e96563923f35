//! Command-line front end and the benchmark harness.
//!
//! All logic lives here so the binary is a thin wrapper and every
//! subcommand can be driven from tests through [`run`].

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::data::{read_labeled_csv, read_values, Dataset};
use crate::error::{Error, Result};
use crate::hull::gl_set;
use crate::imgseg::{read_pnm, recolor, segment, write_pgm};
use crate::nb::{kfold_accuracy, read_table, NbMode};
use crate::split::{multimodality_degree, unisplit, unisplit_samples};
use crate::stats::{ks_two_sample, nmi};
use crate::synth::{builtin_with_m, rng_from_seed, sample_mixture};
use crate::udmm::Udmm;

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "UNISPLIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "unisplit",
    version,
    about = "Split multimodal 1-D data at density valleys and fit unimodal mixtures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a dataset into unimodal subsets.
    Split {
        /// Value per line, or CSV with an integer label in the second column.
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Label per line, scored against the split with NMI.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Fit a unimodal mixture and write it as JSON.
    Fit {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw values from a model file.
    Sample {
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-sample KS between a model sample and a dataset.
    Eval {
        model: PathBuf,
        data: PathBuf,
        /// Model sample size; defaults to the dataset size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Seeded Monte Carlo benchmark over the built-in distributions.
    Bench(BenchArgs),
    /// Segment a PGM/PPM image by its intensity distribution.
    Segment {
        image: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Recolored PGM; the report goes next to it with a `.txt` extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated naive Bayes on a CSV table (last column is the class).
    Nb {
        csv: PathBuf,
        #[arg(long, value_enum, default_value_t = NbModeArg::Udmm)]
        mode: NbModeArg,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a built-in dataset; labels go to `<out>.labels`.
    Gen {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Histogram, ecdf, hull vertices, MD point and valley points as CSV.
    Plotdata {
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restrict to these distributions (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Per-replicate CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// D1-D12: fit, resample, two-sample KS.
    Table3,
    /// D13-D22: split, NMI against the generating labels.
    Table5,
}

impl Suite {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Suite::Table3 => &crate::synth::BUILTIN_NAMES[..12],
            Suite::Table5 => &crate::synth::BUILTIN_NAMES[12..],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NbModeArg {
    Udmm,
    Gaussian,
}

impl From<NbModeArg> for NbMode {
    fn from(m: NbModeArg) -> Self {
        match m {
            NbModeArg::Udmm => NbMode::Udmm,
            NbModeArg::Gaussian => NbMode::Gaussian,
        }
    }
}

/// One replicate of a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub replicate: usize,
    pub ks: Option<f64>,
    pub k: usize,
    pub nmi: f64,
    pub seed: u64,
}

/// Aggregates over the replicates of one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub name: String,
    pub replicates: usize,
    pub ks: Option<(f64, f64)>,
    pub k: (f64, f64),
    pub nmi: (f64, f64),
    pub wall_secs: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub suite: Suite,
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BenchSummary>,
    /// Fitted models, parallel to `rows` (table3 only).
    pub models: Vec<Udmm>,
}

impl BenchReport {
    pub fn summary(&self, name: &str) -> Option<&BenchSummary> {
        self.summaries.iter().find(|s| s.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,replicate,ks,k,nmi,seed\n");
        for r in &self.rows {
            let ks = r.ks.map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{ks},{},{:.6},{}",
                r.name, r.replicate, r.k, r.nmi, r.seed
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<6} {:>4} {:>17} {:>13} {:>15} {:>8}\n",
            "name", "reps", "ks mean ± std", "k mean ± std", "nmi mean ± std", "secs"
        );
        for m in &self.summaries {
            let ks =
                m.ks.map(|(a, b)| format!("{a:.4} ± {b:.4}"))
                    .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<6} {:>4} {ks:>17} {:>13} {:>15} {:>8.2}",
                m.name,
                m.replicates,
                format!("{:.2} ± {:.2}", m.k.0, m.k.1),
                format!("{:.3} ± {:.3}", m.nmi.0, m.nmi.1),
                m.wall_secs
            );
        }
        s
    }
}

fn mean_std(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn to_i64(labels: &[usize]) -> Vec<i64> {
    labels.iter().map(|&l| l as i64).collect()
}

/// Fit a model to a fresh draw, then compare a model sample with a second,
/// independent draw from the same distribution.
pub fn table3_replicate(name: &str, m: usize, alpha: f64, seed: u64) -> Result<(BenchRow, Udmm)> {
    let specs = builtin_with_m(name, m)?;
    let mut rng = rng_from_seed(seed);
    let (values, truth) = sample_mixture(&specs, &mut rng)?;
    let data = Dataset::from_raw(&values)?;
    let split = unisplit(&data, alpha)?;
    let model = Udmm::from_split(&split, alpha)?;
    let (fresh, _) = sample_mixture(&specs, &mut rng)?;
    let synthetic = model.sample(fresh.len(), &mut rng);
    let ks = ks_two_sample(&Dataset::from_raw(&fresh)?, &Dataset::from_raw(&synthetic)?);
    // `unisplit` labels the sorted data; sort the truth along with it
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_truth: Vec<i64> = order.iter().map(|&i| truth[i]).collect();
    let row = BenchRow {
        name: name.into(),
        replicate: 0,
        ks: Some(ks),
        k: model.k(),
        nmi: nmi(&sorted_truth, &to_i64(&split.labels))?,
        seed,
    };
    Ok((row, model))
}

/// Split a labeled draw and score it with NMI.
pub fn table5_replicate(name: &str, m: usize, alpha: f64, seed: u64) -> Result<BenchRow> {
    let specs = builtin_with_m(name, m)?;
    let (values, truth) = sample_mixture(&specs, &mut rng_from_seed(seed))?;
    let split = unisplit_samples(&values, alpha)?;
    Ok(BenchRow {
        name: name.into(),
        replicate: 0,
        ks: None,
        k: split.k(),
        nmi: nmi(&truth, &to_i64(&split.labels))?,
        seed,
    })
}

/// Runs every replicate of the suite; replicate `r` uses seed `seed + r`.
pub fn bench(args: &BenchArgs) -> Result<BenchReport> {
    if args.replicates == 0 {
        return Err(Error::InvalidParameter(
            "replicates must be positive".into(),
        ));
    }
    let names: Vec<&str> = if args.only.is_empty() {
        args.suite.names().to_vec()
    } else {
        for n in &args.only {
            if !args.suite.names().contains(&n.as_str()) {
                return Err(Error::UnknownDistribution(n.clone()));
            }
        }
        args.only.iter().map(String::as_str).collect()
    };
    let jobs: Vec<(&str, usize)> = names
        .iter()
        .flat_map(|&n| (0..args.replicates).map(move |r| (n, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(name, r)| {
            let t = Instant::now();
            let seed = args.seed.wrapping_add(r as u64);
            let (mut row, model) = match args.suite {
                Suite::Table3 => {
                    let (row, model) = table3_replicate(name, args.m, args.alpha, seed)?;
                    (row, Some(model))
                }
                Suite::Table5 => (table5_replicate(name, args.m, args.alpha, seed)?, None),
            };
            row.replicate = r;
            Ok((row, model, t.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(results.len());
    let mut models = Vec::new();
    let mut secs = Vec::with_capacity(results.len());
    for (row, model, s) in results {
        rows.push(row);
        models.extend(model);
        secs.push(s);
    }
    let summaries = names
        .iter()
        .enumerate()
        .map(|(i, &name)| {
            let reps = &rows[i * args.replicates..(i + 1) * args.replicates];
            BenchSummary {
                name: name.into(),
                replicates: reps.len(),
                ks: (args.suite == Suite::Table3)
                    .then(|| mean_std(reps.iter().filter_map(|r| r.ks))),
                k: mean_std(reps.iter().map(|r| r.k as f64)),
                nmi: mean_std(reps.iter().map(|r| r.nmi)),
                wall_secs: secs[i * args.replicates..(i + 1) * args.replicates]
                    .iter()
                    .sum(),
            }
        })
        .collect();
    Ok(BenchReport {
        suite: args.suite,
        rows,
        summaries,
        models,
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Values (and labels, when present) from a value-per-line or CSV file.
pub fn read_input(path: &Path) -> Result<(Vec<f64>, Option<Vec<i64>>)> {
    let (values, labels) = read_labeled_csv(open(path)?)?;
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((values, labels))
}

fn read_label_file(path: &Path) -> Result<Vec<i64>> {
    read_values(open(path)?)?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 {
                Ok(v as i64)
            } else {
                Err(Error::Parse(format!(
                    "{}: label `{v}` is not an integer",
                    path.display()
                )))
            }
        })
        .collect()
}

/// Writes through a sibling temporary file renamed into place, so a failure
/// never leaves a partial file behind.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp).map_err(io)?);
        f(&mut w)?;
        w.into_inner()
            .map_err(|e| io(e.into_error()))?
            .sync_all()
            .map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

fn write_lines(w: &mut dyn Write, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

fn write_to(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, f),
        None => f(stdout),
    }
}

/// Path of the label file written next to `out` by `gen`.
pub fn labels_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".labels");
    PathBuf::from(s)
}

/// Caps the global rayon pool from [`THREADS_ENV`]; later calls are no-ops.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Split report: valley points, subset sizes and ranges, NMI with labels.
pub fn split_report(values: &[f64], labels: Option<&[i64]>, alpha: f64) -> Result<String> {
    let res = unisplit_samples(values, alpha)?;
    let mut s = String::new();
    let vps: Vec<String> = res.valley_points.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(s, "k = {}", res.k());
    let _ = writeln!(s, "valley_points = [{}]", vps.join(", "));
    let _ = writeln!(
        s,
        "{:>6} {:>10} {:>14} {:>14}",
        "subset", "size", "min", "max"
    );
    for (i, d) in res.subsets.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i:>6} {:>10} {:>14.6} {:>14.6}",
            d.total(),
            d.min(),
            d.max()
        );
    }
    if let Some(l) = labels {
        let _ = writeln!(s, "nmi = {:.6}", nmi(l, &to_i64(&res.labels))?);
    }
    Ok(s)
}

/// CSV rows `kind,x,x_end,y` for plotting: `hist` bins, `ecdf` steps, `gcm`
/// and `lcm` vertices, the `md` point with its deviation and the `vp` lines.
pub fn plot_data(values: &[f64], bins: usize, alpha: f64) -> Result<String> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive".into()));
    }
    let data = Dataset::from_raw(values)?;
    let (lo, hi) = (data.min(), data.max());
    let mut s = String::from("kind,x,x_end,y\n");
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for (&v, &w) in data.values().iter().zip(data.weights()) {
        let b = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += w;
    }
    for (b, c) in counts.iter().enumerate() {
        let x0 = lo + b as f64 * width;
        let x1 = if b + 1 == bins {
            hi
        } else {
            lo + (b + 1) as f64 * width
        };
        let _ = writeln!(s, "hist,{x0},{x1},{c}");
    }
    let ecdf = data.ecdf();
    for (i, &x) in data.values().iter().enumerate() {
        let _ = writeln!(s, "ecdf,{x},{x},{}", ecdf.at(i));
    }
    for p in gl_set(&data)?.points {
        let kind = match p.kind {
            crate::hull::PointKind::Gcm => "gcm",
            crate::hull::PointKind::Lcm => "lcm",
            crate::hull::PointKind::Both => "both",
        };
        let _ = writeln!(s, "{kind},{},{},{}", p.x, p.x, p.f);
    }
    if lo < hi && data.total() > 2 {
        if let Ok(md) = multimodality_degree(&data, lo, hi) {
            let _ = writeln!(s, "md,{},{},{}", md.x, md.x, md.deviation);
        }
    }
    for vp in unisplit(&data, alpha)?.valley_points {
        let _ = writeln!(s, "vp,{vp},{vp},");
    }
    Ok(s)
}

/// Executes one parsed command; human-readable output goes to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    init_threads();
    match cli.command {
        Command::Split {
            input,
            alpha,
            labels,
        } => {
            let (values, inline) = read_input(&input)?;
            let labels = match labels {
                Some(p) => Some(read_label_file(&p)?),
                None => inline,
            };
            write!(
                stdout,
                "{}",
                split_report(&values, labels.as_deref(), alpha)?
            )?;
        }
        Command::Fit { input, alpha, out } => {
            let (values, _) = read_input(&input)?;
            let data = Dataset::from_raw(&values)?;
            let model = crate::udmm::fit_udmm(&data, alpha)?;
            write_atomic(&out, |w| model.write(w))?;
            let m: Vec<String> = model
                .components()
                .iter()
                .map(|c| c.n_components().to_string())
                .collect();
            writeln!(stdout, "K = {}", model.k())?;
            writeln!(stdout, "M = [{}]", m.join(", "))?;
            writeln!(
                stdout,
                "log_likelihood = {:.6}",
                model.log_likelihood(&values)
            )?;
        }
        Command::Sample {
            model,
            n,
            seed,
            out,
        } => {
            let model = Udmm::read(open(&model)?)?;
            let xs = model.sample_seeded(n, seed);
            write_to(out.as_deref(), stdout, |w| write_lines(w, &xs))?;
        }
        Command::Eval {
            model,
            data,
            n,
            seed,
        } => {
            let model = Udmm::read(open(&model)?)?;
            let (values, _) = read_input(&data)?;
            let xs = model.sample_seeded(n.unwrap_or(values.len()), seed);
            if xs.is_empty() {
                return Err(Error::InvalidParameter("n must be positive".into()));
            }
            let ks = ks_two_sample(&Dataset::from_raw(&xs)?, &Dataset::from_raw(&values)?);
            writeln!(stdout, "ks = {ks:.6}")?;
        }
        Command::Bench(args) => {
            let report = bench(&args)?;
            if let Some(p) = &args.out {
                let csv = report.to_csv();
                write_atomic(p, |w| Ok(w.write_all(csv.as_bytes())?))?;
            }
            write!(stdout, "{}", report.to_text())?;
        }
        Command::Segment { image, alpha, out } => {
            let img = read_pnm(open(&image)?)?;
            let seg = segment(&img, alpha)?;
            let recolored = recolor(&img, &seg.labels)?;
            let report = seg.report();
            write_atomic(&out, |w| write_pgm(&recolored, w))?;
            write_atomic(&out.with_extension("txt"), |w| {
                Ok(w.write_all(report.as_bytes())?)
            })?;
            write!(stdout, "{report}")?;
        }
        Command::Nb {
            csv,
            mode,
            alpha,
            folds,
            seed,
        } => {
            let table = read_table(open(&csv)?)?;
            let (mean, std) = kfold_accuracy(&table, folds, mode.into(), alpha, seed)?;
            writeln!(stdout, "accuracy = {mean:.4} ± {std:.4}")?;
        }
        Command::Gen { name, seed, m, out } => {
            let specs = builtin_with_m(&name, m)?;
            let (values, labels) = sample_mixture(&specs, &mut rng_from_seed(seed))?;
            let lpath = labels_path(&out);
            write_atomic(&out, |w| write_lines(w, &values))?;
            write_atomic(&lpath, |w| {
                for l in &labels {
                    writeln!(w, "{l}")?;
                }
                Ok(())
            })?;
            writeln!(stdout, "{} values -> {}", values.len(), out.display())?;
        }
        Command::Plotdata {
            input,
            bins,
            alpha,
            out,
        } => {
            let (values, _) = read_input(&input)?;
            let csv = plot_data(&values, bins, alpha)?;
            write_to(out.as_deref(), stdout, |w| Ok(w.write_all(csv.as_bytes())?))?;
        }
    }
    Ok(())
}
