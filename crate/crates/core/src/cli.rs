//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::dual::constrained_solve_on;
use crate::error::{ElassoError, Result};
use crate::forecast::{aafe, predict_rows, PredictionSplit};
use crate::grid::EtaGrid;
use crate::io::{format_number, read_csv_file, write_curve_csv, PathReport};
use crate::path::{full_path, model_path, ElassoPath};
use crate::penalties::{elasso_penalty, WeightSpec, WeightVector};
use crate::selection::{calibrate_eta_sphericity, kfold_cv, model_cv, CvConfig, FoldWeights, ModelCvMode};
use crate::simulate::{knot_experiment, mse_experiment, sample_gaussian, spectrum_law_experiment, SpikedModel};
use crate::spectra::{sample_covariance, spectral_decompose, DataMatrix, Spectrum};

/// Exit status for invalid configuration or input.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures such as singular covariances.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "elasso", version, about = "Eigenvalue lasso paths for sample covariance matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full solution path: knots, merges and partitions.
    Path {
        #[command(flatten)]
        input: InputArgs,
        /// Extra tuning values to include in the curve output.
        #[arg(long)]
        grid: Option<EtaGrid>,
        /// Also write the curve CSV to this file.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Estimate at a tuning value or under a penalty bound.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, conflicts_with = "kappa", required_unless_present = "kappa")]
        eta: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        /// Restrict to a multi-spike model given by group sizes, e.g. 40,30,30.
        #[arg(long, value_delimiter = ',')]
        model: Option<Vec<usize>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// K-fold cross-validation over a grid of tuning values.
    Cv {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cv: CvArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-validation over the models of the path.
    ModelCv {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tuning value that keeps the spherical model with probability 1 - epsilon.
    Calibrate {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 1000)]
        nsim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "mp")]
        weights: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conditional-mean forecasts of trailing columns from leading ones.
    Predict {
        #[command(flatten)]
        input: InputArgs,
        /// Training rows, 1-based inclusive, e.g. 1:205. Other rows are forecast.
        #[arg(long)]
        train_rows: String,
        /// Number of leading columns to condition on.
        #[arg(long)]
        head: usize,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, value_delimiter = ',')]
        model: Option<Vec<usize>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulation experiments.
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Gaussian sample from a multi-spike model, written as CSV.
    Sample {
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest knots over replicates from a spiked model.
    Knots {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        /// Spike values above the noise level; none for a sphere.
        #[arg(long, value_delimiter = ',')]
        spikes: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 20)]
        replicates: usize,
        #[arg(long, default_value_t = 3)]
        top: usize,
        #[arg(long, default_value = "mp")]
        weights: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frobenius errors of the sample covariance and the pooled sphere.
    Mse {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 2000)]
        replicates: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kolmogorov distance of a white sample's spectrum to the limiting law.
    Spectrum {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file: observations in rows, or a covariance matrix with --covariance.
    #[arg(long)]
    pub input: PathBuf,
    /// mp, cond, smallest, pairwise or file:PATH.
    #[arg(long, default_value = "mp")]
    pub weights: String,
    /// Apply sqrt(x + 1/4) to every entry before estimation.
    #[arg(long, conflicts_with = "covariance")]
    pub sqrt_counts: bool,
    /// The input is a symmetric positive-definite matrix, not observations.
    #[arg(long, requires = "samples")]
    pub covariance: bool,
    /// Sample size behind a --covariance input.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long, default_value_t = 10)]
    pub kfold: usize,
    /// lo:hi:count[:log]
    #[arg(long)]
    pub grid: Option<EtaGrid>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FoldWeightsArg::Refit)]
    pub fold_weights: FoldWeightsArg,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FoldWeightsArg {
    Fixed,
    Refit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Approximate,
}

/// Exit status for an error.
pub fn exit_code(e: &ElassoError) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_CONFIG
    }
}

/// Caps the global thread pool from `ELASSO_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ELASSO_THREADS") {
        let threads: usize = v
            .trim()
            .parse()
            .map_err(|_| ElassoError::Config(format!("ELASSO_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| ElassoError::Config(e.to_string()))?;
    }
    Ok(())
}

struct Problem {
    spectrum: Spectrum,
    n: usize,
    spec: WeightSpec,
}

impl Problem {
    fn weights(&self) -> Result<WeightVector> {
        self.spec.resolve(self.spectrum.q(), self.n)
    }
}

fn load_data(input: &InputArgs) -> Result<DataMatrix> {
    if input.covariance {
        return Err(ElassoError::Config(
            "this command needs observations, not a covariance matrix".into(),
        ));
    }
    let data = DataMatrix::new(read_csv_file(&input.input)?)?;
    if input.sqrt_counts {
        data.sqrt_counts()
    } else {
        Ok(data)
    }
}

fn load_problem(input: &InputArgs) -> Result<Problem> {
    let (spectrum, n) = if input.covariance {
        let s = spectral_decompose(&read_csv_file(&input.input)?)?;
        (s, input.samples.expect("clap enforces --samples"))
    } else {
        let data = load_data(input)?;
        (sample_covariance(&data)?, data.n())
    };
    let spec = WeightSpec::parse(&input.weights, spectrum.q())?;
    Ok(Problem { spectrum, n, spec })
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|source| ElassoError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn io_error(out: &Option<PathBuf>) -> impl Fn(io::Error) -> ElassoError + '_ {
    move |source| ElassoError::Io {
        path: out
            .as_ref()
            .map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string()),
        source,
    }
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| ElassoError::Parse(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_error(out))
}

fn write_text(out: &Option<PathBuf>, lines: &[String]) -> Result<()> {
    let mut w = open_output(out)?;
    for line in lines {
        writeln!(w, "{line}").map_err(io_error(out))?;
    }
    w.flush().map_err(io_error(out))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format_number(*v)).collect::<Vec<_>>().join(",")
}

fn cv_config(args: &CvArgs) -> CvConfig {
    CvConfig {
        folds: args.kfold,
        seed: args.seed,
        grid: args.grid.clone().unwrap_or_else(EtaGrid::default_cv),
        fold_weights: match args.fold_weights {
            FoldWeightsArg::Fixed => FoldWeights::Fixed,
            FoldWeightsArg::Refit => FoldWeights::Refit,
        },
    }
}

fn build_path(problem: &Problem, model: Option<&[usize]>) -> Result<ElassoPath> {
    let weights = problem.weights()?;
    match model {
        Some(sizes) => model_path(problem.spectrum.eigenvalues(), &weights, sizes),
        None => full_path(problem.spectrum.eigenvalues(), &weights),
    }
}

/// Parses a 1-based inclusive row range `A:B` into 0-based indices.
pub fn parse_row_range(s: &str, n: usize) -> Result<std::ops::Range<usize>> {
    let bad = || ElassoError::Config(format!("invalid row range {s:?}; expected A:B with 1 <= A <= B <= {n}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a < 1 || a > b || b > n {
        return Err(bad());
    }
    Ok(a - 1..b)
}

#[derive(Serialize)]
struct FitReport {
    eta: f64,
    kappa: f64,
    eigenvalues: Vec<f64>,
    partition: Vec<usize>,
    covariance: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct CalibrationReport {
    q: usize,
    n: usize,
    epsilon: f64,
    nsim: usize,
    seed: u64,
    weights: String,
    eta: f64,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Path {
            input,
            grid,
            curve,
            output,
        } => {
            let problem = load_problem(&input)?;
            let path = build_path(&problem, None)?;
            let extra = grid.as_ref().map_or(&[][..], |g| g.values());
            if let Some(file) = &curve {
                let target = Some(file.clone());
                let mut w = open_output(&target)?;
                write_curve_csv(&mut w, &path, extra)?;
                w.flush().map_err(io_error(&target))?;
            }
            match output.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&output.out, &PathReport::from(&path)),
                Format::Csv => {
                    let mut w = open_output(&output.out)?;
                    write_curve_csv(&mut w, &path, extra)?;
                    w.flush().map_err(io_error(&output.out))
                }
            }
        }
        Command::Fit {
            input,
            eta,
            kappa,
            model,
            output,
        } => {
            let problem = load_problem(&input)?;
            let path = build_path(&problem, model.as_deref())?;
            let (eta, eigenvalues) = match (eta, kappa) {
                (Some(eta), None) => (eta, path.solve_at(eta)?),
                (None, Some(kappa)) => {
                    let sol = constrained_solve_on(&path, kappa)?;
                    (sol.eta, sol.estimate)
                }
                _ => unreachable!("clap enforces exactly one of --eta and --kappa"),
            };
            let kappa = elasso_penalty(&eigenvalues, path.weights())?;
            let estimate = problem.spectrum.with_eigenvalues(eigenvalues.clone())?;
            let report = FitReport {
                eta,
                kappa,
                partition: path.partition_at(eta).sizes().to_vec(),
                covariance: matrix_rows(&estimate.reconstruct()),
                eigenvalues,
            };
            match output.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&output.out, &report),
                Format::Csv => {
                    let mut lines = vec!["index,lambda".to_string()];
                    lines.extend(
                        report
                            .eigenvalues
                            .iter()
                            .enumerate()
                            .map(|(j, l)| format!("{},{}", j + 1, format_number(*l))),
                    );
                    write_text(&output.out, &lines)
                }
            }
        }
        Command::Cv { input, cv, output } => {
            let data = load_data(&input)?;
            let spec = WeightSpec::parse(&input.weights, data.q())?;
            let result = kfold_cv(&data, &spec, &cv_config(&cv))?;
            match output.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&output.out, &result),
                Format::Csv => {
                    let folds: Vec<String> = (1..=result.fold_scores.len()).map(|k| format!("fold_{k}")).collect();
                    let mut lines = vec![format!("eta,mean,se,{}", folds.join(","))];
                    for i in 0..result.grid.len() {
                        let scores: Vec<f64> = result.fold_scores.iter().map(|f| f[i]).collect();
                        lines.push(format!(
                            "{},{},{},{}",
                            format_number(result.grid[i]),
                            format_number(result.mean[i]),
                            format_number(result.se[i]),
                            join(&scores)
                        ));
                    }
                    write_text(&output.out, &lines)
                }
            }
        }
        Command::ModelCv {
            input,
            cv,
            mode,
            output,
        } => {
            let data = load_data(&input)?;
            let spec = WeightSpec::parse(&input.weights, data.q())?;
            let mode = match mode {
                ModeArg::Exhaustive => ModelCvMode::Exhaustive,
                ModeArg::Approximate => ModelCvMode::Approximate,
            };
            let result = model_cv(&data, &spec, &cv_config(&cv), mode)?;
            match output.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&output.out, &result),
                Format::Csv => {
                    let mut lines = vec!["sizes,knot,best_eta,cv_mean,se,selected".to_string()];
                    for m in &result.models {
                        let sizes: Vec<String> = m.sizes.iter().map(|s| s.to_string()).collect();
                        lines.push(format!(
                            "{},{},{},{},{},{}",
                            sizes.join(" "),
                            format_number(m.knot),
                            format_number(m.best_eta),
                            format_number(m.cv_mean),
                            format_number(m.se),
                            m.selected
                        ));
                    }
                    write_text(&output.out, &lines)
                }
            }
        }
        Command::Calibrate {
            q,
            n,
            epsilon,
            nsim,
            seed,
            weights,
            output,
        } => {
            let spec = WeightSpec::parse(&weights, q)?;
            let eta = calibrate_eta_sphericity(q, n, epsilon, nsim, seed, &spec)?;
            match output.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &output.out,
                    &CalibrationReport {
                        q,
                        n,
                        epsilon,
                        nsim,
                        seed,
                        weights,
                        eta,
                    },
                ),
                Format::Csv => write_text(&output.out, &["eta".to_string(), format_number(eta)]),
            }
        }
        Command::Predict {
            input,
            train_rows,
            head,
            eta,
            model,
            output,
        } => {
            let data = load_data(&input)?;
            let (n, q) = (data.n(), data.q());
            let range = parse_row_range(&train_rows, n)?;
            let train_idx: Vec<usize> = range.clone().collect();
            let test_idx: Vec<usize> = (0..n).filter(|i| !range.contains(i)).collect();
            if test_idx.is_empty() {
                return Err(ElassoError::Config("no rows left to forecast".into()));
            }
            let train = DataMatrix::new(data.values().select_rows(&train_idx))?;
            let spectrum = sample_covariance(&train)?;
            let problem = Problem {
                spec: WeightSpec::parse(&input.weights, q)?,
                n: train.n(),
                spectrum,
            };
            let path = build_path(&problem, model.as_deref())?;
            let estimate = problem.spectrum.with_eigenvalues(path.solve_at(eta)?)?;
            let mean = problem.spectrum.mean().expect("sample mean").to_vec();
            let split = PredictionSplit::new(&estimate, mean, head)?;
            let test = data.values().select_rows(&test_idx);
            let heads = test.columns(0, head).into_owned();
            let actual = test.columns(head, q - head).into_owned();
            let errors = aafe(&predict_rows(&split, &heads)?, &actual)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Json => write_json(&output.out, &errors),
                Format::Csv => {
                    let mut lines = vec!["t,aafe".to_string()];
                    lines.extend(
                        errors
                            .per_component
                            .iter()
                            .enumerate()
                            .map(|(t, e)| format!("{},{}", t + 1, format_number(*e))),
                    );
                    write_text(&output.out, &lines)
                }
            }
        }
        Command::Simulate { experiment } => run_experiment(experiment),
    }
}

fn run_experiment(experiment: Experiment) -> Result<()> {
    match experiment {
        Experiment::Sample {
            sizes,
            values,
            n,
            seed,
            out,
        } => {
            let model = SpikedModel::new(sizes, values)?;
            let data = sample_gaussian(&model, n, seed)?;
            let lines: Vec<String> = data
                .values()
                .row_iter()
                .map(|r| join(&r.iter().copied().collect::<Vec<_>>()))
                .collect();
            write_text(&out, &lines)
        }
        Experiment::Knots {
            q,
            n,
            spikes,
            sigma2,
            replicates,
            top,
            weights,
            seed,
            out,
        } => {
            let model = if spikes.is_empty() {
                SpikedModel::sphere(q, sigma2)?
            } else {
                SpikedModel::spiked(q, &spikes, sigma2)?
            };
            let spec = WeightSpec::parse(&weights, q)?;
            write_json(&out, &knot_experiment(&model, n, &spec, replicates, seed, top)?)
        }
        Experiment::Mse {
            q,
            n,
            sigma2,
            replicates,
            seed,
            out,
        } => write_json(&out, &mse_experiment(q, n, sigma2, replicates, seed)?),
        Experiment::Spectrum { q, n, seed, out } => write_json(&out, &spectrum_law_experiment(q, n, seed)?),
    }
}
