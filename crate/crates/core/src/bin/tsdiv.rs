use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tsdiv::barycenter::{self, AveragingProblem, InitScheme};
use tsdiv::classify::{run_protocol, GammaChoice, LabeledDataset, Method, DEFAULT_GAMMA_GRID};
use tsdiv::data_io::{
    format_f64, load_ucr, read_series_csv, render_report, write_report, write_series_csv, AccuracyRow, DivergenceRow, LoadOptions,
    Payload, ReportFormat, ResultReport, RunMetadata,
};
use tsdiv::gradcheck;
use tsdiv::oracle::oracle_stats;
use tsdiv::verify;
use tsdiv::{build_cost, evaluate, CostKind, DivergenceKind, Error, Result, TimeSeries};

#[derive(Parser, Debug)]
#[command(name = "tsdiv", version, about = "Soft-DTW divergences, averaging and classification")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "TSDIV_THREADS")]
    threads: Option<usize>,
    /// Seed for every random choice; echoed in the output metadata.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Include wall-clock time in JSON metadata.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct KindArgs {
    /// euclidean, dtw, sdtw, sdtw_div, sharp, sharp_div, mean_cost, mean_cost_div
    #[arg(long, default_value = "sdtw_div")]
    kind: String,
    /// Temperature; defaults to 1 for biased kinds and 10 for divergences.
    /// `classify` also accepts `auto` (cross-validated over a log grid).
    #[arg(long)]
    gamma: Option<String>,
    /// sqeuclid, logaug or absolute
    #[arg(long, default_value = "sqeuclid")]
    cost: CostKind,
}

impl KindArgs {
    fn is_auto(&self) -> bool {
        self.gamma.as_deref() == Some("auto")
    }

    fn resolve(&self) -> Result<DivergenceKind> {
        let probe = DivergenceKind::from_name(&self.kind, 1.0)?;
        let given = match self.gamma.as_deref() {
            None => None,
            Some(g) => Some(
                g.parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("--gamma expects a number, got `{g}`")))?,
            ),
        };
        let gamma = given.or(probe.default_gamma()).unwrap_or(1.0);
        let kind = DivergenceKind::from_name(&self.kind, gamma)?;
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one discrepancy between two series files.
    Divergence {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
    /// Average the series of a UCR dataset file.
    Average {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        train: PathBuf,
        /// Only average series with this label.
        #[arg(long, allow_hyphen_values = true)]
        class: Option<i64>,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Barycenter length (default: median input length).
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        z_normalize: bool,
        /// Barycenter output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Objective trace file (default: next to --out).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Weighted average of two series with weights (pi, 1 - pi).
    Interpolate {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        pi: f64,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and score a classifier on UCR train/test files.
    Classify {
        #[command(flatten)]
        kind: KindArgs,
        /// 1nn, knn or centroid
        #[arg(long, default_value = "1nn")]
        method: String,
        /// Neighbours for --method knn.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value_t = 5)]
        splits: usize,
        /// L-BFGS iterations per centroid.
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Give up and report NA after this many seconds.
        #[arg(long)]
        budget_secs: Option<f64>,
        #[arg(long)]
        z_normalize: bool,
        /// Dataset name for the report (default: from the train file name).
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Finite-difference checks of every derivative on a pair of series.
    Gradcheck {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value = "sqeuclid")]
        cost: CostKind,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = gradcheck::DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Minimum eigenvalue of the alignment-kernel Gram matrix.
    VerifyGram {
        /// UCR file to use; random series otherwise.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 30)]
        max_len: usize,
        #[arg(long, default_value = "logaug")]
        cost: CostKind,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Truncated alternating series for the Gaussian-cost Fourier transform.
    VerifyFourier {
        #[arg(long, default_value_t = 2.65, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
    },
    /// Enumeration statistics for two short series.
    Oracle {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value = "sqeuclid")]
        cost: CostKind,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
}

struct Ctx {
    seed: u64,
    format: Format,
    timing: bool,
    start: Instant,
}

impl Ctx {
    fn metadata(&self, kind: &str, cost: CostKind, gamma: Option<f64>, dataset: Option<String>) -> RunMetadata {
        RunMetadata {
            kind: kind.to_string(),
            cost: cost.name().to_string(),
            gamma,
            seed: self.seed,
            dataset,
            wall_time_secs: self.timing.then(|| self.start.elapsed().as_secs_f64()),
            extra: Default::default(),
        }
    }

    fn emit(&self, report: &ResultReport) -> Result<()> {
        print!("{}", render_report(report, self.format.into())?);
        Ok(())
    }
}

fn dataset_name(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_suffix("_TRAIN").map(str::to_string).unwrap_or(stem)
}

fn parse_method(name: &str, k: usize, iters: usize) -> Result<Method> {
    match name {
        "1nn" => Ok(Method::Knn { k: 1 }),
        "knn" if k >= 1 => Ok(Method::Knn { k }),
        "centroid" | "nearest_centroid" => Ok(Method::NearestCentroid { max_iters: iters }),
        other => Err(Error::InvalidParameter(format!("unknown method `{other}` (1nn, knn, centroid)"))),
    }
}

fn trace_csv(meta: RunMetadata, values: Vec<f64>) -> Result<String> {
    render_report(
        &ResultReport {
            metadata: meta,
            payload: Payload::Trace { values },
        },
        ReportFormat::Csv,
    )
}

fn write_barycenter(
    ctx: &Ctx,
    meta: RunMetadata,
    b: barycenter::Barycenter,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
) -> Result<()> {
    let report = ResultReport {
        metadata: meta.clone(),
        payload: Payload::Barycenter {
            values: b.series.values().clone(),
            objective_trace: b.objective_trace.clone(),
        },
    };
    match out {
        None => ctx.emit(&report),
        Some(out) => {
            match ctx.format {
                Format::Json => write_report(&report, ReportFormat::Json, &out)?,
                Format::Csv => write_series_csv(&out, &b.series)?,
            }
            if ctx.format == Format::Csv {
                let trace = trace.unwrap_or_else(|| {
                    let stem = out.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    out.with_file_name(format!("{stem}_trace.csv"))
                });
                let text = trace_csv(meta, b.objective_trace)?;
                std::fs::write(&trace, text).map_err(|e| Error::Io { path: trace.clone(), source: e })?;
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidParameter("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    let ctx = Ctx {
        seed: cli.seed,
        format: cli.format,
        timing: cli.timing,
        start: Instant::now(),
    };
    match cli.command {
        Command::Divergence { kind, x, y } => {
            let k = kind.resolve()?;
            let (xs, ys) = (read_series_csv(&x)?, read_series_csv(&y)?);
            let value = evaluate(k, &xs, &ys, kind.cost)?;
            match ctx.format {
                Format::Csv => println!("{}", format_f64(value)),
                Format::Json => ctx.emit(&ResultReport {
                    metadata: ctx.metadata(k.name(), kind.cost, k.gamma(), None),
                    payload: Payload::Divergences {
                        rows: vec![DivergenceRow {
                            x: x.display().to_string(),
                            y: y.display().to_string(),
                            kind: k.name().to_string(),
                            gamma: k.gamma(),
                            value,
                        }],
                    },
                })?,
            }
            Ok(())
        }
        Command::Average {
            kind,
            train,
            class,
            iters,
            length,
            z_normalize,
            out,
            trace,
        } => {
            let k = kind.resolve()?;
            let data = load_ucr(&train, LoadOptions { z_normalize })?;
            let series: Vec<TimeSeries> = data
                .series
                .iter()
                .zip(&data.labels)
                .filter(|(_, l)| class.is_none_or(|c| c == **l))
                .map(|(s, _)| s.clone())
                .collect();
            if series.is_empty() {
                return Err(Error::EmptyInput("no series with the requested label"));
            }
            let mut problem = AveragingProblem::new(series, k, kind.cost);
            problem.barycenter_length = length;
            let b = barycenter::frechet_mean(&problem, iters)?;
            let meta = ctx.metadata(k.name(), kind.cost, k.gamma(), Some(dataset_name(&train)));
            write_barycenter(&ctx, meta, b, out, trace)
        }
        Command::Interpolate {
            kind,
            x,
            y,
            pi,
            length,
            iters,
            out,
        } => {
            let k = kind.resolve()?;
            let (xs, ys) = (read_series_csv(&x)?, read_series_csv(&y)?);
            let b = barycenter::interpolate(&xs, &ys, pi, k, kind.cost, length, InitScheme::WarmStartBiased, iters)?;
            let mut meta = ctx.metadata(k.name(), kind.cost, k.gamma(), None);
            meta.extra.insert("pi".into(), pi.to_string());
            write_barycenter(&ctx, meta, b, out, None)
        }
        Command::Classify {
            kind,
            method,
            k,
            train,
            test,
            splits,
            iters,
            budget_secs,
            z_normalize,
            dataset,
        } => {
            let method = parse_method(&method, k, iters)?;
            let choice = if kind.is_auto() {
                GammaChoice::CrossValidate {
                    grid: DEFAULT_GAMMA_GRID.to_vec(),
                    splits,
                }
            } else {
                GammaChoice::Fixed(kind.resolve()?.gamma().unwrap_or(1.0))
            };
            let base = DivergenceKind::from_name(&kind.kind, 1.0)?;
            let opts = LoadOptions { z_normalize };
            let (tr, te): (LabeledDataset, LabeledDataset) = (load_ucr(&train, opts)?, load_ucr(&test, opts)?);
            let budget = budget_secs.map(Duration::from_secs_f64);
            let outcome = run_protocol(&tr, &te, base, kind.cost, method, &choice, ctx.seed, budget)?;
            let name = dataset.unwrap_or_else(|| dataset_name(&train));
            let mut meta = ctx.metadata(base.name(), kind.cost, outcome.gamma, Some(name.clone()));
            meta.extra.insert("method".into(), method.name());
            if let Some(sel) = &outcome.selection {
                meta.extra.insert("cv_aggregation".into(), sel.aggregation.clone());
                meta.extra.insert("cv_splits".into(), sel.splits.to_string());
            }
            ctx.emit(&ResultReport {
                metadata: meta,
                payload: Payload::Accuracy {
                    rows: vec![AccuracyRow {
                        dataset: name,
                        kind: base.name().to_string(),
                        gamma: outcome.gamma,
                        k: method.k(),
                        accuracy: outcome.accuracy,
                    }],
                },
            })
        }
        Command::Gradcheck {
            x,
            y,
            cost,
            gamma,
            step,
            tol,
        } => {
            let (xs, ys) = (read_series_csv(&x)?, read_series_csv(&y)?);
            let checks = gradcheck::run_suite(&xs, &ys, cost, gamma, step)?;
            match ctx.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&checks)?),
                Format::Csv => {
                    println!("check,max_abs_err,max_abs_value,pass");
                    for c in &checks {
                        println!(
                            "{},{},{},{}",
                            c.name,
                            format_f64(c.max_abs_err),
                            format_f64(c.max_abs_value),
                            c.passes(tol)
                        );
                    }
                }
            }
            match checks.iter().find(|c| !c.passes(tol)) {
                Some(c) => Err(Error::Numerical(format!("{} exceeds tolerance {tol}", c.name))),
                None => Ok(()),
            }
        }
        Command::VerifyGram {
            data,
            count,
            max_len,
            cost,
            gamma,
        } => {
            let series = match &data {
                Some(p) => load_ucr(p, LoadOptions::default())?.series,
                None => random_series(ctx.seed, count, max_len)?,
            };
            let k = verify::gram_matrix(&series, cost, gamma)?;
            let asym = verify::gram_asymmetry(&k);
            let min_eig = verify::min_eigenvalue(&k);
            match ctx.format {
                Format::Csv => {
                    println!("series,cost,gamma,seed,asymmetry,min_eig");
                    println!(
                        "{},{},{},{},{},{}",
                        series.len(),
                        cost.name(),
                        format_f64(gamma),
                        ctx.seed,
                        format_f64(asym),
                        format_f64(min_eig)
                    );
                }
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "series": series.len(), "cost": cost.name(), "gamma": gamma,
                        "seed": ctx.seed, "asymmetry": asym, "min_eig": min_eig,
                    }))?
                ),
            }
            Ok(())
        }
        Command::VerifyFourier { omega, n } => {
            let s = verify::fourier_gauss_series(omega, n)?;
            let bound = s.residual_bound;
            match ctx.format {
                Format::Csv => {
                    println!("omega,n,value,residual_bound,upper_bound");
                    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_else(|| "NA".into());
                    println!(
                        "{},{n},{},{},{}",
                        format_f64(omega),
                        format_f64(s.value),
                        opt(bound),
                        opt(bound.map(|b| s.value + b))
                    );
                }
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "omega": omega, "n": n, "value": s.value, "residual_bound": bound,
                        "upper_bound": bound.map(|b| s.value + b),
                    }))?
                ),
            }
            if bound.is_none() {
                eprintln!("warning: residual bound needs N >= 2");
            }
            Ok(())
        }
        Command::Oracle { x, y, cost, gamma } => {
            let (xs, ys) = (read_series_csv(&x)?, read_series_csv(&y)?);
            let stats = oracle_stats(&build_cost(cost, &xs, &ys)?, gamma)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(())
        }
    }
}

fn random_series(seed: u64, count: usize, max_len: usize) -> Result<Vec<TimeSeries>> {
    if max_len == 0 {
        return Err(Error::InvalidParameter("--max-len must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
            TimeSeries::univariate(&v)
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
