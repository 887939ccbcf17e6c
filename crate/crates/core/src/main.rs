use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crossover::error::{Error, Result};
use crossover::evt::{self, GaussianSpec, MinForm};
use crossover::harness::{self, ExperimentConfig, PlotKind, TableStatus};
use crossover::polycost::{self, CostFunction, State};
use crossover::rng::child_stream;
use crossover::search::{self, CrossoverConfig};

#[derive(Parser)]
#[command(name = "crossover", version, about = "Selection and crossover on random multilinear cost functions")]
struct Cli {
    /// Experiment config file (key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a cost function and write it in binary form.
    Gen {
        #[arg(long)]
        n_dims: usize,
        #[arg(long, default_value_t = 2)]
        max_order: usize,
        /// Output file; defaults to <out>/cost_N{n}_K{k}_s{seed}.bin.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Evaluate states read from stdin, one per line ("+-+-" or "1 -1 1 -1").
    Eval {
        #[arg(long)]
        cost: PathBuf,
    },
    /// Run one search and print the result as JSON.
    Search {
        algo: Algo,
        #[command(flatten)]
        problem: Problem,
        /// Random-search draws.
        #[arg(long, default_value_t = 1_000_000)]
        m: u64,
        #[arg(long, default_value_t = 1000)]
        pool: u64,
        #[arg(long, default_value_t = 1000)]
        offspring_pool: u64,
        #[arg(long, default_value_t = 333)]
        repeats: u64,
        #[arg(long, default_value_t = 4)]
        n_parents: usize,
        #[arg(long, default_value_t = 1000)]
        restarts: u64,
        /// Keep the whole stage trace in the output.
        #[arg(long)]
        trace: bool,
    },
    /// Print closed-form predictors as JSON lines.
    Theory {
        predictor: Predictor,
        #[command(flatten)]
        args: TheoryArgs,
    },
    /// Global reference vs random search vs selection and crossover.
    Fig2,
    /// Two-parent crossover vs the mean-field mixture.
    Fig3,
    /// Render an experiment CSV as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Defaults to the input path with an .svg extension.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Problem {
    /// Binary cost function written by `gen`.
    #[arg(long, conflicts_with = "n_dims")]
    cost: Option<PathBuf>,
    /// Sample a fresh instance with this N (seed from --seed).
    #[arg(long)]
    n_dims: Option<usize>,
    #[arg(long, default_value_t = 2)]
    max_order: usize,
}

#[derive(Args)]
struct TheoryArgs {
    /// Draw count M (repeatable).
    #[arg(long = "m", default_values_t = [1000u64])]
    m: Vec<u64>,
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    #[arg(long, value_enum, default_value_t = Form::Exact)]
    form: Form,
    /// N (repeatable).
    #[arg(long)]
    n_dims: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    max_order: usize,
    /// Target value for required-iterations.
    #[arg(long)]
    target: Option<f64>,
    /// Mixture mean R (repeatable).
    #[arg(long)]
    r: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Random,
    Gd,
    Crossover,
    MeanField,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Predictor {
    MinDistribution,
    RequiredIterations,
    GlobalMin,
    Params,
    Offspring,
    OffspringMin,
    Mixture,
    MixtureBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Exact,
    Approximate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Fig2,
    Fig3,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        crossover::par::set_threads(t)?;
    }
    match cli.cmd {
        Cmd::Gen { n_dims, max_order, file } => {
            let seed = cli.seed.unwrap_or(1);
            let cf = polycost::sample_cost_function(n_dims, max_order, seed)?;
            let path = match file {
                Some(p) => p,
                None => {
                    let dir = cli.out.unwrap_or_else(|| PathBuf::from("."));
                    create_dir(&dir)?;
                    dir.join(format!("cost_N{n_dims}_K{max_order}_s{seed}.bin"))
                }
            };
            cf.save(&path)?;
            print_json(&json!({
                "path": path.display().to_string(),
                "n_dims": n_dims,
                "max_order": max_order,
                "seed": seed,
                "coefficients": cf.coefficients().len(),
            }));
            Ok(())
        }
        Cmd::Eval { cost } => {
            let cf = CostFunction::load(&cost)?;
            let stdin = std::io::stdin();
            let mut out = std::io::stdout().lock();
            for line in stdin.lock().lines() {
                let line = line.map_err(|e| Error::io(Path::new("<stdin>"), e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let x: State = line.trim().parse()?;
                let _ = writeln!(out, "{}", cf.evaluate(&x)?);
            }
            Ok(())
        }
        Cmd::Search { algo, problem, m, pool, offspring_pool, repeats, n_parents, restarts, trace } => {
            let seed = cli.seed.unwrap_or(1);
            let cf = match (&problem.cost, problem.n_dims) {
                (Some(path), _) => CostFunction::load(path)?,
                (None, Some(n)) => polycost::sample_cost_function(n, problem.max_order, seed)?,
                (None, None) => return Err(Error::Config("search needs --cost or --n-dims".into())),
            };
            let mut rng = child_stream(seed, 1);
            let mut res = match algo {
                Algo::Random => search::random_search(&cf, m, &mut rng)?,
                Algo::Gd => search::gradient_descent_restarts(&cf, restarts, &mut rng)?,
                Algo::Crossover => search::selection_crossover(&cf, pool, offspring_pool, repeats, &mut rng)?,
                Algo::MeanField => {
                    let config = CrossoverConfig { n_parents, ..CrossoverConfig::two_parent(pool, offspring_pool, repeats) };
                    if n_parents < 3 {
                        return Err(Error::Config(format!("mean-field needs --n-parents >= 3, got {n_parents}")));
                    }
                    search::crossover_search(&cf, &config, &mut rng)?
                }
                Algo::Exhaustive => {
                    let (state, value) = cf.exhaustive_min()?;
                    search::SearchResult {
                        best_state: state,
                        best_value: value,
                        evaluations: 1u64 << cf.n_dims(),
                        flip_evaluations: 0,
                        stage_trace: Vec::new(),
                        offspring: None,
                    }
                }
            };
            if !trace && res.stage_trace.len() > 1 {
                res.stage_trace.drain(..res.stage_trace.len() - 1);
            }
            let mut v = serde_json::to_value(&res).expect("search result serializes");
            v["best_state"] = json!(res.best_state.to_string());
            v["n_dims"] = json!(cf.n_dims());
            v["max_order"] = json!(cf.max_order());
            v["seed"] = json!(cf.seed());
            print_json(&v);
            Ok(())
        }
        Cmd::Theory { predictor, args } => theory(predictor, &args),
        Cmd::Fig2 | Cmd::Fig3 => {
            let is_fig2 = matches!(cli.cmd, Cmd::Fig2);
            let base = if is_fig2 { ExperimentConfig::default() } else { ExperimentConfig::fig3_default() };
            let mut config = match &cli.config {
                Some(p) => ExperimentConfig::load_over(base, p)?,
                None => base,
            };
            if let Some(s) = cli.seed {
                config.master_seed = s;
            }
            if let Some(o) = cli.out {
                config.output_dir = o;
            }
            config.validate()?;
            create_dir(&config.output_dir)?;
            let (outcome, kind) = if is_fig2 {
                (harness::execute_fig2(&config), PlotKind::Fig2)
            } else {
                (harness::execute_fig3(&config), PlotKind::Fig3)
            };
            let base = config.output_dir.join(&config.experiment_id);
            let csv = base.with_extension("csv");
            let status = match &outcome.error {
                None => TableStatus::Complete,
                Some(e) => TableStatus::Incomplete(e.to_string()),
            };
            // a run that fails before producing any row leaves no table
            if outcome.error.is_none() || !outcome.rows.is_empty() {
                harness::write_csv(&csv, &outcome.rows, &status)?;
                eprintln!("wrote {}", csv.display());
            }
            if let Some(e) = outcome.error {
                return Err(e);
            }
            let svg = base.with_extension("svg");
            harness::write_plot(&svg, &outcome.rows, kind)?;
            eprintln!("wrote {}", svg.display());
            Ok(())
        }
        Cmd::Plot { input, kind, output } => {
            let (rows, status) = harness::read_csv(&input)?;
            if let TableStatus::Incomplete(why) = &status {
                eprintln!("warning: {} is incomplete: {why}", input.display());
            }
            let kind = match kind {
                Kind::Fig2 => PlotKind::Fig2,
                Kind::Fig3 => PlotKind::Fig3,
            };
            let output = output.unwrap_or_else(|| input.with_extension("svg"));
            harness::write_plot(&output, &rows, kind)?;
            eprintln!("wrote {}", output.display());
            Ok(())
        }
    }
}

fn theory(predictor: Predictor, a: &TheoryArgs) -> Result<()> {
    let base = GaussianSpec::new(a.mean, a.variance)?;
    let form = match a.form {
        Form::Exact => MinForm::Exact,
        Form::Approximate => MinForm::Approximate,
    };
    let need_n = || -> Result<&[usize]> {
        if a.n_dims.is_empty() {
            Err(Error::Config("this predictor needs at least one --n-dims".into()))
        } else {
            Ok(&a.n_dims)
        }
    };
    let params = |n: usize| evt::theory_params(n, &polycost::uniform_order_variance(n, a.max_order.min(n)));
    match predictor {
        Predictor::MinDistribution => {
            for &m in &a.m {
                let d = evt::min_distribution(base, m, form)?;
                print_json(&json!({"m": m, "form": form, "mean": d.mean, "variance": d.variance}));
            }
        }
        Predictor::RequiredIterations => {
            let target = a.target.ok_or_else(|| Error::Config("required-iterations needs --target".into()))?;
            let m = evt::required_iterations(target, base)?;
            print_json(&json!({"target": target, "mean": a.mean, "variance": a.variance, "m": m}));
        }
        Predictor::GlobalMin => {
            for &n in need_n()? {
                print_json(&json!({"n_dims": n, "global_min": evt::global_min_estimate(n)}));
            }
        }
        Predictor::Params => {
            for &n in need_n()? {
                let p = params(n)?;
                print_json(&json!({
                    "n_dims": n, "max_order": a.max_order, "eta": p.eta, "gain": p.gain,
                    "lambda": p.lambda, "d": p.d, "predicted_cost": p.predicted_cost(),
                }));
            }
        }
        Predictor::Offspring | Predictor::OffspringMin => {
            for &n in need_n()? {
                let p = params(n)?;
                for &m in &a.m {
                    let d = if matches!(predictor, Predictor::Offspring) {
                        evt::offspring_distribution(&p, m)?
                    } else {
                        evt::offspring_min_distribution(&p, m)?
                    };
                    print_json(&json!({"n_dims": n, "max_order": a.max_order, "m": m, "mean": d.mean, "variance": d.variance}));
                }
            }
        }
        Predictor::Mixture => {
            if a.r.is_empty() {
                return Err(Error::Config("mixture needs at least one --r".into()));
            }
            for &r in &a.r {
                for &m in &a.m {
                    let p = evt::mixture_prediction(r, m)?;
                    print_json(&json!({"r": r, "m": m, "offspring_mean": p.offspring_mean,
                        "offspring_variance": p.offspring_variance, "min_estimate": p.min_estimate}));
                }
            }
        }
        Predictor::MixtureBound => {
            for &m in &a.m {
                let (bound, r_star) = evt::mixture_bound(m);
                print_json(&json!({"m": m, "bound": bound, "r_star": r_star}));
            }
        }
    }
    Ok(())
}

fn print_json(v: &serde_json::Value) {
    println!("{v}");
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
