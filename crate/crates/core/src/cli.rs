//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for input errors (unreadable or malformed
//! files, bad arguments, unknown labels), 2 for numerical failures.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bipartivity::{assess, BipartivityConfig};
use crate::error::{Error, Result};
use crate::eval::{run_experiment, EvalConfig, EvalReport, Method};
use crate::graph::{parse_bipartite, parse_unipartite, split_edges, BipartiteGraph, ParseOptions, Side};
use crate::learn::{build_targets, fit_all, FitOptions, FitOutcome, FitTargets};
use crate::manifest::RunManifest;
use crate::predict::{top_n, SpectralScorer};
use crate::svd::{truncated_svd, SvdModel, SvdOptions};
use crate::transform::{taylor_weights, Family, SpectralTransform};

#[derive(Debug, Parser)]
#[command(name = "bilink", version, about = "Link prediction in bipartite networks")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn transformation parameters from one edge list.
    Fit(FitArgs),
    /// Holdout evaluation by mean average precision.
    Evaluate(EvaluateArgs),
    /// Rank right nodes for one or all left nodes.
    Predict(PredictArgs),
    /// Classify unipartite networks as nearly bipartite or not.
    Bipartivity(BipartivityArgs),
    /// Taylor coefficients (path weights) of an odd pseudokernel.
    Pathweights(PathweightArgs),
}

#[derive(Debug, Args)]
struct LayoutArgs {
    /// Edge lines carry a weight column (ignored).
    #[arg(long)]
    weighted: bool,
    /// Edge lines carry a timestamp column after the weight.
    #[arg(long)]
    timestamped: bool,
    /// Reject weights other than 1.
    #[arg(long)]
    strict: bool,
}

impl LayoutArgs {
    fn options(&self) -> ParseOptions {
        ParseOptions {
            has_weight: self.weighted,
            has_timestamp: self.timestamped,
            strict_unweighted: self.strict,
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Bipartite edge list.
    #[arg(long, required_unless_present = "targets", conflicts_with = "targets")]
    input: Option<PathBuf>,
    /// CSV of (sigma, target) pairs to fit directly.
    #[arg(long)]
    targets: Option<PathBuf>,
    #[command(flatten)]
    layout: LayoutArgs,
    #[arg(long, default_value_t = 32)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    inner_fraction: f64,
    #[arg(long, default_value = "sinh,neumann,poly,nnpoly,reduction")]
    families: String,
    #[arg(long, default_value_t = 3)]
    poly_degree: usize,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UserSide {
    Left,
    Right,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// One or more bipartite edge lists.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[command(flatten)]
    layout: LayoutArgs,
    #[arg(long, default_value_t = 32)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0.3)]
    inner_fraction: f64,
    #[arg(long, default_value = "poly,nnpoly,sinh,reduction,neumann,pref")]
    families: String,
    #[arg(long)]
    candidate_cap: Option<usize>,
    /// Split uniformly at random even when timestamps are present.
    #[arg(long)]
    random_split: bool,
    #[arg(long, value_enum, default_value = "left")]
    users: UserSide,
    #[arg(long, default_value_t = 3)]
    poly_degree: usize,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    model: PathBuf,
    /// Transformation record (a `fit_<family>.txt` file).
    #[arg(long)]
    transform: PathBuf,
    /// The edge list the model was computed from.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    layout: LayoutArgs,
    /// Left node label.
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    node: Option<String>,
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Output file (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BipartivityArgs {
    /// One or more unipartite edge lists.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    m_top: usize,
    #[arg(long, default_value_t = 16)]
    m_bottom: usize,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    /// Directory for per-graph curve CSVs.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SeriesFamily {
    Sinh,
    Neumann,
}

#[derive(Debug, Args)]
struct PathweightArgs {
    #[arg(long, value_enum)]
    family: SeriesFamily,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 9)]
    max_power: u32,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Bipartivity(a) => cmd_bipartivity(&a),
        Command::Pathweights(a) => cmd_pathweights(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path, layout: &LayoutArgs) -> Result<BipartiteGraph> {
    parse_bipartite(open(path)?, layout.options()).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn parse_families(text: &str) -> Result<Vec<Family>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let families = parse_families(&args.families)?;
    fs::create_dir_all(&args.output_dir)?;
    let options = FitOptions {
        poly_degree: args.poly_degree,
        ..FitOptions::default()
    };
    let mut manifest = RunManifest::new("fit");

    let targets = if let Some(path) = &args.targets {
        manifest = manifest.input(path);
        FitTargets::read_csv(&fs::read_to_string(path).map_err(|e| {
            Error::invalid(format!("{}: {e}", path.display()))
        })?)?
    } else {
        let path = args.input.as_ref().expect("clap enforces input or targets");
        manifest = manifest.input(path);
        let graph = read_graph(path, &args.layout)?;
        let rank = args.k.min(graph.left_count()).min(graph.right_count());
        let svd = |rank| SvdOptions {
            rank,
            seed: args.seed,
            ..SvdOptions::default()
        };
        let split = split_edges(&graph, args.inner_fraction, args.seed, graph.has_timestamps())?;
        let inner_model = truncated_svd(&split.train.biadjacency(), &svd(rank))?;
        let targets = build_targets(&inner_model, &split.test_graph().biadjacency())?;
        let model = truncated_svd(&graph.biadjacency(), &svd(rank))?;
        let mut out = BufWriter::new(File::create(args.output_dir.join("model.tsv"))?);
        model.write_tsv(&mut out)?;
        out.flush()?;
        manifest = manifest
            .set("rank", rank)
            .set("by_time", split.by_time)
            .set("inner_fraction", args.inner_fraction);
        targets
    };
    manifest = manifest
        .set("seed", args.seed)
        .set("families", &args.families)
        .set("poly_degree", args.poly_degree)
        .set("grid_points", options.grid_points);

    let outcomes = fit_all(&families, &targets, &options);
    let mut fitted = 0;
    for outcome in &outcomes {
        match outcome {
            FitOutcome::Fitted(report) => {
                let name = report.family.name();
                write_file(
                    &args.output_dir.join(format!("fit_{name}.txt")),
                    &report.to_record(),
                )?;
                write_file(
                    &args.output_dir.join(format!("curve_{name}.csv")),
                    &report.curve_csv()?,
                )?;
                println!("{name}\tresidual={}\t{}", report.residual, report.transform);
                fitted += 1;
            }
            FitOutcome::Skipped { family, reason } => {
                eprintln!("{family}: skipped ({reason})");
            }
        }
    }
    write_file(&args.output_dir.join("manifest.txt"), &manifest.to_text())?;
    if fitted == 0 && !families.is_empty() {
        return Err(Error::Degenerate("no family could be fitted".into()));
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let methods = Method::parse_list(&args.families)?;
    fs::create_dir_all(&args.output_dir)?;
    let config = EvalConfig {
        test_fraction: args.test_fraction,
        inner_fraction: args.inner_fraction,
        seed: args.seed,
        rank: args.k,
        candidate_cap: args.candidate_cap,
        methods: methods.clone(),
        by_time: if args.random_split { Some(false) } else { None },
        users: match args.users {
            UserSide::Left => Side::Left,
            UserSide::Right => Side::Right,
        },
        fit: FitOptions {
            poly_degree: args.poly_degree,
            ..FitOptions::default()
        },
        ..EvalConfig::default()
    };
    let mut manifest = RunManifest::new("evaluate");
    for p in &args.input {
        manifest = manifest.input(p);
    }
    manifest = manifest
        .set("k", args.k)
        .set("seed", args.seed)
        .set("test_fraction", args.test_fraction)
        .set("inner_fraction", args.inner_fraction)
        .set("families", &args.families)
        .set(
            "candidate_cap",
            args.candidate_cap.map_or("none".to_string(), |c| c.to_string()),
        )
        .set("random_split", args.random_split)
        .set("users", format!("{:?}", config.users).to_lowercase())
        .set("poly_degree", args.poly_degree);

    let mut reports = Vec::new();
    for path in &args.input {
        let graph = read_graph(path, &args.layout)?;
        let name = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        reports.push(run_experiment(&graph, &name, &config)?);
    }
    let mut csv = EvalReport::csv_header(&methods);
    csv.push('\n');
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_file(&args.output_dir.join("report.csv"), &csv)?;
    let mut text = EvalReport::table(&reports);
    text.push('\n');
    for r in &reports {
        text.push_str(&r.details());
    }
    write_file(&args.output_dir.join("report.txt"), &text)?;
    write_file(&args.output_dir.join("manifest.txt"), &manifest.to_text())?;
    print!("{}", EvalReport::table(&reports));
    for r in &reports {
        for (phase, took) in &r.timing {
            eprintln!("{} {phase}: {:.3}s", r.dataset, took.as_secs_f64());
        }
    }
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let graph = read_graph(&args.input, &args.layout)?;
    let model = SvdModel::read_tsv(open(&args.model)?)?;
    if model.rows() != graph.left_count() || model.cols() != graph.right_count() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} model", graph.left_count(), graph.right_count()),
            actual: format!("{}x{}", model.rows(), model.cols()),
        });
    }
    let transform = SpectralTransform::from_record(&fs::read_to_string(&args.transform)?)?;
    let scorer = SpectralScorer::new(&model, &transform)?;
    let users: Vec<usize> = match &args.node {
        Some(label) => vec![graph
            .labels()
            .lookup(Side::Left, label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))?],
        None => (0..graph.left_count()).collect(),
    };
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let labels = graph.labels();
    for u in users {
        let exclude = graph.neighbors(Side::Left, u)?;
        for (w, s) in top_n(&scorer, graph.right_count(), u, args.top, exclude) {
            writeln!(out, "{}\t{}\t{}", labels.left[u], labels.right[w], s)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_bipartivity(args: &BipartivityArgs) -> Result<()> {
    let config = BipartivityConfig {
        top: args.m_top,
        bottom: args.m_bottom,
        test_fraction: args.test_fraction,
        seed: args.seed,
        ..BipartivityConfig::default()
    };
    if let Some(dir) = &args.output_dir {
        fs::create_dir_all(dir)?;
        let mut manifest = RunManifest::new("bipartivity");
        for p in &args.input {
            manifest = manifest.input(p);
        }
        manifest = manifest
            .set("seed", args.seed)
            .set("m_top", args.m_top)
            .set("m_bottom", args.m_bottom)
            .set("test_fraction", args.test_fraction);
        write_file(&dir.join("manifest.txt"), &manifest.to_text())?;
    }
    for path in &args.input {
        let graph = parse_unipartite(open(path)?)?;
        let report = assess(&graph, &config)?;
        println!(
            "{}\t{}\tratio={}\tsinh_residual={}\texp_residual={}",
            path.display(),
            report.verdict,
            report.ratio,
            report.sinh_fit.residual,
            report.exp_fit.residual
        );
        if let Some(dir) = &args.output_dir {
            let stem = path
                .file_stem()
                .map_or_else(|| "graph".to_string(), |s| s.to_string_lossy().into_owned());
            write_file(&dir.join(format!("bipartivity_{stem}.csv")), &report.curve_csv()?)?;
        }
    }
    Ok(())
}

/// `power,weight` rows.
pub fn pathweight_csv(t: &SpectralTransform, max_power: u32) -> Result<String> {
    let mut out = String::from("power,weight\n");
    for (p, w) in taylor_weights(t, max_power)? {
        out.push_str(&format!("{p},{w}\n"));
    }
    Ok(out)
}

fn cmd_pathweights(args: &PathweightArgs) -> Result<()> {
    if args.alpha.is_nan() || args.alpha < 0.0 {
        return Err(Error::invalid("alpha must be nonnegative"));
    }
    let t = match args.family {
        SeriesFamily::Sinh => SpectralTransform::Sinh {
            alpha: args.alpha,
            beta: args.beta,
        },
        SeriesFamily::Neumann => SpectralTransform::OddNeumann {
            alpha: args.alpha,
            beta: args.beta,
        },
    };
    let csv = pathweight_csv(&t, args.max_power)?;
    match &args.output {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
