//! `depthlab`: command-line front end for halfspace location and scatter
//! depth, medians, σ solvers, growth certificates and experiments.
//!
//! Exit codes: 0 success, 1 bad input, 2 numerical failure (and a finished
//! experiment whose coverage assertion failed).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depthlab::experiments::{run_experiment, summarize, ExperimentConfig, ExperimentReport, ReportFormat};
use depthlab::location::{population_hd, sample_hd, tukey_median, DepthMethod, MedianOptions};
use depthlab::models::{check_growth_condition, sample_contaminated, GrowthVariant, ModelSpec, SampleMatrix};
use depthlab::norms::{sphere_directions, DirectionScheme};
use depthlab::rng::derive_seed;
use depthlab::scatter::{
    population_alpha_scatter_sigma, population_scatter_sigma, sample_scatter_median_with, ScatterDepthKind,
    ScatterMedianOptions, ScatterMode,
};
use depthlab::Error;

#[derive(Parser)]
#[command(name = "depthlab", version, about = "Halfspace depth for alpha-symmetric laws under contamination")]
struct Cli {
    /// Extra diagnostics on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Population depth under a model, or sample depth of a point in a data set.
    Depth(DepthArgs),
    /// Location or scatter median of a data set.
    Median(MedianArgs),
    /// Scale of the population scatter median.
    SolveSigma(SolveSigmaArgs),
    /// Check a growth condition on the model's marginal.
    Certify(CertifyArgs),
    /// Run a Monte-Carlo experiment from a TOML config.
    Experiment(ExperimentArgs),
    /// Draw a (possibly contaminated) sample as headerless CSV.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodName {
    Exact1d,
    Exact2d,
    Approx,
}

#[derive(Args)]
struct MethodArgs {
    /// Depth algorithm; exact in d ≤ 2 and approx above when omitted.
    #[arg(long, value_enum)]
    method: Option<MethodName>,
    /// Directions for the approximate method.
    #[arg(long, default_value_t = 96)]
    dirs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MethodArgs {
    fn resolve(&self, d: usize) -> DepthMethod {
        let dir_seed = derive_seed(self.seed, &[1]);
        match self.method {
            Some(MethodName::Exact1d) => DepthMethod::Exact1d,
            Some(MethodName::Exact2d) => DepthMethod::Exact2d,
            Some(MethodName::Approx) => DepthMethod::Approx { k: self.dirs, seed: dir_seed },
            None => DepthMethod::default_for(d, self.dirs, dir_seed),
        }
    }
}

#[derive(Args)]
struct DepthArgs {
    /// Model mini-spec, e.g. `cauchy:d=2` or `stable:alpha=0.7,d=3`.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    model: Option<String>,
    /// Headerless CSV, one observation per row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args)]
struct MedianArgs {
    #[arg(long)]
    data: PathBuf,
    /// `location`, `scatter:standard` or `scatter:alpha=<index>`.
    #[arg(long, default_value = "location")]
    kind: String,
    /// Scatter parametrization; required for scatter kinds.
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    /// Directions for the scatter depth.
    #[arg(long, default_value_t = 200)]
    scatter_dirs: usize,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeName {
    Isotropic,
    Diagonal,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepthName {
    Standard,
    Alpha,
}

#[derive(Args)]
struct SolveSigmaArgs {
    #[arg(long)]
    model: String,
    #[arg(long, value_enum, default_value = "standard")]
    depth: DepthName,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    model: String,
    /// A2, A3 or A4.
    #[arg(long)]
    variant: String,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Centre scale for A3/A4.
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.csv and report.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numerical() { 2 } else { 1 }, msg: e.to_string() }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure { code: 1, msg: msg.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn fmt_num(v: f64) -> String {
    format!("{v:.12}")
}

fn fmt_row(v: &[f64]) -> String {
    v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",")
}

fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| input(format!("--point: cannot parse '{}' as a number", t.trim()))))
        .collect()
}

fn parse_model(s: &str) -> CliResult<ModelSpec> {
    Ok(s.parse::<ModelSpec>()?)
}

/// Headerless numeric CSV with row/column diagnostics.
fn read_data(path: &Path) -> CliResult<SampleMatrix> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| input(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>().map_err(|_| {
                    input(format!("{}: row {}, column {}: cannot parse '{f}' as a number", path.display(), i + 1, j + 1))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(input(format!(
                    "{}: row {} has {} columns, expected {}",
                    path.display(),
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(input(format!("{}: no observations", path.display())));
    }
    Ok(SampleMatrix::from_rows(&rows)?)
}

fn cmd_depth(a: &DepthArgs) -> CliResult<()> {
    let x = parse_point(&a.point)?;
    let v = match (&a.model, &a.data) {
        (Some(m), _) => {
            let spec = parse_model(m)?;
            let model = spec.build(Some(spec.dim.unwrap_or(x.len())))?;
            population_hd(&x, &model)?
        }
        (None, Some(path)) => {
            let s = read_data(path)?;
            sample_hd(&x, &s, a.method.resolve(s.dim()))?
        }
        (None, None) => return Err(input("give --model or --data")),
    };
    println!("{}", fmt_num(v.value()));
    Ok(())
}

fn parse_scatter_kind(kind: &str) -> CliResult<Option<ScatterDepthKind>> {
    match kind.trim() {
        "location" => Ok(None),
        "scatter:standard" => Ok(Some(ScatterDepthKind::Standard)),
        k => match k.strip_prefix("scatter:alpha=") {
            Some(v) => {
                let a: f64 = v.parse().map_err(|_| input(format!("--kind: bad alpha '{v}'")))?;
                if !(a > 0.0) {
                    return Err(input("--kind: alpha must be positive"));
                }
                Ok(Some(ScatterDepthKind::Alpha(a)))
            }
            None => Err(input(format!("--kind: expected location, scatter:standard or scatter:alpha=<index>, got '{k}'"))),
        },
    }
}

fn cmd_median(a: &MedianArgs, verbose: bool) -> CliResult<()> {
    let kind = parse_scatter_kind(&a.kind)?;
    let s = read_data(&a.data)?;
    let d = s.dim();
    let location = MedianOptions::new(a.method.resolve(d), derive_seed(a.method.seed, &[2]));
    match kind {
        None => {
            let m = tukey_median(&s, &location)?;
            if verbose {
                eprintln!("candidates evaluated: {}", m.candidates_evaluated);
            }
            println!("point {}", fmt_row(&m.point));
            println!("depth {}", fmt_num(m.achieved_depth.value()));
        }
        Some(kind) => {
            let mode = match a.mode.ok_or_else(|| input("scatter medians need --mode isotropic|diagonal|full"))? {
                ModeName::Isotropic => ScatterMode::Isotropic,
                ModeName::Diagonal => ScatterMode::Diagonal,
                ModeName::Full => ScatterMode::Full,
            };
            let dirs = sphere_directions(d, a.scatter_dirs, DirectionScheme::CandidateAugmented, derive_seed(a.method.seed, &[3]))?;
            let mut opts = ScatterMedianOptions::new(kind, mode, d, derive_seed(a.method.seed, &[4]));
            opts.location = location;
            let r = sample_scatter_median_with(&s, &dirs, &opts)?;
            println!("center {}", fmt_row(&r.center));
            println!("matrix");
            for row in r.matrix.matrix().row_iter() {
                println!("{}", fmt_row(&row.iter().copied().collect::<Vec<_>>()));
            }
            if let Some(sig) = r.sigma {
                println!("sigma {}", fmt_num(sig));
            }
            println!("depth {}", fmt_num(r.achieved_depth.value()));
        }
    }
    Ok(())
}

fn cmd_solve_sigma(a: &SolveSigmaArgs) -> CliResult<()> {
    let spec = parse_model(&a.model)?;
    let model = spec.build(None)?;
    let sigma = match a.depth {
        DepthName::Standard => population_scatter_sigma(&model)?,
        DepthName::Alpha => population_alpha_scatter_sigma(&model),
    };
    println!("{}", fmt_num(sigma));
    Ok(())
}

fn cmd_certify(a: &CertifyArgs) -> CliResult<()> {
    let spec = parse_model(&a.model)?;
    // only the marginal matters; the dimension is irrelevant here
    let model = spec.build(Some(spec.dim.unwrap_or(2)))?;
    let variant: GrowthVariant = a.variant.parse()?;
    let c = check_growth_condition(model.marginal(), variant, a.gamma, a.kappa, a.sigma, a.epsilon)?;
    println!("variant {}", c.variant);
    println!("holds {}", c.holds);
    println!("witnessed_inf {}", fmt_num(c.witnessed_inf));
    println!("gamma_kappa {}", fmt_num(c.gamma * c.kappa));
    println!("range_ok {}", c.range_ok);
    println!("reason {}", c.reason.map(|r| r.to_string()).unwrap_or_else(|| "none".into()));
    Ok(())
}

fn print_cells(report: &ExperimentReport) {
    println!("{:>7} {:>3} {:>7} {:>5} {:>10} {:>10} {:>9}", "n", "d", "epsilon", "reps", "median_dev", "bound", "coverage");
    for c in &report.cells {
        println!(
            "{:>7} {:>3} {:>7} {:>5} {:>10.6} {:>10.4} {:>9.3}",
            c.n, c.d, c.epsilon, c.replications, c.deviation_median, c.bound, c.coverage
        );
    }
}

fn cmd_experiment(a: &ExperimentArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| input(format!("{}: {e}", a.config.display())))?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    if let Ok(v) = std::env::var("DEPTHLAB_THREADS") {
        let t: usize = v.trim().parse().map_err(|_| input(format!("DEPTHLAB_THREADS: expected a count, got '{v}'")))?;
        config.threads = Some(t);
    }
    let report = run_experiment(&config)?;
    fs::create_dir_all(&a.out).map_err(|e| input(format!("{}: {e}", a.out.display())))?;
    for (name, format) in [("report.csv", ReportFormat::Csv), ("report.json", ReportFormat::Json)] {
        let path = a.out.join(name);
        fs::write(&path, summarize(&report, format)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    print_cells(&report);
    if report.coverage_ok() {
        Ok(())
    } else {
        Err(Failure { code: 2, msg: format!("coverage below {} in at least one cell", config.min_coverage()) })
    }
}

fn cmd_sample(a: &SampleArgs) -> CliResult<()> {
    let spec = parse_model(&a.model)?;
    let cm = spec.build_contaminated(None, a.epsilon)?;
    let (s, _) = sample_contaminated(&cm, a.n, a.seed)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in s.rows() {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(|e| input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| input(e.to_string()))?;
    match &a.out {
        Some(p) => fs::write(p, bytes).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| input(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Depth(a) => cmd_depth(a),
        Command::Median(a) => cmd_median(a, cli.verbose),
        Command::SolveSigma(a) => cmd_solve_sigma(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
