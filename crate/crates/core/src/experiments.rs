//! Monte-Carlo harness for the concentration experiments.
//!
//! A config describes a grid over (d, n, ε) and a number of replications
//! per cell. Every replication draws a contaminated sample, computes a
//! median and records how far it lands from the population target, together
//! with the high-probability bound for that cell. Replication seeds are
//! derived from the master seed and the cell coordinates, so any cell can be
//! rerun on its own and the output does not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::location::{
    location_bound_rhs, min_admissible_n, population_hd, tukey_median, DepthMethod, MedianOptions,
};
use crate::models::{
    check_growth_condition, sample_contaminated, AlphaModel, ContaminatedModel, GrowthCertificate, GrowthVariant, ModelSpec,
};
use crate::norms::{alpha_norm, conjugate_index, sphere_directions, Direction, DirectionScheme, ScatterMatrix};
use crate::rng::derive_seed;
use crate::scatter::{
    interval_containment, population_alpha_scatter_sigma, population_alpha_shd, population_scatter_sigma,
    population_shd, sample_scatter_median_with, scatter_pseudometric, ScatterDepthKind, ScatterMedianOptions,
    ScatterMode, SearchOptions,
};
use crate::stats::sorted_quantile;

pub const VERSION: &str = concat!("depthlab ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Population depth gap of the sample median against the bound.
    MaxdepthCoverage,
    /// Location error `‖μ̂‖_β` of the sample median.
    LocationRate,
    /// Error of the isotropic sample scatter median.
    ScatterRate,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::MaxdepthCoverage => "maxdepth_coverage",
            ExperimentKind::LocationRate => "location_rate",
            ExperimentKind::ScatterRate => "scatter_rate",
        })
    }
}

/// Window and slope of the growth condition to certify before running.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSpec {
    pub gamma: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationDepthChoice {
    /// Projection depth over candidate-augmented directions.
    Approx,
    /// Exact in d ≤ 2, projections otherwise.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterDepthName {
    Standard,
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodSpec {
    pub location_depth: LocationDepthChoice,
    /// Directions for the projection depth.
    pub directions: usize,
    pub multistarts: usize,
    pub midpoint_cap: usize,
    /// Directions for the scatter depth.
    pub scatter_directions: usize,
    pub scatter_depth: ScatterDepthName,
    /// Track whether the fitted scatter stays inside the population interval.
    pub interval_check: bool,
}

impl Default for MethodSpec {
    fn default() -> Self {
        MethodSpec {
            location_depth: LocationDepthChoice::Approx,
            directions: 96,
            multistarts: 8,
            midpoint_cap: 50_000,
            scatter_directions: 200,
            scatter_depth: ScatterDepthName::Standard,
            interval_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub replications: usize,
    pub delta: f64,
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthSpec>,
    #[serde(default)]
    pub method: MethodSpec,
    /// Smallest acceptable per-cell coverage; `1 − 2δ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_coverage: Option<f64>,
    /// Worker threads; never affects the output, so it is not echoed.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::input(format!("experiment config: {e}")))
    }

    pub fn min_coverage(&self) -> f64 {
        self.min_coverage.unwrap_or(1.0 - 2.0 * self.delta)
    }

    /// Grid sanity and the side condition for every n.
    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.d.is_empty() || self.epsilon.is_empty() {
            return Err(Error::input("n, d and epsilon grids must be nonempty"));
        }
        if self.replications == 0 {
            return Err(Error::input("replications must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::input(format!("delta must lie in (0, 1/2), got {}", self.delta)));
        }
        if let Some(&e) = self.epsilon.iter().find(|e| !(0.0..1.0 / 3.0).contains(*e)) {
            return Err(Error::input(format!("epsilon grid must lie in [0, 1/3), got {e}")));
        }
        if let Some(&d) = self.d.iter().find(|&&d| d < 2) {
            return Err(Error::input(format!("dimensions must be at least 2, got {d}")));
        }
        let min_n = min_admissible_n(self.delta);
        if let Some(&n) = self.n.iter().find(|&&n| n < min_n) {
            return Err(Error::SideCondition { n, delta: self.delta, min_n });
        }
        let m = &self.method;
        if m.directions == 0 || m.scatter_directions == 0 || m.multistarts == 0 {
            return Err(Error::input("direction counts and multistarts must be positive"));
        }
        if let Some(c) = self.min_coverage {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::input(format!("min_coverage must lie in [0, 1], got {c}")));
            }
        }
        Ok(())
    }

    fn scatter_kind(&self, alpha: f64) -> ScatterDepthKind {
        match self.method.scatter_depth {
            ScatterDepthName::Standard => ScatterDepthKind::Standard,
            ScatterDepthName::Alpha => ScatterDepthKind::Alpha(alpha),
        }
    }
}

/// Certificates the experiment relies on, one per (d, ε) where the target
/// depends on d and one per ε otherwise. Refuses when any fails.
pub fn certify(config: &ExperimentConfig) -> Result<Vec<GrowthCertificate>> {
    config.validate()?;
    if config.kind == ExperimentKind::MaxdepthCoverage {
        return Ok(Vec::new());
    }
    let g = config.growth.ok_or_else(|| {
        Error::Uncertified(format!("{} needs a [growth] block with gamma and kappa", config.kind))
    })?;
    let mut out = Vec::new();
    for &d in &config.d {
        let model = config.model.build(Some(d))?;
        let (variant, sigma) = match (config.kind, config.method.scatter_depth) {
            (ExperimentKind::LocationRate, _) => (GrowthVariant::A2, None),
            (_, ScatterDepthName::Standard) => (GrowthVariant::A3, Some(population_scatter_sigma(&model)?)),
            (_, ScatterDepthName::Alpha) => (GrowthVariant::A4, Some(population_alpha_scatter_sigma(&model))),
        };
        for &eps in &config.epsilon {
            let cert = check_growth_condition(model.marginal(), variant, g.gamma, g.kappa, sigma, eps)?;
            if !cert.holds {
                return Err(Error::Uncertified(format!(
                    "{variant} fails for {} at d={d}, epsilon={eps}: gamma={}, kappa={}, witnessed infimum {:.6}, reason {}",
                    model.marginal(),
                    g.gamma,
                    g.kappa,
                    cert.witnessed_inf,
                    cert.reason.map(|r| r.to_string()).unwrap_or_default()
                )));
            }
            out.push(cert);
        }
        if variant == GrowthVariant::A2 {
            // the A2 target does not depend on d
            break;
        }
    }
    Ok(out)
}

/// One replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub replication: usize,
    pub seed: u64,
    pub deviation: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub achieved_depth: Option<f64>,
    pub sigma_hat: Option<f64>,
}

pub const CSV_HEADER: [&str; 11] =
    ["n", "d", "epsilon", "delta", "replication", "seed", "deviation", "bound", "within_bound", "achieved_depth", "sigma_hat"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub replications: usize,
    pub bound: f64,
    pub coverage: f64,
    pub deviation_q10: f64,
    pub deviation_median: f64,
    pub deviation_q90: f64,
    /// Whether the sample-size condition converting the depth gap into a
    /// location error holds (location runs only).
    pub location_condition: Option<bool>,
    /// Frequency of `n₂/n₁ ≤ ε/(1−ε) + 4.5·√(log(1/δ)/(2n))`.
    pub decomposition_event_rate: f64,
    /// Whether `n₂/n₁ < 2` held in every replication where the event did.
    pub decomposition_consistent: bool,
    /// Frequency of interval containment (scatter runs with the check on).
    pub interval_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub certificates: Vec<GrowthCertificate>,
    pub records: Vec<Record>,
    pub cells: Vec<CellSummary>,
}

impl ExperimentReport {
    /// Whether every cell meets the configured coverage.
    pub fn coverage_ok(&self) -> bool {
        let floor = self.config.min_coverage();
        self.cells.iter().all(|c| c.coverage >= floor)
    }

    /// Records and cells matching the given coordinates.
    pub fn select(&self, n: Option<usize>, d: Option<usize>, epsilon: Option<f64>) -> ExperimentReport {
        let keep = |rn: usize, rd: usize, re: f64| {
            n.is_none_or(|v| v == rn) && d.is_none_or(|v| v == rd) && epsilon.is_none_or(|v| v == re)
        };
        ExperimentReport {
            version: self.version.clone(),
            config: self.config.clone(),
            certificates: self.certificates.clone(),
            records: self.records.iter().filter(|r| keep(r.n, r.d, r.epsilon)).cloned().collect(),
            cells: self.cells.iter().filter(|c| keep(c.n, c.d, c.epsilon)).cloned().collect(),
        }
    }

    /// Median deviation per cell, in cell order.
    pub fn median_deviation(&self, n: usize, d: usize, epsilon: f64) -> Option<f64> {
        self.cells.iter().find(|c| c.n == n && c.d == d && c.epsilon == epsilon).map(|c| c.deviation_median)
    }
}

/// Cells in grid order: d outermost, then n, then ε.
fn cells(config: &ExperimentConfig) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for &d in &config.d {
        for &n in &config.n {
            for &e in &config.epsilon {
                out.push((d, n, e));
            }
        }
    }
    out
}

/// Seed of replication `rep` in cell (d, n, ε).
pub fn replication_seed(master: u64, d: usize, n: usize, epsilon: f64, rep: usize) -> u64 {
    derive_seed(master, &[d as u64, n as u64, epsilon.to_bits(), rep as u64])
}

/// Everything a replication needs that is shared across its cell.
struct CellContext {
    d: usize,
    n: usize,
    epsilon: f64,
    model: AlphaModel,
    contaminated: ContaminatedModel,
    bound: f64,
    scatter: Option<ScatterContext>,
}

struct ScatterContext {
    kind: ScatterDepthKind,
    sigma: f64,
    target: ScatterMatrix,
    max_depth: f64,
    dirs: Vec<Direction>,
}

struct Outcome {
    record: Record,
    contaminated: usize,
    interval: Option<bool>,
}

fn location_options(config: &ExperimentConfig, d: usize, seed: u64) -> MedianOptions {
    let k = config.method.directions;
    let dir_seed = derive_seed(seed, &[11]);
    let method = match config.method.location_depth {
        LocationDepthChoice::Approx => DepthMethod::Approx { k, seed: dir_seed },
        LocationDepthChoice::Exact => DepthMethod::default_for(d, k, dir_seed),
    };
    let mut opts = MedianOptions::new(method, derive_seed(seed, &[12]));
    opts.multistarts = config.method.multistarts;
    opts.midpoint_cap = config.method.midpoint_cap;
    opts
}

fn op_norm_gap(a: &ScatterMatrix, b: &ScatterMatrix) -> f64 {
    let diff = a.matrix() - b.matrix();
    let diff = (&diff + diff.transpose()) * 0.5;
    diff.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn run_replication(config: &ExperimentConfig, cell: &CellContext, rep: usize) -> Result<Outcome> {
    let seed = replication_seed(config.master_seed, cell.d, cell.n, cell.epsilon, rep);
    let (sample, mask) = sample_contaminated(&cell.contaminated, cell.n, derive_seed(seed, &[10]))?;
    let contaminated = mask.iter().filter(|&&m| m).count();
    let loc = location_options(config, cell.d, seed);

    let (deviation, within, achieved, sigma_hat, interval) = match (&cell.scatter, config.kind) {
        (None, kind) => {
            let med = tukey_median(&sample, &loc)?;
            let gap = 0.5 - population_hd(&med.point, &cell.model)?.value();
            let dev = if kind == ExperimentKind::LocationRate {
                alpha_norm(&med.point, conjugate_index(cell.model.alpha())?)?
            } else {
                gap
            };
            (dev, gap <= cell.bound, med.achieved_depth.value(), None, None)
        }
        (Some(sc), _) => {
            let mut opts = ScatterMedianOptions::new(sc.kind, ScatterMode::Isotropic, cell.d, derive_seed(seed, &[13]));
            opts.location = loc;
            let fit = sample_scatter_median_with(&sample, &sc.dirs, &opts)?;
            let (dev, depth) = match sc.kind {
                ScatterDepthKind::Standard => {
                    (op_norm_gap(&fit.matrix, &sc.target), population_shd(&fit.matrix, &cell.model)?.value())
                }
                ScatterDepthKind::Alpha(a) => {
                    let search = SearchOptions { seed: derive_seed(seed, &[14]), ..SearchOptions::default() };
                    (
                        scatter_pseudometric(&fit.matrix, &sc.target, a, &search)?,
                        population_alpha_shd(&fit.matrix, &cell.model)?.value(),
                    )
                }
            };
            let interval = config
                .method
                .interval_check
                .then(|| interval_containment(&fit.matrix, sc.sigma, &cell.model, &sc.dirs, cell.bound));
            (dev, sc.max_depth - depth <= cell.bound, fit.achieved_depth.value(), fit.sigma, interval)
        }
    };
    Ok(Outcome {
        record: Record {
            n: cell.n,
            d: cell.d,
            epsilon: cell.epsilon,
            delta: config.delta,
            replication: rep,
            seed,
            deviation,
            bound: cell.bound,
            within_bound: within,
            achieved_depth: Some(achieved),
            sigma_hat,
        },
        contaminated,
        interval,
    })
}

fn build_cell(config: &ExperimentConfig, d: usize, n: usize, epsilon: f64) -> Result<CellContext> {
    let contaminated = config.model.build_contaminated(Some(d), epsilon)?;
    let model = contaminated.base().clone();
    let bound = location_bound_rhs(epsilon, d, n, config.delta)?.value;
    let scatter = if config.kind == ExperimentKind::ScatterRate {
        let kind = config.scatter_kind(model.alpha());
        let (sigma, max_depth) = match kind {
            ScatterDepthKind::Standard => {
                let s = population_scatter_sigma(&model)?;
                (s, population_shd(&ScatterMatrix::scaled_identity(d, s * s)?, &model)?.value())
            }
            ScatterDepthKind::Alpha(_) => (population_alpha_scatter_sigma(&model), 0.5),
        };
        let dirs = sphere_directions(
            d,
            config.method.scatter_directions,
            DirectionScheme::CandidateAugmented,
            derive_seed(config.master_seed, &[d as u64, 0xd1]),
        )?;
        Some(ScatterContext { kind, sigma, target: ScatterMatrix::scaled_identity(d, sigma * sigma)?, max_depth, dirs })
    } else {
        None
    };
    Ok(CellContext { d, n, epsilon, model, contaminated, bound, scatter })
}

fn summarize_cell(config: &ExperimentConfig, cell: &CellContext, outcomes: &[Outcome]) -> Result<CellSummary> {
    let reps = outcomes.len();
    let mut devs: Vec<f64> = outcomes.iter().map(|o| o.record.deviation).collect();
    devs.sort_by(f64::total_cmp);
    let covered = outcomes.iter().filter(|o| o.record.within_bound).count();
    let log_term = (1.0 / config.delta).ln();
    let threshold = cell.epsilon / (1.0 - cell.epsilon) + 4.5 * (log_term / (2.0 * cell.n as f64)).sqrt();
    let (mut event, mut consistent) = (0, true);
    for o in outcomes {
        let n1 = (cell.n - o.contaminated) as f64;
        let ratio = o.contaminated as f64 / n1;
        if ratio <= threshold {
            event += 1;
            consistent &= ratio < 2.0;
        }
    }
    let location_condition = match (config.kind, config.growth) {
        (ExperimentKind::LocationRate, Some(g)) => {
            Some(location_bound_rhs(cell.epsilon, cell.d, cell.n, config.delta)?.location_condition_holds(g.gamma, g.kappa))
        }
        _ => None,
    };
    let interval_rate = if outcomes.iter().any(|o| o.interval.is_some()) {
        Some(outcomes.iter().filter(|o| o.interval == Some(true)).count() as f64 / reps as f64)
    } else {
        None
    };
    Ok(CellSummary {
        n: cell.n,
        d: cell.d,
        epsilon: cell.epsilon,
        replications: reps,
        bound: cell.bound,
        coverage: covered as f64 / reps as f64,
        deviation_q10: sorted_quantile(&devs, 0.1),
        deviation_median: sorted_quantile(&devs, 0.5),
        deviation_q90: sorted_quantile(&devs, 0.9),
        location_condition,
        decomposition_event_rate: event as f64 / reps as f64,
        decomposition_consistent: consistent,
        interval_rate,
    })
}

/// Runs every cell of the grid. Certification happens before any sampling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let certificates = certify(config)?;
    let contexts: Vec<CellContext> =
        cells(config).into_iter().map(|(d, n, e)| build_cell(config, d, n, e)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..contexts.len()).flat_map(|c| (0..config.replications).map(move |r| (c, r))).collect();

    let work = || jobs.par_iter().map(|&(c, r)| run_replication(config, &contexts[c], r)).collect::<Result<Vec<_>>>();
    let outcomes = match config.threads {
        Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::input(format!("thread pool: {e}")))?
            .install(work)?,
        _ => work()?,
    };

    let mut cells_out = Vec::with_capacity(contexts.len());
    for (c, chunk) in outcomes.chunks(config.replications).enumerate() {
        cells_out.push(summarize_cell(config, &contexts[c], chunk)?);
    }
    Ok(ExperimentReport {
        version: VERSION.to_string(),
        config: config.clone(),
        certificates,
        records: outcomes.into_iter().map(|o| o.record).collect(),
        cells: cells_out,
    })
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::input(format!("config is for {}, not {kind}", config.kind)));
    }
    Ok(())
}

pub fn run_location_rate(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::LocationRate)?;
    run_experiment(config)
}

pub fn run_maxdepth_coverage(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::MaxdepthCoverage)?;
    run_experiment(config)
}

pub fn run_scatter_rate(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::ScatterRate)?;
    run_experiment(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeAxis {
    N,
    Epsilon,
}

/// Least-squares slope of log median deviation against log axis value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    /// 95% normal band.
    pub lower: f64,
    pub upper: f64,
    /// (axis value, median deviation) pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Fits the exponent along one axis; the other two axes must each take a
/// single value in the report (use [`ExperimentReport::select`] first).
pub fn rate_slope(report: &ExperimentReport, axis: SlopeAxis) -> Result<SlopeFit> {
    if report.records.is_empty() {
        return Err(Error::input("report has no records"));
    }
    let mut others: Vec<(usize, u64)> = report
        .records
        .iter()
        .map(|r| match axis {
            SlopeAxis::N => (r.d, r.epsilon.to_bits()),
            SlopeAxis::Epsilon => (r.d, r.n as u64),
        })
        .collect();
    others.sort_unstable();
    others.dedup();
    if others.len() != 1 {
        return Err(Error::input("other axes must be fixed; select a single value for each"));
    }
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in &report.records {
        let x = match axis {
            SlopeAxis::N => r.n as f64,
            SlopeAxis::Epsilon => r.epsilon,
        };
        match groups.iter_mut().find(|g| g.0 == x) {
            Some(g) => g.1.push(r.deviation),
            None => groups.push((x, vec![r.deviation])),
        }
    }
    if groups.len() < 3 {
        return Err(Error::input(format!("need at least 3 grid points on the axis, got {}", groups.len())));
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points: Vec<(f64, f64)> = groups
        .into_iter()
        .map(|(x, mut v)| {
            v.sort_by(f64::total_cmp);
            (x, sorted_quantile(&v, 0.5))
        })
        .collect();
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::input(format!("log-log fit needs positive values, got axis {} deviation {}", p.0, p.1)));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let std_error = (rss / (k - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, std_error, lower: slope - 1.96 * std_error, upper: slope + 1.96 * std_error, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Serializes a report. CSV holds the records only, with a fixed header;
/// JSON holds the whole report including the config echo.
pub fn summarize(report: &ExperimentReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Csv => records_to_csv(&report.records),
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| Error::numerical(format!("json: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn records_to_csv(records: &[Record]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let io = |e: csv::Error| Error::numerical(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::numerical(format!("csv: {e}")))
}

pub fn records_from_csv(bytes: &[u8]) -> Result<Vec<Record>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rd.headers().map_err(|e| Error::input(format!("csv header: {e}")))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::input(format!("unexpected csv header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::input(format!("csv row {}: {e}", i + 2))))
        .collect()
}

pub fn report_from_json(bytes: &[u8]) -> Result<ExperimentReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::input(format!("json report: {e}")))
}
