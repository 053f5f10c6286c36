//! Halfspace (Tukey) depth of a location: closed form for α-symmetric
//! models, exact and approximate sample versions, the sample median search
//! and the concentration-bound right-hand side.
//!
//! Sample depth of `x` is the smallest fraction of observations in a closed
//! halfspace `{y : ⟨y,u⟩ ≤ ⟨x,u⟩}`. For α-symmetric laws the population depth
//! is `1 − F(‖x‖_β)` with β the conjugate index of α.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::models::{sample_contaminated, AlphaModel, ContaminatedModel, SampleMatrix};
use crate::norms::{conjugate_index, dot, norm_unchecked, sphere_directions, Direction, DirectionScheme};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::sorted_quantile;

/// A depth in [0, 1]. Sample depths are exact multiples of 1/n.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DepthValue(f64);

impl DepthValue {
    pub fn new(v: f64) -> Self {
        DepthValue(v)
    }

    pub fn from_count(count: usize, n: usize) -> Self {
        DepthValue(count as f64 / n as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DepthMethod {
    /// Both directions on the line.
    Exact1d,
    /// Angular sweep in the plane; exactly the sample infimum.
    Exact2d,
    /// `k` candidate-augmented directions and their antipodes; an upper
    /// bound on the sample depth.
    Approx { k: usize, seed: u64 },
}

impl DepthMethod {
    /// The exact method for d ≤ 2, otherwise `Approx { k, seed }`.
    pub fn default_for(d: usize, k: usize, seed: u64) -> Self {
        match d {
            1 => DepthMethod::Exact1d,
            2 => DepthMethod::Exact2d,
            _ => DepthMethod::Approx { k, seed },
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        match *self {
            DepthMethod::Exact1d if d != 1 => Err(Error::input(format!("exact1d needs d = 1, got d = {d}"))),
            DepthMethod::Exact2d if d != 2 => Err(Error::input(format!("exact2d needs d = 2, got d = {d}"))),
            DepthMethod::Approx { k: 0, .. } => Err(Error::input("approx needs at least one direction")),
            _ => Ok(()),
        }
    }
}

/// `1 − F(‖x‖_β)`; equals 1/2 at the origin.
pub fn population_hd(x: &[f64], model: &AlphaModel) -> Result<DepthValue> {
    if x.len() != model.dim() {
        return Err(Error::input(format!("point has {} coordinates, model has {}", x.len(), model.dim())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("point must be finite"));
    }
    let beta = conjugate_index(model.alpha())?;
    let r = norm_unchecked(x, beta);
    Ok(DepthValue(1.0 - model.marginal().cdf(r)))
}

fn count_le(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&p| p <= t)
}

fn count_ge(sorted: &[f64], t: f64) -> usize {
    sorted.len() - sorted.partition_point(|&p| p < t)
}

/// Angles of `X_i − x` around a fixed centre, for O(log n) halfplane counts.
#[derive(Debug, Clone)]
pub struct AngularIndex {
    angles: Vec<f64>,
    coincident: usize,
}

/// Half-width of the probe on each side of a critical angle.
const ANGLE_JITTER: f64 = 1e-9;

fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl AngularIndex {
    pub fn new(x: &[f64], sample: &SampleMatrix) -> Result<Self> {
        if sample.dim() != 2 || x.len() != 2 {
            return Err(Error::input("angular index is planar"));
        }
        let mut angles = Vec::with_capacity(sample.n());
        let mut coincident = 0;
        for r in sample.rows() {
            let (dx, dy) = (r[0] - x[0], r[1] - x[1]);
            if dx == 0.0 && dy == 0.0 {
                coincident += 1;
            } else {
                angles.push(wrap(dy.atan2(dx)));
            }
        }
        angles.sort_by(f64::total_cmp);
        Ok(AngularIndex { angles, coincident })
    }

    fn in_window(&self, a: f64, b: f64) -> usize {
        let lo = self.angles.partition_point(|&p| p < a);
        let hi = self.angles.partition_point(|&p| p <= b);
        if a <= b {
            hi - lo
        } else {
            (self.angles.len() - lo) + hi
        }
    }

    /// Observations in the closed halfplane `{y : ⟨y − x, u⟩ ≤ 0}` with
    /// `u = (cos θ, sin θ)`.
    pub fn count(&self, theta: f64) -> usize {
        self.count_away(theta) + self.coincident
    }

    fn count_away(&self, theta: f64) -> usize {
        self.in_window(wrap(theta + 0.5 * PI), wrap(theta + 1.5 * PI))
    }

    /// Minimum of [`count`](Self::count) over all directions.
    pub fn min_count(&self) -> usize {
        let mut best = self.angles.len();
        for &psi in &self.angles {
            for c in [psi + 0.5 * PI, psi - 0.5 * PI] {
                for s in [-ANGLE_JITTER, ANGLE_JITTER] {
                    best = best.min(self.count_away(c + s));
                }
            }
        }
        best + self.coincident
    }
}

/// Sorted projections of a sample onto a fixed direction set.
#[derive(Debug, Clone)]
pub struct ProjectionIndex {
    dirs: Vec<Direction>,
    sorted: Vec<Vec<f64>>,
    n: usize,
}

impl ProjectionIndex {
    pub fn new(sample: &SampleMatrix, dirs: Vec<Direction>) -> Result<Self> {
        if dirs.is_empty() {
            return Err(Error::input("projection index needs directions"));
        }
        if dirs.iter().any(|u| u.dim() != sample.dim()) {
            return Err(Error::input("direction dimension differs from the sample"));
        }
        let sorted = dirs
            .par_iter()
            .map(|u| {
                let mut p: Vec<f64> = sample.rows().map(|r| dot(u.coords(), r)).collect();
                p.sort_by(f64::total_cmp);
                p
            })
            .collect();
        Ok(ProjectionIndex { dirs, sorted, n: sample.n() })
    }

    /// Candidate-augmented directions, as used by the approximate method.
    pub fn candidate_augmented(sample: &SampleMatrix, k: usize, seed: u64) -> Result<Self> {
        let dirs = sphere_directions(sample.dim(), k, DirectionScheme::CandidateAugmented, seed)?;
        Self::new(sample, dirs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Smallest closed-halfspace count over the directions and antipodes.
    pub fn count(&self, x: &[f64]) -> usize {
        self.count_prefix(x, self.dirs.len())
    }

    /// [`count`](Self::count) over the first `m` directions only; an upper
    /// bound on the full count.
    pub fn count_prefix(&self, x: &[f64], m: usize) -> usize {
        self.dirs
            .iter()
            .zip(&self.sorted)
            .take(m)
            .map(|(u, p)| {
                let t = dot(u.coords(), x);
                count_le(p, t).min(count_ge(p, t))
            })
            .min()
            .unwrap_or(self.n)
    }

    /// Exact count when it is at least `floor`; otherwise some value below
    /// `floor` (the scan stops early).
    fn count_at_least(&self, x: &[f64], floor: usize) -> usize {
        let mut best = self.n;
        for (u, p) in self.dirs.iter().zip(&self.sorted) {
            let t = dot(u.coords(), x);
            best = best.min(count_le(p, t).min(count_ge(p, t)));
            if best < floor {
                break;
            }
        }
        best
    }
}

/// Directions used for the cheap upper bound in the branch-and-bound pool
/// scan.
const BOUND_PREFIX: usize = 12;
const SCAN_CHUNK: usize = 256;

/// Pool entries whose count could reach the top `m`, with exact counts, in
/// pool order. Candidates are visited by decreasing prefix bound and the
/// scan stops once no remaining bound can reach the current m-th best.
fn branch_and_bound(index: &ProjectionIndex, pool: &[Vec<f64>], m: usize) -> Vec<(usize, usize)> {
    let bounds: Vec<usize> = pool.par_iter().map(|p| index.count_prefix(p, BOUND_PREFIX)).collect();
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| bounds[b].cmp(&bounds[a]).then(a.cmp(&b)));
    let mut kept: Vec<(usize, usize)> = Vec::new();
    let mut top: Vec<usize> = Vec::new(); // descending
    for chunk in order.chunks(SCAN_CHUNK) {
        let floor = if top.len() < m { 0 } else { top[m - 1] };
        if bounds[chunk[0]] < floor {
            break;
        }
        let counts: Vec<(usize, usize)> = chunk
            .par_iter()
            .filter(|&&i| bounds[i] >= floor)
            .map(|&i| (i, index.count_at_least(&pool[i], floor)))
            .collect();
        for (i, c) in counts {
            if c >= floor {
                kept.push((i, c));
                let at = top.partition_point(|&t| t >= c);
                top.insert(at, c);
                top.truncate(m);
            }
        }
    }
    kept.sort_unstable();
    kept
}

fn approx_count(x: &[f64], sample: &SampleMatrix, k: usize, seed: u64) -> Result<usize> {
    let dirs = sphere_directions(sample.dim(), k, DirectionScheme::CandidateAugmented, seed)?;
    let count_dir = |u: &Direction| {
        let t = dot(u.coords(), x);
        let (mut le, mut ge) = (0, 0);
        for r in sample.rows() {
            let p = dot(u.coords(), r);
            le += (p <= t) as usize;
            ge += (p >= t) as usize;
        }
        le.min(ge)
    };
    Ok(if dirs.len() * sample.n() >= 1 << 16 {
        dirs.par_iter().map(count_dir).min().unwrap()
    } else {
        dirs.iter().map(count_dir).min().unwrap()
    })
}

fn exact1d_count(x: f64, sample: &SampleMatrix) -> usize {
    let (mut le, mut ge) = (0, 0);
    for r in sample.rows() {
        le += (r[0] <= x) as usize;
        ge += (r[0] >= x) as usize;
    }
    le.min(ge)
}

fn depth_count(x: &[f64], sample: &SampleMatrix, method: &DepthMethod) -> Result<usize> {
    method.check(sample.dim())?;
    if x.len() != sample.dim() {
        return Err(Error::input(format!("point has {} coordinates, sample has {}", x.len(), sample.dim())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("point must be finite"));
    }
    match *method {
        DepthMethod::Exact1d => Ok(exact1d_count(x[0], sample)),
        DepthMethod::Exact2d => Ok(AngularIndex::new(x, sample)?.min_count()),
        DepthMethod::Approx { k, seed } => approx_count(x, sample, k, seed),
    }
}

/// Sample halfspace depth of `x`.
///
/// ```
/// use depthlab::location::{sample_hd, DepthMethod};
/// use depthlab::models::SampleMatrix;
/// let s = SampleMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
/// let d = sample_hd(&[2.0], &s, DepthMethod::Exact1d).unwrap();
/// assert!((d.value() - 2.0 / 3.0).abs() < 1e-15);
/// ```
pub fn sample_hd(x: &[f64], sample: &SampleMatrix, method: DepthMethod) -> Result<DepthValue> {
    Ok(DepthValue::from_count(depth_count(x, sample, &method)?, sample.n()))
}

/// Depths of an explicit candidate list under one method.
pub fn pool_depths(pool: &[Vec<f64>], sample: &SampleMatrix, method: DepthMethod) -> Result<Vec<DepthValue>> {
    let scorer = Scorer::new(sample, &method)?;
    pool.par_iter()
        .map(|p| {
            if p.len() != sample.dim() {
                return Err(Error::input("pool point dimension differs from the sample"));
            }
            Ok(DepthValue::from_count(scorer.count(p), sample.n()))
        })
        .collect()
}

/// Exact or approximate depth counts with per-method precomputation.
enum Scorer<'a> {
    Line(Vec<f64>),
    Plane(&'a SampleMatrix),
    Projected(ProjectionIndex),
}

impl<'a> Scorer<'a> {
    fn new(sample: &'a SampleMatrix, method: &DepthMethod) -> Result<Self> {
        method.check(sample.dim())?;
        Ok(match *method {
            DepthMethod::Exact1d => {
                let mut v = sample.column(0);
                v.sort_by(f64::total_cmp);
                Scorer::Line(v)
            }
            DepthMethod::Exact2d => Scorer::Plane(sample),
            DepthMethod::Approx { k, seed } => Scorer::Projected(ProjectionIndex::candidate_augmented(sample, k, seed)?),
        })
    }

    fn count(&self, x: &[f64]) -> usize {
        match self {
            Scorer::Line(v) => count_le(v, x[0]).min(count_ge(v, x[0])),
            Scorer::Plane(s) => AngularIndex::new(x, s).expect("planar").min_count(),
            Scorer::Projected(idx) => idx.count(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianOptions {
    pub method: DepthMethod,
    /// Number of pattern-search refinements.
    pub multistarts: usize,
    pub seed: u64,
    /// At most this many pairwise midpoints enter the pool.
    pub midpoint_cap: usize,
    /// Directions for the cheap pre-screen used with the planar sweep.
    pub screen_directions: usize,
    /// Candidates promoted from the pre-screen to exact scoring.
    pub rescore: usize,
}

impl MedianOptions {
    pub fn new(method: DepthMethod, seed: u64) -> Self {
        MedianOptions { method, multistarts: 8, seed, midpoint_cap: 50_000, screen_directions: 64, rescore: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianResult {
    pub point: Vec<f64>,
    /// Depth re-evaluated at `point` with the configured method.
    pub achieved_depth: DepthValue,
    /// Best depth seen among evaluated candidates.
    pub pool_max_depth: DepthValue,
    pub candidates_evaluated: usize,
    /// True when averaging the deepest candidates produced a shallower
    /// point, i.e. the barycenter left the deepest region.
    pub barycenter_below_pool_max: bool,
}

fn coordinate_median(sample: &SampleMatrix) -> Vec<f64> {
    (0..sample.dim())
        .map(|j| {
            let mut c = sample.column(j);
            c.sort_by(f64::total_cmp);
            sorted_quantile(&c, 0.5)
        })
        .collect()
}

fn search_scale(sample: &SampleMatrix) -> f64 {
    let mut iqr: f64 = 0.0;
    let mut range: f64 = 0.0;
    for j in 0..sample.dim() {
        let mut c = sample.column(j);
        c.sort_by(f64::total_cmp);
        iqr = iqr.max(sorted_quantile(&c, 0.75) - sorted_quantile(&c, 0.25));
        range = range.max(c[c.len() - 1] - c[0]);
    }
    if iqr > 0.0 {
        iqr
    } else if range > 0.0 {
        range
    } else {
        1.0
    }
}

fn midpoints(sample: &SampleMatrix, cap: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = sample.n();
    let mid = |i: usize, j: usize| -> Vec<f64> {
        sample.row(i).iter().zip(sample.row(j)).map(|(a, b)| 0.5 * (a + b)).collect()
    };
    let pairs = n * (n - 1) / 2;
    if pairs <= cap {
        let mut out = Vec::with_capacity(pairs);
        for i in 0..n {
            for j in i + 1..n {
                out.push(mid(i, j));
            }
        }
        out
    } else {
        use rand::Rng as _;
        let mut rng = rng_from_seed(seed);
        (0..cap)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                mid(i, j)
            })
            .collect()
    }
}

/// Indices of the `m` largest scores, ties by lowest index.
fn top_indices(scores: &[usize], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

/// Coordinate pattern search maximizing the depth count. Returns every
/// evaluated point with its count.
fn pattern_search(
    scorer: &Scorer<'_>,
    start: Vec<f64>,
    start_count: usize,
    step0: f64,
    min_step: f64,
) -> Vec<(Vec<f64>, usize)> {
    let d = start.len();
    let mut x = start;
    let mut fx = start_count;
    let mut step = step0;
    let mut trail = Vec::new();
    while step >= min_step {
        let mut moved = false;
        'probe: for i in 0..d {
            for s in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += s * step;
                let fy = scorer.count(&y);
                trail.push((y.clone(), fy));
                if fy > fx {
                    x = y;
                    fx = fy;
                    moved = true;
                    break 'probe;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    trail
}

/// Approximate sample halfspace median.
///
/// The pool of data points, pairwise midpoints and the coordinatewise
/// median is scored, the best candidates are refined by pattern search, and
/// the mean of all evaluated candidates at the maximum depth is returned.
/// With the planar sweep the pool is first ranked with a cheap projection
/// screen and only the top `rescore` candidates are scored exactly.
pub fn tukey_median(sample: &SampleMatrix, options: &MedianOptions) -> Result<MedianResult> {
    let d = sample.dim();
    options.method.check(d)?;
    let n = sample.n();

    let mut pool: Vec<Vec<f64>> = sample.rows().map(<[f64]>::to_vec).collect();
    if n > 1 {
        pool.extend(midpoints(sample, options.midpoint_cap, derive_seed(options.seed, &[1])));
    }
    pool.push(coordinate_median(sample));

    let scorer = Scorer::new(sample, &options.method)?;
    let mut evaluated: Vec<(Vec<f64>, usize)> = if let Scorer::Plane(_) = scorer {
        let screen = ProjectionIndex::candidate_augmented(
            sample,
            options.screen_directions.max(1),
            derive_seed(options.seed, &[2]),
        )?;
        let rough: Vec<usize> = pool.par_iter().map(|p| screen.count(p)).collect();
        top_indices(&rough, options.rescore.max(options.multistarts).max(1))
            .into_par_iter()
            .map(|i| (pool[i].clone(), scorer.count(&pool[i])))
            .collect()
    } else if let Scorer::Projected(index) = &scorer {
        branch_and_bound(index, &pool, options.multistarts.max(1))
            .into_iter()
            .map(|(i, c)| (pool[i].clone(), c))
            .collect()
    } else {
        pool.par_iter().map(|p| (p.clone(), scorer.count(p))).collect()
    };

    let scale = search_scale(sample);
    let counts: Vec<usize> = evaluated.iter().map(|e| e.1).collect();
    let starts = top_indices(&counts, options.multistarts);
    let trails: Vec<Vec<(Vec<f64>, usize)>> = starts
        .par_iter()
        .map(|&i| pattern_search(&scorer, evaluated[i].0.clone(), evaluated[i].1, scale, 1e-6 * scale))
        .collect();
    for t in trails {
        evaluated.extend(t);
    }

    let best = evaluated.iter().map(|e| e.1).max().unwrap_or(0);
    let deepest: Vec<&Vec<f64>> = evaluated.iter().filter(|e| e.1 == best).map(|e| &e.0).collect();
    let mut point = vec![0.0; d];
    for p in &deepest {
        for (acc, v) in point.iter_mut().zip(p.iter()) {
            *acc += v;
        }
    }
    for v in point.iter_mut() {
        *v /= deepest.len() as f64;
    }
    let achieved = scorer.count(&point);
    Ok(MedianResult {
        point,
        achieved_depth: DepthValue::from_count(achieved, n),
        pool_max_depth: DepthValue::from_count(best, n),
        candidates_evaluated: evaluated.len(),
        barycenter_below_pool_max: achieved < best,
    })
}

/// Right-hand side of the high-probability bound on the depth gap,
/// `ε/(1−ε) + c1·√(d/n) + c2·√(log(1/δ)/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub epsilon: f64,
    pub d: usize,
    pub n: usize,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    /// Constant of the uniform VC deviation bound over halfspaces.
    pub vc_constant: f64,
    pub value: f64,
}

impl RateBound {
    /// `c1·√(d/n) + c2·√(log(1/δ)/n)`, the part that vanishes with n.
    pub fn sampling_terms(&self) -> f64 {
        self.value - self.epsilon / (1.0 - self.epsilon)
    }

    /// Whether `sampling_terms < γκ − ε/(1−ε)`, the sample-size condition
    /// under which the depth gap converts into a location error.
    pub fn location_condition_holds(&self, gamma: f64, kappa: f64) -> bool {
        self.sampling_terms() < gamma * kappa - self.epsilon / (1.0 - self.epsilon)
    }
}

/// `1440πe/(1−e⁻¹)` under a square root.
pub fn vc_constant() -> f64 {
    let e = std::f64::consts::E;
    (1440.0 * PI * e / (1.0 - (-1.0f64).exp())).sqrt()
}

pub fn bound_c1() -> f64 {
    let e = std::f64::consts::E;
    24.0 * std::f64::consts::SQRT_2 * (30.0 * PI * e / (1.0 - (-1.0f64).exp())).sqrt()
}

pub fn bound_c2() -> f64 {
    (9.0 * std::f64::consts::SQRT_2 + 4.0 * 6f64.sqrt()) / 4.0
}

/// Smallest n with `√(log(1/δ)/(2n)) < 1/3`.
pub fn min_admissible_n(delta: f64) -> usize {
    let ok = |n: usize| ((1.0 / delta).ln() / (2.0 * n as f64)).sqrt() < 1.0 / 3.0;
    let mut n = (4.5 * (1.0 / delta).ln()).floor().max(0.0) as usize + 1;
    while n > 1 && ok(n - 1) {
        n -= 1;
    }
    while !ok(n) {
        n += 1;
    }
    n
}

pub fn location_bound_rhs(epsilon: f64, d: usize, n: usize, delta: f64) -> Result<RateBound> {
    if !(0.0..1.0 / 3.0).contains(&epsilon) {
        return Err(Error::input(format!("epsilon must lie in [0, 1/3), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::input(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if d == 0 || n == 0 {
        return Err(Error::input("d and n must be positive"));
    }
    let log_term = (1.0 / delta).ln();
    if !((log_term / (2.0 * n as f64)).sqrt() < 1.0 / 3.0) {
        return Err(Error::SideCondition { n, delta, min_n: min_admissible_n(delta) });
    }
    let (c1, c2) = (bound_c1(), bound_c2());
    let nf = n as f64;
    let value = epsilon / (1.0 - epsilon) + c1 * (d as f64 / nf).sqrt() + c2 * (log_term / nf).sqrt();
    Ok(RateBound { epsilon, d, n, delta, c1, c2, vc_constant: vc_constant(), value })
}

/// Draws a contaminated sample, finds its median and returns the
/// population depth gap `1/2 − D(μ̂)`.
pub fn max_depth_deviation(
    model: &AlphaModel,
    cm: &ContaminatedModel,
    n: usize,
    seed: u64,
    options: &MedianOptions,
) -> Result<f64> {
    if cm.base().dim() != model.dim() || cm.base().alpha() != model.alpha() {
        return Err(Error::input("contaminated model is built on a different base"));
    }
    let (sample, _) = sample_contaminated(cm, n, seed)?;
    max_depth_deviation_for_sample(model, &sample, options)
}

/// [`max_depth_deviation`] on a given sample.
pub fn max_depth_deviation_for_sample(model: &AlphaModel, sample: &SampleMatrix, options: &MedianOptions) -> Result<f64> {
    let med = tukey_median(sample, options)?;
    Ok(0.5 - population_hd(&med.point, model)?.value())
}
