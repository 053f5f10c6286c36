//! α-symmetric models: marginal laws, vector samplers, Huber contamination,
//! the projection-law test and the growth-condition certifiers.
//!
//! An α-symmetric law on R^d has characteristic function `φ(‖t‖_α)`, which
//! is equivalent to every projection `⟨X,u⟩` being distributed as
//! `‖u‖_α·X₁`. All laws shipped here are products of i.i.d. symmetric
//! stable coordinates (Gaussian, Cauchy, general α), for which the
//! characteristic function is `exp(−‖t‖_α^α)` up to scale.

mod growth;
mod spec;
mod stable;

pub use growth::{check_growth_condition, CertificateIssue, GrowthCertificate, GrowthVariant};
pub use spec::{ContaminantSpec, FamilyName, ModelSpec};
pub use stable::StableTable;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng as _;
use libm::erfc;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::norms::{norm_unchecked, Direction, NormIndex};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::stats::{ks_critical_two_sample, ks_two_sample};

#[derive(Debug, Clone)]
enum Shape {
    Gaussian,
    Cauchy,
    Stable(Arc<StableTable>),
}

/// Symmetric univariate law of the first coordinate.
///
/// Carries a scale so that `cdf(t) = base_cdf(t / scale)`.
#[derive(Debug, Clone)]
pub struct MarginalLaw {
    shape: Shape,
    scale: f64,
}

impl MarginalLaw {
    pub fn standard_normal() -> Self {
        MarginalLaw { shape: Shape::Gaussian, scale: 1.0 }
    }

    pub fn cauchy() -> Self {
        MarginalLaw { shape: Shape::Cauchy, scale: 1.0 }
    }

    /// Symmetric α-stable with characteristic function `exp(−|t|^α)`.
    /// α = 1 is the standard Cauchy; α = 2 is N(0, 2).
    pub fn stable(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::input(format!("stable index must lie in (0, 2], got {alpha}")));
        }
        Ok(if alpha == 1.0 {
            Self::cauchy()
        } else if alpha == 2.0 {
            MarginalLaw { shape: Shape::Gaussian, scale: SQRT_2 }
        } else {
            MarginalLaw { shape: Shape::Stable(Arc::new(StableTable::new(alpha))), scale: 1.0 }
        })
    }

    /// The same law rescaled by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::input(format!("scale must be positive, got {c}")));
        }
        Ok(MarginalLaw { shape: self.shape.clone(), scale: self.scale * c })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Tail index of the family (2 for the Gaussian).
    pub fn stability_index(&self) -> f64 {
        match &self.shape {
            Shape::Gaussian => 2.0,
            Shape::Cauchy => 1.0,
            Shape::Stable(t) => t.alpha(),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let z = t / self.scale;
        match &self.shape {
            Shape::Gaussian => 0.5 * erfc(-z / SQRT_2),
            Shape::Cauchy => 0.5 + z.atan() / PI,
            Shape::Stable(table) => table.cdf(z),
        }
    }

    /// Inverse CDF on (0, 1); ±∞ at the endpoints and NaN outside.
    pub fn quantile(&self, p: f64) -> f64 {
        if p.is_nan() || !(0.0..=1.0).contains(&p) {
            return f64::NAN;
        }
        if p == 0.0 {
            return f64::NEG_INFINITY;
        }
        if p == 1.0 {
            return f64::INFINITY;
        }
        let z = match &self.shape {
            Shape::Gaussian => gaussian_quantile(p),
            Shape::Cauchy => {
                if p == 0.5 {
                    0.0
                } else {
                    (PI * (p - 0.5)).tan()
                }
            }
            Shape::Stable(table) => table.quantile(p),
        };
        self.scale * z
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let z = match &self.shape {
            Shape::Gaussian => StandardNormal.sample(rng),
            Shape::Cauchy => (PI * (rng.random::<f64>() - 0.5)).tan(),
            Shape::Stable(table) => loop {
                let v = PI * (rng.random::<f64>() - 0.5);
                let w: f64 = Exp1.sample(rng);
                let x = stable::cms_symmetric(table.alpha(), v, w);
                if x.is_finite() {
                    break x;
                }
            },
        };
        self.scale * z
    }
}

impl fmt::Display for MarginalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Gaussian => write!(f, "normal(scale={})", self.scale),
            Shape::Cauchy => write!(f, "cauchy(scale={})", self.scale),
            Shape::Stable(t) => write!(f, "stable(alpha={}, scale={})", t.alpha(), self.scale),
        }
    }
}

/// n×d observations, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::input("sample must have at least one row and one column"));
        }
        if data.len() != n * d {
            return Err(Error::input(format!("expected {} entries for {n}x{d}, got {}", n * d, data.len())));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite entry at row {}, column {}",
                pos / d + 1,
                pos % d + 1
            )));
        }
        Ok(SampleMatrix { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::input(format!("row {} has {} columns, expected {d}", i + 1, rows[i].len())));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows mapped through `x ↦ A x + shift`.
    pub fn affine(&self, a: &DMatrix<f64>, shift: &[f64]) -> Result<Self> {
        if a.ncols() != self.d || shift.len() != a.nrows() {
            return Err(Error::input("affine map does not match the sample dimension"));
        }
        let m = a.nrows();
        let mut data = Vec::with_capacity(self.n * m);
        for r in self.rows() {
            for i in 0..m {
                data.push((0..self.d).map(|j| a[(i, j)] * r[j]).sum::<f64>() + shift[i]);
            }
        }
        Self::new(self.n, m, data)
    }
}

/// α-symmetric law on R^d with i.i.d. coordinates.
#[derive(Debug, Clone)]
pub struct AlphaModel {
    alpha: f64,
    dim: usize,
    marginal: MarginalLaw,
}

/// Standard Gaussian on R^d (α = 2, unit-variance marginal).
pub fn make_gaussian_spherical(d: usize) -> Result<AlphaModel> {
    AlphaModel::new(2.0, d, MarginalLaw::standard_normal())
}

/// i.i.d. symmetric α-stable coordinates with characteristic function
/// `exp(−|t|^α)`. At α = 2 this is N(0, 2I), which differs from
/// [`make_gaussian_spherical`] by a factor √2.
pub fn make_independent_stable(alpha: f64, d: usize) -> Result<AlphaModel> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::input(format!(
            "stable index must lie in (0, 2]; laws with alpha > 2 exist only in the plane and are not sampled, got {alpha}"
        )));
    }
    AlphaModel::new(alpha, d, MarginalLaw::stable(alpha)?)
}

impl AlphaModel {
    /// `marginal` must be the law of the first coordinate of an α-symmetric
    /// product law; d ≥ 2 keeps the model away from the trivial case.
    pub fn new(alpha: f64, dim: usize, marginal: MarginalLaw) -> Result<Self> {
        if dim < 2 {
            return Err(Error::input(format!("dimension must be at least 2, got {dim}")));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::input(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if (marginal.stability_index() - alpha).abs() > 1e-12 {
            return Err(Error::input(format!(
                "a product of {marginal} coordinates is not {alpha}-symmetric"
            )));
        }
        Ok(AlphaModel { alpha, dim, marginal })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn marginal(&self) -> &MarginalLaw {
        &self.marginal
    }

    pub fn alpha_index(&self) -> NormIndex {
        NormIndex::Finite(self.alpha)
    }

    /// Same family with the marginal scaled by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(AlphaModel { marginal: self.marginal.scaled(c)?, ..self.clone() })
    }

    /// Same family in another dimension.
    pub fn with_dim(&self, d: usize) -> Result<Self> {
        Self::new(self.alpha, d, self.marginal.clone())
    }

    pub(crate) fn draw_row(&self, rng: &mut Rng, out: &mut Vec<f64>) {
        for _ in 0..self.dim {
            out.push(self.marginal.sample(rng));
        }
    }

    /// `n` i.i.d. draws, deterministic per seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleMatrix> {
        if n == 0 {
            return Err(Error::input("sample size must be positive"));
        }
        let mut rng = rng_from_seed(seed);
        let mut data = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            self.draw_row(&mut rng, &mut data);
        }
        SampleMatrix::new(n, self.dim, data)
    }
}

/// Contaminating distribution Q.
#[derive(Debug, Clone)]
pub enum Contaminant {
    PointMass(Vec<f64>),
    /// Draws from `model` translated by `shift`.
    Shifted { model: AlphaModel, shift: Vec<f64> },
}

impl Contaminant {
    /// Point mass at `multiplier·q(3/4)·(1,…,1)`, with q the base marginal's
    /// quantile function (so the outlier distance is in units of the
    /// marginal's upper quartile).
    pub fn default_for(base: &AlphaModel, multiplier: f64) -> Self {
        let s = multiplier * base.marginal.quantile(0.75);
        Contaminant::PointMass(vec![s; base.dim])
    }

    fn draw_row(&self, rng: &mut Rng, out: &mut Vec<f64>) {
        match self {
            Contaminant::PointMass(p) => out.extend_from_slice(p),
            Contaminant::Shifted { model, shift } => {
                let start = out.len();
                model.draw_row(rng, out);
                for (v, s) in out[start..].iter_mut().zip(shift) {
                    *v += s;
                }
            }
        }
    }

    fn dim(&self) -> usize {
        match self {
            Contaminant::PointMass(p) => p.len(),
            Contaminant::Shifted { shift, .. } => shift.len(),
        }
    }
}

/// Huber mixture `(1−ε)P + εQ`.
#[derive(Debug, Clone)]
pub struct ContaminatedModel {
    base: AlphaModel,
    contaminant: Contaminant,
    epsilon: f64,
}

impl ContaminatedModel {
    pub fn new(base: AlphaModel, contaminant: Contaminant, epsilon: f64) -> Result<Self> {
        if !(0.0..1.0 / 3.0).contains(&epsilon) {
            return Err(Error::input(format!("epsilon must lie in [0, 1/3), got {epsilon}")));
        }
        if contaminant.dim() != base.dim {
            return Err(Error::input("contaminant dimension differs from the base model"));
        }
        if let Contaminant::Shifted { model, .. } = &contaminant {
            if model.dim != base.dim {
                return Err(Error::input("contaminant dimension differs from the base model"));
            }
        }
        Ok(ContaminatedModel { base, contaminant, epsilon })
    }

    /// No contamination at all.
    pub fn clean(base: AlphaModel) -> Self {
        let contaminant = Contaminant::PointMass(vec![0.0; base.dim]);
        ContaminatedModel { base, contaminant, epsilon: 0.0 }
    }

    pub fn base(&self) -> &AlphaModel {
        &self.base
    }

    pub fn contaminant(&self) -> &Contaminant {
        &self.contaminant
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same base and contaminant at another contamination level.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.base.clone(), self.contaminant.clone(), epsilon)
    }
}

/// Rows from Q with probability ε, else from the base law. The mask, the
/// clean rows and the contaminated rows use three independent streams, so
/// at ε = 0 the sample coincides with `base.sample(n, seed')` for the clean
/// stream's seed.
pub fn sample_contaminated(cm: &ContaminatedModel, n: usize, seed: u64) -> Result<(SampleMatrix, Vec<bool>)> {
    if n == 0 {
        return Err(Error::input("sample size must be positive"));
    }
    let mut mask_rng = rng_from_seed(derive_seed(seed, &[0]));
    let mut clean_rng = rng_from_seed(derive_seed(seed, &[1]));
    let mut dirty_rng = rng_from_seed(derive_seed(seed, &[2]));
    let d = cm.base.dim;
    let mut data = Vec::with_capacity(n * d);
    let mut mask = Vec::with_capacity(n);
    for _ in 0..n {
        let dirty = cm.epsilon > 0.0 && mask_rng.random::<f64>() < cm.epsilon;
        if dirty {
            cm.contaminant.draw_row(&mut dirty_rng, &mut data);
        } else {
            cm.base.draw_row(&mut clean_rng, &mut data);
        }
        mask.push(dirty);
    }
    Ok((SampleMatrix::new(n, d, data)?, mask))
}

/// Two-sample Kolmogorov–Smirnov outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub passed: bool,
}

/// Projection-property check on a given sample: compares `{⟨X_i,u⟩}` with
/// `‖u‖_α` times fresh marginal draws.
pub fn projection_law_test_on(
    sample: &SampleMatrix,
    marginal: &MarginalLaw,
    alpha: f64,
    u: &Direction,
    seed: u64,
) -> Result<KsOutcome> {
    if u.dim() != sample.dim() {
        return Err(Error::input("direction dimension differs from the sample"));
    }
    let n = sample.n();
    let proj: Vec<f64> = sample.rows().map(|r| u.dot(r)).collect();
    let scale = norm_unchecked(u.coords(), NormIndex::Finite(alpha));
    let mut rng = rng_from_seed(seed);
    let reference: Vec<f64> = (0..n).map(|_| scale * marginal.sample(&mut rng)).collect();
    let statistic = ks_two_sample(&proj, &reference);
    let critical = ks_critical_two_sample(n, n);
    Ok(KsOutcome { statistic, critical, passed: statistic <= critical })
}

/// Draws `n ≥ 1000` observations and runs [`projection_law_test_on`].
pub fn projection_law_test(model: &AlphaModel, u: &Direction, n: usize, seed: u64) -> Result<KsOutcome> {
    if n < 1000 {
        return Err(Error::input("projection_law_test needs n >= 1000"));
    }
    let sample = model.sample(n, derive_seed(seed, &[0]))?;
    projection_law_test_on(&sample, &model.marginal, model.alpha, u, derive_seed(seed, &[1]))
}

/// Standard normal quantile: the rational inverse as a start, then Newton
/// steps against the accurate CDF (the start alone is only good to ~1e-11).
fn gaussian_quantile(p: f64) -> f64 {
    let mut z = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let pdf = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        if !(pdf > 0.0) {
            break;
        }
        // work with the smaller tail to avoid cancellation
        let residual = if z > 0.0 { (1.0 - p) - 0.5 * erfc(z / SQRT_2) } else { 0.5 * erfc(-z / SQRT_2) - p };
        z -= residual / pdf;
    }
    z
}
