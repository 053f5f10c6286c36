//! α-norms, conjugate indices, PD square roots, signed permutations and
//! direction generation on the unit sphere.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Index of an α-norm. Infinity is its own variant so that no code path
/// ever raises a float to a huge power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormIndex {
    Finite(f64),
    Infinity,
}

impl NormIndex {
    /// Maps `f64::INFINITY` to the sentinel; rejects non-positive or NaN.
    pub fn from_f64(alpha: f64) -> Result<Self> {
        if alpha == f64::INFINITY {
            Ok(NormIndex::Infinity)
        } else if alpha.is_finite() && alpha > 0.0 {
            Ok(NormIndex::Finite(alpha))
        } else {
            Err(Error::input(format!("norm index must be positive, got {alpha}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            NormIndex::Finite(a) => a,
            NormIndex::Infinity => f64::INFINITY,
        }
    }
}

/// `(Σ|x_i|^α)^{1/α}`, or `max |x_i|` for the infinite index.
///
/// ```
/// use depthlab::norms::{alpha_norm, NormIndex};
/// assert_eq!(alpha_norm(&[3.0, 4.0], NormIndex::Finite(2.0)).unwrap(), 5.0);
/// assert_eq!(alpha_norm(&[1.0, -2.0], NormIndex::Infinity).unwrap(), 2.0);
/// ```
pub fn alpha_norm(x: &[f64], alpha: NormIndex) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("alpha_norm: non-finite entry"));
    }
    if let NormIndex::Finite(a) = alpha {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::input(format!("alpha_norm: index must be positive, got {a}")));
        }
    }
    Ok(norm_unchecked(x, alpha))
}

/// Hot-path variant without validation. Scales by the largest entry first,
/// which keeps large α from overflowing and small α from underflowing.
pub(crate) fn norm_unchecked(x: &[f64], alpha: NormIndex) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    match alpha {
        NormIndex::Infinity => m,
        _ if m == 0.0 => 0.0,
        NormIndex::Finite(a) if a == 2.0 => {
            m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
        }
        NormIndex::Finite(a) if a == 1.0 => x.iter().map(|v| v.abs()).sum(),
        NormIndex::Finite(a) => {
            m * x.iter().map(|v| (v.abs() / m).powf(a)).sum::<f64>().powf(1.0 / a)
        }
    }
}

/// `α/(α−1)` for α > 1 and the infinite index for 0 < α ≤ 1.
pub fn conjugate_index(alpha: f64) -> Result<NormIndex> {
    if alpha == f64::INFINITY {
        return Ok(NormIndex::Finite(1.0));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::input(format!("conjugate_index: alpha must be positive, got {alpha}")));
    }
    if alpha <= 1.0 {
        Ok(NormIndex::Infinity)
    } else {
        Ok(NormIndex::Finite(alpha / (alpha - 1.0)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A unit vector in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Normalizes `v` to unit Euclidean length.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("direction must be a nonempty finite vector"));
        }
        let n = norm_unchecked(&v, NormIndex::Finite(2.0));
        if n == 0.0 {
            return Err(Error::input("direction cannot be the zero vector"));
        }
        Ok(Direction { coords: v.into_iter().map(|x| x / n).collect() })
    }

    /// `±e_i` in dimension `d`.
    pub fn basis(d: usize, i: usize, sign: f64) -> Self {
        let mut coords = vec![0.0; d];
        coords[i] = sign.signum();
        Direction { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn neg(&self) -> Self {
        Direction { coords: self.coords.iter().map(|x| -x).collect() }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.coords, x)
    }
}

/// Symmetric positive-definite d×d matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMatrix {
    m: DMatrix<f64>,
}

impl ScatterMatrix {
    /// Validates symmetry (relative 1e−12) and positive definiteness.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::input("scatter matrix must be square and nonempty"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("scatter matrix has non-finite entries"));
        }
        let scale = m.amax();
        let d = m.nrows();
        for i in 0..d {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::domain(format!("scatter matrix not symmetric at ({i},{j})")));
                }
            }
        }
        let s = ScatterMatrix { m };
        let min_eig = s.eigen().eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(Error::domain(format!(
                "scatter matrix not positive definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(s)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::input("scatter matrix rows must form a square"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        ScatterMatrix { m: DMatrix::identity(d, d) }
    }

    /// `s·I`; `s` is a variance, not a standard deviation.
    pub fn scaled_identity(d: usize, s: f64) -> Result<Self> {
        Self::new(DMatrix::identity(d, d) * s)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        SymmetricEigen::new(self.m.clone())
    }

    /// `u'Σu`.
    pub fn quad_form(&self, u: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            let mut r = 0.0;
            for j in 0..d {
                r += self.m[(i, j)] * u[j];
            }
            s += u[i] * r;
        }
        s
    }

    /// `Σu`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.m[(i, j)] * u[j]).sum()).collect()
    }

    /// `AΣA'` for an arbitrary square `a`.
    pub fn congruence(&self, a: &DMatrix<f64>) -> Result<Self> {
        let p = a * &self.m * a.transpose();
        // restore exact symmetry lost to rounding
        let sym = (&p + p.transpose()) * 0.5;
        Self::new(sym)
    }
}

/// Unique symmetric PD square root via a symmetric eigendecomposition.
/// Eigenvalues below `1e−12·trace` are treated as zero and rejected.
pub fn pd_sqrt(sigma: &ScatterMatrix) -> Result<ScatterMatrix> {
    let eig = sigma.eigen();
    let trace = sigma.m.trace();
    let floor = 1e-12 * trace;
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| l <= floor) {
        return Err(Error::domain(format!(
            "pd_sqrt: eigenvalue {bad:e} is not above 1e-12*trace"
        )));
    }
    let q = &eig.eigenvectors;
    let root = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| l.sqrt()));
    let r = q * DMatrix::from_diagonal(&root) * q.transpose();
    let r = (&r + r.transpose()) * 0.5;
    Ok(ScatterMatrix { m: r })
}

/// One ±1 in every row and column, zeros elsewhere (each entry snapped to
/// {−1, 0, 1} within 1e−12 before counting).
pub fn is_signed_permutation(a: &DMatrix<f64>) -> bool {
    let d = a.nrows();
    if d == 0 || a.ncols() != d {
        return false;
    }
    let mut col_hits = vec![0usize; d];
    for i in 0..d {
        let mut row_hits = 0;
        for j in 0..d {
            let v = a[(i, j)];
            if !v.is_finite() {
                return false;
            }
            if v.abs() <= 1e-12 {
                continue;
            }
            if (v.abs() - 1.0).abs() > 1e-12 {
                return false;
            }
            row_hits += 1;
            col_hits[j] += 1;
        }
        if row_hits != 1 {
            return false;
        }
    }
    col_hits.iter().all(|&c| c == 1)
}

/// Outcome of the exhaustive sign-vector scan.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroMatrixCheck {
    /// `v'Av ≥ 0` for every sign vector. For a nonzero `a` this contradicts
    /// the zero-matrix lemma, which `lemma_violated` records.
    AllNonnegative { lemma_violated: bool },
    /// First sign vector (in enumeration order) with `v'Av < 0`.
    Counterexample { signs: Vec<f64>, value: f64 },
}

/// Brute force over `{−1,1}^d` for a symmetric zero-diagonal `a`, d ≤ 20.
/// Bit `i` of the enumeration counter set means `v_i = +1`.
pub fn zero_matrix_lemma_check(a: &DMatrix<f64>) -> Result<ZeroMatrixCheck> {
    let d = a.nrows();
    if a.ncols() != d || d == 0 {
        return Err(Error::input("zero_matrix_lemma_check: matrix must be square"));
    }
    if d > 20 {
        return Err(Error::input("zero_matrix_lemma_check: brute force limited to d <= 20"));
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    for i in 0..d {
        if a[(i, i)].abs() > 1e-12 * scale {
            return Err(Error::input(format!("zero_matrix_lemma_check: nonzero diagonal at {i}")));
        }
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::input("zero_matrix_lemma_check: matrix not symmetric"));
            }
        }
    }
    let mut v = vec![0.0; d];
    for mask in 0u32..(1u32 << d) {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
        }
        let mut q = 0.0;
        for i in 0..d {
            for j in 0..d {
                q += v[i] * a[(i, j)] * v[j];
            }
        }
        if q < 0.0 {
            return Ok(ZeroMatrixCheck::Counterexample { signs: v, value: q });
        }
    }
    let is_zero = a.iter().all(|&x| x == 0.0);
    Ok(ZeroMatrixCheck::AllNonnegative { lemma_violated: !is_zero })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionScheme {
    UniformRandom,
    AntipodalPairs,
    /// `±e_i`, then the normalized sign vectors, then uniform random
    /// directions. Any prefix of the list is itself a valid request, so a
    /// larger `k` always yields a superset.
    CandidateAugmented,
}

/// Sign vectors are only enumerated while `2^d` stays at or below this.
const MAX_SIGN_VECTORS: usize = 4096;

/// The deterministic head of the candidate-augmented list.
pub(crate) fn candidate_directions(d: usize) -> Vec<Direction> {
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        out.push(Direction::basis(d, i, 1.0));
        out.push(Direction::basis(d, i, -1.0));
    }
    if d >= 2 {
        let scale = 1.0 / (d as f64).sqrt();
        let masks: Box<dyn Iterator<Item = u64>> = if d < 64 && (1usize << d) <= MAX_SIGN_VECTORS {
            Box::new(0..(1u64 << d))
        } else {
            // too many to enumerate: keep the two constant sign vectors
            Box::new([0u64, u64::MAX].into_iter())
        };
        for mask in masks {
            let coords = (0..d)
                .map(|i| if (mask >> (i % 64)) & 1 == 1 { scale } else { -scale })
                .collect();
            out.push(Direction { coords });
        }
    }
    out
}

fn gaussian_direction(d: usize, rng: &mut crate::rng::Rng) -> Direction {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(u) = Direction::new(v) {
            return u;
        }
    }
}

/// `k` unit vectors in R^d, deterministic per `(d, k, scheme, seed)`.
pub fn sphere_directions(d: usize, k: usize, scheme: DirectionScheme, seed: u64) -> Result<Vec<Direction>> {
    if d == 0 || k == 0 {
        return Err(Error::input("sphere_directions: need d >= 1 and k >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let out = match scheme {
        DirectionScheme::UniformRandom => (0..k).map(|_| gaussian_direction(d, &mut rng)).collect(),
        DirectionScheme::AntipodalPairs => {
            let mut out = Vec::with_capacity(k);
            while out.len() < k {
                let u = gaussian_direction(d, &mut rng);
                let v = u.neg();
                out.push(u);
                if out.len() < k {
                    out.push(v);
                }
            }
            out
        }
        DirectionScheme::CandidateAugmented => {
            let mut out = candidate_directions(d);
            out.truncate(k);
            while out.len() < k {
                out.push(gaussian_direction(d, &mut rng));
            }
            out
        }
    };
    Ok(out)
}
