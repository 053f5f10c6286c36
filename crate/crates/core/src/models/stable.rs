//! Symmetric α-stable marginal with characteristic function `exp(−|t|^α)`.
//!
//! The CDF has no closed form away from α ∈ {1, 2}. It is tabulated once from
//! Zolotarev's integral representation
//!
//! ```text
//!   V(θ) = (cos θ / sin αθ)^{α/(α−1)} · cos((α−1)θ) / cos θ,   θ ∈ (0, π/2)
//!   I(x) = (1/π) ∫ exp(−x^{α/(α−1)} V(θ)) dθ
//!   F(x) = 1/2 + I(x)  (α < 1),      F(x) = 1 − I(x)  (α > 1),   x > 0
//! ```
//!
//! whose integrand is bounded by one and monotone in θ, so adaptive
//! Gauss–Kronrod quadrature handles it without oscillation trouble. The grid
//! is uniform in `asinh(t)`, interpolation is monotone piecewise cubic, and
//! beyond the last node the Pareto tail `1 − F(t) ∝ t^{−α}` is matched to
//! the last tabulated value.

use rayon::prelude::*;
use libm::tgamma as gamma;
use std::f64::consts::{FRAC_PI_2, PI};

/// Number of table nodes on [0, T_max].
const NODES: usize = 4097;
/// Target tail mass at the end of the table.
const TAIL_MASS: f64 = 1e-8;
/// Hard cap on the table range.
const T_CAP: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct StableTable {
    alpha: f64,
    /// Grid spacing in asinh(t).
    ds: f64,
    t: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
}

/// Gauss–Kronrod 7/15 nodes and weights on [−1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection on GK15 with an absolute tolerance.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth >= 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// `1 − F(t) ≈ tail_constant · t^{−α}` as t → ∞.
pub(crate) fn tail_constant(alpha: f64) -> f64 {
    gamma(alpha) * (PI * alpha / 2.0).sin() / PI
}

/// CDF at `x > 0` straight from the integral. Slow; used to build the table.
pub(crate) fn cdf_by_quadrature(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.5;
    }
    let p = alpha / (alpha - 1.0);
    let lx = p * x.ln();
    let integrand = |theta: f64| {
        let (s, c) = ((alpha * theta).sin(), theta.cos());
        if s <= 0.0 || c <= 0.0 {
            // endpoints: the integrand tends to 0 or 1 depending on α
            return if (theta < 1.0) == (alpha < 1.0) { 1.0 } else { 0.0 };
        }
        let ln_v = p * (c.ln() - s.ln()) + ((alpha - 1.0) * theta).cos().ln() - c.ln();
        let e = lx + ln_v;
        if e > 700.0 {
            0.0
        } else {
            (-e.exp()).exp()
        }
    };
    let i = integrate(&integrand, 0.0, FRAC_PI_2, 1e-13) / PI;
    if alpha < 1.0 {
        0.5 + i
    } else {
        1.0 - i
    }
}

impl StableTable {
    /// Builds the table for `alpha ∈ (0, 2)`, `alpha ≠ 1`.
    pub fn new(alpha: f64) -> Self {
        debug_assert!(alpha > 0.0 && alpha < 2.0 && alpha != 1.0);
        let t_max = (tail_constant(alpha) / TAIL_MASS).powf(1.0 / alpha).clamp(10.0, T_CAP);
        let s_max = t_max.asinh();
        let ds = s_max / (NODES - 1) as f64;
        let t: Vec<f64> = (0..NODES).map(|j| (j as f64 * ds).sinh()).collect();
        let mut f: Vec<f64> = t.par_iter().map(|&x| cdf_by_quadrature(alpha, x)).collect();
        f[0] = 0.5;
        // quadrature noise can leave sub-1e-13 wiggles; the interpolant needs
        // a nondecreasing table
        for j in 1..NODES {
            if f[j] < f[j - 1] {
                f[j] = f[j - 1];
            }
        }
        let density_at_zero = gamma(1.0 + 1.0 / alpha) / PI;
        let tail_density = alpha * (1.0 - f[NODES - 1]) / t_max;
        let slope = pchip_slopes(&t, &f, density_at_zero, tail_density);
        StableTable { alpha, ds, t, f, slope }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn t_max(&self) -> f64 {
        self.t[NODES - 1]
    }

    fn tail_mass(&self) -> f64 {
        1.0 - self.f[NODES - 1]
    }

    fn hermite(&self, j: usize, x: f64) -> f64 {
        let (x0, x1) = (self.t[j], self.t[j + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.f[j] + h10 * h * self.slope[j] + h01 * self.f[j + 1] + h11 * h * self.slope[j + 1]
    }

    fn segment(&self, x: f64) -> usize {
        let j = (x.asinh() / self.ds) as usize;
        // rounding in asinh/sinh can put x one cell off
        let mut j = j.min(NODES - 2);
        while j > 0 && x < self.t[j] {
            j -= 1;
        }
        while j < NODES - 2 && x >= self.t[j + 1] {
            j += 1;
        }
        j
    }

    /// CDF for `x ≥ 0`.
    fn upper_cdf(&self, x: f64) -> f64 {
        if x >= self.t_max() {
            return 1.0 - self.tail_mass() * (self.t_max() / x).powf(self.alpha);
        }
        let j = self.segment(x);
        self.hermite(j, x).clamp(self.f[j], self.f[j + 1])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x >= 0.0 {
            self.upper_cdf(x)
        } else {
            1.0 - self.upper_cdf(-x)
        }
    }

    /// Exact inverse of the interpolant (bisection inside the cubic cell).
    pub fn quantile(&self, p: f64) -> f64 {
        if p.is_nan() {
            return f64::NAN;
        }
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p < 0.5 {
            return -self.quantile(1.0 - p);
        }
        if p == 0.5 {
            return 0.0;
        }
        if p >= self.f[NODES - 1] {
            return self.t_max() * (self.tail_mass() / (1.0 - p)).powf(1.0 / self.alpha);
        }
        // first node with f > p
        let hi = self.f.partition_point(|&v| v <= p);
        let j = hi - 1;
        let (mut a, mut b) = (self.t[j], self.t[j + 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.hermite(j, m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// Fritsch–Butland slopes (the scheme behind scipy's `PchipInterpolator`)
/// with supplied end slopes, limited so each cell stays monotone.
fn pchip_slopes(x: &[f64], y: &[f64], left: f64, right: f64) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|k| x[k + 1] - x[k]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] > 0.0 && delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = left.clamp(0.0, 3.0 * delta[0]);
    d[n - 1] = right.clamp(0.0, 3.0 * delta[n - 2]);
    d
}

/// Chambers–Mallows–Stuck draw for the symmetric case, from a uniform angle
/// `v ∈ (−π/2, π/2)` and a unit exponential `w`.
pub(crate) fn cms_symmetric(alpha: f64, v: f64, w: f64) -> f64 {
    let a = alpha;
    (a * v).sin() / v.cos().powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
}
