//! Small empirical-distribution helpers: Kolmogorov–Smirnov statistics and
//! order-statistic quantiles.

/// Asymptotic 1% critical value of the KS distribution.
const KS_C_01: f64 = 1.63;

/// `sup_t |F_a(t) − F_b(t)|` between two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // advance past every copy of the smallest remaining value
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `sup_t |F_n(t) − F(t)|` against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_C_01 * ((n + m) / (n * m)).sqrt()
}

pub fn ks_critical_one_sample(n: usize) -> f64 {
    KS_C_01 / (n as f64).sqrt()
}

/// Type-7 (linear interpolation) quantile of already sorted data.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_two_sample_small_cases() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
        // ties across samples are consumed together
        assert_eq!(ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]), 1.0 / 3.0);
    }

    #[test]
    fn ks_one_sample_uniform() {
        let xs = [0.25, 0.75];
        assert!((ks_one_sample(&xs, |t| t.clamp(0.0, 1.0)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(sorted_quantile(&v, 0.0), 1.0);
        assert_eq!(sorted_quantile(&v, 1.0), 4.0);
        assert_eq!(sorted_quantile(&v, 0.5), 2.5);
        assert_eq!(median(&[5.0, 1.0, 2.0]), 2.0);
    }
}
