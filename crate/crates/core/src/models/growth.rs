//! Growth conditions: lower bounds on a difference quotient of the marginal
//! CDF around a centre, which keep the CDF from being flat where the depth
//! bounds need it to move.
//!
//! | variant | centre | quotient                                 | range on γκ            |
//! |---------|--------|------------------------------------------|------------------------|
//! | A2      | 0      | `|F(t) − F(0)| / |t|`                     | `ε/(1−ε) < γκ < 1/2`   |
//! | A3      | σ²     | `|F(√t) − F(σ)| / |t − σ²|`, t > 0        | `ε/(2(1−ε)) < γκ ≤ 1/4`|
//! | A4      | σ      | `|F(t) − F(σ)| / |t − σ|`                 | `ε/(2(1−ε)) < γκ ≤ 1/4`|
//!
//! The infimum is taken over `0 < |t − centre| ≤ γ`.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::MarginalLaw;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthVariant {
    A2,
    A3,
    A4,
}

impl std::str::FromStr for GrowthVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A2" => Ok(GrowthVariant::A2),
            "A3" => Ok(GrowthVariant::A3),
            "A4" => Ok(GrowthVariant::A4),
            _ => Err(Error::input(format!("unknown growth variant '{s}' (expected A2, A3 or A4)"))),
        }
    }
}

impl fmt::Display for GrowthVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Why a certificate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateIssue {
    /// `γκ` does not exceed the contamination floor.
    ProductBelowContaminationFloor,
    /// `γκ` is above the variant's ceiling (1/2 or 1/4).
    ProductAboveCeiling,
    /// The witnessed infimum is below κ.
    InfimumBelowKappa,
}

impl fmt::Display for CertificateIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CertificateIssue::ProductBelowContaminationFloor => "product_below_contamination_floor",
            CertificateIssue::ProductAboveCeiling => "product_above_ceiling",
            CertificateIssue::InfimumBelowKappa => "infimum_below_kappa",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub variant: GrowthVariant,
    pub gamma: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub sigma: Option<f64>,
    pub witnessed_inf: f64,
    /// Whether γκ satisfies the variant's range constraint.
    pub range_ok: bool,
    pub holds: bool,
    /// First failing check, if any.
    pub reason: Option<CertificateIssue>,
}

/// Points per side of the centre.
const GRID: usize = 10_000;
/// Smallest offset, relative to γ.
const FINEST: f64 = 1e-9;

/// Offsets `γ·r^k`, k = 0..GRID, running geometrically from the window
/// edge down to `FINEST·γ`.
fn offsets(gamma: f64) -> impl Iterator<Item = f64> {
    let r = FINEST.powf(1.0 / (GRID - 1) as f64);
    (0..GRID).map(move |k| gamma * r.powi(k as i32))
}

/// Certifies a growth condition for `marginal` on a dense geometric grid.
pub fn check_growth_condition(
    marginal: &MarginalLaw,
    variant: GrowthVariant,
    gamma: f64,
    kappa: f64,
    sigma: Option<f64>,
    epsilon: f64,
) -> Result<GrowthCertificate> {
    if !(gamma.is_finite() && gamma > 0.0 && kappa.is_finite() && kappa > 0.0) {
        return Err(Error::input("gamma and kappa must be positive"));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::input(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    let sigma = match (variant, sigma) {
        (GrowthVariant::A2, s) => s,
        (_, Some(s)) if s.is_finite() && s > 0.0 => Some(s),
        (_, Some(s)) => return Err(Error::input(format!("sigma must be positive, got {s}"))),
        (_, None) => return Err(Error::input(format!("{variant} needs sigma"))),
    };
    let witnessed_inf = match variant {
        GrowthVariant::A2 => offsets(gamma)
            .map(|h| (marginal.cdf(h) - 0.5).abs().max((0.5 - marginal.cdf(-h)).abs()) / h)
            .fold(f64::INFINITY, f64::min),
        GrowthVariant::A3 => {
            let s = sigma.unwrap();
            let (c, fc) = (s * s, marginal.cdf(s));
            offsets(gamma)
                .flat_map(|h| [c + h, c - h])
                .filter(|&t| t > 0.0)
                .map(|t| (marginal.cdf(t.sqrt()) - fc).abs() / (t - c).abs())
                .fold(f64::INFINITY, f64::min)
        }
        GrowthVariant::A4 => {
            let s = sigma.unwrap();
            let fc = marginal.cdf(s);
            offsets(gamma)
                .flat_map(|h| [s + h, s - h])
                .map(|t| (marginal.cdf(t) - fc).abs() / (t - s).abs())
                .fold(f64::INFINITY, f64::min)
        }
    };
    let product = gamma * kappa;
    let odds = epsilon / (1.0 - epsilon);
    let (floor, ceiling_ok) = match variant {
        GrowthVariant::A2 => (odds, product < 0.5),
        _ => (odds / 2.0, product <= 0.25),
    };
    let reason = if product <= floor {
        Some(CertificateIssue::ProductBelowContaminationFloor)
    } else if !ceiling_ok {
        Some(CertificateIssue::ProductAboveCeiling)
    } else if witnessed_inf < kappa {
        Some(CertificateIssue::InfimumBelowKappa)
    } else {
        None
    };
    let range_ok = product > floor && ceiling_ok;
    Ok(GrowthCertificate {
        variant,
        gamma,
        kappa,
        epsilon,
        sigma,
        witnessed_inf,
        range_ok,
        holds: reason.is_none(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cauchy_a2() {
        let c = MarginalLaw::cauchy();
        // arctan(t)/(πt) decreases on (0,1], so the infimum is at t = 1
        let cert = check_growth_condition(&c, GrowthVariant::A2, 1.0, 0.079, None, 0.05).unwrap();
        assert!(cert.holds);
        assert!((cert.witnessed_inf - 0.25).abs() < 1e-12);
        let cert = check_growth_condition(&c, GrowthVariant::A2, 1.0, 0.09, None, 0.05).unwrap();
        assert!(cert.holds);
        let cert = check_growth_condition(&c, GrowthVariant::A2, 1.0, 0.26, None, 0.05).unwrap();
        assert!(!cert.holds);
        assert_eq!(cert.reason, Some(CertificateIssue::InfimumBelowKappa));
        // wider window: infimum arctan(2)/(2π)
        let cert = check_growth_condition(&c, GrowthVariant::A2, 2.0, 0.17, None, 0.0).unwrap();
        assert!((cert.witnessed_inf - 2f64.atan() / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_a4_near_the_quartile() {
        let g = MarginalLaw::standard_normal();
        let cert = check_growth_condition(&g, GrowthVariant::A4, 0.1, 0.3, Some(0.6745), 0.05).unwrap();
        assert!(cert.holds, "{cert:?}");
        // the normal density on [0.5745, 0.7745] bounds the quotient below
        let phi = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        assert!(cert.witnessed_inf >= phi(0.7745) - 1e-9);
        assert!(cert.witnessed_inf <= phi(0.5745) + 1e-9);
    }

    #[test]
    fn range_violations() {
        let g = MarginalLaw::standard_normal();
        let cert = check_growth_condition(&g, GrowthVariant::A2, 2.0, 0.3, None, 0.0).unwrap();
        assert_eq!(cert.reason, Some(CertificateIssue::ProductAboveCeiling));
        assert!(!cert.range_ok && !cert.holds);
        let cert = check_growth_condition(&g, GrowthVariant::A2, 0.1, 0.3, None, 0.2).unwrap();
        assert_eq!(cert.reason, Some(CertificateIssue::ProductBelowContaminationFloor));
        let cert = check_growth_condition(&g, GrowthVariant::A4, 1.0, 0.26, Some(0.67), 0.0).unwrap();
        assert_eq!(cert.reason, Some(CertificateIssue::ProductAboveCeiling));
        assert!(check_growth_condition(&g, GrowthVariant::A3, 0.1, 0.1, None, 0.0).is_err());
        assert!(check_growth_condition(&g, GrowthVariant::A2, 0.0, 0.1, None, 0.0).is_err());
    }

    #[test]
    fn a3_stays_on_the_positive_axis() {
        let g = MarginalLaw::standard_normal();
        let q = g.quantile(0.75);
        let cert = check_growth_condition(&g, GrowthVariant::A3, 0.4, 0.18, Some(q), 0.05).unwrap();
        assert!(cert.witnessed_inf.is_finite());
        assert!(cert.holds, "{cert:?}");
    }

    #[test]
    fn a2_implies_mass_outside_the_window() {
        // if A2 holds with (γ, κ) then |F(t) − 1/2| ≥ γκ for |t| ≥ γ
        for (law, gamma, kappa) in [
            (MarginalLaw::standard_normal(), 1.0, 0.34),
            (MarginalLaw::cauchy(), 2.0, 0.176),
            (MarginalLaw::stable(0.7).unwrap(), 1.0, 0.2),
        ] {
            let cert = check_growth_condition(&law, GrowthVariant::A2, gamma, kappa, None, 0.0).unwrap();
            assert!(cert.holds, "{law}: {cert:?}");
            let mut t = gamma;
            while t <= 1e4 {
                assert!((law.cdf(t) - 0.5).abs() >= gamma * kappa - 1e-12, "{law} at {t}");
                t *= 1.01;
            }
        }
    }
}
