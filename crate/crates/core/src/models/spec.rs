//! Textual model descriptions, shared by TOML files and the command line.
//!
//! TOML:
//!
//! ```toml
//! family = "stable"      # "gaussian" | "cauchy" | "stable"
//! alpha = 0.7            # required for "stable"
//! dim = 3
//!
//! [contaminant]          # optional
//! family = "point"       # "point" | "gaussian" | "cauchy" | "stable"
//! multiplier = 10.0      # point mass at multiplier·q(3/4)·(1,…,1)
//! epsilon = 0.1
//! ```
//!
//! Command line: `stable:alpha=0.7,d=3`, `gaussian:d=2`, `cauchy:dim=4`.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use super::{make_gaussian_spherical, make_independent_stable, AlphaModel, Contaminant, ContaminatedModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Gaussian,
    Cauchy,
    Stable,
    /// Only meaningful for contaminants.
    Point,
}

impl FromStr for FamilyName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(FamilyName::Gaussian),
            "cauchy" => Ok(FamilyName::Cauchy),
            "stable" => Ok(FamilyName::Stable),
            "point" => Ok(FamilyName::Point),
            other => Err(Error::input(format!("unknown family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContaminantSpec {
    pub family: FamilyName,
    /// Explicit point-mass location.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Vec<f64>>,
    /// Point mass at `multiplier·q(3/4)·(1,…,1)` when no location is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Translation applied to draws from a model contaminant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Default outlier distance in units of the marginal's upper quartile.
pub const DEFAULT_MULTIPLIER: f64 = 10.0;

impl ContaminantSpec {
    pub fn point_default() -> Self {
        ContaminantSpec {
            family: FamilyName::Point,
            location: None,
            multiplier: Some(DEFAULT_MULTIPLIER),
            alpha: None,
            shift: None,
            epsilon: None,
        }
    }

    pub fn build(&self, base: &AlphaModel) -> Result<Contaminant> {
        let d = base.dim();
        let check_len = |v: &Vec<f64>, what: &str| {
            if v.len() == d {
                Ok(())
            } else {
                Err(Error::input(format!("contaminant {what} has length {}, expected {d}", v.len())))
            }
        };
        match self.family {
            FamilyName::Point => match &self.location {
                Some(loc) => {
                    check_len(loc, "location")?;
                    Ok(Contaminant::PointMass(loc.clone()))
                }
                None => Ok(Contaminant::default_for(base, self.multiplier.unwrap_or(DEFAULT_MULTIPLIER))),
            },
            family => {
                let model = model_for(family, self.alpha, d)?;
                let shift = match &self.shift {
                    Some(s) => {
                        check_len(s, "shift")?;
                        s.clone()
                    }
                    None => vec![0.0; d],
                };
                Ok(Contaminant::Shifted { model, shift })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contaminant: Option<ContaminantSpec>,
}

fn model_for(family: FamilyName, alpha: Option<f64>, d: usize) -> Result<AlphaModel> {
    match family {
        FamilyName::Gaussian => match alpha {
            None => make_gaussian_spherical(d),
            Some(a) if a == 2.0 => make_gaussian_spherical(d),
            Some(a) => Err(Error::input(format!("gaussian family has alpha = 2, got {a}"))),
        },
        FamilyName::Cauchy => match alpha {
            None => make_independent_stable(1.0, d),
            Some(a) if a == 1.0 => make_independent_stable(1.0, d),
            Some(a) => Err(Error::input(format!("cauchy family has alpha = 1, got {a}"))),
        },
        FamilyName::Stable => {
            let a = alpha.ok_or_else(|| Error::input("stable family needs alpha"))?;
            make_independent_stable(a, d)
        }
        FamilyName::Point => Err(Error::input("'point' is a contaminant family, not a model")),
    }
}

impl ModelSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::input(format!("model spec: {e}")))
    }

    /// The base model; `dim_override` wins over the spec's own `dim`.
    pub fn build(&self, dim_override: Option<usize>) -> Result<AlphaModel> {
        let d = dim_override
            .or(self.dim)
            .ok_or_else(|| Error::input("model spec has no dimension"))?;
        model_for(self.family, self.alpha, d)
    }

    /// Base model plus the contaminant block (point-mass default when absent).
    pub fn build_contaminated(&self, dim_override: Option<usize>, epsilon: f64) -> Result<ContaminatedModel> {
        let base = self.build(dim_override)?;
        let spec = self.contaminant.clone().unwrap_or_else(ContaminantSpec::point_default);
        let q = spec.build(&base)?;
        ContaminatedModel::new(base, q, epsilon)
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// `family[:key=value,...]` with keys `alpha`, `d`/`dim`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = match s.split_once(':') {
            Some((f, r)) => (f, r),
            None => (s, ""),
        };
        let family: FamilyName = family.parse()?;
        let mut spec = ModelSpec { family, alpha: None, dim: None, contaminant: None };
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::input(format!("expected key=value in model spec, got '{kv}'")))?;
            let bad = |_| Error::input(format!("bad value for '{k}': '{v}'"));
            match k.trim() {
                "alpha" => spec.alpha = Some(v.trim().parse().map_err(bad)?),
                "d" | "dim" => spec.dim = Some(v.trim().parse().map_err(|_| Error::input(format!("bad dimension '{v}'")))?),
                other => return Err(Error::input(format!("unknown model key '{other}'"))),
            }
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mini_spec() {
        let s: ModelSpec = "stable:alpha=0.7,d=3".parse().unwrap();
        assert_eq!(s.family, FamilyName::Stable);
        assert_eq!(s.alpha, Some(0.7));
        assert_eq!(s.dim, Some(3));
        let m = s.build(None).unwrap();
        assert_eq!((m.alpha(), m.dim()), (0.7, 3));
        let c: ModelSpec = "cauchy:d=2".parse().unwrap();
        assert_eq!(c.build(None).unwrap().alpha(), 1.0);
        assert!("gaussian:q=3".parse::<ModelSpec>().is_err());
        assert!("weird:d=2".parse::<ModelSpec>().is_err());
        assert!("gaussian".parse::<ModelSpec>().unwrap().build(None).is_err());
    }

    #[test]
    fn toml_spec_with_contaminant() {
        let s = ModelSpec::from_toml(
            r#"
            family = "gaussian"
            dim = 2
            [contaminant]
            family = "point"
            location = [5.0, -5.0]
            epsilon = 0.1
            "#,
        )
        .unwrap();
        let cm = s.build_contaminated(None, 0.1).unwrap();
        match cm.contaminant() {
            Contaminant::PointMass(p) => assert_eq!(p, &vec![5.0, -5.0]),
            other => panic!("{other:?}"),
        }
        assert!(ModelSpec::from_toml("family = \"gaussian\"\nbogus = 1").is_err());
    }

    #[test]
    fn shifted_model_contaminant() {
        let s = ModelSpec::from_toml(
            r#"
            family = "cauchy"
            dim = 2
            [contaminant]
            family = "gaussian"
            shift = [20.0, 0.0]
            "#,
        )
        .unwrap();
        let cm = s.build_contaminated(None, 0.2).unwrap();
        assert!(matches!(cm.contaminant(), Contaminant::Shifted { .. }));
    }
}
