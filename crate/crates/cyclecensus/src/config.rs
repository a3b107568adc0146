//! Experiment configuration, read from JSON and validated before any trial runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use cyclecensus_core::ensembles::{CoefficientDistribution, EnsembleSpec};
use cyclecensus_core::melnikov::R_MIN;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Fixed points of the return map of `(y + εp, -x + εq)` on `(R_MIN, ρ)`.
    CenterFocus,
    /// Real zeros of the first Melnikov function on `(R_MIN, ρ)`.
    MelnikovZeros,
    /// Kac-Rice expected zero count against its large-degree limit.
    KacRiceCurve,
    /// Tangencies of the field with the circle of radius `r`.
    Tangency,
    /// Certified transverse annuli around the image of the origin.
    AnnulusProbability,
    /// Positive zeros of the power-law Melnikov series.
    PowerLaw,
    /// Zero counts of the uniform-cube Melnikov function on `(R_MIN, ρ)`.
    XRho,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::CenterFocus => "center_focus",
            Self::MelnikovZeros => "melnikov_zeros",
            Self::KacRiceCurve => "kac_rice_curve",
            Self::Tangency => "tangency",
            Self::AnnulusProbability => "annulus_probability",
            Self::PowerLaw => "power_law",
            Self::XRho => "x_rho",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Perturbation size, either fixed or `coefficient · d^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    Fixed(f64),
    Schedule(EpsilonSchedule),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub coefficient: f64,
    pub exponent: f64,
}

impl Epsilon {
    pub fn at(&self, d: usize) -> f64 {
        match *self {
            Self::Fixed(e) => e,
            Self::Schedule(s) => s.coefficient * (d as f64).powf(s.exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Epsilon>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_list: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

/// Named tolerances and their defaults, per experiment.
pub fn default_tolerances(kind: ExperimentKind) -> &'static [(&'static str, f64)] {
    match kind {
        ExperimentKind::CenterFocus => &[("return_tol", 1e-8)],
        ExperimentKind::MelnikovZeros | ExperimentKind::PowerLaw | ExperimentKind::XRho => &[],
        ExperimentKind::KacRiceCurve => &[("abs_tol", 1e-11), ("rel_tol", 1e-11)],
        ExperimentKind::Tangency => &[("grid_n", 256.0), ("truncation_tol", 1e-8)],
        ExperimentKind::AnnulusProbability => &[
            ("boundary_n", 512.0),
            ("interior_n", 1024.0),
            ("theta", 0.0),
        ],
    }
}

fn err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn positive(name: &str, v: Option<f64>) -> Result<f64, HarnessError> {
    match v {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(err(format!("{name} must be positive and finite, got {x}"))),
        None => Err(err(format!("{name} is required"))),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Tolerance `name`, or its default.
    pub fn tolerance(&self, name: &str) -> f64 {
        if let Some(&v) = self.tolerances.get(name) {
            return v;
        }
        default_tolerances(self.experiment)
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
            .unwrap_or(f64::NAN)
    }

    fn count_tolerance(&self, name: &str, min: usize) -> Result<usize, HarnessError> {
        let v = self.tolerance(name);
        if !(v.fract() == 0.0 && v >= min as f64 && v <= 1e7) {
            return Err(err(format!(
                "tolerance {name} must be an integer in [{min}, 1e7], got {v}"
            )));
        }
        Ok(v as usize)
    }

    pub(crate) fn usize_tolerance(&self, name: &str) -> usize {
        self.tolerance(name) as usize
    }

    /// The ensemble, which must draw ordinary polynomials.
    pub(crate) fn polynomial_ensemble(&self) -> Result<&EnsembleSpec, HarnessError> {
        match &self.ensemble {
            None => Err(err(format!("{} needs an ensemble", self.experiment))),
            Some(EnsembleSpec::BargmannFock { .. }) => Err(err(format!(
                "{} needs a polynomial ensemble, not bargmann_fock",
                self.experiment
            ))),
            Some(EnsembleSpec::PowerLaw { gamma: None, .. }) => {
                Err(err("power_law ensemble needs gamma"))
            }
            Some(e) => Ok(e),
        }
    }

    /// `(γ, coefficient distribution)` of a power-law run. `gamma` may be given
    /// at top level or inside the ensemble, but not differently in both.
    pub(crate) fn power_law_params(&self) -> Result<(f64, CoefficientDistribution), HarnessError> {
        let (inner, dist) = match &self.ensemble {
            None => (None, CoefficientDistribution::default()),
            Some(EnsembleSpec::PowerLaw {
                gamma,
                coefficient_distribution,
            }) => (*gamma, *coefficient_distribution),
            Some(other) => {
                return Err(err(format!(
                    "power_law needs a power_law ensemble, got {}",
                    other.name()
                )))
            }
        };
        let gamma = match (self.gamma, inner) {
            (Some(a), Some(b)) if a != b => {
                return Err(err(format!("gamma given twice: {a} and {b}")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(err("power_law needs gamma")),
        };
        Ok((positive("gamma", Some(gamma))?, dist))
    }

    fn require_degrees(&self, min: usize) -> Result<(), HarnessError> {
        if self.d_list.is_empty() {
            return Err(err(format!("{} needs a non-empty d_list", self.experiment)));
        }
        if let Some(d) = self.d_list.iter().find(|&&d| d < min) {
            return Err(err(format!(
                "{} needs every degree >= {min}, got {d}",
                self.experiment
            )));
        }
        Ok(())
    }

    fn require_rho(&self, upper: f64) -> Result<f64, HarnessError> {
        let rho = positive("rho", self.rho)?;
        if !(rho > R_MIN && rho < upper) {
            return Err(err(format!(
                "rho must lie in ({R_MIN}, {upper}), got {rho}"
            )));
        }
        Ok(rho)
    }

    fn require_r_list(&self, lo: f64, hi: f64) -> Result<(), HarnessError> {
        if self.r_list.is_empty() {
            return Err(err(format!("{} needs a non-empty r_list", self.experiment)));
        }
        if let Some(r) = self.r_list.iter().find(|r| !(**r >= lo && **r <= hi)) {
            return Err(err(format!(
                "{} needs every r in [{lo}, {hi}], got {r}",
                self.experiment
            )));
        }
        Ok(())
    }

    fn reject(&self, fields: &[(&str, bool)]) -> Result<(), HarnessError> {
        for (name, present) in fields {
            if *present {
                return Err(err(format!("{name} is not used by {}", self.experiment)));
            }
        }
        Ok(())
    }

    /// Checks that every field the experiment needs is present and sensible,
    /// and that nothing it would silently ignore is set.
    pub fn validate(&self) -> Result<(), HarnessError> {
        use ExperimentKind::*;
        if self.trials == 0 {
            return Err(err("trials must be at least 1"));
        }
        let known = default_tolerances(self.experiment);
        for (name, v) in &self.tolerances {
            if !known.iter().any(|(n, _)| n == name) {
                let names: Vec<_> = known.iter().map(|(n, _)| *n).collect();
                return Err(err(format!(
                    "unknown tolerance {name} for {} (known: {names:?})",
                    self.experiment
                )));
            }
            if !v.is_finite() {
                return Err(err(format!("tolerance {name} must be finite")));
            }
        }
        let has_eps = self.epsilon.is_some();
        let has_gamma = self.gamma.is_some();
        let has_r = !self.r_list.is_empty();
        let has_rho = self.rho.is_some();
        match self.experiment {
            CenterFocus => {
                self.polynomial_ensemble()?;
                self.require_degrees(1)?;
                self.require_rho(f64::INFINITY)?;
                let eps = self
                    .epsilon
                    .ok_or_else(|| err("center_focus needs epsilon"))?;
                for &d in &self.d_list {
                    positive(&format!("epsilon at d = {d}"), Some(eps.at(d)))?;
                }
                let tol = self.tolerance("return_tol");
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(err(format!("return_tol must lie in (0, 1), got {tol}")));
                }
                self.reject(&[("gamma", has_gamma), ("r_list", has_r)])
            }
            MelnikovZeros => {
                self.polynomial_ensemble()?;
                self.require_degrees(1)?;
                self.require_rho(f64::INFINITY)?;
                self.reject(&[
                    ("epsilon", has_eps),
                    ("gamma", has_gamma),
                    ("r_list", has_r),
                ])
            }
            KacRiceCurve => {
                self.require_degrees(1)?;
                self.require_rho(f64::INFINITY)?;
                for name in ["abs_tol", "rel_tol"] {
                    positive(name, Some(self.tolerance(name)))?;
                }
                self.reject(&[
                    ("ensemble", self.ensemble.is_some()),
                    ("epsilon", has_eps),
                    ("gamma", has_gamma),
                    ("r_list", has_r),
                ])
            }
            Tangency => {
                self.count_tolerance("grid_n", 4)?;
                self.require_r_list(f64::MIN_POSITIVE, f64::INFINITY)?;
                match &self.ensemble {
                    Some(EnsembleSpec::BargmannFock { truncation }) => {
                        if *truncation == 0 {
                            return Err(err("bargmann_fock truncation must be at least 1"));
                        }
                        if !self.d_list.is_empty() {
                            return Err(err("d_list is not used by bargmann_fock tangency runs"));
                        }
                        let tol =
                            positive("truncation_tol", Some(self.tolerance("truncation_tol")))?;
                        for &r in &self.r_list {
                            let bound =
                                cyclecensus_core::ensembles::truncation_tail_bound(*truncation, r);
                            if bound > tol {
                                return Err(err(format!(
                                    "truncation {truncation} has tail bound {bound:e} > truncation_tol {tol:e} at r = {r}"
                                )));
                            }
                        }
                    }
                    _ => {
                        self.polynomial_ensemble()?;
                        self.require_degrees(1)?;
                    }
                }
                self.reject(&[("rho", has_rho), ("epsilon", has_eps), ("gamma", has_gamma)])
            }
            AnnulusProbability => {
                self.polynomial_ensemble()?;
                self.require_degrees(3)?;
                self.require_r_list(0.0, 1.0)?;
                self.count_tolerance("boundary_n", 64)?;
                self.count_tolerance("interior_n", 64)?;
                for &d in &self.d_list {
                    for &r in &self.r_list {
                        cyclecensus_core::dynamics::map_annulus(d, r, self.tolerance("theta"))
                            .map_err(|e| err(e.to_string()))?;
                    }
                }
                self.reject(&[("rho", has_rho), ("epsilon", has_eps), ("gamma", has_gamma)])
            }
            PowerLaw => {
                self.power_law_params()?;
                self.require_degrees(1)?;
                self.reject(&[("rho", has_rho), ("epsilon", has_eps), ("r_list", has_r)])
            }
            XRho => {
                match &self.ensemble {
                    None | Some(EnsembleSpec::UniformCube {}) => {}
                    Some(other) => {
                        return Err(err(format!(
                            "x_rho uses the uniform_cube ensemble, got {}",
                            other.name()
                        )))
                    }
                }
                self.require_degrees(1)?;
                self.require_rho(1.0)?;
                self.reject(&[
                    ("epsilon", has_eps),
                    ("gamma", has_gamma),
                    ("r_list", has_r),
                ])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig, HarnessError> {
        ExperimentConfig::from_json(s)
    }

    #[test]
    fn minimal_melnikov_config() {
        let cfg = parse(
            r#"{"experiment":"melnikov_zeros","ensemble":{"kind":"kostlan"},"d_list":[10],"rho":1.0,"trials":5,"master_seed":7}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::MelnikovZeros);
        assert_eq!(cfg.ensemble, Some(EnsembleSpec::Kostlan {}));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse(
            r#"{"experiment":"kac_rice_curve","d_list":[10],"rho":1.0,"trials":1,"master_seed":0,"rhoo":2}"#,
        );
        assert!(matches!(e, Err(HarnessError::Config(m)) if m.contains("rhoo")));
        let e = parse(
            r#"{"experiment":"melnikov_zeros","ensemble":{"kind":"kostlan","degree":3},"d_list":[10],"rho":1.0,"trials":1,"master_seed":0}"#,
        );
        assert!(e.is_err());
    }

    #[test]
    fn missing_fields_are_reported() {
        let cases = [
            (
                r#"{"experiment":"center_focus","ensemble":{"kind":"kostlan"},"d_list":[10],"rho":0.5,"trials":1,"master_seed":0}"#,
                "epsilon",
            ),
            (
                r#"{"experiment":"melnikov_zeros","d_list":[10],"rho":0.5,"trials":1,"master_seed":0}"#,
                "ensemble",
            ),
            (
                r#"{"experiment":"tangency","ensemble":{"kind":"bargmann_fock"},"trials":1,"master_seed":0}"#,
                "r_list",
            ),
            (
                r#"{"experiment":"power_law","d_list":[10],"trials":1,"master_seed":0}"#,
                "gamma",
            ),
            (
                r#"{"experiment":"kac_rice_curve","d_list":[10],"rho":0.5,"trials":0,"master_seed":0}"#,
                "trials",
            ),
        ];
        for (json, word) in cases {
            match parse(json) {
                Err(HarnessError::Config(m)) => assert!(m.contains(word), "{m}"),
                other => panic!("expected a config error about {word}, got {other:?}"),
            }
        }
    }

    #[test]
    fn epsilon_forms() {
        let fixed: Epsilon = serde_json::from_str("1e-4").unwrap();
        assert_eq!(fixed.at(50), 1e-4);
        let sched: Epsilon =
            serde_json::from_str(r#"{"coefficient":2.0,"exponent":-1.0}"#).unwrap();
        assert_eq!(sched.at(4), 0.5);
        assert!(serde_json::from_str::<Epsilon>(r#"{"coefficient":2.0}"#).is_err());
    }

    #[test]
    fn tolerances_are_checked() {
        let bad = r#"{"experiment":"tangency","ensemble":{"kind":"bargmann_fock"},"r_list":[1.0],"trials":1,"master_seed":0,"tolerances":{"grid":10}}"#;
        assert!(parse(bad).is_err());
        let frac = r#"{"experiment":"tangency","ensemble":{"kind":"bargmann_fock"},"r_list":[1.0],"trials":1,"master_seed":0,"tolerances":{"grid_n":10.5}}"#;
        assert!(parse(frac).is_err());
        // the truncation cannot reach r = 6
        let far = r#"{"experiment":"tangency","ensemble":{"kind":"bargmann_fock"},"r_list":[6.0],"trials":1,"master_seed":0}"#;
        assert!(matches!(parse(far), Err(HarnessError::Config(m)) if m.contains("tail bound")));
    }

    #[test]
    fn gamma_may_sit_in_either_place() {
        let top = parse(
            r#"{"experiment":"power_law","gamma":1.0,"d_list":[10],"trials":1,"master_seed":0}"#,
        )
        .unwrap();
        assert_eq!(top.power_law_params().unwrap().0, 1.0);
        let inner = parse(
            r#"{"experiment":"power_law","ensemble":{"kind":"power_law","gamma":2.0,"coefficient_distribution":"uniform_pm1"},"d_list":[10],"trials":1,"master_seed":0}"#,
        )
        .unwrap();
        assert_eq!(
            inner.power_law_params().unwrap(),
            (2.0, CoefficientDistribution::UniformPm1)
        );
        let clash = r#"{"experiment":"power_law","gamma":1.0,"ensemble":{"kind":"power_law","gamma":2.0},"d_list":[10],"trials":1,"master_seed":0}"#;
        assert!(parse(clash).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let json = r#"{"experiment":"center_focus","ensemble":{"kind":"uniform_cube"},"d_list":[20],"rho":0.5,"epsilon":{"coefficient":1e-4,"exponent":0.0},"trials":3,"master_seed":18446744073709551615,"tolerances":{"return_tol":1e-9}}"#;
        let cfg = parse(json).unwrap();
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.master_seed, u64::MAX);
    }
}
