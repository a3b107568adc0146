//! Seeded parallel execution of an experiment.
//!
//! Trial `t` of every parameter point draws from `SeededRng::new(master_seed, t)`,
//! so points share their random inputs and each record depends only on its
//! own seed. Workers pull `(point, trial)` items from a rayon pool; results
//! are merged in item order, so the worker count never changes the report.

use cyclecensus_core::dynamics::{
    annulus_certificate, count_return_fixed_points, count_tangencies, map_annulus,
    EllipticalAnnulus,
};
use cyclecensus_core::ensembles::{BargmannFockField, EnsembleSpec, SeededRng};
use cyclecensus_core::kac_rice::{asymptotic_expected_zeros, expected_zeros, QuadControls};
use cyclecensus_core::melnikov::{
    count_real_zeros, melnikov_series, power_law_slope, sample_x_rho, x_rho_conjecture,
    PowerLawSampler, R_MIN,
};
use cyclecensus_core::{PlanarField, ProjectiveWeight, Result as CoreResult};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::{
    aggregate, log_fit, ExperimentReport, Metadata, ParameterPoint, TrialRecord, TrialStatus,
};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` lets rayon decide.
    pub workers: Option<usize>,
}

/// Outcome of one successful trial.
struct Observation {
    value: f64,
    reference: Option<f64>,
    detail: Option<String>,
}

impl Observation {
    fn count(n: usize) -> Self {
        Self {
            value: n as f64,
            reference: None,
            detail: None,
        }
    }
}

/// Parameter points in report order.
pub fn parameter_points(cfg: &ExperimentConfig) -> Vec<ParameterPoint> {
    use ExperimentKind::*;
    let mut out = Vec::new();
    let base = ParameterPoint {
        rho: cfg.rho,
        gamma: None,
        ..Default::default()
    };
    match cfg.experiment {
        CenterFocus => {
            let eps = cfg.epsilon.expect("validated");
            for &d in &cfg.d_list {
                out.push(ParameterPoint {
                    d: Some(d),
                    epsilon: Some(eps.at(d)),
                    ..base
                });
            }
        }
        MelnikovZeros | KacRiceCurve | XRho => {
            out.extend(
                cfg.d_list
                    .iter()
                    .map(|&d| ParameterPoint { d: Some(d), ..base }),
            );
        }
        Tangency | AnnulusProbability => {
            if cfg.d_list.is_empty() {
                out.extend(
                    cfg.r_list
                        .iter()
                        .map(|&r| ParameterPoint { r: Some(r), ..base }),
                );
            } else {
                for &d in &cfg.d_list {
                    out.extend(cfg.r_list.iter().map(|&r| ParameterPoint {
                        d: Some(d),
                        r: Some(r),
                        ..base
                    }));
                }
            }
        }
        PowerLaw => {
            let gamma = cfg.power_law_params().expect("validated").0;
            out.extend(cfg.d_list.iter().map(|&d| ParameterPoint {
                d: Some(d),
                gamma: Some(gamma),
                ..base
            }));
        }
    }
    out
}

fn melnikov_window(d: usize, rho: f64) -> CoreResult<f64> {
    let controls = QuadControls::default();
    Ok(expected_zeros(d, rho, &controls)? - expected_zeros(d, R_MIN, &controls)?)
}

/// Theory value for a parameter point, where one exists.
fn theory(cfg: &ExperimentConfig, point: &ParameterPoint) -> CoreResult<Option<f64>> {
    use ExperimentKind::*;
    let kostlan = matches!(cfg.ensemble, Some(EnsembleSpec::Kostlan {}));
    Ok(match cfg.experiment {
        CenterFocus | MelnikovZeros if kostlan => {
            Some(melnikov_window(point.d.unwrap(), point.rho.unwrap())?)
        }
        KacRiceCurve => Some(asymptotic_expected_zeros(
            point.d.unwrap(),
            point.rho.unwrap(),
        )),
        Tangency if matches!(cfg.ensemble, Some(EnsembleSpec::BargmannFock { .. })) => {
            let r = point.r.unwrap();
            Some(2.0 * (1.0 + r * r).sqrt())
        }
        XRho => Some(x_rho_conjecture(point.rho.unwrap())),
        _ => None,
    })
}

/// Inputs shared by every trial of one point.
enum Prepared {
    None,
    Annulus(EllipticalAnnulus),
    KacRice(f64),
    PowerLaw(PowerLawSampler),
}

fn prepare(cfg: &ExperimentConfig, point: &ParameterPoint) -> CoreResult<Prepared> {
    Ok(match cfg.experiment {
        ExperimentKind::AnnulusProbability => Prepared::Annulus(map_annulus(
            point.d.unwrap(),
            point.r.unwrap(),
            cfg.tolerance("theta"),
        )?),
        ExperimentKind::KacRiceCurve => {
            let controls = QuadControls {
                abs_tol: cfg.tolerance("abs_tol"),
                rel_tol: cfg.tolerance("rel_tol"),
                ..QuadControls::default()
            };
            Prepared::KacRice(expected_zeros(
                point.d.unwrap(),
                point.rho.unwrap(),
                &controls,
            )?)
        }
        ExperimentKind::PowerLaw => {
            let (gamma, dist) = cfg.power_law_params().expect("validated");
            Prepared::PowerLaw(PowerLawSampler::new(point.d.unwrap(), gamma, dist)?)
        }
        _ => Prepared::None,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    point: &ParameterPoint,
    prepared: &CoreResult<Prepared>,
    seed: &SeededRng,
) -> CoreResult<Observation> {
    use ExperimentKind::*;
    let prepared = prepared.as_ref().map_err(Clone::clone)?;
    match (cfg.experiment, prepared) {
        (CenterFocus, _) => {
            let (d, rho, eps) = (point.d.unwrap(), point.rho.unwrap(), point.epsilon.unwrap());
            let (p, q) = cfg
                .polynomial_ensemble()
                .expect("validated")
                .sample_pair(d, seed)?;
            let series = melnikov_series(&p, &q);
            let melnikov = count_real_zeros(&series, R_MIN * R_MIN, rho * rho)?;
            let field = PlanarField::center_focus(p, q, eps)?;
            let scan = count_return_fixed_points(&field, rho, None, cfg.tolerance("return_tol"))?;
            let detail =
                (scan.fallbacks > 0).then(|| format!("{} cartesian fallbacks", scan.fallbacks));
            Ok(Observation {
                value: scan.count as f64,
                reference: Some(melnikov as f64),
                detail,
            })
        }
        (MelnikovZeros, _) => {
            let (d, rho) = (point.d.unwrap(), point.rho.unwrap());
            let (p, q) = cfg
                .polynomial_ensemble()
                .expect("validated")
                .sample_pair(d, seed)?;
            Ok(Observation::count(count_real_zeros(
                &melnikov_series(&p, &q),
                R_MIN * R_MIN,
                rho * rho,
            )?))
        }
        (KacRiceCurve, Prepared::KacRice(v)) => Ok(Observation {
            value: *v,
            reference: None,
            detail: None,
        }),
        (Tangency, _) => {
            let r = point.r.unwrap();
            let grid_n = cfg.usize_tolerance("grid_n");
            match &cfg.ensemble {
                Some(EnsembleSpec::BargmannFock { truncation }) => {
                    let field = BargmannFockField::sample(*truncation, seed);
                    Ok(Observation::count(count_tangencies(&field, r, grid_n)?))
                }
                Some(ens) => {
                    let (p, q) = ens.sample_pair(point.d.unwrap(), seed)?;
                    Ok(Observation::count(count_tangencies(
                        &PlanarField::new(p, q),
                        r,
                        grid_n,
                    )?))
                }
                None => unreachable!("validated"),
            }
        }
        (AnnulusProbability, Prepared::Annulus(annulus)) => {
            let d = point.d.unwrap();
            let (p, q) = cfg
                .polynomial_ensemble()
                .expect("validated")
                .sample_pair(d, seed)?;
            let field = ProjectiveWeight::new(PlanarField::new(p, q), d);
            let cert = annulus_certificate(
                &field,
                annulus,
                cfg.usize_tolerance("boundary_n"),
                cfg.usize_tolerance("interior_n"),
            )?;
            let detail = serde_json::to_value(cert)
                .ok()
                .and_then(|v| v.get("outcome")?.as_str().map(String::from));
            Ok(Observation {
                value: f64::from(u8::from(cert.is_certified())),
                reference: None,
                detail,
            })
        }
        (PowerLaw, Prepared::PowerLaw(sampler)) => {
            Ok(Observation::count(sampler.zero_count(seed)?))
        }
        (XRho, _) => Ok(Observation::count(sample_x_rho(
            point.rho.unwrap(),
            point.d.unwrap(),
            seed,
        )?)),
        _ => unreachable!("prepared inputs match the experiment"),
    }
}

fn record(point_index: usize, seed: SeededRng, outcome: CoreResult<Observation>) -> TrialRecord {
    let (status, value, reference, message) = match outcome {
        Ok(o) => (TrialStatus::Ok, Some(o.value), o.reference, o.detail),
        Err(e) => (TrialStatus::from(&e), None, None, Some(e.to_string())),
    };
    TrialRecord {
        point_index,
        trial_index: seed.stream_index,
        seed,
        status,
        value,
        reference,
        message,
    }
}

/// Runs every trial of `cfg` and aggregates the results.
///
/// Per-trial failures become status codes; only configuration problems and
/// failures of the deterministic theory values are errors.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Run(e.to_string()))?;

    let points = parameter_points(cfg);
    // deterministic runs have nothing to repeat
    let trials = if cfg.experiment == ExperimentKind::KacRiceCurve {
        1
    } else {
        cfg.trials as u64
    };

    let (theory, records) = pool.install(|| {
        let theory: Vec<CoreResult<Option<f64>>> =
            points.par_iter().map(|p| theory(cfg, p)).collect();
        let prepared: Vec<CoreResult<Prepared>> =
            points.par_iter().map(|p| prepare(cfg, p)).collect();
        let items: Vec<(usize, u64)> = (0..points.len())
            .flat_map(|i| (0..trials).map(move |t| (i, t)))
            .collect();
        let records: Vec<TrialRecord> = items
            .par_iter()
            .map(|&(i, t)| {
                let seed = SeededRng::new(cfg.master_seed, t);
                record(i, seed, run_trial(cfg, &points[i], &prepared[i], &seed))
            })
            .collect();
        (theory, records)
    });
    let theory = theory
        .into_iter()
        .collect::<CoreResult<Vec<_>>>()
        .map_err(|e| HarnessError::Run(format!("theory value failed: {e}")))?;

    let aggregates = aggregate(cfg, &points, &theory, &records);
    let fit = match cfg.experiment {
        ExperimentKind::PowerLaw => {
            log_fit(&aggregates, power_law_slope(cfg.power_law_params()?.0))
        }
        _ => None,
    };
    Ok(ExperimentReport {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
        },
        points,
        aggregates,
        fit,
        records,
    })
}
