use cyclecensus::report::{aggregate, mean_stderr};
use cyclecensus::{
    run_experiment, ExperimentConfig, ExperimentReport, Format, RunOptions, TrialStatus,
};
use cyclecensus_core::ensembles::{BargmannFockField, SeededRng};
use cyclecensus_core::kac_rice::{asymptotic_expected_zeros, expected_zeros, QuadControls};
use cyclecensus_core::melnikov::{power_law_slope, x_rho_conjecture, R_MIN};
use proptest::prelude::*;

fn cfg(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn run(c: &ExperimentConfig) -> ExperimentReport {
    run_experiment(c, &RunOptions::default()).unwrap()
}

#[test]
fn record_count_is_trials_times_points() {
    let c = cfg(
        r#"{"experiment":"tangency","ensemble":{"kind":"kostlan"},"d_list":[4,6,8],"r_list":[0.5,2.0],"trials":7,"master_seed":2}"#,
    );
    let rep = run(&c);
    assert_eq!(rep.aggregates.len(), 6);
    assert_eq!(rep.records.len(), 42);
    let csv = String::from_utf8(rep.to_bytes(Format::Csv)).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn json_round_trip_reproduces_aggregates() {
    let c = cfg(
        r#"{"experiment":"melnikov_zeros","ensemble":{"kind":"kostlan"},"d_list":[7,15],"rho":0.9,"trials":40,"master_seed":8}"#,
    );
    let rep = run(&c);
    let back: ExperimentReport = serde_json::from_slice(&rep.to_bytes(Format::Json)).unwrap();
    assert_eq!(back, rep);
    let theory: Vec<Option<f64>> = back.aggregates.iter().map(|a| a.theory).collect();
    assert_eq!(
        aggregate(&back.metadata.config, &back.points, &theory, &back.records),
        rep.aggregates
    );
}

#[test]
fn stderr_halves_when_trials_quadruple() {
    let base = r#"{"experiment":"melnikov_zeros","ensemble":{"kind":"kostlan"},"d_list":[30],"rho":1.0,"trials":TRIALS,"master_seed":17}"#;
    let small = run(&cfg(&base.replace("TRIALS", "500")));
    let large = run(&cfg(&base.replace("TRIALS", "2000")));
    let ratio = small.aggregates[0].stderr.unwrap() / large.aggregates[0].stderr.unwrap();
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn theory_columns_match_direct_computation() {
    let c = QuadControls::default();
    let mz = run(&cfg(
        r#"{"experiment":"melnikov_zeros","ensemble":{"kind":"kostlan"},"d_list":[12],"rho":0.7,"trials":1,"master_seed":0}"#,
    ));
    let want = expected_zeros(12, 0.7, &c).unwrap() - expected_zeros(12, R_MIN, &c).unwrap();
    assert_eq!(mz.aggregates[0].theory, Some(want));

    let uc = run(&cfg(
        r#"{"experiment":"melnikov_zeros","ensemble":{"kind":"uniform_cube"},"d_list":[12],"rho":0.7,"trials":1,"master_seed":0}"#,
    ));
    assert_eq!(uc.aggregates[0].theory, None);

    let kr = run(&cfg(
        r#"{"experiment":"kac_rice_curve","d_list":[100],"rho":1.0,"trials":1,"master_seed":0}"#,
    ));
    assert_eq!(
        kr.aggregates[0].theory,
        Some(asymptotic_expected_zeros(100, 1.0))
    );
    assert_eq!(
        kr.aggregates[0].mean,
        Some(expected_zeros(100, 1.0, &c).unwrap())
    );

    let tg = run(&cfg(
        r#"{"experiment":"tangency","ensemble":{"kind":"bargmann_fock","truncation":40},"r_list":[2.0],"trials":1,"master_seed":0}"#,
    ));
    assert_eq!(tg.aggregates[0].theory, Some(2.0 * 5f64.sqrt()));

    let pl = run(&cfg(
        r#"{"experiment":"power_law","gamma":4.0,"d_list":[10,30],"trials":5,"master_seed":0}"#,
    ));
    assert_eq!(pl.fit.unwrap().theory_slope, power_law_slope(4.0));
    assert_eq!(power_law_slope(4.0), 3.0 / (2.0 * std::f64::consts::PI));

    let xr = run(&cfg(
        r#"{"experiment":"x_rho","d_list":[50],"rho":0.5,"trials":1,"master_seed":0}"#,
    ));
    assert_eq!(xr.aggregates[0].theory, Some(x_rho_conjecture(0.5)));

    let an = run(&cfg(
        r#"{"experiment":"annulus_probability","ensemble":{"kind":"kostlan"},"d_list":[5],"r_list":[0.5],"trials":1,"master_seed":0,"tolerances":{"boundary_n":64,"interior_n":64}}"#,
    ));
    assert_eq!(an.aggregates[0].theory, None);
}

#[test]
fn records_depend_only_on_their_seed() {
    // a trial's count does not depend on how many other trials ran
    let base = r#"{"experiment":"tangency","ensemble":{"kind":"bargmann_fock","truncation":24},"r_list":[1.0],"trials":TRIALS,"master_seed":31}"#;
    let few = run(&cfg(&base.replace("TRIALS", "5")));
    let many = run(&cfg(&base.replace("TRIALS", "20")));
    assert_eq!(few.records[..], many.records[..5]);
    // and matches a direct evaluation
    let field = BargmannFockField::sample(24, &SeededRng::new(31, 3));
    let direct = cyclecensus_core::dynamics::count_tangencies(&field, 1.0, 256).unwrap();
    assert_eq!(many.records[3].value, Some(direct as f64));
    assert!(many.records.iter().all(|r| r.status == TrialStatus::Ok));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_and_stderr_ignore_trial_order(mut xs in prop::collection::vec(0u32..30, 2..60), seed in any::<u64>()) {
        let values: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let (m0, s0) = mean_stderr(&values);
        // counts are small integers, so every partial sum is exact
        let n = xs.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(i as u64 + 1) >> 7) as usize % (i + 1);
            xs.swap(i, j);
        }
        let shuffled: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let (m1, s1) = mean_stderr(&shuffled);
        prop_assert_eq!(m0, m1);
        prop_assert!((s0.unwrap() - s1.unwrap()).abs() <= 1e-12 * s0.unwrap().max(1.0));
    }
}
