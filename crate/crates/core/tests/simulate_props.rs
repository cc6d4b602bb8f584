use proptest::prelude::*;
use refusal_index::estimator::tally;
use refusal_index::ingest::{join_passes, parse_records, write_records, JoinOptions};
use refusal_index::simulate::{
    refusal_sweep, sample_outcomes, sample_two_pass, subset_cv, LatentModel, Metric, SIM_MODEL, SIM_SETTING,
};

#[test]
fn independence_gives_product_joint_rate() {
    let (r, mu) = (0.3, 0.6);
    let data = sample_outcomes(&LatentModel::from_rates(0.0, r, mu).unwrap(), 50_000, 5).unwrap();
    let joint = data.iter().filter(|o| o.refused() && o.w_hat).count() as f64 / data.len() as f64;
    assert!((joint - r * mu).abs() <= 0.01, "{joint}");
}

#[test]
fn records_survive_serialization_and_join() {
    let model = LatentModel::from_rates(0.5, 0.4, 0.5).unwrap();
    let records = sample_two_pass(&model, 3000, 77).unwrap();
    let mut buf = Vec::new();
    write_records(&mut buf, &records).unwrap();
    let parsed = parse_records(buf.as_slice()).unwrap();
    let joined = join_passes(&parsed, SIM_MODEL, SIM_SETTING, JoinOptions::default()).unwrap();
    assert_eq!(joined, sample_outcomes(&model, 3000, 77).unwrap());
}

#[test]
fn sweep_is_deterministic_and_shares_draws() {
    let a = refusal_sweep(0.5, 0.6, &[0.2, 0.6], 5000, 3, 0.2).unwrap();
    assert_eq!(a, refusal_sweep(0.5, 0.6, &[0.2, 0.6], 5000, 3, 0.2).unwrap());
    // common draws: the error indicator is identical across settings
    let mu_hat: Vec<f64> = a.settings.iter().map(|s| s.evaluation.summary.error_rate()).collect();
    assert_eq!(mu_hat[0], mu_hat[1]);
}

#[test]
fn subset_cv_shrinks_and_rejects_bad_sizes() {
    let data = sample_outcomes(&LatentModel::from_rates(0.5, 0.3, 0.5).unwrap(), 2000, 1).unwrap();
    let rows = subset_cv(&data, &[50, 1000], 30, 4, 0.2).unwrap();
    let cv = |i: usize, m| rows[i].get(m).unwrap().cv.unwrap();
    assert!(cv(1, Metric::Ri) < cv(0, Metric::Ri));
    assert!(cv(1, Metric::CorrectOverAttempted) < cv(0, Metric::CorrectOverAttempted));
    assert_eq!(rows, subset_cv(&data, &[50, 1000], 30, 4, 0.2).unwrap());
    assert!(subset_cv(&data, &[2001], 30, 4, 0.2).is_err());
    assert!(subset_cv(&data, &[50], 1, 4, 0.2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn margins_within_three_standard_errors(rho in -0.9..0.9f64, r in 0.05..0.95f64, mu in 0.05..0.95f64, seed in any::<u64>()) {
        let n = 20_000;
        let t = tally(&sample_outcomes(&LatentModel::from_rates(rho, r, mu).unwrap(), n, seed).unwrap()).unwrap();
        let s = t.summary().unwrap();
        // 3.5 SE keeps the false-failure rate negligible over many cases
        let se = |p: f64| 3.5 * (p * (1.0 - p) / n as f64).sqrt();
        prop_assert!((s.r - r).abs() <= se(r));
        prop_assert!((s.error_rate() - mu).abs() <= se(mu));
    }
}
