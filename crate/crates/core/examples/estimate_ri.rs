// Refusal Index of a two-pass evaluation, with a bootstrap interval.
//
// ```bash
// cargo run --example estimate_ri
// ```

use refusal_index::estimator::{bootstrap_ci, counts_from_summary, estimate_ri, summarize_two_pass};
use refusal_index::simulate::{sample_outcomes, LatentModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // 4000 questions: half refused in pass 1, 30% wrong after forcing answers
    let model = LatentModel::from_rates(0.6, 0.5, 0.3)?;
    let outcomes = sample_outcomes(&model, 4000, 11)?;

    let summary = summarize_two_pass(&outcomes)?;
    println!("n={} c1={:.4} r={:.4} c2={:.4}", summary.n, summary.c1, summary.r, summary.c2);
    println!("table: {:?}", counts_from_summary(&summary)?);

    let mut est = estimate_ri(&summary)?;
    est.ci = Some(bootstrap_ci(&outcomes, 200, 0.95, 7)?);
    let ci = est.ci.unwrap();
    println!("rho={:.4} RI={:.4} 95% CI [{:.4}, {:.4}]", est.rho, est.ri, ci.lo, ci.hi);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
