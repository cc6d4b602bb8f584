// Sample size needed for stable metrics: CV over random subsets.
//
// ```bash
// cargo run --release --example subset_cv
// ```

use refusal_index::simulate::{sample_outcomes, subset_cv, LatentModel, Metric};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = LatentModel::from_rates(0.5, 0.3, 0.6)?;
    let outcomes = sample_outcomes(&model, 2000, 5)?;
    let rows = subset_cv(&outcomes, &[50, 200, 1000], 20, 9, 0.2)?;
    println!("size  CV(RI)  CV(C/A)  CV(F)");
    for row in &rows {
        let cv = |m| row.get(m).and_then(|c| c.cv).unwrap_or(f64::NAN);
        println!(
            "{:>4}  {:.4}  {:.4}   {:.4}",
            row.size,
            cv(Metric::Ri),
            cv(Metric::CorrectOverAttempted),
            cv(Metric::FScore)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
