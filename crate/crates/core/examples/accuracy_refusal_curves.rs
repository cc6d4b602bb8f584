// Iso-RI and iso-score curves in the accuracy-refusal plane, as CSV.
//
// ```bash
// cargo run --example accuracy_refusal_curves > curves.csv
// ```

use refusal_index::curves::{iso_ri_curve, iso_score_curve, uniform_grid, ScoreMetric};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = uniform_grid(11);
    println!("curve,r,a,feasible");
    for rho in [0.0, 0.5, 0.9] {
        for p in iso_ri_curve(rho, 0.4, &grid)? {
            println!("ri-rho={rho},{},{:.4},{}", p.r, p.a, p.feasible);
        }
    }
    for metric in [ScoreMetric::CorrectOverAttempted, ScoreMetric::FScore, ScoreMetric::Weighted] {
        for p in iso_score_curve(metric, 0.3, 0.2, &grid)? {
            println!("{metric}=0.3,{},{:.4},{}", p.r, p.a, p.feasible);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
