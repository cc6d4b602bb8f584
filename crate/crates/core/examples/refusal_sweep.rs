// How each metric moves when only the refusal tendency changes.
//
// ```bash
// cargo run --release --example refusal_sweep
// ```

use refusal_index::simulate::refusal_sweep;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let report = refusal_sweep(0.5, 0.7, &[0.1, 0.3, 0.5, 0.7], 20_000, 3, 0.2)?;
    for s in &report.settings {
        let e = &s.evaluation;
        println!(
            "refusal {:.1}: RI={:.3} C/A={:.3} F={:.3} weighted={:.3}",
            s.target_refusal,
            e.estimate.ri,
            e.baselines.c_over_a.unwrap_or(f64::NAN),
            e.baselines.f_score,
            e.baselines.weighted
        );
    }
    for cv in &report.cv {
        println!("CV {:<9} {:.4}", cv.metric.name(), cv.cv.unwrap_or(f64::NAN));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
