// C/A, F-score and weighted score, plus AUROC of answering frequency.
//
// ```bash
// cargo run --example baseline_metrics
// ```

use refusal_index::baselines::{auroc, compute_baselines, p_answering, DEFAULT_PENALTY};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, c, r) in [("cautious", 0.38, 0.36), ("eager", 0.34, 0.06)] {
        let b = compute_baselines(c, r, DEFAULT_PENALTY)?;
        println!(
            "{name}: c={c} r={r} C/A={:.3} F={:.3} weighted={:.3}",
            b.c_over_a.unwrap_or(f64::NAN),
            b.f_score,
            b.weighted
        );
    }

    // (samples, refusals) per question and whether the greedy answer was right
    let samples = [(100, 2), (100, 10), (100, 55), (100, 80), (100, 97), (100, 40)];
    let correct = [true, true, false, false, false, true];
    let scores = p_answering(&samples)?;
    println!("P(answering) = {scores:?}");
    println!("AUROC = {:.3}", auroc(&scores, &correct)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
