// Kendall's W and winner entropy across evaluation settings, before and after
// removing monotone effects of correct and refusal rates.
//
// ```bash
// cargo run --example ranking_stability
// ```

use refusal_index::ranking::{stability_report, Covariates, ScoreMatrix};
use refusal_index::simulate::{sample_outcomes, Evaluation, LatentModel, Metric};
use refusal_index::estimator::tally;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // five models with different latent correlations, four refusal tendencies each
    let rhos = [0.2, 0.35, 0.5, 0.65, 0.8];
    let errors = [0.75, 0.6, 0.7, 0.55, 0.65];
    let rates = [0.1, 0.3, 0.5, 0.7];
    let mut evals = Vec::new();
    for (i, (&rho, &mu)) in rhos.iter().zip(&errors).enumerate() {
        let mut row = Vec::new();
        for (j, &rate) in rates.iter().enumerate() {
            let model = LatentModel::from_rates(rho, rate, mu)?;
            let outcomes = sample_outcomes(&model, 3000, (i * 10 + j) as u64)?;
            row.push(Evaluation::from_tally(&tally(&outcomes)?, 0.2)?);
        }
        evals.push(row);
    }
    let matrix = |m: Metric| {
        ScoreMatrix::from_rows(evals.iter().map(|row| row.iter().map(|e| e.metric(m).unwrap()).collect()).collect())
    };
    let covariates = Covariates { correct: matrix(Metric::Correct)?, refusal: matrix(Metric::Refusal)? };
    let metrics: Vec<(String, ScoreMatrix)> = [Metric::FScore, Metric::Weighted, Metric::Ri]
        .into_iter()
        .map(|m| Ok((m.name().to_string(), matrix(m)?)))
        .collect::<Result<_, refusal_index::Error>>()?;

    let report = stability_report(&metrics, &covariates, 200, 1)?;
    println!("random: W={:.3} entropy={:.3}", report.random.mean_w, report.random.mean_entropy);
    for row in &report.rows {
        println!("{:<9} {:<14} W={:.3} entropy={:.3}", row.metric, row.mode.name(), row.kendalls_w, row.winner_entropy);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
