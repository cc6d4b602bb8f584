// Gaussian vs Student-t, Clayton and Gumbel copulas on refusal tables.
//
// ```bash
// cargo run --example copula_comparison
// ```

use refusal_index::copulas::{compare_copulas, win_rates, ContingencyCounts};
use refusal_index::estimator::tally;
use refusal_index::simulate::{sample_outcomes, LatentModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut units = Vec::new();
    for (i, rho) in [-0.3, 0.2, 0.5].into_iter().enumerate() {
        let model = LatentModel::from_rates(rho, 0.4, 0.35)?;
        let counts = tally(&sample_outcomes(&model, 5000, i as u64)?)?.contingency();
        let cmp = compare_copulas(&counts);
        println!("true rho {rho}: {counts:?}");
        for fit in &cmp.fits {
            println!(
                "  {:<9} params={:?} loglik={:.3} aic={:.3} bic={:.3}{}",
                fit.family.name(),
                fit.params.values(),
                fit.loglik,
                fit.aic,
                fit.bic,
                if fit.at_boundary { " (boundary)" } else { "" }
            );
        }
        units.push(cmp);
    }

    for row in win_rates(&units)? {
        println!("gaussian vs {:<9} loglik {:.2} aic {:.2} bic {:.2}", row.versus.name(), row.loglik, row.aic, row.bic);
    }

    let independent = compare_copulas(&ContingencyCounts::new(420, 280, 180, 120));
    println!("independence table best fit: {}", independent.fits[0].family);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
