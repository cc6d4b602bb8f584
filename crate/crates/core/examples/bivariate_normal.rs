// Normal and bivariate normal/t distribution functions.
//
// ```bash
// cargo run --example bivariate_normal
// ```

use refusal_index::numerics::{bvn_cdf, bvn_survival, bvt_cdf, std_normal_cdf, std_normal_quantile};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("Phi(1.96) = {:.6}", std_normal_cdf(1.96));
    println!("Phi^-1(0.975) = {:.6}", std_normal_quantile(0.975)?);
    for rho in [-0.9, 0.0, 0.5, 0.99] {
        println!(
            "rho={rho:>5}: Phi2(0,0)={:.6} survival(0.5,0.5)={:.6} t5(0.5,0.5)={:.6}",
            bvn_cdf(0.0, 0.0, rho)?,
            bvn_survival(0.5, 0.5, rho)?,
            bvt_cdf(0.5, 0.5, rho, 5.0)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
