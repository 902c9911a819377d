//! Closed-form conjugate function of a step quantile against a
//! principal-value quadrature of the same integral.

use mu_domain_kit::discretize::build_measure_cdf;
use mu_domain_kit::hilbert::{angular_steps, hilbert_pv_oracle, hilbert_step_quantile};
use mu_domain_kit::{Distribution, Result};

fn main() -> Result<()> {
    let d = Distribution::beta(2.0, 5.0)?.center();
    let sq = build_measure_cdf(&d, 15)?;
    let steps = angular_steps(&sq);
    println!("{:>8} {:>14} {:>14} {:>10}", "u", "closed form", "pv oracle", "gap");
    let mut worst: f64 = 0.0;
    // midpoints of the steps: away from the jump angles, where the transform has log poles
    for s in steps.iter().filter(|s| s.hi - s.lo > 0.05) {
        let u = 0.5 * (s.lo + s.hi);
        let closed = hilbert_step_quantile(&sq, u)?;
        let pv = hilbert_pv_oracle(&steps, u, 1e-4)?;
        worst = worst.max((closed - pv).abs());
        println!("{u:8.4} {closed:14.8} {pv:14.8} {:10.2e}", (closed - pv).abs());
    }
    println!("max gap {worst:.2e}");
    println!("odd: H(-1) = {:.8}, -H(1) = {:.8}", hilbert_step_quantile(&sq, -1.0)?, -hilbert_step_quantile(&sq, 1.0)?);
    Ok(())
}
