//! Power-series coefficients of the map for the uniform law, the map at a
//! few interior points, and the compact-convergence bound between levels.

use mu_domain_kit::discretize::{build_measure_cdf, step_l1_distance};
use mu_domain_kit::gross_map::{
    circle_sup_distance, default_order, evaluate_map, fourier_coefficients, map_distance_bound, truncation_tail,
};
use mu_domain_kit::{Distribution, Result};
use num_complex::Complex64;

fn main() -> Result<()> {
    let d = Distribution::uniform(-1.0, 1.0)?;
    let ns = [5, 15, 30, 200];
    let sqs = ns.iter().map(|&n| build_measure_cdf(&d, n)).collect::<Result<Vec<_>>>()?;
    let fcs = sqs.iter().map(|sq| fourier_coefficients(sq, default_order(200))).collect::<Result<Vec<_>>>()?;

    let limit = -8.0 / (std::f64::consts::PI * std::f64::consts::PI);
    for (n, fc) in ns.iter().zip(&fcs) {
        println!(
            "n={n:<4} a_1={:+.6} a_3={:+.6} a_2={:+.1e}  (a_1 limit {limit:+.6})",
            fc.get(1),
            fc.get(3),
            fc.get(2)
        );
    }

    let fc = &fcs[3];
    for z in
        [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5), Complex64::from_polar(0.9, 1.0)]
    {
        let w = evaluate_map(fc, z)?;
        println!("G({z:.3}) = {w:.6}  tail at |z| {:.2e}", truncation_tail(fc, z.norm()));
    }

    let r = 0.5;
    for i in 0..ns.len() - 1 {
        let sup = circle_sup_distance(&fcs[i], &fcs[3], r, 128)?;
        let bound = map_distance_bound(step_l1_distance(&sqs[i], &sqs[3]), r)?;
        println!("sup_|z|={r} |G_{} - G_200| = {sup:.4e} <= {bound:.4e}", ns[i]);
    }
    Ok(())
}
