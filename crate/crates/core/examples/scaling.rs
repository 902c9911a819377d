//! Affine maps of the law act on the domain by the same map; the unit-support
//! boundary rescales into the one built directly.

use mu_domain_kit::boundary::{boundary_points, normalize_support, scale_domain};
use mu_domain_kit::discretize::build_measure_cdf;
use mu_domain_kit::{Distribution, Result};

fn main() -> Result<()> {
    let d = Distribution::beta(2.0, 5.0)?.center();
    let (unit, alpha, beta) = normalize_support(&d)?;
    println!("support {:?} = {alpha:.4} * {:?} + {beta:+.4}", d.support(), unit.support());

    let unit_bp = boundary_points(&build_measure_cdf(&unit, 30)?, 512)?;
    let direct = boundary_points(&build_measure_cdf(&d, 30)?, 512)?;
    let scaled = scale_domain(&unit_bp, alpha, beta)?;
    let dev = direct
        .points
        .iter()
        .zip(&scaled.points)
        .map(|(p, q)| (p.x - q.x).abs().max((p.y - q.y).abs()))
        .fold(0.0, f64::max);
    println!("{} points, max deviation direct vs rescaled: {dev:.2e}", direct.len());

    for (a, b) in [(2.0, 0.0), (0.5, 1.0), (3.0, -2.0)] {
        let moved = scale_domain(&direct, a, b)?;
        let (x0, x1) = moved.x_range().unwrap_or_default();
        println!("alpha={a} beta={b:+}: x in [{x0:+.4}, {x1:+.4}], max |y| {:.4}", moved.max_abs_y());
    }
    Ok(())
}
