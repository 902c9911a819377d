//! Brownian motion from the origin, stopped on leaving the domain built for
//! a law; the exit positions' real parts are compared with the law.
//!
//! Usage: `cargo run --release --example monte_carlo [walks] [step]`

use mu_domain_kit::pipeline::build_boundary;
use mu_domain_kit::verify_mc::{ks_distance, simulate_exit, McConfig};
use mu_domain_kit::{Distribution, Result, Scheme};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let walks = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let step = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e-4);
    let laws = [
        ("uniform", Distribution::uniform(-1.0, 1.0)?),
        ("beta(2,5)", Distribution::beta(2.0, 5.0)?.center()),
        ("two-piece", Distribution::two_piece_uniform((-2.0, -1.0), (1.0, 2.0))?),
    ];
    for (name, d) in &laws {
        let (_, bp) = build_boundary(d, 200, Scheme::Cdf, 2048)?;
        let set = simulate_exit(&bp, &McConfig::new(walks, step, 2024))?;
        let ks = ks_distance(&set.samples, d)?;
        println!(
            "{name:<10} walks={} truncated={} mean={:+.4} std={:.4} (target {:.4}) ks={ks:.4}",
            set.walks,
            set.truncated_walks,
            set.mean(),
            set.std(),
            d.variance().sqrt()
        );
        if set.warning {
            println!("  warning: truncated walks above threshold");
        }
    }
    Ok(())
}
