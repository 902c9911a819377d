//! Grid measures for n = 5, 15, 30, 200 and their L1 distance to the target quantile.

use mu_domain_kit::discretize::{build_measure, l1_distance, rate_bound};
use mu_domain_kit::{Distribution, Result, Scheme};

fn main() -> Result<()> {
    let laws = [
        ("uniform", Distribution::uniform(-1.0, 1.0)?),
        ("beta(2,5)", Distribution::beta(2.0, 5.0)?.center()),
        (
            "half atom",
            Distribution::mixture(vec![
                (0.5, Distribution::uniform(-1.0, 1.0)?),
                (0.5, Distribution::discrete([(0.05, 1.0)])?),
            ])?,
        ),
    ];
    for (name, d) in &laws {
        println!("{name}");
        println!(
            "  {:>5} {:>12} {:>12} {:>12} {:>12} {:>10}",
            "n", "l1 (cdf)", "l1 (pdf)", "bound", "refined", "varpi"
        );
        for n in [5, 15, 30, 200] {
            let cdf = l1_distance(d, &build_measure(d, n, Scheme::Cdf)?);
            let pdf = if d.has_density() {
                format!("{:12.4e}", l1_distance(d, &build_measure(d, n, Scheme::Pdf)?))
            } else {
                format!("{:>12}", "-")
            };
            let rb = rate_bound(d, n)?;
            let refined = rb.refined.map_or("-".to_string(), |r| format!("{:.4e}", r.value));
            println!("  {n:>5} {cdf:12.4e} {pdf} {:12.4e} {refined:>12} {:10.3e}", rb.bound, rb.varpi);
        }
    }

    let sq = build_measure(&laws[0].1, 5, Scheme::Cdf)?;
    println!("uniform, n=5: breakpoints {:?}", sq.breakpoints());
    println!("              values      {:?}", sq.values());
    Ok(())
}
