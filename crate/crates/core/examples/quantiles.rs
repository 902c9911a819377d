//! Quantile and strict quantile of a few laws, including one with an atom.

use mu_domain_kit::{Distribution, Result};

fn main() -> Result<()> {
    let laws = [
        Distribution::uniform(-1.0, 1.0)?,
        Distribution::beta(2.0, 5.0)?.center(),
        Distribution::truncated_normal(0.0, 1.0, -2.0, 2.0)?,
        Distribution::mixture(vec![
            (0.5, Distribution::uniform(-1.0, 1.0)?),
            (0.5, Distribution::discrete([(0.0, 1.0)])?),
        ])?,
    ];
    for d in &laws {
        let (a, b) = d.support();
        println!("{} on [{a:.4}, {b:.4}], mean {:+.2e}", d.family().name(), d.mean());
        for u in [0.1, 0.25, 0.5, 0.75, 0.9] {
            println!("  u={u:<5} q={:+.6} q+={:+.6}", d.quantile(u)?, d.strict_quantile(u)?);
        }
    }

    // the atom at 0 shows up as a flat stretch of q over [1/4, 3/4]
    let atom = &laws[3];
    for x in [-0.5, 0.0, 0.5] {
        println!("F({x:+}) = {:.4}, F({x:+}-) = {:.4}", atom.cdf(x), atom.cdf_left(x));
    }
    Ok(())
}
