//! Boundary CSV and SVG files for four laws at n = 5, 15, 30, 200.
//!
//! Usage: `cargo run --release --example boundary_figures [out_dir]`

use std::path::PathBuf;

use mu_domain_kit::pipeline::build_boundary;
use mu_domain_kit::{Distribution, Result, Scheme};

fn main() -> Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir).map_err(|e| mu_domain_kit::Error::io(&dir, e))?;
    let laws = [
        ("uniform", Distribution::uniform(-1.0, 1.0)?),
        ("beta25", Distribution::beta(2.0, 5.0)?.center()),
        ("two_piece", Distribution::two_piece_uniform((-2.0, -1.0), (1.0, 2.0))?),
        ("trunc_normal", Distribution::truncated_normal(0.0, 1.0, -3.0, 3.0)?),
    ];
    for (name, d) in &laws {
        for n in [5, 15, 30, 200] {
            let (_, bp) = build_boundary(d, n, Scheme::Cdf, 2048)?;
            let stem = dir.join(format!("{name}_n{n}"));
            bp.write_csv(&stem.with_extension("csv"), Some(&format!("{name}, n={n}")))?;
            bp.write_svg(&stem.with_extension("svg"))?;
            let (x0, x1) = bp.x_range().unwrap_or_default();
            println!(
                "{:<32} {:>5} points  x in [{x0:+.3}, {x1:+.3}]  max |y| {:.3}",
                stem.display(),
                bp.len(),
                bp.max_abs_y()
            );
        }
    }
    Ok(())
}
