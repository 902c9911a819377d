use std::f64::consts::PI;

use mu_domain_kit::boundary::{boundary_points, scale_domain};
use mu_domain_kit::discretize::{build_measure_cdf, l1_distance, rate_bound, step_l1_distance, StepQuantile};
use mu_domain_kit::gross_map::fourier_coefficients;
use mu_domain_kit::hilbert::{hilbert_indicator, hilbert_step_quantile};
use mu_domain_kit::pipeline::build_boundary;
use mu_domain_kit::verify_mc::{ks_distance, simulate_exit, McConfig};
use mu_domain_kit::{Distribution, Scheme};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (-3.0..0.0f64, 0.1..3.0f64).prop_map(|(lo, w)| Distribution::uniform(lo, lo + w).unwrap()),
        (0.5..6.0f64, 0.5..6.0f64).prop_map(|(a, b)| Distribution::beta(a, b).unwrap()),
        (0.1..1.0f64, 0.1..1.0f64, 0.1..1.0f64).prop_map(|(w1, gap, w2)| Distribution::two_piece_uniform(
            (-w1 - gap, -gap),
            (gap, gap + w2)
        )
        .unwrap()),
        prop::collection::vec((-2.0..2.0f64, 0.05..1.0f64), 1..5).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            Distribution::discrete(atoms.into_iter().map(|(x, p)| (x, p / total))).unwrap()
        }),
        (-1.0..1.0f64, 0.1..0.9f64).prop_map(|(loc, w)| {
            Distribution::mixture(vec![
                (1.0 - w, Distribution::uniform(-1.0, 1.0).unwrap()),
                (w, Distribution::discrete([(loc, 1.0)]).unwrap()),
            ])
            .unwrap()
        }),
    ]
}

fn level_grid() -> Vec<f64> {
    (1..40).map(|i| i as f64 / 40.0).chain([1e-6, 0.5 + 1e-9, 1.0 - 1e-6]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_galois_properties(d in law()) {
        let (a, b) = d.support();
        let xs: Vec<f64> = (0..=40).map(|i| a + (b - a) * i as f64 / 40.0).collect();
        for &u in &level_grid() {
            let q = d.quantile(u).unwrap();
            let qp = d.strict_quantile(u).unwrap();
            prop_assert!(q <= qp + 1e-12);
            for &x in &xs {
                let f = d.cdf(x);
                if qp < x - 1e-9 { prop_assert!(u < f + 1e-12, "(1) u={u} x={x}"); }
                if f < u - 1e-12 { prop_assert!(x <= q + 1e-9, "(3) u={u} x={x}"); }
                if x < q - 1e-9 { prop_assert!(f < u + 1e-12, "(4) u={u} x={x}"); }
            }
        }
        for &x in &xs {
            let f = d.cdf(x);
            if f > 0.0 && f < 1.0 {
                prop_assert!(d.quantile(f).unwrap() <= x + 1e-9, "(2) x={x}");
            }
        }
        let grid = level_grid();
        let mut sorted = grid.clone();
        sorted.sort_by(f64::total_cmp);
        let qs: Vec<f64> = sorted.iter().map(|&u| d.quantile(u).unwrap()).collect();
        prop_assert!(qs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn discretization_is_a_quantile_within_the_bound(d in law(), n in 1usize..120) {
        let sq = build_measure_cdf(&d, n).unwrap();
        prop_assert_eq!(sq.total_mass(), 1.0);
        prop_assert!(sq.values().windows(2).all(|w| w[0] <= w[1]));
        for atom in d.atoms() {
            let hit = sq.atom_intervals().iter().any(|&j| {
                sq.values()[j] == atom.location
                    && (sq.breakpoints()[j + 1] - sq.breakpoints()[j] - atom.mass).abs() < 1e-12
            });
            prop_assert!(hit, "atom {:?} not carried", atom);
        }
        let l1 = l1_distance(&d, &sq);
        let rb = rate_bound(&d, n).unwrap();
        prop_assert!(l1 <= rb.bound + 1e-8, "l1 {} > bound {}", l1, rb.bound);
        if let Some(r) = rb.refined {
            prop_assert!(l1 <= r.value + 1e-8);
        }
        if d.atoms().is_empty() {
            prop_assert_eq!(rb.varpi, 0.0);
        }
    }

    #[test]
    fn pointwise_error_at_most_one_cell(d in law(), n in 1usize..80, u in 0.001..0.999f64) {
        let sq = build_measure_cdf(&d, n).unwrap();
        let near_break = sq.breakpoints().iter().chain(d.quantile_breaks().iter()).any(|&s| (s - u).abs() < 1e-7);
        prop_assume!(!near_break);
        let (a, b) = d.support();
        let gap = (sq.eval(u).unwrap() - d.quantile(u).unwrap()).abs();
        prop_assert!(gap <= (b - a) / n as f64 + 1e-9, "gap {} at u={}", gap, u);
    }

    #[test]
    fn uniform_rate_halves_when_grid_doubles(k in 1usize..200) {
        let u = Distribution::uniform(-1.0, 1.0).unwrap();
        let coarse = l1_distance(&u, &build_measure_cdf(&u, k).unwrap());
        let fine = l1_distance(&u, &build_measure_cdf(&u, 2 * k).unwrap());
        prop_assert!(fine <= coarse + 1e-12);
    }

    #[test]
    fn hilbert_is_odd_and_linear(
        cuts in prop::collection::vec(0.01..0.99f64, 1..6),
        vals in prop::collection::vec(-3.0..3.0f64, 7),
        u in 0.0..PI,
    ) {
        let mut bps = cuts.clone();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        bps.insert(0, 0.0);
        bps.push(1.0);
        let mut values: Vec<f64> = vals[..bps.len() - 1].to_vec();
        values.sort_by(f64::total_cmp);
        prop_assume!(bps.iter().all(|&s| ((PI * s) - u).abs() > 1e-6));
        let sq = StepQuantile::new(bps.clone(), values.clone(), vec![]).unwrap();
        let h = hilbert_step_quantile(&sq, u).unwrap();
        prop_assert_eq!(hilbert_step_quantile(&sq, -u).unwrap(), -h);
        let parts: f64 = bps.windows(2).zip(&values)
            .map(|(w, v)| v * hilbert_indicator(PI * w[0], PI * w[1], u).unwrap())
            .sum();
        prop_assert!((h - parts).abs() < 1e-12);
    }

    #[test]
    fn coefficient_gaps_bounded_by_l1(n in 1usize..60, m in 1usize..60) {
        let d = Distribution::beta(2.0, 5.0).unwrap();
        let (a, b) = (build_measure_cdf(&d, n).unwrap(), build_measure_cdf(&d, m).unwrap());
        let gap = step_l1_distance(&a, &b);
        let (fa, fb) = (fourier_coefficients(&a, 128).unwrap(), fourier_coefficients(&b, 128).unwrap());
        for k in 1..=128 {
            prop_assert!((fa.get(k) - fb.get(k)).abs() <= 2.0 * gap + 1e-12);
        }
    }

    #[test]
    fn symmetric_steps_have_no_even_coefficients(half in prop::collection::vec((0.01..1.0f64, 0.01..1.0f64), 1..5)) {
        // mirror (width, height) pairs about level 1/2
        let total: f64 = half.iter().map(|p| p.0).sum::<f64>() * 2.0;
        let mut widths: Vec<f64> = half.iter().map(|p| p.0 / total).collect();
        let mut heights: Vec<f64> = half.iter().scan(0.0, |acc, p| { *acc += p.1; Some(*acc) }).collect();
        heights.reverse();
        let mut values: Vec<f64> = heights.iter().map(|h| -h).collect();
        values.extend(heights.iter().rev());
        let mut mirrored = widths.clone();
        mirrored.reverse();
        widths.reverse();
        widths.extend(mirrored.iter().rev());
        let mut bps = vec![0.0];
        for w in &widths {
            bps.push(bps[bps.len() - 1] + w);
        }
        let last = bps.len() - 1;
        bps[last] = 1.0;
        let sq = StepQuantile::new(bps.clone(), values, vec![]).unwrap();
        let fc = fourier_coefficients(&sq, 40).unwrap();
        for k in (2..=40).step_by(2) {
            prop_assert!(fc.get(k).abs() < 1e-12, "a_{} = {}", k, fc.get(k));
        }
    }

    #[test]
    fn boundary_reflection_and_scaling(alpha in 0.2..5.0f64, beta in -3.0..3.0f64, n in 2usize..40) {
        let d = Distribution::beta(2.0, 3.0).unwrap();
        let bp = boundary_points(&build_measure_cdf(&d, n).unwrap(), 128).unwrap();
        let k = bp.len();
        for i in 0..k {
            let (p, q) = (bp.points[i], bp.points[k - 1 - i]);
            prop_assert!((p.y + q.y).abs() <= 1e-12 && p.x == q.x);
        }
        let moved = d.affine(alpha, beta).unwrap();
        let direct = boundary_points(&build_measure_cdf(&moved, n).unwrap(), 128).unwrap();
        let scaled = scale_domain(&bp, alpha, beta).unwrap();
        prop_assert_eq!(direct.len(), scaled.len());
        for (p, q) in direct.points.iter().zip(&scaled.points) {
            prop_assert!((p.x - q.x).abs() <= 1e-9 && (p.y - q.y).abs() <= 1e-9);
        }
    }
}

#[test]
fn ks_does_not_grow_as_step_shrinks() {
    let u = Distribution::uniform(-1.0, 1.0).unwrap();
    let (_, bp) = build_boundary(&u, 200, Scheme::Cdf, 2048).unwrap();
    let coarse = simulate_exit(&bp, &McConfig::new(10_000, 1e-3, 11)).unwrap();
    let fine = simulate_exit(&bp, &McConfig::new(10_000, 1e-4, 11)).unwrap();
    let (kc, kf) = (ks_distance(&coarse.samples, &u).unwrap(), ks_distance(&fine.samples, &u).unwrap());
    assert!(kf <= kc + 0.01, "ks at 1e-4 = {kf}, at 1e-3 = {kc}");
    let spread = 3.0 * fine.std() / (fine.samples.len() as f64).sqrt();
    assert!(fine.mean().abs() <= spread, "mean {} vs 3 se {}", fine.mean(), spread);
}
