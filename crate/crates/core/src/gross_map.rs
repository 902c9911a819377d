//! Truncated power-series map `G_n(z) = Σ_{k≥1} a_k z^k` whose boundary real
//! part is the step quantile `q_n(|θ|/π)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::discretize::StepQuantile;
use crate::error::{Error, Result};

/// Constant in the compact-convergence bound `C ‖Δq‖₁ r / (1 - r)`.
pub const MAP_BOUND_CONSTANT: f64 = 2.0;

/// Default series length for a discretization with `n` cells.
pub fn default_order(n: usize) -> usize {
    (8 * n).max(256)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    /// `coeffs[k - 1] = a_k`.
    pub coeffs: Vec<f64>,
    /// `∫_0^1 |q_n(u)| du`.
    pub source_l1_norm: f64,
}

impl FourierCoefficients {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `a_k` for `k >= 1`; zero past the truncation order.
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Writes `k,a_k` rows with an optional leading comment line.
    pub fn write_csv(&self, mut w: impl Write, comment: Option<&str>) -> std::io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "k,a_k")?;
        for (i, a) in self.coeffs.iter().enumerate() {
            writeln!(w, "{},{a:e}", i + 1)?;
        }
        Ok(())
    }
}

/// Cosine coefficients of `θ ↦ q_n(|θ|/π)`, exact on each step:
/// `a_k = 2/(kπ) Σ_j x_j (sin(kπσ_j) - sin(kπσ_{j-1}))`.
pub fn fourier_coefficients(sq: &StepQuantile, order: usize) -> Result<FourierCoefficients> {
    if order == 0 {
        return Err(Error::domain("series order must be >= 1"));
    }
    let steps = sq.unit_steps();
    let coeffs = (1..=order)
        .map(|k| {
            let kp = k as f64 * PI;
            let s: f64 = steps.iter().map(|&(lo, hi, x)| x * ((kp * hi).sin() - (kp * lo).sin())).sum();
            2.0 * s / kp
        })
        .collect();
    Ok(FourierCoefficients { coeffs, source_l1_norm: sq.l1_norm() })
}

/// `Σ_{k=1}^N a_k z^k` by Horner's rule, for `|z| < 1`.
pub fn evaluate_map(fc: &FourierCoefficients, z: Complex64) -> Result<Complex64> {
    if !(z.norm() <= 1.0 - 1e-9) {
        return Err(Error::domain(format!("series is only evaluated inside the unit disc, |z| = {}", z.norm())));
    }
    let acc = fc.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    Ok(acc * z)
}

/// Bound on the neglected tail `Σ_{k>N} |a_k| r^k` using `max |a_k|`.
pub fn truncation_tail(fc: &FourierCoefficients, r: f64) -> f64 {
    let amax = fc.coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    amax * r.powi(fc.len() as i32 + 1) / (1.0 - r)
}

/// `2 ‖q - q'‖₁ r / (1 - r)`, a bound on `sup_{|z|≤r} |G - G'|`.
pub fn map_distance_bound(l1_gap: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("radius must lie in (0, 1), got {r}")));
    }
    if !(l1_gap >= 0.0) {
        return Err(Error::domain(format!("L1 gap must be non-negative, got {l1_gap}")));
    }
    Ok(MAP_BOUND_CONSTANT * l1_gap * r / (1.0 - r))
}

/// Largest `|G(z) - G'(z)|` over `points` equispaced on `|z| = r`.
pub fn circle_sup_distance(a: &FourierCoefficients, b: &FourierCoefficients, r: f64, points: usize) -> Result<f64> {
    let mut sup = 0.0f64;
    for i in 0..points {
        let z = Complex64::from_polar(r, 2.0 * PI * i as f64 / points as f64);
        sup = sup.max((evaluate_map(a, z)? - evaluate_map(b, z)?).norm());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::build_measure_cdf;
    use crate::distributions::Distribution;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_quantile_has_zero_coefficients() {
        let fc = fourier_coefficients(&StepQuantile::constant(0.0), 16).unwrap();
        assert!(fc.coeffs.iter().all(|&a| a == 0.0));
        assert_eq!(evaluate_map(&fc, Complex64::new(0.3, 0.2)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn evaluate_examples() {
        let fc = FourierCoefficients { coeffs: vec![1.0], source_l1_norm: 0.0 };
        assert_eq!(evaluate_map(&fc, Complex64::new(0.5, 0.0)).unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(evaluate_map(&fc, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        assert!(evaluate_map(&fc, Complex64::new(1.0, 0.0)).is_err());
        assert!(evaluate_map(&fc, Complex64::new(0.0, -1.5)).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(map_distance_bound(0.0, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(map_distance_bound(0.005, 0.5).unwrap(), 0.01, epsilon = 1e-15);
        assert!(map_distance_bound(0.1, 1e-12).unwrap() < 1e-11);
        assert!(map_distance_bound(0.1, 1.0).is_err());
        assert!(map_distance_bound(0.1, 0.0).is_err());
    }

    #[test]
    fn uniform_coefficients_approach_cosine_series() {
        let u = Distribution::uniform(-1.0, 1.0).unwrap();
        let sq = build_measure_cdf(&u, 200).unwrap();
        let fc = fourier_coefficients(&sq, 64).unwrap();
        let limit = -8.0 / (PI * PI);
        assert!((fc.get(1) - limit).abs() <= 2.0 * (1.0 / 200.0) * 2.0);
        assert!((fc.get(3) - limit / 9.0).abs() <= 0.02);
        for k in (2..=64).step_by(2) {
            assert!(fc.get(k).abs() < 1e-12, "a_{k} = {}", fc.get(k));
        }
        // Bessel inequality
        let energy: f64 = fc.coeffs.iter().map(|a| a * a / 2.0).sum();
        let second: f64 = sq.unit_steps().iter().map(|(lo, hi, v)| (hi - lo) * v * v).sum();
        assert!(energy <= second + 1e-9);
        for a in &fc.coeffs {
            assert!(a.abs() <= 2.0 * fc.source_l1_norm + 1e-15);
        }
    }

    #[test]
    fn limit_series_at_one_half() {
        // exact limit coefficients a_k = -8/(pi k)^2 for odd k
        let coeffs = (1..=64).map(|k| if k % 2 == 1 { -8.0 / (PI * k as f64).powi(2) } else { 0.0 }).collect();
        let limit = FourierCoefficients { coeffs, source_l1_norm: 1.0 };
        let oracle: f64 =
            (0..32).map(|j| 0.5f64.powi(2 * j + 1) / ((2 * j + 1) as f64).powi(2)).sum::<f64>() * -8.0 / (PI * PI);
        let g = evaluate_map(&limit, Complex64::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(g.re, oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(g.re, -0.41771, epsilon = 1e-5);
        assert_eq!(g.im, 0.0);

        let u = Distribution::uniform(-1.0, 1.0).unwrap();
        let fc = fourier_coefficients(&build_measure_cdf(&u, 200).unwrap(), 64).unwrap();
        let gn = evaluate_map(&fc, Complex64::new(0.5, 0.0)).unwrap();
        assert!((gn.re - oracle).abs() <= map_distance_bound(1.0 / 200.0, 0.5).unwrap());
    }
}
