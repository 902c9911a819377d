//! Periodic Hilbert transform of even step functions on the circle.
//!
//! Probability levels `u` in `(0, 1)` sit at angles `θ = πu`, so the step
//! quantile becomes the even function `θ ↦ q_n(|θ|/π)` on `(-π, π]`.

use std::f64::consts::{PI, TAU};

use crate::discretize::StepQuantile;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Distance below which an evaluation point counts as sitting on a pole.
pub const POLE_TOL: f64 = 1e-9;

/// Largest Richardson spread the oracle accepts.
pub const ORACLE_MAX_SPREAD: f64 = 1e-4;

/// One term `value * 1_{lo < |θ| < hi}` of an even step function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularStep {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl AngularStep {
    pub fn new(lo: f64, hi: f64, value: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= PI) {
            return Err(Error::domain(format!("angular step needs 0 <= lo < hi <= pi, got ({lo}, {hi})")));
        }
        Ok(AngularStep { lo, hi, value })
    }
}

/// Angular steps of `θ ↦ q_n(|θ|/π)`.
pub fn angular_steps(sq: &StepQuantile) -> Vec<AngularStep> {
    sq.unit_steps()
        .into_iter()
        .map(|(lo, hi, value)| AngularStep { lo: PI * lo, hi: (PI * hi).min(PI), value })
        .collect()
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_angle(u: f64) -> f64 {
    let r = u.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn circle_distance(u: f64, v: f64) -> f64 {
    wrap_angle(u - v).abs()
}

fn check_pole(v: f64, pole: f64) -> Result<()> {
    if circle_distance(v, pole) < POLE_TOL || circle_distance(v, -pole) < POLE_TOL {
        return Err(Error::Pole { u: v, pole, tol: POLE_TOL });
    }
    Ok(())
}

/// `H{1_{a<|x|<b}}(u) = (1/π) ln |sin((u-a)/2) sin((u+b)/2) / (sin((u-b)/2) sin((u+a)/2))|`.
///
/// The `a = 0` and `b = π` edges drop their (identically unimodular) factor,
/// so those edges carry no pole.
pub fn hilbert_indicator(a: f64, b: f64, u: f64) -> Result<f64> {
    if !(0.0 <= a && a < b && b <= PI) {
        return Err(Error::domain(format!("indicator bounds need 0 <= a < b <= pi, got ({a}, {b})")));
    }
    if !u.is_finite() {
        return Err(Error::domain("evaluation angle must be finite"));
    }
    // reduce |u| so that u and -u take bit-identical paths
    let w = wrap_angle(u.abs());
    let sign = if (u < 0.0) != (w < 0.0) { -1.0 } else { 1.0 };
    let v = w.abs();
    if v == 0.0 || v == PI {
        return Ok(0.0);
    }
    let a_edge = a > 0.0;
    let b_edge = b < PI;
    if a_edge {
        check_pole(v, a)?;
    }
    if b_edge {
        check_pole(v, b)?;
    }
    let ratio = match (a_edge, b_edge) {
        (true, true) => ((v - a) / 2.0).sin() / ((v - b) / 2.0).sin() * (((v + b) / 2.0).sin() / ((v + a) / 2.0).sin()),
        (true, false) => ((v - a) / 2.0).sin() / ((v + a) / 2.0).sin(),
        (false, true) => ((v + b) / 2.0).sin() / ((v - b) / 2.0).sin(),
        (false, false) => 1.0,
    };
    Ok(sign * ratio.abs().ln() / PI)
}

/// Transform of a sum of angular steps at angle `u`.
pub fn hilbert_steps(steps: &[AngularStep], u: f64) -> Result<f64> {
    let mut total = 0.0;
    for s in steps {
        if s.value != 0.0 {
            total += s.value * hilbert_indicator(s.lo, s.hi, u)?;
        }
    }
    Ok(total)
}

/// `H{q_n(|·|/π)}(u)`.
pub fn hilbert_step_quantile(sq: &StepQuantile, u: f64) -> Result<f64> {
    hilbert_steps(&angular_steps(sq), u)
}

/// Even, 2π-periodic step function value at `θ`; zero off the steps.
pub fn eval_steps(steps: &[AngularStep], theta: f64) -> f64 {
    let v = wrap_angle(theta).abs();
    steps.iter().filter(|s| s.lo < v && v < s.hi).map(|s| s.value).sum()
}

const ORACLE_TOL: f64 = 1e-11;

/// Truncated kernel integral `(1/2π) ∫_{η ≤ |t| ≤ π} f(u - t) cot(t/2) dt`,
/// folded onto `t > 0` and split at every jump of the integrand.
fn truncated_pv(steps: &[AngularStep], u: f64, eta: f64) -> f64 {
    let mut cuts = vec![eta, PI];
    for s in steps {
        for edge in [s.lo, s.hi, -s.lo, -s.hi] {
            // jumps of f(u - t) and f(u + t) in t
            for t in [wrap_angle(u - edge), wrap_angle(edge - u)] {
                let t = t.abs();
                if t > eta && t < PI {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let g = |t: f64| (eval_steps(steps, u - t) - eval_steps(steps, u + t)) / (t / 2.0).tan();
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo < 1e-15 {
                return 0.0;
            }
            // keep the integrand's step value fixed on the open piece
            let inner = |t: f64| g(t.clamp(lo + 1e-14 * (hi - lo), hi - 1e-14 * (hi - lo)));
            adaptive_simpson(&inner, lo, hi, ORACLE_TOL)
        })
        .sum::<f64>()
        / TAU
}

/// Principal-value quadrature of the periodic Hilbert transform with
/// Richardson extrapolation over exclusion radii `100η, 10η, η`.
pub fn hilbert_pv_oracle(steps: &[AngularStep], u: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta * 100.0 < PI) {
        return Err(Error::domain(format!("exclusion radius must lie in (0, pi/100), got {eta}")));
    }
    let i = [truncated_pv(steps, u, 100.0 * eta), truncated_pv(steps, u, 10.0 * eta), truncated_pv(steps, u, eta)];
    // error is O(η) near a smooth jump-free point
    let r_coarse = (10.0 * i[1] - i[0]) / 9.0;
    let r_fine = (10.0 * i[2] - i[1]) / 9.0;
    let spread = (r_fine - r_coarse).abs();
    if !(spread <= ORACLE_MAX_SPREAD) {
        return Err(Error::OracleFailure { spread });
    }
    Ok(r_fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn indicator_examples() {
        assert_eq!(hilbert_indicator(0.5, 1.0, 0.0).unwrap(), 0.0);
        let v = hilbert_indicator(0.5, 1.0, 2.0).unwrap();
        let direct = (0.75f64.sin() * 1.5f64.sin() / (0.5f64.sin() * 1.25f64.sin())).ln() / PI;
        assert_abs_diff_eq!(v, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.1279, epsilon = 1e-4);
        assert_eq!(hilbert_indicator(0.5, 1.0, -2.0).unwrap(), -v);
    }

    #[test]
    fn indicator_poles_and_domain() {
        assert!(matches!(hilbert_indicator(0.5, 1.0, 0.5), Err(Error::Pole { .. })));
        assert!(matches!(hilbert_indicator(0.5, 1.0, -1.0 + 1e-12), Err(Error::Pole { .. })));
        assert!(matches!(hilbert_indicator(0.5, 1.0, 0.5 + TAU), Err(Error::Pole { .. })));
        assert!(hilbert_indicator(1.0, 0.5, 0.2).is_err());
        // full-circle indicator is constant, so its transform vanishes
        assert_eq!(hilbert_indicator(0.0, PI, 1.3).unwrap(), 0.0);
        assert!(hilbert_indicator(0.0, 1.0, 1e-3).unwrap().is_finite());
    }

    #[test]
    fn oracle_examples() {
        let constant = [AngularStep::new(0.0, PI, 2.5).unwrap()];
        assert_abs_diff_eq!(hilbert_pv_oracle(&constant, 0.7, 1e-4).unwrap(), 0.0, epsilon = 1e-10);

        let ind = [AngularStep::new(0.5, 1.0, 1.0).unwrap()];
        let o = hilbert_pv_oracle(&ind, 2.0, 1e-4).unwrap();
        assert_abs_diff_eq!(o, hilbert_indicator(0.5, 1.0, 2.0).unwrap(), epsilon = 1e-6);

        let two = [AngularStep::new(0.2, 0.9, 1.0).unwrap(), AngularStep::new(1.4, 2.8, -0.5).unwrap()];
        let sum = hilbert_pv_oracle(&two[..1], 1.1, 1e-4).unwrap() + hilbert_pv_oracle(&two[1..], 1.1, 1e-4).unwrap();
        assert_abs_diff_eq!(hilbert_pv_oracle(&two, 1.1, 1e-4).unwrap(), sum, epsilon = 1e-6);
    }

    #[test]
    fn step_quantile_oddness_and_linearity() {
        let sq = StepQuantile::new(vec![0.0, 0.3, 0.5, 1.0], vec![-1.0, 0.25, 2.0], vec![]).unwrap();
        for u in [0.1, 0.7, 1.3, 2.2, 3.0] {
            let h = hilbert_step_quantile(&sq, u).unwrap();
            assert_eq!(hilbert_step_quantile(&sq, -u).unwrap(), -h);
            let parts: f64 = angular_steps(&sq).iter().map(|s| hilbert_steps(&[*s], u).unwrap()).sum();
            assert_abs_diff_eq!(h, parts, epsilon = 1e-12);
        }
        let zero = StepQuantile::constant(0.0);
        assert_eq!(hilbert_step_quantile(&zero, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn transform_has_zero_mean() {
        let sq = StepQuantile::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0], vec![]).unwrap();
        let m = 20_000;
        let sum: f64 = (0..m)
            .map(|i| {
                let u = -PI + TAU * (i as f64 + 0.5) / m as f64;
                hilbert_step_quantile(&sq, u).unwrap()
            })
            .sum();
        assert!((sum / m as f64).abs() < 1e-6);
    }
}
