//! Grid discretizations `mu_n` of a bounded law and their step quantiles.
//!
//! The grid is `x_k = a + (b - a) k / n`. Grid cells carry the increment
//! `F(x_k) - F(x_{k-1})` (c.d.f. scheme) or `(b - a)/n * f(x_{k-1})` (density
//! scheme) at their right endpoint; atoms keep their exact mass. A cell that
//! touches an atom is skipped: its continuous mass is emitted as a *fill*
//! interval carrying the value of the neighbouring atom, so the step quantile
//! stays monotone and still covers the whole level range.

use serde::Serialize;

use crate::distributions::{Atom, Distribution};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Per-cell absolute tolerance of the L¹ quadrature.
pub const L1_CELL_TOL: f64 = 1e-10;

/// Relative tolerance (in units of `b - a`) for a grid point to count as an atom.
pub const ATOM_COLLISION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Increments of the c.d.f. on the grid.
    #[default]
    Cdf,
    /// Left-endpoint density times the grid step; may not sum to one.
    Pdf,
}

/// Non-decreasing, left-continuous step function on `(0, sigma_m)`.
///
/// Step `j` (0-based) equals `values[j]` on `(breakpoints[j], breakpoints[j + 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepQuantile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    atom_intervals: Vec<usize>,
}

impl StepQuantile {
    /// Validates monotonicity of both sequences and `breakpoints[0] == 0`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, atom_intervals: Vec<usize>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::domain(format!(
                "step quantile needs m >= 1 values and m + 1 breakpoints, got {} and {}",
                values.len(),
                breakpoints.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::domain("first breakpoint must be 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] <= w[1])) || values.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::domain("breakpoints and values must be non-decreasing"));
        }
        if !(breakpoints[breakpoints.len() - 1] > 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("step quantile must carry positive mass and finite values"));
        }
        if atom_intervals.iter().any(|&j| j >= values.len()) {
            return Err(Error::domain("atom interval index out of range"));
        }
        Ok(StepQuantile { breakpoints, values, atom_intervals })
    }

    /// Single step of value `c` on `(0, 1)`.
    pub fn constant(c: f64) -> Self {
        StepQuantile { breakpoints: vec![0.0, 1.0], values: vec![c], atom_intervals: Vec::new() }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Indices of steps that encode atoms of the source law.
    pub fn atom_intervals(&self) -> &[usize] {
        &self.atom_intervals
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sigma_m`, the total mass carried by the steps.
    pub fn total_mass(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value at level `u` in `(0, sigma_m)`; a breakpoint takes its left step.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < self.total_mass()) {
            return Err(Error::domain(format!("level {u} is outside (0, {})", self.total_mass())));
        }
        let j = self.breakpoints.partition_point(|&s| s < u);
        Ok(self.values[j - 1])
    }

    /// Steps `(lo, hi, value)` tiling `(0, 1)` exactly: mass beyond 1 is cut
    /// and a short total mass is padded with the last value. Empty steps are
    /// dropped.
    pub fn unit_steps(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.values.len());
        for (j, &v) in self.values.iter().enumerate() {
            let lo = self.breakpoints[j].min(1.0);
            let hi = self.breakpoints[j + 1].min(1.0);
            if hi > lo {
                out.push((lo, hi, v));
            }
        }
        match out.last_mut() {
            Some(last) if last.1 < 1.0 => last.1 = 1.0,
            None => out.push((0.0, 1.0, self.max_value())),
            _ => {}
        }
        out
    }

    /// Interior step boundaries of [`Self::unit_steps`], strictly inside `(0, 1)`.
    pub fn unit_breaks(&self) -> Vec<f64> {
        let steps = self.unit_steps();
        steps[..steps.len() - 1].iter().map(|s| s.1).collect()
    }

    /// Value of the unit-interval extension at `u` in `(0, 1)`.
    pub fn eval_unit(&self, u: f64) -> f64 {
        let steps = self.unit_steps();
        let j = steps.partition_point(|s| s.1 < u).min(steps.len() - 1);
        steps[j].2
    }

    /// `∫_0^1 |q_n(u)| du` over the unit-interval extension.
    pub fn l1_norm(&self) -> f64 {
        self.unit_steps().iter().map(|(lo, hi, v)| (hi - lo) * v.abs()).sum()
    }

    /// `∫_0^1 q_n(u) du` over the unit-interval extension.
    pub fn mean(&self) -> f64 {
        self.unit_steps().iter().map(|(lo, hi, v)| (hi - lo) * v).sum()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> StepQuantile {
        StepQuantile {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            atom_intervals: self.atom_intervals.clone(),
        }
    }
}

/// Uniform grid `a + (b - a) k / n`, `k = 0..=n`, with exact endpoints.
pub fn grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("grid needs n >= 1"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("grid needs finite a < b, got ({a}, {b})")));
    }
    let mut xs: Vec<f64> = (0..=n).map(|k| a + (b - a) * (k as f64) / (n as f64)).collect();
    xs[n] = b;
    Ok(xs)
}

#[derive(Clone, Copy, PartialEq)]
enum Piece {
    Cell,
    Atom,
    Fill,
}

struct Builder {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    atom_intervals: Vec<usize>,
}

impl Builder {
    fn level(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    fn push(&mut self, target: f64, value: f64, piece: Piece) {
        if !(target > self.level()) {
            return;
        }
        if piece == Piece::Atom {
            self.atom_intervals.push(self.values.len());
        }
        self.breakpoints.push(target);
        self.values.push(value);
    }
}

/// Step quantile of the grid measure built from c.d.f. increments.
pub fn build_measure_cdf(dist: &Distribution, n: usize) -> Result<StepQuantile> {
    build_measure(dist, n, Scheme::Cdf)
}

/// Step quantile of the grid measure built from left-endpoint densities.
pub fn build_measure_pdf(dist: &Distribution, n: usize) -> Result<StepQuantile> {
    build_measure(dist, n, Scheme::Pdf)
}

pub fn build_measure(dist: &Distribution, n: usize, scheme: Scheme) -> Result<StepQuantile> {
    let (a, b) = dist.support();
    if !dist.is_bounded() {
        return Err(Error::UnboundedSupport { a, b });
    }
    if scheme == Scheme::Pdf && !dist.has_density() {
        return Err(Error::UnsupportedFamily { family: dist.family().name(), what: "the density scheme" });
    }
    if !(a < b) {
        // Point mass: the quantile is already a single step.
        return Ok(StepQuantile { breakpoints: vec![0.0, 1.0], values: vec![a], atom_intervals: vec![0] });
    }
    let xs = grid(a, b, n)?;
    let h = (b - a) / n as f64;
    let tol = ATOM_COLLISION_TOL * (b - a);
    let density = |x: f64| -> Result<f64> {
        let f = dist.density(x)?;
        if !f.is_finite() {
            return Err(Error::domain(format!("density is unbounded at {x}; use the c.d.f. scheme")));
        }
        Ok(f)
    };

    // Each atom belongs to the first cell whose closed span (with tolerance) holds it.
    let mut owned: Vec<Vec<Atom>> = vec![Vec::new(); n + 1];
    for atom in dist.atoms() {
        let k = xs[1..].partition_point(|&x| x + tol < atom.location) + 1;
        owned[k.min(n)].push(atom);
    }

    let mut out = Builder { breakpoints: vec![0.0], values: Vec::new(), atom_intervals: Vec::new() };
    let mut last_atom: Option<f64> = None;
    for k in 1..=n {
        let (x_prev, x_k) = (xs[k - 1], xs[k]);
        let left_atom = last_atom.filter(|&loc| (loc - x_prev).abs() <= tol);
        if owned[k].is_empty() && left_atom.is_none() {
            let target = match scheme {
                Scheme::Cdf => dist.cdf(x_k),
                Scheme::Pdf => out.level() + h * density(x_prev)?,
            };
            out.push(target, x_k, Piece::Cell);
            continue;
        }
        let mut cursor = left_atom.unwrap_or(x_prev);
        for atom in &owned[k] {
            let loc = atom.location;
            let fill = match scheme {
                Scheme::Cdf => dist.cdf_left(loc),
                Scheme::Pdf => out.level() + (loc - cursor).max(0.0) * density(cursor)?,
            };
            out.push(fill, loc, Piece::Fill);
            let top = match scheme {
                Scheme::Cdf => dist.cdf(loc),
                Scheme::Pdf => out.level() + atom.mass,
            };
            out.push(top, loc, Piece::Atom);
            cursor = loc;
            last_atom = Some(loc);
        }
        let anchor = last_atom.expect("skipped cell always borders an atom");
        let fill = match scheme {
            Scheme::Cdf => dist.cdf(x_k),
            Scheme::Pdf => out.level() + (x_k - cursor).max(0.0) * density(cursor)?,
        };
        out.push(fill, anchor, Piece::Fill);
    }

    if scheme == Scheme::Cdf {
        if let Some(last) = out.breakpoints.last_mut() {
            if (*last - 1.0).abs() < 1e-9 {
                *last = 1.0;
            }
        }
    }
    if out.values.is_empty() {
        return Err(Error::domain("discretization carries no mass"));
    }
    Ok(StepQuantile { breakpoints: out.breakpoints, values: out.values, atom_intervals: out.atom_intervals })
}

/// `∫ |linear(u) - 0| du` over a cell of width `w` whose endpoint values are `v0`, `v1`.
fn abs_linear_integral(v0: f64, v1: f64, w: f64) -> f64 {
    if v0 * v1 >= 0.0 {
        0.5 * w * (v0 + v1).abs()
    } else {
        0.5 * w * (v0 * v0 + v1 * v1) / (v0.abs() + v1.abs())
    }
}

/// Quantile evaluated strictly inside `(lo, hi)`, so jumps at cell ends never leak in.
fn inner_quantile(dist: &Distribution, u: f64, lo: f64, hi: f64) -> f64 {
    let top = hi.min(1.0 - f64::EPSILON / 2.0).next_down().max(lo.next_up());
    dist.quantile_unchecked(u.clamp(lo.next_up().max(f64::MIN_POSITIVE), top))
}

/// `∫_{lo}^{hi} |q(u) - c| du` on a cell where `q` has no jumps or kinks inside.
fn cell_gap(dist: &Distribution, affine: bool, lo: f64, hi: f64, c: f64) -> f64 {
    let w = hi - lo;
    if !(w > 0.0) {
        return 0.0;
    }
    if affine {
        let qa = inner_quantile(dist, lo + 0.25 * w, lo, hi);
        let qb = inner_quantile(dist, lo + 0.75 * w, lo, hi);
        let half = 0.5 * (qb - qa);
        return abs_linear_integral(qa - half - c, qb + half - c, w);
    }
    let g = |u: f64| (inner_quantile(dist, u, lo, hi) - c).abs();
    // |q - c| has a kink where q crosses c; split there so Simpson sees smooth pieces.
    let root = dist.cdf(c);
    if root > lo && root < hi {
        adaptive_simpson(&g, lo, root, L1_CELL_TOL) + adaptive_simpson(&g, root, hi, L1_CELL_TOL)
    } else {
        adaptive_simpson(&g, lo, hi, L1_CELL_TOL)
    }
}

/// Sorted cut points; a cut with no representable level strictly between it
/// and `hi` is dropped, so every cell has an interior to sample.
fn merged_cuts(mut cuts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    let top = hi.min(1.0 - f64::EPSILON / 2.0);
    cuts.retain(|&u| u > lo && u.next_up() < top);
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// `∫_{lo}^{hi} |q(u) - q_n(u)| du`, cell by cell on the merged partition.
pub fn gap_integral(dist: &Distribution, sq: &StepQuantile, lo: f64, hi: f64) -> f64 {
    let steps = sq.unit_steps();
    let mut cuts = sq.unit_breaks();
    cuts.extend(dist.quantile_breaks());
    let cuts = merged_cuts(cuts, lo, hi);
    let affine = dist.has_piecewise_affine_quantile();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let j = steps.partition_point(|s| s.1 < mid).min(steps.len() - 1);
            cell_gap(dist, affine, w[0], w[1], steps[j].2)
        })
        .sum()
}

/// `‖q - q_n‖₁` over `(0, 1)`.
pub fn l1_distance(dist: &Distribution, sq: &StepQuantile) -> f64 {
    gap_integral(dist, sq, 0.0, 1.0)
}

/// `max(∫_0^δ |q_n - q|, ∫_{1-δ}^1 |q_n - q|)`.
pub fn tail_defect(dist: &Distribution, sq: &StepQuantile, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    Ok(gap_integral(dist, sq, 0.0, delta).max(gap_integral(dist, sq, 1.0 - delta, 1.0)))
}

/// `‖q_a - q_b‖₁` between two laws, by adaptive quadrature between their breaks.
pub fn quantile_l1(a: &Distribution, b: &Distribution) -> f64 {
    let mut cuts = a.quantile_breaks();
    cuts.extend(b.quantile_breaks());
    let cuts = merged_cuts(cuts, 0.0, 1.0);
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let g = |u: f64| (inner_quantile(a, u, lo, hi) - inner_quantile(b, u, lo, hi)).abs();
            adaptive_simpson(&g, lo, hi, L1_CELL_TOL)
        })
        .sum()
}

/// `‖q_n - q_m‖₁` between two step quantiles, exact.
pub fn step_l1_distance(a: &StepQuantile, b: &StepQuantile) -> f64 {
    let (sa, sb) = (a.unit_steps(), b.unit_steps());
    let mut cuts: Vec<f64> = a.unit_breaks();
    cuts.extend(b.unit_breaks());
    let cuts = merged_cuts(cuts, 0.0, 1.0);
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let ja = sa.partition_point(|s| s.1 < mid).min(sa.len() - 1);
            let jb = sb.partition_point(|s| s.1 < mid).min(sb.len() - 1);
            (w[1] - w[0]) * (sa[ja].2 - sb[jb].2).abs()
        })
        .sum()
}

/// Bound with the density-based constants: `alpha/n + beta/n²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedBound {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBound {
    /// `(b - a)/n + varpi`.
    pub bound: f64,
    /// Atom correction; zero for atomless laws.
    pub varpi: f64,
    /// Present when the density is bounded between atoms.
    pub refined: Option<RefinedBound>,
}

const SUP_SAMPLES: usize = 4096;

/// Sampled supremum of the density on the open interval `(lo, hi)`.
fn density_sup(dist: &Distribution, lo: f64, hi: f64) -> f64 {
    if !dist.has_density() {
        return 0.0;
    }
    let w = hi - lo;
    (0..SUP_SAMPLES)
        .map(|i| {
            let x = lo + w * (i as f64 + 0.5) / SUP_SAMPLES as f64;
            dist.density(x).unwrap_or(0.0)
        })
        .chain([lo.next_up(), hi.next_down()].into_iter().map(|x| dist.density(x).unwrap_or(0.0)))
        .fold(0.0, f64::max)
}

/// L¹ rate bound `(b - a)/n + varpi` for the grid scheme.
///
/// `varpi` sums, for each atom, the continuous mass within one grid step on
/// either side weighted by the largest `|q|` over that window. Windows are
/// only counted on sides where the atom does not sit on the support edge.
pub fn rate_bound(dist: &Distribution, n: usize) -> Result<RateBound> {
    let (a, b) = dist.support();
    if !dist.is_bounded() {
        return Err(Error::UnboundedSupport { a, b });
    }
    if n == 0 {
        return Err(Error::domain("rate bound needs n >= 1"));
    }
    let h = (b - a) / n as f64;
    let tol = ATOM_COLLISION_TOL * (b - a).max(f64::MIN_POSITIVE);
    let atoms = dist.atoms();
    let mut ends = vec![a];
    ends.extend(atoms.iter().map(|at| at.location));
    ends.push(b);
    let s = atoms.len();

    let mut varpi = 0.0;
    let mut sup_weighted = 0.0;
    let mut sup_total = 0.0;
    let mut bounded = true;
    for i in 1..=s + 1 {
        let (left_end, right_end) = (ends[i - 1], ends[i]);
        if right_end - left_end <= tol {
            continue;
        }
        if i <= s {
            let weight = right_end.abs().max((right_end - h).abs());
            varpi += weight * (dist.cdf_left(right_end) - dist.cdf(right_end - h)).max(0.0);
        }
        if i >= 2 {
            let weight = left_end.abs().max((left_end + h).abs());
            varpi += weight * (dist.cdf(left_end + h) - dist.cdf(left_end)).max(0.0);
        }
        let sup = density_sup(dist, left_end, right_end);
        if !sup.is_finite() {
            bounded = false;
        }
        sup_weighted += sup * (right_end.abs() + left_end.abs());
        sup_total += sup;
    }
    let refined = bounded.then(|| {
        let alpha = (b - a) * (1.0 + sup_weighted);
        let beta = (b - a).powi(2) * sup_total;
        let nf = n as f64;
        RefinedBound { alpha, beta, value: alpha / nf + beta / (nf * nf) }
    });
    Ok(RateBound { bound: h + varpi, varpi, refined })
}
