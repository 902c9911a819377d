//! Probability laws on the real line.
//!
//! A [`Distribution`] is a [`Family`] (written in its own coordinate `y`)
//! pushed through an increasing affine map `x = scale * y + offset`. Centering
//! and support normalization only touch the affine part, so closed forms for
//! the c.d.f., quantile and mean survive both operations.
//!
//! The quantile is the left-continuous generalized inverse
//! `q(u) = inf{x : F(x) >= u}`; [`Distribution::strict_quantile`] is the
//! right-continuous variant `q+(u) = inf{x : F(x) > u}`. The two differ only at
//! levels where `F` is flat.

use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, bisect_first_true};

/// Absolute tolerance, in `x`, of quantiles found by bisection.
pub const QUANTILE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// The parametric families understood by the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Normal restricted to `[lo, hi]`; either bound may be infinite.
    TruncatedNormal {
        mean: f64,
        std: f64,
        lo: f64,
        hi: f64,
    },
    /// Uniform on the union of two disjoint intervals, mass proportional to length.
    TwoPieceUniform {
        first: (f64, f64),
        second: (f64, f64),
    },
    /// Pure atoms, locations strictly increasing, masses summing to one.
    Discrete {
        atoms: Vec<Atom>,
    },
    Mixture {
        components: Vec<(f64, Distribution)>,
    },
    /// `X 1{|X| <= radius}`: mass outside `[-radius, radius]` is moved to 0.
    Truncated {
        base: Box<Distribution>,
        radius: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Uniform { .. } => "uniform",
            Family::Beta { .. } => "beta",
            Family::Exponential { .. } => "exponential",
            Family::TruncatedNormal { .. } => "truncated-normal",
            Family::TwoPieceUniform { .. } => "two-piece-uniform",
            Family::Discrete { .. } => "discrete",
            Family::Mixture { .. } => "mixture",
            Family::Truncated { .. } => "truncated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    family: Family,
    scale: f64,
    offset: f64,
    mean_shift: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn check_level(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("quantile level {u} is outside (0, 1)")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!("{name} must be finite, got {v}")))
    }
}

impl Distribution {
    fn from_family(family: Family) -> Self {
        Distribution { family, scale: 1.0, offset: 0.0, mean_shift: 0.0 }
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite("lo", lo)?;
        finite("hi", hi)?;
        if !(lo < hi) {
            return Err(Error::InvalidDistribution(format!("uniform needs lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self::from_family(Family::Uniform { lo, hi }))
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "beta shape parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(Self::from_family(Family::Beta { alpha, beta }))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidDistribution(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self::from_family(Family::Exponential { rate }))
    }

    pub fn truncated_normal(mean: f64, std: f64, lo: f64, hi: f64) -> Result<Self> {
        finite("mean", mean)?;
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::InvalidDistribution(format!("std must be positive, got {std}")));
        }
        if !(lo < hi) || lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidDistribution(format!("truncation bounds need lo < hi, got ({lo}, {hi})")));
        }
        let z = std_normal_cdf((hi - mean) / std) - std_normal_cdf((lo - mean) / std);
        if !(z > 1e-300) {
            return Err(Error::InvalidDistribution("truncation window carries no normal mass".into()));
        }
        Ok(Self::from_family(Family::TruncatedNormal { mean, std, lo, hi }))
    }

    pub fn normal(mean: f64, std: f64) -> Result<Self> {
        Self::truncated_normal(mean, std, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn two_piece_uniform(first: (f64, f64), second: (f64, f64)) -> Result<Self> {
        for v in [first.0, first.1, second.0, second.1] {
            finite("piece bound", v)?;
        }
        if !(first.0 < first.1 && first.1 <= second.0 && second.0 < second.1) {
            return Err(Error::InvalidDistribution(format!(
                "two-piece uniform needs a1 < b1 <= a2 < b2, got {first:?} and {second:?}"
            )));
        }
        Ok(Self::from_family(Family::TwoPieceUniform { first, second }))
    }

    /// Pure-atom law from `(location, mass)` pairs; masses must sum to one.
    pub fn discrete(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms.into_iter().map(|(location, mass)| Atom { location, mass }).collect();
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("discrete law needs at least one atom".into()));
        }
        for a in &atoms {
            finite("atom location", a.location)?;
            if !(a.mass > 0.0 && a.mass <= 1.0) {
                return Err(Error::InvalidDistribution(format!("atom mass {} is outside (0, 1]", a.mass)));
            }
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        if atoms.windows(2).any(|w| w[0].location == w[1].location) {
            return Err(Error::InvalidDistribution("atom locations must be distinct".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("atom masses sum to {total}, expected 1")));
        }
        Ok(Self::from_family(Family::Discrete { atoms }))
    }

    /// Convex combination of laws; weights must be positive and sum to one.
    pub fn mixture(components: Vec<(f64, Distribution)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("mixture needs at least one component".into()));
        }
        if components.iter().any(|(w, _)| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::InvalidDistribution("mixture weights must lie in (0, 1]".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(Self::from_family(Family::Mixture { components }))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Total shift applied by [`Distribution::center`] calls so far.
    pub fn mean_shift(&self) -> f64 {
        self.mean_shift
    }

    fn to_y(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    fn to_x(&self, y: f64) -> f64 {
        self.scale * y + self.offset
    }

    // ---- c.d.f. ----

    /// `F(x) = mu((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.family_cdf(self.to_y(x), false)
    }

    /// Left limit `F(x-) = mu((-inf, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.family_cdf(self.to_y(x), true)
    }

    fn family_cdf(&self, y: f64, left: bool) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        let v = match &self.family {
            Family::Uniform { lo, hi } => ((y - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Beta { alpha, beta } => {
                if y <= 0.0 {
                    0.0
                } else if y >= 1.0 {
                    1.0
                } else {
                    beta_reg(*alpha, *beta, y)
                }
            }
            Family::Exponential { rate } => {
                if y <= 0.0 {
                    0.0
                } else {
                    -(-rate * y).exp_m1()
                }
            }
            Family::TruncatedNormal { mean, std, lo, hi } => {
                if y <= *lo {
                    0.0
                } else if y >= *hi {
                    1.0
                } else {
                    let plo = std_normal_cdf((lo - mean) / std);
                    let phi = std_normal_cdf((hi - mean) / std);
                    ((std_normal_cdf((y - mean) / std) - plo) / (phi - plo)).clamp(0.0, 1.0)
                }
            }
            Family::TwoPieceUniform { first, second } => {
                let total = (first.1 - first.0) + (second.1 - second.0);
                if y <= first.0 {
                    0.0
                } else if y < first.1 {
                    (y - first.0) / total
                } else if y <= second.0 {
                    (first.1 - first.0) / total
                } else if y < second.1 {
                    ((first.1 - first.0) + (y - second.0)) / total
                } else {
                    1.0
                }
            }
            Family::Discrete { atoms } => {
                let mut acc = 0.0;
                for (i, a) in atoms.iter().enumerate() {
                    let included = if left { a.location < y } else { a.location <= y };
                    if !included {
                        break;
                    }
                    acc = if i + 1 == atoms.len() { 1.0 } else { acc + a.mass };
                }
                acc
            }
            Family::Mixture { components } => components
                .iter()
                .map(|(w, d)| w * if left { d.cdf_left(y) } else { d.cdf(y) })
                .sum::<f64>()
                .clamp(0.0, 1.0),
            Family::Truncated { base, radius } => {
                let n = *radius;
                let tail_left = base.cdf_left(-n);
                let inside = |v: f64| if left { v > -n } else { v >= -n };
                let upper = |v: f64| if left { v > 0.0 } else { v >= 0.0 };
                let beyond = |v: f64| if left { v > n } else { v >= n };
                let fy = if left { base.cdf_left(y) } else { base.cdf(y) };
                if !inside(y) {
                    0.0
                } else if beyond(y) {
                    1.0
                } else if !upper(y) {
                    fy - tail_left
                } else {
                    fy + 1.0 - base.cdf(n)
                }
                .clamp(0.0, 1.0)
            }
        };
        v
    }

    // ---- quantiles ----

    /// Left-continuous quantile `q(u) = inf{x : F(x) >= u}`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(self.quantile_unchecked(u))
    }

    /// Strict pseudo-inverse `q+(u) = inf{x : F(x) > u}`.
    pub fn strict_quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(self.to_x(self.family_quantile(u, true)))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        self.to_x(self.family_quantile(u, false))
    }

    fn family_quantile(&self, u: f64, strict: bool) -> f64 {
        match &self.family {
            Family::Uniform { lo, hi } => lo + u * (hi - lo),
            Family::Beta { alpha, beta } => {
                let pred = |y: f64| {
                    let f = if y <= 0.0 {
                        0.0
                    } else if y >= 1.0 {
                        1.0
                    } else {
                        beta_reg(*alpha, *beta, y)
                    };
                    if strict {
                        f > u
                    } else {
                        f >= u
                    }
                };
                bisect_first_true(pred, 0.0, 1.0, QUANTILE_TOL)
            }
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::TruncatedNormal { mean, std, lo, hi } => {
                let lo_b = if lo.is_finite() { *lo } else { mean - 40.0 * std };
                let hi_b = if hi.is_finite() { *hi } else { mean + 40.0 * std };
                let tol = QUANTILE_TOL * std.max(1.0);
                bisect_first_true(
                    |y| {
                        let f = self.family_cdf(y, false);
                        if strict {
                            f > u
                        } else {
                            f >= u
                        }
                    },
                    lo_b,
                    hi_b,
                    tol,
                )
            }
            Family::TwoPieceUniform { first, second } => {
                let total = (first.1 - first.0) + (second.1 - second.0);
                let w1 = (first.1 - first.0) / total;
                let in_first = if strict { u < w1 } else { u <= w1 };
                if in_first {
                    first.0 + u * total
                } else {
                    second.0 + (u - w1) * total
                }
            }
            Family::Discrete { atoms } => {
                let mut acc = 0.0;
                for (i, a) in atoms.iter().enumerate() {
                    acc = if i + 1 == atoms.len() { 1.0 } else { acc + a.mass };
                    let hit = if strict { acc > u } else { acc >= u };
                    if hit {
                        return a.location;
                    }
                }
                atoms.last().map(|a| a.location).unwrap_or(f64::NAN)
            }
            Family::Mixture { components } => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for (_, d) in components {
                    let q = d.to_x(d.family_quantile(u, strict));
                    lo = lo.min(q);
                    hi = hi.max(q);
                }
                let scale = lo.abs().max(hi.abs()).max(1.0);
                let pred = |y: f64| {
                    let f = self.family_cdf(y, false);
                    if strict {
                        f > u
                    } else {
                        f >= u
                    }
                };
                let y = bisect_first_true(pred, lo, hi, QUANTILE_TOL * scale);
                self.snap_to_atom(y, u, strict, 1e3 * QUANTILE_TOL * scale)
            }
            Family::Truncated { base, radius } => {
                let n = *radius;
                let left_tail = base.cdf_left(-n);
                let lower_end = base.cdf_left(0.0) - left_tail;
                let upper_start = base.cdf(0.0) + 1.0 - base.cdf(n);
                let below = if strict { u < lower_end } else { u <= lower_end };
                let above = if strict { u >= upper_start } else { u > upper_start };
                let eval = |v: f64| {
                    base.to_x(base.family_quantile(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0), strict))
                };
                if below {
                    eval(u + left_tail)
                } else if above {
                    eval(u + base.cdf(n) - 1.0)
                } else {
                    0.0
                }
            }
        }
    }

    /// Bisection lands within tolerance of an atom; return the atom itself.
    fn snap_to_atom(&self, y: f64, u: f64, strict: bool, tol: f64) -> f64 {
        for a in self.family_atoms() {
            if (a.location - y).abs() <= tol {
                let f = self.family_cdf(a.location, false);
                let fl = self.family_cdf(a.location, true);
                let ok = if strict { f > u && fl <= u } else { f >= u && fl < u };
                if ok {
                    return a.location;
                }
            }
        }
        y
    }

    /// Inverse-transform sampling: maps each uniform level through the quantile.
    pub fn sample(&self, uniforms: &[f64]) -> Result<Vec<f64>> {
        uniforms.iter().map(|&u| self.quantile(u)).collect()
    }

    // ---- structure ----

    fn family_atoms(&self) -> Vec<Atom> {
        match &self.family {
            Family::Discrete { atoms } => atoms.clone(),
            Family::Mixture { components } => {
                let mut all: Vec<Atom> = Vec::new();
                for (w, d) in components {
                    for a in d.atoms() {
                        match all.iter_mut().find(|b| b.location == a.location) {
                            Some(b) => b.mass += w * a.mass,
                            None => all.push(Atom { location: a.location, mass: w * a.mass }),
                        }
                    }
                }
                all.sort_by(|a, b| a.location.total_cmp(&b.location));
                all
            }
            Family::Truncated { base, radius } => {
                let n = *radius;
                let lumped = base.cdf_left(-n) + 1.0 - base.cdf(n);
                let mut out: Vec<Atom> = Vec::new();
                let mut zero = lumped;
                for a in base.atoms() {
                    if a.location == 0.0 {
                        zero += a.mass;
                    } else if a.location.abs() <= n {
                        out.push(a);
                    }
                }
                if zero > 0.0 {
                    out.push(Atom { location: 0.0, mass: zero });
                }
                out.sort_by(|a, b| a.location.total_cmp(&b.location));
                out
            }
            _ => Vec::new(),
        }
    }

    /// Atoms in increasing location order.
    pub fn atoms(&self) -> Vec<Atom> {
        self.family_atoms().into_iter().map(|a| Atom { location: self.to_x(a.location), mass: a.mass }).collect()
    }

    fn family_support(&self) -> (f64, f64) {
        match &self.family {
            Family::Uniform { lo, hi } => (*lo, *hi),
            Family::Beta { .. } => (0.0, 1.0),
            Family::Exponential { .. } => (0.0, f64::INFINITY),
            Family::TruncatedNormal { lo, hi, .. } => (*lo, *hi),
            Family::TwoPieceUniform { first, second } => (first.0, second.1),
            Family::Discrete { atoms } => (atoms[0].location, atoms[atoms.len() - 1].location),
            Family::Mixture { components } => {
                components.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (_, d)| {
                    let (a, b) = d.support();
                    (acc.0.min(a), acc.1.max(b))
                })
            }
            Family::Truncated { base, radius } => {
                let (a, b) = base.support();
                let (mut a, mut b) = (a.max(-radius), b.min(*radius));
                if self.family_atoms().iter().any(|at| at.location == 0.0) {
                    a = a.min(0.0);
                    b = b.max(0.0);
                }
                (a, b)
            }
        }
    }

    /// Closed support hull `(a, b)`; endpoints may be infinite.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.family_support();
        (self.to_x(a), self.to_x(b))
    }

    pub fn is_bounded(&self) -> bool {
        let (a, b) = self.support();
        a.is_finite() && b.is_finite()
    }

    /// Whether the law has an absolutely continuous part.
    pub fn has_density(&self) -> bool {
        match &self.family {
            Family::Discrete { .. } => false,
            Family::Mixture { components } => components.iter().any(|(_, d)| d.has_density()),
            Family::Truncated { base, .. } => base.has_density(),
            _ => true,
        }
    }

    /// Density of the absolutely continuous part (atoms excluded), closed at
    /// support endpoints. Pure-atom laws give `UnsupportedFamily`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !self.has_density() {
            return Err(Error::UnsupportedFamily { family: self.family.name(), what: "a density" });
        }
        Ok(self.density_part(x))
    }

    fn density_part(&self, x: f64) -> f64 {
        let y = self.to_y(x);
        let f = match &self.family {
            Family::Uniform { lo, hi } => {
                if y >= *lo && y <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Family::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&y) {
                    0.0
                } else {
                    let t1 = if *alpha == 1.0 { 0.0 } else { (alpha - 1.0) * y.ln() };
                    let t2 = if *beta == 1.0 { 0.0 } else { (beta - 1.0) * (-y).ln_1p() };
                    (t1 + t2 - ln_beta(*alpha, *beta)).exp()
                }
            }
            Family::Exponential { rate } => {
                if y >= 0.0 {
                    rate * (-rate * y).exp()
                } else {
                    0.0
                }
            }
            Family::TruncatedNormal { mean, std, lo, hi } => {
                if y < *lo || y > *hi {
                    0.0
                } else {
                    let z = std_normal_cdf((hi - mean) / std) - std_normal_cdf((lo - mean) / std);
                    std_normal_pdf((y - mean) / std) / (std * z)
                }
            }
            Family::TwoPieceUniform { first, second } => {
                let total = (first.1 - first.0) + (second.1 - second.0);
                if (y >= first.0 && y <= first.1) || (y >= second.0 && y <= second.1) {
                    1.0 / total
                } else {
                    0.0
                }
            }
            Family::Discrete { .. } => 0.0,
            Family::Mixture { components } => components.iter().map(|(w, d)| w * d.density_part(y)).sum(),
            Family::Truncated { base, radius } => {
                if y.abs() <= *radius {
                    base.density_part(y)
                } else {
                    0.0
                }
            }
        };
        f / self.scale
    }

    /// Locations where the c.d.f. is not smooth: support ends, atoms, piece
    /// boundaries. The quantile is smooth between the matching levels.
    pub fn kinks(&self) -> Vec<f64> {
        let mut ys: Vec<f64> = match &self.family {
            Family::Uniform { lo, hi } => vec![*lo, *hi],
            Family::Beta { .. } => vec![0.0, 1.0],
            Family::Exponential { .. } => vec![0.0],
            Family::TruncatedNormal { lo, hi, .. } => vec![*lo, *hi],
            Family::TwoPieceUniform { first, second } => vec![first.0, first.1, second.0, second.1],
            Family::Discrete { atoms } => atoms.iter().map(|a| a.location).collect(),
            Family::Mixture { components } => components.iter().flat_map(|(_, d)| d.kinks()).collect(),
            Family::Truncated { base, radius } => {
                let mut k: Vec<f64> = base.kinks().into_iter().filter(|v| v.abs() <= *radius).collect();
                k.extend([-radius, 0.0, *radius]);
                k
            }
        };
        ys.retain(|v| v.is_finite());
        let mut xs: Vec<f64> = ys.into_iter().map(|y| self.to_x(y)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// Levels in (0, 1) where the quantile may jump or kink.
    pub fn quantile_breaks(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = self
            .kinks()
            .into_iter()
            .flat_map(|x| [self.cdf_left(x), self.cdf(x)])
            .filter(|u| *u > 0.0 && *u < 1.0)
            .collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
    }

    /// True when the quantile is affine between consecutive [`Self::quantile_breaks`].
    pub fn has_piecewise_affine_quantile(&self) -> bool {
        match &self.family {
            Family::Uniform { .. } | Family::TwoPieceUniform { .. } | Family::Discrete { .. } => true,
            Family::Beta { .. } | Family::Exponential { .. } | Family::TruncatedNormal { .. } => false,
            // sums of piecewise-linear c.d.f.s stay piecewise linear
            Family::Mixture { components } => components.iter().all(|(_, d)| d.has_piecewise_affine_quantile()),
            Family::Truncated { base, .. } => base.has_piecewise_affine_quantile(),
        }
    }

    // ---- moments ----

    /// `mu([lo, hi])`.
    pub fn prob_closed(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        (self.cdf(hi) - self.cdf_left(lo)).max(0.0)
    }

    /// `∫_{[lo, hi]} x dmu(x)` in closed form.
    pub fn partial_mean(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let (ylo, yhi) = (self.to_y(lo), self.to_y(hi));
        self.scale * self.family_partial_mean(ylo, yhi) + self.offset * self.prob_closed(lo, hi)
    }

    fn family_partial_mean(&self, lo: f64, hi: f64) -> f64 {
        match &self.family {
            Family::Uniform { lo: a, hi: b } => {
                let (c, d) = (lo.max(*a), hi.min(*b));
                if d <= c {
                    0.0
                } else {
                    (d * d - c * c) / (2.0 * (b - a))
                }
            }
            Family::Beta { alpha, beta } => {
                let (c, d) = (lo.max(0.0), hi.min(1.0));
                if d <= c {
                    return 0.0;
                }
                let reg = |v: f64| {
                    if v <= 0.0 {
                        0.0
                    } else if v >= 1.0 {
                        1.0
                    } else {
                        beta_reg(alpha + 1.0, *beta, v)
                    }
                };
                alpha / (alpha + beta) * (reg(d) - reg(c))
            }
            Family::Exponential { rate } => {
                let (c, d) = (lo.max(0.0), hi);
                if d <= c {
                    return 0.0;
                }
                let anti = |v: f64| if v.is_infinite() { 0.0 } else { -(v + 1.0 / rate) * (-rate * v).exp() };
                anti(d) - anti(c)
            }
            Family::TruncatedNormal { mean, std, lo: a, hi: b } => {
                let (c, d) = (lo.max(*a), hi.min(*b));
                if d <= c {
                    return 0.0;
                }
                let z = std_normal_cdf((b - mean) / std) - std_normal_cdf((a - mean) / std);
                let (zc, zd) = ((c - mean) / std, (d - mean) / std);
                (mean * (std_normal_cdf(zd) - std_normal_cdf(zc)) + std * (std_normal_pdf(zc) - std_normal_pdf(zd))) / z
            }
            Family::TwoPieceUniform { first, second } => {
                let total = (first.1 - first.0) + (second.1 - second.0);
                let piece = |(a, b): (f64, f64)| {
                    let (c, d) = (lo.max(a), hi.min(b));
                    if d <= c {
                        0.0
                    } else {
                        (d * d - c * c) / (2.0 * total)
                    }
                };
                piece(*first) + piece(*second)
            }
            Family::Discrete { atoms } => {
                atoms.iter().filter(|a| a.location >= lo && a.location <= hi).map(|a| a.location * a.mass).sum()
            }
            Family::Mixture { components } => components.iter().map(|(w, d)| w * d.partial_mean(lo, hi)).sum(),
            // The lumped mass sits at 0 and contributes nothing to the first moment.
            Family::Truncated { base, radius } => base.partial_mean(lo.max(-radius), hi.min(*radius)),
        }
    }

    pub fn mean(&self) -> f64 {
        self.partial_mean(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn variance(&self) -> f64 {
        let fam_var = match &self.family {
            Family::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Family::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
            Family::Exponential { rate } => 1.0 / (rate * rate),
            Family::TruncatedNormal { mean, std, lo, hi } => {
                let (a, b) = ((lo - mean) / std, (hi - mean) / std);
                let z = std_normal_cdf(b) - std_normal_cdf(a);
                let (pa, pb) = (std_normal_pdf(a), std_normal_pdf(b));
                let ta = if a.is_finite() { a * pa } else { 0.0 };
                let tb = if b.is_finite() { b * pb } else { 0.0 };
                std * std * (1.0 + (ta - tb) / z - ((pa - pb) / z).powi(2))
            }
            Family::TwoPieceUniform { first, second } => {
                let total = (first.1 - first.0) + (second.1 - second.0);
                let m2 = |(a, b): (f64, f64)| (b * b * b - a * a * a) / (3.0 * total);
                let m1 = |(a, b): (f64, f64)| (b * b - a * a) / (2.0 * total);
                m2(*first) + m2(*second) - (m1(*first) + m1(*second)).powi(2)
            }
            Family::Discrete { atoms } => {
                let m: f64 = atoms.iter().map(|a| a.location * a.mass).sum();
                atoms.iter().map(|a| a.mass * (a.location - m).powi(2)).sum()
            }
            Family::Mixture { components } => {
                let m: f64 = components.iter().map(|(w, d)| w * d.mean()).sum();
                components.iter().map(|(w, d)| w * (d.variance() + (d.mean() - m).powi(2))).sum()
            }
            Family::Truncated { .. } => {
                // Bounded law: integrate (q - m)^2 over the quantile levels.
                let m = self.family_partial_mean(f64::NEG_INFINITY, f64::INFINITY);
                let mut cuts = vec![0.0];
                cuts.extend(self.quantile_breaks());
                cuts.push(1.0);
                cuts.windows(2)
                    .map(|w| {
                        let (a, b) = (w[0], w[1]);
                        let g = |u: f64| {
                            let v = u.clamp(a.next_up(), b.next_down().max(a.next_up()));
                            (self.family_quantile(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0), false) - m)
                                .powi(2)
                        };
                        adaptive_simpson(&g, a, b, 1e-12)
                    })
                    .sum()
            }
        };
        fam_var * self.scale * self.scale
    }

    // ---- transformations ----

    /// Shift by `-mean` so the law is centered; records the shift.
    pub fn center(&self) -> Distribution {
        let m = self.mean();
        let mut out = self.clone();
        out.offset -= m;
        out.mean_shift += -m;
        out
    }

    /// Law of `alpha X + beta` for `alpha > 0`.
    pub fn affine(&self, alpha: f64, beta: f64) -> Result<Distribution> {
        if !(alpha > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::domain(format!("affine map needs finite alpha > 0, got ({alpha}, {beta})")));
        }
        let mut out = self.clone();
        out.scale *= alpha;
        out.offset = alpha * out.offset + beta;
        Ok(out)
    }

    /// Law of `X 1{|X| <= n}`: the mass outside `[-n, n]` is lumped at 0.
    pub fn truncate(&self, n: f64) -> Result<Distribution> {
        if !(n > 0.0) || n.is_nan() {
            return Err(Error::domain(format!("truncation radius must be positive, got {n}")));
        }
        let (a, b) = self.support();
        if a >= -n && b <= n {
            return Ok(self.clone());
        }
        let mut out = Self::from_family(Family::Truncated { base: Box::new(self.clone()), radius: n });
        out.mean_shift = self.mean_shift;
        Ok(out)
    }
}
