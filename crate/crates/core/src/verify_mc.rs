//! Brownian exit-point sampler for a polygonal domain and the
//! Kolmogorov-Smirnov comparison against the target law.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{BoundaryPoint, BoundaryPolyline};
use crate::distributions::Distribution;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

/// Fraction of truncated walks above which the result carries a warning.
pub const TRUNCATION_WARNING: f64 = 0.01;

/// Edges whose horizontal extent exceeds this fraction of the x-range are
/// caps closing a clipped spike, not sampled boundary.
pub const CAP_FRACTION: f64 = 0.05;

const ON_EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pt {
    x: f64,
    y: f64,
}

fn orient(a: Pt, b: Pt, c: Pt) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn proper_crossing(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Parameter along `a -> b` where it crosses segment `c -> d`, if it does.
fn crossing_param(a: Pt, b: Pt, c: Pt, d: Pt) -> Option<f64> {
    let r = Pt { x: b.x - a.x, y: b.y - a.y };
    let s = Pt { x: d.x - c.x, y: d.y - c.y };
    let den = r.x * s.y - r.y * s.x;
    if den == 0.0 {
        return None;
    }
    let qp = Pt { x: c.x - a.x, y: c.y - a.y };
    let t = (qp.x * s.y - qp.y * s.x) / den;
    let u = (qp.x * r.y - qp.y * r.x) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some(t)
}

fn segment_distance(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((p.x - a.x - t * dx).powi(2) + (p.y - a.y - t * dy).powi(2)).sqrt()
}

/// Closed polygon with a uniform bucket grid for fast even-odd queries.
///
/// Collinear overlapping edges (zero-width slits) are accepted; only proper
/// crossings between non-adjacent edges count as self-intersection.
#[derive(Debug, Clone)]
pub struct Polygon {
    vertices: Vec<Pt>,
    cap: Vec<bool>,
    x0: f64,
    y0: f64,
    cw: f64,
    ch: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<u32>>,
    /// Even-odd status of each cell centre; valid for edge-free cells.
    centre_inside: Vec<bool>,
}

impl Polygon {
    /// Builds the polygon from the polyline vertices in parameter order.
    pub fn from_polyline(bp: &BoundaryPolyline) -> Result<Self> {
        let mut vertices: Vec<Pt> = Vec::with_capacity(bp.len());
        for p in &bp.points {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Topology("non-finite boundary vertex".into()));
            }
            let v = Pt { x: p.x, y: p.y };
            if vertices.last() != Some(&v) {
                vertices.push(v);
            }
        }
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::Topology(format!("polygon needs at least 3 distinct vertices, got {}", vertices.len())));
        }
        let k = vertices.len();
        let (mut xmin, mut xmax, mut ymin, mut ymax) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for v in &vertices {
            xmin = xmin.min(v.x);
            xmax = xmax.max(v.x);
            ymin = ymin.min(v.y);
            ymax = ymax.max(v.y);
        }
        let x_span = xmax - xmin;
        let cap = (0..k).map(|i| (vertices[(i + 1) % k].x - vertices[i].x).abs() > CAP_FRACTION * x_span).collect();
        let side = ((2.0 * (k as f64).sqrt()) as usize).clamp(8, 512);
        let (cols, rows) = (side, side);
        let pad = 1e-9 * (x_span + (ymax - ymin)).max(1.0);
        let (x0, y0) = (xmin - pad, ymin - pad);
        let cw = (x_span + 2.0 * pad) / cols as f64;
        let ch = (ymax - ymin + 2.0 * pad) / rows as f64;
        let mut poly = Polygon {
            vertices,
            cap,
            x0,
            y0,
            cw,
            ch,
            cols,
            rows,
            cells: vec![Vec::new(); cols * rows],
            centre_inside: vec![false; cols * rows],
        };
        for e in 0..k {
            let (a, b) = poly.edge(e);
            let (c0, r0) = poly.cell_of(a.x.min(b.x), a.y.min(b.y));
            let (c1, r1) = poly.cell_of(a.x.max(b.x), a.y.max(b.y));
            for r in r0..=r1 {
                for c in c0..=c1 {
                    poly.cells[r * cols + c].push(e as u32);
                }
            }
        }
        poly.check_simple()?;
        poly.classify_centres();
        Ok(poly)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn edge(&self, e: usize) -> (Pt, Pt) {
        (self.vertices[e], self.vertices[(e + 1) % self.vertices.len()])
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let c = ((x - self.x0) / self.cw).floor().clamp(0.0, (self.cols - 1) as f64) as usize;
        let r = ((y - self.y0) / self.ch).floor().clamp(0.0, (self.rows - 1) as f64) as usize;
        (c, r)
    }

    fn col_bounds(&self, c: usize) -> (f64, f64) {
        let lo = self.x0 + c as f64 * self.cw;
        let hi = if c + 1 == self.cols { f64::INFINITY } else { self.x0 + (c + 1) as f64 * self.cw };
        (lo, hi)
    }

    fn check_simple(&self) -> Result<()> {
        let k = self.vertices.len();
        for cell in &self.cells {
            for (i, &e) in cell.iter().enumerate() {
                for &f in &cell[i + 1..] {
                    let (e, f) = (e as usize, f as usize);
                    let gap = e.abs_diff(f);
                    if gap <= 1 || gap == k - 1 {
                        continue;
                    }
                    let (a, b) = self.edge(e);
                    let (c, d) = self.edge(f);
                    if proper_crossing(a, b, c, d) {
                        return Err(Error::Topology(format!("edges {e} and {f} cross near ({:.6}, {:.6})", a.x, a.y)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Horizontal-line crossing abscissa of edge `e` at height `y`, half-open in y.
    fn crossing_x(&self, e: usize, y: f64) -> Option<f64> {
        let (a, b) = self.edge(e);
        if (a.y > y) == (b.y > y) {
            return None;
        }
        Some(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y))
    }

    fn classify_centres(&mut self) {
        for r in 0..self.rows {
            let yc = self.y0 + (r as f64 + 0.5) * self.ch;
            let mut seen = HashSet::new();
            let mut xs: Vec<f64> = Vec::new();
            for c in 0..self.cols {
                for &e in &self.cells[r * self.cols + c] {
                    if seen.insert(e) {
                        if let Some(x) = self.crossing_x(e as usize, yc) {
                            xs.push(x);
                        }
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for c in 0..self.cols {
                let xc = self.x0 + (c as f64 + 0.5) * self.cw;
                let right = xs.len() - xs.partition_point(|&x| x <= xc);
                self.centre_inside[r * self.cols + c] = right % 2 == 1;
            }
        }
    }

    /// Even-odd test; points within `1e-12` of an edge count as inside.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let outside_box = x < self.x0
            || y < self.y0
            || x > self.x0 + self.cw * self.cols as f64
            || y > self.y0 + self.ch * self.rows as f64;
        if outside_box {
            return false;
        }
        let p = Pt { x, y };
        let (c0, r) = self.cell_of(x, y);
        for &e in &self.cells[r * self.cols + c0] {
            let (a, b) = self.edge(e as usize);
            if segment_distance(p, a, b) <= ON_EDGE_TOL {
                return true;
            }
        }
        let mut parity = false;
        for c in c0..self.cols {
            let idx = r * self.cols + c;
            let cell = &self.cells[idx];
            if cell.is_empty() {
                return parity ^ self.centre_inside[idx];
            }
            let (lo, hi) = self.col_bounds(c);
            let from = if c == c0 { x } else { lo };
            for &e in cell {
                if let Some(xc) = self.crossing_x(e as usize, y) {
                    if xc > from && xc >= lo && xc < hi {
                        parity = !parity;
                    }
                }
            }
        }
        parity
    }

    /// Whether the segment `from -> to` leaves through a cap edge.
    fn exits_through_cap(&self, from: (f64, f64), to: (f64, f64)) -> bool {
        let (a, b) = (Pt { x: from.0, y: from.1 }, Pt { x: to.0, y: to.1 });
        let (c0, r0) = self.cell_of(a.x.min(b.x), a.y.min(b.y));
        let (c1, r1) = self.cell_of(a.x.max(b.x), a.y.max(b.y));
        let mut best: Option<(f64, usize)> = None;
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &e in &self.cells[r * self.cols + c] {
                    let (p, q) = self.edge(e as usize);
                    if let Some(t) = crossing_param(a, b, p, q) {
                        if best.is_none_or(|(bt, _)| t < bt) {
                            best = Some((t, e as usize));
                        }
                    }
                }
            }
        }
        best.is_some_and(|(_, e)| self.cap[e])
    }
}

/// Replaces every cap edge by a vertical channel reaching `±reach`, on the
/// side of the real axis the cap sits on, so clipped spikes stay open.
pub fn open_caps(bp: &BoundaryPolyline, reach: f64) -> BoundaryPolyline {
    let pts = &bp.points;
    let Some((x0, x1)) = bp.x_range() else {
        return bp.clone();
    };
    let limit = CAP_FRACTION * (x1 - x0);
    let mut out = Vec::with_capacity(pts.len() + 8);
    for (i, p) in pts.iter().enumerate() {
        out.push(*p);
        let q = pts[(i + 1) % pts.len()];
        let side = (p.y + q.y).signum();
        if (q.x - p.x).abs() > limit && p.y != 0.0 && q.y != 0.0 && p.y.signum() == q.y.signum() {
            let far = side * reach.max(p.y.abs()).max(q.y.abs());
            out.push(BoundaryPoint { t: p.t, x: p.x, y: far });
            out.push(BoundaryPoint { t: p.t, x: q.x, y: far });
        }
    }
    BoundaryPolyline { points: out, shift: bp.shift, scale: bp.scale }
}

/// Even-odd membership of `(x, y)` in the domain bounded by the polyline.
///
/// Cap edges are treated as openings: the domain continues through them
/// beyond the rendered extent, as the unclipped boundary does.
pub fn point_in_domain(bp: &BoundaryPolyline, x: f64, y: f64) -> Result<bool> {
    let reach = 2.0 * (y.abs() + bp.max_abs_y() + 1.0);
    Ok(Polygon::from_polyline(&open_caps(bp, reach))?.contains(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub walks: usize,
    pub step: f64,
    pub seed: u64,
    pub max_steps: u64,
}

impl McConfig {
    pub fn new(walks: usize, step: f64, seed: u64) -> Self {
        McConfig { walks, step, seed, max_steps: DEFAULT_MAX_STEPS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitSampleSet {
    /// Real parts of the exit points, in walk order.
    pub samples: Vec<f64>,
    /// Walk index of each sample.
    pub walk_ids: Vec<usize>,
    pub seed: u64,
    pub step: f64,
    pub walks: usize,
    pub truncated_walks: usize,
    /// Set when more than 1% of walks were truncated.
    pub warning: bool,
}

impl ExitSampleSet {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn std(&self) -> f64 {
        let m = self.mean();
        let n = self.samples.len() as f64;
        (self.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }
}

enum WalkEnd {
    Exit(f64),
    Truncated,
}

fn run_walk(poly: &Polygon, cfg: &McConfig, index: usize) -> WalkEnd {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let sd = cfg.step.sqrt();
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for _ in 0..cfg.max_steps {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let (nx, ny) = (x + sd * g1, y + sd * g2);
        if !poly.contains(nx, ny) {
            if poly.exits_through_cap((x, y), (nx, ny)) {
                return WalkEnd::Truncated;
            }
            return WalkEnd::Exit(nx);
        }
        x = nx;
        y = ny;
    }
    WalkEnd::Truncated
}

/// Runs `cfg.walks` Euler walks from the origin on an already built polygon.
pub fn simulate_polygon(poly: &Polygon, cfg: &McConfig) -> Result<ExitSampleSet> {
    if cfg.walks == 0 {
        return Err(Error::domain("walks must be >= 1"));
    }
    if !(cfg.step > 0.0 && cfg.step.is_finite()) {
        return Err(Error::domain(format!("step must be positive, got {}", cfg.step)));
    }
    if !poly.contains(0.0, 0.0) {
        return Err(Error::Precondition("the origin lies outside the boundary polygon".into()));
    }
    let ends: Vec<WalkEnd> = (0..cfg.walks).into_par_iter().map(|i| run_walk(poly, cfg, i)).collect();
    let mut samples = Vec::with_capacity(cfg.walks);
    let mut walk_ids = Vec::with_capacity(cfg.walks);
    for (i, end) in ends.into_iter().enumerate() {
        if let WalkEnd::Exit(x) = end {
            samples.push(x);
            walk_ids.push(i);
        }
    }
    let truncated_walks = cfg.walks - samples.len();
    Ok(ExitSampleSet {
        samples,
        walk_ids,
        seed: cfg.seed,
        step: cfg.step,
        walks: cfg.walks,
        truncated_walks,
        warning: truncated_walks as f64 > TRUNCATION_WARNING * cfg.walks as f64,
    })
}

/// Simulates exit points from the domain bounded by `bp`.
pub fn simulate_exit(bp: &BoundaryPolyline, cfg: &McConfig) -> Result<ExitSampleSet> {
    simulate_polygon(&Polygon::from_polyline(bp)?, cfg)
}

/// Two-sided Kolmogorov-Smirnov statistic `sup_x |F_m(x) - F(x)|`.
pub fn ks_distance(samples: &[f64], dist: &Distribution) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("KS distance needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("samples contain NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / m;
        let upto = j as f64 / m;
        d = d.max((dist.cdf_left(x) - below).abs()).max((upto - dist.cdf(x)).abs());
        i = j;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Square with 40 vertices per side, so no edge reads as a cap.
    fn square(h: f64) -> BoundaryPolyline {
        let corners = [(-h, -h), (h, -h), (h, h), (-h, h)];
        let mut pts = Vec::new();
        for c in 0..4 {
            let (a, b) = (corners[c], corners[(c + 1) % 4]);
            for i in 0..40 {
                let s = i as f64 / 40.0;
                let t = pts.len() as f64;
                pts.push(BoundaryPoint { t, x: a.0 + s * (b.0 - a.0), y: a.1 + s * (b.1 - a.1) });
            }
        }
        BoundaryPolyline::new(pts)
    }

    #[test]
    fn square_membership() {
        let bp = square(1.0);
        assert!(point_in_domain(&bp, 0.0, 0.0).unwrap());
        assert!(point_in_domain(&bp, 0.99, -0.99).unwrap());
        assert!(point_in_domain(&bp, 1.0, 0.3).unwrap());
        assert!(!point_in_domain(&bp, 2.0, 0.0).unwrap());
        assert!(!point_in_domain(&bp, 0.0, -1.5).unwrap());
    }

    #[test]
    fn slit_polygon_is_accepted() {
        // comb with a zero-width slit at x = 0 reaching down from the top
        let pts = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0), (0.0, 1.0), (-1.0, 1.0)];
        let bp = BoundaryPolyline::new(
            pts.iter().enumerate().map(|(i, &(x, y))| BoundaryPoint { t: i as f64, x, y }).collect(),
        );
        let poly = Polygon::from_polyline(&bp).unwrap();
        assert!(poly.contains(0.5, 0.5));
        assert!(poly.contains(-0.5, 0.5));
        assert!(poly.contains(0.3, -0.5));
    }

    #[test]
    fn bow_tie_is_rejected() {
        let pts = [(-1.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)];
        let bp = BoundaryPolyline::new(
            pts.iter().enumerate().map(|(i, &(x, y))| BoundaryPoint { t: i as f64, x, y }).collect(),
        );
        assert!(matches!(point_in_domain(&bp, 0.5, 0.0), Err(Error::Topology(_))));
    }

    #[test]
    fn dense_polygon_matches_brute_force() {
        let k = 500;
        let pts: Vec<BoundaryPoint> = (0..k)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                let r = 1.0 + 0.3 * (5.0 * th).cos();
                BoundaryPoint { t: i as f64, x: r * th.cos(), y: r * th.sin() }
            })
            .collect();
        let bp = BoundaryPolyline::new(pts.clone());
        let poly = Polygon::from_polyline(&bp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5000 {
            let (x, y): (f64, f64) = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let mut inside = false;
            for i in 0..k {
                let (a, b) = (pts[i], pts[(i + 1) % k]);
                if (a.y > y) != (b.y > y) && x < a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y) {
                    inside = !inside;
                }
            }
            assert_eq!(poly.contains(x, y), inside, "({x}, {y})");
        }
    }

    #[test]
    fn huge_square_truncates_every_walk() {
        let cfg = McConfig { walks: 20, step: 1e-4, seed: 3, max_steps: 100 };
        let out = simulate_exit(&square(1e6), &cfg).unwrap();
        assert_eq!(out.truncated_walks, 20);
        assert!(out.samples.is_empty());
        assert!(out.warning);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = McConfig::new(200, 1e-3, 42);
        let bp = square(0.5);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_exit(&bp, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(2));
        assert_eq!(one, run(8));
        assert_eq!(one.samples.len() + one.truncated_walks, one.walks);
        assert!(!one.warning);
    }

    #[test]
    fn origin_outside_is_rejected() {
        let pts = [(1.0, -1.0), (2.0, -1.0), (2.0, 1.0), (1.0, 1.0)];
        let bp = BoundaryPolyline::new(
            pts.iter().enumerate().map(|(i, &(x, y))| BoundaryPoint { t: i as f64, x, y }).collect(),
        );
        let cfg = McConfig::new(10, 1e-3, 1);
        assert!(matches!(simulate_exit(&bp, &cfg), Err(Error::Precondition(_))));
        assert!(simulate_exit(&square(1.0), &McConfig::new(0, 1e-3, 1)).is_err());
    }

    #[test]
    fn ks_examples() {
        let u = Distribution::uniform(-1.0, 1.0).unwrap();
        let m = 100;
        let strat: Vec<f64> = (1..=m).map(|i| u.quantile((i as f64 - 0.5) / m as f64).unwrap()).collect();
        assert_abs_diff_eq!(ks_distance(&strat, &u).unwrap(), 0.5 / m as f64, epsilon = 1e-12);

        let c = 0.2;
        let constant = vec![c; 10];
        let expect = u.cdf(c).max(1.0 - u.cdf_left(c));
        assert_abs_diff_eq!(ks_distance(&constant, &u).unwrap(), expect, epsilon = 1e-15);

        let d = Distribution::discrete([(-1.0, 0.25), (1.0, 0.75)]).unwrap();
        let s = vec![-1.0, 1.0, 1.0, 1.0];
        assert!(ks_distance(&s, &d).unwrap() <= 0.25);
        assert_eq!(ks_distance(&s, &d).unwrap(), 0.0);
        assert!(ks_distance(&[], &u).is_err());
    }
}
