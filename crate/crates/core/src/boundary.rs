//! Boundary polyline `t ↦ (q_n(|t|), H{q_n}(πt))`, the scaling lemma and
//! CSV/SVG export.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::discretize::StepQuantile;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::hilbert::{angular_steps, hilbert_steps};

/// Default number of parameter samples per half curve.
pub const DEFAULT_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPolyline {
    /// Ordered by `t`, symmetric under `(t, x, y) ↦ (-t, x, -y)`.
    pub points: Vec<BoundaryPoint>,
    /// Centering shift applied to the source law (add it back to undo).
    pub shift: f64,
    /// Composite `(alpha, beta)` of every [`scale_domain`] applied so far.
    pub scale: (f64, f64),
}

impl BoundaryPolyline {
    pub fn new(points: Vec<BoundaryPoint>) -> Self {
        BoundaryPolyline { points, shift: 0.0, scale: (1.0, 0.0) }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn x_range(&self) -> Option<(f64, f64)> {
        range(self.points.iter().map(|p| p.x))
    }

    pub fn y_range(&self) -> Option<(f64, f64)> {
        range(self.points.iter().map(|p| p.y))
    }

    pub fn max_abs_y(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.y.abs()))
    }

    /// CSV text with header `t,x,y` and an optional leading `# ...` line.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut s = String::with_capacity(64 * (self.points.len() + 2));
        if let Some(c) = comment {
            let _ = writeln!(s, "# {c}");
        }
        s.push_str("t,x,y\n");
        for p in &self.points {
            let _ = writeln!(s, "{:e},{:e},{:e}", p.t, p.x, p.y);
        }
        s
    }

    /// Parses CSV produced by [`Self::to_csv`]; `#` lines are skipped.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut points = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != "t,x,y" {
                    return Err(Error::Config(format!("{}: expected header `t,x,y`, found `{line}`", path.display())));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            let [t, x, y] = fields[..] else {
                return Err(Error::Config(format!("{}:{}: expected 3 fields", path.display(), lineno + 1)));
            };
            points.push(BoundaryPoint { t, x, y });
        }
        Ok(BoundaryPolyline::new(points))
    }

    pub fn write_csv(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        fs::write(path, self.to_csv(comment)).map_err(|e| Error::io(path, e))
    }

    /// Single closed SVG path on a 1000-unit canvas with 5% padding.
    pub fn to_svg(&self) -> Result<String> {
        let frame = SvgFrame::fit(self)?;
        let mut d = String::with_capacity(32 * self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            let (cx, cy) = frame.to_canvas(p.x, p.y);
            let _ = write!(d, "{}{cx:.6},{cy:.6} ", if i == 0 { 'M' } else { 'L' });
        }
        d.push('Z');
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.6} {h:.6}">"#,
            w = frame.width,
            h = frame.height
        );
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1"/>"#);
        out.push_str("</svg>\n");
        Ok(out)
    }

    pub fn write_svg(&self, path: &Path) -> Result<()> {
        let svg = self.to_svg()?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(svg.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

fn range(it: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    it.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Affine map between domain coordinates and the SVG canvas (y points down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgFrame {
    pub x0: f64,
    pub y1: f64,
    pub pad: f64,
    pub units_per_domain: f64,
    pub width: f64,
    pub height: f64,
}

impl SvgFrame {
    pub const CANVAS: f64 = 1000.0;

    pub fn fit(bp: &BoundaryPolyline) -> Result<Self> {
        let (Some((x0, x1)), Some((y0, y1))) = (bp.x_range(), bp.y_range()) else {
            return Err(Error::domain("cannot draw an empty polyline"));
        };
        let mut span = (x1 - x0).max(y1 - y0);
        if !(span > 0.0) {
            span = 1.0;
        }
        let pad = 0.05 * span;
        let units_per_domain = Self::CANVAS / (span + 2.0 * pad);
        Ok(SvgFrame {
            x0,
            y1,
            pad,
            units_per_domain,
            width: (x1 - x0 + 2.0 * pad) * units_per_domain,
            height: (y1 - y0 + 2.0 * pad) * units_per_domain,
        })
    }

    pub fn to_canvas(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0 + self.pad) * self.units_per_domain, (self.y1 - y + self.pad) * self.units_per_domain)
    }

    pub fn to_domain(&self, cx: f64, cy: f64) -> (f64, f64) {
        (cx / self.units_per_domain - self.pad + self.x0, self.y1 + self.pad - cy / self.units_per_domain)
    }
}

/// Smallest level distance between a sample and a breakpoint; keeps the
/// angle clear of the Hilbert pole tolerance.
pub const MIN_CLEARANCE: f64 = 2e-9;

/// Parameter levels in `(0, 1)`: cell midpoints pushed away from step
/// breakpoints, plus one midpoint for every step the grid would miss.
/// Steps narrower than `2 * MIN_CLEARANCE` cannot be sampled and are skipped.
pub fn parameter_grid(breaks: &[f64], steps: &[(f64, f64, f64)], m: usize) -> Vec<f64> {
    let w = 1.0 / m as f64;
    let nearest = |t: f64| -> f64 {
        let j = breaks.partition_point(|&b| b < t);
        let right = breaks.get(j).map_or(f64::INFINITY, |&b| b - t);
        let left = if j > 0 { t - breaks[j - 1] } else { f64::INFINITY };
        left.min(right)
    };
    let mut ts: Vec<f64> = (1..=m)
        .map(|i| {
            let t = (i as f64 - 0.5) * w;
            if nearest(t) >= 0.25 * w {
                return t;
            }
            let (lo, hi) = ((i - 1) as f64 * w, i as f64 * w);
            let j0 = breaks.partition_point(|&b| b <= lo);
            let j1 = breaks.partition_point(|&b| b < hi);
            let mut pts = vec![lo];
            pts.extend_from_slice(&breaks[j0..j1]);
            pts.push(hi);
            // candidates: gap midpoints inside the cell; the left-most one with
            // near-best clearance, so rounding in the breakpoints cannot flip the pick
            let mut cands: Vec<f64> =
                pts.windows(2).map(|p| 0.5 * (p[0] + p[1])).chain([lo + 0.01 * w, hi - 0.01 * w]).collect();
            cands.sort_by(f64::total_cmp);
            let best = cands.iter().map(|&c| nearest(c)).fold(f64::NEG_INFINITY, f64::max);
            cands.into_iter().find(|&c| nearest(c) >= best - 1e-6 * w).unwrap_or(t)
        })
        .collect();
    for &(lo, hi, _) in steps {
        let j = ts.partition_point(|&t| t <= lo);
        if ts.get(j).is_none_or(|&t| t >= hi) {
            ts.push(0.5 * (lo + hi));
        }
    }
    ts.retain(|&t| nearest(t) >= MIN_CLEARANCE);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Samples the boundary on `m` parameter cells per half and mirrors it.
pub fn boundary_points(sq: &StepQuantile, m: usize) -> Result<BoundaryPolyline> {
    if m == 0 {
        return Err(Error::domain("need at least one boundary sample"));
    }
    let steps = sq.unit_steps();
    let breaks = sq.unit_breaks();
    let angular = angular_steps(sq);
    let ts = parameter_grid(&breaks, &steps, m);
    let half: Vec<BoundaryPoint> = ts
        .par_iter()
        .map(|&t| {
            let j = steps.partition_point(|s| s.1 < t).min(steps.len() - 1);
            let y = hilbert_steps(&angular, PI * t)?;
            Ok(BoundaryPoint { t, x: steps[j].2, y })
        })
        .collect::<Result<_>>()?;
    let mut points: Vec<BoundaryPoint> =
        half.iter().rev().map(|p| BoundaryPoint { t: -p.t, x: p.x, y: -p.y }).collect();
    points.extend(half);
    Ok(BoundaryPolyline::new(points))
}

/// `(x, y) ↦ (αx + β, αy)`.
pub fn scale_domain(bp: &BoundaryPolyline, alpha: f64, beta: f64) -> Result<BoundaryPolyline> {
    if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain(format!("scale needs finite alpha != 0, got alpha = {alpha}, beta = {beta}")));
    }
    let points = bp.points.iter().map(|p| BoundaryPoint { t: p.t, x: alpha * p.x + beta, y: alpha * p.y }).collect();
    let (a0, b0) = bp.scale;
    Ok(BoundaryPolyline { points, shift: bp.shift, scale: (alpha * a0, alpha * b0 + beta) })
}

/// Rescales a bounded law onto `(0, 1)`; returns the law and `(alpha, beta)`
/// with `U = alpha Ũ + beta` recovering the original domain.
pub fn normalize_support(dist: &Distribution) -> Result<(Distribution, f64, f64)> {
    let (a, b) = dist.support();
    if !dist.is_bounded() {
        return Err(Error::UnboundedSupport { a, b });
    }
    if !(b > a) {
        return Err(Error::domain("a point mass has no support interval to normalize"));
    }
    if a == 0.0 && b == 1.0 {
        return Ok((dist.clone(), 1.0, 0.0));
    }
    let alpha = b - a;
    Ok((dist.affine(1.0 / alpha, -a / alpha)?, alpha, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::build_measure_cdf;
    use approx::assert_abs_diff_eq;

    fn uniform_boundary(n: usize, m: usize) -> BoundaryPolyline {
        let sq = build_measure_cdf(&Distribution::uniform(-1.0, 1.0).unwrap(), n).unwrap();
        boundary_points(&sq, m).unwrap()
    }

    #[test]
    fn zero_quantile_gives_origin() {
        let bp = boundary_points(&StepQuantile::constant(0.0), 8).unwrap();
        assert_eq!(bp.len(), 16);
        assert!(bp.points.iter().all(|p| p.x == 0.0 && p.y == 0.0));
    }

    #[test]
    fn symmetric_and_x_range_exact() {
        let sq = build_measure_cdf(&Distribution::uniform(-1.0, 1.0).unwrap(), 15).unwrap();
        let bp = boundary_points(&sq, 256).unwrap();
        let k = bp.len();
        assert_eq!(k % 2, 0);
        for i in 0..k / 2 {
            let (p, q) = (bp.points[i], bp.points[k - 1 - i]);
            assert_eq!(p.t, -q.t);
            assert_eq!(p.x, q.x);
            assert_eq!(p.y, -q.y);
        }
        assert!(bp.points.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(bp.x_range().unwrap(), (sq.min_value(), sq.max_value()));
    }

    #[test]
    fn grid_avoids_breakpoints() {
        let breaks = [0.1, 0.25, 0.2501, 0.5];
        let steps = [(0.0, 0.1, 0.0), (0.1, 0.25, 1.0), (0.25, 0.2501, 2.0), (0.2501, 0.5, 3.0), (0.5, 1.0, 4.0)];
        let ts = parameter_grid(&breaks, &steps, 20);
        for s in &steps {
            assert!(ts.iter().any(|&t| t > s.0 && t < s.1), "step {s:?} unsampled");
        }
        for t in &ts {
            for b in &breaks {
                assert!((t - b).abs() > 1e-9);
            }
        }
    }

    #[test]
    fn scale_examples() {
        let bp = uniform_boundary(5, 64);
        assert_eq!(scale_domain(&bp, 1.0, 0.0).unwrap().points, bp.points);
        let shifted = scale_domain(&bp, 1.0, 3.0).unwrap();
        for (p, q) in bp.points.iter().zip(&shifted.points) {
            assert_eq!(q.x, p.x + 3.0);
            assert_eq!(q.y, p.y);
        }
        assert!(scale_domain(&bp, 0.0, 1.0).is_err());
        let twice = scale_domain(&scale_domain(&bp, 2.0, 1.0).unwrap(), 3.0, -1.0).unwrap();
        assert_eq!(twice.scale, (6.0, 2.0));
    }

    #[test]
    fn normalize_examples() {
        let (d, a, b) = normalize_support(&Distribution::uniform(0.0, 1.0).unwrap()).unwrap();
        assert_eq!((a, b), (1.0, 0.0));
        assert_eq!(d.support(), (0.0, 1.0));
        let (d, a, b) = normalize_support(&Distribution::uniform(-1.0, 1.0).unwrap()).unwrap();
        assert_eq!((a, b), (2.0, -1.0));
        assert_abs_diff_eq!(d.support().0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.support().1, 1.0, epsilon = 1e-15);
        let (_, a, b) = normalize_support(&Distribution::uniform(-100.0, 100.0).unwrap()).unwrap();
        assert_eq!((a, b), (200.0, -100.0));
        assert!(normalize_support(&Distribution::exponential(1.0).unwrap()).is_err());
    }

    #[test]
    fn normalize_then_scale_is_identity() {
        let dist = Distribution::beta(2.0, 5.0).unwrap().center();
        let direct = boundary_points(&build_measure_cdf(&dist, 30).unwrap(), 128).unwrap();
        let (unit, alpha, beta) = normalize_support(&dist).unwrap();
        let back =
            scale_domain(&boundary_points(&build_measure_cdf(&unit, 30).unwrap(), 128).unwrap(), alpha, beta).unwrap();
        assert_eq!(direct.len(), back.len());
        for (p, q) in direct.points.iter().zip(&back.points) {
            assert_abs_diff_eq!(p.x, q.x, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, q.y, epsilon = 1e-12);
        }
    }

    #[test]
    fn csv_and_svg_export() {
        let bp = BoundaryPolyline::new(vec![
            BoundaryPoint { t: -0.5, x: 0.0, y: 1.0 },
            BoundaryPoint { t: 0.0, x: 1.0, y: 0.0 },
            BoundaryPoint { t: 0.5, x: 0.0, y: -1.0 },
        ]);
        let csv = bp.to_csv(None);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next(), Some("t,x,y"));
        let empty = BoundaryPolyline::new(vec![]);
        assert_eq!(empty.to_csv(None), "t,x,y\n");
        assert!(empty.to_svg().is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        let bp5 = uniform_boundary(5, 32);
        bp5.write_csv(&path, Some("mu-domain-kit test")).unwrap();
        assert_eq!(BoundaryPolyline::read_csv(&path).unwrap().points, bp5.points);
    }

    #[test]
    fn svg_round_trip() {
        let bp = uniform_boundary(5, 32);
        let svg = bp.to_svg().unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        let d_start = svg.find("d=\"").unwrap() + 3;
        let d = &svg[d_start..d_start + svg[d_start..].find('"').unwrap()];
        assert!(d.starts_with('M') && d.ends_with('Z'));
        let frame = SvgFrame::fit(&bp).unwrap();
        let coords: Vec<(f64, f64)> = d
            .trim_end_matches('Z')
            .split_whitespace()
            .map(|tok| {
                let (cx, cy) = tok[1..].split_once(',').unwrap();
                frame.to_domain(cx.parse().unwrap(), cy.parse().unwrap())
            })
            .collect();
        assert_eq!(coords.len(), bp.len());
        for ((x, y), p) in coords.iter().zip(&bp.points) {
            assert!((x - p.x).abs() < 1e-6 && (y - p.y).abs() < 1e-6);
        }
    }
}
