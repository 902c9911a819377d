//! End-to-end runs driven by a serializable [`RunConfig`]: distribution
//! JSON description → centred, truncated, normalized law → step quantile → boundary,
//! plus the rate table, coefficient export and Monte Carlo check.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::{boundary_points, normalize_support, scale_domain, BoundaryPolyline, DEFAULT_POINTS};
use crate::discretize::{build_measure, l1_distance, rate_bound, Scheme, StepQuantile};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::gross_map::{default_order, fourier_coefficients, FourierCoefficients};
use crate::verify_mc::{ks_distance, simulate_exit, ExitSampleSet, McConfig, DEFAULT_MAX_STEPS};

/// Default truncation radius for unbounded laws, in standard deviations.
pub const DEFAULT_TRUNCATION_SDS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Uniform { lo: f64, hi: f64 },
    Beta { alpha: f64, beta: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, std: f64 },
    TruncatedNormal { mean: f64, std: f64, lo: f64, hi: f64 },
    TwoPieceUniform { pieces: [[f64; 2]; 2] },
    Discrete { atoms: Vec<[f64; 2]> },
    Mixture { components: Vec<ComponentSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub weight: f64,
    pub dist: DistSpec,
}

/// JSON distribution spec, e.g. `{"family": "beta", "alpha": 2, "beta": 5, "center": true}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default)]
    pub center: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncate: Option<f64>,
}

impl DistSpec {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Config(format!("distribution spec: {e}")))
    }

    /// Reads an inline JSON object or a path to a JSON file.
    pub fn from_arg(arg: &str) -> Result<Self> {
        if arg.trim_start().starts_with('{') {
            return Self::parse(arg);
        }
        let text = fs::read_to_string(arg).map_err(|e| Error::io(arg, e))?;
        Self::parse(&text)
    }

    /// The family alone, before centring or truncation.
    pub fn base(&self) -> Result<Distribution> {
        match &self.family {
            FamilySpec::Uniform { lo, hi } => Distribution::uniform(*lo, *hi),
            FamilySpec::Beta { alpha, beta } => Distribution::beta(*alpha, *beta),
            FamilySpec::Exponential { rate } => Distribution::exponential(*rate),
            FamilySpec::Normal { mean, std } => Distribution::normal(*mean, *std),
            FamilySpec::TruncatedNormal { mean, std, lo, hi } => Distribution::truncated_normal(*mean, *std, *lo, *hi),
            FamilySpec::TwoPieceUniform { pieces } => {
                Distribution::two_piece_uniform((pieces[0][0], pieces[0][1]), (pieces[1][0], pieces[1][1]))
            }
            FamilySpec::Discrete { atoms } => Distribution::discrete(atoms.iter().map(|a| (a[0], a[1]))),
            FamilySpec::Mixture { components } => Distribution::mixture(
                components.iter().map(|c| Ok((c.weight, c.dist.prepare()?))).collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    /// Centres (if asked), truncates (explicitly or by default for unbounded
    /// support) and re-centres, since lumping tail mass at 0 moves the mean.
    pub fn prepare(&self) -> Result<Distribution> {
        let mut d = self.base()?;
        if self.center {
            d = d.center();
        }
        let radius = match self.truncate {
            Some(r) => Some(r),
            None if !d.is_bounded() => Some(d.mean().abs() + DEFAULT_TRUNCATION_SDS * d.variance().sqrt()),
            None => None,
        };
        if let Some(r) = radius {
            d = d.truncate(r)?;
            if self.center {
                d = d.center();
            }
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dist: Option<DistSpec>,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub scheme: Scheme,
    pub points: usize,
    pub coeffs: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub walks: usize,
    pub step: f64,
    pub seed: u64,
    pub max_steps: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dist: None,
            n: 200,
            n_list: vec![5, 15, 30, 200],
            scheme: Scheme::Cdf,
            points: DEFAULT_POINTS,
            coeffs: None,
            out: None,
            svg: None,
            boundary: None,
            samples: None,
            summary: None,
            walks: 10_000,
            step: 1e-4,
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n: must be >= 1".into()));
        }
        if self.n_list.contains(&0) {
            return Err(Error::Config("n_list: entries must be >= 1".into()));
        }
        if self.points == 0 {
            return Err(Error::Config("points: must be >= 1".into()));
        }
        if self.coeffs == Some(0) {
            return Err(Error::Config("coeffs: must be >= 1".into()));
        }
        if self.walks == 0 {
            return Err(Error::Config("walks: must be >= 1".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("step: must be positive, got {}", self.step)));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps: must be >= 1".into()));
        }
        Ok(())
    }

    pub fn dist_spec(&self) -> Result<&DistSpec> {
        self.dist.as_ref().ok_or_else(|| Error::Config("dist: a distribution spec is required".into()))
    }

    /// Short SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// `mu-domain-kit vX.Y, config hash H`.
    pub fn header(&self) -> String {
        format!("mu-domain-kit v{}, config hash {}", version_xy(), self.hash())
    }

    fn mc(&self) -> McConfig {
        McConfig { walks: self.walks, step: self.step, seed: self.seed, max_steps: self.max_steps }
    }
}

fn version_xy() -> String {
    let v = env!("CARGO_PKG_VERSION");
    v.splitn(3, '.').take(2).collect::<Vec<_>>().join(".")
}

/// Step quantile and boundary of a bounded law, built on its support
/// rescaled to `(0, 1)` and mapped back.
pub fn build_boundary(
    dist: &Distribution,
    n: usize,
    scheme: Scheme,
    points: usize,
) -> Result<(StepQuantile, BoundaryPolyline)> {
    let (unit, alpha, beta) = normalize_support(dist)?;
    let sq = build_measure(&unit, n, scheme)?;
    let bp = boundary_points(&sq, points)?;
    let mut bp = scale_domain(&bp, alpha, beta)?;
    bp.shift = dist.mean_shift();
    Ok((sq.map_values(|v| alpha * v + beta), bp))
}

pub fn cmd_build(cfg: &RunConfig) -> Result<BoundaryPolyline> {
    cfg.validate()?;
    let dist = cfg.dist_spec()?.prepare()?;
    let (_, bp) = build_boundary(&dist, cfg.n, cfg.scheme, cfg.points)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("boundary.csv"));
    bp.write_csv(&out, Some(&cfg.header()))?;
    if let Some(svg) = &cfg.svg {
        bp.write_svg(svg)?;
    }
    Ok(bp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub l1: f64,
    pub bound: f64,
    pub varpi: f64,
}

pub fn rate_rows(dist: &Distribution, ns: &[usize], scheme: Scheme) -> Result<Vec<RateRow>> {
    ns.iter()
        .map(|&n| {
            let sq = build_measure(dist, n, scheme)?;
            let rb = rate_bound(dist, n)?;
            Ok(RateRow { n, l1: l1_distance(dist, &sq), bound: rb.bound, varpi: rb.varpi })
        })
        .collect()
}

pub fn rates_csv(rows: &[RateRow], comment: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(c) = comment {
        s.push_str(&format!("# {c}\n"));
    }
    s.push_str("n,l1,bound,varpi\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.n, r.l1, r.bound, r.varpi));
    }
    s
}

pub fn cmd_rates(cfg: &RunConfig) -> Result<Vec<RateRow>> {
    cfg.validate()?;
    let dist = cfg.dist_spec()?.prepare()?;
    let rows = rate_rows(&dist, &cfg.n_list, cfg.scheme)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("rates.csv"));
    fs::write(&out, rates_csv(&rows, Some(&cfg.header()))).map_err(|e| Error::io(&out, e))?;
    Ok(rows)
}

pub fn cmd_map(cfg: &RunConfig) -> Result<FourierCoefficients> {
    cfg.validate()?;
    let dist = cfg.dist_spec()?.prepare()?;
    let (sq, _) = build_boundary(&dist, cfg.n, cfg.scheme, 1)?;
    let fc = fourier_coefficients(&sq, cfg.coeffs.unwrap_or_else(|| default_order(cfg.n)))?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("map.csv"));
    let mut buf = Vec::new();
    fc.write_csv(&mut buf, Some(&cfg.header())).map_err(|e| Error::io(&out, e))?;
    fs::write(&out, buf).map_err(|e| Error::io(&out, e))?;
    Ok(fc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub walks: usize,
    pub truncated: usize,
    pub ks: Option<f64>,
    pub mean: f64,
    pub std: f64,
    pub seed: u64,
    pub step: f64,
    pub warning: bool,
}

pub fn summarize(set: &ExitSampleSet, dist: Option<&Distribution>) -> Result<Summary> {
    let ks = match dist {
        Some(d) if !set.samples.is_empty() => Some(ks_distance(&set.samples, d)?),
        _ => None,
    };
    let (mean, std) = if set.samples.is_empty() { (f64::NAN, f64::NAN) } else { (set.mean(), set.std()) };
    Ok(Summary {
        walks: set.walks,
        truncated: set.truncated_walks,
        ks,
        mean,
        std,
        seed: set.seed,
        step: set.step,
        warning: set.warning,
    })
}

pub fn samples_csv(set: &ExitSampleSet, comment: Option<&str>) -> String {
    let mut s = String::with_capacity(32 * set.samples.len());
    if let Some(c) = comment {
        s.push_str(&format!("# {c}\n"));
    }
    s.push_str("walk,x_exit\n");
    for (w, x) in set.walk_ids.iter().zip(&set.samples) {
        s.push_str(&format!("{w},{x:e}\n"));
    }
    s
}

/// Simulates exits from `cfg.boundary` (or a freshly built boundary) and
/// writes `samples.csv` plus the JSON summary.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<(ExitSampleSet, Summary)> {
    cfg.validate()?;
    let dist = cfg.dist.as_ref().map(DistSpec::prepare).transpose()?;
    let bp = match (&cfg.boundary, &dist) {
        (Some(path), _) => BoundaryPolyline::read_csv(path)?,
        (None, Some(d)) => build_boundary(d, cfg.n, cfg.scheme, cfg.points)?.1,
        (None, None) => return Err(Error::Config("simulate needs `boundary` or `dist`".into())),
    };
    let set = simulate_exit(&bp, &cfg.mc())?;
    let summary = summarize(&set, dist.as_ref())?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("samples.csv"));
    fs::write(&out, samples_csv(&set, Some(&cfg.header()))).map_err(|e| Error::io(&out, e))?;
    if let Some(path) = &cfg.summary {
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    }
    Ok((set, summary))
}

/// Reads `walk,x_exit` rows, skipping `#` comments and the header.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "walk,x_exit" {
            continue;
        }
        let x = line
            .rsplit(',')
            .next()
            .and_then(|f| f.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Config(format!("{}:{}: cannot parse `{line}`", path.display(), i + 1)))?;
        out.push(x);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub samples: usize,
    pub ks: f64,
    pub mean: f64,
}

pub fn cmd_check(cfg: &RunConfig) -> Result<CheckReport> {
    let dist = cfg.dist_spec()?.prepare()?;
    let path = cfg.samples.as_ref().ok_or_else(|| Error::Config("samples: path to samples.csv is required".into()))?;
    let xs = read_samples(path)?;
    let ks = ks_distance(&xs, &dist)?;
    Ok(CheckReport { samples: xs.len(), ks, mean: xs.iter().sum::<f64>() / xs.len() as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn distribution_json_parsing() {
        let d = DistSpec::parse(r#"{"family":"beta","alpha":2,"beta":5,"center":true}"#).unwrap();
        assert_eq!(d.family, FamilySpec::Beta { alpha: 2.0, beta: 5.0 });
        assert!(d.center);
        let m = DistSpec::parse(
            r#"{"family":"mixture","components":[
                {"weight":0.5,"dist":{"family":"uniform","lo":-1,"hi":1}},
                {"weight":0.5,"dist":{"family":"discrete","atoms":[[0,1]]}}]}"#,
        )
        .unwrap();
        let law = m.prepare().unwrap();
        assert_eq!(law.atoms().len(), 1);
        assert!(DistSpec::parse(r#"{"family":"cauchy"}"#).is_err());
        assert!(DistSpec::parse(r#"{"family":"uniform","lo":1}"#).is_err());
    }

    #[test]
    fn prepare_centres_and_truncates() {
        let d = DistSpec::parse(r#"{"family":"beta","alpha":2,"beta":5,"center":true}"#).unwrap().prepare().unwrap();
        let (a, b) = d.support();
        assert_abs_diff_eq!(a, -2.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 5.0 / 7.0, epsilon = 1e-15);

        let e = DistSpec::parse(r#"{"family":"exponential","rate":1,"center":true}"#).unwrap().prepare().unwrap();
        assert!(e.is_bounded());
        assert_abs_diff_eq!(e.mean(), 0.0, epsilon = 1e-12);

        let t = DistSpec::parse(r#"{"family":"exponential","rate":1,"truncate":4}"#).unwrap().prepare().unwrap();
        assert_eq!(t.support(), (0.0, 4.0));
    }

    #[test]
    fn config_validation_and_hash() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        let h = cfg.hash();
        assert_eq!(h.len(), 16);
        cfg.n = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(m)) if m.starts_with("n:")));
        cfg.n = 5;
        cfg.walks = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(m)) if m.starts_with("walks:")));
        assert_ne!(cfg.hash(), h);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        let parsed: RunConfig = serde_json::from_str(r#"{"n": 30, "scheme": "pdf"}"#).unwrap();
        assert_eq!((parsed.n, parsed.scheme, parsed.points), (30, Scheme::Pdf, DEFAULT_POINTS));
    }

    #[test]
    fn uniform_rates_table() {
        let u = Distribution::uniform(-1.0, 1.0).unwrap();
        let rows = rate_rows(&u, &[10], Scheme::Cdf).unwrap();
        assert_abs_diff_eq!(rows[0].l1, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].bound, 0.2, epsilon = 1e-15);
        assert_eq!(rows[0].varpi, 0.0);
        let csv = rates_csv(&rows, None);
        assert!(csv.starts_with("n,l1,bound,varpi\n10,"));
    }

    #[test]
    fn build_matches_direct_construction() {
        let u = Distribution::uniform(-1.0, 1.0).unwrap();
        let (sq, bp) = build_boundary(&u, 5, Scheme::Cdf, 64).unwrap();
        assert_eq!(bp.len(), 128);
        assert_abs_diff_eq!(sq.min_value(), -0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(sq.max_value(), 1.0, epsilon = 1e-12);
    }
}
