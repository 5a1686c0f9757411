use qxlab_core::io::{MapDescription, PolyDescription};
use qxlab_core::manifold::MConfig;
use qxlab_core::saddles::SearchConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Certify,
    Saddles,
    Manifold,
    Metrics,
    Folding,
    Poly1d,
    Survey,
}

/// A map given inline or as a path to a JSON description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

/// Inclusive period range; empty when `min > max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periods {
    pub min: usize,
    pub max: usize,
}

impl Periods {
    pub fn is_empty(&self) -> bool {
        self.min > self.max || self.max == 0
    }

    pub fn contains(&self, n: usize) -> bool {
        self.min <= n && n <= self.max
    }
}

impl FromStr for Periods {
    type Err = String;

    /// `6`, `2..6` or `2..=6`, all inclusive of both ends.
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad period `{t}`: {e}"));
        match s.split_once("..") {
            None => Ok(Self { min: 1, max: num(s)? }),
            Some((a, b)) => Ok(Self { min: num(a)?, max: num(b.trim_start_matches('='))? }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub search: SearchConfig,
    pub mconfig: MConfig,
    /// Relative tolerance for vanishing jet coefficients.
    pub order_tol: f64,
    /// Slack on `log kappa` in the Lyapunov audit.
    pub lyapunov_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { search: SearchConfig::default(), mconfig: MConfig::default(), order_tol: 1e-7, lyapunov_tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryOptions {
    pub epsilon: f64,
    pub contraction_steps: usize,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        Self { epsilon: 0.5, contraction_steps: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricOptions {
    pub level: f64,
    /// Cocycle steps per orbit, in periods.
    pub periods_per_orbit: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self { level: 1.0, periods_per_orbit: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FoldingOptions {
    /// Boundary radius for the projection degree, in normalized units.
    pub radius: f64,
    /// Optional JSON file with jets to analyse instead of saddle jets.
    pub jets: Option<PathBuf>,
}

impl Default for FoldingOptions {
    fn default() -> Self {
        Self { radius: 1e-3, jets: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Poly1dOptions {
    pub shadow_periods: Vec<usize>,
}

impl Default for Poly1dOptions {
    fn default() -> Self {
        Self { shadow_periods: vec![16, 32, 64, 128] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Grid over quadratic maps `(x^2 + c - a y, x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyGrid {
    pub a: Axis,
    pub c: Axis,
}

impl Default for SurveyGrid {
    fn default() -> Self {
        Self { a: Axis { min: 0.1, max: 0.1, steps: 1 }, c: Axis { min: -6.0, max: -4.0, steps: 5 } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub analysis: Analysis,
    pub map: Option<Source<MapDescription>>,
    pub poly: Option<Source<PolyDescription>>,
    pub periods: Periods,
    pub t: f64,
    pub margin: f64,
    pub seed: u64,
    /// Truncation order of the parametrizations.
    pub order: usize,
    pub out: PathBuf,
    /// Catalogs are cached here by content digest.
    pub cache_dir: Option<PathBuf>,
    /// Explicit catalog file, read if present and written otherwise.
    pub catalog: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub geometry: GeometryOptions,
    pub metrics: MetricOptions,
    pub folding: FoldingOptions,
    pub poly1d: Poly1dOptions,
    pub survey: SurveyGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            analysis: Analysis::Certify,
            map: None,
            poly: None,
            periods: Periods { min: 1, max: 6 },
            t: 1.0,
            margin: 0.05,
            seed: 0,
            order: 40,
            out: PathBuf::from("out"),
            cache_dir: None,
            catalog: None,
            tolerances: Tolerances::default(),
            geometry: GeometryOptions::default(),
            metrics: MetricOptions::default(),
            folding: FoldingOptions::default(),
            poly1d: Poly1dOptions::default(),
            survey: SurveyGrid::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        // relative paths inside a config are relative to the config file
        let dir = path.parent().unwrap_or(Path::new("."));
        for src in [cfg.map.as_mut().and_then(Source::path_mut), cfg.poly.as_mut().and_then(Source::path_mut)]
            .into_iter()
            .flatten()
            .chain(cfg.folding.jets.as_mut())
        {
            if src.is_relative() {
                *src = dir.join(&*src);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let positive = [
            ("t", self.t),
            ("tolerances.order_tol", self.tolerances.order_tol),
            ("tolerances.search.tol", self.tolerances.search.tol),
            ("tolerances.mconfig.level_tol", self.tolerances.mconfig.level_tol),
            ("geometry.epsilon", self.geometry.epsilon),
            ("metrics.level", self.metrics.level),
            ("folding.radius", self.folding.radius),
        ];
        for (name, v) in positive {
            anyhow::ensure!(v > 0.0 && v.is_finite(), "{name} must be positive, got {v}");
        }
        anyhow::ensure!(self.margin >= 0.0, "margin must be nonnegative");
        anyhow::ensure!(self.order >= 2, "order must be at least 2");
        Ok(())
    }

    /// SHA-256 of the canonical JSON of everything that affects results
    /// (the output location does not).
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

impl<T> Source<T> {
    fn path_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            Source::Path(p) => Some(p),
            Source::Inline(_) => None,
        }
    }
}

impl<T: serde::de::DeserializeOwned + Clone> Source<T> {
    pub fn load(&self) -> anyhow::Result<T> {
        match self {
            Source::Path(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
                Ok(serde_json::from_str(&text)?)
            }
            Source::Inline(v) => Ok(v.clone()),
        }
    }
}
