//! Coordinate charts with expression metrics, curvature tensors and quadrature.

mod curvature;
mod identities;

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{CompiledExpr, EvalError, Expr, ParseError};
use crate::random::TestRng;

pub use curvature::{Curvature, PointCurvature};
pub use identities::{verify_curvature_identities, IdentityConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid spec: {0}")]
    Schema(String),
    #[error("chart {chart}, metric entry ({i},{j}): {source}")]
    Expr {
        chart: usize,
        i: usize,
        j: usize,
        source: ParseError,
    },
    #[error("chart {chart}: metric is not symmetric at ({i},{j})")]
    NonSymmetric { chart: usize, i: usize, j: usize },
    #[error("chart {chart}: metric is not positive definite at {point:?}")]
    NotPositive { chart: usize, point: Vec<f64> },
    #[error("dimension {0} is not supported (n <= 4)")]
    DimensionTooLarge(usize),
    #[error("point {0:?} lies outside the chart")]
    OutsideChart(Vec<f64>),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// On-disk manifold description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: String,
    pub dim: usize,
    pub coordinates: Vec<String>,
    pub charts: Vec<ChartFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_euler: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<String>,
    /// Named constants substituted into the metric expressions.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartFile {
    pub ranges: Vec<[f64; 2]>,
    pub metric: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trim: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

pub const DEFAULT_TRIM: f64 = 1e-4;
const MAX_DIM: usize = 4;

/// One coordinate box with its metric.
#[derive(Debug, Clone)]
pub struct MetricChart {
    pub label: String,
    pub coordinates: Vec<String>,
    pub ranges: Vec<(f64, f64)>,
    pub metric: Vec<Vec<Expr>>,
    pub trim: f64,
}

#[derive(Debug, Clone)]
pub struct ManifoldSpec {
    pub name: String,
    pub dim: usize,
    pub charts: Vec<MetricChart>,
    pub expected_euler: Option<i64>,
    /// +1 or −1.
    pub orientation: i32,
    source: SpecFile,
}

impl ManifoldSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<ManifoldSpec, GeometryError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        ManifoldSpec::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<ManifoldSpec, GeometryError> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| GeometryError::Schema(e.to_string()))?;
        ManifoldSpec::from_file(file)
    }

    pub fn from_file(file: SpecFile) -> Result<ManifoldSpec, GeometryError> {
        let n = file.dim;
        if n == 0 {
            return Err(GeometryError::Schema("dim must be positive".into()));
        }
        if n > MAX_DIM {
            return Err(GeometryError::DimensionTooLarge(n));
        }
        if file.coordinates.len() != n {
            return Err(GeometryError::Schema(format!(
                "expected {n} coordinates, got {}",
                file.coordinates.len()
            )));
        }
        for (i, c) in file.coordinates.iter().enumerate() {
            if file.coordinates[..i].contains(c) {
                return Err(GeometryError::Schema(format!("duplicate coordinate `{c}`")));
            }
            if file.params.contains_key(c) {
                return Err(GeometryError::Schema(format!(
                    "`{c}` is both a coordinate and a parameter"
                )));
            }
        }
        if file.charts.is_empty() {
            return Err(GeometryError::Schema("at least one chart is required".into()));
        }
        let orientation = match file.orientation.as_deref() {
            None | Some("+1") | Some("1") => 1,
            Some("-1") => -1,
            Some(o) => {
                return Err(GeometryError::Schema(format!(
                    "orientation must be \"+1\" or \"-1\", got {o:?}"
                )))
            }
        };
        let charts = file
            .charts
            .iter()
            .enumerate()
            .map(|(k, c)| MetricChart::from_file(k, c, &file.coordinates, &file.params))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ManifoldSpec {
            name: file.name.clone(),
            dim: n,
            charts,
            expected_euler: file.expected_euler,
            orientation,
            source: file,
        })
    }

    /// Rebuilds the spec with a parameter overridden.
    pub fn with_param(&self, name: &str, value: f64) -> Result<ManifoldSpec, GeometryError> {
        let mut file = self.source.clone();
        file.params.insert(name.to_string(), value);
        ManifoldSpec::from_file(file)
    }

    /// Rebuilds the spec with every metric entry multiplied by `c2`.
    pub fn scaled(&self, c2: f64) -> Result<ManifoldSpec, GeometryError> {
        let mut file = self.source.clone();
        for chart in &mut file.charts {
            for row in &mut chart.metric {
                for e in row {
                    *e = format!("({c2:?})*({e})");
                }
            }
        }
        ManifoldSpec::from_file(file)
    }

    pub fn source(&self) -> &SpecFile {
        &self.source
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.source.params
    }
}

impl MetricChart {
    fn from_file(
        index: usize,
        c: &ChartFile,
        coords: &[String],
        params: &BTreeMap<String, f64>,
    ) -> Result<MetricChart, GeometryError> {
        let n = coords.len();
        if c.ranges.len() != n || c.metric.len() != n || c.metric.iter().any(|row| row.len() != n) {
            return Err(GeometryError::Schema(format!(
                "chart {index}: ranges and metric must match dim {n}"
            )));
        }
        if c.ranges
            .iter()
            .any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo < hi))
        {
            return Err(GeometryError::Schema(format!(
                "chart {index}: each range needs lo < hi"
            )));
        }
        let trim = c.trim.unwrap_or(DEFAULT_TRIM);
        if !(0.0..0.5).contains(&trim) {
            return Err(GeometryError::Schema(format!(
                "chart {index}: trim must lie in [0, 0.5)"
            )));
        }
        let mut metric = Vec::with_capacity(n);
        for (i, row) in c.metric.iter().enumerate() {
            let mut out = Vec::with_capacity(n);
            for (j, text) in row.iter().enumerate() {
                let mut e: Expr = text.parse().map_err(|source| GeometryError::Expr {
                    chart: index,
                    i,
                    j,
                    source,
                })?;
                for (name, v) in params {
                    e = e.substitute(name, &Expr::num(*v));
                }
                let e = e.simplify();
                if let Some(v) = e.free_vars().into_iter().find(|v| !coords.contains(v)) {
                    return Err(GeometryError::Schema(format!(
                        "chart {index}, metric entry ({i},{j}): unknown symbol `{v}`"
                    )));
                }
                out.push(e);
            }
            metric.push(out);
        }
        let chart = MetricChart {
            label: c.label.clone().unwrap_or_else(|| format!("chart{index}")),
            coordinates: coords.to_vec(),
            ranges: c.ranges.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
            metric,
            trim,
        };
        chart.validate(index)?;
        Ok(chart)
    }

    /// Builds a chart directly from expressions.
    pub fn new(
        coordinates: &[&str],
        ranges: &[(f64, f64)],
        metric: Vec<Vec<Expr>>,
    ) -> Result<MetricChart, GeometryError> {
        let n = coordinates.len();
        if n > MAX_DIM {
            return Err(GeometryError::DimensionTooLarge(n));
        }
        if ranges.len() != n || metric.len() != n || metric.iter().any(|r| r.len() != n) {
            return Err(GeometryError::Schema(
                "ranges and metric must match the coordinate count".into(),
            ));
        }
        let chart = MetricChart {
            label: "chart0".into(),
            coordinates: coordinates.iter().map(|s| s.to_string()).collect(),
            ranges: ranges.to_vec(),
            metric,
            trim: DEFAULT_TRIM,
        };
        chart.validate(0)?;
        Ok(chart)
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    /// Symmetry on a coarse grid, then positivity of leading minors there.
    fn validate(&self, index: usize) -> Result<(), GeometryError> {
        let n = self.dim();
        let compiled: Vec<Vec<CompiledExpr>> = self
            .metric
            .iter()
            .map(|row| row.iter().map(|e| self.compile(e)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        for x in self.grid(3) {
            let mut g = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    g[i][j] = compiled[i][j].eval(&x)?;
                }
            }
            for i in 0..n {
                for j in 0..i {
                    let scale = g[i][j].abs().max(g[j][i].abs()).max(1.0);
                    if (g[i][j] - g[j][i]).abs() > 1e-12 * scale {
                        return Err(GeometryError::NonSymmetric { chart: index, i, j });
                    }
                }
            }
            if !positive_definite(&g) {
                return Err(GeometryError::NotPositive { chart: index, point: x });
            }
        }
        Ok(())
    }

    /// Tensor grid of `k` points per axis inside the trimmed box.
    pub fn grid(&self, k: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .trimmed_ranges()
            .iter()
            .map(|(lo, hi)| (0..k).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64).collect())
            .collect();
        let mut out = vec![vec![]];
        for axis in axes {
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    axis.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Ranges shrunk by `trim` times their width at each end.
    pub fn trimmed_ranges(&self) -> Vec<(f64, f64)> {
        self.ranges
            .iter()
            .map(|(lo, hi)| {
                let w = hi - lo;
                (lo + self.trim * w, hi - self.trim * w)
            })
            .collect()
    }

    /// Uniform random points in the trimmed box.
    pub fn sample_points(&self, rng: &mut TestRng, count: usize) -> Vec<Vec<f64>> {
        let ranges = self.trimmed_ranges();
        (0..count)
            .map(|_| ranges.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect())
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.ranges.iter().zip(x).all(|((lo, hi), v)| lo <= v && v <= hi)
    }

    /// Parses `name=value,…` into a point in coordinate order.
    pub fn parse_point(&self, text: &str) -> Result<Vec<f64>, GeometryError> {
        let mut x = vec![f64::NAN; self.dim()];
        for part in text.split(',').filter(|s| !s.trim().is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| GeometryError::Schema(format!("expected name=value, got `{part}`")))?;
            let k = self
                .coordinates
                .iter()
                .position(|c| c == name.trim())
                .ok_or_else(|| GeometryError::Schema(format!("unknown coordinate `{}`", name.trim())))?;
            let v: Expr = value
                .trim()
                .parse()
                .map_err(|e| GeometryError::Schema(format!("bad value for `{}`: {e}", name.trim())))?;
            x[k] = v.eval_at(&[])?;
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(GeometryError::Schema("every coordinate needs a value".into()));
        }
        if !self.contains(&x) {
            return Err(GeometryError::OutsideChart(x));
        }
        Ok(x)
    }

    /// Gauss–Legendre integral of `density` over the full coordinate box.
    pub fn integrate(&self, density: &Expr, points_per_dim: usize) -> Result<f64, GeometryError> {
        if points_per_dim < 2 {
            return Err(GeometryError::Schema(
                "need at least 2 quadrature nodes per axis".into(),
            ));
        }
        let f = self.compile(density)?;
        Ok(crate::quadrature::integrate_box(&self.ranges, points_per_dim, |x| {
            f.eval(x)
        })?)
    }

    pub fn compile(&self, e: &Expr) -> Result<CompiledExpr, EvalError> {
        CompiledExpr::new(e, &self.coordinates)
    }

    /// Numeric metric at a point.
    pub fn metric_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        let bind: Vec<(&str, f64)> = self
            .coordinates
            .iter()
            .map(|c| c.as_str())
            .zip(x.iter().copied())
            .collect();
        self.metric
            .iter()
            .map(|row| row.iter().map(|e| e.eval_at(&bind)).collect())
            .collect()
    }
}

/// Leading principal minors positive (Sylvester).
pub fn positive_definite(g: &[Vec<f64>]) -> bool {
    (1..=g.len()).all(|k| {
        let m: Vec<Vec<f64>> = g[..k].iter().map(|r| r[..k].to_vec()).collect();
        det_f64(&m) > 0.0
    })
}

pub fn det_f64(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
                    .collect();
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * m[0][j] * det_f64(&minor)
            })
            .sum(),
    }
}
