use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_rational::Rational64;
use serde::Serialize;
use serde_json::{json, Value};

use superweyl::fiber::selftest::{self, SelftestConfig};
use superweyl::geometry::{verify_curvature_identities, Curvature, IdentityConfig, ManifoldSpec, MetricChart};
use superweyl::operators::{check_weitzenbock, hodge_symbol, test_field_suite, FieldCheckConfig};
use superweyl::report::{Check, Report};
use superweyl::tstar::{self, DCheckConfig};

const IMAG_TOL: f64 = 1e-10;
const ROUTE_TOL: f64 = 1e-8;
const MAX_FIBER_N: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub data: Value,
    pub passed: bool,
    pub wall_time_s: f64,
    #[serde(skip)]
    lines: Vec<String>,
}

impl RunReport {
    fn new(command: &str) -> RunReport {
        RunReport {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            checks: Vec::new(),
            data: Value::Null,
            passed: true,
            wall_time_s: 0.0,
            lines: Vec::new(),
        }
    }

    fn input(mut self, key: &str, v: impl Serialize) -> RunReport {
        self.inputs
            .insert(key.to_string(), serde_json::to_value(v).expect("input serializes"));
        self
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn push(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    /// Adds the checks of `r`, prefixing names with `label` when given.
    fn extend(&mut self, r: Report, label: Option<&str>) {
        for mut c in r.checks {
            if let Some(l) = label {
                c.name = format!("[{l}] {}", c.name);
            }
            self.push(c);
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "superweyl {}", self.command);
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "  {k}: {v}");
        }
        for l in &self.lines {
            let _ = writeln!(out, "  {l}");
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{status}  {}  value {:e}  tol {:e}  {}",
                c.name, c.value, c.tolerance, c.detail
            );
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let verdict = if self.passed { "pass" } else { "fail" };
        let _ = writeln!(
            out,
            "result: {verdict} ({passed}/{} checks) in {:.2} s",
            self.checks.len(),
            self.wall_time_s
        );
        out
    }
}

fn parse_r(text: &str) -> Result<Rational64, CliError> {
    text.trim()
        .parse::<Rational64>()
        .map_err(|e| CliError::Input(format!("bad rational `{text}`: {e}")))
}

fn load(path: &Path) -> Result<ManifoldSpec, CliError> {
    ManifoldSpec::load(path).map_err(input)
}

fn curvatures(spec: &ManifoldSpec) -> Result<Vec<(&MetricChart, Curvature)>, CliError> {
    spec.charts
        .iter()
        .map(|c| Ok((c, Curvature::new(c).map_err(input)?)))
        .collect()
}

fn label(spec: &ManifoldSpec, chart: &MetricChart) -> Option<String> {
    (spec.charts.len() > 1).then(|| chart.label.clone())
}

/// The chart containing `at`, or the first chart's centre.
fn locate(spec: &ManifoldSpec, at: Option<&str>) -> Result<(usize, Vec<f64>), CliError> {
    match at {
        None => {
            let x = spec.charts[0].ranges.iter().map(|(lo, hi)| (lo + hi) / 2.0).collect();
            Ok((0, x))
        }
        Some(text) => {
            let mut last = None;
            for (i, c) in spec.charts.iter().enumerate() {
                match c.parse_point(text) {
                    Ok(x) => return Ok((i, x)),
                    Err(e) => last = Some(e),
                }
            }
            Err(input(last.expect("at least one chart")))
        }
    }
}

fn fmt_point(chart: &MetricChart, x: &[f64]) -> String {
    chart
        .coordinates
        .iter()
        .zip(x)
        .map(|(c, v)| format!("{c}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn fiber_selftest(
    ns: &[usize],
    rs: &[String],
    samples: usize,
    seed: u64,
    inject_fault: bool,
) -> Result<RunReport, CliError> {
    if let Some(n) = ns.iter().find(|&&n| n == 0 || n > MAX_FIBER_N) {
        return Err(CliError::Input(format!(
            "fiber dimension {n} outside 1..={MAX_FIBER_N}"
        )));
    }
    let rs = rs.iter().map(|r| parse_r(r)).collect::<Result<Vec<_>, _>>()?;
    let cfg = SelftestConfig {
        ns: ns.to_vec(),
        rs: rs.clone(),
        random_cases: samples,
        seed,
        inject_fault,
    };
    let mut out = RunReport::new("fiber-selftest")
        .input("n", ns)
        .input("r", rs.iter().map(|r| r.to_string()).collect::<Vec<_>>())
        .input("samples", samples)
        .input("seed", seed)
        .input("inject_fault", inject_fault);
    out.extend(selftest::run(&cfg).map_err(input)?, None);
    if let Some(c) = out.checks.iter().find(|c| !c.passed) {
        let first = format!("first failing identity: {}", c.name);
        out.line(first);
    }
    Ok(out)
}

pub fn geometry(
    spec_path: &Path,
    at: Option<&str>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<RunReport, CliError> {
    let spec = load(spec_path)?;
    let (ci, x) = locate(&spec, at)?;
    let curvs = curvatures(&spec)?;
    let (chart, curv) = &curvs[ci];
    let p = curv.at(x.as_slice()).map_err(input)?;
    let n = p.n;
    let names = &chart.coordinates;
    let mut out = RunReport::new("geometry")
        .input("spec", spec_path.display().to_string())
        .input("samples", samples)
        .input("tol", tol)
        .input("seed", seed);
    out.line(format!("chart {} at {}", chart.label, fmt_point(chart, &x)));
    let mut gamma = BTreeMap::new();
    for c in 0..n {
        for a in 0..n {
            for b in a..n {
                let v = p.gamma(c, a, b);
                if v != 0.0 {
                    gamma.insert(format!("Gamma^{}_{}{}", names[c], names[a], names[b]), v);
                }
            }
        }
    }
    let mut riemann = BTreeMap::new();
    for a in 0..n {
        for b in a + 1..n {
            for k in 0..n {
                for l in 0..n {
                    let v = p.riemann(a, b, k, l);
                    if v.abs() > 1e-14 {
                        riemann.insert(format!("R_{}{}{}^{}", names[a], names[b], names[k], names[l]), v);
                    }
                }
            }
        }
    }
    let ricci: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| p.ricci(a, b)).collect()).collect();
    let scalar = p.scalar();
    for (k, v) in gamma.iter().chain(&riemann) {
        out.line(format!("{k} = {v:.12}"));
    }
    if riemann.is_empty() {
        out.line("Riemann tensor vanishes");
    }
    out.line(format!("Ric_a^b = {ricci:?}"));
    out.line(format!("scalar curvature = {scalar:.12}"));
    out.data = json!({
        "chart": chart.label,
        "point": x,
        "christoffel": gamma,
        "riemann": riemann,
        "ricci": ricci,
        "scalar": scalar,
    });
    let cfg = IdentityConfig {
        points: samples,
        seed,
        tol,
    };
    for (chart, curv) in &curvs {
        let r = verify_curvature_identities(curv, &cfg).map_err(input)?;
        out.extend(r, label(&spec, chart).as_deref());
    }
    Ok(out)
}

pub fn weitzenbock(spec_path: &Path, samples: usize, tol: f64, seed: u64) -> Result<RunReport, CliError> {
    let spec = load(spec_path)?;
    let mut out = RunReport::new("weitzenbock")
        .input("spec", spec_path.display().to_string())
        .input("samples", samples)
        .input("tol", tol)
        .input("seed", seed);
    let cfg = FieldCheckConfig {
        points: samples,
        seed,
        tol,
        ..FieldCheckConfig::default()
    };
    for (chart, curv) in curvatures(&spec)? {
        let fields = test_field_suite(&chart.coordinates);
        out.line(format!("chart {}: {} test fields", chart.label, fields.len()));
        let r = check_weitzenbock(&curv, &fields, &cfg).map_err(input)?;
        out.extend(r, label(&spec, chart).as_deref());
    }
    Ok(out)
}

pub fn laplacian_symbol(spec_path: &Path, at: Option<&str>, r: &str) -> Result<RunReport, CliError> {
    let spec = load(spec_path)?;
    let r = parse_r(r)?;
    let (ci, x) = locate(&spec, at)?;
    let curvs = curvatures(&spec)?;
    let (chart, curv) = &curvs[ci];
    let (symbol, report) = hodge_symbol(curv, &x, r).map_err(input)?;
    let mut out = RunReport::new("laplacian-symbol")
        .input("spec", spec_path.display().to_string())
        .input("r", r.to_string());
    out.line(format!("chart {} at {}", chart.label, fmt_point(chart, &x)));
    out.line(format!("sigma(box) = {symbol}"));
    out.line(format!("ring: {}", if symbol.is_exact() { "exact" } else { "numeric" }));
    out.data = json!({
        "chart": chart.label,
        "point": x,
        "exact": symbol.is_exact(),
        "pure_momentum": symbol.is_pure_momentum(),
        "symbol": symbol.to_string(),
    });
    out.extend(report, None);
    Ok(out)
}

pub fn euler(spec_path: &Path, quad: usize, tol: f64) -> Result<RunReport, CliError> {
    if quad == 0 {
        return Err(CliError::Input("--quad must be positive".into()));
    }
    let spec = load(spec_path)?;
    let report = tstar::euler_characteristic(&spec, quad).map_err(input)?;
    let st = tstar::supertrace_gaussian(&spec, quad).map_err(input)?;
    let mut out = RunReport::new("euler")
        .input("spec", spec_path.display().to_string())
        .input("quad", quad)
        .input("tol", tol);
    out.line(format!("manifold {}", report.manifold));
    for c in &report.charts {
        out.line(format!("chart {}: {:.12}", c.label, c.contribution));
    }
    out.line(format!("chi (Pfaffian) = {:.12}", report.chi_computed));
    out.line(format!("chi (supertrace) = {:.12} + {:e} i", st.re, st.im));
    if let Some(note) = &report.note {
        out.line(format!("note: {note}"));
    }
    if let (Some(e), Some(err)) = (report.chi_expected, report.abs_error) {
        out.push(Check::within(format!("chi = {e}"), err, tol));
    }
    out.push(Check::within("imaginary residual", report.imag_residual, IMAG_TOL));
    out.push(Check::within(
        "supertrace route agrees",
        (st.re - report.chi_computed).abs(),
        ROUTE_TOL,
    ));
    out.push(Check::within(
        "supertrace imaginary residual",
        st.im.abs() / st.re.abs().max(1.0),
        IMAG_TOL,
    ));
    let mut data = serde_json::to_value(&report).expect("report serializes");
    data["supertrace"] = json!({ "re": st.re, "im": st.im });
    out.data = data;
    Ok(out)
}

pub fn dcheck(spec_path: &Path, samples: usize, tol: f64, seed: u64) -> Result<RunReport, CliError> {
    let spec = load(spec_path)?;
    let cfg = DCheckConfig {
        points: samples,
        seed,
        tol,
        ..DCheckConfig::default()
    };
    let mut out = RunReport::new("dcheck")
        .input("spec", spec_path.display().to_string())
        .input("samples", samples)
        .input("tol", tol)
        .input("seed", seed);
    for (chart, curv) in curvatures(&spec)? {
        let r = tstar::dcheck(&curv, &cfg).map_err(input)?;
        out.extend(r, label(&spec, chart).as_deref());
    }
    Ok(out)
}
