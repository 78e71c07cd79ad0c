//! Experiment configuration: the TOML schema, defaults and validation.
//!
//! A config is parsed into [`Config`], checked by [`Config::resolve`], which
//! fills every default in place. The resolved value is what gets written to
//! the run manifest, so replaying a manifest repeats the run exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Validation failure naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(field: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { field: field.into(), message: message.into() })
}

fn need<T: Clone>(v: &Option<T>, field: &str) -> Result<T, ConfigError> {
    match v {
        Some(x) => Ok(x.clone()),
        None => bad(field, "is required for this command"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveDirichlet,
    SolveNeumann,
    Escape,
    McEscape,
    Simulate,
    Crossover,
    VerifySymbol,
    VerifyEnergy,
}

impl Command {
    fn needs_grid(self) -> bool {
        matches!(self, Command::SolveDirichlet | Command::SolveNeumann | Command::Escape | Command::McEscape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKindCfg {
    Fractional,
    Tempered,
}

/// Built-in data registry for g, f and p0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Zero,
    One,
    /// Union of intervals [lo, hi) along the first coordinate.
    Indicator { intervals: Vec<[f64; 2]> },
    /// |x|^p.
    Power { p: f64 },
    /// e^{−c|x|}.
    ExpDecay { c: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<OperatorKindCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisCfg {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Second axis; makes solve-dirichlet use the horizontal–vertical operator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<AxisCfg>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<DataSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<DataSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<DataSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter_factor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collar_width: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walkers: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    /// Starting points for mc-escape; defaults to every grid node.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<f64>>,
    /// Horizon of simulate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Write full paths from simulate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCfg {
    /// Dimension for verify-symbol (1 or 2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Wavenumbers for verify-symbol.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    /// Box length, grid size and number of random modes for verify-energy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Provenance block written into manifests; ignored on input.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<StochasticCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape: Option<EscapeCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover: Option<CrossoverCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestCfg>,
}

/// Validated operator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    pub kind: OperatorKindCfg,
    pub beta: f64,
    pub lambda: f64,
}

/// Validated interval grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisParams {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // toml reports missing/unknown keys in the message; keep it whole
            ConfigError { field: field_from_toml(&e, text), message: msg }
        })
    }

    pub fn command(&self) -> Result<Command, ConfigError> {
        need(&self.command, "command")
    }

    pub fn operator(&self) -> Result<OperatorParams, ConfigError> {
        let op = self.operator.clone().unwrap_or_default();
        let beta = need(&op.beta, "operator.beta")?;
        if !(beta > 0.0 && beta < 2.0) {
            return bad("operator.beta", format!("must lie in (0, 2), got {beta}"));
        }
        let lambda = op.lambda.unwrap_or(0.0);
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return bad("operator.lambda", format!("must be finite and non-negative, got {lambda}"));
        }
        let kind = op.kind.unwrap_or(if lambda > 0.0 { OperatorKindCfg::Tempered } else { OperatorKindCfg::Fractional });
        match kind {
            OperatorKindCfg::Fractional if lambda != 0.0 => {
                return bad("operator.lambda", "must be 0 for the fractional operator");
            }
            OperatorKindCfg::Tempered if lambda == 0.0 => {
                return bad("operator.lambda", "must be positive for the tempered operator");
            }
            OperatorKindCfg::Tempered if beta == 1.0 => {
                return bad("operator.beta", "the tempered operator excludes beta = 1");
            }
            _ => {}
        }
        Ok(OperatorParams { kind, beta, lambda })
    }

    pub fn grid(&self) -> Result<AxisParams, ConfigError> {
        let g = self.grid.clone().unwrap_or_default();
        axis(AxisCfg { a: g.a, b: g.b, n: g.n }, "grid")
    }

    pub fn grid_y(&self) -> Result<Option<AxisParams>, ConfigError> {
        match self.grid.as_ref().and_then(|g| g.y) {
            Some(y) => axis(y, "grid.y").map(Some),
            None => Ok(None),
        }
    }

    /// Checks every field the command needs and fills defaults in place.
    pub fn resolve(&mut self) -> Result<(), ConfigError> {
        let cmd = self.command()?;
        // verify-energy checks a fixed half-order identity and needs no operator
        let op = if cmd == Command::VerifyEnergy && self.operator.is_none() {
            OperatorParams { kind: OperatorKindCfg::Fractional, beta: 1.0, lambda: 0.0 }
        } else {
            let op = self.operator()?;
            self.operator = Some(OperatorCfg { kind: Some(op.kind), beta: Some(op.beta), lambda: Some(op.lambda) });
            op
        };
        if cmd.needs_grid() {
            self.grid()?;
            if cmd != Command::SolveDirichlet && self.grid_y()?.is_some() {
                return bad("grid.y", "two-dimensional grids are supported by solve-dirichlet only");
            }
        }
        let out = self.output.get_or_insert_with(Default::default);
        out.dir.get_or_insert_with(|| "fracbc-out".into());

        let data = self.data.get_or_insert_with(Default::default);
        for (name, spec) in [("data.g", &data.g), ("data.f", &data.f), ("data.p0", &data.p0)] {
            if let Some(s) = spec {
                check_data(s, name)?;
            }
        }

        let solver = self.solver.get_or_insert_with(Default::default);
        let tol = *solver.tol.get_or_insert(1e-10);
        if !(tol > 0.0 && tol < 1.0) {
            return bad("solver.tol", format!("must lie in (0, 1), got {tol}"));
        }
        if *solver.max_iter_factor.get_or_insert(10) == 0 {
            return bad("solver.max_iter_factor", "must be positive");
        }
        if let Some(w) = solver.collar_width {
            if !(w > 0.0) {
                return bad("solver.collar_width", "must be positive");
            }
        }

        match cmd {
            Command::SolveDirichlet => {
                let data = self.data.as_mut().expect("set above");
                data.g.get_or_insert(DataSpec::Zero);
                data.f.get_or_insert(DataSpec::Zero);
                if self.time.is_some() {
                    if self.grid_y()?.is_some() {
                        return bad("time", "transient runs are one-dimensional");
                    }
                    self.data.as_mut().expect("set above").p0.get_or_insert(DataSpec::Zero);
                    self.resolve_time()?;
                }
            }
            Command::SolveNeumann => {
                let data = self.data.as_mut().expect("set above");
                data.g.get_or_insert(DataSpec::Zero);
                data.f.get_or_insert(DataSpec::Zero);
                need(&data.p0, "data.p0")?;
                if self.time.is_none() {
                    return bad("time", "solve-neumann is transient; give time.t_end and time.tau");
                }
                self.resolve_time()?;
            }
            Command::Escape => {
                self.target()?;
            }
            Command::McEscape => {
                self.target()?;
                let grid = self.grid()?;
                let st = self.stochastic_mut()?;
                let walkers = need(&st.walkers, "stochastic.walkers")?;
                if walkers == 0 {
                    return bad("stochastic.walkers", "must be positive");
                }
                positive(*st.zeta.get_or_insert(1.0), "stochastic.zeta")?;
                positive(*st.r_min.get_or_insert(1e-3), "stochastic.r_min")?;
                let starts = st.starts.get_or_insert_with(|| {
                    let h = (grid.b - grid.a) / (grid.n + 1) as f64;
                    (1..=grid.n).map(|i| grid.a + i as f64 * h).collect()
                });
                if let Some(x) = starts.iter().find(|&&x| !(x > grid.a && x < grid.b)) {
                    return bad("stochastic.starts", format!("start {x} lies outside the grid interval"));
                }
            }
            Command::Simulate => {
                if op.kind == OperatorKindCfg::Tempered && op.beta == 1.0 {
                    return bad("operator.beta", "tempered flights exclude beta = 1");
                }
                let st = self.stochastic_mut()?;
                let walkers = need(&st.walkers, "stochastic.walkers")?;
                if walkers == 0 {
                    return bad("stochastic.walkers", "must be positive");
                }
                positive(*st.zeta.get_or_insert(1.0), "stochastic.zeta")?;
                positive(*st.r_min.get_or_insert(1e-3), "stochastic.r_min")?;
                positive(need(&st.t_end, "stochastic.t_end")?, "stochastic.t_end")?;
                st.trajectories.get_or_insert(false);
            }
            Command::Crossover => {
                self.stochastic_mut()?;
                let c = self.crossover.get_or_insert_with(Default::default);
                let lambdas = need(&c.lambdas, "crossover.lambdas")?;
                if lambdas.len() < 2 || lambdas.iter().any(|&l| !(l > 0.0)) {
                    return bad("crossover.lambdas", "needs at least two positive values");
                }
                let th = *c.threshold.get_or_insert(0.02);
                if !(th > 0.0 && th < 1.0) {
                    return bad("crossover.threshold", "must lie in (0, 1)");
                }
                if *c.samples.get_or_insert(100_000) < 2 {
                    return bad("crossover.samples", "must be at least 2");
                }
                positive(*c.r_min.get_or_insert(0.01), "crossover.r_min")?;
                if !(*c.growth.get_or_insert(1.2) > 1.0) {
                    return bad("crossover.growth", "must exceed 1");
                }
                if *c.m_max.get_or_insert(200_000) < 1 {
                    return bad("crossover.m_max", "must be positive");
                }
                if op.beta == 1.0 {
                    return bad("operator.beta", "tempered flights exclude beta = 1");
                }
            }
            Command::VerifySymbol => {
                if op.kind != OperatorKindCfg::Tempered {
                    return bad("operator.lambda", "verify-symbol checks the tempered operator; set lambda > 0");
                }
                let v = self.verify.get_or_insert_with(Default::default);
                let n = *v.n.get_or_insert(1);
                if !(n == 1 || n == 2) {
                    return bad("verify.n", format!("must be 1 or 2, got {n}"));
                }
                let ks = v.k.get_or_insert_with(|| (1..=100).map(|j| j as f64 / 10.0).collect());
                if ks.is_empty() || ks.iter().any(|k| !k.is_finite()) {
                    return bad("verify.k", "needs finite wavenumbers");
                }
            }
            Command::VerifyEnergy => {
                let v = self.verify.get_or_insert_with(Default::default);
                positive(*v.length.get_or_insert(2.0 * std::f64::consts::PI), "verify.length")?;
                let m = *v.points.get_or_insert(256);
                if !m.is_power_of_two() || m < 4 {
                    return bad("verify.points", format!("must be a power of two of at least 4, got {m}"));
                }
                let modes = *v.modes.get_or_insert(8);
                if modes == 0 || modes >= m / 2 {
                    return bad("verify.modes", "must lie between 1 and points/2 − 1");
                }
                self.stochastic.get_or_insert_with(Default::default).seed.get_or_insert(0);
            }
        }
        let seed = self.stochastic.as_ref().and_then(|s| s.seed);
        self.manifest = Some(ManifestCfg { version: None, seed });
        Ok(())
    }

    fn stochastic_mut(&mut self) -> Result<&mut StochasticCfg, ConfigError> {
        let st = self.stochastic.get_or_insert_with(Default::default);
        need(&st.seed, "stochastic.seed")?;
        Ok(st)
    }

    fn resolve_time(&mut self) -> Result<(), ConfigError> {
        let t = self.time.get_or_insert_with(Default::default);
        let t_end = need(&t.t_end, "time.t_end")?;
        let tau = need(&t.tau, "time.tau")?;
        positive(t_end, "time.t_end")?;
        positive(tau, "time.tau")?;
        let k = (t_end / tau).round();
        if k < 1.0 || (k * tau - t_end).abs() > 1e-9 * t_end {
            return bad("time.tau", format!("t_end = {t_end} is not an integer multiple of tau = {tau}"));
        }
        if *t.time_points.get_or_insert(4) == 0 {
            return bad("time.time_points", "must be positive");
        }
        let cap = *t.tau_max.get_or_insert(0.5);
        if tau > cap {
            return bad("time.tau", format!("exceeds time.tau_max = {cap}"));
        }
        Ok(())
    }

    pub fn target(&self) -> Result<Vec<(f64, f64)>, ConfigError> {
        let t = need(&self.escape.as_ref().and_then(|e| e.target.clone()), "escape.target")?;
        if t.is_empty() {
            return bad("escape.target", "needs at least one interval");
        }
        let g = self.grid()?;
        let mut out = Vec::with_capacity(t.len());
        for [lo, hi] in t {
            if !(lo < hi) {
                return bad("escape.target", format!("empty interval [{lo}, {hi}]"));
            }
            if lo < g.b && hi > g.a {
                return bad("escape.target", format!("interval [{lo}, {hi}] overlaps the domain"));
            }
            out.push((lo, hi));
        }
        Ok(out)
    }

    pub fn output_dir(&self) -> String {
        self.output.as_ref().and_then(|o| o.dir.clone()).unwrap_or_else(|| "fracbc-out".into())
    }

    pub fn seed(&self) -> Option<u64> {
        self.stochastic.as_ref().and_then(|s| s.seed)
    }
}

fn axis(c: AxisCfg, prefix: &str) -> Result<AxisParams, ConfigError> {
    let a = need(&c.a, &format!("{prefix}.a"))?;
    let b = need(&c.b, &format!("{prefix}.b"))?;
    let n = need(&c.n, &format!("{prefix}.n"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return bad(&format!("{prefix}.b"), format!("needs a < b, got a = {a}, b = {b}"));
    }
    if n == 0 {
        return bad(&format!("{prefix}.n"), "needs at least one interior node");
    }
    Ok(AxisParams { a, b, n })
}

fn positive(v: f64, field: &str) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        bad(field, format!("must be positive, got {v}"))
    }
}

fn check_data(s: &DataSpec, field: &str) -> Result<(), ConfigError> {
    match s {
        DataSpec::Indicator { intervals } => {
            if intervals.iter().any(|[lo, hi]| !(lo < hi)) {
                return bad(field, "indicator intervals need lo < hi");
            }
        }
        DataSpec::Power { p } if !(p.is_finite() && *p >= 0.0) => return bad(field, "power exponent must be >= 0"),
        DataSpec::ExpDecay { c } if !(c.is_finite() && *c >= 0.0) => return bad(field, "decay rate must be >= 0"),
        _ => {}
    }
    Ok(())
}

/// Best-effort dotted key path for a TOML error, from its byte span.
fn field_from_toml(e: &toml::de::Error, text: &str) -> String {
    let Some(span) = e.span() else { return "<config>".into() };
    let before = &text[..span.start.min(text.len())];
    let section = before
        .lines()
        .rev()
        .find_map(|l| {
            let l = l.trim();
            l.strip_prefix('[').and_then(|r| r.strip_suffix(']')).map(str::to_string)
        })
        .unwrap_or_default();
    let line = text[span.start.min(text.len())..].lines().next().unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim();
    match (section.is_empty(), key.is_empty() || key.starts_with('[')) {
        (true, true) => "<config>".into(),
        (true, false) => key.into(),
        (false, true) => section,
        (false, false) => format!("{section}.{key}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ESCAPE: &str = r#"
command = "escape"
[operator]
beta = 1.2
[grid]
a = 0.0
b = 1.0
n = 9
[escape]
target = [[1.0, 2.0]]
"#;

    #[test]
    fn resolves_defaults() {
        let mut c = Config::parse(ESCAPE).unwrap();
        c.resolve().unwrap();
        assert_eq!(c.operator().unwrap().kind, OperatorKindCfg::Fractional);
        assert_eq!(c.output_dir(), "fracbc-out");
        assert_eq!(c.solver.as_ref().unwrap().tol, Some(1e-10));
    }

    #[test]
    fn resolution_is_idempotent() {
        let mut c = Config::parse(ESCAPE).unwrap();
        c.resolve().unwrap();
        let text = toml::to_string(&c).unwrap();
        let mut again = Config::parse(&text).unwrap();
        again.resolve().unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn missing_beta_is_named() {
        let mut c = Config::parse(&ESCAPE.replace("beta = 1.2", "")).unwrap();
        assert_eq!(c.resolve().unwrap_err().field, "operator.beta");
    }

    #[test]
    fn unknown_key_is_named() {
        let e = Config::parse(&ESCAPE.replace("beta = 1.2", "beta = 1.2\nbetta = 3")).unwrap_err();
        assert_eq!(e.field, "operator.betta");
    }

    #[test]
    fn stochastic_commands_need_a_seed() {
        let text = ESCAPE.replace("\"escape\"", "\"mc-escape\"") + "[stochastic]\nwalkers = 10\n";
        let mut c = Config::parse(&text).unwrap();
        assert_eq!(c.resolve().unwrap_err().field, "stochastic.seed");
    }

    #[test]
    fn overlapping_target_is_rejected() {
        let mut c = Config::parse(&ESCAPE.replace("[[1.0, 2.0]]", "[[0.5, 2.0]]")).unwrap();
        assert_eq!(c.resolve().unwrap_err().field, "escape.target");
    }

    #[test]
    fn tau_must_divide_the_horizon() {
        let text = ESCAPE.replace("\"escape\"", "\"solve-dirichlet\"") + "[time]\nt_end = 1.0\ntau = 0.3\n";
        let mut c = Config::parse(&text).unwrap();
        assert_eq!(c.resolve().unwrap_err().field, "time.tau");
    }
}
