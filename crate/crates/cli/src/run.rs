//! Command execution and output files.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fracbc::exterior::ExteriorData;
use fracbc::operators::{assemble, assemble_hv, Grid1D, Grid2D, OperatorSpec};
use fracbc::solvers::{
    escape_probability, solve_steady_dirichlet, solve_transient, DirichletProblem, Forcing, NeumannProblem,
    SolveReport, SolverOptions, TransientProblem,
};
use fracbc::spectral::{energy_equivalence_check, verify_tempered_identity, PeriodicField};
use fracbc::stochastic::{
    crossover_experiment, mc_escape_probability, simulate_flight, walker_rng, write_trajectories, CrossoverConfig,
    JumpLaw,
};
use fracbc::Error;

use crate::config::{AxisParams, Command, Config, DataSpec, OperatorKindCfg, OperatorParams};

/// Version string recorded in manifests.
pub fn version() -> String {
    option_env!("FRACBC_GIT_DESCRIBE")
        .map(str::to_string)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

/// Failure of a run: invalid input (exit 2) or numerics (exit 3).
#[derive(Debug)]
pub enum RunError {
    Invalid(String),
    Numeric(String),
    Io(io::Error),
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) => RunError::Invalid(m),
            other => RunError::Numeric(other.to_string()),
        }
    }
}

/// Key/value rows of diagnostics.csv.
#[derive(Debug, Default)]
pub struct Diagnostics {
    rows: Vec<(String, String)>,
}

impl Diagnostics {
    fn num(&mut self, key: &str, v: f64) {
        self.rows.push((key.into(), format!("{v:.17e}")));
    }

    fn int(&mut self, key: &str, v: impl std::fmt::Display) {
        self.rows.push((key.into(), v.to_string()));
    }

    fn text(&mut self, key: &str, v: &str) {
        // keep the two-column layout intact
        self.rows.push((key.into(), format!("\"{}\"", v.replace('"', "'"))));
    }

    fn report(&mut self, r: &SolveReport) {
        self.int("iterations", r.iterations);
        self.num("residual_norm", r.residual_norm);
        if let (Some(m0), Some(m1)) = (r.mass_history.first(), r.mass_history.last()) {
            self.num("mass_initial", *m0);
            self.num("mass_final", *m1);
        }
        for w in &r.warnings {
            self.text("warning", w);
        }
    }

    fn write(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "key,value")?;
        for (k, v) in &self.rows {
            writeln!(w, "{k},{v}")?;
        }
        w.flush()
    }
}

fn spec_of(op: OperatorParams) -> Result<OperatorSpec, RunError> {
    Ok(match op.kind {
        OperatorKindCfg::Fractional => OperatorSpec::fractional(op.beta, 1)?,
        OperatorKindCfg::Tempered => OperatorSpec::tempered(op.beta, op.lambda, 1)?,
    })
}

fn grid_of(a: AxisParams) -> Result<Grid1D, RunError> {
    Ok(Grid1D::new(a.a, a.b, a.n)?)
}

fn options(cfg: &Config) -> SolverOptions {
    let mut o = SolverOptions::default();
    if let Some(s) = &cfg.solver {
        o.tol = s.tol.unwrap_or(o.tol);
        o.max_iter_factor = s.max_iter_factor.unwrap_or(o.max_iter_factor);
        o.collar_width = s.collar_width;
    }
    if let Some(t) = &cfg.time {
        o.time_points = t.time_points.unwrap_or(o.time_points);
        o.tau_max = t.tau_max.unwrap_or(o.tau_max);
    }
    o
}

/// Exterior data from the registry.
pub fn exterior(spec: &DataSpec) -> ExteriorData {
    match spec {
        DataSpec::Zero => ExteriorData::zero(),
        DataSpec::One => ExteriorData::one(),
        DataSpec::Indicator { intervals } => {
            let iv: Vec<(f64, f64)> = intervals.iter().map(|[a, b]| (*a, *b)).collect();
            ExteriorData::indicator(&iv)
        }
        DataSpec::Power { p } => ExteriorData::power(*p),
        DataSpec::ExpDecay { c } => ExteriorData::exponential(-c),
    }
}

fn pointwise(spec: &DataSpec) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
    let g = exterior(spec);
    move |x: &[f64]| g.eval(x, 0.0)
}

fn forcing(spec: &DataSpec) -> Forcing {
    match spec {
        DataSpec::Zero => Forcing::zero(),
        s => Forcing::steady(pointwise(s)),
    }
}

fn data(cfg: &Config) -> (DataSpec, DataSpec, Option<DataSpec>) {
    let d = cfg.data.clone().unwrap_or_default();
    (d.g.unwrap_or(DataSpec::Zero), d.f.unwrap_or(DataSpec::Zero), d.p0)
}

fn time(cfg: &Config) -> (f64, f64) {
    let t = cfg.time.as_ref().expect("resolved");
    (t.t_end.expect("resolved"), t.tau.expect("resolved"))
}

fn write_report(dir: &Path, r: &SolveReport, diag: &mut Diagnostics) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(dir.join("solution.csv"))?);
    r.write_solution(&mut w)?;
    w.flush()?;
    if !r.mass_history.is_empty() {
        let mut h = BufWriter::new(fs::File::create(dir.join("history.csv"))?);
        r.write_history(&mut h)?;
        h.flush()?;
    }
    diag.report(r);
    Ok(())
}

/// Runs a resolved config and writes outputs into `dir`.
pub fn execute(cfg: &Config, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir)?;
    let mut diag = Diagnostics::default();
    let result = dispatch(cfg, dir, &mut diag);
    if let Err(RunError::Numeric(m)) = &result {
        diag.text("error", m);
    }
    diag.write(&dir.join("diagnostics.csv"))?;
    let mut manifest = cfg.clone();
    if let Some(m) = manifest.manifest.as_mut() {
        m.version = Some(version());
    }
    let text = toml::to_string(&manifest).map_err(|e| RunError::Numeric(e.to_string()))?;
    fs::write(dir.join("manifest.toml"), text)?;
    result
}

fn dispatch(cfg: &Config, dir: &Path, diag: &mut Diagnostics) -> Result<(), RunError> {
    let cmd = cfg.command().map_err(|e| RunError::Invalid(e.to_string()))?;
    let op = if cmd == Command::VerifyEnergy {
        OperatorParams { kind: OperatorKindCfg::Fractional, beta: 1.0, lambda: 0.0 }
    } else {
        cfg.operator().map_err(|e| RunError::Invalid(e.to_string()))?
    };
    let grid = || cfg.grid().map_err(|e| RunError::Invalid(e.to_string()));
    let opts = options(cfg);
    match cmd {
        Command::SolveDirichlet => {
            let (g, f, p0) = data(cfg);
            let spec = spec_of(op)?;
            let gx = grid_of(grid()?)?;
            let opr = match cfg.grid_y().map_err(|e| RunError::Invalid(e.to_string()))? {
                Some(y) => assemble_hv(Grid2D::new(gx, grid_of(y)?), [spec, spec])?,
                None => assemble(gx, spec)?,
            };
            let points = opr.points();
            let mut prob = DirichletProblem::new(opr, exterior(&g)).with_forcing(forcing(&f));
            let report = if cfg.time.is_some() {
                let p0 = pointwise(&p0.unwrap_or(DataSpec::Zero));
                prob = prob.with_initial(points.iter().map(|x| p0(x)).collect());
                let (t_end, tau) = time(cfg);
                solve_transient(TransientProblem::Dirichlet(&prob), t_end, tau, &opts)?
            } else {
                solve_steady_dirichlet(&prob, &opts)?
            };
            write_report(dir, &report, diag)?;
        }
        Command::SolveNeumann => {
            let (g, f, p0) = data(cfg);
            let grid = grid_of(grid()?)?;
            let p0 = pointwise(&p0.expect("resolved"));
            let prob = NeumannProblem {
                grid,
                spec: spec_of(op)?,
                g_ext: exterior(&g),
                f: forcing(&f),
                p0: grid.nodes().iter().map(|&x| p0(&[x])).collect(),
            };
            let (t_end, tau) = time(cfg);
            let report = solve_transient(TransientProblem::Neumann(&prob), t_end, tau, &opts)?;
            write_report(dir, &report, diag)?;
            if let (Some(m0), true) = (report.mass_history.first(), prob.is_reflecting()) {
                let drift = report.mass_history.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max);
                diag.num("max_mass_drift", if *m0 != 0.0 { drift / m0.abs() } else { drift });
            }
        }
        Command::Escape => {
            let target = cfg.target().map_err(|e| RunError::Invalid(e.to_string()))?;
            let report = escape_probability(grid_of(grid()?)?, spec_of(op)?, &target)?;
            write_report(dir, &report, diag)?;
        }
        Command::McEscape => mc_escape(cfg, op, grid()?, dir, diag)?,
        Command::Simulate => simulate(cfg, op, dir, diag)?,
        Command::Crossover => {
            let c = cfg.crossover.as_ref().expect("resolved");
            let cc = CrossoverConfig {
                samples: c.samples.expect("resolved"),
                r_min: c.r_min.expect("resolved"),
                growth: c.growth.expect("resolved"),
                m_max: c.m_max.expect("resolved"),
                seed: cfg.seed().expect("resolved"),
            };
            let lambdas = c.lambdas.clone().expect("resolved");
            let rep = crossover_experiment(op.beta, &lambdas, c.threshold.expect("resolved"), &cc)?;
            let mut w = BufWriter::new(fs::File::create(dir.join("solution.csv"))?);
            rep.write_csv(&mut w)?;
            w.flush()?;
            match rep.fitted_slope {
                Some(s) => {
                    diag.num("fitted_slope", s);
                    diag.num("expected_slope", -op.beta);
                }
                None => diag.text("fitted_slope", "unresolved"),
            }
            diag.int("unresolved", rep.m_star.iter().filter(|m| m.is_none()).count());
        }
        Command::VerifySymbol => {
            let v = cfg.verify.as_ref().expect("resolved");
            let rep = verify_tempered_identity(v.n.expect("resolved"), op.beta, op.lambda, v.k.as_ref().expect("resolved"))?;
            let mut w = BufWriter::new(fs::File::create(dir.join("solution.csv"))?);
            rep.write_csv(&mut w)?;
            w.flush()?;
            diag.num("max_rel_error", rep.max_rel_error);
        }
        Command::VerifyEnergy => {
            let v = cfg.verify.as_ref().expect("resolved");
            let (len, m, modes) = (v.length.expect("resolved"), v.points.expect("resolved"), v.modes.expect("resolved"));
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed().unwrap_or(0));
            let amps: Vec<(f64, f64)> = (0..modes).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let k0 = 2.0 * std::f64::consts::PI / len;
            let field = PeriodicField::sample(0.0, len, m, |x| {
                amps.iter()
                    .enumerate()
                    .map(|(j, (a, b))| {
                        let k = (j + 1) as f64 * k0;
                        a * (k * x).cos() + b * (k * x).sin()
                    })
                    .sum()
            })?;
            let (lhs, rhs) = energy_equivalence_check(&field);
            let mut out = String::from("node,x,value\n");
            for (i, val) in field.values.iter().enumerate() {
                writeln!(out, "{i},{:.17e},{val:.17e}", i as f64 * field.dx()).expect("string write");
            }
            fs::write(dir.join("solution.csv"), out)?;
            diag.num("half_laplacian_energy", lhs);
            diag.num("gradient_energy", rhs);
            diag.num("relative_difference", if rhs != 0.0 { (lhs - rhs).abs() / rhs } else { (lhs - rhs).abs() });
        }
    }
    Ok(())
}

fn law_of(op: OperatorParams, r_min: f64) -> Result<JumpLaw, RunError> {
    Ok(match op.kind {
        OperatorKindCfg::Fractional => JumpLaw::power_law(op.beta, r_min)?,
        OperatorKindCfg::Tempered => JumpLaw::tempered(op.beta, op.lambda, r_min)?,
    })
}

fn mc_escape(cfg: &Config, op: OperatorParams, g: AxisParams, dir: &Path, diag: &mut Diagnostics) -> Result<(), RunError> {
    let st = cfg.stochastic.as_ref().expect("resolved");
    let target = cfg.target().map_err(|e| RunError::Invalid(e.to_string()))?;
    let law = law_of(op, st.r_min.expect("resolved"))?;
    let seed = st.seed.expect("resolved");
    let (zeta, walkers) = (st.zeta.expect("resolved"), st.walkers.expect("resolved"));
    let starts = st.starts.clone().expect("resolved");
    let h = (g.b - g.a) / (g.n + 1) as f64;
    let mut out = String::from("node,x,value,stderr\n");
    let mut capped = 0u64;
    for (i, &x0) in starts.iter().enumerate() {
        // independent stream block per start point
        let s = seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let est = mc_escape_probability((g.a, g.b), x0, &target, &law, zeta, walkers, s)?;
        capped += est.tally.capped;
        let pos = (x0 - g.a) / h;
        let node = if (pos - pos.round()).abs() < 1e-9 && pos.round() >= 1.0 {
            (pos.round() as usize - 1).to_string()
        } else {
            String::new()
        };
        writeln!(out, "{node},{x0:.17e},{:.17e},{:.17e}", est.estimate, est.stderr).expect("string write");
    }
    fs::write(dir.join("solution.csv"), out)?;
    diag.int("walkers_per_start", walkers);
    diag.int("capped_walkers", capped);
    Ok(())
}

fn simulate(cfg: &Config, op: OperatorParams, dir: &Path, diag: &mut Diagnostics) -> Result<(), RunError> {
    let st = cfg.stochastic.as_ref().expect("resolved");
    let law = law_of(op, st.r_min.expect("resolved"))?;
    let (zeta, t_end) = (st.zeta.expect("resolved"), st.t_end.expect("resolved"));
    let (walkers, seed) = (st.walkers.expect("resolved"), st.seed.expect("resolved"));
    let paths = (0..walkers)
        .into_par_iter()
        .map(|id| simulate_flight(&law, zeta, t_end, &mut walker_rng(seed, id)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = String::from("walker_id,x_final,jumps\n");
    for (id, p) in paths.iter().enumerate() {
        writeln!(out, "{id},{:.17e},{}", p.final_position(), p.jumps()).expect("string write");
    }
    fs::write(dir.join("solution.csv"), out)?;
    if st.trajectories == Some(true) {
        let mut w = BufWriter::new(fs::File::create(dir.join("trajectories.csv"))?);
        write_trajectories(&mut w, &paths)?;
        w.flush()?;
    }
    let finals: Vec<f64> = paths.iter().map(|p| p.final_position()).collect();
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    diag.num("mean", mean);
    diag.num("variance", finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n);
    // empirical characteristic function against exp(ζt(Φ₀(k) − 1)) on [−5, 5]
    let mut worst: f64 = 0.0;
    for j in 0..=100 {
        let k = -5.0 + 0.1 * j as f64;
        let (re, im) = finals.iter().fold((0.0, 0.0), |(c, s), x| (c + (k * x).cos(), s + (k * x).sin()));
        let exact = (zeta * t_end * (law.jump_characteristic(k)? - 1.0)).exp();
        worst = worst.max(((re / n - exact).powi(2) + (im / n).powi(2)).sqrt());
    }
    diag.num("charfn_max_error", worst);
    diag.num("charfn_tolerance", 5.0 / n.sqrt());
    Ok(())
}
