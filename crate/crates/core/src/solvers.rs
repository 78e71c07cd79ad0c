//! Steady and implicit-Euler solvers for the nonlocal Dirichlet and Neumann
//! problems, with conservation and energy diagnostics.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::exterior::ExteriorData;
use crate::linalg::{cg, dot, Cholesky, DenseMatrix};
use crate::operators::{assemble, CollarOperator, DiscreteOperator, Grid1D, OperatorSpec};
use crate::quadrature::gauss_legendre;

type ForcingFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Right-hand side f(X, t) on Ω.
#[derive(Clone, Default)]
pub struct Forcing {
    f: Option<ForcingFn>,
    time_independent: bool,
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forcing")
            .field("zero", &self.f.is_none())
            .field("time_independent", &self.time_independent)
            .finish()
    }
}

impl Forcing {
    pub fn zero() -> Self {
        Self { f: None, time_independent: true }
    }

    pub fn steady<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self { f: Some(Arc::new(move |x, _| f(x))), time_independent: true }
    }

    pub fn unsteady<F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self { f: Some(Arc::new(f)), time_independent: false }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_none()
    }

    fn eval_at(&self, points: &[Vec<f64>], t: f64) -> Vec<f64> {
        match &self.f {
            None => vec![0.0; points.len()],
            Some(f) => points.iter().map(|x| f(x, t)).collect(),
        }
    }
}

/// Solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual tolerance of the conjugate gradient solves.
    pub tol: f64,
    /// Iteration cap as a multiple of the number of unknowns.
    pub max_iter_factor: usize,
    /// Largest admissible time step.
    pub tau_max: f64,
    /// Gauss points used for the per-step time averages of f and g.
    pub time_points: usize,
    /// Collar width for the Neumann problem and the flux base point;
    /// `None` uses the domain width.
    pub collar_width: Option<f64>,
    /// Keep every time level in the report.
    pub keep_trajectory: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter_factor: 10,
            tau_max: 0.5,
            time_points: 4,
            collar_width: None,
            keep_trajectory: false,
        }
    }
}

/// Nonlocal Dirichlet problem: the solution equals g on ℝⁿ\Ω.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub opr: Arc<DiscreteOperator>,
    pub g: ExteriorData,
    pub f: Forcing,
    /// Initial values on the grid (transient runs only).
    pub p0: Option<Vec<f64>>,
}

impl DirichletProblem {
    pub fn new(opr: DiscreteOperator, g: ExteriorData) -> Self {
        Self { opr: Arc::new(opr), g, f: Forcing::zero(), p0: None }
    }

    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.f = f;
        self
    }

    pub fn with_initial(mut self, p0: Vec<f64>) -> Self {
        self.p0 = Some(p0);
        self
    }
}

/// Nonlocal Neumann problem: the operator applied to p equals `g_ext` on
/// ℝ\Ω (one-dimensional). `g_ext ≡ 0` is the reflecting case.
#[derive(Debug, Clone)]
pub struct NeumannProblem {
    pub grid: Grid1D,
    pub spec: OperatorSpec,
    pub g_ext: ExteriorData,
    pub f: Forcing,
    /// Initial values on the interior nodes; boundary and collar start at 0.
    pub p0: Vec<f64>,
}

impl NeumannProblem {
    pub fn reflecting(grid: Grid1D, spec: OperatorSpec, p0: Vec<f64>) -> Self {
        Self { grid, spec, g_ext: ExteriorData::zero(), f: Forcing::zero(), p0 }
    }

    pub fn is_reflecting(&self) -> bool {
        self.g_ext.is_zero()
    }
}

/// Energy diagnostics after a time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    /// ‖p_k‖² over Ω (grid quadrature).
    pub l2_sq: f64,
    /// τ Σ_{j≤k} a(p_j, p_j): the accumulated discrete seminorm.
    pub dissipation: f64,
}

/// Output of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Node coordinates (first coordinate of each unknown).
    pub points: Vec<Vec<f64>>,
    /// Final grid values on Ω.
    pub solution: Vec<f64>,
    /// All time levels including the initial one, when requested.
    pub trajectory: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    /// Largest relative residual over all linear solves.
    pub residual_norm: f64,
    pub mass_history: Vec<f64>,
    pub energy_history: Vec<EnergyRecord>,
    /// Total linear-solver iterations.
    pub iterations: usize,
    /// Neumann runs: extended-grid nodes and final values.
    pub extended: Option<(Vec<f64>, Vec<f64>)>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    /// Writes `node,x[,y],value`.
    pub fn write_solution<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let two = self.points.first().map(|p| p.len() == 2).unwrap_or(false);
        writeln!(w, "{}", if two { "node,x,y,value" } else { "node,x,value" })?;
        for (i, (p, v)) in self.points.iter().zip(&self.solution).enumerate() {
            if two {
                writeln!(w, "{i},{:.17e},{:.17e},{:.17e}", p[0], p[1], v)?;
            } else {
                writeln!(w, "{i},{:.17e},{:.17e}", p[0], v)?;
            }
        }
        Ok(())
    }

    /// Writes `step,time,mass,energy,dissipation`.
    pub fn write_history<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,time,mass,energy,dissipation")?;
        for (k, (m, e)) in self.mass_history.iter().zip(&self.energy_history).enumerate() {
            let t = self.times.get(k).copied().unwrap_or(0.0);
            writeln!(w, "{k},{t:.17e},{m:.17e},{:.17e},{:.17e}", e.l2_sq, e.dissipation)?;
        }
        Ok(())
    }
}

fn cap(opts: &SolverOptions, n: usize) -> usize {
    (opts.max_iter_factor * n).max(10)
}

/// Solves (−A + diag_tail) p = source(g) + f.
pub fn solve_steady_dirichlet(prob: &DirichletProblem, opts: &SolverOptions) -> Result<SolveReport> {
    let opr = &prob.opr;
    let points = opr.points();
    let src = opr.source(&prob.g, 0.0)?;
    let f = prob.f.eval_at(&points, 0.0);
    let rhs: Vec<f64> = src.values.iter().zip(&f).map(|(s, f)| s + f).collect();
    let m = opr.system_matrix();
    let out = cg(&m, &rhs, None, opts.tol, cap(opts, rhs.len()))?;
    let mut warnings = opr.warnings.clone();
    if src.quadrature_error > 1e-8 {
        warnings.push(format!("exterior quadrature error estimate {:e}", src.quadrature_error));
    }
    Ok(SolveReport {
        points,
        solution: out.x,
        trajectory: Vec::new(),
        times: Vec::new(),
        residual_norm: out.relative_residual,
        mass_history: Vec::new(),
        energy_history: Vec::new(),
        iterations: out.iterations,
        extended: None,
        warnings,
    })
}

/// Probability of landing in `h` (a union of intervals in ℝ\Ω) on first
/// exit from Ω, at every grid node.
pub fn escape_probability(grid: Grid1D, spec: OperatorSpec, h: &[(f64, f64)]) -> Result<SolveReport> {
    for &(lo, hi) in h {
        if !(lo < hi) {
            return domain(format!("empty target interval ({lo}, {hi})"));
        }
        if lo < grid.b && hi > grid.a {
            return domain(format!("target ({lo}, {hi}) overlaps the domain ({}, {})", grid.a, grid.b));
        }
    }
    let opr = assemble(grid, spec)?;
    let prob = DirichletProblem::new(opr, ExteriorData::indicator(h));
    solve_steady_dirichlet(&prob, &SolverOptions::default())
}

/// One backward Euler step of the Dirichlet problem:
/// (I/τ − A + D) p_k = p_{k−1}/τ + f_k + source_k.
pub fn step_implicit(
    opr: &DiscreteOperator,
    prev: &[f64],
    tau: f64,
    f_k: &[f64],
    source_k: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let stepper = DirichletStepper::new(opr, tau, opts)?;
    Ok(stepper.step(prev, f_k, source_k)?.0)
}

struct DirichletStepper {
    matrix: DenseMatrix,
    tau: f64,
    tol: f64,
    cap: usize,
}

impl DirichletStepper {
    fn new(opr: &DiscreteOperator, tau: f64, opts: &SolverOptions) -> Result<Self> {
        if !(tau > 0.0) {
            return domain(format!("time step must be positive, got {tau}"));
        }
        if tau > opts.tau_max {
            return domain(format!("time step {tau} exceeds the configured cap {}", opts.tau_max));
        }
        let shift: Vec<f64> = opr.diagonal_tail.iter().map(|d| d + 1.0 / tau).collect();
        let matrix = opr.interior_matrix.shifted(-1.0, &shift);
        Ok(Self { matrix, tau, tol: opts.tol, cap: cap(opts, opr.len()) })
    }

    fn step(&self, prev: &[f64], f_k: &[f64], source_k: &[f64]) -> Result<(Vec<f64>, usize, f64)> {
        let n = self.matrix.dim();
        for v in [prev, f_k, source_k] {
            if v.len() != n {
                return Err(Error::Length { expected: n, got: v.len() });
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| prev[i] / self.tau + f_k[i] + source_k[i]).collect();
        let out = cg(&self.matrix, &rhs, Some(prev), self.tol, self.cap)?;
        Ok((out.x, out.iterations, out.relative_residual))
    }
}

/// Time levels of a Neumann run on the extended grid.
struct NeumannStepper {
    collar: CollarOperator,
    chol: Cholesky,
    matrix: DenseMatrix,
    mu: Vec<f64>,
    tau: f64,
}

impl NeumannStepper {
    fn new(collar: CollarOperator, tau: f64) -> Result<Self> {
        let mu = collar.mass_weights();
        let diag: Vec<f64> = mu.iter().map(|m| m / tau).collect();
        let matrix = collar.matrix.shifted(-1.0, &diag);
        let chol = Cholesky::new(&matrix)?;
        Ok(Self { collar, chol, matrix, mu, tau })
    }

    /// (diag(μ)/τ − A) p_k = diag(μ) p_{k−1}/τ + μ∘f_k − (1−μ)∘g_k
    fn step(&self, prev: &[f64], f_k: &[f64], g_k: &[f64]) -> (Vec<f64>, f64) {
        let n = self.mu.len();
        let rhs: Vec<f64> = (0..n)
            .map(|i| self.mu[i] * (prev[i] / self.tau + f_k[i]) - (1.0 - self.mu[i]) * g_k[i])
            .collect();
        let mut x = self.chol.solve(&rhs);
        // one step of iterative refinement
        let r: Vec<f64> = self.matrix.matvec(&x).iter().zip(&rhs).map(|(ax, b)| b - ax).collect();
        let dx = self.chol.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        let ax = self.matrix.matvec(&x);
        let res: f64 = ax.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let bn = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        (x, if bn > 0.0 { res / bn } else { 0.0 })
    }
}

/// Problem dispatched by [`solve_transient`].
#[derive(Debug, Clone, Copy)]
pub enum TransientProblem<'a> {
    Dirichlet(&'a DirichletProblem),
    Neumann(&'a NeumannProblem),
}

fn step_count(t_end: f64, tau: f64) -> Result<usize> {
    if !(t_end > 0.0) || !(tau > 0.0) {
        return domain("final time and time step must be positive");
    }
    let k = (t_end / tau).round();
    if k < 1.0 || (k * tau - t_end).abs() > 1e-9 * t_end {
        return domain(format!("final time {t_end} is not an integer multiple of the step {tau}"));
    }
    Ok(k as usize)
}

/// Gauss nodes in (t0, t0+τ) and weights summing to one.
fn time_rule(t0: f64, tau: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n.max(1));
    x.iter().zip(&w).map(|(x, w)| (t0 + 0.5 * tau * (x + 1.0), 0.5 * w)).collect()
}

/// Backward Euler over [0, T] with per-interval time averages of f and g.
pub fn solve_transient(prob: TransientProblem<'_>, t_end: f64, tau: f64, opts: &SolverOptions) -> Result<SolveReport> {
    match prob {
        TransientProblem::Dirichlet(p) => transient_dirichlet(p, t_end, tau, opts),
        TransientProblem::Neumann(p) => transient_neumann(p, t_end, tau, opts),
    }
}

fn transient_dirichlet(prob: &DirichletProblem, t_end: f64, tau: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let steps = step_count(t_end, tau)?;
    let opr = &prob.opr;
    let n = opr.len();
    let points = opr.points();
    let p0 = prob.p0.clone().ok_or_else(|| Error::Domain("transient run needs initial values".into()))?;
    if p0.len() != n {
        return Err(Error::Length { expected: n, got: p0.len() });
    }
    let stepper = DirichletStepper::new(opr, tau, opts)?;
    let vol = opr.cell_volume();
    let sys = opr.system_matrix();
    let grid = opr.grid();
    let mass = |p: &[f64], t: f64| -> f64 {
        let mut m = vol * p.iter().sum::<f64>();
        if !opr.is_hv() {
            let w = grid.width();
            let ga = prob.g.trace(&[grid.a], 0, -1.0, w, t);
            let gb = prob.g.trace(&[grid.b], 0, 1.0, w, t);
            m += 0.5 * vol * (ga + gb);
        }
        m
    };
    let steady_g = prob.g.is_time_independent();
    let steady_f = prob.f.time_independent;
    let fixed_source = if steady_g { Some(opr.source(&prob.g, 0.0)?.values) } else { None };
    let fixed_f = if steady_f { Some(prob.f.eval_at(&points, 0.0)) } else { None };

    let mut p = p0;
    let mut report = SolveReport {
        points: points.clone(),
        solution: Vec::new(),
        trajectory: Vec::new(),
        times: vec![0.0],
        residual_norm: 0.0,
        mass_history: vec![mass(&p, 0.0)],
        energy_history: vec![EnergyRecord { l2_sq: vol * dot(&p, &p), dissipation: 0.0 }],
        iterations: 0,
        extended: None,
        warnings: opr.warnings.clone(),
    };
    if opts.keep_trajectory {
        report.trajectory.push(p.clone());
    }
    let mut dissipation = 0.0;
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * tau;
        let rule = time_rule(t0, tau, opts.time_points);
        let f_k = match &fixed_f {
            Some(v) => v.clone(),
            None => average(rule.iter().map(|&(t, w)| (w, prob.f.eval_at(&points, t))), n),
        };
        let s_k = match &fixed_source {
            Some(v) => v.clone(),
            None => {
                let mut parts = Vec::with_capacity(rule.len());
                for &(t, w) in &rule {
                    parts.push((w, opr.source(&prob.g, t)?.values));
                }
                average(parts.into_iter(), n)
            }
        };
        let (next, it, res) = stepper.step(&p, &f_k, &s_k)?;
        p = next;
        let t = k as f64 * tau;
        let sp = sys.matvec(&p);
        dissipation += tau * vol * dot(&p, &sp);
        report.iterations += it;
        report.residual_norm = report.residual_norm.max(res);
        report.times.push(t);
        report.mass_history.push(mass(&p, t));
        report.energy_history.push(EnergyRecord { l2_sq: vol * dot(&p, &p), dissipation });
        if opts.keep_trajectory {
            report.trajectory.push(p.clone());
        }
    }
    report.solution = p;
    Ok(report)
}

fn average(parts: impl Iterator<Item = (f64, Vec<f64>)>, n: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    for (w, v) in parts {
        for (a, x) in acc.iter_mut().zip(&v) {
            *a += w * x;
        }
    }
    acc
}

fn transient_neumann(prob: &NeumannProblem, t_end: f64, tau: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let steps = step_count(t_end, tau)?;
    if tau > opts.tau_max {
        return domain(format!("time step {tau} exceeds the configured cap {}", opts.tau_max));
    }
    let grid = prob.grid;
    if prob.p0.len() != grid.n {
        return Err(Error::Length { expected: grid.n, got: prob.p0.len() });
    }
    let width = opts.collar_width.unwrap_or(grid.width());
    let collar = CollarOperator::new(grid, prob.spec, width)?;
    let nodes = collar.nodes.clone();
    let first = collar.first_interior();
    let stepper = NeumannStepper::new(collar, tau)?;
    let m = nodes.len();
    let h = grid.h();
    let pts: Vec<Vec<f64>> = nodes.iter().map(|&x| vec![x]).collect();
    let ext_at = |t: f64| -> Vec<f64> {
        if prob.g_ext.is_zero() {
            vec![0.0; m]
        } else {
            pts.iter().map(|x| prob.g_ext.eval(x, t)).collect()
        }
    };
    let mut v = vec![0.0; m];
    v[first..first + grid.n].copy_from_slice(&prob.p0);
    // boundary nodes of the closed domain take the adjacent interior value
    v[first - 1] = prob.p0[0];
    v[first + grid.n] = prob.p0[grid.n - 1];
    let mu = stepper.mu.clone();
    let mass = |v: &[f64]| h * dot(&mu, v);
    let interior = |v: &[f64]| v[first..first + grid.n].to_vec();
    let l2 = |v: &[f64]| {
        let p = interior(v);
        h * dot(&p, &p)
    };
    let mut report = SolveReport {
        points: grid.nodes().into_iter().map(|x| vec![x]).collect(),
        solution: Vec::new(),
        trajectory: Vec::new(),
        times: vec![0.0],
        residual_norm: 0.0,
        mass_history: vec![mass(&v)],
        energy_history: vec![EnergyRecord { l2_sq: l2(&v), dissipation: 0.0 }],
        iterations: 0,
        extended: None,
        warnings: prob.spec.conditioning_warning().into_iter().collect(),
    };
    if opts.keep_trajectory {
        report.trajectory.push(interior(&v));
    }
    let mut dissipation = 0.0;
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * tau;
        let rule = time_rule(t0, tau, opts.time_points);
        let f_k = if prob.f.time_independent {
            prob.f.eval_at(&pts, 0.0)
        } else {
            average(rule.iter().map(|&(t, w)| (w, prob.f.eval_at(&pts, t))), m)
        };
        let g_k = if prob.g_ext.is_time_independent() {
            ext_at(0.0)
        } else {
            average(rule.iter().map(|&(t, w)| (w, ext_at(t))), m)
        };
        let (next, res) = stepper.step(&v, &f_k, &g_k);
        v = next;
        let av = stepper.collar.matrix.matvec(&v);
        dissipation -= tau * h * dot(&v, &av);
        report.iterations += 1;
        report.residual_norm = report.residual_norm.max(res);
        report.times.push(k as f64 * tau);
        report.mass_history.push(mass(&v));
        report.energy_history.push(EnergyRecord { l2_sq: l2(&v), dissipation });
        if opts.keep_trajectory {
            report.trajectory.push(interior(&v));
        }
    }
    report.solution = interior(&v);
    report.extended = Some((nodes, v));
    Ok(report)
}

/// Flux on staggered nodes x_{m+1/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub x: Vec<f64>,
    pub j: Vec<f64>,
}

impl FluxField {
    /// Flux at the staggered node nearest to `x`.
    pub fn at(&self, x: f64) -> f64 {
        let i = self
            .x
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.j[i]
    }
}

fn cumulative_flux(nodes: &[f64], div: &[f64], h: f64) -> FluxField {
    let mut acc = 0.0;
    let mut x = Vec::with_capacity(div.len());
    let mut j = Vec::with_capacity(div.len());
    for (xi, d) in nodes.iter().zip(div) {
        acc -= h * d;
        x.push(xi + 0.5 * h);
        j.push(acc);
    }
    FluxField { x, j }
}

/// j(x) = −∫_{−∞}^x (operator applied to p)(s) ds for a field equal to p on
/// Ω and g outside. Inside Ω the divergence is the discrete operator itself;
/// outside it is evaluated on a collar, beyond which it is neglected.
pub fn flux_field(opr: &DiscreteOperator, p: &[f64], g: &ExteriorData, t: f64, opts: &SolverOptions) -> Result<FluxField> {
    if opr.is_hv() {
        return domain("flux_field is one-dimensional");
    }
    let grid = opr.grid();
    let collar = CollarOperator::new(grid, opr.spec(), opts.collar_width.unwrap_or(grid.width()))?;
    let first = collar.first_interior();
    let w = grid.width();
    let mut v: Vec<f64> = collar.nodes.iter().map(|&x| g.eval(&[x], t)).collect();
    v[first - 1] = g.trace(&[grid.a], 0, -1.0, w, t);
    v[first + grid.n] = g.trace(&[grid.b], 0, 1.0, w, t);
    v[first..first + grid.n].copy_from_slice(p);
    let mut div = collar.matrix.matvec(&v);
    let inner = opr.apply(p, g, t)?;
    div[first..first + grid.n].copy_from_slice(&inner);
    Ok(cumulative_flux(&collar.nodes, &div, grid.h()))
}

/// Flux of a Neumann solution on its extended grid.
pub fn neumann_flux(report: &SolveReport, grid: Grid1D, spec: OperatorSpec, opts: &SolverOptions) -> Result<FluxField> {
    let (nodes, v) = report
        .extended
        .as_ref()
        .ok_or_else(|| Error::Domain("report carries no extended Neumann state".into()))?;
    let collar = CollarOperator::new(grid, spec, opts.collar_width.unwrap_or(grid.width()))?;
    if collar.len() != v.len() {
        return Err(Error::Length { expected: collar.len(), got: v.len() });
    }
    let div = collar.matrix.matvec(v);
    Ok(cumulative_flux(nodes, &div, grid.h()))
}

/// Solves both problems and returns ‖p − p̃‖_∞.
pub fn dirichlet_uniqueness_check(
    prob: &DirichletProblem,
    prob_alt: &DirichletProblem,
    opts: &SolverOptions,
) -> Result<f64> {
    let a = solve_steady_dirichlet(prob, opts)?;
    let b = solve_steady_dirichlet(prob_alt, opts)?;
    Ok(a.solution.iter().zip(&b.solution).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cramer2(m: [[f64; 2]; 2], b: [f64; 2]) -> [f64; 2] {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [
            (b[0] * m[1][1] - m[0][1] * b[1]) / det,
            (m[0][0] * b[1] - b[0] * m[1][0]) / det,
        ]
    }

    #[test]
    fn two_node_steady_matches_cramer() {
        let grid = Grid1D::new(0.0, 1.0, 2).unwrap();
        let opr = assemble(grid, OperatorSpec::fractional(0.9, 1).unwrap()).unwrap();
        let g = ExteriorData::indicator(&[(1.0, 3.0)]);
        let src = opr.source(&g, 0.0).unwrap().values;
        let s = opr.system_matrix();
        let want = cramer2([[s.get(0, 0), s.get(0, 1)], [s.get(1, 0), s.get(1, 1)]], [src[0], src[1]]);
        let got = solve_steady_dirichlet(&DirichletProblem::new(opr, g), &SolverOptions::default()).unwrap();
        assert!((got.solution[0] - want[0]).abs() < 1e-12);
        assert!((got.solution[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn two_node_step_matches_cramer() {
        let grid = Grid1D::new(-1.0, 1.0, 2).unwrap();
        let opr = assemble(grid, OperatorSpec::tempered(1.3, 0.4, 1).unwrap()).unwrap();
        let tau = 0.1;
        let prev = [0.3, 0.8];
        let f = [0.1, -0.2];
        let src = [0.05, 0.02];
        let s = opr.system_matrix();
        let m = [[s.get(0, 0) + 1.0 / tau, s.get(0, 1)], [s.get(1, 0), s.get(1, 1) + 1.0 / tau]];
        let b = [prev[0] / tau + f[0] + src[0], prev[1] / tau + f[1] + src[1]];
        let want = cramer2(m, b);
        let got = step_implicit(&opr, &prev, tau, &f, &src, &SolverOptions::default()).unwrap();
        assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn time_step_validation() {
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let opr = assemble(grid, OperatorSpec::fractional(1.0, 1).unwrap()).unwrap();
        let z = vec![0.0; 4];
        assert!(step_implicit(&opr, &z, 0.6, &z, &z, &SolverOptions::default()).is_err());
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(1.0, 0.01).unwrap(), 100);
    }

    #[test]
    fn escape_target_must_lie_outside() {
        let grid = Grid1D::new(0.0, 1.0, 9).unwrap();
        let spec = OperatorSpec::fractional(1.2, 1).unwrap();
        assert!(escape_probability(grid, spec, &[(0.5, 2.0)]).is_err());
        assert!(escape_probability(grid, spec, &[(1.0, 2.0)]).is_ok());
    }
}
