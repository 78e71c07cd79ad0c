//! Quadrature discretisation of the fractional and tempered fractional
//! Laplacians on a uniform grid over Ω = (a, b).
//!
//! The singular integral at node x_i is split into three parts:
//!
//! * an interior part, where the unknown is interpolated piecewise
//!   linearly between nodes (with the boundary traces of g at both ends)
//!   and the near field uses the symmetric second difference; this gives a
//!   symmetric Toeplitz matrix `A` with zero row sums;
//! * the exact integral of the kernel over ℝ\Ω times −p(x_i), folded into a
//!   positive diagonal `diagonal_tail` together with the weights of the two
//!   boundary half-hats;
//! * a source holding the exterior integral of g against the kernel and the
//!   boundary trace contributions.
//!
//! `apply(p) = A p − diagonal_tail ∘ p + source(g)`. For p ≡ 1 and g ≡ 1 the
//! three parts cancel identically.
//!
//! An Euler–Maclaurin correction removes the leading O(h^{2−β}) error of
//! the linear interpolation, so the scheme is second order in the bulk for
//! every β whenever the correction keeps the nearest-neighbour weight
//! positive.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{domain, Error, Result};
use crate::exterior::{check_growth, ExteriorData, GrowthCheck, GrowthKind};
use crate::linalg::DenseMatrix;
use crate::quadrature::{gl16, integrate_points};
use crate::special::{
    frac_lap_coeff, fractional_symbol, gamma, lower_gamma, tempered_coeff, tempered_symbol,
    upper_gamma, SymbolQuery,
};

/// Operator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Fractional,
    Tempered,
}

/// Order, tempering and dimension of an operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub beta: f64,
    pub lambda: f64,
    pub n: usize,
}

impl OperatorSpec {
    pub fn fractional(beta: f64, n: usize) -> Result<Self> {
        let s = Self { kind: OperatorKind::Fractional, beta, lambda: 0.0, n };
        s.validate()?;
        Ok(s)
    }

    pub fn tempered(beta: f64, lambda: f64, n: usize) -> Result<Self> {
        let s = Self { kind: OperatorKind::Tempered, beta, lambda, n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n == 1 || self.n == 2) {
            return domain(format!("dimension must be 1 or 2, got {}", self.n));
        }
        if !(self.beta > 0.0 && self.beta < 2.0) {
            return domain(format!("beta must lie in (0,2), got {}", self.beta));
        }
        match self.kind {
            OperatorKind::Fractional if self.lambda != 0.0 => {
                domain("fractional operator requires lambda = 0")
            }
            OperatorKind::Tempered if !(self.lambda > 0.0 && self.lambda.is_finite()) => {
                domain(format!("tempered operator requires lambda > 0, got {}", self.lambda))
            }
            OperatorKind::Tempered if self.beta == 1.0 => {
                domain("tempered operator excludes beta = 1")
            }
            _ => Ok(()),
        }
    }

    /// Positive constant multiplying the jump kernel w(r) r^{−n−β}.
    ///
    /// For the tempered family this is |c_{n,β,λ}|: the literal constant is
    /// negative for β ∈ (1,2), which would make the operator anti-diffusive.
    pub fn kernel_coeff(&self) -> f64 {
        match self.kind {
            OperatorKind::Fractional => frac_lap_coeff(self.n, self.beta).expect("validated"),
            OperatorKind::Tempered => tempered_coeff(self.n, self.beta).expect("validated").abs(),
        }
    }

    /// Fourier multiplier of the operator with kernel constant
    /// [`kernel_coeff`](Self::kernel_coeff); always ≤ 0.
    pub fn multiplier(&self, k: f64) -> f64 {
        match self.kind {
            OperatorKind::Fractional => {
                fractional_symbol(&SymbolQuery { n: self.n, beta: self.beta, lambda: 0.0, k: k.abs() })
            }
            OperatorKind::Tempered => {
                let q = SymbolQuery { n: self.n, beta: self.beta, lambda: self.lambda, k: k.abs() };
                let s = tempered_symbol(&q).expect("validated");
                let c = tempered_coeff(self.n, self.beta).expect("validated");
                c.signum() * s
            }
        }
    }

    /// Warning text when β is close to the ends of (0, 2).
    pub fn conditioning_warning(&self) -> Option<String> {
        if self.beta < 0.05 || self.beta > 1.95 {
            Some(format!("beta = {} is outside [0.05, 1.95]; the discretisation is ill-conditioned", self.beta))
        } else {
            None
        }
    }

    fn kernel(&self) -> Kernel {
        Kernel { beta: self.beta, lambda: self.lambda }
    }
}

/// Uniform grid on (a, b) with `n` interior nodes x_i = a + i h, i = 1..=n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return domain(format!("grid needs finite a < b, got ({a}, {b})"));
        }
        if n == 0 {
            return domain("grid needs at least one interior node");
        }
        Ok(Self { a, b, n })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n as f64 + 1.0)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Interior node with zero-based index `i` (that is, x_{i+1}).
    pub fn node(&self, i: usize) -> f64 {
        self.a + (i as f64 + 1.0) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Tensor grid over a rectangle; unknowns are ordered with x fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Self { x, y }
    }

    pub fn len(&self) -> usize {
        self.x.n * self.y.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.x.n * j
    }
}

/// One-dimensional radial kernel w(r) r^{−1−β}, w = 1 or e^{−λr}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Kernel {
    beta: f64,
    lambda: f64,
}

impl Kernel {
    #[inline]
    fn eval(&self, r: f64) -> f64 {
        let p = r.powf(-1.0 - self.beta);
        if self.lambda > 0.0 {
            p * (-self.lambda * r).exp()
        } else {
            p
        }
    }

    /// ∫_d^∞ K(r) dr.
    fn tail(&self, d: f64) -> f64 {
        if self.lambda > 0.0 {
            self.lambda.powf(self.beta) * upper_gamma(-self.beta, self.lambda * d).expect("d > 0")
        } else {
            d.powf(-self.beta) / self.beta
        }
    }

    /// (1/h²) ∫_0^h r² K(r) dr.
    fn near_field(&self, h: f64) -> f64 {
        if self.lambda > 0.0 {
            let s = 2.0 - self.beta;
            self.lambda.powf(-s) * lower_gamma(s, self.lambda * h).expect("s > 0") / (h * h)
        } else {
            h.powf(-self.beta) / (2.0 - self.beta)
        }
    }
}

/// Unscaled quadrature weights of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisWeights {
    /// `omega[m]` couples nodes m steps apart (index 0 unused).
    pub omega: Vec<f64>,
    /// `nu[m]` couples a node m steps from a boundary node to the boundary
    /// trace of g (index 0 unused).
    pub nu: Vec<f64>,
    /// Euler–Maclaurin correction subtracted from the nearest-neighbour weight.
    pub kappa: f64,
    /// (1/h²)∫_0^h r² K.
    pub near: f64,
}

impl AxisWeights {
    fn compute(kernel: Kernel, h: f64, m_max: usize) -> Self {
        let cells = m_max + 1;
        // cell j = [jh, (j+1)h]: i0 = ∫K, i1 = ∫(r/h − j)K
        let mut i0 = vec![0.0; cells + 1];
        let mut i1 = vec![0.0; cells + 1];
        for j in 1..=cells {
            let lo = j as f64 * h;
            i0[j] = gl16(|r| kernel.eval(r), lo, lo + h);
            i1[j] = gl16(|r| (r / h - j as f64) * kernel.eval(r), lo, lo + h);
        }
        let near = kernel.near_field(h);
        let kappa_full = bubble_integral(kernel, h);
        let rise = |m: usize| i1[m - 1];
        let fall = |m: usize| i0[m] - i1[m];
        let raw1 = near + fall(1);
        let kappa = if raw1 - kappa_full > 0.0 && near - 0.5 * kappa_full > 0.0 { kappa_full } else { 0.0 };
        let mut omega = vec![0.0; m_max + 1];
        let mut nu = vec![0.0; m_max + 1];
        for m in 1..=m_max {
            if m == 1 {
                omega[1] = raw1 - kappa;
                nu[1] = near - 0.5 * kappa;
            } else {
                omega[m] = rise(m) + fall(m);
                nu[m] = rise(m);
            }
        }
        Self { omega, nu, kappa, near }
    }
}

/// (1/h²) ∫_h^∞ B(r) K(r) dr with B the periodic bubble (r − jh)((j+1)h − r).
fn bubble_integral(kernel: Kernel, h: f64) -> f64 {
    const CELLS: usize = 4000;
    let mut sum = 0.0;
    let mut last = CELLS;
    for j in 1..=CELLS {
        let lo = j as f64 * h;
        let v = gl16(|r| (r - lo) * (lo + h - r) * kernel.eval(r), lo, lo + h) / (h * h);
        sum += v;
        if kernel.lambda > 0.0 && kernel.lambda * lo > 45.0 {
            last = j;
            break;
        }
    }
    // mean of s(1−s) over a cell is 1/6
    sum + kernel.tail((last + 1) as f64 * h) / 6.0
}

/// Discrete operator along one axis of a (tensor) grid.
#[derive(Debug, Clone)]
pub struct AxisOperator {
    pub grid: Grid1D,
    pub spec: OperatorSpec,
    /// Kernel constant c.
    pub coeff: f64,
    pub weights: AxisWeights,
    /// c ∫_{ℝ\Ω} K(|x_i − Y|) dY.
    pub complement_tail: Vec<f64>,
    /// c ν for the trace at a.
    pub trace_left: Vec<f64>,
    /// c ν for the trace at b.
    pub trace_right: Vec<f64>,
    kernel: Kernel,
}

impl AxisOperator {
    pub fn new(grid: Grid1D, spec: OperatorSpec) -> Result<Self> {
        spec.validate()?;
        Self::with_reach(grid, spec, grid.n + 1)
    }

    fn with_reach(grid: Grid1D, spec: OperatorSpec, m_max: usize) -> Result<Self> {
        let mut s1 = spec;
        s1.n = 1;
        let coeff = s1.kernel_coeff();
        let kernel = s1.kernel();
        let h = grid.h();
        let weights = AxisWeights::compute(kernel, h, m_max.max(grid.n + 1));
        let n = grid.n;
        let complement_tail = (0..n)
            .map(|i| {
                let x = grid.node(i);
                coeff * (kernel.tail(x - grid.a) + kernel.tail(grid.b - x))
            })
            .collect();
        let trace_left = (0..n).map(|i| coeff * weights.nu[i + 1]).collect();
        let trace_right = (0..n).map(|i| coeff * weights.nu[n - i]).collect();
        Ok(Self { grid, spec: s1, coeff, weights, complement_tail, trace_left, trace_right, kernel })
    }

    /// Off-diagonal entry of the interior matrix for nodes m steps apart.
    pub fn offdiag(&self, m: usize) -> f64 {
        self.coeff * self.weights.omega[m]
    }

    /// Interior matrix: symmetric Toeplitz with zero row sums.
    pub fn matrix(&self) -> DenseMatrix {
        toeplitz_generator(self.grid.n, |m| self.offdiag(m))
    }

    /// Diagonal tail c(T_i + ν_i^L + ν_i^R).
    pub fn diagonal_tail(&self) -> Vec<f64> {
        (0..self.grid.n)
            .map(|i| self.complement_tail[i] + self.trace_left[i] + self.trace_right[i])
            .collect()
    }

    /// c ∫_{ℝ\Ω} g K(|x − Y|) dY along the line through `point`.
    fn line_exterior(
        &self,
        axis: usize,
        point: &[f64],
        g: &ExteriorData,
        t: f64,
        radius: f64,
    ) -> Result<LineIntegral> {
        let x = point[axis];
        let (a, b) = (self.grid.a, self.grid.b);
        let beta = self.kernel.beta;
        let lambda = self.kernel.lambda;
        let bps: Vec<f64> = if axis == 0 { g.breakpoints() } else { Vec::new() };
        let mut total = 0.0;
        let mut err = 0.0;
        for side in [-1.0f64, 1.0] {
            let d = if side < 0.0 { x - a } else { b - x };
            let tmax = d.powf(-beta);
            let mut pts = vec![0.0, tmax, (d + radius).powf(-beta)];
            for &y in &bps {
                let u = side * (y - x);
                if u > d {
                    pts.push(u.powf(-beta));
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let f = |s: f64| {
                let u = s.powf(-1.0 / beta);
                let mut y = point.to_vec();
                y[axis] = x + side * u;
                let w = if lambda > 0.0 { (-lambda * u).exp() } else { 1.0 };
                g.eval(&y, t) * w / beta
            };
            let scale = tmax / beta;
            let r = integrate_points(f, &pts, 1e-15 * scale, 1e-13)?;
            total += r.value;
            err += r.error;
        }
        // far-field envelope bound beyond the truncation radius
        let gr = g.growth;
        let dmin = (x - a).min(b - x) + radius;
        let xn = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        let far = match gr.kind {
            GrowthKind::Polynomial => {
                gr.constant * 2f64.powf(beta - gr.margin) * dmin.powf(-gr.margin) / gr.margin
            }
            GrowthKind::Exponential => {
                gr.constant * ((lambda - gr.margin) * xn).exp() * dmin.powf(-1.0 - beta) * (-gr.margin * dmin).exp()
                    / gr.margin
            }
        };
        Ok(LineIntegral {
            value: self.coeff * total,
            error: self.coeff * err,
            far_bound: 2.0 * self.coeff * far,
        })
    }

    fn trace_terms(&self, i: usize, point: &[f64], axis: usize, g: &ExteriorData, t: f64) -> f64 {
        let w = self.grid.width();
        let mut pa = point.to_vec();
        pa[axis] = self.grid.a;
        let mut pb = point.to_vec();
        pb[axis] = self.grid.b;
        self.trace_left[i] * g.trace(&pa, axis, -1.0, w, t) + self.trace_right[i] * g.trace(&pb, axis, 1.0, w, t)
    }
}

struct LineIntegral {
    value: f64,
    error: f64,
    far_bound: f64,
}

fn toeplitz_generator(n: usize, w: impl Fn(usize) -> f64) -> DenseMatrix {
    let mut m = DenseMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { w(i.abs_diff(j)) });
    for i in 0..n {
        // row sums in a fixed, symmetric order
        let s: f64 = (1..n).map(|d| {
            let mut v = 0.0;
            if i >= d {
                v += w(d);
            }
            if i + d < n {
                v += w(d);
            }
            v
        }).sum();
        m.set(i, i, -s);
    }
    m
}

/// Exterior-data contribution to the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorSource {
    /// Full source: exterior integral plus boundary-trace terms.
    pub values: Vec<f64>,
    /// c ∫_{ℝ\Ω} g K dY alone.
    pub exterior: Vec<f64>,
    /// Summed adaptive-quadrature error estimate (max over nodes).
    pub quadrature_error: f64,
    /// Envelope bound on the integral beyond the truncation radius (max over nodes).
    pub far_field_bound: f64,
}

/// Assembled discrete operator.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub interior_matrix: DenseMatrix,
    /// Positive diagonal: complement tail plus boundary trace weights.
    pub diagonal_tail: Vec<f64>,
    /// c ∫_{ℝⁿ\Ω} K(X − Y) dY alone.
    pub complement_tail: Vec<f64>,
    /// One axis operator in 1D, two for the horizontal–vertical operator.
    pub axes: Vec<AxisOperator>,
    pub warnings: Vec<String>,
}

/// Assembles the one-dimensional operator.
pub fn assemble(grid: Grid1D, spec: OperatorSpec) -> Result<DiscreteOperator> {
    if spec.n != 1 {
        return domain("assemble handles one-dimensional operators; use assemble_hv for rectangles");
    }
    let axis = AxisOperator::new(grid, spec)?;
    let warnings = spec.conditioning_warning().into_iter().collect();
    Ok(DiscreteOperator {
        interior_matrix: axis.matrix(),
        diagonal_tail: axis.diagonal_tail(),
        complement_tail: axis.complement_tail.clone(),
        axes: vec![axis],
        warnings,
    })
}

/// Assembles the horizontal–vertical operator: the sum of one-dimensional
/// operators acting along each axis of a rectangle.
pub fn assemble_hv(grid: Grid2D, specs: [OperatorSpec; 2]) -> Result<DiscreteOperator> {
    let ax = AxisOperator::new(grid.x, specs[0])?;
    let ay = AxisOperator::new(grid.y, specs[1])?;
    let (nx, ny) = (grid.x.n, grid.y.n);
    let n = nx * ny;
    let mx = ax.matrix();
    let my = ay.matrix();
    let mut m = DenseMatrix::zeros(n);
    for j in 0..ny {
        for i in 0..nx {
            let r = grid.index(i, j);
            for i2 in 0..nx {
                let c = grid.index(i2, j);
                m.set(r, c, m.get(r, c) + mx.get(i, i2));
            }
            for j2 in 0..ny {
                let c = grid.index(i, j2);
                m.set(r, c, m.get(r, c) + my.get(j, j2));
            }
        }
    }
    let dtx = ax.diagonal_tail();
    let dty = ay.diagonal_tail();
    let mut diag = vec![0.0; n];
    let mut tail = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            diag[grid.index(i, j)] = dtx[i] + dty[j];
            tail[grid.index(i, j)] = ax.complement_tail[i] + ay.complement_tail[j];
        }
    }
    let warnings = specs.iter().filter_map(|s| s.conditioning_warning()).collect();
    Ok(DiscreteOperator {
        interior_matrix: m,
        diagonal_tail: diag,
        complement_tail: tail,
        axes: vec![ax, ay],
        warnings,
    })
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.diagonal_tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_hv(&self) -> bool {
        self.axes.len() == 2
    }

    /// Grid of the first axis.
    pub fn grid(&self) -> Grid1D {
        self.axes[0].grid
    }

    pub fn spec(&self) -> OperatorSpec {
        self.axes[0].spec
    }

    /// Cell volume h or h₁h₂.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.grid.h()).product()
    }

    /// Coordinates of the unknowns.
    pub fn points(&self) -> Vec<Vec<f64>> {
        if self.is_hv() {
            let (gx, gy) = (self.axes[0].grid, self.axes[1].grid);
            let mut out = Vec::with_capacity(self.len());
            for j in 0..gy.n {
                for i in 0..gx.n {
                    out.push(vec![gx.node(i), gy.node(j)]);
                }
            }
            out
        } else {
            self.grid().nodes().into_iter().map(|x| vec![x]).collect()
        }
    }

    /// The symmetric positive definite matrix −A + diag(diagonal_tail).
    pub fn system_matrix(&self) -> DenseMatrix {
        self.interior_matrix.shifted(-1.0, &self.diagonal_tail)
    }

    /// Exterior source for data g at time t.
    pub fn source(&self, g: &ExteriorData, t: f64) -> Result<ExteriorSource> {
        let n = self.len();
        if g.is_zero() {
            return Ok(ExteriorSource {
                values: vec![0.0; n],
                exterior: vec![0.0; n],
                quadrature_error: 0.0,
                far_field_bound: 0.0,
            });
        }
        for ax in &self.axes {
            let mut s = ax.spec;
            s.n = self.axes.len();
            if let GrowthCheck::Fail { radius, value, bound } = check_growth(g, &s) {
                return Err(Error::Growth { radius, value, bound });
            }
        }
        let mut values = vec![0.0; n];
        let mut exterior = vec![0.0; n];
        let mut qerr: f64 = 0.0;
        let mut far: f64 = 0.0;
        let points = self.points();
        for (k, p) in points.iter().enumerate() {
            let idx = if self.is_hv() {
                let nx = self.axes[0].grid.n;
                [k % nx, k / nx]
            } else {
                [k, 0]
            };
            let mut e = 0.0;
            let mut tr = 0.0;
            let mut qe = 0.0;
            let mut fb = 0.0;
            for (axis, ax) in self.axes.iter().enumerate() {
                let radius = g.truncation_radius.unwrap_or(50.0 * ax.grid.width());
                let li = ax.line_exterior(axis, p, g, t, radius)?;
                e += li.value;
                qe += li.error;
                fb += li.far_bound;
                tr += ax.trace_terms(idx[axis], p, axis, g, t);
            }
            exterior[k] = e;
            values[k] = e + tr;
            qerr = qerr.max(qe);
            far = far.max(fb);
        }
        Ok(ExteriorSource { values, exterior, quadrature_error: qerr, far_field_bound: far })
    }

    /// A p − diagonal_tail ∘ p.
    pub fn apply_homogeneous(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.len() {
            return Err(Error::Length { expected: self.len(), got: p.len() });
        }
        let mut y = self.interior_matrix.matvec(p);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi -= self.diagonal_tail[i] * p[i];
        }
        Ok(y)
    }

    /// A p − diagonal_tail ∘ p + source(g, t).
    pub fn apply(&self, p: &[f64], g: &ExteriorData, t: f64) -> Result<Vec<f64>> {
        let mut y = self.apply_homogeneous(p)?;
        let s = self.source(g, t)?;
        for (yi, si) in y.iter_mut().zip(&s.values) {
            *yi += si;
        }
        Ok(y)
    }

    /// Writes the interior matrix as `row,col,value` triplets (nonzeros only).
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,value")?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let v = self.interior_matrix.get(i, j);
                if v != 0.0 {
                    writeln!(w, "{i},{j},{v:e}")?;
                }
            }
        }
        Ok(())
    }

    /// Writes `node,x,diagonal_tail,complement_tail` rows (1D coordinates of the first axis).
    pub fn write_tails<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "node,x,diagonal_tail,complement_tail")?;
        for (i, p) in self.points().iter().enumerate() {
            writeln!(w, "{i},{:e},{:e},{:e}", p[0], self.diagonal_tail[i], self.complement_tail[i])?;
        }
        Ok(())
    }
}

/// Free-function form of [`DiscreteOperator::apply`].
pub fn apply(opr: &DiscreteOperator, p: &[f64], g: &ExteriorData, t: f64) -> Result<Vec<f64>> {
    opr.apply(p, g, t)
}

/// Exterior source on a one-dimensional grid.
pub fn exterior_source(grid: Grid1D, spec: OperatorSpec, g: &ExteriorData, t: f64) -> Result<ExteriorSource> {
    assemble(grid, spec)?.source(g, t)
}

/// The generator on an extended grid: Ω's nodes, both boundary nodes and a
/// collar of exterior nodes on each side. Jumps are confined to the
/// extended grid, so columns sum to zero and mass is conserved exactly.
#[derive(Debug, Clone)]
pub struct CollarOperator {
    pub grid: Grid1D,
    /// Number of collar nodes on each side (excluding the boundary node).
    pub collar: usize,
    pub nodes: Vec<f64>,
    pub matrix: DenseMatrix,
}

impl CollarOperator {
    /// Builds the extended operator with a collar of (at least) `width`.
    pub fn new(grid: Grid1D, spec: OperatorSpec, width: f64) -> Result<Self> {
        spec.validate()?;
        let h = grid.h();
        let collar = (width / h).ceil().max(1.0) as usize;
        let m = grid.n + 2 + 2 * collar;
        let axis = AxisOperator::with_reach(grid, spec, m)?;
        let matrix = toeplitz_generator(m, |d| axis.offdiag(d));
        let nodes = (0..m).map(|k| grid.a + (k as f64 - collar as f64) * h).collect();
        Ok(Self { grid, collar, nodes, matrix })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of interior node x_1 in the extended vector.
    pub fn first_interior(&self) -> usize {
        self.collar + 1
    }

    /// Trapezoid weights of Ω̄ (1 inside, 1/2 on the boundary nodes, 0 in the collar).
    pub fn mass_weights(&self) -> Vec<f64> {
        let (lo, hi) = (self.collar, self.collar + self.grid.n + 1);
        (0..self.len())
            .map(|k| if k == lo || k == hi { 0.5 } else if k > lo && k < hi { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Riesz-derivative form, valid for β ∈ (1, 2):
/// −1/(2cos(βπ/2)Γ(2−β)) ∂²/∂x² ∫ |x−y|^{1−β} p(y) dy,
/// with the potential evaluated by adaptive quadrature over `support` and the
/// second derivative by a central difference of step h.
pub fn riesz_apply<F: Fn(f64) -> f64>(grid: Grid1D, beta: f64, p: F, support: (f64, f64)) -> Result<Vec<f64>> {
    if !(beta > 1.0 && beta < 2.0) {
        return domain(format!("Riesz form needs beta in (1,2), got {beta}"));
    }
    let pref = -1.0 / (2.0 * (beta * PI / 2.0).cos() * gamma(2.0 - beta)?);
    let h = grid.h();
    let potential = |x: f64| -> Result<f64> {
        let mut pts = vec![support.0, support.1];
        let guard = 1e-12 * (support.1 - support.0);
        if x > support.0 + guard && x < support.1 - guard {
            pts.insert(1, x);
        }
        // the singular point has measure zero; skip it if a node lands on it
        let f = |y: f64| if y == x { 0.0 } else { (x - y).abs().powf(1.0 - beta) * p(y) };
        Ok(integrate_points(f, &pts, 1e-15, 1e-14)?.value)
    };
    grid.nodes()
        .into_iter()
        .map(|x| {
            let d2 = (potential(x + h)? - 2.0 * potential(x)? + potential(x - h)?) / (h * h);
            Ok(pref * d2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use approx::assert_relative_eq;

    #[test]
    fn spec_invariants() {
        assert!(OperatorSpec::tempered(1.0, 0.5, 1).is_err());
        assert!(OperatorSpec::tempered(1.2, 0.0, 1).is_err());
        assert!(OperatorSpec { kind: OperatorKind::Fractional, beta: 1.0, lambda: 0.1, n: 1 }.validate().is_err());
        assert!(OperatorSpec::fractional(2.0, 1).is_err());
        assert!(OperatorSpec::fractional(1.98, 1).unwrap().conditioning_warning().is_some());
    }

    #[test]
    fn multiplier_is_nonpositive() {
        for &b in &[0.3, 0.8, 1.2, 1.7] {
            let s = OperatorSpec::tempered(b, 0.7, 1).unwrap();
            for &k in &[0.0, 0.1, 1.0, 20.0] {
                assert!(s.multiplier(k) <= 0.0);
            }
        }
    }

    #[test]
    fn toy_grid_entries_match_direct_quadrature() {
        let grid = Grid1D::new(0.0, 1.0, 3).unwrap();
        let spec = OperatorSpec::fractional(1.0, 1).unwrap();
        let op = assemble(grid, spec).unwrap();
        let h = grid.h();
        let c = 1.0 / PI;
        let k = |r: f64| r.powi(-2);
        let hat = |m: f64| {
            move |r: f64| (1.0 - (r / h - m).abs()).max(0.0) * k(r)
        };
        let w2 = integrate(hat(2.0), h, 3.0 * h, 1e-15, 1e-13).unwrap().value;
        assert_relative_eq!(op.interior_matrix.get(0, 2), c * w2, max_relative = 1e-12);
        assert_relative_eq!(op.interior_matrix.get(2, 0), c * w2, max_relative = 1e-12);
        // nearest neighbour: quadratic near field, hat fall, minus the correction
        let near = integrate(|r: f64| r * r / (h * h) * k(r), 0.0, h, 1e-15, 1e-13).unwrap().value;
        let fall = integrate(|r: f64| (2.0 - r / h) * k(r), h, 2.0 * h, 1e-15, 1e-13).unwrap().value;
        let kappa = op.axes[0].weights.kappa;
        assert_relative_eq!(op.interior_matrix.get(0, 1), c * (near + fall - kappa), max_relative = 1e-12);
        // the correction equals the bubble integral over all cells
        let cells: Vec<f64> = (1..=2000).map(|j| j as f64 * h).collect();
        let direct = integrate_points(
            |r: f64| {
                let s = r / h - (r / h).floor();
                s * (1.0 - s) * k(r)
            },
            &cells,
            1e-15,
            1e-12,
        )
        .unwrap()
        .value
            + (2000.0 * h).recip() / 6.0;
        assert_relative_eq!(kappa, direct, max_relative = 1e-7);
        for i in 0..3 {
            let row: f64 = (0..3).map(|j| op.interior_matrix.get(i, j)).sum();
            assert!(row.abs() < 1e-12 * op.interior_matrix.get(i, i).abs());
        }
    }

    #[test]
    fn fractional_tail_closed_form() {
        let grid = Grid1D::new(-1.0, 2.0, 9).unwrap();
        let spec = OperatorSpec::fractional(0.7, 1).unwrap();
        let op = assemble(grid, spec).unwrap();
        let c = frac_lap_coeff(1, 0.7).unwrap();
        for (i, x) in grid.nodes().into_iter().enumerate() {
            let want = c * ((x + 1.0f64).powf(-0.7) + (2.0 - x).powf(-0.7)) / 0.7;
            assert_relative_eq!(op.complement_tail[i], want, max_relative = 1e-14);
            assert!(op.diagonal_tail[i] > op.complement_tail[i]);
        }
    }

    #[test]
    fn tempered_tail_matches_quadrature() {
        let grid = Grid1D::new(0.0, 1.0, 7).unwrap();
        let spec = OperatorSpec::tempered(1.4, 2.0, 1).unwrap();
        let op = assemble(grid, spec).unwrap();
        let c = op.axes[0].coeff;
        for (i, x) in grid.nodes().into_iter().enumerate() {
            let f = |u: f64| (-2.0 * u).exp() * u.powf(-2.4);
            let side = |d: f64| integrate_points(f, &[d, d + 1.0, d + 5.0, d + 40.0], 1e-16, 1e-13).unwrap().value;
            let want = c * (side(x) + side(1.0 - x));
            assert_relative_eq!(op.complement_tail[i], want, max_relative = 1e-11);
        }
    }

    #[test]
    fn exterior_source_examples() {
        let grid = Grid1D::new(0.0, 1.0, 11).unwrap();
        let spec = OperatorSpec::fractional(1.5, 1).unwrap();
        let op = assemble(grid, spec).unwrap();
        let zero = op.source(&ExteriorData::zero(), 0.0).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let one = op.source(&ExteriorData::one(), 0.0).unwrap();
        for i in 0..grid.n {
            assert_relative_eq!(one.exterior[i], op.complement_tail[i], max_relative = 1e-13);
        }
        let ind = op.source(&ExteriorData::indicator(&[(1.0, 2.0)]), 0.0).unwrap();
        let c = frac_lap_coeff(1, 1.5).unwrap();
        for (i, x) in grid.nodes().into_iter().enumerate() {
            let want = c * ((1.0 - x).powf(-1.5) - (2.0 - x).powf(-1.5)) / 1.5;
            assert_relative_eq!(ind.exterior[i], want, max_relative = 1e-11);
            let trace = op.axes[0].trace_right[i];
            assert_relative_eq!(ind.values[i], want + trace, max_relative = 1e-11);
        }
    }

    #[test]
    fn growth_violation_is_rejected() {
        let grid = Grid1D::new(0.0, 1.0, 5).unwrap();
        let spec = OperatorSpec::fractional(0.8, 1).unwrap();
        let op = assemble(grid, spec).unwrap();
        assert!(matches!(op.source(&ExteriorData::power(0.9), 0.0), Err(Error::Growth { .. })));
        assert!(op.source(&ExteriorData::power(0.5), 0.0).is_ok());
    }

    #[test]
    fn single_node_grid() {
        let grid = Grid1D::new(0.0, 1.0, 1).unwrap();
        let op = assemble(grid, OperatorSpec::fractional(1.1, 1).unwrap()).unwrap();
        assert_eq!(op.interior_matrix.get(0, 0), 0.0);
        let out = op.apply(&[1.0], &ExteriorData::one(), 0.0).unwrap();
        assert!(out[0].abs() < 1e-10);
    }

    #[test]
    fn collar_columns_sum_to_zero() {
        let grid = Grid1D::new(0.0, 1.0, 20).unwrap();
        let c = CollarOperator::new(grid, OperatorSpec::tempered(0.6, 1.0, 1).unwrap(), 1.0).unwrap();
        let n = c.len();
        for j in 0..n {
            let s: f64 = (0..n).map(|i| c.matrix.get(i, j)).sum();
            assert!(s.abs() < 1e-10 * c.matrix.get(j, j).abs());
        }
        let w = c.mass_weights();
        assert_eq!(w.iter().sum::<f64>(), grid.n as f64 + 1.0);
    }
}
