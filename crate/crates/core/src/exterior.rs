//! Data prescribed on the complement of the domain.
//!
//! Nonlocal boundary conditions fix the solution on all of ℝⁿ\Ω. The
//! evaluator is pointwise; a growth envelope declares how fast |g| may grow
//! so that the exterior integrals against the (tempered) power-law kernel
//! converge, and [`check_growth`] samples the declaration.

use std::fmt;
use std::sync::Arc;

use crate::operators::{OperatorKind, OperatorSpec};

type Evaluator = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Growth envelope family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthKind {
    /// |g(X)| ≤ C |X|^{β−ε} for |X| > M.
    Polynomial,
    /// |g(X)| ≤ C e^{(λ−ε)|X|} for |X| > M.
    Exponential,
}

/// Declared growth bound of exterior data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub kind: GrowthKind,
    /// The margin ε > 0 below the critical exponent.
    pub margin: f64,
    pub constant: f64,
    pub radius: f64,
}

impl Default for Growth {
    fn default() -> Self {
        Self { kind: GrowthKind::Polynomial, margin: 0.05, constant: 1.0, radius: 1.0 }
    }
}

#[derive(Clone)]
enum Source {
    Zero,
    Constant(f64),
    /// Indicator of a union of intervals in the first coordinate.
    Indicator(Vec<(f64, f64)>),
    /// |X|^p
    Power(f64),
    /// e^{rate |X|}
    Exponential(f64),
    Custom { f: Evaluator, breakpoints: Vec<f64>, time_independent: bool },
}

/// Exterior data g(X, t) on ℝⁿ\Ω with its growth declaration.
#[derive(Clone)]
pub struct ExteriorData {
    source: Source,
    pub growth: Growth,
    /// Radius beyond which exterior integrals are treated as far field.
    /// `None` selects 50 times the domain width.
    pub truncation_radius: Option<f64>,
}

impl fmt::Debug for ExteriorData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.source {
            Source::Zero => "zero".to_string(),
            Source::Constant(v) => format!("constant({v})"),
            Source::Indicator(iv) => format!("indicator({iv:?})"),
            Source::Power(p) => format!("power({p})"),
            Source::Exponential(c) => format!("exponential({c})"),
            Source::Custom { .. } => "custom".to_string(),
        };
        f.debug_struct("ExteriorData")
            .field("source", &name)
            .field("growth", &self.growth)
            .field("truncation_radius", &self.truncation_radius)
            .finish()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl ExteriorData {
    fn with(source: Source) -> Self {
        Self { source, growth: Growth::default(), truncation_radius: None }
    }

    pub fn zero() -> Self {
        Self::with(Source::Zero)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(v: f64) -> Self {
        let mut g = Self::with(Source::Constant(v));
        g.growth.constant = v.abs().max(1.0);
        g
    }

    /// Indicator of a union of intervals along the first coordinate.
    pub fn indicator(intervals: &[(f64, f64)]) -> Self {
        Self::with(Source::Indicator(intervals.to_vec()))
    }

    /// g(X) = |X|^p, declared with a polynomial envelope of exponent p.
    pub fn power(p: f64) -> Self {
        Self::with(Source::Power(p))
    }

    /// g(X) = e^{rate·|X|}; negative rates decay.
    pub fn exponential(rate: f64) -> Self {
        let mut g = Self::with(Source::Exponential(rate));
        g.growth.kind = GrowthKind::Exponential;
        g
    }

    /// Arbitrary time-independent data. `breakpoints` lists the locations of
    /// discontinuities along the first coordinate.
    pub fn from_fn<F>(f: F, breakpoints: Vec<f64>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::with(Source::Custom {
            f: Arc::new(move |x, _| f(x)),
            breakpoints,
            time_independent: true,
        })
    }

    /// Arbitrary time-dependent data.
    pub fn from_fn_t<F>(f: F, breakpoints: Vec<f64>) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self::with(Source::Custom { f: Arc::new(f), breakpoints, time_independent: false })
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    pub fn with_truncation_radius(mut self, r: f64) -> Self {
        self.truncation_radius = Some(r);
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.source, Source::Zero)
    }

    pub fn is_time_independent(&self) -> bool {
        match &self.source {
            Source::Custom { time_independent, .. } => *time_independent,
            _ => true,
        }
    }

    /// Pointwise value g(X, t).
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match &self.source {
            Source::Zero => 0.0,
            Source::Constant(v) => *v,
            Source::Indicator(iv) => {
                let y = x[0];
                if iv.iter().any(|&(lo, hi)| y >= lo && y < hi) {
                    1.0
                } else {
                    0.0
                }
            }
            Source::Power(p) => norm(x).powf(*p),
            Source::Exponential(c) => (c * norm(x)).exp(),
            Source::Custom { f, .. } => f(x, t),
        }
    }

    /// One-sided limit of g at a boundary point, approached from outside Ω
    /// along coordinate `axis` in direction `outward` (±1).
    pub fn trace(&self, x: &[f64], axis: usize, outward: f64, scale: f64, t: f64) -> f64 {
        let mut y = x.to_vec();
        y[axis] += outward * 1e-10 * scale;
        self.eval(&y, t)
    }

    /// Discontinuities of g along the first coordinate.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.source {
            Source::Indicator(iv) => iv.iter().flat_map(|&(a, b)| [a, b]).collect(),
            Source::Power(_) | Source::Exponential(_) => vec![0.0],
            Source::Custom { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    /// Indicator intervals, when the data is an indicator.
    pub fn indicator_intervals(&self) -> Option<&[(f64, f64)]> {
        match &self.source {
            Source::Indicator(iv) => Some(iv),
            _ => None,
        }
    }
}

/// Outcome of [`check_growth`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthCheck {
    Pass,
    Fail { radius: f64, value: f64, bound: f64 },
}

impl GrowthCheck {
    pub fn passed(&self) -> bool {
        matches!(self, GrowthCheck::Pass)
    }
}

/// Samples |g| on dyadic radii up to 16 times the truncation radius and
/// compares against the envelope admissible for `spec`.
pub fn check_growth(g: &ExteriorData, spec: &OperatorSpec) -> GrowthCheck {
    let gr = g.growth;
    let crit = match gr.kind {
        GrowthKind::Polynomial => spec.beta,
        GrowthKind::Exponential => match spec.kind {
            OperatorKind::Tempered => spec.lambda,
            OperatorKind::Fractional => 0.0,
        },
    };
    let rate = crit - gr.margin;
    let envelope = |r: f64| match gr.kind {
        GrowthKind::Polynomial => gr.constant * r.powf(rate),
        GrowthKind::Exponential => gr.constant * (rate * r).exp(),
    };
    let r_max = 16.0 * g.truncation_radius.unwrap_or(50.0);
    let start = gr.radius.max(1e-3);
    if !(gr.margin > 0.0) || (gr.kind == GrowthKind::Exponential && spec.kind == OperatorKind::Fractional)
    {
        let value = g.eval(&direction(spec.n, 0, 2.0 * start), 0.0).abs();
        return GrowthCheck::Fail { radius: 2.0 * start, value, bound: envelope(2.0 * start) };
    }
    let mut r = 2.0 * start;
    while r <= r_max {
        for dir in 0..2 * spec.n.max(1) + if spec.n > 1 { 4 } else { 0 } {
            let x = direction(spec.n, dir, r);
            let value = g.eval(&x, 0.0).abs();
            let bound = envelope(r);
            if value > bound * (1.0 + 1e-12) {
                return GrowthCheck::Fail { radius: r, value, bound };
            }
        }
        r *= 2.0;
    }
    GrowthCheck::Pass
}

fn direction(n: usize, k: usize, r: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![if k % 2 == 0 { r } else { -r }];
    }
    let theta = std::f64::consts::PI * k as f64 / 4.0;
    let mut v = vec![0.0; n];
    v[0] = r * theta.cos();
    v[1] = r * theta.sin();
    v
}
