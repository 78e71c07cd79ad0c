//! Compound Poisson Lévy and tempered Lévy flights.
//!
//! Jump lengths follow C e^{−λr} r^{−β−1} on r ≥ r_min (λ = 0 for the pure
//! power law) with a random sign; waiting times are exponential with rate ζ.
//! Every walker draws from its own ChaCha stream, so results do not depend
//! on how walkers are scheduled across threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate;
use crate::special::{frac_lap_coeff, gamma, tempered_coeff, tempered_symbol, upper_gamma, SymbolQuery};

/// Jump-length family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    PowerLaw,
    TemperedPowerLaw,
}

/// Symmetric jump law with density C e^{−λ|x|} |x|^{−β−1} on |x| ≥ r_min.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpLaw {
    pub kind: JumpKind,
    pub beta: f64,
    pub lambda: f64,
    pub r_min: f64,
    /// Normalisation constant of the signed density.
    pub c: f64,
}

impl JumpLaw {
    pub fn power_law(beta: f64, r_min: f64) -> Result<Self> {
        check_common(beta, r_min)?;
        Ok(Self { kind: JumpKind::PowerLaw, beta, lambda: 0.0, r_min, c: beta * r_min.powf(beta) / 2.0 })
    }

    pub fn tempered(beta: f64, lambda: f64, r_min: f64) -> Result<Self> {
        check_common(beta, r_min)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("tempering must be positive, got {lambda}"));
        }
        let mass = lambda.powf(beta) * upper_gamma(-beta, lambda * r_min)?;
        Ok(Self { kind: JumpKind::TemperedPowerLaw, beta, lambda, r_min, c: 1.0 / (2.0 * mass) })
    }

    /// Probability that a Pareto proposal is accepted by the tempering step.
    pub fn acceptance_rate(&self) -> f64 {
        match self.kind {
            JumpKind::PowerLaw => 1.0,
            JumpKind::TemperedPowerLaw => {
                let (b, l, r) = (self.beta, self.lambda, self.r_min);
                b * r.powf(b) * (l * r).exp() * l.powf(b) * upper_gamma(-b, l * r).expect("validated")
            }
        }
    }

    /// E[cos(kX)] for a single jump.
    pub fn jump_characteristic(&self, k: f64) -> Result<f64> {
        let k = k.abs();
        if k == 0.0 {
            return Ok(1.0);
        }
        let (b, l, r) = (self.beta, self.lambda, self.r_min);
        // ∫_0^∞ (1 − cos kr) w(r) r^{−1−β} dr
        let full = match self.kind {
            JumpKind::PowerLaw => k.powf(b) / (2.0 * frac_lap_coeff(1, b)?),
            JumpKind::TemperedPowerLaw => {
                if b == 1.0 {
                    integrate_one_minus_cos(k, l, b, 0.0)?
                } else {
                    -tempered_symbol(&SymbolQuery::new(1, b, l, k)?)? / (2.0 * tempered_coeff(1, b)?)
                }
            }
        };
        let near = one_minus_cos_series(k, l, b, r);
        Ok(1.0 - 2.0 * self.c * (full - near))
    }
}

fn check_common(beta: f64, r_min: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 2.0) {
        return domain(format!("beta must lie in (0,2), got {beta}"));
    }
    if !(r_min > 0.0 && r_min.is_finite()) {
        return domain(format!("inner cutoff must be positive, got {r_min}"));
    }
    Ok(())
}

/// ∫_0^ρ (1 − cos kr) e^{−λr} r^{−1−β} dr by termwise integration of the
/// Taylor series; accurate while kρ and λρ are moderate.
pub(crate) fn one_minus_cos_series(k: f64, lambda: f64, beta: f64, rho: f64) -> f64 {
    const TERMS: usize = 80;
    // a_j: coefficients of 1 − cos(kr); e_j: coefficients of e^{−λr}
    let mut a = [0.0f64; TERMS];
    let mut fact = 1.0;
    for j in 1..TERMS {
        fact *= j as f64;
        if j % 2 == 0 {
            let sign = if (j / 2) % 2 == 1 { 1.0 } else { -1.0 };
            a[j] = sign * k.powi(j as i32) / fact;
        }
    }
    let mut e = [0.0f64; TERMS];
    e[0] = 1.0;
    for j in 1..TERMS {
        e[j] = e[j - 1] * (-lambda) / j as f64;
    }
    let mut sum = 0.0;
    for j in 2..TERMS {
        let d: f64 = (2..=j).map(|i| a[i] * e[j - i]).sum();
        if d != 0.0 {
            sum += d * rho.powf(j as f64 - beta) / (j as f64 - beta);
        }
    }
    sum
}

fn integrate_one_minus_cos(k: f64, lambda: f64, beta: f64, from: f64) -> Result<f64> {
    let rho = (0.5 / k).min(if lambda > 0.0 { 0.5 / lambda } else { f64::INFINITY }).max(from);
    let near = if from < rho { one_minus_cos_series(k, lambda, beta, rho) - one_minus_cos_series(k, lambda, beta, from) } else { 0.0 };
    let top = rho + 60.0 / lambda.max(1e-3);
    let mut pts = vec![rho];
    let step = (std::f64::consts::PI / k).min(top - rho);
    let mut x = rho;
    while x < top {
        x = (x + step).min(top);
        pts.push(x);
    }
    let f = |r: f64| 2.0 * (0.5 * k * r).sin().powi(2) * (-lambda * r).exp() * r.powf(-1.0 - beta);
    let far = crate::quadrature::integrate_points(f, &pts, 1e-16, 1e-13)?.value;
    Ok(near + far)
}

/// Pareto inverse CDF: r = r_min u^{−1/β}, u ∈ (0, 1].
pub fn pareto_radius(r_min: f64, beta: f64, u: f64) -> f64 {
    r_min * u.powf(-1.0 / beta)
}

/// One signed jump. Tempered laws propose from the Pareto law and accept
/// with probability e^{−λ(r − r_min)}.
pub fn sample_jump<R: Rng + ?Sized>(law: &JumpLaw, rng: &mut R) -> f64 {
    let r = loop {
        let u = 1.0 - rng.random::<f64>();
        let r = pareto_radius(law.r_min, law.beta, u);
        if law.lambda == 0.0 || rng.random::<f64>() < (-law.lambda * (r - law.r_min)).exp() {
            break r;
        }
    };
    if rng.random::<bool>() {
        r
    } else {
        -r
    }
}

/// Exponential waiting time with rate ζ.
pub fn sample_wait<R: Rng + ?Sized>(zeta: f64, rng: &mut R) -> f64 {
    -(1.0 - rng.random::<f64>()).ln() / zeta
}

/// Independent stream for walker `id`.
pub fn walker_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

/// Piecewise-constant path of a flight started at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Jump times, starting with 0.
    pub times: Vec<f64>,
    /// Position after each jump, starting with 0.
    pub positions: Vec<f64>,
}

impl Trajectory {
    pub fn final_position(&self) -> f64 {
        *self.positions.last().unwrap_or(&0.0)
    }

    pub fn jumps(&self) -> usize {
        self.positions.len() - 1
    }
}

/// Simulates a compound Poisson flight on [0, t_end].
pub fn simulate_flight<R: Rng + ?Sized>(law: &JumpLaw, zeta: f64, t_end: f64, rng: &mut R) -> Result<Trajectory> {
    if !(zeta > 0.0) || !(t_end > 0.0) {
        return domain("rate and horizon must be positive");
    }
    let mut times = vec![0.0];
    let mut positions = vec![0.0];
    let mut t = 0.0;
    let mut x = 0.0;
    loop {
        t += sample_wait(zeta, rng);
        if t > t_end {
            break;
        }
        x += sample_jump(law, rng);
        times.push(t);
        positions.push(x);
    }
    Ok(Trajectory { times, positions })
}

/// Writes `walker_id,t,x` rows.
pub fn write_trajectories<W: Write>(mut w: W, paths: &[Trajectory]) -> std::io::Result<()> {
    writeln!(w, "walker_id,t,x")?;
    for (id, p) in paths.iter().enumerate() {
        for (t, x) in p.times.iter().zip(&p.positions) {
            writeln!(w, "{id},{t:.17e},{x:.17e}")?;
        }
    }
    Ok(())
}

/// State of one walker in an exit simulation.
#[derive(Debug, Clone)]
pub struct Walker {
    pub position: f64,
    pub clock: f64,
    pub alive: bool,
    pub rng_stream: u64,
}

/// Cap on jumps per walker.
pub const JUMP_CAP: u64 = 10_000_000;

/// Tally of exit positions over a list of exterior cells.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeTally {
    pub n_walkers: u64,
    /// Walkers landing in each cell (first matching cell, closed intervals).
    pub cell_counts: Vec<u64>,
    /// Exited walkers not in any cell.
    pub unassigned: u64,
    /// Exits at or beyond a and b respectively.
    pub left: u64,
    pub right: u64,
    /// Walkers stopped by the jump cap.
    pub capped: u64,
    /// More than 0.01% of walkers were capped.
    pub flagged: bool,
    /// Mean first exit time (exited walkers).
    pub mean_exit_time: f64,
}

/// Escape estimate for one target set.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeEstimate {
    pub estimate: f64,
    /// Binomial standard error sqrt(p(1−p)/N).
    pub stderr: f64,
    pub tally: EscapeTally,
}

/// Runs `n_walkers` flights from x0 until they leave Ω = (a, b) and tallies
/// the landing points over `cells`.
pub fn mc_escape_tally(
    omega: (f64, f64),
    x0: f64,
    cells: &[(f64, f64)],
    law: &JumpLaw,
    zeta: f64,
    n_walkers: u64,
    seed: u64,
) -> Result<EscapeTally> {
    let (a, b) = omega;
    if !(a < b) || !(x0 > a && x0 < b) {
        return domain(format!("start {x0} must lie inside ({a}, {b})"));
    }
    if !(zeta > 0.0) {
        return domain("rate must be positive");
    }
    const CHUNK: u64 = 4096;
    let n_chunks = n_walkers.div_ceil(CHUNK);
    let k = cells.len();
    let partials: Vec<(Vec<u64>, [u64; 4], f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; k];
            let mut misc = [0u64; 4]; // unassigned, left, right, capped
            let mut time = 0.0;
            for id in c * CHUNK..((c + 1) * CHUNK).min(n_walkers) {
                let mut rng = walker_rng(seed, id);
                let mut w = Walker { position: x0, clock: 0.0, alive: true, rng_stream: id };
                let mut jumps = 0u64;
                while w.alive {
                    if jumps >= JUMP_CAP {
                        break;
                    }
                    w.clock += sample_wait(zeta, &mut rng);
                    w.position += sample_jump(law, &mut rng);
                    jumps += 1;
                    if w.position <= a || w.position >= b {
                        w.alive = false;
                    }
                }
                if w.alive {
                    misc[3] += 1;
                    continue;
                }
                time += w.clock;
                if w.position <= a {
                    misc[1] += 1;
                } else {
                    misc[2] += 1;
                }
                match cells.iter().position(|&(lo, hi)| w.position >= lo && w.position <= hi) {
                    Some(i) => counts[i] += 1,
                    None => misc[0] += 1,
                }
            }
            (counts, misc, time)
        })
        .collect();
    let mut counts = vec![0u64; k];
    let mut misc = [0u64; 4];
    let mut time = 0.0;
    for (c, m, t) in &partials {
        for i in 0..k {
            counts[i] += c[i];
        }
        for i in 0..4 {
            misc[i] += m[i];
        }
        time += t;
    }
    let exited = n_walkers - misc[3];
    Ok(EscapeTally {
        n_walkers,
        cell_counts: counts,
        unassigned: misc[0],
        left: misc[1],
        right: misc[2],
        capped: misc[3],
        flagged: misc[3] as f64 > 1e-4 * n_walkers as f64,
        mean_exit_time: if exited > 0 { time / exited as f64 } else { f64::NAN },
    })
}

/// Monte Carlo probability of first landing in the union `h` of exterior
/// intervals, with its binomial standard error.
pub fn mc_escape_probability(
    omega: (f64, f64),
    x0: f64,
    h: &[(f64, f64)],
    law: &JumpLaw,
    zeta: f64,
    n_walkers: u64,
    seed: u64,
) -> Result<EscapeEstimate> {
    if n_walkers == 0 {
        return domain("need at least one walker");
    }
    let tally = mc_escape_tally(omega, x0, h, law, zeta, n_walkers, seed)?;
    let hits: u64 = tally.cell_counts.iter().sum();
    let p = hits as f64 / n_walkers as f64;
    let stderr = (p * (1.0 - p) / n_walkers as f64).sqrt();
    Ok(EscapeEstimate { estimate: p, stderr, tally })
}

/// Berry–Esseen bound (5/(2√(2C))) Γ(3−β)/Γ(2−β)^{3/2} λ^{−β/2}/√m.
pub fn berry_esseen_bound(beta: f64, lambda: f64, c: f64, m: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) || !(lambda > 0.0) || !(c > 0.0) || !(m >= 1.0) {
        return domain("berry_esseen_bound needs beta in (0,2), lambda > 0, C > 0, m >= 1");
    }
    Ok(5.0 / (2.0 * (2.0 * c).sqrt()) * gamma(3.0 - beta)? / gamma(2.0 - beta)?.powf(1.5)
        * lambda.powf(-beta / 2.0)
        / m.sqrt())
}

/// ⟨|X|^k⟩ of the law on its support r ≥ r_min.
pub fn moment(law: &JumpLaw, order: u32) -> Result<f64> {
    let k = order as f64;
    let (b, l, r) = (law.beta, law.lambda, law.r_min);
    match law.kind {
        JumpKind::PowerLaw => {
            if k >= b {
                Err(Error::Divergent { order, beta: b })
            } else {
                Ok(2.0 * law.c * r.powf(k - b) / (b - k))
            }
        }
        JumpKind::TemperedPowerLaw => Ok(2.0 * law.c * l.powf(b - k) * upper_gamma(k - b, l * r)?),
    }
}

/// 2Cλ^{β−k}Γ(k−β): the moment integral taken over (0, ∞).
pub fn moment_full_support(law: &JumpLaw, order: u32) -> Result<f64> {
    let k = order as f64;
    match law.kind {
        JumpKind::PowerLaw => Err(Error::Divergent { order, beta: law.beta }),
        JumpKind::TemperedPowerLaw => {
            if k <= law.beta {
                return domain("full-support moment needs order above beta");
            }
            Ok(2.0 * law.c * law.lambda.powf(law.beta - k) * gamma(k - law.beta)?)
        }
    }
}

/// Adaptive quadrature of 2C ∫_{r_min}^∞ r^k e^{−λr} r^{−β−1} dr.
pub fn moment_by_quadrature(law: &JumpLaw, order: u32) -> Result<f64> {
    if law.kind == JumpKind::PowerLaw {
        return moment(law, order);
    }
    let k = order as f64;
    let (b, l) = (law.beta, law.lambda);
    let f = |r: f64| r.powf(k - b - 1.0) * (-l * r).exp();
    let mut pts = vec![law.r_min];
    let mut x = law.r_min.max(1e-3 / l);
    while x < 200.0 / l {
        x *= 2.0;
        pts.push(x);
    }
    let v = crate::quadrature::integrate_points(f, &pts, 0.0, 1e-14)?.value;
    let tail = integrate(|s: f64| f(x + s), 0.0, 200.0 / l, 0.0, 1e-12)?.value;
    Ok(2.0 * law.c * (v + tail))
}

/// Source of i.i.d. symmetric increments for the crossover experiment.
pub trait JumpSampler: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64;
    fn variance(&self) -> f64;
}

impl JumpSampler for JumpLaw {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        sample_jump(self, rng)
    }

    fn variance(&self) -> f64 {
        moment(self, 2).unwrap_or(f64::INFINITY)
    }
}

/// Gaussian increments; the control case of the crossover experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianJumps {
    pub sigma: f64,
}

impl JumpSampler for GaussianJumps {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        // Box–Muller
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        self.sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Kolmogorov–Smirnov distance between a sample and the standard normal.
pub fn ks_normal(sample: &mut [f64]) -> f64 {
    let n = sample.len() as f64;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    sample.sort_by(f64::total_cmp);
    sample
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let f = normal.cdf(z);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Settings of the crossover experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverConfig {
    /// Independent sums per λ.
    pub samples: usize,
    /// Inner cutoff of the tempered law.
    pub r_min: f64,
    /// Ratio between successive checkpoints in m.
    pub growth: f64,
    /// Largest m tried before an entry is marked unresolved.
    pub m_max: u64,
    pub seed: u64,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self { samples: 100_000, r_min: 0.01, growth: 1.2, m_max: 200_000, seed: 0 }
    }
}

/// Per-λ outcome of the crossover experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverReport {
    pub beta: f64,
    pub threshold: f64,
    pub lambda_grid: Vec<f64>,
    /// Interpolated crossover length; `None` when m_max was reached.
    pub m_star: Vec<Option<f64>>,
    /// Slope of log m* against log λ over resolved entries.
    pub fitted_slope: Option<f64>,
}

impl CrossoverReport {
    /// Writes `lambda,m_star,resolved,fitted_slope`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "lambda,m_star,resolved,fitted_slope")?;
        let slope = self.fitted_slope.map(|s| format!("{s:.17e}")).unwrap_or_default();
        for (l, m) in self.lambda_grid.iter().zip(&self.m_star) {
            match m {
                Some(m) => writeln!(w, "{l:.17e},{m:.17e},true,{slope}")?,
                None => writeln!(w, "{l:.17e},,false,{slope}")?,
            }
        }
        Ok(())
    }
}

/// Smallest m (log-interpolated between checkpoints) at which the KS distance
/// of the normalised m-step sum to the standard normal falls below
/// `threshold`.
pub fn crossover_length<S: JumpSampler>(sampler: &S, threshold: f64, cfg: &CrossoverConfig, stream_seed: u64) -> Option<f64> {
    let sigma = sampler.variance().sqrt();
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.samples as u64).map(|i| walker_rng(stream_seed, i)).collect();
    let mut sums = vec![0.0f64; cfg.samples];
    let mut m_prev = 0u64;
    let mut prev: Option<(f64, f64)> = None;
    let mut m_next = 1u64;
    while m_next <= cfg.m_max {
        let steps = m_next - m_prev;
        sums.par_iter_mut().zip(rngs.par_iter_mut()).for_each(|(s, r)| {
            for _ in 0..steps {
                *s += sampler.sample(r);
            }
        });
        let scale = 1.0 / (sigma * (m_next as f64).sqrt());
        let mut z: Vec<f64> = sums.iter().map(|s| s * scale).collect();
        let d = ks_normal(&mut z);
        if d < threshold {
            return Some(match prev {
                None => m_next as f64,
                Some((mp, dp)) => {
                    let (lm0, lm1) = ((mp).ln(), (m_next as f64).ln());
                    let (ld0, ld1) = (dp.ln(), d.ln());
                    (lm0 + (threshold.ln() - ld0) * (lm1 - lm0) / (ld1 - ld0)).exp()
                }
            });
        }
        prev = Some((m_next as f64, d));
        m_prev = m_next;
        m_next = ((m_next as f64 * cfg.growth).ceil() as u64).max(m_next + 1);
    }
    None
}

/// For each λ, the crossover length of tempered flights with order β, and
/// the fitted exponent of m* against λ.
pub fn crossover_experiment(beta: f64, lambda_grid: &[f64], threshold: f64, cfg: &CrossoverConfig) -> Result<CrossoverReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return domain(format!("threshold must lie in (0,1), got {threshold}"));
    }
    let mut m_star = Vec::with_capacity(lambda_grid.len());
    for (i, &l) in lambda_grid.iter().enumerate() {
        let law = JumpLaw::tempered(beta, l, cfg.r_min)?;
        let stream_seed = cfg.seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        m_star.push(crossover_length(&law, threshold, cfg, stream_seed));
    }
    let pts: Vec<(f64, f64)> = lambda_grid
        .iter()
        .zip(&m_star)
        .filter_map(|(l, m)| m.map(|m| (l.ln(), m.ln())))
        .collect();
    Ok(CrossoverReport {
        beta,
        threshold,
        lambda_grid: lambda_grid.to_vec(),
        m_star,
        fitted_slope: fit_slope(&pts),
    })
}

/// Least-squares slope of y against x; needs two distinct x values.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
