//! Fourier-side oracles on periodic boxes.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};
use crate::operators::OperatorSpec;
use crate::quadrature::integrate_points;
use crate::special::{sphere_area, tempered_coeff, tempered_symbol, upper_gamma, SymbolQuery};

/// Real samples on a uniform periodic grid of length `length`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub length: f64,
    pub values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(length: f64, values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() || values.len() < 2 {
            return domain(format!("periodic grid size must be a power of two, got {}", values.len()));
        }
        if !(length > 0.0) {
            return domain("box length must be positive");
        }
        Ok(Self { length, values })
    }

    /// Samples f at x_j = x0 + j L / M.
    pub fn sample(x0: f64, length: f64, m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dx = length / m as f64;
        Self::new(length, (0..m).map(|j| f(x0 + j as f64 * dx)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.length / self.len() as f64
    }

    /// Signed wavenumber of FFT bin j: 2πj/L with j folded to (−M/2, M/2].
    pub fn wavenumber(&self, j: usize) -> f64 {
        wavenumber(j, self.len(), self.length)
    }
}

fn wavenumber(j: usize, m: usize, length: f64) -> f64 {
    let s = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
    2.0 * PI * s / length
}

fn fft_multiply(values: &[f64], length: f64, mult: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
    let m = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= mult(wavenumber(j, m, length));
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    let imag = buf.iter().map(|c| (c.im * scale).abs()).fold(0.0, f64::max);
    (buf.iter().map(|c| c.re * scale).collect(), imag)
}

/// Applies an arbitrary even multiplier m(k); returns the field and the
/// largest discarded imaginary part.
pub fn multiplier_apply(field: &PeriodicField, mult: impl Fn(f64) -> f64) -> (PeriodicField, f64) {
    let (v, imag) = fft_multiply(&field.values, field.length, mult);
    (PeriodicField { length: field.length, values: v }, imag)
}

/// Applies the exact Fourier multiplier of `spec` (see
/// [`OperatorSpec::multiplier`]).
pub fn symbol_apply(field: &PeriodicField, spec: &OperatorSpec) -> PeriodicField {
    multiplier_apply(field, |k| spec.multiplier(k)).0
}

/// Evaluates the multiplier-applied field at arbitrary offsets from the
/// first sample by direct Fourier summation. Modes whose coefficient is
/// below `cutoff` times the largest are skipped.
pub fn multiplier_eval(field: &PeriodicField, mult: impl Fn(f64) -> f64, offsets: &[f64], cutoff: f64) -> Vec<f64> {
    let m = field.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let mut buf: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let top = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let modes: Vec<(f64, Complex64)> = buf
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > cutoff * top)
        .map(|(j, c)| {
            let k = wavenumber(j, m, field.length);
            (k, c * mult(k) / m as f64)
        })
        .collect();
    offsets
        .iter()
        .map(|&x| modes.iter().map(|(k, c)| (c * Complex64::from_polar(1.0, k * x)).re).sum())
        .collect()
}

/// Real samples on a periodic rectangle, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField2D {
    pub lx: f64,
    pub ly: f64,
    pub mx: usize,
    pub my: usize,
    pub values: Vec<f64>,
}

impl PeriodicField2D {
    pub fn sample(x0: f64, y0: f64, lx: f64, ly: f64, mx: usize, my: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !mx.is_power_of_two() || !my.is_power_of_two() {
            return domain("periodic grid sizes must be powers of two");
        }
        let (dx, dy) = (lx / mx as f64, ly / my as f64);
        let mut values = Vec::with_capacity(mx * my);
        for j in 0..my {
            for i in 0..mx {
                values.push(f(x0 + i as f64 * dx, y0 + j as f64 * dy));
            }
        }
        Ok(Self { lx, ly, mx, my, values })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i + self.mx * j]
    }
}

/// Applies a multiplier m(k₁, k₂) on a periodic rectangle.
pub fn symbol_apply_2d(field: &PeriodicField2D, mult: impl Fn(f64, f64) -> f64) -> PeriodicField2D {
    let (mx, my) = (field.mx, field.my);
    let mut planner = FftPlanner::<f64>::new();
    let fx = planner.plan_fft_forward(mx);
    let fy = planner.plan_fft_forward(my);
    let ix = planner.plan_fft_inverse(mx);
    let iy = planner.plan_fft_inverse(my);
    let mut buf: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in buf.chunks_mut(mx) {
        fx.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); my];
    for i in 0..mx {
        for j in 0..my {
            col[j] = buf[i + mx * j];
        }
        fy.process(&mut col);
        let kx = wavenumber(i, mx, field.lx);
        for j in 0..my {
            col[j] *= mult(kx, wavenumber(j, my, field.ly));
        }
        iy.process(&mut col);
        for j in 0..my {
            buf[i + mx * j] = col[j];
        }
    }
    for row in buf.chunks_mut(mx) {
        ix.process(row);
    }
    let scale = 1.0 / (mx * my) as f64;
    PeriodicField2D {
        lx: field.lx,
        ly: field.ly,
        mx,
        my,
        values: buf.iter().map(|c| c.re * scale).collect(),
    }
}

/// Montroll–Weiss propagator (1 − φ(u))/u · p̂₀(k)/(1 − φ(u)ψ(k)) for
/// decoupled waiting times and jumps.
pub fn montroll_weiss(
    phi_hat: impl Fn(Complex64) -> Complex64,
    psi_hat: impl Fn(f64) -> Complex64,
    p0_hat: impl Fn(f64) -> Complex64,
    k: f64,
    u: Complex64,
) -> Result<Complex64> {
    if !(u.re > 0.0) {
        return domain("Laplace variable needs a positive real part");
    }
    let psi = psi_hat(k);
    if psi.norm() > 1.0 + 1e-12 {
        return domain(format!("|psi(k)| = {} exceeds one", psi.norm()));
    }
    let phi = phi_hat(u);
    let den = Complex64::new(1.0, 0.0) - phi * psi;
    if den.norm() < 1e-14 {
        return Err(Error::Pole(den.norm()));
    }
    Ok((Complex64::new(1.0, 0.0) - phi) / u * p0_hat(k) / den)
}

/// One row of a symbol verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolRow {
    pub n: usize,
    pub beta: f64,
    pub lambda: f64,
    pub k: f64,
    pub quadrature: f64,
    pub closed_form: f64,
    pub rel_error: f64,
}

/// Outcome of [`verify_tempered_identity`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVerification {
    pub rows: Vec<SymbolRow>,
    pub max_rel_error: f64,
}

impl SymbolVerification {
    /// Writes `n,beta,lambda,k,quadrature,closed_form,rel_error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,beta,lambda,k,quadrature,closed_form,rel_error")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{:.17e},{:.17e},{:.6e}",
                r.n, r.beta, r.lambda, r.k, r.quadrature, r.closed_form, r.rel_error
            )?;
        }
        Ok(())
    }
}

/// Taylor coefficients of the angular factor A(s) = ∫_{S^{n−1}} (cos(sω₁) − 1) dω.
fn angular_series(n: usize, terms: usize) -> Vec<f64> {
    let mut c = vec![0.0; terms];
    let mut fact = 1.0;
    for j in 1..terms {
        fact *= j as f64;
        if j % 2 == 0 {
            let m = j / 2;
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            // ∫ ω₁^{2m} dω over the sphere
            let moment = match n {
                1 => 2.0,
                _ => {
                    let mut r = 2.0 * PI;
                    for i in 0..m {
                        r *= (2 * i + 1) as f64 / (2 * i + 2) as f64;
                    }
                    r
                }
            };
            c[j] = sign * moment / fact;
        }
    }
    c
}

fn angular_factor(n: usize, s: f64) -> f64 {
    match n {
        1 => -4.0 * (0.5 * s).sin().powi(2),
        _ => {
            // trapezoid on a periodic analytic integrand converges geometrically
            let m = ((s.abs() + 40.0) as usize).next_power_of_two().max(64);
            let h = 2.0 * PI / m as f64;
            -2.0 * h * (0..m).map(|i| (0.5 * s * (i as f64 * h).cos()).sin().powi(2)).sum::<f64>()
        }
    }
}

/// c_{n,β,λ} ∫_{ℝⁿ} (cos(k·Y) − 1) e^{−λ|Y|} |Y|^{−n−β} dY by radial
/// reduction: Taylor series of the angular factor near the origin and
/// Gauss–Kronrod panels beyond.
pub fn tempered_symbol_quadrature(n: usize, beta: f64, lambda: f64, k: f64) -> Result<f64> {
    let c = tempered_coeff(n, beta)?;
    let k = k.abs();
    if k == 0.0 {
        return Ok(0.0);
    }
    const TERMS: usize = 90;
    let rho = (0.5 / k).min(0.5 / lambda).min(1.0);
    let a = angular_series(n, TERMS);
    let mut e = vec![0.0; TERMS];
    e[0] = 1.0;
    for j in 1..TERMS {
        e[j] = e[j - 1] * (-lambda) / j as f64;
    }
    let mut near = 0.0;
    for j in 2..TERMS {
        let d: f64 = (2..=j).map(|i| a[i] * k.powi(i as i32) * e[j - i]).sum();
        near += d * rho.powf(j as f64 - beta) / (j as f64 - beta);
    }
    let top = rho + 45.0 / lambda;
    let step = (PI / k).min(1.0 / lambda).min(top - rho);
    let mut pts = vec![rho];
    let mut x = rho;
    while x < top {
        x = (x + step).min(top);
        pts.push(x);
    }
    let f = |r: f64| angular_factor(n, k * r) * (-lambda * r).exp() * r.powf(-1.0 - beta);
    let far = integrate_points(f, &pts, 0.0, 1e-13)?.value;
    // beyond `top` the angular factor averages to −|S^{n−1}|
    let tail = -sphere_area(n) * lambda.powf(beta) * upper_gamma(-beta, lambda * top)?;
    Ok(c * (near + far + tail))
}

/// Compares the closed-form tempered symbol with quadrature of its defining
/// integral on `k_grid`.
pub fn verify_tempered_identity(n: usize, beta: f64, lambda: f64, k_grid: &[f64]) -> Result<SymbolVerification> {
    if !(n == 1 || n == 2) {
        return domain("verification supports n = 1 and n = 2");
    }
    let mut rows = Vec::with_capacity(k_grid.len());
    let mut max_rel: f64 = 0.0;
    for &k in k_grid {
        let closed = tempered_symbol(&SymbolQuery::new(n, beta, lambda, k)?)?;
        let quad = tempered_symbol_quadrature(n, beta, lambda, k)?;
        let rel = if closed == 0.0 && quad == 0.0 { 0.0 } else { (quad - closed).abs() / closed.abs().max(1e-300) };
        max_rel = max_rel.max(rel);
        rows.push(SymbolRow { n, beta, lambda, k, quadrature: quad, closed_form: closed, rel_error: rel });
    }
    Ok(SymbolVerification { rows, max_rel_error: max_rel })
}

/// Returns (‖Δ^{1/2} p‖², ‖∇p‖²) on the periodic box. The first is computed
/// in physical space after applying the multiplier −|k|, the second by
/// Parseval from Σ k² |p̂|².
pub fn energy_equivalence_check(field: &PeriodicField) -> (f64, f64) {
    let (half, _) = fft_multiply(&field.values, field.length, |k| -k.abs());
    let dx = field.dx();
    let lhs = dx * half.iter().map(|v| v * v).sum::<f64>();
    let m = field.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let mut buf: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let rhs = buf
        .iter()
        .enumerate()
        .map(|(j, c)| wavenumber(j, m, field.length).powi(2) * c.norm_sqr())
        .sum::<f64>()
        * field.length
        / (m as f64 * m as f64);
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_and_single_mode() {
        let spec = OperatorSpec::fractional(1.5, 1).unwrap();
        let f = PeriodicField::sample(0.0, 2.0 * PI, 64, |_| 3.0).unwrap();
        assert!(symbol_apply(&f, &spec).values.iter().all(|v| v.abs() < 1e-13));
        let f = PeriodicField::sample(0.0, 2.0 * PI, 64, |x| (3.0 * x).cos()).unwrap();
        let out = symbol_apply(&f, &spec);
        for (j, v) in out.values.iter().enumerate() {
            let x = j as f64 * f.dx();
            assert!((v + 3f64.powf(1.5) * (3.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn montroll_weiss_levy_flight() {
        let (zeta, c, b): (f64, f64, f64) = (2.0, 0.7, 1.3);
        for &k in &[0.0f64, 0.4, 1.5] {
            let u = Complex64::new(0.8, 0.3);
            let got = montroll_weiss(
                |u| zeta / (u + zeta),
                |k: f64| Complex64::new(1.0 - c.powf(b) * k.abs().powf(b), 0.0),
                |_| Complex64::new(1.0, 0.0),
                k,
                u,
            )
            .unwrap();
            let want = 1.0 / (u + zeta * c.powf(b) * k.abs().powf(b));
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn montroll_weiss_pole() {
        let r = montroll_weiss(
            |_| Complex64::new(1.0, 0.0),
            |_| Complex64::new(1.0, 0.0),
            |_| Complex64::new(1.0, 0.0),
            0.0,
            Complex64::new(1.0, 0.0),
        );
        assert!(matches!(r, Err(Error::Pole(_))));
    }

    #[test]
    fn angular_factor_matches_series() {
        for n in [1, 2] {
            let a = angular_series(n, 60);
            for &s in &[0.1f64, 0.7, 2.0] {
                let series: f64 = (0..60).map(|j| a[j] * s.powi(j as i32)).sum();
                assert_relative_eq!(series, angular_factor(n, s), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn quadrature_reference_values() {
        let v = verify_tempered_identity(1, 0.5, 1.0, &[0.0, 1.0]).unwrap();
        assert_eq!(v.rows[0].quadrature, 0.0);
        assert!(v.max_rel_error < 1e-9);
        let v = verify_tempered_identity(2, 1.5, 0.5, &[2.0]).unwrap();
        assert!(v.max_rel_error < 1e-7, "{:?}", v);
    }

    #[test]
    fn energy_of_single_mode() {
        let f = PeriodicField::sample(0.0, 2.0 * PI, 128, |x| 2.0 * (5.0 * x).sin()).unwrap();
        let (a, b) = energy_equivalence_check(&f);
        // ∫ (10 cos 5x)² over the period = 100 π
        assert_relative_eq!(a, 100.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(b, 100.0 * PI, max_relative = 1e-12);
    }
}
