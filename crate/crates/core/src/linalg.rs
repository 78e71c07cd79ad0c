//! Dense symmetric matrices, Jacobi-preconditioned conjugate gradients and
//! a Cholesky factorisation.

use crate::error::{Error, Result};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// Returns `alpha·I·d + beta·self` where `d` is a diagonal vector.
    pub fn shifted(&self, scale: f64, diag: &[f64]) -> Self {
        let mut m = self.clone();
        for v in m.data.iter_mut() {
            *v *= scale;
        }
        for (i, d) in diag.iter().enumerate() {
            m.data[i * self.n + i] += d;
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradient outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for an SPD matrix.
///
/// Stops when ‖b − Ax‖ ≤ `tol`·‖b‖; fails after `max_iter` iterations.
pub fn cg(a: &DenseMatrix, b: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Length { expected: n, got: b.len() });
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let ax = a.matvec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm2(&r) / bnorm;
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        a.matvec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        res = norm2(&r) / bnorm;
    }
    // report the true residual rather than the recursively updated one
    let ax = a.matvec(&x);
    let true_res = norm2(&b.iter().zip(&ax).map(|(b, ax)| b - ax).collect::<Vec<_>>()) / bnorm;
    Ok(CgOutcome { x, iterations: it, relative_residual: true_res })
}

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let n = a.dim();
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) {
                return Err(Error::Numeric(format!("matrix not positive definite at pivot {j}")));
            }
            let d = d.sqrt();
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = a.get(i, j);
                let (ri, rj) = (l.row(i), l.row(j));
                s -= dot(&ri[..j], &rj[..j]);
                l.set(i, j, s / d);
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l.row(i)[..i], &y[..i]);
            y[i] = (y[i] - s) / self.l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l.get(k, i) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, |i, j| {
            let d = (i as f64 - j as f64).abs();
            if i == j { 4.0 + i as f64 * 0.1 } else { 1.0 / (1.0 + d * d) }
        })
    }

    #[test]
    fn cg_and_cholesky_agree() {
        let a = spd(30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = cg(&a, &b, None, 1e-13, 300).unwrap();
        let y = Cholesky::new(&a).unwrap().solve(&b);
        for (u, v) in x.x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-11);
        }
        let r = a.matvec(&y);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_reports_cap() {
        let a = spd(30);
        let b = vec![1.0; 30];
        assert!(matches!(cg(&a, &b, None, 1e-15, 1), Err(Error::NoConvergence { .. })));
    }
}
