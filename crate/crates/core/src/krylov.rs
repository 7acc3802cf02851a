//! Lanczos iteration for matrix-free Hermitian operators.
//!
//! Used for extremal eigenvalues of operators too large to materialize and
//! for f(A)v actions (exponentials and sign functions) through the
//! tridiagonal projection f(A)v ≈ ‖v‖ V f(T) e₁. The basis is fully
//! reorthogonalized, which at the sizes used here (a few hundred vectors of
//! length ≤ 16k) is cheap and keeps the projection accurate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{dot, norm};

pub struct Lanczos {
    pub basis: Vec<Vec<C64>>,
    pub alphas: Vec<f64>,
    /// betas[i] couples basis[i] and basis[i+1].
    pub betas: Vec<f64>,
    /// Set when the Krylov space became invariant.
    pub exhausted: bool,
}

impl Lanczos {
    pub fn new(start: &[C64]) -> Result<Self> {
        let nrm = norm(start);
        if nrm == 0.0 {
            return Err(Error::InvalidParameter("zero Krylov start vector".into()));
        }
        let v0: Vec<C64> = start.iter().map(|z| z / nrm).collect();
        Ok(Self {
            basis: vec![v0],
            alphas: Vec::new(),
            betas: Vec::new(),
            exhausted: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// One Lanczos step. Returns false once the space is invariant.
    pub fn step<A>(&mut self, apply: &A) -> bool
    where
        A: Fn(&[C64]) -> Vec<C64>,
    {
        if self.exhausted {
            return false;
        }
        let k = self.alphas.len();
        let vk = &self.basis[k];
        let mut w = apply(vk);
        let alpha = dot(vk, &w).re;
        self.alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &self.basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let beta = norm(&w);
        let scale = alpha.abs().max(self.betas.last().copied().unwrap_or(0.0)).max(1.0);
        if beta <= 1e-13 * scale || self.basis.len() == w.len() {
            self.exhausted = true;
            return false;
        }
        self.betas.push(beta);
        self.basis.push(w.into_iter().map(|z| z / beta).collect());
        true
    }

    fn tridiagonal(&self, k: usize) -> SymmetricEigen<f64, nalgebra::Dyn> {
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                self.alphas[i]
            } else if i + 1 == j {
                self.betas[i]
            } else if j + 1 == i {
                self.betas[j]
            } else {
                0.0
            }
        });
        SymmetricEigen::new(t)
    }

    /// Ritz values of the current k-dimensional projection, ascending.
    pub fn ritz_values(&self) -> Vec<f64> {
        let k = self.dim();
        let mut v: Vec<f64> = self.tridiagonal(k).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// ‖start‖ · V f(T) e₁ using the first k vectors.
    pub fn function_action<F>(&self, start_norm: f64, f: &F) -> Vec<C64>
    where
        F: Fn(f64) -> C64,
    {
        let k = self.dim();
        let eig = self.tridiagonal(k);
        let q = &eig.eigenvectors;
        let mut coef = vec![C64::new(0.0, 0.0); k];
        for m in 0..k {
            let w = f(eig.eigenvalues[m]) * q[(0, m)];
            for (i, c) in coef.iter_mut().enumerate() {
                *c += w * q[(i, m)];
            }
        }
        let n = self.basis[0].len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (c, v) in coef.iter().zip(&self.basis) {
            let c = c * start_norm;
            out.iter_mut().zip(v).for_each(|(o, vi)| *o += c * vi);
        }
        out
    }
}

/// Smallest and largest eigenvalue of a Hermitian operator by Lanczos.
pub fn extremal_eigenvalues<A>(apply: A, start: &[C64], max_dim: usize, tol: f64) -> Result<(f64, f64)>
where
    A: Fn(&[C64]) -> Vec<C64>,
{
    let mut lz = Lanczos::new(start)?;
    let mut prev = (f64::NAN, f64::NAN);
    while lz.dim() < max_dim {
        let more = lz.step(&apply);
        if lz.dim() % 10 == 0 || !more {
            let r = lz.ritz_values();
            let cur = (r[0], r[r.len() - 1]);
            let scale = cur.0.abs().max(cur.1.abs()).max(1e-300);
            if !more || ((cur.0 - prev.0).abs() <= tol * scale && (cur.1 - prev.1).abs() <= tol * scale) {
                return Ok(cur);
            }
            prev = cur;
        }
    }
    Err(Error::Eigen(format!(
        "Lanczos did not converge to {tol:e} within {max_dim} vectors"
    )))
}

/// f(A)v for Hermitian A, iterated until successive approximations agree to
/// `tol` relative to ‖v‖.
pub fn apply_function<A, F>(apply: A, v: &[C64], f: F, tol: f64, max_dim: usize) -> Result<Vec<C64>>
where
    A: Fn(&[C64]) -> Vec<C64>,
    F: Fn(f64) -> C64,
{
    let vn = norm(v);
    if vn == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); v.len()]);
    }
    let mut lz = Lanczos::new(v)?;
    let mut prev: Option<Vec<C64>> = None;
    while lz.dim() < max_dim {
        let more = lz.step(&apply);
        if lz.dim() % 8 == 0 || !more {
            let cur = lz.function_action(vn, &f);
            if !more {
                return Ok(cur);
            }
            if let Some(p) = &prev {
                if crate::grid::diff_norm(p, &cur) <= tol * vn {
                    return Ok(cur);
                }
            }
            prev = Some(cur);
        }
    }
    Err(Error::Eigen(format!(
        "Krylov function action did not converge to {tol:e} within {max_dim} vectors"
    )))
}
