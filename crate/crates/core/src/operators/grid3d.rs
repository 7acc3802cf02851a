//! A small periodic 3-D momentum grid, used matrix-free only.
//!
//! Layout is `((ix·n + iy)·n + iz)·4 + s`. Positions per axis follow the
//! same FFT order as the 1-D grid, and r̂ᵢ = iħ ∂/∂pᵢ is spectral along
//! axis i.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{GridOperator, random_vector};
use crate::algebra::{DiracAlgebra, Mat4};
use crate::error::{Error, Result};
use crate::grid::{diff_norm, norm, SPINOR};
use crate::report::VerificationReport;
use crate::linalg::apply4;
use crate::units::ParticleParams;

#[derive(Clone)]
pub struct MomentumGrid3D {
    n: usize,
    dp: f64,
    hbar: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for MomentumGrid3D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentumGrid3D")
            .field("n", &self.n)
            .field("dp", &self.dp)
            .field("hbar", &self.hbar)
            .finish()
    }
}

impl MomentumGrid3D {
    /// Cube of `n`³ points centred on p = 0; `n` a power of two ≥ 4.
    pub fn new(n: usize, dp: f64, hbar: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "3-D edge must be a power of two >= 4, got {n}"
            )));
        }
        if !(dp.is_finite() && dp > 0.0 && hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter("dp and hbar must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            dp,
            hbar,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn dim(&self) -> usize {
        SPINOR * self.points()
    }

    pub fn p1(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dp
    }

    pub fn r1(&self, k: usize) -> f64 {
        let dr = 2.0 * PI * self.hbar / (self.dp * self.n as f64);
        if k < self.n / 2 {
            k as f64 * dr
        } else {
            (k as f64 - self.n as f64) * dr
        }
    }

    fn unflatten(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn momentum(&self, point: usize) -> [f64; 3] {
        self.unflatten(point).map(|j| self.p1(j))
    }

    pub fn position(&self, point: usize) -> [f64; 3] {
        self.unflatten(point).map(|k| self.r1(k))
    }

    fn transform(&self, data: &[C64], plan: &Arc<dyn Fft<f64>>) -> Vec<C64> {
        assert_eq!(data.len(), self.dim(), "3-D field length");
        let n = self.n;
        let mut out = data.to_vec();
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let scale = 1.0 / (n as f64).sqrt();
        // Stride (in points) of each axis.
        for stride in [n * n, n, 1] {
            for base in 0..self.points() {
                // Visit each line once, from its first point.
                let along = (base / stride) % n;
                if along != 0 {
                    continue;
                }
                for s in 0..SPINOR {
                    for (j, b) in buf.iter_mut().enumerate() {
                        *b = out[SPINOR * (base + j * stride) + s];
                    }
                    plan.process(&mut buf);
                    for (j, b) in buf.iter().enumerate() {
                        out[SPINOR * (base + j * stride) + s] = b * scale;
                    }
                }
            }
        }
        out
    }

    pub fn to_position(&self, psi: &[C64]) -> Vec<C64> {
        self.transform(psi, &self.inverse)
    }

    pub fn to_momentum(&self, phi: &[C64]) -> Vec<C64> {
        self.transform(phi, &self.forward)
    }

    pub fn map_position<F>(&self, psi: &[C64], mut f: F) -> Vec<C64>
    where
        F: FnMut(usize, &mut [C64]),
    {
        let mut phi = self.to_position(psi);
        for (k, chunk) in phi.chunks_exact_mut(SPINOR).enumerate() {
            f(k, chunk);
        }
        self.to_momentum(&phi)
    }
}

fn per_point(grid: &MomentumGrid3D, blocks: Vec<Mat4>, label: &str, position_space: bool) -> GridOperator {
    let g = grid.clone();
    GridOperator::new(label, grid.dim(), true, move |x| {
        if position_space {
            g.map_position(x, |k, v| {
                let y = apply4(&blocks[k], v);
                v.copy_from_slice(&y);
            })
        } else {
            x.chunks_exact(SPINOR).zip(&blocks).flat_map(|(v, b)| apply4(b, v)).collect()
        }
    })
}

/// Ĥ = cα·p̂ + βm₀c².
pub fn build_hamiltonian_3d(grid: &MomentumGrid3D, params: &ParticleParams, algebra: &DiracAlgebra) -> GridOperator {
    let blocks = (0..grid.points())
        .map(|k| {
            let p = grid.momentum(k);
            let mut h = algebra.beta * C64::new(params.rest_energy(), 0.0);
            for i in 0..3 {
                h += algebra.alpha[i] * C64::new(params.c() * p[i], 0.0);
            }
            h
        })
        .collect();
    per_point(grid, blocks, "H_D", false)
}

/// T̂ = α·r̂/c + βτ₀.
pub fn build_time_operator_3d(grid: &MomentumGrid3D, params: &ParticleParams, algebra: &DiracAlgebra) -> GridOperator {
    let blocks = (0..grid.points())
        .map(|k| {
            let r = grid.position(k);
            let mut t = algebra.beta * C64::new(params.tau0, 0.0);
            for i in 0..3 {
                t += algebra.alpha[i] * C64::new(r[i] / params.c(), 0.0);
            }
            t
        })
        .collect();
    per_point(grid, blocks, "T", true)
}

/// p̂ᵢ (spinor identity).
pub fn build_momentum_3d(grid: &MomentumGrid3D, axis: usize) -> GridOperator {
    let ps: Vec<f64> = (0..grid.points()).map(|k| grid.momentum(k)[axis]).collect();
    GridOperator::new(format!("p{}", axis + 1), grid.dim(), true, move |x| {
        x.chunks_exact(SPINOR)
            .zip(&ps)
            .flat_map(|(c, p)| c.iter().map(move |z| z * p))
            .collect()
    })
}

/// r̂ᵢ = iħ ∂/∂pᵢ (spinor identity).
pub fn build_position_3d(grid: &MomentumGrid3D, axis: usize) -> GridOperator {
    let g = grid.clone();
    GridOperator::new(format!("r{}", axis + 1), grid.dim(), true, move |x| {
        g.map_position(x, |k, v| {
            let r = g.position(k)[axis];
            v.iter_mut().for_each(|z| *z *= r);
        })
    })
}

/// L̂ₖ = r̂ᵢp̂ⱼ − r̂ⱼp̂ᵢ with (i, j, k) cyclic. The two factors act on
/// different axes and commute exactly on the grid.
pub fn build_orbital_3d(grid: &MomentumGrid3D, axis: usize) -> GridOperator {
    let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
    let a = build_position_3d(grid, i).then_after(&build_momentum_3d(grid, j));
    let b = build_position_3d(grid, j).then_after(&build_momentum_3d(grid, i));
    a.minus(&b).with_label(format!("L{}", axis + 1)).assume_hermitian()
}

/// Checks (Ĥ/c)² = p̂² + (m₀c)² and (cT̂)² = r̂² + (τ₀c)² on each field.
pub fn verify_quadratic_constraints_3d(
    grid: &MomentumGrid3D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    fields: &[Vec<C64>],
    tol: f64,
) -> VerificationReport {
    let mut report = VerificationReport::new("quadratic-constraints-3d", "quadratic-invariants");
    let c = params.c();
    let h = build_hamiltonian_3d(grid, params, algebra);
    let t = build_time_operator_3d(grid, params, algebra);
    let p2: Vec<f64> = (0..grid.points())
        .map(|k| grid.momentum(k).iter().map(|p| p * p).sum())
        .collect();
    let mc2 = (params.m0 * c).powi(2);
    let tc2 = (params.tau0 * c).powi(2);
    let (mut energy, mut time) = (0.0f64, 0.0f64);
    for x in fields {
        let lhs: Vec<C64> = h.apply(&h.apply(x)).into_iter().map(|z| z / (c * c)).collect();
        let rhs: Vec<C64> = x
            .chunks_exact(SPINOR)
            .zip(&p2)
            .flat_map(|(v, q)| v.iter().map(move |z| z * (q + mc2)))
            .collect();
        energy = energy.max(diff_norm(&lhs, &rhs) / norm(&rhs));

        let lhs: Vec<C64> = t.apply(&t.apply(x)).into_iter().map(|z| z * (c * c)).collect();
        let rhs = grid.map_position(x, |k, v| {
            let r2: f64 = grid.position(k).iter().map(|r| r * r).sum();
            v.iter_mut().for_each(|z| *z *= r2 + tc2);
        });
        time = time.max(diff_norm(&lhs, &rhs) / norm(&rhs));
    }
    report.measure("fields", fields.len() as f64);
    report.measure("edge", grid.n() as f64);
    report.push("(H/c)^2 = p^2 + (m0 c)^2", energy, tol);
    report.push("(cT)^2 = r^2 + (tau0 c)^2", time, tol);
    report
}

/// A constant 4×4 matrix on every point of the cube.
pub fn build_spin_matrix_3d(grid: &MomentumGrid3D, m: Mat4, label: &str) -> GridOperator {
    GridOperator::new(label, grid.dim(), true, move |x| {
        x.chunks_exact(SPINOR).flat_map(|v| apply4(&m, v)).collect()
    })
}

/// Seeded smooth fields: a Gaussian envelope of the balanced width times a
/// random first-order polynomial in p with random spinor coefficients.
/// `isotropic` drops the polynomial (spherically symmetric envelope ⊗ fixed
/// spinor).
pub fn random_smooth_fields_3d(grid: &MomentumGrid3D, count: usize, seed: u64, isotropic: bool) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = grid.dp() * (grid.n() as f64 / (4.0 * PI)).sqrt();
    (0..count)
        .map(|_| {
            let u = random_vector(&mut rng, SPINOR);
            let v: Vec<Vec<C64>> = (0..3).map(|_| random_vector(&mut rng, SPINOR)).collect();
            let shift: [f64; 3] = [0, 1, 2].map(|_| 0.2 * sigma * rng.gen_range(-1.0..1.0));
            let mut out = Vec::with_capacity(grid.dim());
            for k in 0..grid.points() {
                let p = grid.momentum(k);
                let q: Vec<f64> = (0..3).map(|i| (p[i] - if isotropic { 0.0 } else { shift[i] }) / sigma).collect();
                let env = (-(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) / 4.0).exp();
                for s in 0..SPINOR {
                    let mut a = u[s];
                    if !isotropic {
                        for i in 0..3 {
                            a += v[i][s] * (0.3 * q[i]);
                        }
                    }
                    out.push(a * env);
                }
            }
            let nrm = norm(&out);
            out.into_iter().map(|z| z / nrm).collect()
        })
        .collect()
}
