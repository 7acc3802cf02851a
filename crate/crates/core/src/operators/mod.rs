//! The Dirac Hamiltonian Ĥ_D = cα₃p̂ + βm₀c² and the intrinsic time operator
//! T̂ = α₃r̂/c + βτ₀ on a periodic momentum grid, together with their
//! spectra, sign-branch projectors and the T̂ eigenbasis.
//!
//! Motion is along one axis, with the full 4-component spinor retained so
//! the branch and degeneracy structure is intact. Ĥ_D is block diagonal in
//! momentum. T̂ is block diagonal in position and is applied matrix-free
//! through the FFT, so r̂ = iħ d/dp is a spectral derivative.

mod constraints;
pub mod grid3d;
mod packets;
mod projectors;
mod spectra;
mod time_basis;

pub use constraints::{balanced_width, random_smooth_packets, verify_quadratic_constraints};
pub use packets::{branch_spinor, mixed_branch_packet, single_branch_packet, spin_up_reference};
pub use projectors::{
    block_projector, branch_projector, energy_block_projector, Branch, OperatorKind, ProjectorRoute,
};
pub use spectra::{
    compare_with_closed_form, dense_eigenvalues, dense_eigenvalues_of, energy_branch_spectrum, energy_spectrum, time_branch_spectrum,
    time_spectrum, BranchEntry, BranchSpectrum, SpectrumComparison, SpectrumVariable,
};
pub use time_basis::{time_representation, TimeEigenbasis};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{DiracAlgebra, Mat4};
use crate::error::{Error, Result};
use crate::grid::{dot, norm, MomentumGrid1D, SPINOR};
use crate::linalg::{apply4, matvec, DenseMatrix};
use crate::units::ParticleParams;

/// Largest grid (points) for which dense matrices are materialized.
pub const DENSE_GRID_LIMIT: usize = 1024;

type Action = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;

/// A linear operator on a discretized spinor space, applied matrix-free.
#[derive(Clone)]
pub struct GridOperator {
    label: String,
    dim: usize,
    hermitian: bool,
    action: Action,
}

impl fmt::Debug for GridOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridOperator")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

impl GridOperator {
    pub fn new<F>(label: impl Into<String>, dim: usize, hermitian: bool, action: F) -> Self
    where
        F: Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            dim,
            hermitian,
            action: Arc::new(action),
        }
    }

    pub fn from_dense(label: impl Into<String>, m: DenseMatrix, hermitian: bool) -> Self {
        let dim = m.nrows();
        Self::new(label, dim, hermitian, move |x| matvec(&m, x))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new("I", dim, true, |x| x.to_vec())
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("0", dim, true, |x| vec![C64::new(0.0, 0.0); x.len()])
    }

    /// Marks a composite as Hermitian when that is known analytically.
    pub fn assume_hermitian(mut self) -> Self {
        self.hermitian = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim, "operator `{}` dimension", self.label);
        (self.action)(x)
    }

    pub fn try_apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.action)(x))
    }

    /// Materializes the matrix column by column. Refused above the dense
    /// limit of 4·1024 rows.
    pub fn dense(&self) -> Result<DenseMatrix> {
        if self.dim > SPINOR * DENSE_GRID_LIMIT {
            return Err(Error::TooLarge {
                n: self.dim / SPINOR,
                limit: DENSE_GRID_LIMIT,
                hint: "",
            });
        }
        let n = self.dim;
        let mut m = DenseMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            let col = self.apply(&e);
            for (i, z) in col.into_iter().enumerate() {
                m[(i, j)] = z;
            }
            e[j] = C64::new(0.0, 0.0);
        }
        Ok(m)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let a = self.action.clone();
        let herm = self.hermitian && s.im == 0.0;
        Self::new(format!("({s})·{}", self.label), self.dim, herm, move |x| {
            a(x).into_iter().map(|z| z * s).collect()
        })
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let (a, b) = (self.action.clone(), other.action.clone());
        Self::new(
            format!("{} + {}", self.label, other.label),
            self.dim,
            self.hermitian && other.hermitian,
            move |x| a(x).into_iter().zip(b(x)).map(|(p, q)| p + q).collect(),
        )
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// self · other (other applied first).
    pub fn then_after(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let (a, b) = (self.action.clone(), other.action.clone());
        Self::new(
            format!("{}·{}", self.label, other.label),
            self.dim,
            false,
            move |x| a(&b(x)),
        )
    }

    /// [self, other] = self·other − other·self.
    pub fn commutator(&self, other: &Self) -> Self {
        let (a, b) = (self.action.clone(), other.action.clone());
        Self::new(
            format!("[{}, {}]", self.label, other.label),
            self.dim,
            false,
            move |x| {
                let ab = a(&b(x));
                let ba = b(&a(x));
                ab.into_iter().zip(ba).map(|(p, q)| p - q).collect()
            },
        )
    }

    /// max over random pairs of |⟨φ|Aψ⟩ − ⟨Aφ|ψ⟩| / (‖φ‖‖ψ‖).
    pub fn hermiticity_residual(&self, trials: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let phi = random_vector(&mut rng, self.dim);
            let psi = random_vector(&mut rng, self.dim);
            let lhs = dot(&phi, &self.apply(&psi));
            let rhs = dot(&self.apply(&phi), &psi);
            worst = worst.max((lhs - rhs).norm() / (norm(&phi) * norm(&psi)));
        }
        worst
    }

    /// ‖[self, other]ψ‖ / ‖ψ‖ over seeded random vectors.
    pub fn commutation_residual(&self, other: &Self, trials: usize, seed: u64) -> f64 {
        let c = self.commutator(other);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| {
                let v = random_vector(&mut rng, self.dim);
                norm(&c.apply(&v)) / norm(&v)
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Applies a per-momentum 4×4 block to every grid point.
pub(crate) fn apply_blocks(blocks: &[Mat4], x: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(x.len());
    for (b, v) in blocks.iter().zip(x.chunks_exact(SPINOR)) {
        out.extend_from_slice(&apply4(b, v));
    }
    out
}

/// The 4×4 Hamiltonian block c·α₃·p + β·m₀c².
pub fn hamiltonian_block(p: f64, params: &ParticleParams, algebra: &DiracAlgebra) -> Mat4 {
    algebra.alpha[2] * C64::new(params.c() * p, 0.0)
        + algebra.beta * C64::new(params.rest_energy(), 0.0)
}

/// The 4×4 position-space block α₃·r/c + β·τ₀ of the time operator.
pub fn time_block(r: f64, params: &ParticleParams, algebra: &DiracAlgebra) -> Mat4 {
    algebra.alpha[2] * C64::new(r / params.c(), 0.0) + algebra.beta * C64::new(params.tau0, 0.0)
}

pub fn build_hamiltonian(grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra) -> GridOperator {
    let blocks: Vec<Mat4> = grid
        .momenta()
        .into_iter()
        .map(|p| hamiltonian_block(p, params, algebra))
        .collect();
    GridOperator::new("H_D", grid.dim(), true, move |x| apply_blocks(&blocks, x))
}

pub fn build_time_operator(grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra) -> GridOperator {
    let g = grid.clone();
    let blocks: Vec<Mat4> = grid
        .positions()
        .into_iter()
        .map(|r| time_block(r, params, algebra))
        .collect();
    GridOperator::new("T", grid.dim(), true, move |x| {
        g.map_position(x, |k, v| {
            let y = apply4(&blocks[k], v);
            v.copy_from_slice(&y);
        })
    })
}

/// Multiplication by the grid momentum p (spinor identity).
pub fn build_momentum(grid: &MomentumGrid1D) -> GridOperator {
    let ps = grid.momenta();
    GridOperator::new("p", grid.dim(), true, move |x| {
        x.chunks_exact(SPINOR)
            .zip(&ps)
            .flat_map(|(c, p)| c.iter().map(move |z| z * p))
            .collect()
    })
}

/// r̂ = iħ d/dp (spinor identity).
pub fn build_position(grid: &MomentumGrid1D) -> GridOperator {
    let g = grid.clone();
    GridOperator::new("r", grid.dim(), true, move |x| g.apply_position(x))
}

/// A constant 4×4 matrix acting on every grid point.
pub fn build_spin_matrix(grid: &MomentumGrid1D, m: Mat4, label: &str) -> GridOperator {
    let herm = crate::algebra::max_abs_diff(&m, &m.adjoint()) == 0.0;
    GridOperator::new(label, grid.dim(), herm, move |x| {
        x.chunks_exact(SPINOR).flat_map(|v| apply4(&m, v)).collect()
    })
}

/// Writes `m` row-major as little-endian (re, im) f64 pairs.
pub fn write_binary_dump<W: std::io::Write>(m: &DenseMatrix, mut out: W) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, hermiticity_defect};

    fn setup(n: usize) -> (MomentumGrid1D, ParticleParams, DiracAlgebra) {
        (
            MomentumGrid1D::with_box(n, 60.0, 0.0, 1.0).unwrap(),
            ParticleParams::natural(),
            DiracAlgebra::standard(),
        )
    }

    #[test]
    fn block_at_rest_is_beta() {
        let (_, params, alg) = setup(16);
        assert_eq!(hamiltonian_block(0.0, &params, &alg), alg.beta);
    }

    #[test]
    fn block_at_unit_momentum_has_root_two_eigenvalues() {
        let (_, params, alg) = setup(16);
        let (vals, _) = crate::linalg::eigh4(&hamiltonian_block(1.0, &params, &alg));
        let s = 2f64.sqrt();
        for (v, w) in vals.iter().zip([-s, -s, s, s]) {
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_block_squares_to_scalar() {
        let (_, params, alg) = setup(16);
        for p in [-3.0, -0.2, 0.0, 0.9, 11.0] {
            let h = hamiltonian_block(p, &params, &alg);
            let want = Mat4::identity() * C64::new(p * p + 1.0, 0.0);
            assert!(crate::algebra::max_abs_diff(&(h * h), &want) < 1e-12);
        }
    }

    #[test]
    fn both_operators_are_hermitian() {
        let (g, params, alg) = setup(64);
        let h = build_hamiltonian(&g, &params, &alg);
        let t = build_time_operator(&g, &params, &alg);
        assert!(h.hermiticity_residual(4, 1) < 1e-10);
        assert!(t.hermiticity_residual(4, 2) < 1e-10);
        assert!(hermiticity_defect(&t.dense().unwrap()) < 1e-12);
    }

    #[test]
    fn time_operator_on_zero_position_beta_eigenspinor() {
        // Constant in p means localized at r = 0.
        let (g, params, alg) = setup(64);
        let t = build_time_operator(&g, &params, &alg);
        for (spinor, sign) in [([1.0, 0.0, 0.0, 0.0], 1.0), ([0.0, 0.0, 0.0, 1.0], -1.0)] {
            let x: Vec<C64> = (0..g.n())
                .flat_map(|_| spinor.map(|s| C64::new(s, 0.0)))
                .collect();
            let y = t.apply(&x);
            let want: Vec<C64> = x.iter().map(|z| z * (sign * params.tau0)).collect();
            assert!(crate::grid::diff_norm(&y, &want) < 1e-12 * norm(&x));
        }
    }

    #[test]
    fn time_operator_squares_to_radial_form() {
        let (g, params, alg) = setup(64);
        let t = build_time_operator(&g, &params, &alg);
        let r = build_position(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_vector(&mut rng, g.dim());
        let t2 = t.apply(&t.apply(&x));
        let r2 = r.apply(&r.apply(&x));
        let tau2 = params.tau0 * params.tau0;
        let want: Vec<C64> = r2.iter().zip(&x).map(|(a, b)| a + b * tau2).collect();
        assert!(crate::grid::diff_norm(&t2, &want) < 1e-11 * norm(&want));
    }

    #[test]
    fn dense_refused_above_limit() {
        let g = MomentumGrid1D::new(2048, 0.01, 0.0, 1.0).unwrap();
        let h = build_hamiltonian(&g, &ParticleParams::natural(), &DiracAlgebra::standard());
        assert!(matches!(h.dense(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn dense_hamiltonian_spectrum() {
        let (g, params, alg) = setup(16);
        let h = build_hamiltonian(&g, &params, &alg).dense().unwrap();
        let vals = hermitian_eigenvalues(&h).unwrap();
        let mut want: Vec<f64> = g
            .momenta()
            .iter()
            .flat_map(|p| {
                let e = (p * p + 1.0f64).sqrt();
                [e, e, -e, -e]
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (v, w) in vals.iter().zip(&want) {
            assert!((v - w).abs() < 1e-12 * w.abs());
        }
    }

    #[test]
    fn binary_dump_is_row_major() {
        let (g, params, alg) = setup(16);
        let m = build_hamiltonian(&g, &params, &alg).dense().unwrap();
        let mut buf = Vec::new();
        write_binary_dump(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 64 * 64 * 16);
        let at = |i: usize, j: usize| {
            let o = (i * 64 + j) * 16;
            C64::new(
                f64::from_le_bytes(buf[o..o + 8].try_into().unwrap()),
                f64::from_le_bytes(buf[o + 8..o + 16].try_into().unwrap()),
            )
        };
        assert_eq!(at(0, 2), m[(0, 2)]);
        assert_eq!(at(2, 0), m[(2, 0)]);
    }

    #[test]
    fn try_apply_reports_mismatch() {
        let (g, params, alg) = setup(16);
        let h = build_hamiltonian(&g, &params, &alg);
        assert!(matches!(
            h.try_apply(&[C64::new(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch { expected: 64, got: 3 })
        ));
    }
}
