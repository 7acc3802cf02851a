//! Wave packets confined to one energy branch, or mixing both.
//!
//! The branch spinor at momentum p is P±(p)χ± normalized, where χ± is the
//! β = ±1, Σ₃ = +1 eigenspinor of the chosen representation. The overlap
//! ‖P±χ±‖² = (1 + m₀c²/E)/2 ≥ 1/2 never vanishes, so the gauge is smooth
//! in p.

use nalgebra::Vector4;
use num_complex::Complex64 as C64;

use super::projectors::{energy_block_projector, Branch};
use crate::algebra::DiracAlgebra;
use crate::error::{Error, Result};
use crate::grid::{MomentumGrid1D, SpinorWavePacket, SPINOR};
use crate::linalg::{apply4, eigh4};
use crate::units::ParticleParams;

/// The β = `beta_sign`, Σ₃ = +1 eigenspinor of `algebra`.
pub fn spin_up_reference(algebra: &DiracAlgebra, beta_sign: f64) -> [C64; SPINOR] {
    // β and Σ₃ commute; β + Σ₃/2 separates all four joint labels.
    let m = algebra.beta + algebra.sigma(2) * C64::new(0.5, 0.0);
    let (vals, vecs) = eigh4(&m);
    let target = beta_sign.signum() + 0.5;
    let k = (0..4)
        .min_by(|&a, &b| (vals[a] - target).abs().total_cmp(&(vals[b] - target).abs()))
        .expect("four eigenvalues");
    let col = vecs.column(k);
    // Fix the phase: largest component real and positive.
    let big = (0..4).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap();
    let phase = col[big].conj() / col[big].norm();
    [col[0] * phase, col[1] * phase, col[2] * phase, col[3] * phase]
}

/// Unit spinor on the `branch` energy eigenspace at momentum p.
pub fn branch_spinor(p: f64, params: &ParticleParams, algebra: &DiracAlgebra, branch: Branch) -> [C64; SPINOR] {
    let chi = spin_up_reference(algebra, branch.sign());
    let proj = energy_block_projector(p, params, algebra, branch);
    let u = apply4(&proj, &chi);
    let n = Vector4::new(u[0], u[1], u[2], u[3]).norm();
    u.map(|z| z / n)
}

/// Gaussian packet ∝ exp(−(p−p₀)²/(4σ_p²)) e^{−ipr₀/ħ} on a single branch.
pub fn single_branch_packet(
    grid: &MomentumGrid1D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    p0: f64,
    sigma_p: f64,
    r0: f64,
    branch: Branch,
) -> Result<SpinorWavePacket> {
    SpinorWavePacket::gaussian(grid, p0, sigma_p, r0, |p| branch_spinor(p, params, algebra, branch))
}

/// Superposition √w·u₊(p) + √(1−w)·u₋(p) under a common Gaussian envelope;
/// w = 1/2 gives the equal-weight packet that shows Zitterbewegung.
pub fn mixed_branch_packet(
    grid: &MomentumGrid1D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    p0: f64,
    sigma_p: f64,
    r0: f64,
    positive_weight: f64,
) -> Result<SpinorWavePacket> {
    if !(0.0..=1.0).contains(&positive_weight) {
        return Err(Error::InvalidParameter(format!(
            "branch weight must lie in [0, 1], got {positive_weight}"
        )));
    }
    let (a, b) = (positive_weight.sqrt(), (1.0 - positive_weight).sqrt());
    SpinorWavePacket::gaussian(grid, p0, sigma_p, r0, |p| {
        let up = branch_spinor(p, params, algebra, Branch::Positive);
        let um = branch_spinor(p, params, algebra, Branch::Negative);
        [0, 1, 2, 3].map(|s| up[s] * a + um[s] * b)
    })
}
