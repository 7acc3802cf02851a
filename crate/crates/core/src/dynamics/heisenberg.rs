//! The Heisenberg equation for the intrinsic time operator,
//!
//!   dT̂/dt = [T̂, Ĥ_D]/iħ = {I + 2βK̂} + (2β/iħ){τ₀Ĥ_D − m₀c²T̂},
//!
//! checked as an operator identity (matrix-free, on vectors) and through the
//! time derivative of ⟨T̂⟩ along the exact evolution.
//!
//! In d spatial dimensions the commutator of the kinetic parts gives
//! d·I + 2Σ·L/ħ, so the K̂ that makes the identity exact is
//! β(Σ·L/ħ + (d−1)/2): the familiar β(2s·l/ħ² + 1) in three dimensions,
//! and the zero operator on the axial line, where L ≡ 0.

use num_complex::Complex64 as C64;

use super::DiracPropagator;
use crate::algebra::DiracAlgebra;
use crate::error::{Error, Result};
use crate::grid::{diff_norm, dot, norm, MomentumGrid1D, SpinorWavePacket};
use crate::operators::grid3d::{
    build_hamiltonian_3d, build_momentum_3d, build_orbital_3d, build_position_3d, build_spin_matrix_3d,
    build_time_operator_3d, random_smooth_fields_3d, MomentumGrid3D,
};
use crate::operators::{build_hamiltonian, build_spin_matrix, build_time_operator, GridOperator};
use crate::report::VerificationReport;
use crate::units::ParticleParams;

/// Largest cube edge accepted by [`verify_heisenberg_3d`].
pub const HEISENBERG_3D_MAX_EDGE: usize = 16;

/// Centred finite-difference step for d⟨T̂⟩/dt (Richardson-extrapolated once).
const FD_STEP: f64 = 1e-4;
/// Agreement required between d⟨T̂⟩/dt and ⟨RHS⟩.
pub const FD_TOL: f64 = 1e-6;

/// K̂ = β(Σ·L/ħ + (d−1)/2), kept together with the dimension it was built for.
#[derive(Debug, Clone)]
pub struct KOperator {
    pub op: GridOperator,
    pub dims: usize,
}

impl KOperator {
    fn assemble(beta: &GridOperator, spin_orbit: Option<GridOperator>, dims: usize, hbar: f64) -> Self {
        let dim = beta.dim();
        let offset = GridOperator::identity(dim).scaled(C64::new((dims as f64 - 1.0) / 2.0, 0.0));
        let inner = match spin_orbit {
            Some(sl) => sl.scaled(C64::new(1.0 / hbar, 0.0)).plus(&offset),
            None => offset,
        };
        let op = beta.then_after(&inner).with_label("K").assume_hermitian();
        Self { op, dims }
    }

    /// Axial restriction: one dimension, no orbital motion.
    pub fn axial(grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra) -> Self {
        let beta = build_spin_matrix(grid, algebra.beta, "b");
        Self::assemble(&beta, None, 1, params.hbar())
    }

    pub fn full_3d(grid: &MomentumGrid3D, params: &ParticleParams, algebra: &DiracAlgebra) -> Self {
        let beta = build_spin_matrix_3d(grid, algebra.beta, "b");
        let mut sl = GridOperator::zero(grid.dim());
        for k in 0..3 {
            let s = build_spin_matrix_3d(grid, algebra.sigma(k), "S");
            sl = sl.plus(&s.then_after(&build_orbital_3d(grid, k)));
        }
        Self::assemble(&beta, Some(sl), 3, params.hbar())
    }
}

/// Both sides of the identity and their ingredients on one grid.
#[derive(Debug, Clone)]
pub struct HeisenbergOperators {
    pub t: GridOperator,
    pub h: GridOperator,
    pub k: KOperator,
    /// I + 2βK̂, the coefficient of t in the integrated equation.
    pub slope: GridOperator,
    /// [T̂, Ĥ_D]/iħ.
    pub lhs: GridOperator,
    pub rhs: GridOperator,
    /// RHS without the τ₀Ĥ_D term (sensitivity probe).
    pub rhs_without_tau_term: GridOperator,
}

impl HeisenbergOperators {
    fn assemble(t: GridOperator, h: GridOperator, beta: GridOperator, k: KOperator, params: &ParticleParams) -> Self {
        let dim = t.dim();
        let hbar = params.hbar();
        let minus_i_over_hbar = C64::new(0.0, -1.0 / hbar);
        let slope = GridOperator::identity(dim)
            .plus(&beta.then_after(&k.op).scaled(C64::new(2.0, 0.0)))
            .with_label("I + 2bK");
        let lhs = t.commutator(&h).scaled(minus_i_over_hbar).assume_hermitian();
        // (2β/iħ)(τ₀H − m₀c²T)
        let tau_h = h.scaled(C64::new(params.tau0, 0.0));
        let mc2_t = t.scaled(C64::new(params.rest_energy(), 0.0));
        let two_beta = beta.scaled(minus_i_over_hbar * 2.0);
        let rhs = slope.plus(&two_beta.then_after(&tau_h.minus(&mc2_t)));
        let rhs_without_tau_term = slope.minus(&two_beta.then_after(&mc2_t));
        Self {
            t,
            h,
            k,
            slope,
            lhs,
            rhs: rhs.with_label("rhs"),
            rhs_without_tau_term: rhs_without_tau_term.with_label("rhs without tau0 H"),
        }
    }

    pub fn axial(grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra) -> Self {
        Self::assemble(
            build_time_operator(grid, params, algebra),
            build_hamiltonian(grid, params, algebra),
            build_spin_matrix(grid, algebra.beta, "b"),
            KOperator::axial(grid, params, algebra),
            params,
        )
    }

    pub fn cube(grid: &MomentumGrid3D, params: &ParticleParams, algebra: &DiracAlgebra) -> Self {
        Self::assemble(
            build_time_operator_3d(grid, params, algebra),
            build_hamiltonian_3d(grid, params, algebra),
            build_spin_matrix_3d(grid, algebra.beta, "b"),
            KOperator::full_3d(grid, params, algebra),
            params,
        )
    }

    /// ‖(LHS − RHS)ψ‖ / ‖LHS ψ‖.
    pub fn identity_residual(&self, x: &[C64], drop_tau_term: bool) -> f64 {
        let l = self.lhs.apply(x);
        let r = if drop_tau_term {
            self.rhs_without_tau_term.apply(x)
        } else {
            self.rhs.apply(x)
        };
        diff_norm(&l, &r) / norm(&l)
    }
}

pub fn heisenberg_operators(grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra) -> HeisenbergOperators {
    HeisenbergOperators::axial(grid, params, algebra)
}

/// Axial check: operator identity on the packet, and the centred
/// finite-difference d⟨T̂⟩/dt against ⟨RHS⟩. With `drop_tau_term` the
/// τ₀Ĥ_D term is removed from the right-hand side.
pub fn ehrenfest_check_heisenberg(
    packet: &SpinorWavePacket,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    tol: f64,
    drop_tau_term: bool,
) -> VerificationReport {
    let mut report = VerificationReport::new("time-operator-heisenberg", "time-operator-heisenberg-equation");
    let grid = packet.grid();
    let ops = HeisenbergOperators::axial(grid, params, algebra);
    let x = packet.amplitudes();
    report.push("operator identity", ops.identity_residual(x, drop_tau_term), tol);

    let prop = DiracPropagator::new(grid, params, algebra);
    let t_at = |dt: f64| {
        let pk = prop.evolve(packet, dt);
        pk.expectation_of(&ops.t.apply(pk.amplitudes()))
    };
    let d = |h: f64| (t_at(h) - t_at(-h)) / (2.0 * h);
    let derivative = (4.0 * d(FD_STEP / 2.0) - d(FD_STEP)) / 3.0;
    let rhs_op = if drop_tau_term { &ops.rhs_without_tau_term } else { &ops.rhs };
    let rhs = dot(x, &rhs_op.apply(x)) / crate::grid::norm_sqr(x);
    report.push("d<T>/dt vs <rhs>", (derivative - rhs.re).abs(), FD_TOL);

    report.measure("d<T>/dt", derivative);
    report.measure("<rhs>", rhs.re);
    report.measure("<rhs> imaginary part", rhs.im);
    report.measure("<I + 2bK>", packet.expectation_of(&ops.slope.apply(x)));
    report.measure("K dims", ops.k.dims as f64);
    for w in packet.support_warnings() {
        report.warn(w);
    }
    report
}

/// Max relative identity residual over the given fields on any cube.
pub fn heisenberg_residual_3d(grid: &MomentumGrid3D, params: &ParticleParams, algebra: &DiracAlgebra, fields: &[Vec<C64>]) -> f64 {
    let ops = HeisenbergOperators::cube(grid, params, algebra);
    fields.iter().map(|f| ops.identity_residual(f, false)).fold(0.0, f64::max)
}

/// The cube spacing that makes momentum window and position box equal,
/// dp = √(2πħ/n).
pub fn balanced_cube(edge: usize, hbar: f64) -> Result<MomentumGrid3D> {
    MomentumGrid3D::new(edge, (2.0 * std::f64::consts::PI * hbar / edge as f64).sqrt(), hbar)
}

/// Operator identity on `trials` random smooth fields and on one isotropic
/// field (spherical envelope ⊗ fixed spinor), on an `edge`³ cube.
pub fn verify_heisenberg_3d(
    edge: usize,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    if edge > HEISENBERG_3D_MAX_EDGE {
        return Err(Error::TooLarge {
            n: edge,
            limit: HEISENBERG_3D_MAX_EDGE,
            hint: "; the 3-D identity check is restricted to small cubes",
        });
    }
    let grid = balanced_cube(edge, params.hbar())?;
    let ops = HeisenbergOperators::cube(&grid, params, algebra);
    let fields = random_smooth_fields_3d(&grid, trials, seed, false);
    let iso = random_smooth_fields_3d(&grid, 1, seed ^ 0x5eed, true);

    let mut report = VerificationReport::new("time-operator-heisenberg-3d", "time-operator-heisenberg-equation");
    let random = fields.iter().map(|f| ops.identity_residual(f, false)).fold(0.0, f64::max);
    report.push(format!("operator identity ({trials} random fields)"), random, tol);
    report.push("operator identity (isotropic field)", ops.identity_residual(&iso[0], false), tol);

    // Diagnostics: how far the grid is from canonical [r̂ᵢ, p̂ᵢ] = iħ, how
    // well K̂ is conserved, and the constraint-pattern probe.
    let hbar = params.hbar();
    let canon: Vec<GridOperator> = (0..3)
        .map(|i| build_position_3d(&grid, i).commutator(&build_momentum_3d(&grid, i)))
        .collect();
    let (mut defect, mut kcomm) = (0.0f64, 0.0f64);
    let mut probe = C64::new(0.0, 0.0);
    let kh = ops.k.op.commutator(&ops.h);
    for f in &fields {
        let mut sum = vec![C64::new(0.0, 0.0); f.len()];
        for c in &canon {
            let y = c.apply(f);
            let ideal: Vec<C64> = f.iter().map(|z| z * C64::new(0.0, hbar)).collect();
            defect = defect.max(diff_norm(&y, &ideal) / norm(f));
            sum.iter_mut().zip(y).for_each(|(s, v)| *s += v);
        }
        kcomm = kcomm.max(norm(&kh.apply(f)) / norm(f));
        // ⟨[T̂, Ĥ_D] − Σᵢ[r̂ᵢ, p̂ᵢ]⟩ / iħ
        let th = ops.t.commutator(&ops.h).apply(f);
        let diff: Vec<C64> = th.iter().zip(&sum).map(|(a, b)| a - b).collect();
        probe += dot(f, &diff) / (C64::new(0.0, hbar) * crate::grid::norm_sqr(f));
    }
    probe /= fields.len().max(1) as f64;
    report.measure("edge", edge as f64);
    report.measure("canonical commutator defect", defect);
    report.measure("[K,H] relative norm", kcomm);
    report.measure("constraint probe re", probe.re);
    report.measure("constraint probe im", probe.im);
    Ok(report)
}

/// ‖[K̂, Ĥ_D]ψ‖ ≤ tol·‖ψ‖ on the given fields.
pub fn verify_k_conservation(
    grid: &MomentumGrid3D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    fields: &[Vec<C64>],
    tol: f64,
) -> VerificationReport {
    let k = KOperator::full_3d(grid, params, algebra);
    let h = build_hamiltonian_3d(grid, params, algebra);
    let c = k.op.commutator(&h);
    let worst = fields.iter().map(|f| norm(&c.apply(f)) / norm(f)).fold(0.0, f64::max);
    let mut report = VerificationReport::new("k-conservation", "spin-orbit-constant-of-motion");
    report.measure("edge", grid.n() as f64);
    report.push("[K,H]", worst, tol);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{mixed_branch_packet, single_branch_packet, time_block, Branch};

    fn axial_setup() -> (MomentumGrid1D, ParticleParams, DiracAlgebra) {
        (
            MomentumGrid1D::new(256, 0.05, 0.0, 1.0).unwrap(),
            ParticleParams::natural(),
            DiracAlgebra::standard(),
        )
    }

    #[test]
    fn single_block_expansion() {
        // With r and p frozen to numbers, only the α/β cross terms survive:
        // [α₃r/c + βτ₀, cα₃p + βm₀c²] = 2β(τ₀H − m₀c²T).
        let params = ParticleParams::natural();
        let alg = DiracAlgebra::standard();
        let (r, p) = (0.7, -1.3);
        let t = time_block(r, &params, &alg);
        let h = crate::operators::hamiltonian_block(p, &params, &alg);
        let want = alg.beta * (h * C64::new(params.tau0, 0.0) - t * C64::new(params.rest_energy(), 0.0)) * C64::new(2.0, 0.0);
        assert!(crate::algebra::max_abs_diff(&(t * h - h * t), &want) < 1e-13);
    }

    #[test]
    fn axial_identity_holds() {
        let (g, params, alg) = axial_setup();
        let pk = mixed_branch_packet(&g, &params, &alg, 0.5, 0.2, 0.0, 0.5).unwrap();
        let r = ehrenfest_check_heisenberg(&pk, &params, &alg, 1e-8, false);
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.measurements["K dims"], 1.0);
    }

    #[test]
    fn dropping_tau_term_breaks_identity() {
        let (g, params, alg) = axial_setup();
        let pk = single_branch_packet(&g, &params, &alg, 0.5, 0.2, 0.0, Branch::Positive).unwrap();
        let r = ehrenfest_check_heisenberg(&pk, &params, &alg, 1e-8, true);
        assert!(r.get("operator identity").unwrap().residual > 1e-3);
    }

    #[test]
    fn axial_k_is_zero() {
        let (g, params, alg) = axial_setup();
        let k = KOperator::axial(&g, &params, &alg);
        let pk = mixed_branch_packet(&g, &params, &alg, 0.5, 0.2, 0.0, 0.5).unwrap();
        assert!(norm(&k.op.apply(pk.amplitudes())) == 0.0);
    }

    #[test]
    fn cube_limit_enforced() {
        let params = ParticleParams::natural();
        let err = verify_heisenberg_3d(32, &params, &DiracAlgebra::standard(), 1, 0, 1e-7).unwrap_err();
        assert!(matches!(err, Error::TooLarge { limit: 16, .. }));
    }

    #[test]
    fn identity_converges_with_cube_resolution() {
        // The only inexact ingredient is [r̂ᵢ, p̂ᵢ] = iħ, which improves
        // spectrally with the cube edge.
        let params = ParticleParams::natural();
        let alg = DiracAlgebra::standard();
        let res: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let g = balanced_cube(n, 1.0).unwrap();
                let f = random_smooth_fields_3d(&g, 2, 3, false);
                heisenberg_residual_3d(&g, &params, &alg, &f)
            })
            .collect();
        assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
        assert!(res[2] < 1e-7, "{res:?}");
    }

    #[test]
    fn k_is_conserved_on_a_resolved_cube() {
        let params = ParticleParams::natural();
        let alg = DiracAlgebra::standard();
        let g = balanced_cube(64, 1.0).unwrap();
        let f = random_smooth_fields_3d(&g, 2, 9, false);
        let r = verify_k_conservation(&g, &params, &alg, &f, 1e-9);
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn small_cube_report_records_diagnostics() {
        let r = verify_heisenberg_3d(8, &ParticleParams::natural(), &DiracAlgebra::standard(), 2, 1, 1e-7).unwrap();
        for key in ["canonical commutator defect", "[K,H] relative norm", "constraint probe re"] {
            assert!(r.measurements.contains_key(key), "{key}");
        }
        assert_eq!(r.checks.len(), 2);
    }
}
