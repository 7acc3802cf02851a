//! The quantized quadratic constraints (Ĥ_D/c)² = p̂² + (m₀c)² and
//! (cT̂)² = r̂² + (τ₀c)², checked matrix-free on smooth packets.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{build_hamiltonian, build_momentum, build_position, build_time_operator};
use crate::algebra::DiracAlgebra;
use crate::grid::{diff_norm, norm, MomentumGrid1D, SpinorWavePacket};
use crate::report::VerificationReport;
use crate::units::ParticleParams;

/// Momentum width that balances decay in the momentum window against decay
/// in the position box: σ_p = dp·√(n/4π).
pub fn balanced_width(grid: &MomentumGrid1D) -> f64 {
    grid.dp() * (grid.n() as f64 / (4.0 * PI)).sqrt()
}

/// Seeded packets with Gaussian envelopes of width [`balanced_width`]
/// centred on the window, each carrying a random spinor that varies
/// linearly across the envelope.
pub fn random_smooth_packets(grid: &MomentumGrid1D, count: usize, seed: u64) -> Vec<SpinorWavePacket> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = balanced_width(grid);
    let pc = grid.p_center();
    (0..count)
        .map(|_| {
            let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let u: [C64; 4] = [c(), c(), c(), c()];
            let v: [C64; 4] = [c(), c(), c(), c()];
            let shift = 0.25 * sigma * rng.gen_range(-1.0..1.0);
            SpinorWavePacket::gaussian(grid, pc + shift, sigma, 0.0, |p| {
                let x = (p - pc) / sigma;
                [0, 1, 2, 3].map(|s| u[s] + v[s] * (0.3 * x))
            })
            .expect("random smooth packet is finite and nonzero")
        })
        .collect()
}

pub fn verify_quadratic_constraints(
    grid: &MomentumGrid1D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    packets: &[SpinorWavePacket],
    tol: f64,
) -> VerificationReport {
    let mut report = VerificationReport::new("quadratic-constraints", "quadratic-invariants");
    let c = params.c();
    let h = build_hamiltonian(grid, params, algebra);
    let t = build_time_operator(grid, params, algebra);
    let p = build_momentum(grid);
    let r = build_position(grid);
    let mc2 = (params.m0 * c).powi(2);
    let tc2 = (params.tau0 * c).powi(2);

    let (mut energy, mut time) = (0.0f64, 0.0f64);
    for (i, pk) in packets.iter().enumerate() {
        let x = pk.amplitudes();
        let lhs: Vec<C64> = h.apply(&h.apply(x)).into_iter().map(|z| z / (c * c)).collect();
        let rhs: Vec<C64> = p.apply(&p.apply(x)).iter().zip(x).map(|(a, b)| a + b * mc2).collect();
        energy = energy.max(diff_norm(&lhs, &rhs) / norm(&rhs));

        let lhs: Vec<C64> = t.apply(&t.apply(x)).into_iter().map(|z| z * (c * c)).collect();
        let rhs: Vec<C64> = r.apply(&r.apply(x)).iter().zip(x).map(|(a, b)| a + b * tc2).collect();
        time = time.max(diff_norm(&lhs, &rhs) / norm(&rhs));

        for w in pk.support_warnings() {
            report.warn(format!("packet {i}: {w}"));
        }
    }
    report.measure("packets", packets.len() as f64);
    report.measure("n", grid.n() as f64);
    report.push("(H/c)^2 = p^2 + (m0 c)^2", energy, tol);
    report.push("(cT)^2 = r^2 + (tau0 c)^2", time, tol);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> MomentumGrid1D {
        MomentumGrid1D::new(256, 0.05, 0.0, 1.0).unwrap()
    }

    #[test]
    fn random_packets_are_interior_and_reproducible() {
        let g = grid();
        let a = random_smooth_packets(&g, 3, 11);
        let b = random_smooth_packets(&g, 3, 11);
        assert_eq!(a, b);
        for pk in &a {
            assert!(pk.support_warnings().is_empty(), "{:?}", pk.support_warnings());
        }
    }

    #[test]
    fn constraints_hold_on_standard_grid() {
        let g = grid();
        let params = ParticleParams::natural();
        let pk = random_smooth_packets(&g, 4, 1);
        let r = verify_quadratic_constraints(&g, &params, &DiracAlgebra::standard(), &pk, 1e-10);
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn massless_clock_limit() {
        let g = grid();
        let params = ParticleParams::natural().with_tau0(0.0);
        let pk = random_smooth_packets(&g, 2, 2);
        let r = verify_quadratic_constraints(&g, &params, &DiracAlgebra::standard(), &pk, 1e-12);
        assert!(r.get("(cT)^2 = r^2 + (tau0 c)^2").unwrap().passed);
    }

    #[test]
    fn edge_packet_is_flagged_but_identity_is_exact() {
        // The discrete T̂² = r̂²/c² + τ₀² holds block by block in position
        // space, so wrap-around cannot spoil it; the warning still fires.
        let g = grid();
        let params = ParticleParams::natural();
        let up = |_| [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
        let edge = SpinorWavePacket::gaussian(&g, 0.0, 0.3, 0.45 * g.box_length(), up).unwrap();
        let r = verify_quadratic_constraints(&g, &params, &DiracAlgebra::standard(), &[edge], 1e-10);
        assert!(!r.warnings.is_empty());
        assert!(r.passed(), "{:?}", r.checks);
    }
}
