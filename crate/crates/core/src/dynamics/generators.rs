//! The two unitary generators: U_T = exp(−iδεT̂/ħ) displaces momentum,
//! U_HD = exp(+iδtĤ_D/ħ) displaces position.
//!
//! Displacements are reported as argument shifts: d with ψ'(x) = ψ(x + d),
//! so d = −Δ⟨x⟩. The group velocity v_gp is ⟨cα₃⟩ = ⟨dr̂/dt⟩.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::DiracPropagator;
use crate::algebra::DiracAlgebra;
use crate::error::Result;
use crate::grid::{SpinorWavePacket, SPINOR};
use crate::krylov::apply_function;
use crate::operators::{build_hamiltonian, build_spin_matrix, build_time_operator, energy_spectrum};
use crate::units::ParticleParams;

/// Mass fraction above which a packet is considered to reach the guard band.
pub const GUARD_MASS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Displaced {
    pub packet: SpinorWavePacket,
    /// Probability in the outer 25% of the position box.
    pub guard_band_mass: f64,
    /// Probability in the outer 25% of the momentum window.
    pub momentum_edge_mass: f64,
    pub warnings: Vec<String>,
}

impl Displaced {
    fn new(packet: SpinorWavePacket) -> Self {
        let guard_band_mass = packet.guard_band_mass();
        let n = packet.grid().n();
        let total: f64 = packet.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        let momentum_edge_mass = packet
            .amplitudes()
            .chunks_exact(SPINOR)
            .enumerate()
            .filter(|(j, _)| *j < n / 8 || *j >= n - n / 8)
            .map(|(_, c)| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / total;
        let mut warnings = Vec::new();
        if guard_band_mass > GUARD_MASS {
            warnings.push(format!(
                "probability {guard_band_mass:.3e} in the position guard band; periodic wrap-around may corrupt the displacement"
            ));
        }
        if momentum_edge_mass > GUARD_MASS {
            warnings.push(format!(
                "probability {momentum_edge_mass:.3e} at the momentum window edge"
            ));
        }
        Self {
            packet,
            guard_band_mass,
            momentum_edge_mass,
            warnings,
        }
    }
}

/// exp(−iδεT̂/ħ) applied to raw amplitudes by a Lanczos exponential action.
fn ut_action(packet: &SpinorWavePacket, params: &ParticleParams, algebra: &DiracAlgebra, delta_eps: f64) -> Result<Vec<C64>> {
    let t = build_time_operator(packet.grid(), params, algebra);
    let theta = delta_eps / params.hbar();
    apply_function(
        |v| t.apply(v),
        packet.amplitudes(),
        |lambda| C64::from_polar(1.0, -theta * lambda),
        1e-13,
        packet.grid().dim().min(1500),
    )
}

/// exp(−iδεT̂/ħ) through a Lanczos exponential action.
pub fn apply_ut(packet: &SpinorWavePacket, params: &ParticleParams, algebra: &DiracAlgebra, delta_eps: f64) -> Result<Displaced> {
    let out = ut_action(packet, params, algebra, delta_eps)?;
    Ok(Displaced::new(SpinorWavePacket::new(packet.grid().clone(), out)?))
}

/// exp(+iδtĤ_D/ħ): evolution backwards by δt.
pub fn apply_uhd(packet: &SpinorWavePacket, params: &ParticleParams, algebra: &DiracAlgebra, delta_t: f64) -> Result<Displaced> {
    let prop = DiracPropagator::new(packet.grid(), params, algebra);
    Ok(Displaced::new(prop.evolve(packet, -delta_t)))
}

/// ⟨cα₃⟩, the velocity operator's expectation.
pub fn group_velocity(packet: &SpinorWavePacket, params: &ParticleParams, algebra: &DiracAlgebra) -> f64 {
    let v = build_spin_matrix(packet.grid(), algebra.alpha[2] * C64::new(params.c(), 0.0), "c a3");
    packet.expectation_of(&v.apply(packet.amplitudes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostMeasurement {
    pub delta_eps: f64,
    pub group_velocity: f64,
    /// −Δ⟨p⟩.
    pub momentum_displacement: f64,
    /// (δε/c²)·v_gp.
    pub expected_displacement: f64,
    pub displacement_rel_error: f64,
    pub energy_change: f64,
    /// E(⟨p⟩ + Δ⟨p⟩) − E(⟨p⟩).
    pub expected_energy_change: f64,
    pub energy_rel_error: f64,
    pub unitarity_defect: f64,
    pub warnings: Vec<String>,
}

/// Applies U_T and compares the momentum and energy shifts with the
/// first-order predictions.
pub fn boost_check(packet: &SpinorWavePacket, params: &ParticleParams, algebra: &DiracAlgebra, delta_eps: f64) -> Result<BoostMeasurement> {
    let h = build_hamiltonian(packet.grid(), params, algebra);
    let v_gp = group_velocity(packet, params, algebra);
    let p_before = packet.mean_momentum();
    let e_before = packet.expectation_of(&h.apply(packet.amplitudes()));

    let unnormalized = ut_action(packet, params, algebra, delta_eps)?;
    // U_T is unitary, so the raw output should already have unit norm.
    let unitarity_defect = (crate::grid::norm_sqr(&unnormalized) * packet.grid().dp() - 1.0).abs();
    let raw = Displaced::new(SpinorWavePacket::new(packet.grid().clone(), unnormalized)?);
    let after = &raw.packet;
    let p_after = after.mean_momentum();
    let e_after = after.expectation_of(&h.apply(after.amplitudes()));

    let momentum_displacement = -(p_after - p_before);
    let expected_displacement = delta_eps / params.c().powi(2) * v_gp;
    let energy_change = e_after - e_before;
    let e_of = |p: f64| energy_spectrum(p, params).magnitude();
    let expected_energy_change = e_of(p_after) - e_of(p_before);
    Ok(BoostMeasurement {
        delta_eps,
        group_velocity: v_gp,
        momentum_displacement,
        expected_displacement,
        displacement_rel_error: ((momentum_displacement - expected_displacement) / expected_displacement).abs(),
        energy_change,
        expected_energy_change,
        energy_rel_error: ((energy_change - expected_energy_change) / expected_energy_change).abs(),
        unitarity_defect,
        warnings: raw.warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationMeasurement {
    pub delta_t: f64,
    pub group_velocity: f64,
    /// −Δ⟨r⟩.
    pub position_displacement: f64,
    /// v_gp·δt.
    pub expected_displacement: f64,
    pub displacement_rel_error: f64,
    /// |⟨ψ(r + v_gp δt)|U_HD ψ⟩| with the rigid shift applied analytically.
    pub translation_overlap: f64,
    pub warnings: Vec<String>,
}

pub fn translate_check(packet: &SpinorWavePacket, params: &ParticleParams, algebra: &DiracAlgebra, delta_t: f64) -> Result<TranslationMeasurement> {
    let v_gp = group_velocity(packet, params, algebra);
    let r_before = packet.mean_position();
    let moved = apply_uhd(packet, params, algebra, delta_t)?;
    let position_displacement = -(moved.packet.mean_position() - r_before);
    let expected_displacement = v_gp * delta_t;

    // ψ(r + d) in momentum space is ψ(p)·e^{ipd/ħ}.
    let g = packet.grid();
    let d = expected_displacement;
    let shifted: Vec<C64> = packet
        .amplitudes()
        .chunks_exact(SPINOR)
        .enumerate()
        .flat_map(|(j, c)| {
            let ph = C64::from_polar(1.0, g.p(j) * d / g.hbar());
            c.iter().map(move |z| z * ph)
        })
        .collect();
    let oracle = SpinorWavePacket::new(g.clone(), shifted)?;
    Ok(TranslationMeasurement {
        delta_t,
        group_velocity: v_gp,
        position_displacement,
        expected_displacement,
        displacement_rel_error: ((position_displacement - expected_displacement) / expected_displacement).abs(),
        translation_overlap: oracle.inner(&moved.packet).norm(),
        warnings: moved.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{diff_norm, norm, MomentumGrid1D};
    use crate::linalg::apply4;
    use crate::operators::{single_branch_packet, time_block, Branch};

    fn setup(n: usize, box_len: f64, p0: f64) -> (MomentumGrid1D, ParticleParams, DiracAlgebra) {
        (
            MomentumGrid1D::with_box(n, box_len, p0, 1.0).unwrap(),
            ParticleParams::natural(),
            DiracAlgebra::standard(),
        )
    }

    #[test]
    fn zero_parameters_are_identity() {
        let (g, params, alg) = setup(256, 400.0, 1.0);
        let pk = single_branch_packet(&g, &params, &alg, 1.0, 0.05, 0.0, Branch::Positive).unwrap();
        let a = apply_ut(&pk, &params, &alg, 0.0).unwrap();
        assert!(diff_norm(a.packet.amplitudes(), pk.amplitudes()) < 1e-13 * norm(pk.amplitudes()));
        let b = apply_uhd(&pk, &params, &alg, 0.0).unwrap();
        assert!(diff_norm(b.packet.amplitudes(), pk.amplitudes()) < 1e-13 * norm(pk.amplitudes()));
    }

    #[test]
    fn krylov_matches_closed_form_exponential() {
        // exp(−iθT₄) = cos(θτ) − i sin(θτ)T₄/τ block by block in position.
        let (g, params, alg) = setup(256, 400.0, 1.0);
        let pk = single_branch_packet(&g, &params, &alg, 1.0, 0.05, 0.0, Branch::Positive).unwrap();
        let de = 2e-3;
        let got = apply_ut(&pk, &params, &alg, de).unwrap();
        let want = g.map_position(pk.amplitudes(), |k, v| {
            let tb = time_block(g.r(k), &params, &alg);
            let tau = (g.r(k).powi(2) + params.tau0.powi(2)).sqrt();
            let (c, s) = ((de * tau).cos(), (de * tau).sin());
            let tv = apply4(&tb, v);
            for i in 0..4 {
                v[i] = v[i] * c - C64::new(0.0, s / tau) * tv[i];
            }
        });
        assert!(diff_norm(got.packet.amplitudes(), &want) < 1e-11 * norm(&want));
    }

    #[test]
    fn boost_follows_first_order_law() {
        // exp(−iδεα₃r̂/c) pushes the two α₃ components apart, costing
        // ~2m₀(δε)²⟨r²β⟩ of energy; first order needs δε·σ_r² ≪ 1.
        let (g, params, alg) = setup(1024, 2048.0, 1.0);
        let pk = single_branch_packet(&g, &params, &alg, 1.0, 0.1, 0.0, Branch::Positive).unwrap();
        let m = boost_check(&pk, &params, &alg, 1e-5).unwrap();
        assert!(m.displacement_rel_error < 0.005, "{m:?}");
        assert!(m.energy_rel_error < 0.01, "{m:?}");
        assert!(m.unitarity_defect < 1e-10);
        assert!(m.warnings.is_empty(), "{:?}", m.warnings);
    }

    #[test]
    fn wide_packets_leave_the_first_order_regime() {
        let (g, params, alg) = setup(1024, 2048.0, 1.0);
        let pk = single_branch_packet(&g, &params, &alg, 1.0, 0.01, 0.0, Branch::Positive).unwrap();
        let m = boost_check(&pk, &params, &alg, 1e-3).unwrap();
        assert!(m.displacement_rel_error < 0.005);
        assert!(m.energy_rel_error > 1.0, "{m:?}");
    }

    #[test]
    fn translation_follows_group_velocity() {
        let (g, params, alg) = setup(1024, 4096.0, 1.0);
        let pk = single_branch_packet(&g, &params, &alg, 1.0, 0.004, 0.0, Branch::Positive).unwrap();
        let m = translate_check(&pk, &params, &alg, 5.0).unwrap();
        assert!(m.displacement_rel_error < 0.005, "{m:?}");
        assert!(m.translation_overlap >= 0.999, "{m:?}");
        assert!((m.group_velocity - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn edge_translation_is_flagged() {
        let (g, params, alg) = setup(256, 200.0, 1.0);
        let pk = single_branch_packet(&g, &params, &alg, 1.0, 0.2, 60.0, Branch::Positive).unwrap();
        let m = translate_check(&pk, &params, &alg, -40.0).unwrap();
        assert!(!m.warnings.is_empty());
    }
}
