//! Property tests over randomly drawn physical parameters.

use proptest::prelude::*;

use twotime::algebra::DiracAlgebra;
use twotime::cli::RunConfig;
use twotime::grid::MomentumGrid1D;
use twotime::operators::{
    compare_with_closed_form, dense_eigenvalues, energy_branch_spectrum, random_smooth_packets, time_branch_spectrum,
    verify_quadratic_constraints,
};
use twotime::units::{ParticleParams, PhysicalConstants};

fn params(m0: f64, c: f64, hbar: f64) -> ParticleParams {
    ParticleParams::new(m0, PhysicalConstants::new(c, hbar).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadratic_constraints_hold_for_any_mass_and_units(
        m0 in 0.05f64..20.0,
        c in 0.5f64..3.0,
        hbar in 0.5f64..2.0,
        p_center in -2.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let p = params(m0, c, hbar);
        let grid = MomentumGrid1D::new(64, 0.1, p_center, hbar).unwrap();
        let packets = random_smooth_packets(&grid, 3, seed);
        let rep = verify_quadratic_constraints(&grid, &p, &DiracAlgebra::standard(), &packets, 1e-10);
        prop_assert!(rep.passed(), "{}", rep.to_json());
    }

    #[test]
    fn gap_product_is_four_h(m0 in 0.05f64..20.0, c in 0.5f64..3.0, hbar in 0.5f64..2.0) {
        let p = params(m0, c, hbar);
        let alg = DiracAlgebra::standard();
        let grid = MomentumGrid1D::new(16, 0.2, 0.0, hbar).unwrap();
        let energies = dense_eigenvalues(&grid, &p, &alg, false).unwrap();
        let times = dense_eigenvalues(&grid, &p, &alg, true).unwrap();
        prop_assert!(compare_with_closed_form(&energies, &energy_branch_spectrum(&grid, &p)).max_relative_error < 1e-10);
        prop_assert!(compare_with_closed_form(&times, &time_branch_spectrum(&grid, &p)).max_relative_error < 1e-8);
        // The innermost eigenvalues sit at ±m0c² and ±τ0 whatever the grid.
        let inner = |v: &[f64]| v.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        let product = 4.0 * inner(&energies) * inner(&times);
        let h = p.constants.h();
        prop_assert!(((product - 4.0 * h) / (4.0 * h)).abs() < 1e-12);
    }

    #[test]
    fn config_echo_round_trips(seed in 0..=i64::MAX as u64, m0 in 0.01f64..100.0, fields in 1usize..20) {
        let mut config = RunConfig { seed, ..RunConfig::default() };
        config.particle.m0 = m0;
        config.constraints.fields = fields;
        let echo = config.to_toml();
        let back = RunConfig::from_toml(&echo).unwrap();
        prop_assert_eq!(&back, &config);
        prop_assert_eq!(back.hash(), config.hash());
    }

    #[test]
    fn seeds_beyond_toml_range_are_refused(seed in i64::MAX as u64 + 1..=u64::MAX) {
        let config = RunConfig { seed, ..RunConfig::default() };
        prop_assert!(config.validate().is_err());
    }
}
