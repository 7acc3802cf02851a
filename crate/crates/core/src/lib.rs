//! A numerical laboratory for the Dirac intrinsic time operator.
//!
//! T̂ = α·r̂/c + βτ₀ sits beside the Dirac Hamiltonian Ĥ_D = cα·p̂ + βm₀c²,
//! with τ₀ = h/(m₀c²). The crate builds both on periodic momentum grids and
//! checks their algebra, spectra and dynamics: Zitterbewegung, and the
//! unitary generators exp(−iδεT̂/ħ) and exp(iδtĤ_D/ħ). It uses the
//! intrinsic time as a conditioning observable in a Page–Wootters clock,
//! and recovers time-dependent evolution from a static system+environment
//! eigenstate.
//!
//! Units are natural by default (ħ = c = m₀ = 1, so τ₀ = 2π).

pub mod algebra;
pub mod cli;
pub mod dynamics;
pub mod emergence;
pub mod error;
pub mod grid;
pub mod krylov;
pub mod linalg;
pub mod operators;
pub mod paw;
pub mod report;
pub mod table;
pub mod units;

pub use algebra::{build_dirac_algebra, verify_clifford, DiracAlgebra};
pub use error::{Error, Result};
pub use grid::{MomentumGrid1D, SpinorWavePacket};
pub use operators::GridOperator;
pub use report::VerificationReport;
pub use units::{ParticleParams, PhysicalConstants};

/// The guide's chapters, compiled so their code blocks run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/algebra.md")]
    mod algebra {}
    #[doc = include_str!("../../../book/src/time-operator.md")]
    mod time_operator {}
    #[doc = include_str!("../../../book/src/heisenberg.md")]
    mod heisenberg {}
    #[doc = include_str!("../../../book/src/zitterbewegung.md")]
    mod zitterbewegung {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/clocks.md")]
    mod clocks {}
    #[doc = include_str!("../../../book/src/emergence.md")]
    mod emergence {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
