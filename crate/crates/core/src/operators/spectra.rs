//! Closed-form branch spectra and their comparison with dense
//! diagonalization.
//!
//! E(p) = √((cp)² + (m₀c²)²) and τ(r) = √((r/c)² + τ₀²), each carried by
//! two spin states on each sign branch.

use crate::error::Result;
use crate::grid::MomentumGrid1D;
use crate::linalg::{cluster, hermitian_eigenvalues};
use crate::table::{fmt_float, Csv};
use crate::units::ParticleParams;

use super::{build_hamiltonian, build_time_operator, GridOperator, DENSE_GRID_LIMIT};
use crate::algebra::DiracAlgebra;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumVariable {
    Momentum,
    Radius,
}

impl SpectrumVariable {
    pub fn column(&self) -> &'static str {
        match self {
            Self::Momentum => "p",
            Self::Radius => "r",
        }
    }
}

/// Eigenvalues at a single grid value, ascending: {−x, −x, +x, +x}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEntry {
    pub value: f64,
    pub eigenvalues: [f64; 4],
}

impl BranchEntry {
    fn symmetric(value: f64, x: f64) -> Self {
        Self {
            value,
            eigenvalues: [-x, -x, x, x],
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.eigenvalues[3]
    }
}

/// {±E(p)} with E(p) = √((cp)² + (m₀c²)²).
pub fn energy_spectrum(p: f64, params: &ParticleParams) -> BranchEntry {
    let cp = params.c() * p;
    BranchEntry::symmetric(p, cp.hypot(params.rest_energy()))
}

/// {±τ(r)} with τ(r) = √((r/c)² + τ₀²).
pub fn time_spectrum(r: f64, params: &ParticleParams) -> BranchEntry {
    BranchEntry::symmetric(r, (r / params.c()).hypot(params.tau0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSpectrum {
    pub variable: SpectrumVariable,
    pub entries: Vec<BranchEntry>,
    /// 2m₀c² for energy, 2τ₀ for time.
    pub gap: f64,
}

pub fn energy_branch_spectrum(grid: &MomentumGrid1D, params: &ParticleParams) -> BranchSpectrum {
    BranchSpectrum {
        variable: SpectrumVariable::Momentum,
        entries: grid.momenta().into_iter().map(|p| energy_spectrum(p, params)).collect(),
        gap: params.energy_gap(),
    }
}

/// Entries in ascending r (the grid itself stores positions in FFT order).
pub fn time_branch_spectrum(grid: &MomentumGrid1D, params: &ParticleParams) -> BranchSpectrum {
    let mut rs = grid.positions();
    rs.sort_by(f64::total_cmp);
    BranchSpectrum {
        variable: SpectrumVariable::Radius,
        entries: rs.into_iter().map(|r| time_spectrum(r, params)).collect(),
        gap: params.time_gap(),
    }
}

impl BranchSpectrum {
    /// Every eigenvalue on the grid, sorted ascending.
    pub fn multiset(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().flat_map(|e| e.eigenvalues).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Smallest |eigenvalue| over the grid; never below gap/2.
    pub fn min_magnitude(&self) -> f64 {
        self.entries.iter().map(|e| e.magnitude()).fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&[self.variable.column(), "eig1", "eig2", "eig3", "eig4"]);
        for e in &self.entries {
            let mut row = vec![fmt_float(e.value)];
            row.extend(e.eigenvalues.iter().map(|&x| fmt_float(x)));
            csv.row(&row);
        }
        csv.finish()
    }
}

/// Outcome of matching a computed spectrum against the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison {
    pub max_relative_error: f64,
    /// Cluster multiplicities of the computed spectrum, ascending by value.
    pub multiplicities: Vec<usize>,
    /// True iff the computed clusters have the same multiplicities as the
    /// closed-form multiset: two spin states for every grid value that maps
    /// to the cluster's eigenvalue.
    pub degeneracy_matches: bool,
    /// True iff every cluster has even multiplicity of at least two.
    pub paired: bool,
}

/// Compares ascending `computed` eigenvalues with the closed-form spectrum.
/// Clusters use radius 1e-9 × (spectral range).
pub fn compare_with_closed_form(computed: &[f64], spectrum: &BranchSpectrum) -> SpectrumComparison {
    let want = spectrum.multiset();
    assert_eq!(computed.len(), want.len(), "spectrum sizes");
    let max_relative_error = computed
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max);
    let range = want[want.len() - 1] - want[0];
    let radius = 1e-9 * range;
    let got_c = cluster(computed, radius);
    let want_c = cluster(&want, radius);
    let multiplicities: Vec<usize> = got_c.iter().map(|c| c.len).collect();
    let degeneracy_matches = multiplicities == want_c.iter().map(|c| c.len).collect::<Vec<_>>();
    let paired = multiplicities.iter().all(|&m| m >= 2 && m % 2 == 0);
    SpectrumComparison {
        max_relative_error,
        multiplicities,
        degeneracy_matches,
        paired,
    }
}

/// Dense eigenvalues of Ĥ_D (`time = false`) or T̂ (`time = true`).
pub fn dense_eigenvalues(
    grid: &MomentumGrid1D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    time: bool,
) -> Result<Vec<f64>> {
    if grid.n() > DENSE_GRID_LIMIT {
        return Err(Error::TooLarge {
            n: grid.n(),
            limit: DENSE_GRID_LIMIT,
            hint: "",
        });
    }
    let op = if time {
        build_time_operator(grid, params, algebra)
    } else {
        build_hamiltonian(grid, params, algebra)
    };
    dense_eigenvalues_of(&op)
}

/// Ascending eigenvalues of any operator small enough to materialize.
pub fn dense_eigenvalues_of(op: &GridOperator) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&op.dense()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn energy_at_rest() {
        let e = energy_spectrum(0.0, &ParticleParams::natural());
        assert_eq!(e.eigenvalues, [-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn ultrarelativistic_asymptote() {
        let params = ParticleParams::natural();
        // c|p|/E > 0.99 once |p| > 0.99/√(1 − 0.99²) ≈ 7.018 m₀c.
        for p in [7.02, -7.02, 20.0, 1e3] {
            let e = energy_spectrum(p, &params).magnitude();
            assert!((e - p.abs()).abs() / e < 0.01);
        }
        let e = energy_spectrum(7.0, &params).magnitude();
        assert!((e - 7.0).abs() / e > 0.01);
    }

    #[test]
    fn time_at_origin_is_two_pi() {
        let t = time_spectrum(0.0, &ParticleParams::natural());
        assert!((t.magnitude() - 2.0 * PI).abs() < 1e-15);
        assert_eq!(t.eigenvalues[0], -t.eigenvalues[3]);
    }

    #[test]
    fn time_spectrum_is_even() {
        let params = ParticleParams::natural();
        for r in [0.3, 4.0, 170.0] {
            assert_eq!(time_spectrum(r, &params).eigenvalues, time_spectrum(-r, &params).eigenvalues);
        }
    }

    #[test]
    fn gaps_bound_every_grid_value() {
        let params = ParticleParams::new(0.1, crate::units::PhysicalConstants::NATURAL).unwrap();
        let g = MomentumGrid1D::new(64, 0.05, 0.3, 1.0).unwrap();
        let e = energy_branch_spectrum(&g, &params);
        let t = time_branch_spectrum(&g, &params);
        assert!(e.min_magnitude() >= e.gap / 2.0);
        assert!(t.min_magnitude() >= t.gap / 2.0);
        assert_eq!(t.min_magnitude(), params.tau0);
    }

    #[test]
    fn csv_has_five_columns() {
        let g = MomentumGrid1D::new(16, 0.5, 0.0, 1.0).unwrap();
        let csv = time_branch_spectrum(&g, &ParticleParams::natural()).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,eig1,eig2,eig3,eig4");
        assert_eq!(lines.len(), 17);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
    }

    #[test]
    fn mirror_grid_merges_clusters_but_matches_closed_form() {
        let g = MomentumGrid1D::new(32, 0.2, 0.0, 1.0).unwrap();
        let params = ParticleParams::natural();
        let alg = DiracAlgebra::standard();
        let eig = dense_eigenvalues(&g, &params, &alg, true).unwrap();
        let cmp = compare_with_closed_form(&eig, &time_branch_spectrum(&g, &params));
        assert!(cmp.max_relative_error < 1e-8);
        assert!(cmp.degeneracy_matches && cmp.paired);
        // r = 0 and the unpaired −L/2 carry multiplicity 2, the rest 4.
        assert_eq!(cmp.multiplicities.iter().filter(|&&m| m == 2).count(), 4);
    }

    #[test]
    fn shifted_window_has_exact_double_degeneracy() {
        // An off-centre momentum window has no ±p pairs, so every energy
        // level is exactly doubly degenerate.
        let g = MomentumGrid1D::new(32, 0.1, 0.77, 1.0).unwrap();
        let params = ParticleParams::natural();
        let eig = dense_eigenvalues(&g, &params, &DiracAlgebra::standard(), false).unwrap();
        let cmp = compare_with_closed_form(&eig, &energy_branch_spectrum(&g, &params));
        assert!(cmp.max_relative_error < 1e-10);
        assert!(cmp.multiplicities.iter().all(|&m| m == 2));
    }
}
