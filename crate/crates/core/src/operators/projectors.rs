//! Sign-branch projectors P± for Ĥ_D and T̂.
//!
//! Both operators are block diagonal in some representation (Ĥ_D in
//! momentum, T̂ in position), so the exact projector is (I ± A/|A|)/2 per
//! 4×4 block. Two independent routes are kept for cross-checking: the dense
//! eigenvectors of the full matrix, and a Krylov sign-function action.

use num_complex::Complex64 as C64;
use std::fmt;

use super::{apply_blocks, build_hamiltonian, build_time_operator, GridOperator, DENSE_GRID_LIMIT};
use crate::algebra::{DiracAlgebra, Mat4};
use crate::error::{Error, Result};
use crate::grid::MomentumGrid1D;
use crate::krylov::apply_function;
use crate::linalg::{apply4, eigh4, hermitian_eigen, DenseMatrix};
use crate::units::ParticleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Energy,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Self::Positive => Self::Negative,
            Self::Negative => Self::Positive,
        }
    }

    /// Report label; negative branches are the antiparticle sector.
    pub fn sector(self) -> &'static str {
        match self {
            Self::Positive => "particle-sector",
            Self::Negative => "antiparticle-sector",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positive => "+",
            Self::Negative => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectorRoute {
    /// Exact 4×4 blocks: momentum blocks for Ĥ_D, position blocks for T̂.
    Blockwise,
    /// Eigenvectors of the materialized operator (n ≤ 1024).
    Dense,
    /// (I ± sign(A))/2 applied through Lanczos, to relative accuracy `tol`.
    Krylov { tol: f64 },
}

/// Projector onto the eigenvalues of sign `branch` of a Hermitian 4×4 block,
/// assembled from its eigendecomposition.
pub fn block_projector(block: &Mat4, branch: Branch) -> Mat4 {
    let (vals, vecs) = eigh4(block);
    let mut p = Mat4::zeros();
    for (k, &v) in vals.iter().enumerate() {
        if v * branch.sign() > 0.0 {
            let col = vecs.column(k);
            p += col * col.adjoint();
        }
    }
    p
}

/// (I ± H(p)/E(p))/2 at a single momentum.
pub fn energy_block_projector(p: f64, params: &ParticleParams, algebra: &DiracAlgebra, branch: Branch) -> Mat4 {
    block_projector(&super::hamiltonian_block(p, params, algebra), branch)
}

pub fn branch_projector(
    grid: &MomentumGrid1D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    kind: OperatorKind,
    branch: Branch,
    route: ProjectorRoute,
) -> Result<GridOperator> {
    let name = match kind {
        OperatorKind::Energy => "H",
        OperatorKind::Time => "T",
    };
    let label = format!("P{branch}[{name}]");
    match route {
        ProjectorRoute::Blockwise => Ok(match kind {
            OperatorKind::Energy => {
                let blocks: Vec<Mat4> = grid
                    .momenta()
                    .into_iter()
                    .map(|p| energy_block_projector(p, params, algebra, branch))
                    .collect();
                GridOperator::new(label, grid.dim(), true, move |x| apply_blocks(&blocks, x))
            }
            OperatorKind::Time => {
                let blocks: Vec<Mat4> = grid
                    .positions()
                    .into_iter()
                    .map(|r| block_projector(&super::time_block(r, params, algebra), branch))
                    .collect();
                let g = grid.clone();
                GridOperator::new(label, grid.dim(), true, move |x| {
                    g.map_position(x, |k, v| {
                        let y = apply4(&blocks[k], v);
                        v.copy_from_slice(&y);
                    })
                })
            }
        }),
        ProjectorRoute::Dense => {
            if grid.n() > DENSE_GRID_LIMIT {
                return Err(Error::TooLarge {
                    n: grid.n(),
                    limit: DENSE_GRID_LIMIT,
                    hint: "; use ProjectorRoute::Krylov (iterative) or ProjectorRoute::Blockwise",
                });
            }
            let op = operator_of(grid, params, algebra, kind);
            let eig = hermitian_eigen(&op.dense()?)?;
            let cols: Vec<usize> = (0..eig.values.len())
                .filter(|&k| eig.values[k] * branch.sign() > 0.0)
                .collect();
            let dim = grid.dim();
            let v = DenseMatrix::from_fn(dim, cols.len(), |i, j| eig.vectors[(i, cols[j])]);
            Ok(GridOperator::new(label, dim, true, move |x| {
                // V (V† x)
                let k = v.ncols();
                let mut c = vec![C64::new(0.0, 0.0); k];
                for (j, cj) in c.iter_mut().enumerate() {
                    let col = v.col(j);
                    *cj = (0..dim).map(|i| col[i].conj() * x[i]).sum();
                }
                crate::linalg::matvec(&v, &c)
            }))
        }
        ProjectorRoute::Krylov { tol } => {
            let op = operator_of(grid, params, algebra, kind);
            let s = branch.sign();
            let dim = grid.dim();
            Ok(GridOperator::new(label, dim, true, move |x| {
                let f = |lambda: f64| C64::new(0.5 * (1.0 + s * lambda.signum()), 0.0);
                apply_function(|v| op.apply(v), x, f, tol, dim.min(2000))
                    .expect("Krylov sign-function action converges on a gapped spectrum")
            }))
        }
    }
}

fn operator_of(grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra, kind: OperatorKind) -> GridOperator {
    match kind {
        OperatorKind::Energy => build_hamiltonian(grid, params, algebra),
        OperatorKind::Time => build_time_operator(grid, params, algebra),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{diff_norm, norm};
    use crate::operators::random_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (MomentumGrid1D, ParticleParams, DiracAlgebra) {
        (
            MomentumGrid1D::with_box(64, 40.0, 0.3, 1.0).unwrap(),
            ParticleParams::natural(),
            DiracAlgebra::standard(),
        )
    }

    #[test]
    fn energy_block_matches_closed_form() {
        let (_, params, alg) = setup();
        for p in [-2.0, 0.0, 0.7] {
            let h = super::super::hamiltonian_block(p, &params, &alg);
            let e = (p * p + 1.0f64).sqrt();
            let want = (Mat4::identity() + h / C64::new(e, 0.0)) / C64::new(2.0, 0.0);
            let got = energy_block_projector(p, &params, &alg, Branch::Positive);
            assert!(crate::algebra::max_abs_diff(&got, &want) < 1e-14);
        }
    }

    #[test]
    fn projectors_resolve_identity_and_are_idempotent() {
        let (g, params, alg) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_vector(&mut rng, g.dim());
        for kind in [OperatorKind::Energy, OperatorKind::Time] {
            for route in [ProjectorRoute::Blockwise, ProjectorRoute::Dense] {
                let pp = branch_projector(&g, &params, &alg, kind, Branch::Positive, route).unwrap();
                let pm = branch_projector(&g, &params, &alg, kind, Branch::Negative, route).unwrap();
                let sum: Vec<C64> = pp.apply(&x).into_iter().zip(pm.apply(&x)).map(|(a, b)| a + b).collect();
                assert!(diff_norm(&sum, &x) < 1e-12 * norm(&x), "{kind:?} {route:?}");
                let px = pp.apply(&x);
                assert!(diff_norm(&pp.apply(&px), &px) < 1e-12 * norm(&x));
            }
        }
    }

    #[test]
    fn routes_agree() {
        let (g, params, alg) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_vector(&mut rng, g.dim());
        let routes = [
            ProjectorRoute::Blockwise,
            ProjectorRoute::Dense,
            ProjectorRoute::Krylov { tol: 1e-12 },
        ];
        for kind in [OperatorKind::Energy, OperatorKind::Time] {
            let outs: Vec<Vec<C64>> = routes
                .iter()
                .map(|&r| branch_projector(&g, &params, &alg, kind, Branch::Negative, r).unwrap().apply(&x))
                .collect();
            assert!(diff_norm(&outs[0], &outs[1]) < 1e-10 * norm(&x), "{kind:?} dense");
            assert!(diff_norm(&outs[0], &outs[2]) < 1e-8 * norm(&x), "{kind:?} krylov");
        }
    }

    #[test]
    fn hamiltonian_does_not_mix_energy_branches() {
        let (g, params, alg) = setup();
        let h = build_hamiltonian(&g, &params, &alg);
        let pp = branch_projector(&g, &params, &alg, OperatorKind::Energy, Branch::Positive, ProjectorRoute::Blockwise).unwrap();
        let pm = branch_projector(&g, &params, &alg, OperatorKind::Energy, Branch::Negative, ProjectorRoute::Blockwise).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_vector(&mut rng, g.dim());
        let y = pp.apply(&h.apply(&pm.apply(&x)));
        assert!(norm(&y) < 1e-10 * norm(&x));
    }

    #[test]
    fn dense_time_projector_refused_on_large_grid() {
        let g = MomentumGrid1D::new(2048, 0.01, 0.0, 1.0).unwrap();
        let err = branch_projector(
            &g,
            &ParticleParams::natural(),
            &DiracAlgebra::standard(),
            OperatorKind::Time,
            Branch::Positive,
            ProjectorRoute::Dense,
        )
        .unwrap_err();
        assert!(err.to_string().contains("Krylov"), "{err}");
    }

    #[test]
    fn branch_labels() {
        assert_eq!(Branch::Negative.sector(), "antiparticle-sector");
        assert_eq!(Branch::Positive.opposite(), Branch::Negative);
    }
}
