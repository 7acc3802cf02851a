//! The T̂ eigenbasis as a representation of its own.
//!
//! Coefficients are c(t_ν) = ⟨t_ν|ψ⟩ with the dp-weighted inner product, so
//! Σ|c|² = Σⱼ‖ψⱼ‖²·dp: a normalized packet has unit coefficient norm.

use num_complex::Complex64 as C64;

use super::GridOperator;
use crate::error::{Error, Result};
use crate::grid::{MomentumGrid1D, SpinorWavePacket};
use crate::linalg::{cluster, hermitian_eigen, matvec, Cluster, HermitianEigen};

use super::DENSE_GRID_LIMIT;

#[derive(Debug, Clone)]
pub struct TimeEigenbasis {
    grid: MomentumGrid1D,
    eigen: HermitianEigen,
}

impl TimeEigenbasis {
    /// Diagonalizes the materialized operator (n ≤ 1024).
    pub fn new(grid: &MomentumGrid1D, t_op: &GridOperator) -> Result<Self> {
        if t_op.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: t_op.dim(),
            });
        }
        if grid.n() > DENSE_GRID_LIMIT {
            return Err(Error::TooLarge {
                n: grid.n(),
                limit: DENSE_GRID_LIMIT,
                hint: "; the time eigenbasis needs a dense diagonalization",
            });
        }
        let eigen = hermitian_eigen(&t_op.dense()?)?;
        Ok(Self {
            grid: grid.clone(),
            eigen,
        })
    }

    pub fn grid(&self) -> &MomentumGrid1D {
        &self.grid
    }

    /// Eigenvalues t_ν, ascending.
    pub fn values(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn len(&self) -> usize {
        self.eigen.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigen.values.is_empty()
    }

    /// Eigenvector ν as raw amplitudes (unit Euclidean norm).
    pub fn vector(&self, nu: usize) -> Vec<C64> {
        let col = self.eigen.vectors.col(nu);
        (0..col.nrows()).map(|i| col[i]).collect()
    }

    /// Degenerate groups of eigenvalues, radius 1e-9 × spectral range.
    pub fn clusters(&self) -> Vec<Cluster> {
        let v = &self.eigen.values;
        let range = v[v.len() - 1] - v[0];
        cluster(v, 1e-9 * range)
    }

    pub fn coefficients(&self, amplitudes: &[C64]) -> Result<Vec<C64>> {
        if amplitudes.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: amplitudes.len(),
            });
        }
        let w = self.grid.dp().sqrt();
        let v = &self.eigen.vectors;
        Ok((0..v.ncols())
            .map(|nu| {
                let col = v.col(nu);
                (0..col.nrows()).map(|i| col[i].conj() * amplitudes[i]).sum::<C64>() * w
            })
            .collect())
    }

    pub fn transform(&self, packet: &SpinorWavePacket) -> Result<Vec<C64>> {
        self.coefficients(packet.amplitudes())
    }

    /// Inverse transform back to momentum amplitudes.
    pub fn reconstruct(&self, coefficients: &[C64]) -> Result<Vec<C64>> {
        if coefficients.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coefficients.len(),
            });
        }
        let w = 1.0 / self.grid.dp().sqrt();
        Ok(matvec(&self.eigen.vectors, coefficients).into_iter().map(|z| z * w).collect())
    }

    /// Σ t_ν |c_ν|² / Σ |c_ν|².
    pub fn expectation(&self, coefficients: &[C64]) -> f64 {
        let (num, den) = coefficients
            .iter()
            .zip(&self.eigen.values)
            .fold((0.0, 0.0), |(n, d), (c, t)| (n + t * c.norm_sqr(), d + c.norm_sqr()));
        num / den
    }

    /// |c_ν|² summed within each degenerate cluster.
    pub fn cluster_weights(&self, coefficients: &[C64]) -> Vec<(Cluster, f64)> {
        self.clusters()
            .into_iter()
            .map(|c| {
                let w = coefficients[c.start..c.start + c.len].iter().map(|z| z.norm_sqr()).sum();
                (c, w)
            })
            .collect()
    }
}

/// One-shot coefficient vector of `packet` in the eigenbasis of `t_op`.
pub fn time_representation(packet: &SpinorWavePacket, t_op: &GridOperator) -> Result<Vec<C64>> {
    TimeEigenbasis::new(packet.grid(), t_op)?.transform(packet)
}
