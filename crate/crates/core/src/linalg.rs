//! Dense Hermitian eigendecomposition and small-block helpers.

use faer::{Mat, Side};
use nalgebra::{SymmetricEigen, Vector4};
use num_complex::Complex64 as C64;

use crate::algebra::Mat4;
use crate::error::{Error, Result};

pub type DenseMatrix = Mat<C64>;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: DenseMatrix,
}

pub fn hermitian_eigen(m: &DenseMatrix) -> Result<HermitianEigen> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i].re).collect();
    Ok(HermitianEigen {
        values,
        vectors: evd.U().to_owned(),
    })
}

pub fn hermitian_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

pub fn matvec(m: &DenseMatrix, x: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), x.len());
    let mut y = vec![C64::new(0.0, 0.0); m.nrows()];
    for j in 0..m.ncols() {
        let xj = x[j];
        if xj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = m.col(j);
        for i in 0..m.nrows() {
            y[i] += col[i] * xj;
        }
    }
    y
}

/// Largest |A − A†| entry.
pub fn hermiticity_defect(m: &DenseMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A run of eigenvalues that agree within the clustering radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub value: f64,
    pub start: usize,
    pub len: usize,
}

/// Groups ascending `values` into clusters of neighbours closer than `radius`.
pub fn cluster(values: &[f64], radius: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if v - values[i - 1] <= radius => {
                c.len += 1;
                sum += v;
                c.value = sum / c.len as f64;
            }
            _ => {
                sum = v;
                out.push(Cluster {
                    value: v,
                    start: i,
                    len: 1,
                });
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian 4×4 block, eigenvalues ascending.
pub fn eigh4(m: &Mat4) -> ([f64; 4], Mat4) {
    let eig = SymmetricEigen::new(*m);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.map(|i| eig.eigenvalues[i]);
    let vectors = Mat4::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn apply4(m: &Mat4, v: &[C64]) -> [C64; 4] {
    let x = Vector4::new(v[0], v[1], v[2], v[3]);
    let y = m * x;
    [y[0], y[1], y[2], y[3]]
}
