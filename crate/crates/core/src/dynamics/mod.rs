//! Free Dirac dynamics on the momentum grid.
//!
//! Ĥ_D is block diagonal in momentum, so evolution is exact: each 4×4 block
//! is diagonalized once and exp(−iH₄(p)t/ħ) applied from its eigenpairs.
//! Everything downstream (Zitterbewegung fits, generator displacements, the
//! Heisenberg equation for T̂) inherits round-off-level accuracy from this.

mod heisenberg;
mod experiment;
mod generators;
mod zbw;

pub use heisenberg::{
    balanced_cube, ehrenfest_check_heisenberg, heisenberg_operators, heisenberg_residual_3d, verify_heisenberg_3d,
    verify_k_conservation, HeisenbergOperators, KOperator, HEISENBERG_3D_MAX_EDGE,
};
pub use experiment::{
    clock_slope_check, ZitterbewegungExperiment, ZitterbewegungOutcome, AMPLITUDE_FLOOR, FREQUENCY_TOL, GROUP_VELOCITY_TOL,
    SLOPE_TOL, SUPPRESSION_TOL,
};
pub use generators::{
    apply_uhd, apply_ut, boost_check, group_velocity, translate_check, BoostMeasurement, Displaced,
    TranslationMeasurement,
};
pub use zbw::{zitterbewegung_analysis, ZitterbewegungFit, MIN_SAMPLES};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::algebra::{DiracAlgebra, Mat4};
use crate::error::{Error, Result};
use crate::grid::{MomentumGrid1D, SpinorWavePacket, SPINOR};
use crate::linalg::{apply4, eigh4};
use crate::operators::{hamiltonian_block, GridOperator};
use crate::table::{fmt_float, Csv};
use crate::units::ParticleParams;

/// Cached per-momentum eigendecompositions of Ĥ_D.
#[derive(Debug, Clone)]
pub struct DiracPropagator {
    grid: MomentumGrid1D,
    hbar: f64,
    blocks: Vec<([f64; 4], Mat4)>,
}

impl DiracPropagator {
    pub fn new(grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra) -> Self {
        let blocks = grid
            .momenta()
            .into_iter()
            .map(|p| eigh4(&hamiltonian_block(p, params, algebra)))
            .collect();
        Self {
            grid: grid.clone(),
            hbar: params.hbar(),
            blocks,
        }
    }

    pub fn grid(&self) -> &MomentumGrid1D {
        &self.grid
    }

    /// exp(−iĤ_D t/ħ) applied to raw amplitudes.
    pub fn propagate(&self, amplitudes: &[C64], t: f64) -> Vec<C64> {
        assert_eq!(amplitudes.len(), self.grid.dim());
        let mut out = vec![C64::new(0.0, 0.0); amplitudes.len()];
        out.par_chunks_exact_mut(SPINOR)
            .zip(amplitudes.par_chunks_exact(SPINOR))
            .zip(self.blocks.par_iter())
            .for_each(|((o, v), (vals, vecs))| {
                let phases = vals.map(|e| C64::from_polar(1.0, -e * t / self.hbar));
                let u = vecs * Mat4::from_diagonal(&nalgebra::Vector4::from(phases)) * vecs.adjoint();
                o.copy_from_slice(&apply4(&u, v));
            });
        out
    }

    pub fn evolve(&self, packet: &SpinorWavePacket, t: f64) -> SpinorWavePacket {
        let amps = self.propagate(packet.amplitudes(), t);
        SpinorWavePacket::new(packet.grid().clone(), amps).expect("unitary evolution keeps the packet valid")
    }
}

/// The packet after a laboratory time `t`.
pub fn evolve(packet: &SpinorWavePacket, params: &ParticleParams, algebra: &DiracAlgebra, t: f64) -> Result<SpinorWavePacket> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("evolution time must be finite, got {t}")));
    }
    Ok(DiracPropagator::new(packet.grid(), params, algebra).evolve(packet, t))
}

/// Sample instants, initial packet and tracked observables.
#[derive(Debug, Clone)]
pub struct EvolutionPlan {
    times: Vec<f64>,
    packet0: SpinorWavePacket,
    observables: Vec<GridOperator>,
}

impl EvolutionPlan {
    pub fn new(times: Vec<f64>, packet0: SpinorWavePacket, observables: Vec<GridOperator>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParameter("evolution plan needs at least one instant".into()));
        }
        if times[0] < 0.0 || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("instants must be finite and start at t >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("instants must be strictly increasing".into()));
        }
        for op in &observables {
            if op.dim() != packet0.grid().dim() {
                return Err(Error::DimensionMismatch {
                    expected: packet0.grid().dim(),
                    got: op.dim(),
                });
            }
        }
        Ok(Self {
            times,
            packet0,
            observables,
        })
    }

    /// `count` equally spaced instants on [0, span].
    pub fn uniform(span: f64, count: usize, packet0: SpinorWavePacket, observables: Vec<GridOperator>) -> Result<Self> {
        if count < 2 || !(span > 0.0) {
            return Err(Error::InvalidParameter("uniform plan needs span > 0 and >= 2 instants".into()));
        }
        let dt = span / (count - 1) as f64;
        Self::new((0..count).map(|k| k as f64 * dt).collect(), packet0, observables)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn packet0(&self) -> &SpinorWavePacket {
        &self.packet0
    }

    pub fn observables(&self) -> &[GridOperator] {
        &self.observables
    }
}

/// Expectation values of several observables over a common set of instants.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub labels: Vec<String>,
    /// values[k][i]: observable k at instant i.
    pub values: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>) -> Self {
        Self {
            t,
            labels: Vec::new(),
            values: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.t.len() {
            return Err(Error::DimensionMismatch {
                expected: self.t.len(),
                got: values.len(),
            });
        }
        self.labels.push(label.into());
        self.values.push(values);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|k| self.values[k].as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec!["t"];
        header.extend(self.labels.iter().map(String::as_str));
        let mut csv = Csv::new(&header);
        for (i, t) in self.t.iter().enumerate() {
            let mut row = vec![fmt_float(*t)];
            row.extend(self.values.iter().map(|v| fmt_float(v[i])));
            csv.row(&row);
        }
        csv.finish()
    }
}

/// ⟨ψ(t)|A|ψ(t)⟩ for every observable in the plan, in the Schrödinger
/// picture. Instants are evaluated in parallel; the output order is fixed.
pub fn expectation_series(plan: &EvolutionPlan, params: &ParticleParams, algebra: &DiracAlgebra) -> Result<TimeSeries> {
    let prop = DiracPropagator::new(plan.packet0.grid(), params, algebra);
    let rows: Vec<Vec<f64>> = plan
        .times
        .par_iter()
        .map(|&t| {
            let pk = prop.evolve(&plan.packet0, t);
            plan.observables
                .iter()
                .map(|op| pk.expectation_of(&op.apply(pk.amplitudes())))
                .collect()
        })
        .collect();
    let mut ts = TimeSeries::new(plan.times.clone());
    for (k, op) in plan.observables.iter().enumerate() {
        let v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite expectation of {}", op.label())));
        }
        ts.push(op.label(), v)?;
    }
    ts.metadata.insert("n".into(), plan.packet0.grid().n().to_string());
    ts.metadata.insert("representation".into(), algebra.representation.clone());
    Ok(ts)
}
