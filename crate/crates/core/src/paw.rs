//! Page–Wootters conditional probabilities.
//!
//! A static state of clock ⊗ system that satisfies the constraint
//! (Ĥ_clock ⊗ I + I ⊗ Ĥ_system)|Ψ⟩ = 0 carries the system's whole history;
//! evolution reappears as the conditional probability
//!
//!   P(B | C) = ⟨Ψ|Ĉ B̂ Ĉ|Ψ⟩ / ⟨Ψ|Ĉ|Ψ⟩
//!
//! of a system projector B̂ given a clock projector Ĉ. The ideal clock is a
//! particle on a periodic line with Ĥ_clock = c·p̂, so that its position
//! advances uniformly. The second half of the module uses the intrinsic
//! time T̂ itself as the conditioning observable for a free Dirac packet,
//! and checks T̂ against the requirements a clock observable must meet.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

use crate::algebra::DiracAlgebra;
use crate::dynamics::{clock_slope_check, SLOPE_TOL};
use crate::error::{Error, Result};
use crate::grid::{dot, norm, norm_sqr, MomentumGrid1D, SpinorWavePacket};
use crate::linalg::cluster;
use crate::operators::{
    balanced_width, build_hamiltonian, build_spin_matrix, build_time_operator, dense_eigenvalues_of, random_smooth_packets,
    random_vector, single_branch_packet, Branch, GridOperator, TimeEigenbasis, DENSE_GRID_LIMIT,
};
use crate::report::VerificationReport;
use crate::table::{fmt_float, Csv};
use crate::units::{ParticleParams, PhysicalConstants};

pub const MIN_CLOCK_POINTS: usize = 128;
pub const MAX_SYSTEM_DIM: usize = 16;
/// ‖Ĥ_total Ψ‖ allowed per unit ‖Ψ‖ and unit spectral scale.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Conditioning weight below which P(B|C) is refused, per unit ‖Ψ‖².
pub const CONDITION_EPS: f64 = 1e-12;
const PROJECTOR_TOL: f64 = 1e-12;
const COMPLETENESS_TOL: f64 = 1e-10;
const COMMUTATION_TOL: f64 = 1e-10;

/// A static clock ⊗ system state solving the total constraint on a grid.
///
/// Amplitudes are clock-major: index k·d + s for clock reading k and
/// system level s.
#[derive(Debug, Clone)]
pub struct PawModel {
    n_c: usize,
    span: f64,
    constants: PhysicalConstants,
    h_system: DMatrix<C64>,
    psi: Vec<C64>,
}

impl PawModel {
    pub fn clock_dim(&self) -> usize {
        self.n_c
    }

    pub fn system_dim(&self) -> usize {
        self.h_system.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_c * self.system_dim()
    }

    /// Laboratory time covered by one turn of the periodic clock.
    pub fn span(&self) -> f64 {
        self.span
    }

    /// The time t_k = k·span/n_c read off clock position k.
    pub fn clock_time(&self, k: usize) -> f64 {
        k as f64 * self.span / self.n_c as f64
    }

    pub fn h_system(&self) -> &DMatrix<C64> {
        &self.h_system
    }

    pub fn psi(&self) -> &[C64] {
        &self.psi
    }

    /// The same model with Ψ multiplied by `z`; P(B|C) must not notice.
    pub fn rescaled(&self, z: C64) -> Self {
        let mut out = self.clone();
        out.psi.iter_mut().for_each(|a| *a *= z);
        out
    }

    /// Ĥ_clock = c·p̂ on the clock line, spectral derivative per system level.
    pub fn apply_clock_hamiltonian(&self, x: &[C64]) -> Vec<C64> {
        let (n, d) = (self.n_c, self.system_dim());
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let hbar = self.constants.hbar;
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for s in 0..d {
            for k in 0..n {
                col[k] = x[k * d + s];
            }
            fwd.process(&mut col);
            for (m, z) in col.iter_mut().enumerate() {
                let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                // c·p_m with p_m = 2πħm/(c·span).
                *z *= 2.0 * PI * hbar * signed / self.span / n as f64;
            }
            inv.process(&mut col);
            for k in 0..n {
                out[k * d + s] = col[k];
            }
        }
        out
    }

    pub fn apply_total(&self, x: &[C64]) -> Vec<C64> {
        let mut out = self.apply_clock_hamiltonian(x);
        let d = self.system_dim();
        for (o, v) in out.chunks_exact_mut(d).zip(x.chunks_exact(d)) {
            let hv = &self.h_system * DVector::from_column_slice(v);
            o.iter_mut().zip(hv.iter()).for_each(|(a, b)| *a += b);
        }
        out
    }

    /// max(spectral radius of Ĥ_system, one clock quantum 2πħ/span).
    fn spectral_scale(&self) -> f64 {
        let radius = self
            .h_system
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        radius.max(2.0 * PI * self.constants.hbar / self.span)
    }

    /// ‖Ĥ_total Ψ‖ / (‖Ψ‖ · spectral scale).
    pub fn constraint_residual(&self) -> f64 {
        norm(&self.apply_total(&self.psi)) / (norm(&self.psi) * self.spectral_scale())
    }
}

/// The discretized history state Σ_k |t_k⟩ ⊗ e^{−iĤ_system t_k/ħ}|ψ₀⟩ on an
/// ideal clock of `n_c` points covering `span`.
///
/// It solves the constraint exactly only when every system energy E
/// satisfies E·span/(2πħ) ∈ ℤ with |E·span/(2πħ)| < n_c/2, i.e. when the
/// system motion is periodic on the clock circle and resolved by its grid;
/// otherwise the construction is refused.
pub fn build_ideal_clock_model(
    n_c: usize,
    h_system: DMatrix<C64>,
    psi0: &[C64],
    span: f64,
    constants: PhysicalConstants,
) -> Result<PawModel> {
    if n_c < MIN_CLOCK_POINTS || !n_c.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "clock needs a power-of-two number of points >= {MIN_CLOCK_POINTS}, got {n_c}"
        )));
    }
    let d = h_system.nrows();
    if d == 0 || d > MAX_SYSTEM_DIM || h_system.ncols() != d {
        return Err(Error::InvalidParameter(format!(
            "system Hamiltonian must be square with 1..={MAX_SYSTEM_DIM} levels, got {}x{}",
            h_system.nrows(),
            h_system.ncols()
        )));
    }
    if (&h_system - h_system.adjoint()).camax() > PROJECTOR_TOL * h_system.camax().max(1.0) {
        return Err(Error::InvalidParameter("system Hamiltonian is not Hermitian".into()));
    }
    if psi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: psi0.len() });
    }
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidParameter(format!("clock span must be positive, got {span}")));
    }

    let eig = h_system.clone().symmetric_eigen();
    let psi0 = DVector::from_column_slice(psi0);
    let coef = eig.eigenvectors.adjoint() * &psi0;
    let hbar = constants.hbar;
    let mut psi = Vec::with_capacity(n_c * d);
    for k in 0..n_c {
        let t = k as f64 * span / n_c as f64;
        let phased = DVector::from_iterator(
            d,
            coef.iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, e)| c * C64::from_polar(1.0, -e * t / hbar)),
        );
        psi.extend((&eig.eigenvectors * phased).iter());
    }
    let scale = 1.0 / norm(&psi);
    psi.iter_mut().for_each(|z| *z *= scale);

    let model = PawModel {
        n_c,
        span,
        constants,
        h_system,
        psi,
    };
    let residual = model.constraint_residual();
    if residual > CONSTRAINT_TOL {
        return Err(Error::Constraint {
            residual,
            tolerance: CONSTRAINT_TOL,
        });
    }
    Ok(model)
}

/// The qubit Ĥ = (ħω/2)σ_x.
pub fn rabi_hamiltonian(omega: f64, hbar: f64) -> DMatrix<C64> {
    let a = C64::new(0.5 * hbar * omega, 0.0);
    DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), a, a, C64::new(0.0, 0.0)])
}

/// Clock span 4π·cycles/ω: the qubit energies ±ħω/2 then sit on the clock's
/// momentum lattice, and the history state closes on itself.
pub fn rabi_span(omega: f64, cycles: usize) -> f64 {
    4.0 * PI * cycles as f64 / omega
}

/// Ideal clock driving a qubit from |0⟩ under (ħω/2)σ_x.
pub fn build_rabi_clock(n_c: usize, omega: f64, cycles: usize, constants: PhysicalConstants) -> Result<PawModel> {
    let psi0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    build_ideal_clock_model(n_c, rabi_hamiltonian(omega, constants.hbar), &psi0, rabi_span(omega, cycles), constants)
}

/// The closed-form Rabi answer P(|1⟩ at t) = sin²(ωt/2).
pub fn rabi_oracle(omega: f64, t: f64) -> f64 {
    (0.5 * omega * t).sin().powi(2)
}

/// One tensor factor of a projector.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    Identity,
    /// A diagonal of zeros and ones.
    Diagonal(Vec<f64>),
    Dense(DMatrix<C64>),
}

impl Factor {
    fn validate(&self, dim: usize, side: &str) -> Result<()> {
        match self {
            Factor::Identity => Ok(()),
            Factor::Diagonal(w) => {
                if w.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: w.len() });
                }
                if w.iter().any(|&x| x.abs() > PROJECTOR_TOL && (x - 1.0).abs() > PROJECTOR_TOL) {
                    return Err(Error::InvalidParameter(format!("{side} diagonal is not a projector")));
                }
                Ok(())
            }
            Factor::Dense(m) => {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
                }
                let herm = (m - m.adjoint()).camax();
                let idem = (m * m - m).camax();
                if herm > PROJECTOR_TOL || idem > PROJECTOR_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "{side} factor is not a projector (P - P^dag: {herm:e}, P^2 - P: {idem:e})"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Ĉ ⊗ B̂ on the joint clock ⊗ system space.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub label: String,
    pub clock: Factor,
    pub system: Factor,
}

impl Projector {
    pub fn new(label: impl Into<String>, clock: Factor, system: Factor) -> Self {
        Self {
            label: label.into(),
            clock,
            system,
        }
    }

    pub fn identity() -> Self {
        Self::new("I", Factor::Identity, Factor::Identity)
    }

    /// The zero projector (on the clock factor, which is never empty).
    pub fn zero(model: &PawModel) -> Self {
        Self::new("0", Factor::Diagonal(vec![0.0; model.clock_dim()]), Factor::Identity)
    }

    /// |t_k⟩⟨t_k| ⊗ I.
    pub fn clock_reading(model: &PawModel, k: usize) -> Self {
        let mut w = vec![0.0; model.clock_dim()];
        w[k] = 1.0;
        Self::new(format!("clock={}", fmt_float(model.clock_time(k))), Factor::Diagonal(w), Factor::Identity)
    }

    /// Ĉ₀ = |φ₀⟩⟨φ₀| ⊗ I for a clock wave packet φ₀ (normalized here).
    pub fn clock_packet(label: impl Into<String>, phi: &[C64]) -> Self {
        let n = norm(phi);
        let v = DVector::from_iterator(phi.len(), phi.iter().map(|z| z / n));
        Self::new(label, Factor::Dense(&v * v.adjoint()), Factor::Identity)
    }

    /// I ⊗ B̂.
    pub fn system(label: impl Into<String>, b: DMatrix<C64>) -> Self {
        Self::new(label, Factor::Identity, Factor::Dense(b))
    }

    /// I ⊗ |s⟩⟨s|.
    pub fn system_level(model: &PawModel, s: usize) -> Self {
        let mut w = vec![0.0; model.system_dim()];
        w[s] = 1.0;
        Self::new(format!("|{s}>"), Factor::Identity, Factor::Diagonal(w))
    }

    pub fn validate(&self, model: &PawModel) -> Result<()> {
        self.clock.validate(model.clock_dim(), "clock")?;
        self.system.validate(model.system_dim(), "system")
    }

    pub fn apply(&self, model: &PawModel, x: &[C64]) -> Vec<C64> {
        let (n, d) = (model.clock_dim(), model.system_dim());
        let mut v = x.to_vec();
        match &self.clock {
            Factor::Identity => {}
            Factor::Diagonal(w) => v.chunks_exact_mut(d).zip(w).for_each(|(c, &wk)| c.iter_mut().for_each(|z| *z *= wk)),
            Factor::Dense(a) => {
                // Rows of the n×d block are clock readings.
                let block = DMatrix::from_row_slice(n, d, &v);
                let out = a * block;
                v = out.transpose().as_slice().to_vec();
            }
        }
        match &self.system {
            Factor::Identity => {}
            Factor::Diagonal(w) => v.chunks_exact_mut(d).for_each(|c| c.iter_mut().zip(w).for_each(|(z, &ws)| *z *= ws)),
            Factor::Dense(b) => v.chunks_exact_mut(d).for_each(|c| {
                let out = b * DVector::from_column_slice(c);
                c.copy_from_slice(out.as_slice());
            }),
        }
        v
    }
}

fn seeded_vectors(dim: usize, count: usize) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..count).map(|_| random_vector(&mut rng, dim)).collect()
}

/// max ‖(PQ − QP)v‖/‖v‖ over seeded random vectors.
pub fn projector_commutator(model: &PawModel, p: &Projector, q: &Projector) -> f64 {
    seeded_vectors(model.dim(), 3)
        .iter()
        .map(|v| {
            let pq = p.apply(model, &q.apply(model, v));
            let qp = q.apply(model, &p.apply(model, v));
            crate::grid::diff_norm(&pq, &qp) / norm(v)
        })
        .fold(0.0, f64::max)
}

/// P(B | C) = ⟨Ψ|ĈB̂Ĉ|Ψ⟩ / ⟨Ψ|Ĉ|Ψ⟩.
pub fn conditional_probability(model: &PawModel, b: &Projector, c: &Projector) -> Result<f64> {
    b.validate(model)?;
    c.validate(model)?;
    let comm = projector_commutator(model, b, c);
    if comm > COMMUTATION_TOL {
        return Err(Error::NonCommuting(b.label.clone(), c.label.clone(), comm));
    }
    let psi = model.psi();
    let c_psi = c.apply(model, psi);
    let weight = dot(psi, &c_psi).re;
    let threshold = CONDITION_EPS * norm_sqr(psi);
    if weight <= threshold {
        return Err(Error::NearNullCondition { weight, threshold });
    }
    Ok(dot(&c_psi, &b.apply(model, &c_psi)).re / weight)
}

/// A complete set of projectors on one side.
#[derive(Debug, Clone)]
pub struct ProjectorFamily {
    pub label: String,
    pub members: Vec<Projector>,
}

impl ProjectorFamily {
    /// Checks every member and Σ P = I.
    pub fn new(label: impl Into<String>, members: Vec<Projector>, model: &PawModel) -> Result<Self> {
        for m in &members {
            m.validate(model)?;
        }
        for v in seeded_vectors(model.dim(), 2) {
            let mut sum = vec![C64::new(0.0, 0.0); v.len()];
            for m in &members {
                sum.iter_mut().zip(m.apply(model, &v)).for_each(|(a, b)| *a += b);
            }
            let defect = crate::grid::diff_norm(&sum, &v) / norm(&v);
            if defect > COMPLETENESS_TOL {
                return Err(Error::InvalidParameter(format!("projector family is incomplete (defect {defect:e})")));
            }
        }
        Ok(Self {
            label: label.into(),
            members,
        })
    }

    /// Every clock reading |t_k⟩⟨t_k| ⊗ I.
    pub fn clock_readings(model: &PawModel) -> Self {
        let members = (0..model.clock_dim()).map(|k| Projector::clock_reading(model, k)).collect();
        Self::new("clock readings", members, model).expect("clock readings resolve the identity")
    }

    /// The system's computational basis I ⊗ |s⟩⟨s|.
    pub fn system_levels(model: &PawModel) -> Self {
        let members = (0..model.system_dim()).map(|s| Projector::system_level(model, s)).collect();
        Self::new("system levels", members, model).expect("basis projectors resolve the identity")
    }

    /// max over members of ‖[P, Ĥ_total]v‖/(‖v‖·spectral scale). A clock
    /// family must not commute with the constraint, or it would be a
    /// constant of motion and could not tell time.
    pub fn total_commutator(&self, model: &PawModel) -> f64 {
        let scale = model.spectral_scale();
        let vs = seeded_vectors(model.dim(), 2);
        self.members
            .iter()
            .flat_map(|p| {
                vs.iter().map(move |v| {
                    let ph = p.apply(model, &model.apply_total(v));
                    let hp = model.apply_total(&p.apply(model, v));
                    crate::grid::diff_norm(&ph, &hp) / (norm(v) * scale)
                })
            })
            .fold(0.0, f64::max)
    }
}

/// P(B_b | C) for every member of `family`.
pub fn conditional_distribution(model: &PawModel, family: &ProjectorFamily, c: &Projector) -> Result<Vec<f64>> {
    family.members.iter().map(|b| conditional_probability(model, b, c)).collect()
}

/// (t_k, P(B | clock = t_k)) at the given clock readings, in parallel.
pub fn clock_conditioned_series(model: &PawModel, b: &Projector, readings: &[usize]) -> Result<Vec<(f64, f64)>> {
    readings
        .par_iter()
        .map(|&k| Ok((model.clock_time(k), conditional_probability(model, b, &Projector::clock_reading(model, k))?)))
        .collect()
}

/// `count` evenly spaced clock readings.
pub fn even_readings(model: &PawModel, count: usize) -> Vec<usize> {
    let n = model.clock_dim();
    (0..count).map(|j| j * n / count).collect()
}

/// Max |P(|1⟩ | t_k) − sin²(ωt_k/2)| over `readings` evenly spaced clock readings.
pub fn rabi_oracle_error(model: &PawModel, omega: f64, readings: usize) -> Result<f64> {
    let b = Projector::system_level(model, 1);
    let series = clock_conditioned_series(model, &b, &even_readings(model, readings))?;
    Ok(series.iter().map(|(t, p)| (p - rabi_oracle(omega, *t)).abs()).fold(0.0, f64::max))
}

/// Complete family of commuting projectors on the spinor grid.
#[derive(Debug, Clone)]
pub struct GridProjectorFamily {
    pub label: String,
    pub members: Vec<(String, GridOperator)>,
}

impl GridProjectorFamily {
    pub fn new(label: impl Into<String>, members: Vec<(String, GridOperator)>) -> Result<Self> {
        let dim = members.first().map(|(_, p)| p.dim()).ok_or_else(|| Error::InvalidParameter("empty projector family".into()))?;
        let vs = seeded_vectors(dim, 2);
        for (name, p) in &members {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            let herm = p.hermiticity_residual(2, 7);
            let idem = vs
                .iter()
                .map(|v| {
                    let pv = p.apply(v);
                    crate::grid::diff_norm(&p.apply(&pv), &pv) / norm(v)
                })
                .fold(0.0, f64::max);
            if herm > PROJECTOR_TOL || idem > PROJECTOR_TOL {
                return Err(Error::InvalidParameter(format!("`{name}` is not a projector")));
            }
        }
        for v in &vs {
            let mut sum = vec![C64::new(0.0, 0.0); dim];
            for (_, p) in &members {
                sum.iter_mut().zip(p.apply(v)).for_each(|(a, b)| *a += b);
            }
            let defect = crate::grid::diff_norm(&sum, v) / norm(v);
            if defect > COMPLETENESS_TOL {
                return Err(Error::InvalidParameter(format!("projector family is incomplete (defect {defect:e})")));
            }
        }
        Ok(Self {
            label: label.into(),
            members,
        })
    }

    /// (I ± Σ₃)/2: spin along the axis of motion.
    pub fn spin(grid: &MomentumGrid1D, algebra: &DiracAlgebra) -> Self {
        let id = crate::algebra::Mat4::identity();
        let s3 = algebra.sigma(2);
        let half = C64::new(0.5, 0.0);
        let members = vec![
            ("spin-up".to_string(), build_spin_matrix(grid, (id + s3) * half, "spin-up")),
            ("spin-down".to_string(), build_spin_matrix(grid, (id - s3) * half, "spin-down")),
        ];
        Self::new("spin", members).expect("(I ± Σ3)/2 is a complete projector pair")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointEntry {
    pub t_nu: f64,
    pub b_label: String,
    pub probability: f64,
}

/// P{t_ν, b} over the degenerate T̂ eigenvalues and a commuting family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    pub entries: Vec<JointEntry>,
    /// Σ before normalization (‖ψ‖² in the dp-weighted norm).
    pub raw_total: f64,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// Σ t_ν P{t_ν, b}.
    pub fn mean_time(&self) -> f64 {
        self.entries.iter().map(|e| e.t_nu * e.probability).sum()
    }

    pub fn probability(&self, t_nu: f64, b_label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.t_nu == t_nu && e.b_label == b_label)
            .map(|e| e.probability)
    }

    pub fn marginal(&self, b_label: &str) -> f64 {
        self.entries.iter().filter(|e| e.b_label == b_label).map(|e| e.probability).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&["t_nu", "b_label", "probability"]);
        for e in &self.entries {
            csv.row(&[fmt_float(e.t_nu), e.b_label.clone(), fmt_float(e.probability)]);
        }
        csv.finish()
    }
}

/// Expands `packet` over the joint resolution (T̂ eigenspaces) × (B family)
/// and returns the normalized probabilities P{t_ν, b}. Each member of the
/// family must commute with T̂, so that B̂_b Π_ν is again a projector.
pub fn condition_on_intrinsic_time(
    packet: &SpinorWavePacket,
    t_op: &GridOperator,
    family: &GridProjectorFamily,
) -> Result<JointDistribution> {
    let basis = TimeEigenbasis::new(packet.grid(), t_op)?;
    let scale = basis.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (name, b) in &family.members {
        let comm = b.commutation_residual(t_op, 3, 11) / scale;
        if comm > COMMUTATION_TOL {
            return Err(Error::NonCommuting(name.clone(), t_op.label().to_string(), comm));
        }
    }
    let coef = basis.transform(packet)?;
    let dp = packet.grid().dp();
    let dim = packet.grid().dim();
    let rows: Vec<Vec<(f64, f64)>> = basis
        .clusters()
        .par_iter()
        .map(|cl| {
            // Π_ν ψ in raw amplitudes, then ‖B̂_b Π_ν ψ‖² per member.
            let mut proj = vec![C64::new(0.0, 0.0); dim];
            for nu in cl.start..cl.start + cl.len {
                let c = coef[nu] / dp.sqrt();
                proj.iter_mut().zip(basis.vector(nu)).for_each(|(a, v)| *a += c * v);
            }
            family
                .members
                .iter()
                .map(|(_, b)| (cl.value, norm_sqr(&b.apply(&proj)) * dp))
                .collect()
        })
        .collect();
    let raw_total: f64 = rows.iter().flatten().map(|(_, w)| w).sum();
    let entries = rows
        .into_iter()
        .flat_map(|row| {
            row.into_iter().zip(&family.members).map(|((t, w), (name, _))| JointEntry {
                t_nu: t,
                b_label: name.clone(),
                probability: w / raw_total,
            })
        })
        .collect();
    Ok(JointDistribution { entries, raw_total })
}

/// The observable put forward as a clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClockCandidate {
    /// T̂ = α·r̂/c + βτ₀.
    IntrinsicTime,
    /// τ₀Ĥ_D/(m₀c²): has time units but commutes with the Hamiltonian.
    ScaledEnergy,
    /// βτ₀: a two-point spectrum.
    RestTime,
}

impl ClockCandidate {
    pub fn build(self, grid: &MomentumGrid1D, params: &ParticleParams, algebra: &DiracAlgebra) -> GridOperator {
        match self {
            Self::IntrinsicTime => build_time_operator(grid, params, algebra),
            Self::ScaledEnergy => build_hamiltonian(grid, params, algebra)
                .scaled(C64::new(params.tau0 / params.rest_energy(), 0.0))
                .with_label("tau0 H/(m0 c^2)")
                .assume_hermitian(),
            Self::RestTime => build_spin_matrix(grid, algebra.beta * C64::new(params.tau0, 0.0), "b tau0"),
        }
    }
}

/// Per-branch spectral shape of a clock candidate on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchShape {
    /// Fewest distinct eigenvalues in either sign branch.
    pub distinct: usize,
    /// Largest cluster multiplicity.
    pub max_multiplicity: usize,
    /// Largest gap between neighbouring distinct values within a branch
    /// (infinite when a branch has a single value).
    pub max_gap: f64,
}

fn branch_shape(values: &[f64]) -> BranchShape {
    let range = values[values.len() - 1] - values[0];
    let clusters = cluster(values, 1e-9 * range.max(f64::MIN_POSITIVE));
    let max_multiplicity = clusters.iter().map(|c| c.len).max().unwrap_or(0);
    let mut distinct = usize::MAX;
    let mut max_gap: f64 = 0.0;
    for sign in [-1.0, 1.0] {
        let branch: Vec<f64> = clusters.iter().map(|c| c.value).filter(|v| v * sign > 0.0).collect();
        distinct = distinct.min(branch.len());
        if branch.len() < 2 {
            max_gap = f64::INFINITY;
        }
        for w in branch.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
    }
    BranchShape {
        distinct,
        max_multiplicity,
        max_gap,
    }
}

/// Requirements (i)–(iv) for `candidate` as a clock on `grid` (64 ≤ n ≤ 1024):
///
/// - (i) self-adjoint: Hermiticity residual ≤ 1e-10;
/// - (ii) advances with the laboratory time: the positive-branch drift of its
///   expectation equals ⟨I + 2βK̂⟩ within 1%;
/// - (iii) does not commute with Ĥ_D: ‖[C, Ĥ_D]ψ‖ ≥ 0.1ħ‖ψ‖ on smooth packets;
/// - (iv) single-valued continuum: each sign branch holds at least n/4
///   distinct values, no value repeats beyond spin × mirror pairing (4), and
///   the largest spacing shrinks from a coarser grid (n/4 points, 2dp) to
///   this one.
pub fn verify_clock_requirements(
    candidate: ClockCandidate,
    grid: &MomentumGrid1D,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
) -> Result<VerificationReport> {
    let n = grid.n();
    if !(64..=DENSE_GRID_LIMIT).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "clock requirements need 64 <= n <= {DENSE_GRID_LIMIT}, got {n}"
        )));
    }
    let clock = candidate.build(grid, params, algebra);
    let h = build_hamiltonian(grid, params, algebra);
    let mut rep = VerificationReport::new("clock-requirements", "page-wootters-clock-requirements");

    rep.push("(i) self-adjoint", clock.hermiticity_residual(4, 21), 1e-10);

    let packet = single_branch_packet(grid, params, algebra, grid.p_center(), balanced_width(grid), 0.0, Branch::Positive)?;
    let span = grid.box_length() / (8.0 * params.c());
    let slope = clock_slope_check(&clock, &packet, params, algebra, span, 64, SLOPE_TOL)?;
    let slope_check = slope.checks[0].clone();
    rep.push("(ii) drift equals <I + 2bK>", slope_check.residual, slope_check.tolerance);
    rep.measure("(ii) fitted drift", slope.measurements["fitted slope"]);
    rep.measure("(ii) <I + 2bK>", slope.measurements["<I + 2bK>"]);

    let floor = 0.1 * params.hbar();
    let weakest = random_smooth_packets(grid, 4, 31)
        .iter()
        .map(|pk| {
            let x = pk.amplitudes();
            let ch = clock.apply(&h.apply(x));
            let hc = h.apply(&clock.apply(x));
            crate::grid::diff_norm(&ch, &hc) / norm(x)
        })
        .fold(f64::INFINITY, f64::min);
    rep.push_flag("(iii) does not commute with H", weakest >= floor);
    rep.measure("(iii) min |[C,H]psi|/|psi|", weakest);

    let fine = branch_shape(&dense_eigenvalues_of(&clock)?);
    let coarse_grid = MomentumGrid1D::new(n / 4, 2.0 * grid.dp(), grid.p_center(), grid.hbar())?;
    let coarse = branch_shape(&dense_eigenvalues_of(&candidate.build(&coarse_grid, params, algebra))?);
    rep.push_flag(
        "(iv) single-valued continuum",
        fine.distinct >= n / 4 && fine.max_multiplicity <= 4 && fine.max_gap < coarse.max_gap,
    );
    rep.measure("(iv) distinct per branch", fine.distinct as f64);
    rep.measure("(iv) max multiplicity", fine.max_multiplicity as f64);
    rep.measure("(iv) max spacing", fine.max_gap);
    rep.measure("(iv) coarse max spacing", coarse.max_gap);
    Ok(rep)
}
