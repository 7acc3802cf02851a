//! Time from a static state: a small system coupled to a heavy 1-D
//! environment, in a single fixed-energy eigenstate Ψ(x, R) of the whole.
//!
//! Dividing Ψ by the semiclassical environment wave χ_E(R) = A·e^{iW/ħ}
//! leaves a conditional system state ψ_S(R). Along the classical trajectory
//! R(t) this state approximately obeys the system's time-dependent
//! Schrödinger equation with the interaction h_c(R(t)). The residual
//! against an honest TDSE integration shrinks as the environment mass grows.
//!
//! The incoming wave enters at the left end of the window and moves right.
//! Reflection is not imposed as a boundary condition; for heavy
//! environments it is exponentially small in (k·w)².
//!
//! ```
//! use twotime::emergence::{EmergenceModel, emergence_fidelity_sweep};
//!
//! let base = EmergenceModel::qubit_default(100.0);
//! let table = emergence_fidelity_sweep(&base, &[100.0, 300.0]).unwrap();
//! assert!(table.monotone);
//! ```

mod channels;
mod sweep;
mod tdse;
mod wkb;

pub use channels::{solve_total_tise, ChannelSolution};
pub use sweep::{emergence_fidelity_sweep, FidelityRow, FidelityTable};
pub use tdse::{tdse_reference, tdse_reference_with_tolerance, DormandPrince, TDSE_TOL};
pub use wkb::{classical_clock, integrate, WkbEnvironment};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::table::{fmt_float, Csv};

/// Largest system dimension the channel solver accepts.
pub const MAX_SYSTEM_DIM: usize = 4;
/// |χ_E| below this masks the node.
pub const CHI_FLOOR: f64 = 1e-12;

pub fn sigma_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

pub fn sigma_z() -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Potential {
    Free,
    /// V(R) = slope·R.
    Linear { slope: f64 },
}

impl Potential {
    pub fn at(&self, r: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Linear { slope } => slope * r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Profile {
    Constant,
    /// exp(−(R − center)²/width²)
    Gaussian { center: f64, width: f64 },
}

/// h_c(R) = strength · profile(R) · operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub strength: f64,
    pub profile: Profile,
    pub operator: DMatrix<C64>,
}

impl Coupling {
    pub fn gaussian(strength: f64, center: f64, width: f64, operator: DMatrix<C64>) -> Self {
        Self {
            strength,
            profile: Profile::Gaussian { center, width },
            operator,
        }
    }

    pub fn constant(strength: f64, operator: DMatrix<C64>) -> Self {
        Self {
            strength,
            profile: Profile::Constant,
            operator,
        }
    }

    pub fn off(dim: usize) -> Self {
        Self::constant(0.0, DMatrix::zeros(dim, dim))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            strength: self.strength * factor,
            ..self.clone()
        }
    }

    pub fn envelope(&self, r: f64) -> f64 {
        match self.profile {
            Profile::Constant => self.strength,
            Profile::Gaussian { center, width } => self.strength * (-((r - center) / width).powi(2)).exp(),
        }
    }

    pub fn at(&self, r: f64) -> DMatrix<C64> {
        &self.operator * C64::new(self.envelope(r), 0.0)
    }

    /// Largest |eigenvalue| of h_c over the window (the operator norm times
    /// the envelope peak).
    fn bound(&self) -> f64 {
        let norm = self.operator.clone().symmetric_eigen().eigenvalues.amax();
        self.strength.abs() * norm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmergenceModel {
    /// Environment mass M.
    pub mass: f64,
    /// Analysis window [R₀, R₁]; the incoming wave enters at R₀.
    pub window: (f64, f64),
    pub potential: Potential,
    pub h_sys0: DMatrix<C64>,
    pub coupling: Coupling,
    /// Incoming system state in the bare basis.
    pub psi0: DVector<C64>,
    /// Classical environment velocity at R₀; fixes `e_total`.
    pub velocity: f64,
    pub e_total: f64,
    pub hbar: f64,
    /// Magnus steps per shortest local channel wavelength.
    pub points_per_wavelength: f64,
    /// Recorded nodes are `samples + 1`, evenly spaced over the window.
    pub samples: usize,
}

impl EmergenceModel {
    /// The desk-scale model: qubit with splitting 1, Gaussian σ_x coupling
    /// of strength 0.5 and width 2 at R = 0, free environment moving at
    /// unit speed through [−12, 12], system starting in |↑⟩.
    pub fn qubit_default(mass: f64) -> Self {
        let mut m = Self {
            mass,
            window: (-12.0, 12.0),
            potential: Potential::Free,
            h_sys0: sigma_z() * C64::new(0.5, 0.0),
            coupling: Coupling::gaussian(0.5, 0.0, 2.0, sigma_x()),
            psi0: DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            velocity: 1.0,
            e_total: 0.0,
            hbar: 1.0,
            points_per_wavelength: 12.0,
            samples: 256,
        };
        m.refresh_energy();
        m
    }

    /// Same model at another mass, with the total energy recomputed so the
    /// incoming velocity is unchanged.
    pub fn with_mass(&self, mass: f64) -> Self {
        let mut m = self.clone();
        m.mass = mass;
        m.refresh_energy();
        m
    }

    /// ⟨ψ₀|Ĥ_sys0|ψ₀⟩ / ⟨ψ₀|ψ₀⟩.
    pub fn initial_system_energy(&self) -> f64 {
        let num = (self.psi0.adjoint() * &self.h_sys0 * &self.psi0)[(0, 0)].re;
        num / self.psi0.norm_squared()
    }

    /// E_total = ½Mv² + V(R₀) + ⟨Ĥ_sys0⟩.
    pub fn refresh_energy(&mut self) {
        self.e_total =
            0.5 * self.mass * self.velocity * self.velocity + self.potential.at(self.window.0) + self.initial_system_energy();
    }

    /// E_env = E_total − ⟨Ĥ_sys0⟩, the energy carried by the clock.
    pub fn environment_energy(&self) -> f64 {
        self.e_total - self.initial_system_energy()
    }

    pub(crate) fn environment_energy_at(&self, r: f64) -> f64 {
        self.environment_energy() - self.potential.at(r)
    }

    pub fn system_dim(&self) -> usize {
        self.h_sys0.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.system_dim();
        if d == 0 || d > MAX_SYSTEM_DIM {
            return Err(Error::InvalidParameter(format!("system dimension {d} outside 1..={MAX_SYSTEM_DIM}")));
        }
        if self.h_sys0.ncols() != d || self.coupling.operator.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.coupling.operator.nrows(),
            });
        }
        if self.psi0.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.psi0.len(),
            });
        }
        for (label, m) in [("H_sys0", &self.h_sys0), ("coupling operator", &self.coupling.operator)] {
            if (m - m.adjoint()).camax() > 1e-12 {
                return Err(Error::InvalidParameter(format!("{label} is not Hermitian")));
            }
        }
        if self.psi0.norm() == 0.0 {
            return Err(Error::InvalidParameter("psi0 is zero".into()));
        }
        if !(self.mass > 0.0 && self.hbar > 0.0 && self.window.1 > self.window.0) {
            return Err(Error::InvalidParameter("need M > 0, hbar > 0 and R1 > R0".into()));
        }
        if self.samples == 0 || self.points_per_wavelength < 4.0 {
            return Err(Error::InvalidParameter("need samples ≥ 1 and at least 4 points per wavelength".into()));
        }
        Ok(())
    }

    /// Recorded R nodes.
    pub fn recorded_nodes(&self) -> Vec<f64> {
        let (r0, r1) = self.window;
        (0..=self.samples)
            .map(|i| r0 + (r1 - r0) * i as f64 / self.samples as f64)
            .collect()
    }

    /// Number of Magnus steps: enough to put `points_per_wavelength` steps
    /// in the shortest channel wavelength anywhere in the window, rounded
    /// up to a multiple of `samples`.
    pub fn steps(&self) -> usize {
        let lowest = self
            .h_sys0
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
            - self.coupling.bound();
        let k_max = self
            .recorded_nodes()
            .iter()
            .map(|&r| (2.0 * self.mass * (self.e_total - lowest - self.potential.at(r)).max(0.0)).sqrt() / self.hbar)
            .fold(0.0, f64::max);
        let (r0, r1) = self.window;
        let raw = ((r1 - r0) * k_max / (2.0 * PI) * self.points_per_wavelength).ceil() as usize;
        raw.div_ceil(self.samples).max(1) * self.samples
    }
}

/// A system state trajectory along the clock time.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemTrajectory {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    /// R values dropped because |χ_E| fell below the floor.
    pub masked: Vec<f64>,
}

impl SystemTrajectory {
    pub fn final_state(&self) -> &[C64] {
        self.states.last().expect("nonempty trajectory")
    }

    pub fn populations(&self, i: usize) -> Vec<f64> {
        self.states[i].iter().map(|z| z.norm_sqr()).collect()
    }

    /// max |‖ψ(t)‖ − 1|.
    pub fn norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest infidelity against another trajectory on the same nodes.
    pub fn max_infidelity(&self, other: &SystemTrajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| infidelity(a, b))
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let d = self.states.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string(), "R".to_string()];
        for b in 0..d {
            header.extend([format!("re_{b}"), format!("im_{b}"), format!("pop_{b}")]);
        }
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut csv = Csv::new(&refs);
        for ((t, r), s) in self.t.iter().zip(&self.r).zip(&self.states) {
            let mut row = vec![fmt_float(*t), fmt_float(*r)];
            for z in s {
                row.extend([fmt_float(z.re), fmt_float(z.im), fmt_float(z.norm_sqr())]);
            }
            csv.row(&row);
        }
        csv.finish()
    }
}

/// 1 − |⟨a|b⟩|² for normalized states.
pub fn infidelity(a: &[C64], b: &[C64]) -> f64 {
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (1.0 - overlap.norm_sqr()).max(0.0)
}

/// ψ_S(R) = Ψ(R)/χ_E(R), renormalized per node and labelled by t(R).
pub fn emergent_system_state(solution: &ChannelSolution, wkb: &WkbEnvironment) -> Result<SystemTrajectory> {
    if solution.r.len() != wkb.r.len() {
        return Err(Error::DimensionMismatch {
            expected: wkb.r.len(),
            got: solution.r.len(),
        });
    }
    if solution.r.iter().zip(&wkb.r).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs())) {
        return Err(Error::InvalidParameter("channel solution and clock are on different nodes".into()));
    }
    let mut out = SystemTrajectory {
        t: Vec::new(),
        r: Vec::new(),
        states: Vec::new(),
        masked: Vec::new(),
    };
    for (i, psi) in solution.psi.iter().enumerate() {
        let chi = wkb.chi(i);
        if chi.norm() < CHI_FLOOR {
            out.masked.push(wkb.r[i]);
            continue;
        }
        let divided: Vec<C64> = psi.iter().map(|z| z / chi).collect();
        let norm = divided.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        out.t.push(wkb.t[i]);
        out.r.push(wkb.r[i]);
        out.states.push(divided.into_iter().map(|z| z / norm).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncoupled_eigenstate_is_frozen() {
        let mut model = EmergenceModel::qubit_default(100.0);
        model.coupling = Coupling::off(2);
        let sol = solve_total_tise(&model).unwrap();
        let wkb = classical_clock(&model).unwrap();
        let traj = emergent_system_state(&sol, &wkb).unwrap();
        for s in &traj.states {
            assert!((s[0] - C64::new(1.0, 0.0)).norm() < 1e-10, "{s:?}");
        }
        assert!(traj.norm_drift() < 1e-14);
    }

    #[test]
    fn diagonal_coupling_accumulates_the_phase_integral() {
        let mut model = EmergenceModel::qubit_default(1000.0);
        model.coupling = Coupling::gaussian(0.5, 0.0, 2.0, sigma_z());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        model.psi0 = DVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]);
        model.refresh_energy();
        let sol = solve_total_tise(&model).unwrap();
        let wkb = classical_clock(&model).unwrap();
        let traj = emergent_system_state(&sol, &wkb).unwrap();
        let v = model.velocity;
        let mut unwrapped = 0.0;
        let mut last = 0.0;
        let final_node = traj.states.len() - 1;
        for (i, s) in traj.states.iter().enumerate() {
            // Inside the coupling region each channel's WKB amplitude
            // k_b^{-1/2} differs by about g/(Mv²); away from it the
            // populations return to their initial values.
            let bound = if i == final_node { 1e-8 } else { model.coupling.strength / (model.mass * v * v) };
            assert!((s[0].norm_sqr() - 0.5).abs() < bound, "{i}: {}", s[0].norm_sqr());
            let phase = (s[1] / s[0]).arg();
            let mut step = phase - last;
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            unwrapped += step;
            last = phase;
            // arg(ψ↓/ψ↑) = Δt + 2∫g f(R(t′)) dt′ with t = (R − R₀)/v.
            let phase_integral = integrate(&|r| model.coupling.envelope(r) / v, model.window.0, traj.r[i]);
            let want = traj.t[i] + 2.0 * phase_integral;
            assert!((unwrapped - want).abs() < 1e-5, "t={}: {unwrapped} vs {want}", traj.t[i]);
        }
    }

    #[test]
    fn refinement_leaves_the_trajectory_unchanged() {
        let model = EmergenceModel::qubit_default(300.0);
        let run = |m: &EmergenceModel| {
            let sol = solve_total_tise(m).unwrap();
            emergent_system_state(&sol, &classical_clock(m).unwrap()).unwrap()
        };
        let coarse = run(&model);
        let mut fine_model = model.clone();
        fine_model.points_per_wavelength *= 2.0;
        let fine = run(&fine_model);
        let worst = coarse
            .states
            .iter()
            .zip(&fine.states)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn mismatched_nodes_are_refused() {
        let model = EmergenceModel::qubit_default(100.0);
        let sol = solve_total_tise(&model).unwrap();
        let mut other = model.clone();
        other.samples = 128;
        assert!(emergent_system_state(&sol, &classical_clock(&other).unwrap()).is_err());
    }

    #[test]
    fn oversized_system_is_refused() {
        let mut model = EmergenceModel::qubit_default(100.0);
        model.h_sys0 = DMatrix::identity(5, 5);
        assert!(model.validate().is_err());
    }
}
