//! Infidelity between the emergent and reference system states as the
//! environment mass grows.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    classical_clock, emergent_system_state, infidelity, solve_total_tise, tdse_reference, EmergenceModel, SystemTrajectory,
};
use crate::error::{Error, Result};
use crate::report::VerificationReport;
use crate::table::Csv;

/// Largest-mass infidelity accepted.
pub const FINAL_INFIDELITY_TOL: f64 = 1e-2;
/// Coupling-off infidelity accepted at every mass and every time.
pub const CONTROL_TOL: f64 = 1e-10;
pub const FLUX_TOL: f64 = 1e-8;
/// Emergent state change under a 2× refined R grid.
pub const REFINEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub mass: f64,
    pub steps: usize,
    /// 1 − |⟨ψ_TDSE(t_f)|ψ_S(t_f)⟩|².
    pub infidelity: f64,
    /// Same with the coupling scaled to zero, worst over all t.
    pub control_infidelity: f64,
    pub flux_drift: f64,
    /// Largest component change of ψ_S(t) when the R step is halved.
    pub refinement_change: f64,
    pub final_time: f64,
    #[serde(skip)]
    pub emergent: SystemTrajectory,
    #[serde(skip)]
    pub reference: SystemTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityTable {
    pub rows: Vec<FidelityRow>,
    /// Infidelity strictly decreasing along the mass ladder.
    pub monotone: bool,
}

impl FidelityTable {
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&[
            "M",
            "steps",
            "infidelity",
            "control_infidelity",
            "flux_drift",
            "refinement_change",
            "t_final",
        ]);
        for r in &self.rows {
            csv.row_f64(&[
                r.mass,
                r.steps as f64,
                r.infidelity,
                r.control_infidelity,
                r.flux_drift,
                r.refinement_change,
                r.final_time,
            ]);
        }
        csv.finish()
    }

    pub fn report(&self) -> VerificationReport {
        let mut rep = VerificationReport::new("emergence", "time-from-a-static-state");
        rep.push_flag("infidelity strictly decreasing in M", self.monotone);
        if let Some(last) = self.rows.last() {
            rep.push("largest-M infidelity", last.infidelity, FINAL_INFIDELITY_TOL);
        }
        let worst = |f: fn(&FidelityRow) -> f64| self.rows.iter().map(f).fold(0.0, f64::max);
        rep.push("coupling-off infidelity", worst(|r| r.control_infidelity), CONTROL_TOL);
        rep.push("flux drift", worst(|r| r.flux_drift), FLUX_TOL);
        rep.push("2x R refinement change", worst(|r| r.refinement_change), REFINEMENT_TOL);
        for r in &self.rows {
            rep.measure(format!("infidelity M={}", r.mass), r.infidelity);
        }
        rep
    }
}

fn emergent(model: &EmergenceModel) -> Result<(SystemTrajectory, f64, usize)> {
    let solution = solve_total_tise(model)?;
    let wkb = classical_clock(model)?;
    Ok((emergent_system_state(&solution, &wkb)?, solution.flux_drift(), solution.steps))
}

fn member(model: &EmergenceModel) -> Result<FidelityRow> {
    let wkb = classical_clock(model)?;
    let (traj, flux_drift, steps) = emergent(model)?;
    let reference = tdse_reference(model, &wkb, model.psi0.as_slice())?;
    let final_infidelity = infidelity(reference.final_state(), traj.final_state());

    let mut refined = model.clone();
    refined.points_per_wavelength *= 2.0;
    let (fine, _, _) = emergent(&refined)?;
    let refinement_change = traj
        .states
        .iter()
        .zip(&fine.states)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max);

    let mut control = model.clone();
    control.coupling = model.coupling.scaled(0.0);
    let (control_traj, _, _) = emergent(&control)?;
    let control_ref = tdse_reference(&control, &wkb, control.psi0.as_slice())?;

    Ok(FidelityRow {
        mass: model.mass,
        steps,
        infidelity: final_infidelity,
        control_infidelity: control_traj.max_infidelity(&control_ref),
        flux_drift,
        refinement_change,
        final_time: wkb.final_time(),
        emergent: traj,
        reference,
    })
}

/// Runs the base model at each mass (strictly increasing) in parallel.
pub fn emergence_fidelity_sweep(base: &EmergenceModel, masses: &[f64]) -> Result<FidelityTable> {
    if masses.is_empty() || masses.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("masses must be nonempty and strictly increasing".into()));
    }
    let rows = masses
        .par_iter()
        .map(|&m| member(&base.with_mass(m)))
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[1].infidelity < w[0].infidelity);
    Ok(FidelityTable { rows, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavier_clocks_are_better() {
        let table = emergence_fidelity_sweep(&EmergenceModel::qubit_default(1.0), &[100.0, 1000.0]).unwrap();
        assert!(table.monotone, "{:?}", table.rows.iter().map(|r| r.infidelity).collect::<Vec<_>>());
        for r in &table.rows {
            assert!(r.control_infidelity < CONTROL_TOL);
            assert!(r.flux_drift < FLUX_TOL);
        }
    }

    #[test]
    fn decreasing_masses_are_refused() {
        assert!(emergence_fidelity_sweep(&EmergenceModel::qubit_default(1.0), &[1000.0, 100.0]).is_err());
    }
}
