//! Reference TDSE along the classical trajectory, integrated independently
//! of the channel solve: iħ dψ/dt = [Ĥ_sys0 + h_c(R(t))]ψ together with
//! dR/dt = P(R)/M, by adaptive Dormand–Prince 5(4).

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::{EmergenceModel, SystemTrajectory, WkbEnvironment};
use crate::error::{Error, Result};

/// Default relative/absolute tolerance of the reference integration.
pub const TDSE_TOL: f64 = 1e-12;

const MIN_STEP: f64 = 1e-14;

/// Adaptive Dormand–Prince 5(4) for complex state vectors.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
}

impl DormandPrince {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    /// Fifth-order weights minus the embedded fourth-order ones.
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];

    pub fn new(tol: f64) -> Self {
        Self { rtol: tol, atol: tol }
    }

    /// Advances `y` from `t0` to `t1`. `h` carries the step size across
    /// calls.
    pub fn advance<F>(&self, f: &F, t0: f64, t1: f64, y: &mut DVector<C64>, h: &mut f64) -> Result<()>
    where
        F: Fn(f64, &DVector<C64>) -> DVector<C64>,
    {
        let mut t = t0;
        let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
        while t < t1 {
            let step = h.min(t1 - t);
            if step < MIN_STEP * (1.0 + t.abs()) {
                return Err(Error::StepUnderflow { t });
            }
            k.clear();
            for i in 0..7 {
                let mut yi = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    if Self::A[i][j] != 0.0 {
                        yi += kj * C64::new(step * Self::A[i][j], 0.0);
                    }
                }
                k.push(f(t + Self::C[i] * step, &yi));
            }
            // The last stage is evaluated at the fifth-order solution (FSAL).
            let mut y_new = y.clone();
            for (j, kj) in k.iter().take(6).enumerate() {
                y_new += kj * C64::new(step * Self::A[6][j], 0.0);
            }
            let mut err = 0.0f64;
            for s in 0..y.len() {
                let e: C64 = (0..7).map(|j| k[j][s] * Self::E[j]).sum::<C64>() * step;
                let scale = self.atol + self.rtol * y[s].norm().max(y_new[s].norm());
                err = err.max(e.norm() / scale);
            }
            if err <= 1.0 {
                t += step;
                *y = y_new;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            *h = step * factor;
        }
        Ok(())
    }
}

/// Reference trajectory at the clock times of `wkb`, default tolerance.
pub fn tdse_reference(model: &EmergenceModel, wkb: &WkbEnvironment, psi0: &[C64]) -> Result<SystemTrajectory> {
    tdse_reference_with_tolerance(model, wkb, psi0, TDSE_TOL)
}

pub fn tdse_reference_with_tolerance(
    model: &EmergenceModel,
    wkb: &WkbEnvironment,
    psi0: &[C64],
    tol: f64,
) -> Result<SystemTrajectory> {
    model.validate()?;
    let d = model.system_dim();
    if psi0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: psi0.len(),
        });
    }
    let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let e_env = model.environment_energy();
    let rhs = |_t: f64, y: &DVector<C64>| -> DVector<C64> {
        let r = y[d].re;
        let psi = y.rows(0, d);
        let h = &model.h_sys0 + model.coupling.at(r);
        let dpsi = (h * psi) * C64::new(0.0, -1.0 / model.hbar);
        let p = (2.0 * model.mass * (e_env - model.potential.at(r)).max(0.0)).sqrt();
        let mut out = DVector::zeros(d + 1);
        out.rows_mut(0, d).copy_from(&dpsi);
        out[d] = C64::new(p / model.mass, 0.0);
        out
    };
    let mut y = DVector::from_iterator(d + 1, psi0.iter().map(|z| z / norm).chain([C64::new(wkb.r[0], 0.0)]));
    let solver = DormandPrince::new(tol);
    let mut h = 1e-3 * (wkb.final_time() - wkb.t[0]).max(1e-12);
    let snapshot = |y: &DVector<C64>| -> Vec<C64> { y.rows(0, d).iter().copied().collect() };
    let mut out = SystemTrajectory {
        t: vec![wkb.t[0]],
        r: vec![wkb.r[0]],
        states: vec![snapshot(&y)],
        masked: Vec::new(),
    };
    for w in wkb.t.windows(2) {
        solver.advance(&rhs, w[0], w[1], &mut y, &mut h)?;
        out.t.push(w[1]);
        out.r.push(y[d].re);
        out.states.push(snapshot(&y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emergence::{classical_clock, sigma_x, Coupling};
    use nalgebra::DMatrix;

    #[test]
    fn constant_rabi_coupling_matches_the_oracle() {
        let mut model = EmergenceModel::qubit_default(100.0);
        let g = 0.4;
        model.h_sys0 = DMatrix::zeros(2, 2);
        model.coupling = Coupling::constant(g, sigma_x());
        model.refresh_energy();
        let wkb = classical_clock(&model).unwrap();
        let traj = tdse_reference(&model, &wkb, model.psi0.as_slice()).unwrap();
        for (i, t) in traj.t.iter().enumerate() {
            let want = (g * t / model.hbar).sin().powi(2);
            assert!((traj.populations(i)[1] - want).abs() < 1e-8, "t={t}");
        }
        assert!(traj.norm_drift() < 1e-10, "{}", traj.norm_drift());
    }

    #[test]
    fn diagonal_hamiltonian_keeps_populations() {
        let mut model = EmergenceModel::qubit_default(100.0);
        model.coupling = Coupling::off(2);
        model.psi0 = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)]);
        model.refresh_energy();
        let wkb = classical_clock(&model).unwrap();
        let traj = tdse_reference(&model, &wkb, model.psi0.as_slice()).unwrap();
        for i in 0..traj.t.len() {
            assert!((traj.populations(i)[0] - 0.36).abs() < 1e-10);
        }
    }

    #[test]
    fn halving_the_tolerance_changes_little() {
        let model = EmergenceModel::qubit_default(100.0);
        let wkb = classical_clock(&model).unwrap();
        let a = tdse_reference_with_tolerance(&model, &wkb, model.psi0.as_slice(), 1e-12).unwrap();
        let b = tdse_reference_with_tolerance(&model, &wkb, model.psi0.as_slice(), 5e-13).unwrap();
        let diff = a
            .final_state()
            .iter()
            .zip(b.final_state())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn trajectory_follows_the_clock_nodes() {
        let model = EmergenceModel::qubit_default(100.0);
        let wkb = classical_clock(&model).unwrap();
        let traj = tdse_reference(&model, &wkb, model.psi0.as_slice()).unwrap();
        for (r, want) in traj.r.iter().zip(&wkb.r) {
            assert!((r - want).abs() < 1e-9);
        }
    }

    #[test]
    fn dormand_prince_solves_exponential_decay() {
        let f = |_t: f64, y: &DVector<C64>| -y.clone();
        let mut y = DVector::from_element(1, C64::new(1.0, 0.0));
        let mut h = 0.1;
        DormandPrince::new(1e-12).advance(&f, 0.0, 3.0, &mut y, &mut h).unwrap();
        assert!((y[0].re - (-3.0f64).exp()).abs() < 1e-11);
    }
}
