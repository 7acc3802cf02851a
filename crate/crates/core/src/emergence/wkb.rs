//! The environment as a classical clock: χ_E(R) = A(R)·exp(iW(R)/ħ) with
//! W′ = P = √(2M(E_env − V)), A ∝ P^(−1/2), and the trajectory time
//! t(R) = ∫ M/P dR′.

use serde::Serialize;

use super::EmergenceModel;
use crate::error::{Error, Result};

/// Absolute/relative tolerance of the adaptive quadrature per sub-interval.
const QUAD_TOL: f64 = 1e-13;
const QUAD_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * QUAD_TOL * (1.0 + (left + right).abs()) {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, depth - 1) + recurse(f, m, fm, b, fb, rm, frm, right, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, QUAD_DEPTH)
}

/// First R in [a, b] where `kinetic(R)` reaches zero, if any.
pub(crate) fn turning_point<F: Fn(f64) -> f64>(kinetic: F, a: f64, b: f64) -> Option<f64> {
    const SCAN: usize = 4096;
    let h = (b - a) / SCAN as f64;
    let mut lo = a;
    if kinetic(lo) <= 0.0 {
        return Some(lo);
    }
    for i in 1..=SCAN {
        let hi = a + i as f64 * h;
        if kinetic(hi) <= 0.0 {
            let (mut l, mut r) = (lo, hi);
            for _ in 0..80 {
                let m = 0.5 * (l + r);
                if kinetic(m) > 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            return Some(r);
        }
        lo = hi;
    }
    None
}

/// WKB environment sampled at the recorded nodes of the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WkbEnvironment {
    pub r: Vec<f64>,
    /// Action W(R) = ∫_{R₀}^{R} P dR′.
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    /// A(R) = (P(R₀)/P(R))^{1/2}, so A(R₀) = 1.
    pub a: Vec<f64>,
    pub t: Vec<f64>,
    pub hbar: f64,
}

impl WkbEnvironment {
    /// χ_E at node i.
    pub fn chi(&self, i: usize) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(self.a[i], self.w[i] / self.hbar)
    }

    pub fn final_time(&self) -> f64 {
        *self.t.last().expect("nonempty trajectory")
    }
}

/// Computes W, P, A and t(R) on the model's recorded nodes by adaptive
/// quadrature, interval by interval.
pub fn classical_clock(model: &EmergenceModel) -> Result<WkbEnvironment> {
    let (r0, r1) = model.window;
    let e_env = model.environment_energy();
    let kinetic = |r: f64| e_env - model.potential.at(r);
    if let Some(tp) = turning_point(kinetic, r0, r1) {
        return Err(Error::ClassicallyForbidden { turning_point: tp });
    }
    let m = model.mass;
    let p_of = |r: f64| (2.0 * m * kinetic(r)).sqrt();
    let r = model.recorded_nodes();
    let p: Vec<f64> = r.iter().map(|&x| p_of(x)).collect();
    let mut w = vec![0.0; r.len()];
    let mut t = vec![0.0; r.len()];
    for i in 1..r.len() {
        w[i] = w[i - 1] + integrate(&p_of, r[i - 1], r[i]);
        t[i] = t[i - 1] + integrate(&|x| m / p_of(x), r[i - 1], r[i]);
    }
    if t.windows(2).any(|s| s[1] <= s[0]) {
        return Err(Error::InvalidParameter("trajectory time is not strictly increasing".into()));
    }
    let a = p.iter().map(|&pi| (p[0] / pi).sqrt()).collect();
    Ok(WkbEnvironment {
        r,
        w,
        p,
        a,
        t,
        hbar: model.hbar,
    })
}
