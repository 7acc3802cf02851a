//! Drift-plus-oscillation fits of expectation-value series.
//!
//! The linear drift is removed by least squares, the residual is Hann
//! windowed and zero-padded, and the dominant DFT peak is located with a
//! quadratic fit over its three top bins. The frequency is then polished by
//! maximizing the variance explained by a joint fit on [1, t, cos ωt, sin ωt],
//! which also yields the final slope, intercept and amplitude.

use nalgebra::{Matrix4, Vector4};
use rustfft::{num_complex::Complex64 as C64, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 64;
const MIN_PERIODS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZitterbewegungFit {
    pub slope: f64,
    pub intercept: f64,
    /// √(a² + b²) of the fitted a·cos ωt + b·sin ωt.
    pub oscillation_amplitude: f64,
    /// Angular frequency ω.
    pub oscillation_frequency: f64,
    /// R² of the plain linear fit.
    pub linear_r_squared: f64,
    pub samples: usize,
}

fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        sxy += (a - tm) * (b - ym);
        sxx += (a - tm) * (a - tm);
    }
    let slope = sxy / sxx;
    (slope, ym - slope * tm)
}

/// Joint least squares on [1, t−t̄, cos ωt, sin ωt]; returns the
/// coefficients (in the centred basis) and the residual sum of squares.
fn joint_fit(t: &[f64], y: &[f64], omega: f64) -> ([f64; 4], f64) {
    let tm = t.iter().sum::<f64>() / t.len() as f64;
    let mut ata = Matrix4::<f64>::zeros();
    let mut aty = Vector4::<f64>::zeros();
    let row = |ti: f64| Vector4::new(1.0, ti - tm, (omega * ti).cos(), (omega * ti).sin());
    for (&ti, &yi) in t.iter().zip(y) {
        let r = row(ti);
        ata += r * r.transpose();
        aty += r * yi;
    }
    let coef = ata
        .cholesky()
        .map(|c| c.solve(&aty))
        .unwrap_or_else(|| ata.pseudo_inverse(1e-14).expect("pseudo-inverse") * aty);
    let ssr = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| (yi - row(ti).dot(&coef)).powi(2))
        .sum();
    ([coef[0], coef[1], coef[2], coef[3]], ssr)
}

fn dft_peak(t: &[f64], resid: &[f64]) -> f64 {
    let n = resid.len();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    let m = 8 * n.next_power_of_two();
    let mut buf: Vec<C64> = resid
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
            C64::new(r * w, 0.0)
        })
        .collect();
    buf.resize(m, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mag: Vec<f64> = buf[..m / 2].iter().map(|z| z.norm()).collect();
    // Skip the lowest bins, where leftover drift leaks (< 2 cycles per span).
    let kmin = (2 * m / n).max(2);
    let k = (kmin..m / 2 - 1)
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .expect("nonempty spectrum");
    let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
    let denom = a - 2.0 * b + c;
    let delta = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    2.0 * PI * (k as f64 + delta) / (m as f64 * dt)
}

/// Fits y(t) ≈ intercept + slope·t + a·cos ωt + b·sin ωt on a uniformly
/// sampled series. With `expected_frequency`, a series covering fewer than
/// four expected periods is refused.
pub fn zitterbewegung_analysis(t: &[f64], y: &[f64], expected_frequency: Option<f64>) -> Result<ZitterbewegungFit> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: y.len(),
        });
    }
    let n = t.len();
    let span = if n > 1 { t[n - 1] - t[0] } else { 0.0 };
    let periods = expected_frequency.map_or(f64::INFINITY, |w| span * w / (2.0 * PI));
    if n < MIN_SAMPLES || periods < MIN_PERIODS {
        return Err(Error::SeriesTooShort {
            len: n,
            min_len: MIN_SAMPLES,
            span_periods: if periods.is_finite() { periods } else { 0.0 },
        });
    }
    let dt = span / (n - 1) as f64;
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidParameter("series must be uniformly sampled".into()));
    }

    let (slope0, icpt0) = linear_fit(t, y);
    let resid: Vec<f64> = t.iter().zip(y).map(|(a, b)| b - (icpt0 + slope0 * a)).collect();
    let ym = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let ss_lin: f64 = resid.iter().map(|r| r * r).sum();
    let linear_r_squared = if sst > 0.0 { 1.0 - ss_lin / sst } else { 1.0 };

    // Golden-section polish of ω within one coarse DFT bin either side.
    let omega0 = dft_peak(t, &resid);
    let bin = 2.0 * PI / (n as f64 * dt);
    let (mut lo, mut hi) = ((omega0 - bin).max(0.5 * omega0), omega0 + bin);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let cost = |w: f64| joint_fit(t, y, w).1;
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    let omega = 0.5 * (lo + hi);
    let (c, _) = joint_fit(t, y, omega);
    let tm = t.iter().sum::<f64>() / n as f64;
    Ok(ZitterbewegungFit {
        slope: c[1],
        intercept: c[0] - c[1] * tm,
        oscillation_amplitude: c[2].hypot(c[3]),
        oscillation_frequency: omega,
        linear_r_squared,
        samples: n,
    })
}
