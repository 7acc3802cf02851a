//! Periodic momentum grids and spinor wave packets living on them.
//!
//! Amplitudes are stored point-major: component `s` at momentum index `j`
//! sits at `4*j + s`. The position representation is reached by a unitary
//! DFT; position values follow FFT index order, r_k = k·Δr for k < n/2 and
//! (k − n)·Δr above, with Δr = 2πħ/(n·dp). In this convention
//! ψ(p) ∝ Σ_k φ(r_k) e^{−ipr_k/ħ}, so r̂ acts as iħ d/dp.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const SPINOR: usize = 4;

#[derive(Clone)]
pub struct MomentumGrid1D {
    n: usize,
    dp: f64,
    p_center: f64,
    hbar: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for MomentumGrid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentumGrid1D")
            .field("n", &self.n)
            .field("dp", &self.dp)
            .field("p_center", &self.p_center)
            .field("hbar", &self.hbar)
            .finish()
    }
}

impl PartialEq for MomentumGrid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.dp == other.dp
            && self.p_center == other.p_center
            && self.hbar == other.hbar
    }
}

impl MomentumGrid1D {
    pub fn new(n: usize, dp: f64, p_center: f64, hbar: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(dp.is_finite() && dp > 0.0) {
            return Err(Error::InvalidParameter(format!("dp must be positive, got {dp}")));
        }
        if !p_center.is_finite() || !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter("non-finite grid parameter".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            dp,
            p_center,
            hbar,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    /// Grid whose position box has length `box_length`.
    pub fn with_box(n: usize, box_length: f64, p_center: f64, hbar: f64) -> Result<Self> {
        Self::new(n, 2.0 * PI * hbar / box_length, p_center, hbar)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn p_center(&self) -> f64 {
        self.p_center
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        SPINOR * self.n
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_center + (j as f64 - (self.n / 2) as f64) * self.dp
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.p(j)).collect()
    }

    /// Position box length L = 2πħ/dp.
    pub fn box_length(&self) -> f64 {
        2.0 * PI * self.hbar / self.dp
    }

    pub fn dr(&self) -> f64 {
        self.box_length() / self.n as f64
    }

    /// Position value for FFT index `k`.
    pub fn r(&self, k: usize) -> f64 {
        let signed = if k < self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        };
        signed * self.dr()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.r(k)).collect()
    }

    /// True if |r| lies in the outer quarter of the box (12.5% per side).
    pub fn in_guard_band(&self, k: usize) -> bool {
        self.r(k).abs() > 0.375 * self.box_length()
    }

    /// Unitary transform of every spinor component to the position grid.
    pub fn to_position(&self, psi: &[C64]) -> Vec<C64> {
        self.transform(psi, &self.inverse)
    }

    pub fn to_momentum(&self, phi: &[C64]) -> Vec<C64> {
        self.transform(phi, &self.forward)
    }

    fn transform(&self, data: &[C64], plan: &Arc<dyn Fft<f64>>) -> Vec<C64> {
        assert_eq!(data.len(), self.dim(), "spinor field length");
        let n = self.n;
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = vec![C64::new(0.0, 0.0); data.len()];
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for s in 0..SPINOR {
            for j in 0..n {
                buf[j] = data[SPINOR * j + s];
            }
            plan.process(&mut buf);
            for j in 0..n {
                out[SPINOR * j + s] = buf[j] * scale;
            }
        }
        out
    }

    /// Applies a position-diagonal 4×4 action: ψ ↦ F† [f(k, φ_k)] F ψ.
    pub fn map_position<F>(&self, psi: &[C64], mut f: F) -> Vec<C64>
    where
        F: FnMut(usize, &mut [C64]),
    {
        let mut phi = self.to_position(psi);
        for (k, chunk) in phi.chunks_exact_mut(SPINOR).enumerate() {
            f(k, chunk);
        }
        self.to_momentum(&phi)
    }

    /// Position operator r̂ = iħ d/dp, by spectral differentiation.
    pub fn apply_position(&self, psi: &[C64]) -> Vec<C64> {
        self.map_position(psi, |k, v| {
            let r = self.r(k);
            v.iter_mut().for_each(|z| *z *= r);
        })
    }
}

/// ⟨a|b⟩ with the plain Euclidean sum (no dp weight).
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

pub fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// A normalized 4-component field on a momentum grid, Σⱼ‖ψⱼ‖²·dp = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorWavePacket {
    grid: MomentumGrid1D,
    amplitudes: Vec<C64>,
}

impl SpinorWavePacket {
    pub fn new(grid: MomentumGrid1D, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        let nrm = (norm_sqr(&amplitudes) * grid.dp()).sqrt();
        if nrm == 0.0 {
            return Err(Error::InvalidParameter("zero wave packet".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|z| z / nrm).collect();
        Ok(Self { grid, amplitudes })
    }

    /// ψ(p) = exp(−(p−p₀)²/(4σ_p²)) · exp(−ip r₀/ħ) · u(p), normalized.
    /// `spinor` supplies u(p) at each grid momentum.
    pub fn gaussian<F>(
        grid: &MomentumGrid1D,
        p0: f64,
        sigma_p: f64,
        r0: f64,
        mut spinor: F,
    ) -> Result<Self>
    where
        F: FnMut(f64) -> [C64; SPINOR],
    {
        if !(sigma_p > 0.0) {
            return Err(Error::InvalidParameter("sigma_p must be positive".into()));
        }
        let hbar = grid.hbar();
        let mut amps = Vec::with_capacity(grid.dim());
        for j in 0..grid.n() {
            let p = grid.p(j);
            let env = (-(p - p0).powi(2) / (4.0 * sigma_p * sigma_p)).exp();
            let phase = C64::from_polar(env, -p * r0 / hbar);
            amps.extend(spinor(p).iter().map(|u| u * phase));
        }
        Self::new(grid.clone(), amps)
    }

    pub fn grid(&self) -> &MomentumGrid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// Σ‖ψⱼ‖²·dp.
    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes) * self.grid.dp()
    }

    /// ⟨self|other⟩ with the dp-weighted inner product.
    pub fn inner(&self, other: &Self) -> C64 {
        dot(&self.amplitudes, &other.amplitudes) * self.grid.dp()
    }

    /// Real part of ⟨ψ|Aψ⟩/⟨ψ|ψ⟩ for a vector `a_psi` = Aψ.
    pub fn expectation_of(&self, a_psi: &[C64]) -> f64 {
        dot(&self.amplitudes, a_psi).re / norm_sqr(&self.amplitudes)
    }

    pub fn mean_momentum(&self) -> f64 {
        let mut num = 0.0;
        for (j, chunk) in self.amplitudes.chunks_exact(SPINOR).enumerate() {
            num += self.grid.p(j) * chunk.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        num / norm_sqr(&self.amplitudes)
    }

    pub fn mean_position(&self) -> f64 {
        let r_psi = self.grid.apply_position(&self.amplitudes);
        self.expectation_of(&r_psi)
    }

    /// Probability per position-grid point, in FFT index order.
    pub fn position_density(&self) -> Vec<f64> {
        let phi = self.grid.to_position(&self.amplitudes);
        let total = norm_sqr(&phi);
        phi.chunks_exact(SPINOR)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>() / total)
            .collect()
    }

    /// Probability carried by the position guard band.
    pub fn guard_band_mass(&self) -> f64 {
        self.position_density()
            .iter()
            .enumerate()
            .filter(|(k, _)| self.grid.in_guard_band(*k))
            .map(|(_, w)| w)
            .sum()
    }

    /// Grid-support diagnostics. The packet should decay below 1e-12 (in
    /// amplitude, relative to its peak) outside the central half of both the
    /// momentum window and the position box.
    pub fn support_warnings(&self) -> Vec<String> {
        let g = &self.grid;
        let n = g.n();
        let mut warnings = Vec::new();
        let amp = |c: &[C64]| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

        let mom: Vec<f64> = self.amplitudes.chunks_exact(SPINOR).map(amp).collect();
        let peak = mom.iter().cloned().fold(0.0, f64::max);
        let outer = (0..n)
            .filter(|&j| j < n / 4 || j >= 3 * n / 4)
            .map(|j| mom[j])
            .fold(0.0, f64::max);
        if outer > 1e-12 * peak {
            warnings.push(format!(
                "momentum amplitude {:.3e} (relative) outside the central half of the window",
                outer / peak
            ));
        }

        let phi = g.to_position(&self.amplitudes);
        let pos: Vec<f64> = phi.chunks_exact(SPINOR).map(amp).collect();
        let peak = pos.iter().cloned().fold(0.0, f64::max);
        let outer = (0..n)
            .filter(|&k| g.r(k).abs() > 0.25 * g.box_length())
            .map(|k| pos[k])
            .fold(0.0, f64::max);
        if outer > 1e-12 * peak {
            warnings.push(format!(
                "position amplitude {:.3e} (relative) outside the central half of the box; wrap-around possible",
                outer / peak
            ));
        }
        warnings
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> MomentumGrid1D {
        MomentumGrid1D::with_box(256, 200.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(MomentumGrid1D::new(8, 0.1, 0.0, 1.0).is_err());
        assert!(MomentumGrid1D::new(100, 0.1, 0.0, 1.0).is_err());
        assert!(MomentumGrid1D::new(64, 0.0, 0.0, 1.0).is_err());
        assert!(MomentumGrid1D::new(64, 0.1, 0.0, 1.0).is_ok());
    }

    #[test]
    fn box_length_is_conjugate_to_spacing() {
        let g = MomentumGrid1D::new(64, 0.25, 0.0, 2.0).unwrap();
        assert!((g.box_length() - 2.0 * PI * 2.0 / 0.25).abs() < 1e-12);
        assert_eq!(g.p(32), 0.0);
        assert!((g.r(1) - g.dr()).abs() < 1e-15);
        assert!((g.r(63) + g.dr()).abs() < 1e-12);
        assert!((g.r(32) + 32.0 * g.dr()).abs() < 1e-12);
    }

    #[test]
    fn transforms_are_unitary_inverses() {
        let g = grid();
        let v: Vec<C64> = (0..g.dim())
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let phi = g.to_position(&v);
        assert!((norm(&phi) - norm(&v)).abs() < 1e-12 * norm(&v));
        let back = g.to_momentum(&phi);
        assert!(diff_norm(&back, &v) < 1e-12 * norm(&v));
    }

    #[test]
    fn position_operator_locates_a_displaced_packet() {
        let g = grid();
        let up = |_| [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        for r0 in [-20.0, 0.0, 13.5] {
            let pk = SpinorWavePacket::gaussian(&g, 0.5, 0.2, r0, up).unwrap();
            assert!((pk.mean_position() - r0).abs() < 1e-10, "{}", pk.mean_position());
        }
    }

    #[test]
    fn packets_are_normalized() {
        let g = grid();
        let pk = SpinorWavePacket::gaussian(&g, 0.3, 0.1, 0.0, |_| {
            [C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
        })
        .unwrap();
        assert!((pk.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((pk.mean_momentum() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn rejects_nonfinite_and_wrong_length() {
        let g = grid();
        assert!(SpinorWavePacket::new(g.clone(), vec![C64::new(1.0, 0.0); 3]).is_err());
        let mut v = vec![C64::new(1.0, 0.0); g.dim()];
        v[5] = C64::new(f64::NAN, 0.0);
        assert!(SpinorWavePacket::new(g, v).is_err());
    }

    #[test]
    fn support_warnings_flag_edge_packets() {
        let g = grid();
        let up = |_| [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let centered = SpinorWavePacket::gaussian(&g, 0.5, 0.15, 0.0, up).unwrap();
        assert!(centered.support_warnings().is_empty(), "{:?}", centered.support_warnings());
        let edge = SpinorWavePacket::gaussian(&g, 0.5, 0.3, 90.0, up).unwrap();
        assert!(!edge.support_warnings().is_empty());
        assert!(edge.guard_band_mass() > 1e-3);
    }
}
