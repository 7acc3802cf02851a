//! Physical constants and per-particle parameters.
//!
//! Everything defaults to natural units (ħ = c = m₀ = 1), in which the
//! intrinsic time is τ₀ = h/(m₀c²) = 2π.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of light.
    pub c: f64,
    /// Reduced Planck constant.
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const NATURAL: Self = Self { c: 1.0, hbar: 1.0 };

    pub fn new(c: f64, hbar: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self { c, hbar })
    }

    /// Planck constant, h = 2πħ.
    pub fn h(&self) -> f64 {
        2.0 * PI * self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Rest mass and the intrinsic time τ₀ = h/(m₀c²) tied to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleParams {
    pub m0: f64,
    pub tau0: f64,
    pub constants: PhysicalConstants,
}

impl ParticleParams {
    pub fn new(m0: f64, constants: PhysicalConstants) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return Err(Error::InvalidParameter(format!("m0 must be positive, got {m0}")));
        }
        let tau0 = constants.h() / (m0 * constants.c * constants.c);
        Ok(Self {
            m0,
            tau0,
            constants,
        })
    }

    pub fn natural() -> Self {
        Self::new(1.0, PhysicalConstants::NATURAL).expect("natural units are valid")
    }

    /// Replaces τ₀ while keeping m₀. Breaks the τ₀·m₀c² = h relation on
    /// purpose; used by ablation probes such as the τ₀ → 0 limit.
    pub fn with_tau0(mut self, tau0: f64) -> Self {
        self.tau0 = tau0;
        self
    }

    pub fn c(&self) -> f64 {
        self.constants.c
    }

    pub fn hbar(&self) -> f64 {
        self.constants.hbar
    }

    /// m₀c².
    pub fn rest_energy(&self) -> f64 {
        self.m0 * self.constants.c * self.constants.c
    }

    /// Full width of the energy gap, 2m₀c².
    pub fn energy_gap(&self) -> f64 {
        2.0 * self.rest_energy()
    }

    /// Full width of the intrinsic-time gap, 2τ₀.
    pub fn time_gap(&self) -> f64 {
        2.0 * self.tau0
    }
}

impl Default for ParticleParams {
    fn default() -> Self {
        Self::natural()
    }
}
